//! Spectral test of the delayed loop with the lag kept as state.
//!
//! In vehicle-frame error coordinates `z(j) = T_e(θ_r(j)) (X_c(j) − X_r(j))`
//! the linearized loop with a sustained lag of `n` samples reads
//!
//! ```text
//! z(j+1) = P z(j) + Q z(j−n)
//! ```
//!
//! where `P` carries the open-loop kinematics and the frame rotation
//! `Δθ = θ_r(k+1) − θ_r(k)`, and `Q` the controller acting on the stale error.
//! Its spectrum is the root set of `C(λ) = det(λⁿ⁺¹ I − λⁿ P − Q)`, a monic
//! polynomial of degree `3(n+1)`.
//!
//! Expanding the determinant column by column gives
//! `C(λ) = Σ_m λ^{nm} D_m(λ)` with `deg D_m = m`, so the coefficients are
//! available in closed form. `Q` has rank two, which leaves `n` exact roots at
//! the origin; the remaining `2n + 3` are found with Aberth–Ehrlich iteration.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::control::Gains;

type CMat = [[Complex64; 3]; 3];

fn det3<T>(m: &[[T; 3]; 3]) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Sub<Output = T> + std::ops::Add<Output = T>,
{
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

const MAX_ITERATIONS: usize = 2000;
const REFINE_ITERATIONS: usize = 60;

/// Frozen-time delayed loop at one step of the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedLoop {
    p: [[f64; 3]; 3],
    q: [[f64; 3]; 3],
    lag: usize,
}

impl DelayedLoop {
    /// `delta_theta` is the reference heading increment over the step and
    /// `nu_delayed` the reference velocity `n` steps back.
    pub fn new(delta_theta: f64, nu_delayed: f64, lag: usize, ts: f64, g: &Gains) -> Self {
        let (s, c) = delta_theta.sin_cos();
        let tv = ts * nu_delayed;
        let p = [[c, s, s * tv], [-s, c, c * tv], [0.0, 0.0, 1.0]];
        let q = [
            [-ts * g.k_x * c, 0.0, 0.0],
            [ts * g.k_x * s, 0.0, 0.0],
            [0.0, -tv * g.k_y, -tv * g.k_theta],
        ];
        Self { p, q, lag }
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    /// Block acting on the current error.
    pub fn p(&self) -> [[f64; 3]; 3] {
        self.p
    }

    /// Block acting on the error `n` steps back.
    pub fn q(&self) -> [[f64; 3]; 3] {
        self.q
    }

    /// Number of eigenvalues, `3(n + 1)`.
    pub fn order(&self) -> usize {
        3 * (self.lag + 1)
    }

    /// `C(λ) = det(λⁿ (λI − P) − Q)`, evaluated directly.
    pub fn characteristic(&self, lambda: Complex64) -> Complex64 {
        let ln = lambda.powu(self.lag as u32);
        let m: CMat = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let diag = if i == j { lambda } else { Complex64::new(0.0, 0.0) };
                ln * (diag - self.p[i][j]) - self.q[i][j]
            })
        });
        det3(&m)
    }

    /// Coefficients of `C` in ascending powers; the last one is 1.
    ///
    /// Column `j` of the matrix is `λⁿ⁺¹ e_j − λⁿ p_j − q_j`; multilinearity
    /// turns the determinant into 27 constant determinants.
    pub fn coefficients(&self) -> Vec<f64> {
        let n = self.lag;
        let mut coeffs = vec![0.0; self.order() + 1];
        for choice in 0..27usize {
            let mut pick = [0usize; 3];
            let mut rest = choice;
            let mut degree = 0;
            for p in &mut pick {
                *p = rest % 3;
                rest /= 3;
                degree += [n + 1, n, 0][*p];
            }
            let m: [[f64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| match pick[j] {
                    0 => f64::from(u8::from(i == j)),
                    1 => -self.p[i][j],
                    _ => -self.q[i][j],
                })
            });
            coeffs[degree] += det3(&m);
        }
        coeffs
    }

    /// All `3(n+1)` eigenvalues, in no particular order.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let coeffs = self.coefficients();
        let zeros = coeffs.iter().take_while(|&&c| c == 0.0).count();
        let mut roots = aberth(&coeffs[zeros..]);
        self.refine(&mut roots);
        roots.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros));
        roots
    }

    /// `C(λ)/C'(λ)` from the matrix form; near `λ = 1` this keeps digits
    /// that the expanded coefficients have lost.
    fn direct_correction(&self, lambda: Complex64) -> Complex64 {
        let n = self.lag as u32;
        let ln = lambda.powu(n);
        let dln = if n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            lambda.powu(n - 1) * f64::from(n)
        };
        let eye = |i: usize, j: usize| if i == j { lambda } else { Complex64::new(0.0, 0.0) };
        let m: CMat = std::array::from_fn(|i| std::array::from_fn(|j| ln * (eye(i, j) - self.p[i][j]) - self.q[i][j]));
        let dm: CMat = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let unit = if i == j { ln } else { Complex64::new(0.0, 0.0) };
                dln * (eye(i, j) - self.p[i][j]) + unit
            })
        });
        // Jacobi: C' = Σ_j det(M with column j from M')
        let mut dc = Complex64::new(0.0, 0.0);
        for col in 0..3 {
            let mut mj = m;
            for (row, r) in mj.iter_mut().enumerate() {
                r[col] = dm[row][col];
            }
            dc += det3(&mj);
        }
        det3(&m) / dc
    }

    /// Second Aberth pass on the roots that can decide stability.
    fn refine(&self, roots: &mut [Complex64]) {
        let active: Vec<usize> = (0..roots.len())
            .filter(|&i| (0.5..1.5).contains(&roots[i].norm()))
            .collect();
        let mut done = vec![false; roots.len()];
        for _ in 0..REFINE_ITERATIONS {
            let mut moved = false;
            for &i in &active {
                if done[i] {
                    continue;
                }
                let w = self.direct_correction(roots[i]);
                if !w.is_finite() {
                    done[i] = true;
                    continue;
                }
                let repulsion: Complex64 = (0..roots.len())
                    .filter(|&j| j != i)
                    .map(|j| (roots[i] - roots[j]).inv())
                    .sum();
                let step = w / (Complex64::new(1.0, 0.0) - w * repulsion);
                if !step.is_finite() || step.norm() > 1e-3 * roots[i].norm() {
                    // the coefficient-based root is already accurate to far better than this
                    done[i] = true;
                    continue;
                }
                roots[i] -= step;
                moved = true;
                if step.norm() <= 4.0 * f64::EPSILON * roots[i].norm() {
                    done[i] = true;
                }
            }
            if !moved {
                break;
            }
        }
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, |a, b| if b.is_nan() { b } else { a.max(b) })
    }

    /// `true` iff all `3(n+1)` eigenvalues satisfy `|λ| < 1 − margin`.
    pub fn is_stable(&self, margin: f64) -> bool {
        self.spectral_radius() < 1.0 - margin
    }
}

/// `p(z)`, `p'(z)` and `Σ|c_k||z|^k` by Horner's rule.
fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let az = z.norm();
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
        bound = bound * az + ck.abs();
    }
    (p, dp, bound)
}

/// Newton correction `p(z)/p'(z)` and whether `p(z)` is at rounding level.
/// For `|z| > 1` the reversed polynomial is used to avoid overflow.
fn newton_correction(c: &[f64], z: Complex64) -> (Complex64, bool) {
    let d = (c.len() - 1) as f64;
    if z.norm() <= 1.0 {
        let (p, dp, bound) = horner(c, z);
        (p / dp, p.norm() <= 4.0 * f64::EPSILON * bound)
    } else {
        let y = z.inv();
        let rev: Vec<f64> = c.iter().rev().copied().collect();
        let (q, dq, bound) = horner(&rev, y);
        (q / (y * (q * d - y * dq)), q.norm() <= 4.0 * f64::EPSILON * bound)
    }
}

/// Starting points on the circles given by the Newton polygon of the
/// coefficient moduli.
fn initial_guesses(c: &[f64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    let points: Vec<(usize, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, &ck)| ck != 0.0)
        .map(|(k, &ck)| (k, ck.abs().ln()))
        .collect();
    // upper convex hull
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut guesses = Vec::with_capacity(d);
    // irrational offset keeps guesses off the real axis and off each other
    let sigma = 0.7;
    for w in hull.windows(2) {
        let (i, li) = w[0];
        let (j, lj) = w[1];
        let count = j - i;
        let radius = ((li - lj) / count as f64).exp();
        for k in 0..count {
            let angle = TAU * k as f64 / count as f64 + TAU * i as f64 / d as f64 + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    guesses
}

/// Roots of the polynomial with ascending coefficients `c` (`c[0] ≠ 0`).
fn aberth(c: &[f64]) -> Vec<Complex64> {
    let d = c.len().saturating_sub(1);
    match d {
        0 => return Vec::new(),
        1 => return vec![Complex64::new(-c[0] / c[1], 0.0)],
        _ => {}
    }
    let mut z = initial_guesses(c);
    let mut done = vec![false; d];
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (w, small) = newton_correction(c, z[i]);
            if small || !w.is_finite() {
                done[i] = true;
                continue;
            }
            all_done = false;
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = w / (Complex64::new(1.0, 0.0) - w * repulsion);
            z[i] -= step;
            if step.norm() <= f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
        if all_done {
            break;
        }
    }
    z
}
