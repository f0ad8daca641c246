//! Fixed-size matrices and a closed-form 3×3 eigenvalue solver.

use num_complex::Complex64;

/// Row-major 3×3 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix3(pub [[f64; 3]; 3]);

/// Row-major 3×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Matrix3x2(pub [[f64; 2]; 3]);

impl Matrix3 {
    pub const IDENTITY: Matrix3 = Matrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Matrix3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Sum of the three principal 2×2 minors.
    pub fn principal_minor_sum(&self) -> f64 {
        let m = &self.0;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Coefficients `(c2, c1, c0)` of `det(λI − A) = λ³ + c2 λ² + c1 λ + c0`.
    pub fn characteristic(&self) -> (f64, f64, f64) {
        (-self.trace(), self.principal_minor_sum(), -self.determinant())
    }

    /// `A · v` for a complex vector.
    pub fn mul_complex(&self, v: &[Complex64; 3]) -> [Complex64; 3] {
        let m = &self.0;
        std::array::from_fn(|i| v[0] * m[i][0] + v[1] * m[i][1] + v[2] * m[i][2])
    }
}

impl Matrix3x2 {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn column(&self, col: usize) -> [f64; 3] {
        [self.0[0][col], self.0[1][col], self.0[2][col]]
    }
}

/// The three eigenvalues of a 3×3 matrix. The first entry is always real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple(pub [Complex64; 3]);

impl EigenTriple {
    pub fn values(&self) -> &[Complex64; 3] {
        &self.0
    }

    pub fn spectral_radius(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn eval_cubic(c2: f64, c1: f64, c0: f64, z: Complex64) -> Complex64 {
    ((z + c2) * z + c1) * z + c0
}

fn eval_cubic_derivative(c2: f64, c1: f64, z: Complex64) -> Complex64 {
    (z * 3.0 + 2.0 * c2) * z + c1
}

/// Newton polishing that only accepts steps which shrink the residual.
fn polish(c2: f64, c1: f64, c0: f64, mut z: Complex64) -> Complex64 {
    let mut residual = eval_cubic(c2, c1, c0, z).norm();
    for _ in 0..8 {
        if residual == 0.0 {
            break;
        }
        let d = eval_cubic_derivative(c2, c1, z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - eval_cubic(c2, c1, c0, z) / d;
        let r = eval_cubic(c2, c1, c0, next).norm();
        if !(r < residual) {
            break;
        }
        z = next;
        residual = r;
    }
    z
}

/// One real root of the monic cubic, taken as the largest-magnitude
/// real root when all three are real.
fn real_root(c2: f64, c1: f64, c0: f64) -> f64 {
    let shift = c2 / 3.0;
    let p = c1 - c2 * shift;
    let q = 2.0 * shift * shift * shift - shift * c1 + c0;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let t = if p == 0.0 && q == 0.0 {
        0.0
    } else if disc > 0.0 {
        let u = (-half_q - half_q.signum() * disc.sqrt()).cbrt();
        if u == 0.0 {
            0.0
        } else {
            u - third_p / u
        }
    } else {
        // three real roots: trigonometric form, k = 0 branch
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos()
    };
    t - shift
}

/// Roots of `λ² + bλ + c`, computed without cancellation.
fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            [Complex64::new(0.0, 0.0); 2]
        } else {
            [Complex64::new(q, 0.0), Complex64::new(c / q, 0.0)]
        }
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// Eigenvalues of a 3×3 matrix from its characteristic cubic.
///
/// A real root comes from the depressed cubic (Cardano or trigonometric
/// branch) and the remaining pair from the deflated quadratic, after which
/// every root is Newton-polished on the full cubic.
pub fn eigenvalues3(a: &Matrix3) -> EigenTriple {
    // Work on A − sI with s = tr(A)/3: for A close to a multiple of the
    // identity the shifted entries are small and the cubic keeps their
    // precision, which matters for the near-double roots of A(k).
    let shift = a.trace() / 3.0;
    let mut shifted = *a;
    for i in 0..3 {
        shifted.0[i][i] -= shift;
    }
    let (c2, c1, c0) = shifted.characteristic();
    let r = polish(c2, c1, c0, Complex64::new(real_root(c2, c1, c0), 0.0)).re;
    let b = c2 + r;
    // pick the better-conditioned expression for the constant term
    let c = if r.abs() > c2.abs().max(c1.abs().sqrt()) && c0 != 0.0 {
        -c0 / r
    } else {
        c1 + b * r
    };
    let [z1, z2] = quadratic_roots(b, c);
    let (z1, z2) = if z1.im != 0.0 {
        let z = polish(c2, c1, c0, z1);
        (z, z.conj())
    } else {
        (polish(c2, c1, c0, z1), polish(c2, c1, c0, z2))
    };
    let back = |z: Complex64| z + shift;
    EigenTriple([Complex64::new(r + shift, 0.0), back(z1), back(z2)])
}

/// Unit eigenvector for eigenvalue `lambda`, from the largest cross product
/// of two rows of `A − λI`.
pub fn eigenvector3(a: &Matrix3, lambda: Complex64) -> [Complex64; 3] {
    let rows: [[Complex64; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let v = Complex64::new(a.0[i][j], 0.0);
            if i == j {
                v - lambda
            } else {
                v
            }
        })
    });
    let cross = |u: &[Complex64; 3], v: &[Complex64; 3]| -> [Complex64; 3] {
        [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ]
    };
    let norm = |v: &[Complex64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let candidates = [
        cross(&rows[0], &rows[1]),
        cross(&rows[0], &rows[2]),
        cross(&rows[1], &rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|x, y| norm(x).total_cmp(&norm(y)))
        .copied()
        .unwrap_or_default();
    let n = norm(&best);
    if n == 0.0 {
        // A − λI has rank ≤ 1: any vector orthogonal to a non-zero row works
        let row = rows.iter().max_by(|x, y| norm(x).total_cmp(&norm(y))).unwrap();
        if norm(row) == 0.0 {
            return [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()];
        }
        let e = if row[0].norm() <= row[1].norm() && row[0].norm() <= row[2].norm() {
            [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()]
        } else if row[1].norm() <= row[2].norm() {
            [Complex64::default(), Complex64::new(1.0, 0.0), Complex64::default()]
        } else {
            [Complex64::default(), Complex64::default(), Complex64::new(1.0, 0.0)]
        };
        let conj_row = [row[0].conj(), row[1].conj(), row[2].conj()];
        let v = cross(&conj_row, &e);
        let nv = norm(&v);
        return v.map(|z| z / nv);
    }
    best.map(|z| z / n)
}

/// `true` iff every eigenvalue satisfies `|λ| < 1 − margin`.
///
/// A zero eigenvalue counts as stable.
pub fn is_stable_step(a: &Matrix3, margin: f64) -> bool {
    eigenvalues3(a).spectral_radius() < 1.0 - margin
}
