//! Bessel `J₀`, exponentially scaled `I_k` and the first-order Marcum Q.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

// Hankel-expansion rational forms for |x| > 8 (Cephes j0.c)
const PP: [f64; 7] = [
    7.969367292973471e-4,
    8.283523921074408e-2,
    1.239533716464143,
    5.447250030587687,
    8.74716500199817,
    5.303240382353949,
    1.0,
];
const PQ: [f64; 7] = [
    9.244088105588637e-4,
    8.562884743544745e-2,
    1.2535274390105895,
    5.470977403304171,
    8.761908832370695,
    5.306052882353947,
    1.0,
];
const QP: [f64; 8] = [
    -1.1366383889846916e-2,
    -1.2825271867050931,
    -1.9553954425773597e1,
    -9.320601521237683e1,
    -1.7768116798048806e2,
    -1.4707750515495118e2,
    -5.141053267665993e1,
    -6.050143506007285,
];
const QQ: [f64; 7] = [
    6.43178256118178e1,
    8.564300259769806e2,
    3.8824018360540163e3,
    7.240467741956525e3,
    5.930727011873169e3,
    2.0620933166032783e3,
    2.420057402402914e2,
];

/// Horner evaluation, coefficients from the highest power down.
fn polevl(x: f64, c: &[f64]) -> f64 {
    c.iter().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Same as [`polevl`] with an implicit leading coefficient of 1.
fn p1evl(x: f64, c: &[f64]) -> f64 {
    c.iter().fold(1.0, |acc, &ck| acc * x + ck)
}

const SERIES_LIMIT: f64 = 8.0;

/// `J₀(x)`: power series for `|x| ≤ 8`, Hankel asymptotic form beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        let q = -0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= q / (k * k) as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-3) {
                break;
            }
        }
        return sum;
    }
    let w = 5.0 / x;
    let z = w * w;
    let p = polevl(z, &PP) / polevl(z, &PQ);
    let q = polevl(z, &QP) / p1evl(z, &QQ);
    let xn = x - FRAC_PI_4;
    (p * xn.cos() - w * q * xn.sin()) * SQRT_2_OVER_PI / x.sqrt()
}

/// `e^{−z} I_k(z)` for `k = 0..=k_max` by Miller's backward recurrence,
/// normalized with `Σ_{k∈ℤ} e^{−z} I_k(z) = 1`.
pub(crate) fn scaled_bessel_i(z: f64, k_max: usize) -> Vec<f64> {
    if z == 0.0 {
        let mut out = vec![0.0; k_max + 1];
        out[0] = 1.0;
        return out;
    }
    let start = k_max + 30 + (10.0 * z.sqrt()) as usize + (2.0 * z.min(25.0)) as usize;
    let mut out = vec![0.0; k_max + 1];
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= k_max {
            out[k] = cur;
        }
        norm += 2.0 * cur;
        let prev = 2.0 * k as f64 / z * cur + next;
        next = cur;
        cur = prev;
        if cur > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Above this `ab`, Q is integrated with the asymptotic form of `e^{−z}I₀(z)`.
const SERIES_MAX_Z: f64 = 1e4;

/// First-order Marcum Q function `Q₁(a, b)` for `a, b ≥ 0`.
/// Returns NaN for negative or NaN arguments.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    if !(a >= 0.0 && b >= 0.0) {
        return f64::NAN;
    }
    if b == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return (-0.5 * b * b).exp();
    }
    if b.is_infinite() {
        return 0.0;
    }
    if a.is_infinite() {
        return 1.0;
    }
    let z = a * b;
    let q = if z > SERIES_MAX_Z {
        marcum_q1_large(a, b)
    } else {
        marcum_q1_series(a, b, z)
    };
    q.clamp(0.0, 1.0)
}

fn marcum_q1_series(a: f64, b: f64, z: f64) -> f64 {
    let gauss = (-0.5 * (a - b) * (a - b)).exp();
    if gauss == 0.0 {
        return if b > a { 0.0 } else { 1.0 };
    }
    let k_max = 40 + (15.0 * z.sqrt()) as usize;
    let s = scaled_bessel_i(z, k_max);
    if a == b {
        return 0.5 * (1.0 + s[0]);
    }
    // alternate branches keep the ratio below one
    let (ratio, first) = if b > a { (a / b, 0) } else { (b / a, 1) };
    let mut sum = 0.0;
    let mut pw = if first == 0 { 1.0 } else { ratio };
    for &sk in &s[first..] {
        let term = pw * sk;
        sum += term;
        if term < 1e-17 * sum && sk < 1e-17 {
            break;
        }
        pw *= ratio;
    }
    if b > a {
        gauss * sum
    } else {
        1.0 - gauss * sum
    }
}

/// `e^{−z} I₀(z)` from its asymptotic expansion; accurate for z ≳ 10³.
fn scaled_i0_asymptotic(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= odd * odd / (8.0 * k as f64 * z);
        sum += term;
        if term < 1e-18 {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

fn gauss_legendre_20() -> &'static ([f64; 20], [f64; 20]) {
    static RULE: OnceLock<([f64; 20], [f64; 20])> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 20;
        let mut x = [0.0; N];
        let mut w = [0.0; N];
        for i in 0..N {
            let mut t = (PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = t;
            w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        (x, w)
    })
}

/// `∫ x e^{−(x−a)²/2} e^{−ax} I₀(ax) dx` over `[lo, hi]`, `ax` large throughout.
fn large_argument_integral(a: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre_20();
    let pieces = ((hi - lo) / 2.0).ceil().max(1.0) as usize;
    let h = (hi - lo) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let mid = lo + (p as f64 + 0.5) * h;
        for (t, wt) in nodes.iter().zip(weights) {
            let x = mid + 0.5 * h * t;
            total += wt * x * (-0.5 * (x - a) * (x - a)).exp() * scaled_i0_asymptotic(a * x);
        }
    }
    0.5 * h * total
}

/// Beyond 40 standard deviations from `x = a` the Rician density is negligible.
const WINDOW: f64 = 40.0;

fn marcum_q1_large(a: f64, b: f64) -> f64 {
    if b > a {
        large_argument_integral(a, b, (a + WINDOW).max(b))
    } else {
        1.0 - large_argument_integral(a, (a - WINDOW).max(0.0).min(b), b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn j0_reference_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!(bessel_j0(2.404826).abs() < 1e-6);
        assert_abs_diff_eq!(bessel_j0(1.0), 0.765_197_686_557_966_6, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_j0(-3.0), -0.260_051_954_901_933_45, epsilon = 1e-14);
        assert_abs_diff_eq!(bessel_j0(-123.985), -0.055_876_145_864_746_804, epsilon = 1e-13);
    }

    #[test]
    fn j0_branches_meet() {
        let below = bessel_j0(SERIES_LIMIT);
        let above = bessel_j0(SERIES_LIMIT + 1e-12);
        assert_abs_diff_eq!(below, above, epsilon = 1e-12);
    }

    #[test]
    fn scaled_i_sums_to_one() {
        for z in [1e-3, 0.5, 3.0, 40.0, 900.0, 9e3] {
            let s = scaled_bessel_i(z, 40 + (15.0 * f64::sqrt(z)) as usize);
            let total = s[0] + 2.0 * s[1..].iter().sum::<f64>();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-13);
            // large z: e^{-z} I_0(z) ≈ 1/√(2πz)
            if z > 100.0 {
                assert_abs_diff_eq!(s[0], scaled_i0_asymptotic(z), epsilon = 1e-12);
            }
        }
        // I_1(1) e^{-1}
        assert_abs_diff_eq!(
            scaled_bessel_i(1.0, 5)[1],
            0.565_159_103_992_485 / std::f64::consts::E,
            epsilon = 1e-15
        );
    }

    #[test]
    fn marcum_edges() {
        for a in [0.0, 0.3, 7.0, 400.0] {
            assert_eq!(marcum_q1(a, 0.0), 1.0);
        }
        for b in [0.1, 1.0, 3.0] {
            assert_eq!(marcum_q1(0.0, b), (-0.5 * b * b).exp());
        }
        assert!(marcum_q1(-1.0, 1.0).is_nan());
    }

    #[test]
    fn marcum_symmetry_identity() {
        // Q(a,b) + Q(b,a) = 1 + e^{-(a²+b²)/2} I0(ab)
        for (a, b) in [(1.0, 2.0), (3.0, 0.5), (20.0, 21.0), (150.0, 149.0), (300.0, 310.0)] {
            let s0 = if a * b > SERIES_MAX_Z {
                scaled_i0_asymptotic(a * b)
            } else {
                scaled_bessel_i(a * b, 0)[0]
            };
            let lhs = marcum_q1(a, b) + marcum_q1(b, a);
            let rhs = 1.0 + (-0.5 * (a - b) * (a - b)).exp() * s0;
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn large_argument_branch_agrees_with_series() {
        // both methods around the switch-over at ab = 1e4
        for delta in [-2.0, -0.3, 0.0, 0.4, 2.5] {
            let (a, b) = (100.0 + delta, 100.0);
            assert_abs_diff_eq!(marcum_q1_series(a, b, a * b), marcum_q1_large(a, b), epsilon = 1e-12);
        }
    }
}
