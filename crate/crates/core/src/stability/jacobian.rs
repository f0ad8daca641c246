use super::linalg::{Matrix3, Matrix3x2};
use crate::control::Gains;

/// State Jacobian `A(k)` of the delayed closed loop at zero tracking error,
/// with the delayed state identified with the current one.
///
/// `theta_k` is the current heading, `theta_kn` the heading `n` steps back
/// and `nu_kn` the translational velocity commanded `n` steps back.
pub fn jacobian_a(theta_k: f64, theta_kn: f64, nu_kn: f64, ts: f64, g: &Gains) -> Matrix3 {
    let (sk, ck) = theta_k.sin_cos();
    let (sn, cn) = theta_kn.sin_cos();
    let kx = ts * g.k_x;
    let ky = ts * g.k_y * nu_kn;
    Matrix3([
        [1.0 - kx * ck * cn, -kx * ck * sn, -ts * sk * nu_kn],
        [-kx * sk * cn, 1.0 - kx * sk * sn, ts * ck * nu_kn],
        [ky * sn, -ky * cn, 1.0 - ts * g.k_theta * nu_kn],
    ])
}

/// Input Jacobian `B(k)`.
pub fn jacobian_b(theta_k: f64) -> Matrix3x2 {
    let (s, c) = theta_k.sin_cos();
    Matrix3x2([[c, 0.0], [s, 0.0], [0.0, 1.0]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::linalg::eigenvalues3;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn reference_point_entries() {
        let a = jacobian_a(0.0, 0.0, 4.4, 1e-3, &Gains::default());
        let expected = [[0.99, 0.0, 0.0], [0.0, 1.0, 0.0044], [0.0, -2.816e-5, 0.999296]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(a.get(i, j), expected[i][j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn reference_point_eigenvalues() {
        let a = jacobian_a(0.0, 0.0, 4.4, 1e-3, &Gains::default());
        let e = eigenvalues3(&a);
        let det2 = a.get(1, 1) * a.get(2, 2) - a.get(1, 2) * a.get(2, 1);
        let mut moduli: Vec<f64> = e.values().iter().map(|z| z.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(moduli[0], 0.99, epsilon = 1e-12);
        // K_θ² = 4 K_y makes the lateral pair (numerically) repeated
        assert_abs_diff_eq!(moduli[1], det2.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(moduli[2], det2.sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(det2.sqrt(), 0.99965, epsilon = 1e-5);
    }

    #[test]
    fn small_ts_tends_to_identity() {
        let a = jacobian_a(0.7, 0.2, 30.0, 1e-12, &Gains::default());
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(a.get(i, j), id, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn b_columns() {
        let b = jacobian_b(0.0);
        assert_eq!(b.0, [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]);
        let b = jacobian_b(FRAC_PI_2);
        assert_abs_diff_eq!(b.get(0, 0), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(b.get(1, 0), 1.0);
        for theta in [-3.0, -0.4, 0.9, 2.2, 11.0] {
            let b = jacobian_b(theta);
            for col in 0..2 {
                let c = b.column(col);
                assert_abs_diff_eq!(c.iter().map(|v| v * v).sum::<f64>(), 1.0, epsilon = 1e-15);
            }
        }
    }
}
