use super::link::{clamp_correlation, correlation, doppler_shift, snr_threshold, LinkParams};
use super::special::marcum_q1;
use crate::{Error, Result};

/// Definition of the Marcum-Q argument `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhiConvention {
    /// `φ = √(2γ_th/(1−ρ²))`; reduces to `P_bb = P_e(1)` at `ρ = 0`.
    #[default]
    ZorziSqrt,
    /// `φ = 2γ_th/(1−ρ²)`, without the square root.
    PaperLiteral,
}

impl PhiConvention {
    pub fn name(&self) -> &'static str {
        match self {
            PhiConvention::ZorziSqrt => "zorzi_sqrt",
            PhiConvention::PaperLiteral => "paper_literal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "zorzi_sqrt" => Some(PhiConvention::ZorziSqrt),
            "paper_literal" => Some(PhiConvention::PaperLiteral),
            _ => None,
        }
    }

    pub fn phi(&self, gamma_th: f64, rho: f64) -> f64 {
        let x = 2.0 * gamma_th / (1.0 - rho * rho);
        match self {
            PhiConvention::ZorziSqrt => x.sqrt(),
            PhiConvention::PaperLiteral => x,
        }
    }
}

/// Two-state outage model of one downlink at one sampling time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageModel {
    pub gamma_th: f64,
    /// Correlation after clamping, as used in `φ`.
    pub rho: f64,
    pub phi: f64,
    /// `P_e(1)`.
    pub p1: f64,
    /// Probability that an outage follows an outage.
    pub p_bb: f64,
    pub phi_convention: PhiConvention,
}

impl OutageModel {
    /// `rho` is clamped into `[−(1 − 10⁻⁹), 1 − 10⁻⁹]` first.
    pub fn new(gamma_th: f64, rho: f64, convention: PhiConvention) -> Result<Self> {
        if !(gamma_th > 0.0 && gamma_th.is_finite()) {
            return Err(Error::invalid(
                "gamma_th",
                format!("must be finite and > 0, got {gamma_th}"),
            ));
        }
        if !rho.is_finite() {
            return Err(Error::invalid("rho", format!("must be finite, got {rho}")));
        }
        let rho = clamp_correlation(rho);
        Ok(Self {
            gamma_th,
            rho,
            phi: convention.phi(gamma_th, rho),
            p1: outage_prob_single(gamma_th),
            p_bb: back_to_back_prob(gamma_th, rho, convention)?,
            phi_convention: convention,
        })
    }

    /// Model for `link` at sampling time `ts` and vehicle speed `velocity`.
    pub fn from_link(link: &LinkParams, ts: f64, velocity: f64, convention: PhiConvention) -> Result<Self> {
        link.validate()?;
        let r = link.spectral_efficiency(ts)?;
        let rho = correlation(doppler_shift(velocity, link.carrier_freq_hz), ts);
        Self::new(snr_threshold(r, link.avg_snr), rho, convention)
    }

    /// `P_e(n)` under this model.
    pub fn consecutive(&self, n: usize) -> f64 {
        consecutive_outage_prob(n, self.p1, self.p_bb)
    }
}

/// `P_e(1) = 1 − e^{−γ_th}` for a unit-mean Rayleigh channel.
pub fn outage_prob_single(gamma_th: f64) -> f64 {
    -(-gamma_th).exp_m1()
}

const CLAMP_TOLERANCE: f64 = 1e-6;

/// `P_bb = 1 − [Q₁(φ, ρφ) − Q₁(ρφ, φ)]/(e^{γ_th} − 1)`.
///
/// Outage statistics of the Gauss-Markov channel depend on `ρ²` only, so
/// `|ρ|` is used inside the Marcum functions.
pub fn back_to_back_prob(gamma_th: f64, rho: f64, convention: PhiConvention) -> Result<f64> {
    if !(gamma_th > 0.0 && gamma_th.is_finite()) {
        return Err(Error::invalid(
            "gamma_th",
            format!("must be finite and > 0, got {gamma_th}"),
        ));
    }
    if !(rho.abs() < 1.0) {
        return Err(Error::invalid("rho", format!("|rho| must be < 1, got {rho}")));
    }
    let rho = rho.abs();
    let phi = convention.phi(gamma_th, rho);
    let diff = marcum_q1(phi, rho * phi) - marcum_q1(rho * phi, phi);
    let raw = 1.0 - diff / gamma_th.exp_m1();
    if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&raw) {
        return Err(Error::NumericConsistency {
            context: "back_to_back_prob",
            detail: format!("P_bb = {raw} outside [0, 1] at gamma_th = {gamma_th}, rho = {rho}"),
        });
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// Above this count `P_e(n)` is evaluated in the log domain.
const LOG_DOMAIN_FROM: usize = 50;

/// `P_e(n) = p_bb^{n−1}·p1`; `P_e(0) = 1`.
pub fn consecutive_outage_prob(n: usize, p1: f64, p_bb: f64) -> f64 {
    match n {
        0 => 1.0,
        n if n <= LOG_DOMAIN_FROM => p_bb.powi((n - 1) as i32) * p1,
        n => log_consecutive_outage_prob(n, p1, p_bb).exp(),
    }
}

/// `ln P_e(n)`, finite below `f64` underflow.
pub fn log_consecutive_outage_prob(n: usize, p1: f64, p_bb: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let tail = if n == 1 { 0.0 } else { (n - 1) as f64 * p_bb.ln() };
    tail + p1.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_outage_examples() {
        assert_eq!(outage_prob_single(0.0), 0.0);
        assert_abs_diff_eq!(outage_prob_single(0.769_38), 0.536_700, epsilon = 1e-6);
        assert_eq!(outage_prob_single(f64::INFINITY), 1.0);
    }

    #[test]
    fn independence_limit() {
        for g in [0.01, 0.3, 0.76938, 2.0, 10.0] {
            let pbb = back_to_back_prob(g, 1e-6, PhiConvention::ZorziSqrt).unwrap();
            assert_abs_diff_eq!(pbb, outage_prob_single(g), epsilon = 1e-9);
        }
    }

    #[test]
    fn full_correlation_limit() {
        let pbb = back_to_back_prob(0.76938, 1.0 - 1e-9, PhiConvention::ZorziSqrt).unwrap();
        assert!(pbb > 0.999, "{pbb}");
        assert!(pbb <= 1.0);
    }

    #[test]
    fn correlation_raises_conditional_failure() {
        let g = 0.76938;
        let p1 = outage_prob_single(g);
        let mut prev = p1;
        for rho in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let pbb = back_to_back_prob(g, rho, PhiConvention::ZorziSqrt).unwrap();
            assert!(pbb >= prev - 1e-12, "rho {rho}: {pbb} < {prev}");
            prev = pbb;
        }
    }

    #[test]
    fn sign_of_rho_does_not_matter() {
        let a = back_to_back_prob(0.5, 0.6, PhiConvention::ZorziSqrt).unwrap();
        let b = back_to_back_prob(0.5, -0.6, PhiConvention::ZorziSqrt).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn literal_convention_differs() {
        let z = back_to_back_prob(0.76938, 0.5, PhiConvention::ZorziSqrt).unwrap();
        let l = back_to_back_prob(0.76938, 0.5, PhiConvention::PaperLiteral).unwrap();
        assert!((z - l).abs() > 1e-3);
        assert!((0.0..=1.0).contains(&l));
    }

    #[test]
    fn invalid_inputs() {
        assert!(back_to_back_prob(0.0, 0.5, PhiConvention::ZorziSqrt).is_err());
        assert!(back_to_back_prob(1.0, 1.0, PhiConvention::ZorziSqrt).is_err());
        assert!(OutageModel::new(1.0, f64::NAN, PhiConvention::ZorziSqrt).is_err());
    }

    #[test]
    fn consecutive_examples() {
        assert_eq!(consecutive_outage_prob(1, 0.3, 0.9), 0.3);
        assert_abs_diff_eq!(consecutive_outage_prob(3, 0.5, 0.8), 0.32, epsilon = 1e-15);
        let (p1, pbb) = (0.53672, 0.97);
        let mut iterated = p1;
        for _ in 1..155 {
            iterated *= pbb;
        }
        let closed = consecutive_outage_prob(155, p1, pbb);
        assert!(((closed - iterated) / iterated).abs() < 1e-13);
        assert!(consecutive_outage_prob(100_000, 0.5, 0.5) == 0.0);
        assert!(log_consecutive_outage_prob(100_000, 0.5, 0.5).is_finite());
    }

    #[test]
    fn model_from_default_link() {
        let m = OutageModel::from_link(&LinkParams::default(), 1e-3, 4.4, PhiConvention::ZorziSqrt).unwrap();
        assert_abs_diff_eq!(m.gamma_th, 0.769_38, epsilon = 1e-5);
        assert!(m.p_bb > m.p1);
        // J₀(2π · 86.6 Hz · 1 ms)
        assert_abs_diff_eq!(m.rho, 0.927, epsilon = 1e-3);
    }
}
