use super::special::bessel_j0;
use crate::error::ensure_positive;
use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Correlation values are kept this far inside `[−1, 1]`.
pub const RHO_CLAMP_GAP: f64 = 1e-9;

/// Downlink parameters shared by all vehicles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub bandwidth_hz: f64,
    pub num_agvs: u32,
    /// Control packet size per vehicle and sample, in bits.
    pub payload_bits: f64,
    /// Average receive SNR, linear.
    pub avg_snr: f64,
    pub carrier_freq_hz: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 10e6,
            num_agvs: 50,
            payload_bits: 78.0 * 8.0,
            avg_snr: 10.0,
            carrier_freq_hz: 5.9e9,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("bandwidth_hz", self.bandwidth_hz)?;
        ensure_positive("payload_bits", self.payload_bits)?;
        ensure_positive("avg_snr", self.avg_snr)?;
        ensure_positive("carrier_freq_hz", self.carrier_freq_hz)?;
        if self.num_agvs == 0 {
            return Err(Error::invalid("num_agvs", "must be at least 1"));
        }
        Ok(())
    }

    /// Spectral efficiency needed at sampling time `ts`.
    pub fn spectral_efficiency(&self, ts: f64) -> Result<f64> {
        spectral_efficiency(self.payload_bits, self.num_agvs, ts, self.bandwidth_hz)
    }
}

/// `R = D·N/(Ts·B)` in bit/s/Hz.
pub fn spectral_efficiency(payload_bits: f64, num_agvs: u32, ts: f64, bandwidth_hz: f64) -> Result<f64> {
    ensure_positive("payload_bits", payload_bits)?;
    ensure_positive("ts", ts)?;
    ensure_positive("bandwidth_hz", bandwidth_hz)?;
    if num_agvs == 0 {
        return Err(Error::invalid("num_agvs", "must be at least 1"));
    }
    Ok(payload_bits * f64::from(num_agvs) / (ts * bandwidth_hz))
}

/// Minimum normalized SNR `γ_th = (2^R − 1)/γ̄` for decoding at rate `r`.
pub fn snr_threshold(r: f64, avg_snr: f64) -> f64 {
    (r * std::f64::consts::LN_2).exp_m1() / avg_snr
}

/// Maximum Doppler shift `f_d = v·f_c/c`.
pub fn doppler_shift(velocity: f64, carrier_freq: f64) -> f64 {
    velocity * carrier_freq / SPEED_OF_LIGHT
}

/// Lag-one fading correlation `ρ = J₀(2π f_d Ts)`, not clamped.
pub fn correlation(f_d: f64, ts: f64) -> f64 {
    bessel_j0(std::f64::consts::TAU * f_d * ts)
}

/// Clamps `ρ` into `[−(1 − 10⁻⁹), 1 − 10⁻⁹]`.
pub fn clamp_correlation(rho: f64) -> f64 {
    rho.clamp(-(1.0 - RHO_CLAMP_GAP), 1.0 - RHO_CLAMP_GAP)
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
