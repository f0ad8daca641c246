use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Generator identity written to output metadata.
pub const PRNG_ID: &str = "ChaCha8Rng(rand_chacha 0.9, seed_from_u64, set_stream) + Marsaglia polar Gaussian";

/// Complex Gauss-Markov fading gain `h(k) = ρ h(k−1) + √(1−ρ²) w(k)` with
/// `E|h|² = 1`. Stream `s` of seed `x` selects ChaCha stream `s` of the
/// generator seeded from `x`, so runs can be split without overlap.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    rng: ChaCha8Rng,
    rho: f64,
    innovation: f64,
    h: Option<Complex64>,
}

impl FadingProcess {
    pub fn new(rho: f64, seed: u64, stream: u64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::invalid("rho", format!("|rho| must be < 1, got {rho}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Ok(Self {
            rng,
            rho,
            innovation: (1.0 - rho * rho).sqrt(),
            h: None,
        })
    }

    /// Circularly-symmetric complex Gaussian with unit power (polar method).
    fn unit_gaussian(&mut self) -> Complex64 {
        loop {
            let u = 2.0 * self.rng.random::<f64>() - 1.0;
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                // each component N(0, 1/2)
                let f = (-s.ln() / s).sqrt();
                return Complex64::new(u * f, v * f);
            }
        }
    }

    /// Forget the state so the next gain is a fresh stationary draw.
    pub fn restart(&mut self) {
        self.h = None;
    }

    /// Next gain; the first call returns the stationary draw `h(0)`.
    pub fn next_gain(&mut self) -> Complex64 {
        let w = self.unit_gaussian();
        let h = match self.h {
            None => w,
            Some(prev) => prev * self.rho + w * self.innovation,
        };
        self.h = Some(h);
        h
    }

    /// Next outage indicator `|h(k)|² < γ_th`.
    pub fn next_outage(&mut self, gamma_th: f64) -> bool {
        self.next_gain().norm_sqr() < gamma_th
    }

    pub fn outages(&mut self, gamma_th: f64, length: usize) -> Vec<bool> {
        (0..length).map(|_| self.next_outage(gamma_th)).collect()
    }
}

/// Outage sequence of `length` samples from stream 0 of `seed`.
pub fn sample_fading_sequence(rho: f64, gamma_th: f64, length: usize, seed: u64) -> Result<Vec<bool>> {
    if length == 0 {
        return Err(Error::invalid("length", "must be at least 1"));
    }
    Ok(FadingProcess::new(rho, seed, 0)?.outages(gamma_th, length))
}
