use super::ChannelFrame;
use crate::rng::{complex_gaussian, seeded};
use crate::{Error, Result};

/// Pilot-based channel estimation noise.
///
/// Least-squares estimation from one pilot at `snr_db` leaves an error of
/// variance `SNR⁻¹`; averaging `pilots` estimates reduces it to `SNR⁻¹/P`.
/// `snr_db = +∞` disables the noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub snr_db: f64,
    pub pilots: u32,
}

impl NoiseConfig {
    pub fn new(snr_db: f64, pilots: u32) -> Result<Self> {
        let n = NoiseConfig { snr_db, pilots };
        n.validate()?;
        Ok(n)
    }

    pub fn disabled() -> Self {
        NoiseConfig { snr_db: f64::INFINITY, pilots: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pilots < 1 {
            return Err(Error::invalid("pilots", "need at least one pilot"));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::invalid("snr_db", alloc::format!("{} is not a usable SNR", self.snr_db)));
        }
        Ok(())
    }

    /// Per-sample estimation error variance `10^(-snr_db/10) / P`.
    pub fn variance(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            libm::pow(10.0, -self.snr_db / 10.0) / self.pilots as f64
        }
    }
}

/// Returns a copy of `frame` with every gain replaced by `h + ξ`,
/// `ξ ~ CN(0, SNR⁻¹/P)`. The noiseless gains are kept in `clean`.
pub fn add_estimation_noise(frame: &ChannelFrame, noise: &NoiseConfig, seed: u64) -> Result<ChannelFrame> {
    noise.validate()?;
    let var = noise.variance();
    if var == 0.0 {
        return Ok(frame.clone());
    }
    let mut rng = seeded(seed);
    let mut out = frame.clone();
    if out.clean.is_none() {
        out.clean = Some(frame.gains.clone());
    }
    for g in out.gains.iter_mut() {
        *g += complex_gaussian(&mut rng, var);
    }
    out.meta.noise = Some(*noise);
    Ok(out)
}
