use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ChannelFrame, FrameMeta, FrameSource};
use crate::rng::seeded;
use crate::{Error, Result};

pub const DEFAULT_PATHS: usize = 23;
/// e-folding length, in paths, of the default exponential power profile.
pub const DEFAULT_POWER_DECAY: f64 = 8.0;

/// Single-cluster multipath model.
///
/// `h_l = Σ_d sqrt(Ω_d) · g_d · exp(-j ν_d l)`, where each path gets a
/// Doppler shift `ν_d = 2π f_d T_slot` with `f_d ~ U(doppler_hz_range)` and a
/// unit-modulus random phase. With polarization enabled the path gain is
/// `g_d = F_rxᵀ M_d F_tx e^{jφ_d}`, `M_d` carrying four random phases and a
/// log-normal cross-polarization ratio κ_d (`10 log10 κ ~ N(μ, σ²)`).
/// Antenna patterns and path-length phases are folded into the fixed field
/// gain vectors and the per-path phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ScmConfig {
    /// Average path powers Ω_d; must sum to one.
    pub path_powers: Vec<f64>,
    /// Per-path Doppler range in Hz.
    pub doppler_hz_range: (f64, f64),
    /// Slot duration in seconds.
    pub slot_duration: f64,
    pub polarization_enabled: bool,
    pub xpr_mu_db: f64,
    pub xpr_sigma_db: f64,
    pub field_gain_tx: [Complex64; 2],
    pub field_gain_rx: [Complex64; 2],
}

impl Default for ScmConfig {
    fn default() -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        ScmConfig {
            path_powers: exponential_power_profile(DEFAULT_PATHS, DEFAULT_POWER_DECAY),
            doppler_hz_range: (10.0, 100.0),
            slot_duration: 1e-3,
            polarization_enabled: false,
            xpr_mu_db: 7.0,
            xpr_sigma_db: 3.0,
            field_gain_tx: [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            field_gain_rx: [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        }
    }
}

/// `Ω_d ∝ exp(-d / decay)` for `d = 0..paths`, normalized to unit sum.
pub fn exponential_power_profile(paths: usize, decay: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..paths).map(|d| libm::exp(-(d as f64) / decay)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

impl ScmConfig {
    pub fn paths(&self) -> usize {
        self.path_powers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.path_powers.is_empty() {
            return Err(Error::invalid("path_powers", "need at least one path"));
        }
        if self.path_powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::invalid("path_powers", "powers must be finite and nonnegative"));
        }
        let total: f64 = self.path_powers.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("path_powers", alloc::format!("powers sum to {total}, expected 1")));
        }
        let (lo, hi) = self.doppler_hz_range;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::invalid("doppler_hz_range", alloc::format!("need 0 <= lo <= hi, got [{lo}, {hi}]")));
        }
        if !(self.slot_duration > 0.0 && self.slot_duration.is_finite()) {
            return Err(Error::invalid("slot_duration", "must be positive"));
        }
        if self.polarization_enabled && !(self.xpr_mu_db.is_finite() && self.xpr_sigma_db >= 0.0) {
            return Err(Error::invalid("xpr", "need finite mu and sigma >= 0"));
        }
        Ok(())
    }
}

/// Realized per-path parameters of one SCM frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRealization {
    /// `sqrt(Ω_d) · g_d`.
    pub amplitude: Complex64,
    /// ν_d in rad/slot.
    pub doppler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScmRealization {
    pub paths: Vec<PathRealization>,
}

impl ScmRealization {
    /// Autocorrelation of the line spectrum conditioned on the realized path
    /// powers and Dopplers (phases averaged out):
    /// `r[k] = Σ_d |a_d|² e^{-j ν_d k}`.
    pub fn autocorrelation(&self, lag: i64) -> Complex64 {
        let k = lag as f64;
        self.paths.iter().map(|p| Complex64::from_polar(p.amplitude.norm_sqr(), -p.doppler * k)).sum()
    }

    pub fn autocorrelation_sequence(&self, len: usize) -> Vec<Complex64> {
        (0..len as i64).map(|k| self.autocorrelation(k)).collect()
    }

    pub fn gain(&self, slot: usize) -> Complex64 {
        let l = slot as f64;
        self.paths.iter().map(|p| p.amplitude * Complex64::from_polar(1.0, -p.doppler * l)).sum()
    }
}

fn uniform_phase<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-PI..PI)
}

/// One frame from the single-cluster model, slots `l = 1..=length`.
pub fn sample_frame_scm(config: &ScmConfig, length: usize, seed: u64) -> Result<ChannelFrame> {
    config.validate()?;
    let mut rng = seeded(seed);
    let (lo, hi) = config.doppler_hz_range;
    let [ftx0, ftx1] = config.field_gain_tx;
    let [frx0, frx1] = config.field_gain_rx;
    let paths = config
        .path_powers
        .iter()
        .map(|&omega| {
            let hz = if lo == hi { lo } else { rng.random_range(lo..hi) };
            let doppler = 2.0 * PI * hz * config.slot_duration;
            let phase = Complex64::from_polar(1.0, uniform_phase(&mut rng));
            let g = if config.polarization_enabled {
                let e = |rng: &mut _| Complex64::from_polar(1.0, uniform_phase(rng));
                let (tt, tp, pt, pp) = (e(&mut rng), e(&mut rng), e(&mut rng), e(&mut rng));
                let z: f64 = rng.sample(StandardNormal);
                let kappa = libm::pow(10.0, (config.xpr_mu_db + config.xpr_sigma_db * z) / 10.0);
                let x = libm::sqrt(1.0 / kappa);
                // F_rxᵀ · [[tt, x·tp], [x·pt, pp]] · F_tx
                let m_ftx0 = tt * ftx0 + x * tp * ftx1;
                let m_ftx1 = x * pt * ftx0 + pp * ftx1;
                (frx0 * m_ftx0 + frx1 * m_ftx1) * phase
            } else {
                phase
            };
            PathRealization { amplitude: g * libm::sqrt(omega), doppler }
        })
        .collect();
    let realization = ScmRealization { paths };
    let gains = (1..=length).map(|l| realization.gain(l)).collect();
    Ok(ChannelFrame {
        frame_id: 0,
        gains,
        clean: None,
        meta: FrameMeta { source: FrameSource::Scm(realization), noise: None, seed },
    })
}
