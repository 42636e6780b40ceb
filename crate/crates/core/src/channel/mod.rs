//! Per-frame channel generators.
//!
//! A frame is a short sequence of complex scalar gains `h_1 … h_L` whose
//! statistics are stationary within the frame. Frames come either from a
//! Doppler spectrum (exact Gaussian coloring through a Toeplitz Cholesky
//! factor) or from a single-cluster multipath model, and can be corrupted by
//! pilot estimation noise.

mod gaussian;
mod noise;
mod scm;
mod spectrum;

pub use gaussian::{sample_frame_gaussian, GaussianSampler};
pub use noise::{add_estimation_noise, NoiseConfig};
pub use scm::{
    exponential_power_profile, sample_frame_scm, PathRealization, ScmConfig, ScmRealization, DEFAULT_PATHS,
    DEFAULT_POWER_DECAY,
};
pub use spectrum::{DopplerSpectrum, SpectrumFamily, TabulatedSpectrum, ROUNDED_COEFFICIENTS};

use num_complex::Complex64;

use crate::ComplexVector;

/// What produced a frame.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameSource {
    Spectrum(DopplerSpectrum),
    Scm(ScmRealization),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMeta {
    pub source: FrameSource,
    pub noise: Option<NoiseConfig>,
    pub seed: u64,
}

/// One frame of channel gains.
///
/// `gains` is what a predictor observes. When estimation noise has been
/// injected, `clean` keeps the noiseless channel so predictions can be
/// scored against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFrame {
    pub frame_id: usize,
    pub gains: ComplexVector,
    pub clean: Option<ComplexVector>,
    pub meta: FrameMeta,
}

impl ChannelFrame {
    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Noiseless channel: `clean` if present, else the observed gains.
    pub fn truth(&self) -> &[Complex64] {
        self.clean.as_deref().unwrap_or(&self.gains)
    }

    pub fn with_id(mut self, frame_id: usize) -> Self {
        self.frame_id = frame_id;
        self
    }
}
