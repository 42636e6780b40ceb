use super::{ChannelFrame, DopplerSpectrum, FrameMeta, FrameSource};
use crate::numerics::{toeplitz_cholesky, ComplexMatrix};
use crate::rng::{complex_gaussian, seeded};
use crate::{ComplexVector, Error, Result};

/// Draws frames `h = C z` from a stationary Gaussian process, where `C` is
/// the Toeplitz Cholesky factor of the spectrum's autocorrelation and `z` is
/// i.i.d. unit-variance circular complex Gaussian.
///
/// The factorization is the expensive part; build one sampler per
/// (spectrum, length) and reuse it for many frames.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    spectrum: DopplerSpectrum,
    factor: ComplexMatrix,
    jitter: f64,
}

impl GaussianSampler {
    pub fn new(spectrum: &DopplerSpectrum, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("frame length", "must be at least 1"));
        }
        let r = spectrum.autocorrelation_sequence(length)?;
        let f = toeplitz_cholesky(&r, length)?;
        Ok(GaussianSampler { spectrum: spectrum.clone(), factor: f.lower, jitter: f.jitter })
    }

    pub fn len(&self) -> usize {
        self.factor.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn spectrum(&self) -> &DopplerSpectrum {
        &self.spectrum
    }

    /// Frame drawn from the ChaCha stream seeded by `seed`.
    pub fn sample(&self, seed: u64) -> ChannelFrame {
        let mut rng = seeded(seed);
        let n = self.len();
        let z: ComplexVector = (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        // Lower-triangular product.
        let gains = (0..n).map(|i| self.factor.row(i)[..=i].iter().zip(&z[..=i]).map(|(c, z)| c * z).sum()).collect();
        ChannelFrame {
            frame_id: 0,
            gains,
            clean: None,
            meta: FrameMeta { source: FrameSource::Spectrum(self.spectrum.clone()), noise: None, seed },
        }
    }
}

/// One stationary Gaussian frame of `length` slots.
pub fn sample_frame_gaussian(spectrum: &DopplerSpectrum, length: usize, seed: u64) -> Result<ChannelFrame> {
    Ok(GaussianSampler::new(spectrum, length)?.sample(seed))
}
