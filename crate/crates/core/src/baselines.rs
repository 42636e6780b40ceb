//! Comparison schemes: per-frame least squares, pooled least squares, and the
//! genie-aided Wiener (LMMSE) predictor that knows the frame's true
//! second-order statistics.

use num_complex::Complex64;

use crate::channel::{ChannelFrame, DopplerSpectrum, FrameSource, NoiseConfig};
use crate::dataset::RegressionSet;
use crate::numerics::{min_norm_lstsq, Cholesky, ComplexMatrix, JITTER_CAP, JITTER_START, MIN_NORM_RIDGE};
use crate::ridge::Predictor;
use crate::{ComplexVector, Error, Result};

/// Conventional learning: least squares on the new frame only (`λ = 0`,
/// minimum-norm when underdetermined).
pub fn conventional_fit(train: &RegressionSet) -> Result<Predictor> {
    if train.is_empty() {
        return Err(Error::EmptySet { op: "conventional_fit" });
    }
    let v = min_norm_lstsq(&train.design(), &train.targets()).map_err(|e| e.in_op("conventional_fit"))?;
    Ok(Predictor::new(v, train.lag()))
}

/// Running normal equations for least squares over pooled sets.
#[derive(Debug, Clone)]
pub struct PooledLeastSquares {
    gram: ComplexMatrix,
    rhs: ComplexVector,
    rows: usize,
    lag: usize,
}

impl PooledLeastSquares {
    pub fn new(window: usize, lag: usize) -> Self {
        PooledLeastSquares {
            gram: ComplexMatrix::zeros(window, window),
            rhs: ComplexVector::zeros(window),
            rows: 0,
            lag,
        }
    }

    pub fn add(&mut self, set: &RegressionSet) -> Result<()> {
        if set.is_empty() {
            return Ok(());
        }
        let x = set.design();
        self.gram.add_scaled(1.0, &x.gram())?;
        self.rhs.axpy(Complex64::new(1.0, 0.0), &x.adjoint_mul_vec(&set.targets())?);
        self.rows += set.len();
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn solve(&self) -> Result<Predictor> {
        if self.rows == 0 {
            return Err(Error::EmptySet { op: "joint_fit" });
        }
        let mut a = self.gram.clone();
        a.add_diagonal(MIN_NORM_RIDGE);
        let v = Cholesky::factor(&a).map_err(|e| e.in_op("joint_fit"))?.solve(&self.rhs)?;
        Ok(Predictor::new(v, self.lag))
    }
}

/// Joint learning: one least-squares fit over every history pair plus the
/// new frame's training pairs.
pub fn joint_fit(history: &[RegressionSet], train_new: &RegressionSet) -> Result<Predictor> {
    let mut pooled = PooledLeastSquares::new(train_new.window(), train_new.lag());
    for set in history {
        pooled.add(set)?;
    }
    pooled.add(train_new)?;
    pooled.solve()
}

/// Wiener predictor from known statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerSolution {
    pub v: ComplexVector,
    /// `r[0] - p† R⁻¹ p`.
    pub analytic_mse: f64,
    /// Observation covariance `R[m][n] = E[x_m conj(x_n)]`, noise included.
    pub covariance: ComplexMatrix,
    /// Cross-correlation `p[m] = E[x_m conj(y)]`.
    pub cross: ComplexVector,
    /// Diagonal jitter that was needed to factor `R` (zero normally).
    pub jitter: f64,
    pub lag: usize,
}

impl WienerSolution {
    pub fn predictor(&self) -> Predictor {
        Predictor::new(self.v.clone(), self.lag)
    }
}

/// LMMSE predictor of `h_{l+δ}` from `(h̃_l, …, h̃_{l-N+1})`, where the
/// observations carry white noise of variance `noise_variance` and the target
/// is the clean channel. `r(k) = E[h_{l+k} conj(h_l)]`.
pub fn wiener_from_autocorrelation(
    r: impl Fn(i64) -> Complex64,
    window: usize,
    lag: usize,
    noise_variance: f64,
) -> Result<WienerSolution> {
    if window == 0 || lag == 0 {
        return Err(Error::invalid("window/lag", "both must be at least 1"));
    }
    // x_m = h_{l-m}: E[x_m conj(x_n)] = r(n - m), E[x_m conj(h_{l+δ})] = r(-δ - m).
    let mut cov = ComplexMatrix::from_fn(window, window, |m, n| r(n as i64 - m as i64));
    cov.add_diagonal(noise_variance);
    let cross: ComplexVector = (0..window).map(|m| r(-(lag as i64) - m as i64)).collect();
    let r0 = r(0).re;

    let mut jitter = 0.0;
    let chol = loop {
        let mut a = cov.clone();
        a.add_diagonal(jitter * r0);
        match Cholesky::factor(&a) {
            Ok(ch) => break ch,
            Err(_) => {
                jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
                if jitter > JITTER_CAP * (1.0 + 1e-9) {
                    return Err(Error::NonPsdAutocorrelation { cap: JITTER_CAP });
                }
            }
        }
    };
    if jitter > 0.0 {
        log::warn!("genie_wiener: covariance is numerically singular, solved with jitter {jitter:e}");
    }
    let v = chol.solve(&cross)?;
    let analytic_mse = r0 - cross.dot(&v).re;
    Ok(WienerSolution { v, analytic_mse, covariance: cov, cross, jitter, lag })
}

/// Genie-aided LMMSE predictor for a Doppler spectrum. With a noise config
/// the observation covariance is loaded by the estimation-noise variance.
pub fn genie_wiener(
    spectrum: &DopplerSpectrum,
    window: usize,
    lag: usize,
    noise: Option<&NoiseConfig>,
) -> Result<WienerSolution> {
    let lines = spectrum.autocorrelation_sequence(window + lag)?;
    let r = |k: i64| {
        let z = lines[k.unsigned_abs() as usize];
        if k >= 0 {
            z
        } else {
            z.conj()
        }
    };
    wiener_from_autocorrelation(r, window, lag, noise.map_or(0.0, NoiseConfig::variance))
}

/// Genie for a generated frame, using that frame's own statistics: its
/// Doppler spectrum, or for multipath frames the line spectrum of the
/// realized path powers and Dopplers. `noise_aware` controls whether the
/// frame's estimation noise enters the observation covariance.
pub fn genie_for_frame(frame: &ChannelFrame, window: usize, lag: usize, noise_aware: bool) -> Result<WienerSolution> {
    let noise = if noise_aware { frame.meta.noise } else { None };
    match &frame.meta.source {
        FrameSource::Spectrum(s) => genie_wiener(s, window, lag, noise.as_ref()),
        FrameSource::Scm(real) => {
            wiener_from_autocorrelation(|k| real.autocorrelation(k), window, lag, noise.map_or(0.0, |n| n.variance()))
        }
    }
}
