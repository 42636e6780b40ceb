use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::numerics::{simpson_rule, DEFAULT_QUADRATURE_NODES};
use crate::{Error, Result};

/// Rounded-spectrum polynomial coefficients `(a0, a2, a4)`.
pub const ROUNDED_COEFFICIENTS: (f64, f64, f64) = (1.0, -1.72, 0.785);

/// Spectrum shape without its Doppler scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumFamily {
    Jakes,
    Rounded,
}

/// Unit-power Doppler power spectral density on `[-π, π]` rad/slot.
///
/// Power is measured as `(1/2π)∫ S(w) dw`. `max_doppler` is `w_m` in rad/slot.
#[derive(Debug, Clone, PartialEq)]
pub enum DopplerSpectrum {
    /// `S(w) = 1 / ((w_m/2)·sqrt(1 - (w/w_m)²))` on `|w| < w_m`.
    Jakes { max_doppler: f64 },
    /// `S(w) = α·(a0 + a2 (w/w_m)² + a4 (w/w_m)⁴)` on `|w| ≤ w_m`, with
    /// `α = π / (w_m (a0 + a2/3 + a4/5))`.
    Rounded { max_doppler: f64, a0: f64, a2: f64, a4: f64 },
    /// `S(w) = 1` on `|w| ≤ π` (white process).
    Flat,
    /// Piecewise-linear density through tabulated points.
    Tabulated(TabulatedSpectrum),
}

impl DopplerSpectrum {
    pub fn jakes(max_doppler: f64) -> Result<Self> {
        let s = DopplerSpectrum::Jakes { max_doppler };
        s.validate()?;
        Ok(s)
    }

    pub fn rounded(max_doppler: f64) -> Result<Self> {
        let (a0, a2, a4) = ROUNDED_COEFFICIENTS;
        Self::rounded_with(max_doppler, a0, a2, a4)
    }

    pub fn rounded_with(max_doppler: f64, a0: f64, a2: f64, a4: f64) -> Result<Self> {
        let s = DopplerSpectrum::Rounded { max_doppler, a0, a2, a4 };
        s.validate()?;
        Ok(s)
    }

    /// Builds a spectrum of the given family from a normalized Doppler
    /// frequency in cycles/slot (`w_m = 2π·doppler`).
    pub fn from_family(family: SpectrumFamily, doppler: f64) -> Result<Self> {
        let w_m = 2.0 * PI * doppler;
        match family {
            SpectrumFamily::Jakes => Self::jakes(w_m),
            SpectrumFamily::Rounded => Self::rounded(w_m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_wm = |w_m: f64| {
            if w_m > 0.0 && w_m <= PI {
                Ok(())
            } else {
                Err(Error::invalid("max_doppler", alloc::format!("need 0 < w_m <= pi rad/slot, got {w_m}")))
            }
        };
        match *self {
            DopplerSpectrum::Jakes { max_doppler } => check_wm(max_doppler),
            DopplerSpectrum::Rounded { max_doppler, a0, a2, a4 } => {
                check_wm(max_doppler)?;
                if !(a0 + a2 / 3.0 + a4 / 5.0 > 0.0) {
                    return Err(Error::invalid("rounded coefficients", "a0 + a2/3 + a4/5 must be positive"));
                }
                // Minimum of a0 + a2 t + a4 t² over t = (w/w_m)² in [0, 1].
                let p = |t: f64| a0 + a2 * t + a4 * t * t;
                let mut lo = p(0.0).min(p(1.0));
                if a4 != 0.0 {
                    let t = -a2 / (2.0 * a4);
                    if (0.0..=1.0).contains(&t) {
                        lo = lo.min(p(t));
                    }
                }
                if lo < 0.0 {
                    return Err(Error::invalid("rounded coefficients", "density is negative inside the support"));
                }
                Ok(())
            }
            DopplerSpectrum::Flat | DopplerSpectrum::Tabulated(_) => Ok(()),
        }
    }

    /// Closed support `[lo, hi]` in rad/slot.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DopplerSpectrum::Jakes { max_doppler } | DopplerSpectrum::Rounded { max_doppler, .. } => {
                (-max_doppler, *max_doppler)
            }
            DopplerSpectrum::Flat => (-PI, PI),
            DopplerSpectrum::Tabulated(t) => (t.freqs[0], t.freqs[t.freqs.len() - 1]),
        }
    }

    /// Density `S(w)`.
    ///
    /// Jakes is singular at the band edge, so `|w| = w_m` is rejected there.
    pub fn density(&self, w: f64) -> Result<f64> {
        let (lo, hi) = self.support();
        let outside = match self {
            DopplerSpectrum::Jakes { .. } => !(w > lo && w < hi),
            _ => !(w >= lo && w <= hi),
        };
        if outside {
            return Err(Error::OutOfSupport { w, lo, hi });
        }
        Ok(match *self {
            DopplerSpectrum::Jakes { max_doppler } => {
                let u = w / max_doppler;
                1.0 / (max_doppler / 2.0 * libm::sqrt(1.0 - u * u))
            }
            DopplerSpectrum::Rounded { max_doppler, a0, a2, a4 } => {
                let u2 = (w / max_doppler) * (w / max_doppler);
                rounded_scale(max_doppler, a0, a2, a4) * (a0 + a2 * u2 + a4 * u2 * u2)
            }
            DopplerSpectrum::Flat => 1.0,
            DopplerSpectrum::Tabulated(ref t) => t.density(w),
        })
    }

    /// Autocorrelation `r[k] = (1/2π)∫ S(w) e^{jwk} dw = E[h_{l+k} conj(h_l)]`.
    ///
    /// Negative lags follow `r[-k] = conj(r[k])`.
    pub fn autocorrelation(&self, lag: i64) -> Result<Complex64> {
        Ok(self.spectral_lines()?.at(lag))
    }

    /// `r[0], …, r[len-1]`, sharing one quadrature rule across lags.
    pub fn autocorrelation_sequence(&self, len: usize) -> Result<Vec<Complex64>> {
        let lines = self.spectral_lines()?;
        Ok((0..len as i64).map(|k| lines.at(k)).collect())
    }

    /// Discretizes the spectrum into weighted spectral lines. Weights are
    /// positive, which keeps every Toeplitz matrix built from the resulting
    /// autocorrelation positive semidefinite.
    fn spectral_lines(&self) -> Result<SpectralLines> {
        self.validate()?;
        match *self {
            DopplerSpectrum::Jakes { max_doppler } => {
                // w = w_m sinθ removes the band-edge singularity:
                // r[k] = (2/π) ∫_0^{π/2} cos(w_m k sinθ) dθ.
                let (th, wt) = simpson_rule(0.0, FRAC_PI_2, DEFAULT_QUADRATURE_NODES)?;
                Ok(SpectralLines {
                    freqs: th.iter().map(|&t| max_doppler * libm::sin(t)).collect(),
                    weights: wt.iter().map(|&c| 2.0 / PI * c).collect(),
                    even: true,
                })
            }
            DopplerSpectrum::Rounded { max_doppler, .. } => {
                // Even density: r[k] = (1/π) ∫_0^{w_m} S(w) cos(wk) dw.
                let (ws, wt) = simpson_rule(0.0, max_doppler, DEFAULT_QUADRATURE_NODES)?;
                let weights = ws
                    .iter()
                    .zip(&wt)
                    .map(|(&w, &c)| self.density(w).map(|s| c * s / PI))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SpectralLines { freqs: ws, weights, even: true })
            }
            DopplerSpectrum::Flat => Ok(SpectralLines::white()),
            DopplerSpectrum::Tabulated(ref t) => Ok(t.spectral_lines()),
        }
    }
}

fn rounded_scale(w_m: f64, a0: f64, a2: f64, a4: f64) -> f64 {
    1.0 / (w_m / PI * (a0 + a2 / 3.0 + a4 / 5.0))
}

/// `r[k] = Σ_i weight_i · e^{j freq_i k}`; `even` keeps only the cosine part.
/// An empty line set encodes the white process, `r[k] = δ_k`.
struct SpectralLines {
    freqs: Vec<f64>,
    weights: Vec<f64>,
    even: bool,
}

impl SpectralLines {
    fn white() -> Self {
        SpectralLines { freqs: Vec::new(), weights: Vec::new(), even: true }
    }

    fn at(&self, lag: i64) -> Complex64 {
        if self.freqs.is_empty() {
            return Complex64::new(if lag == 0 { 1.0 } else { 0.0 }, 0.0);
        }
        let k = lag as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (&f, &w) in self.freqs.iter().zip(&self.weights) {
            re += w * libm::cos(f * k);
            if !self.even {
                im += w * libm::sin(f * k);
            }
        }
        Complex64::new(re, im)
    }
}

/// Piecewise-linear density through `(freq_i, density_i)`, rescaled to unit
/// power on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    freqs: Vec<f64>,
    densities: Vec<f64>,
}

impl TabulatedSpectrum {
    pub fn new(freqs: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        if freqs.len() < 2 || freqs.len() != densities.len() {
            return Err(Error::invalid("tabulated spectrum", "need at least two (frequency, density) points"));
        }
        if freqs.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::invalid("tabulated spectrum", "frequencies must be strictly increasing"));
        }
        if freqs[0] < -PI || freqs[freqs.len() - 1] > PI {
            return Err(Error::invalid("tabulated spectrum", "frequencies must lie in [-pi, pi]"));
        }
        if densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::invalid("tabulated spectrum", "densities must be finite and nonnegative"));
        }
        // Trapezoid is exact for the piecewise-linear interpolant.
        let area: f64 =
            freqs.windows(2).zip(densities.windows(2)).map(|(f, d)| 0.5 * (d[0] + d[1]) * (f[1] - f[0])).sum();
        if !(area > 0.0) {
            return Err(Error::invalid("tabulated spectrum", "density integrates to zero"));
        }
        let scale = 2.0 * PI / area;
        Ok(TabulatedSpectrum { freqs, densities: densities.into_iter().map(|d| d * scale).collect() })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    fn density(&self, w: f64) -> f64 {
        let i = self.freqs.partition_point(|&f| f <= w).clamp(1, self.freqs.len() - 1);
        let (f0, f1) = (self.freqs[i - 1], self.freqs[i]);
        let (d0, d1) = (self.densities[i - 1], self.densities[i]);
        d0 + (d1 - d0) * (w - f0) / (f1 - f0)
    }

    /// Simpson within each linear segment, so the zero-lag power is exact.
    fn spectral_lines(&self) -> SpectralLines {
        let segments = self.freqs.len() - 1;
        let per_segment = (DEFAULT_QUADRATURE_NODES / segments).max(3) | 1;
        let mut freqs = Vec::new();
        let mut weights = Vec::new();
        for s in 0..segments {
            let (f0, f1) = (self.freqs[s], self.freqs[s + 1]);
            let (d0, d1) = (self.densities[s], self.densities[s + 1]);
            let (ws, cs) = simpson_rule(f0, f1, per_segment).expect("segment endpoints are increasing");
            for (w, c) in ws.into_iter().zip(cs) {
                let d = d0 + (d1 - d0) * (w - f0) / (f1 - f0);
                freqs.push(w);
                weights.push(c * d / (2.0 * PI));
            }
        }
        SpectralLines { freqs, weights, even: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rounded_at_zero() {
        let w_m = 2.0 * PI * 0.07;
        let s = DopplerSpectrum::rounded(w_m).unwrap();
        let alpha = PI / (w_m * (1.0 - 1.72 / 3.0 + 0.785 / 5.0));
        assert!((s.density(0.0).unwrap() - alpha).abs() < 1e-12 * alpha);
    }

    #[test]
    fn jakes_at_zero() {
        let w_m = 0.4;
        let s = DopplerSpectrum::jakes(w_m).unwrap();
        assert!((s.density(0.0).unwrap() - 2.0 / w_m).abs() < 1e-12);
    }

    #[test]
    fn flat_is_one() {
        for w in [-PI, -1.0, 0.0, 2.5, PI] {
            assert_eq!(DopplerSpectrum::Flat.density(w).unwrap(), 1.0);
        }
    }

    #[test]
    fn support_violations() {
        let s = DopplerSpectrum::jakes(0.5).unwrap();
        assert!(matches!(s.density(0.5), Err(Error::OutOfSupport { .. })));
        assert!(matches!(s.density(-0.6), Err(Error::OutOfSupport { .. })));
        let r = DopplerSpectrum::rounded(0.5).unwrap();
        assert!(r.density(0.5).is_ok());
        assert!(r.density(0.51).is_err());
        assert!(DopplerSpectrum::Flat.density(3.2).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(DopplerSpectrum::jakes(0.0).is_err());
        assert!(DopplerSpectrum::jakes(4.0).is_err());
        assert!(DopplerSpectrum::rounded_with(0.5, 1.0, -3.0, 0.0).is_err());
        assert!(TabulatedSpectrum::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(TabulatedSpectrum::new(vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
    }

    #[test]
    fn unit_power_at_lag_zero() {
        let tab = TabulatedSpectrum::new(vec![-0.3, 0.0, 0.2, 0.5], vec![1.0, 3.0, 0.5, 0.0]).unwrap();
        for s in [
            DopplerSpectrum::jakes(0.3).unwrap(),
            DopplerSpectrum::rounded(0.3).unwrap(),
            DopplerSpectrum::Flat,
            DopplerSpectrum::Tabulated(tab),
        ] {
            let r0 = s.autocorrelation(0).unwrap();
            assert!((r0.re - 1.0).abs() < 1e-6, "{s:?}: {r0}");
            assert!(r0.im.abs() < 1e-12);
        }
    }

    #[test]
    fn flat_has_no_memory() {
        assert!(DopplerSpectrum::Flat.autocorrelation(1).unwrap().norm() < 1e-10);
    }

    #[test]
    fn even_spectra_are_real() {
        for s in [DopplerSpectrum::jakes(0.5).unwrap(), DopplerSpectrum::rounded(0.5).unwrap()] {
            for k in 0..20 {
                assert!(s.autocorrelation(k).unwrap().im.abs() <= 1e-10);
            }
        }
    }
}
