use num_complex::Complex64;

use super::{Cholesky, ComplexMatrix};
use crate::{Error, Result};

/// First nonzero diagonal jitter tried when the plain factorization fails.
pub const JITTER_START: f64 = 1e-12;
/// Largest jitter before the autocorrelation is declared non-PSD.
pub const JITTER_CAP: f64 = 1e-6;

/// Hermitian Toeplitz matrix `T[m][n] = r[m - n]`, with `r[-k] = conj(r[k])`.
pub fn hermitian_toeplitz(r: &[Complex64], n: usize) -> Result<ComplexMatrix> {
    if r.len() < n {
        return Err(Error::dimension(
            "hermitian_toeplitz",
            alloc::format!("{n}x{n} matrix needs {n} lags, got {}", r.len()),
        ));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| if i >= j { r[i - j] } else { r[j - i].conj() }))
}

/// Lower Cholesky factor of a Toeplitz covariance together with the
/// diagonal jitter that was needed to obtain it.
#[derive(Debug, Clone)]
pub struct ToeplitzFactor {
    pub lower: ComplexMatrix,
    pub jitter: f64,
}

/// Factors `T + jitter·I = C C†` for the Hermitian Toeplitz matrix built
/// from `r`. The jitter starts at zero and escalates by ×10 from
/// [`JITTER_START`] up to [`JITTER_CAP`].
pub fn toeplitz_cholesky(r: &[Complex64], n: usize) -> Result<ToeplitzFactor> {
    let r0 = r.first().copied().unwrap_or_default();
    if !(r0.re > 0.0) || r0.im != 0.0 {
        return Err(Error::invalid("autocorrelation", "r[0] must be real and positive"));
    }
    let t = hermitian_toeplitz(r, n)?;
    let mut jitter = 0.0;
    loop {
        let mut a = t.clone();
        a.add_diagonal(jitter);
        match Cholesky::factor(&a) {
            Ok(ch) => {
                if jitter > 0.0 {
                    log::debug!("toeplitz_cholesky: n = {n} needed jitter {jitter:e}");
                }
                return Ok(ToeplitzFactor { lower: ch.into_lower(), jitter });
            }
            Err(_) => {
                jitter = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
                if jitter > JITTER_CAP * (1.0 + 1e-9) {
                    return Err(Error::NonPsdAutocorrelation { cap: JITTER_CAP });
                }
            }
        }
    }
}
