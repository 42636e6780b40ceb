use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector};
use crate::{Error, Result};

/// Ridge added to the normal equations when a minimum-norm least-squares
/// solution is requested. Stands in for `λ = 0` when `X†X` is singular.
pub const MIN_NORM_RIDGE: f64 = 1e-12;

/// Cholesky factorization `A = L L†` of a Hermitian positive-definite matrix.
///
/// Only the lower triangle of `A` is read. A pivot that is not strictly
/// positive (or not finite) is reported as [`Error::NotPositiveDefinite`].
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: ComplexMatrix,
}

impl Cholesky {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dimension("cholesky", alloc::format!("{}x{} matrix is not square", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { op: "cholesky" });
            }
            let pivot = libm::sqrt(d);
            l[(j, j)] = Complex64::new(pivot, 0.0);
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / pivot;
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &ComplexMatrix {
        &self.lower
    }

    pub fn into_lower(self) -> ComplexMatrix {
        self.lower
    }

    /// Solves `A x = b` with the stored factor.
    pub fn solve(&self, b: &[Complex64]) -> Result<ComplexVector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::dimension(
                "cholesky solve",
                alloc::format!("{n}x{n} system with right-hand side of length {}", b.len()),
            ));
        }
        let l = &self.lower;
        let mut y = ComplexVector::from(b);
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * y[k];
            }
            y[i] = s / l[(i, i)].re;
        }
        Ok(y)
    }
}

/// Solves `A x = b` for Hermitian positive-definite `A`.
pub fn hermitian_solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<ComplexVector> {
    if !a.is_square() {
        return Err(Error::dimension(
            "hermitian_solve",
            alloc::format!("{}x{} matrix is not square", a.rows(), a.cols()),
        ));
    }
    if b.len() != a.rows() {
        return Err(Error::dimension(
            "hermitian_solve",
            alloc::format!("{}x{} system with right-hand side of length {}", a.rows(), a.cols(), b.len()),
        ));
    }
    Cholesky::factor(a).map_err(|e| e.in_op("hermitian_solve"))?.solve(b)
}

/// Minimum-norm minimizer of `||X v - y||²`.
///
/// Solved through the normal equations regularized by [`MIN_NORM_RIDGE`],
/// which converges to the pseudo-inverse solution for the small, moderately
/// conditioned systems used here.
pub fn min_norm_lstsq(x: &ComplexMatrix, y: &[Complex64]) -> Result<ComplexVector> {
    if x.rows() == 0 {
        return Err(Error::EmptySet { op: "min_norm_lstsq" });
    }
    if y.len() != x.rows() {
        return Err(Error::dimension("min_norm_lstsq", alloc::format!("{} rows but {} targets", x.rows(), y.len())));
    }
    let mut gram = x.gram();
    gram.add_diagonal(MIN_NORM_RIDGE);
    let rhs = x.adjoint_mul_vec(y)?;
    Cholesky::factor(&gram).map_err(|e| e.in_op("min_norm_lstsq"))?.solve(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_system() {
        let b = [c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)];
        let x = hermitian_solve(&ComplexMatrix::identity(3), &b).unwrap();
        assert_eq!(&x[..], &b[..]);
    }

    #[test]
    fn diagonal_system() {
        let a = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let x = hermitian_solve(&a, &[c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!(x.sub(&[c(1.0, 0.0), c(1.0, 0.0)]).norm() < 1e-15);
    }

    #[test]
    fn non_square_is_dimension_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_solve(&a, &[c(0.0, 0.0); 2]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn indefinite_is_named_singularity() {
        let a = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(hermitian_solve(&a, &[c(1.0, 0.0); 2]), Err(Error::NotPositiveDefinite { op: "hermitian_solve" }));
    }

    #[test]
    fn lstsq_identity() {
        let v = min_norm_lstsq(&ComplexMatrix::identity(2), &[c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert!(v.sub(&[c(1.0, 0.0), c(2.0, 0.0)]).norm() < 1e-10);
    }

    #[test]
    fn lstsq_underdetermined_is_min_norm() {
        let x = ComplexMatrix::from_row_major(1, 2, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let v = min_norm_lstsq(&x, &[c(3.0, 0.0)]).unwrap();
        assert!(v.sub(&[c(3.0, 0.0), c(0.0, 0.0)]).norm() < 1e-10);
    }

    #[test]
    fn lstsq_errors() {
        assert!(matches!(min_norm_lstsq(&ComplexMatrix::zeros(0, 2), &[]), Err(Error::EmptySet { .. })));
        assert!(matches!(min_norm_lstsq(&ComplexMatrix::zeros(2, 2), &[c(0.0, 0.0)]), Err(Error::Dimension { .. })));
    }
}
