//! Complex linear algebra and quadrature shared by the rest of the crate.
//!
//! Everything is double precision. Matrices are dense and row-major; the
//! problem sizes here (windows of a handful of taps, Toeplitz blocks of a
//! few hundred slots) never call for anything more elaborate.

mod matrix;
mod quadrature;
mod solve;
mod toeplitz;

pub use matrix::{ComplexMatrix, ComplexVector};
pub use quadrature::{simpson, simpson_rule, DEFAULT_QUADRATURE_NODES};
pub use solve::{hermitian_solve, min_norm_lstsq, Cholesky, MIN_NORM_RIDGE};
pub use toeplitz::{hermitian_toeplitz, toeplitz_cholesky, ToeplitzFactor, JITTER_CAP, JITTER_START};
