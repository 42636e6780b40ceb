//! Meta-learned linear prediction of flat-fading channels.
//!
//! The crate is `no_std` (with `alloc`) and holds every algorithmic piece:
//! complex linear algebra, channel generators, lag-δ regression datasets,
//! biased ridge regression, closed-form and online meta-learning of the ridge
//! bias, and the comparison baselines. IO, configuration and the experiment
//! runner live in the `metapred` crate.
//!
//! Conventions follow the usual complex regression notation: a design matrix
//! holds the covariates `x_i†` by row, the target vector holds `conj(y_i)`,
//! and a predictor `v` produces `ŷ = v†x`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod baselines;
pub mod channel;
pub mod dataset;
mod error;
pub mod meta_offline;
pub mod meta_online;
pub mod numerics;
pub mod ridge;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::{ComplexMatrix, ComplexVector};
