//! Ridge regression biased toward a prior vector.
//!
//! `v*(Z | v̄) = argmin_v ||X v - y||² + λ ||v - v̄||² = A⁻¹ (X†y + λ v̄)`,
//! `A = X†X + λI`. With `λ = 0` the minimum-norm least-squares solution is
//! used instead, so an answer exists even when `X†X` is singular.

use num_complex::Complex64;

use crate::dataset::RegressionSet;
use crate::numerics::{hermitian_solve, min_norm_lstsq, ComplexMatrix};
use crate::{ComplexVector, Error, Result};

/// Regularization weight and bias vector of the ridge problem.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub lambda: f64,
    pub bias: ComplexVector,
}

impl HyperParams {
    pub fn new(lambda: f64, bias: ComplexVector) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", alloc::format!("need a finite lambda >= 0, got {lambda}")));
        }
        Ok(HyperParams { lambda, bias })
    }

    /// `λ` with a zero bias (plain ridge shrinkage).
    pub fn unbiased(lambda: f64, window: usize) -> Result<Self> {
        Self::new(lambda, ComplexVector::zeros(window))
    }
}

/// Linear lag-δ predictor `ĥ_{l+δ} = v† (h_l, …, h_{l-N+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub v: ComplexVector,
    pub lag: usize,
}

impl Predictor {
    pub fn new(v: ComplexVector, lag: usize) -> Self {
        Predictor { v, lag }
    }

    pub fn window(&self) -> usize {
        self.v.len()
    }

    /// `v† · window`.
    pub fn predict(&self, window: &[Complex64]) -> Result<Complex64> {
        if window.len() != self.v.len() {
            return Err(Error::dimension(
                "predict",
                alloc::format!("window of length {} for a {}-tap predictor", window.len(), self.v.len()),
            ));
        }
        Ok(self.v.dot(window))
    }

    /// Mean of `|v†x_i - y_i|²` over the set.
    pub fn mse(&self, set: &RegressionSet) -> Result<f64> {
        if set.is_empty() {
            return Err(Error::EmptySet { op: "mse" });
        }
        let mut total = 0.0;
        for (x, y) in set.pairs() {
            total += (self.predict(x)? - y).norm_sqr();
        }
        Ok(total / set.len() as f64)
    }
}

/// Normal-equation pieces `(X†X + λI, X†y + λv̄)` of the biased ridge problem.
pub(crate) fn ridge_system(
    train: &RegressionSet,
    lambda: f64,
    bias: &[Complex64],
) -> Result<(ComplexMatrix, ComplexVector)> {
    let x = train.design();
    let mut a = x.gram();
    a.add_diagonal(lambda);
    let mut b = x.adjoint_mul_vec(&train.targets())?;
    b.axpy(Complex64::new(lambda, 0.0), bias);
    Ok((a, b))
}

/// Closed-form biased ridge regression on `train`.
pub fn ridge_solve(train: &RegressionSet, hp: &HyperParams) -> Result<Predictor> {
    if hp.bias.len() != train.window() {
        return Err(Error::dimension(
            "ridge_solve",
            alloc::format!("bias of length {} for window {}", hp.bias.len(), train.window()),
        ));
    }
    if !(hp.lambda >= 0.0) {
        return Err(Error::invalid("lambda", "must be nonnegative"));
    }
    let v = if hp.lambda == 0.0 {
        if train.is_empty() {
            return Err(Error::NoInformation);
        }
        min_norm_lstsq(&train.design(), &train.targets()).map_err(|e| e.in_op("ridge_solve"))?
    } else if train.is_empty() {
        hp.bias.clone()
    } else {
        let (a, b) = ridge_system(train, hp.lambda, &hp.bias)?;
        hermitian_solve(&a, &b).map_err(|e| e.in_op("ridge_solve"))?
    };
    Ok(Predictor::new(v, train.lag()))
}
