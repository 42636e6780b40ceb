//! Closed-form meta-learning of the ridge bias across frames.
//!
//! For fixed `λ`, the test loss of the ridge-adapted predictor
//! `Σ_f Σ_i |v*_λ(Z_f^tr | v̄)† x_{i,f}^te - y_{i,f}^te|²` is an ordinary
//! least-squares problem in `v̄`. Each frame contributes a transformed pair
//! `(X̃_f, ỹ_f)` with rows `(λ A_f⁻¹ x_i^te)†` and targets
//! `conj(y_i^te - (y_f^tr)† X_f^tr A_f⁻¹ x_i^te)`, where
//! `A_f = (X_f^tr)† X_f^tr + λI`; stacking them and solving gives `v̄*_λ`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dataset::{split, RegressionSet, SplitPolicy, SplitSet};
use crate::numerics::{Cholesky, ComplexMatrix, MIN_NORM_RIDGE};
use crate::ridge::{ridge_solve, HyperParams, Predictor};
use crate::rng::derive_seed;
use crate::{ComplexVector, Error, Result};

/// Per-frame transformed least-squares pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPair {
    pub design: ComplexMatrix,
    pub target: ComplexVector,
}

impl TransformedPair {
    /// `||X̃ v̄ - ỹ||²`.
    pub fn loss(&self, bias: &[Complex64]) -> Result<f64> {
        let r = self.design.mul_vec(bias)?.sub(&self.target);
        Ok(r.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `2 X̃† (X̃ v̄ - ỹ)`.
    pub fn gradient(&self, bias: &[Complex64]) -> Result<ComplexVector> {
        let r = self.design.mul_vec(bias)?.sub(&self.target);
        Ok(self.design.adjoint_mul_vec(&r)?.scaled(2.0))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("lambda", alloc::format!("meta-learning needs lambda > 0, got {lambda}")))
    }
}

/// Maps one frame's split into its transformed pair.
pub fn transform_pair(s: &SplitSet, lambda: f64) -> Result<TransformedPair> {
    check_lambda(lambda)?;
    let n = s.window();
    if s.test.window() != n {
        return Err(Error::dimension("transform_pair", "train and test windows differ"));
    }
    let x_tr = s.train.design();
    let mut a = x_tr.gram();
    a.add_diagonal(lambda);
    let chol = Cholesky::factor(&a).map_err(|e| e.in_op("transform_pair"))?;
    // (y^tr)† X^tr w = (X^tr† y^tr)† w
    let u = x_tr.adjoint_mul_vec(&s.train.targets())?;
    let mut design = Vec::with_capacity(s.test.len() * n);
    let mut target = Vec::with_capacity(s.test.len());
    for (x, y) in s.test.pairs() {
        let w = chol.solve(x)?;
        design.extend(w.iter().map(|z| (z * lambda).conj()));
        target.push((y - u.dot(&w)).conj());
    }
    Ok(TransformedPair { design: ComplexMatrix::from_row_major(s.test.len(), n, design)?, target: target.into() })
}

/// Accumulated normal equations `Σ X̃_f† X̃_f`, `Σ X̃_f† ỹ_f`.
#[derive(Debug, Clone)]
pub struct MetaNormalEquations {
    gram: ComplexMatrix,
    rhs: ComplexVector,
    rows: usize,
}

impl MetaNormalEquations {
    pub fn new(window: usize) -> Self {
        MetaNormalEquations { gram: ComplexMatrix::zeros(window, window), rhs: ComplexVector::zeros(window), rows: 0 }
    }

    pub fn add(&mut self, pair: &TransformedPair) -> Result<()> {
        self.gram.add_scaled(1.0, &pair.design.gram())?;
        let b = pair.design.adjoint_mul_vec(&pair.target)?;
        self.rhs.axpy(Complex64::new(1.0, 0.0), &b);
        self.rows += pair.design.rows();
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    pub fn rhs(&self) -> &ComplexVector {
        &self.rhs
    }

    /// Minimizer of the stacked least-squares problem, optionally pulled
    /// toward `anchor` with weight `anchor_weight`. A rank-deficient stacked
    /// system falls back to the minimum-norm solution with a warning.
    pub fn solve_anchored(&self, anchor: Option<(&[Complex64], f64)>) -> Result<ComplexVector> {
        if self.rows == 0 && anchor.is_none_or(|(_, w)| w <= 0.0) {
            return Err(Error::EmptySet { op: "meta_fit" });
        }
        let mut a = self.gram.clone();
        let mut b = self.rhs.clone();
        if let Some((prev, w)) = anchor {
            if w > 0.0 {
                a.add_diagonal(w);
                b.axpy(Complex64::new(w, 0.0), prev);
            }
        }
        match Cholesky::factor(&a) {
            Ok(ch) => ch.solve(&b),
            Err(_) => {
                log::warn!("meta_fit: stacked system is rank deficient; using the minimum-norm solution");
                a.add_diagonal(MIN_NORM_RIDGE);
                Cholesky::factor(&a).map_err(|e| e.in_op("meta_fit"))?.solve(&b)
            }
        }
    }

    pub fn solve(&self) -> Result<ComplexVector> {
        self.solve_anchored(None)
    }
}

/// Normal equations for a set of frames at one `λ`.
pub fn meta_normal_equations(frames: &[SplitSet], lambda: f64) -> Result<MetaNormalEquations> {
    let window = frames.first().ok_or(Error::EmptySet { op: "meta_fit" })?.window();
    let mut eq = MetaNormalEquations::new(window);
    for s in frames {
        eq.add(&transform_pair(s, lambda)?)?;
    }
    Ok(eq)
}

/// Closed-form meta-trained bias `v̄*_λ` over the given frames.
pub fn meta_fit(frames: &[SplitSet], lambda: f64) -> Result<ComplexVector> {
    meta_normal_equations(frames, lambda)?.solve()
}

/// Test loss of the predictor adapted on the frame's train half:
/// `Σ_i |v*_λ(Z^tr | v̄)† x_i^te - y_i^te|²`, by direct evaluation.
pub fn outer_loss(s: &SplitSet, lambda: f64, bias: &[Complex64]) -> Result<f64> {
    let p = ridge_solve(&s.train, &HyperParams::new(lambda, bias.into())?)?;
    let mut total = 0.0;
    for (x, y) in s.test.pairs() {
        total += (p.predict(x)? - y).norm_sqr();
    }
    Ok(total)
}

/// Meta-training objective summed over frames.
pub fn meta_objective(frames: &[SplitSet], lambda: f64, bias: &[Complex64]) -> Result<f64> {
    frames.iter().map(|s| outer_loss(s, lambda, bias)).sum()
}

/// Log-spaced `λ` grid `10⁻⁶, 10⁻⁵, …, 10³`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-6..=3).map(|e| libm::pow(10.0, e as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaTrainConfig {
    pub lambdas: Vec<f64>,
    pub resplit_seed: u64,
    /// Validation resplits keep the training pairs contiguous
    /// ([`SplitPolicy::RandomBlock`]) instead of permuting them.
    pub contiguous_resplit: bool,
    pub train_len: usize,
    pub test_len: usize,
}

impl MetaTrainConfig {
    pub fn new(train_len: usize, test_len: usize, resplit_seed: u64) -> Self {
        MetaTrainConfig { lambdas: default_lambda_grid(), resplit_seed, contiguous_resplit: true, train_len, test_len }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::invalid("lambdas", "grid is empty"));
        }
        for &l in &self.lambdas {
            check_lambda(l)?;
        }
        Ok(())
    }
}

/// Selected hyperparameters and the validation score of every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct TunedHyperParams {
    pub lambda: f64,
    pub bias: ComplexVector,
    /// `(λ, validation loss)` in ascending `λ`.
    pub scores: Vec<(f64, f64)>,
}

impl TunedHyperParams {
    pub fn hyper_params(&self) -> HyperParams {
        HyperParams { lambda: self.lambda, bias: self.bias.clone() }
    }
}

/// Sequential splits of the first `train_len + test_len` pairs of each frame.
pub fn sequential_splits(frames: &[RegressionSet], train_len: usize, test_len: usize) -> Result<Vec<SplitSet>> {
    frames
        .iter()
        .map(|f| {
            if f.len() < train_len + test_len {
                return Err(Error::SplitOutOfRange { requested: train_len + test_len, available: f.len() });
            }
            split(&f.head(train_len + test_len), train_len, SplitPolicy::Sequential)
        })
        .collect()
}

/// Grid search for `λ`.
///
/// Every frame is resplit once with its own seed. For each candidate the
/// bias is fit on the resplits and the meta objective is scored on their test
/// sets; the winner is refit on the sequential splits. Ties go to the
/// smaller `λ`.
pub fn tune_lambda(frames: &[RegressionSet], cfg: &MetaTrainConfig) -> Result<TunedHyperParams> {
    cfg.validate()?;
    if frames.is_empty() {
        return Err(Error::EmptySet { op: "tune_lambda" });
    }
    let fit_splits = sequential_splits(frames, cfg.train_len, cfg.test_len)?;
    let resplits = frames
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let seed = derive_seed(cfg.resplit_seed, i as u64);
            let policy =
                if cfg.contiguous_resplit { SplitPolicy::RandomBlock { seed } } else { SplitPolicy::Random { seed } };
            split(&f.head(cfg.train_len + cfg.test_len), cfg.train_len, policy)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut lambdas = cfg.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let mut best: Option<(f64, f64)> = None;
    let mut scores = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let bias = meta_fit(&resplits, lambda)?;
        let score = meta_objective(&resplits, lambda, &bias)?;
        scores.push((lambda, score));
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((lambda, score));
        }
    }
    let (lambda, _) = best.expect("grid is nonempty");
    let bias = meta_fit(&fit_splits, lambda)?;
    Ok(TunedHyperParams { lambda, bias, scores })
}

/// Adapts a predictor on a new frame's training pairs with the meta-learned
/// hyperparameters.
pub fn meta_test(train_new: &RegressionSet, lambda: f64, bias: &ComplexVector) -> Result<Predictor> {
    ridge_solve(train_new, &HyperParams::new(lambda, bias.clone())?)
}
