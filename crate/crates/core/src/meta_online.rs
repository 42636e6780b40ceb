//! Streaming meta-learning of the ridge bias.
//!
//! At frame `f` the bias is refined on the splits of the last `M` frames,
//! warm-started from the bias used at frame `f-1`. Gradient modes run `K`
//! descent steps on `Σ_{f'} L^outer_{f'}(v*_λ(Z^tr_{f'} | v̄))` using either
//! the equilibrium-propagation estimate or the exact implicit gradient;
//! closed-form modes solve the window problem directly.
//!
//! Gradients with respect to the complex `v̄` are `∂/∂Re + j ∂/∂Im`, which is
//! the steepest-ascent direction for a real objective.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::ChannelFrame;
use crate::dataset::{build_eval_set, build_regression_set, split, SplitPolicy, SplitSet};
use crate::meta_offline::{meta_test, transform_pair, MetaNormalEquations};
use crate::numerics::{hermitian_solve, Cholesky, ComplexMatrix};
use crate::ridge::{ridge_solve, ridge_system, HyperParams};
use crate::{ComplexVector, Error, Result};

/// Minimizer of `||X^tr v - y^tr||² + α ||X^te v - y^te||² + λ ||v - v̄||²`.
///
/// Formed directly as `(X^tr†X^tr + α X^te†X^te + λI)⁻¹ (X^tr†y^tr +
/// α X^te†y^te + λ v̄)`, which is also valid for negative `α` as long as the
/// system stays positive definite.
pub fn ep_stationary_point(s: &SplitSet, bias: &[Complex64], lambda: f64, alpha: f64) -> Result<ComplexVector> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    if bias.len() != s.window() {
        return Err(Error::dimension("ep_stationary_point", "bias length differs from the window"));
    }
    let (mut a, mut b) = ridge_system(&s.train, lambda, bias)?;
    if alpha != 0.0 && !s.test.is_empty() {
        let x_te = s.test.design();
        a.add_scaled(alpha, &x_te.gram())?;
        b.axpy(Complex64::new(alpha, 0.0), &x_te.adjoint_mul_vec(&s.test.targets())?);
    }
    hermitian_solve(&a, &b).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } if alpha < 0.0 => Error::IndefiniteNudge { alpha },
        e => e.in_op("ep_stationary_point"),
    })
}

/// One-sided equilibrium-propagation estimate `(2λ/α) (v^0 - v^α)`.
pub fn ep_gradient(s: &SplitSet, bias: &[Complex64], lambda: f64, alpha: f64) -> Result<ComplexVector> {
    if alpha == 0.0 {
        return Err(Error::ZeroNudge);
    }
    let free = ep_stationary_point(s, bias, lambda, 0.0)?;
    let nudged = ep_stationary_point(s, bias, lambda, alpha)?;
    Ok(free.sub(&nudged).scaled(2.0 * lambda / alpha))
}

/// Symmetric estimate `(λ/α) (v^{-α} - v^{α})`.
pub fn ep_gradient_two_sided(s: &SplitSet, bias: &[Complex64], lambda: f64, alpha: f64) -> Result<ComplexVector> {
    if alpha == 0.0 {
        return Err(Error::ZeroNudge);
    }
    let minus = ep_stationary_point(s, bias, lambda, -alpha)?;
    let plus = ep_stationary_point(s, bias, lambda, alpha)?;
    Ok(minus.sub(&plus).scaled(lambda / alpha))
}

/// Exact outer-loss gradient through the implicit function theorem:
/// `((1/λ) X^tr†X^tr + I)⁻¹ · 2 X^te† (X^te v*_λ - y^te)`.
pub fn implicit_gradient(s: &SplitSet, bias: &[Complex64], lambda: f64) -> Result<ComplexVector> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda", "must be positive"));
    }
    let v = ridge_solve(&s.train, &HyperParams::new(lambda, bias.into())?)?.v;
    if s.test.is_empty() {
        return Ok(ComplexVector::zeros(bias.len()));
    }
    let x_te = s.test.design();
    let resid = x_te.mul_vec(&v)?.sub(&s.test.targets());
    let g = x_te.adjoint_mul_vec(&resid)?.scaled(2.0);
    let mut m = ComplexMatrix::identity(bias.len());
    m.add_scaled(1.0 / lambda, &s.train.design().gram())?;
    Cholesky::factor(&m).map_err(|e| e.in_op("implicit_gradient"))?.solve(&g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `0.05 / (M · L^te)`.
    Auto,
    Constant(f64),
    /// `initial / (1 + decay · k)` at iteration `k` within a frame.
    InverseTime {
        initial: f64,
        decay: f64,
    },
}

impl StepSize {
    pub fn at(&self, iteration: usize, memory: usize, test_len: usize) -> f64 {
        match *self {
            StepSize::Auto => 0.05 / (memory.max(1) * test_len.max(1)) as f64,
            StepSize::Constant(eta) => eta,
            StepSize::InverseTime { initial, decay } => initial / (1.0 + decay * iteration as f64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OnlineMode {
    /// Gradient descent with the equilibrium-propagation estimate.
    Ep,
    /// Gradient descent with the exact implicit gradient.
    Implicit,
    /// Closed-form bias over the memory window.
    ClosedForm,
    /// Closed-form bias over the window, regularized toward the previous bias.
    RecursiveRidge { prior_weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpEstimate {
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineConfig {
    /// Number of past frames `M` kept for meta-updates.
    pub memory: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub step: StepSize,
    /// Descent steps `K` per frame.
    pub iterations: usize,
    pub mode: OnlineMode,
    pub estimate: EpEstimate,
    /// Training pairs per frame; the rest of the frame is the test half.
    pub train_len: usize,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        OnlineConfig {
            memory: 1,
            lambda: 1.0,
            alpha: 1e-2,
            step: StepSize::Auto,
            iterations: 5,
            mode: OnlineMode::Ep,
            estimate: EpEstimate::OneSided,
            train_len: 10,
        }
    }
}

impl OnlineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.memory < 1 {
            return Err(Error::invalid("memory", "must be at least 1"));
        }
        if self.iterations < 1 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", "must be positive"));
        }
        if self.mode == OnlineMode::Ep && !(self.alpha != 0.0 && self.alpha.is_finite()) {
            return Err(Error::ZeroNudge);
        }
        if let OnlineMode::RecursiveRidge { prior_weight } = self.mode {
            if !(prior_weight >= 0.0) {
                return Err(Error::invalid("prior_weight", "must be nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineState {
    pub bias: ComplexVector,
    pub history: VecDeque<SplitSet>,
    /// Frames observed so far.
    pub frame_index: usize,
    /// Meta-updates applied so far.
    pub updates: usize,
}

impl OnlineState {
    /// Zero bias, empty memory.
    pub fn new(window: usize) -> Self {
        OnlineState { bias: ComplexVector::zeros(window), history: VecDeque::new(), frame_index: 0, updates: 0 }
    }

    /// Adds a frame to memory, evicting the oldest beyond `memory`.
    pub fn push(&mut self, s: SplitSet, memory: usize) {
        self.history.push_back(s);
        while self.history.len() > memory {
            self.history.pop_front();
        }
        self.frame_index += 1;
    }

    /// Window objective at `bias`.
    pub fn window_loss(&self, lambda: f64, bias: &[Complex64]) -> Result<f64> {
        self.history.iter().map(|s| crate::meta_offline::outer_loss(s, lambda, bias)).sum()
    }
}

fn window_gradient(state: &OnlineState, cfg: &OnlineConfig, bias: &[Complex64]) -> Result<ComplexVector> {
    let mut total = ComplexVector::zeros(bias.len());
    for s in &state.history {
        let g = match (cfg.mode, cfg.estimate) {
            (OnlineMode::Implicit, _) => implicit_gradient(s, bias, cfg.lambda)?,
            (_, EpEstimate::OneSided) => ep_gradient(s, bias, cfg.lambda, cfg.alpha)?,
            (_, EpEstimate::TwoSided) => ep_gradient_two_sided(s, bias, cfg.lambda, cfg.alpha)?,
        };
        total.axpy(Complex64::new(1.0, 0.0), &g);
    }
    Ok(total)
}

fn window_equations(state: &OnlineState, lambda: f64) -> Result<MetaNormalEquations> {
    let mut eq = MetaNormalEquations::new(state.bias.len());
    for s in &state.history {
        eq.add(&transform_pair(s, lambda)?)?;
    }
    Ok(eq)
}

/// One meta-update of the bias over the memory window.
pub fn online_step(mut state: OnlineState, cfg: &OnlineConfig) -> Result<OnlineState> {
    cfg.validate()?;
    if state.history.is_empty() {
        return Err(Error::EmptySet { op: "online_step" });
    }
    match cfg.mode {
        OnlineMode::Ep | OnlineMode::Implicit => {
            let test_len = state.history.iter().map(|s| s.test.len()).max().unwrap_or(1);
            for k in 0..cfg.iterations {
                let g = window_gradient(&state, cfg, &state.bias)?;
                let eta = cfg.step.at(k, cfg.memory, test_len);
                state.bias.axpy(Complex64::new(-eta, 0.0), &g);
            }
        }
        OnlineMode::ClosedForm => {
            state.bias = window_equations(&state, cfg.lambda)?.solve()?;
        }
        OnlineMode::RecursiveRidge { prior_weight } => {
            let eq = window_equations(&state, cfg.lambda)?;
            state.bias = if state.updates == 0 {
                eq.solve()?
            } else {
                let prev = state.bias.clone();
                eq.solve_anchored(Some((&prev, prior_weight)))?
            };
        }
    }
    state.updates += 1;
    Ok(state)
}

/// Per-frame outcome of a streaming run.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineRecord {
    /// 1-based frame index.
    pub frame_index: usize,
    /// MSE on the frame's test half, scored against the noiseless channel.
    pub mse: f64,
    /// Bias used to adapt the predictor at this frame.
    pub bias: ComplexVector,
}

/// Streams frames through adapt → score → remember → meta-update.
///
/// Each frame is scored before it enters the memory, so the MSE at frame `f`
/// only depends on frames `1..f-1` for its bias.
pub fn run_online(stream: &[ChannelFrame], cfg: &OnlineConfig, window: usize, lag: usize) -> Result<Vec<OnlineRecord>> {
    cfg.validate()?;
    let mut state = OnlineState::new(window);
    let mut out = Vec::with_capacity(stream.len());
    for frame in stream {
        let set = build_regression_set(frame, window, lag)?;
        if set.len() <= cfg.train_len {
            return Err(Error::FrameTooShort { len: frame.len(), required: cfg.train_len + window + lag });
        }
        let s = split(&set, cfg.train_len, SplitPolicy::Sequential)?;
        let eval = build_eval_set(frame, window, lag)?.tail_from(cfg.train_len);
        let predictor = meta_test(&s.train, cfg.lambda, &state.bias)?;
        out.push(OnlineRecord {
            frame_index: state.frame_index + 1,
            mse: predictor.mse(&eval)?,
            bias: state.bias.clone(),
        });
        state.push(s, cfg.memory);
        state = online_step(state, cfg)?;
    }
    Ok(out)
}
