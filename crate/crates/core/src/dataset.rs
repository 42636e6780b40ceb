//! Lag-δ regression pairs built from channel frames.
//!
//! Pair `i` of a frame has covariate `x_i = (h_l, h_{l-1}, …, h_{l-N+1})` and
//! label `y_i = h_{l+δ}` for `l = N + i` (1-based slots). A frame of length
//! `L + N + δ - 1` therefore yields exactly `L` pairs.
//!
//! Matrix assembly is centralized here: [`RegressionSet::design`] stacks the
//! rows `x_i†` and [`RegressionSet::targets`] the entries `conj(y_i)`, so
//! `||X v - y||² = Σ |v†x_i - y_i|²`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::channel::ChannelFrame;
use crate::numerics::ComplexMatrix;
use crate::rng::seeded;
use crate::{ComplexVector, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionSet {
    window: usize,
    lag: usize,
    /// Covariates, `window` entries per pair.
    inputs: Vec<Complex64>,
    labels: Vec<Complex64>,
}

impl RegressionSet {
    pub fn empty(window: usize, lag: usize) -> Self {
        RegressionSet { window, lag, inputs: Vec::new(), labels: Vec::new() }
    }

    /// Builds a set from explicit pairs; every covariate must have length `window`.
    pub fn from_pairs<'a>(
        window: usize,
        lag: usize,
        pairs: impl IntoIterator<Item = (&'a [Complex64], Complex64)>,
    ) -> Result<Self> {
        let mut set = Self::empty(window, lag);
        for (x, y) in pairs {
            set.push(x, y)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, x: &[Complex64], y: Complex64) -> Result<()> {
        if x.len() != self.window {
            return Err(Error::dimension(
                "RegressionSet::push",
                alloc::format!("covariate of length {} in a window-{} set", x.len(), self.window),
            ));
        }
        self.inputs.extend_from_slice(x);
        self.labels.push(y);
        Ok(())
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn x(&self, i: usize) -> &[Complex64] {
        &self.inputs[i * self.window..(i + 1) * self.window]
    }

    pub fn y(&self, i: usize) -> Complex64 {
        self.labels[i]
    }

    pub fn pairs(&self) -> impl ExactSizeIterator<Item = (&[Complex64], Complex64)> + '_ {
        (0..self.len()).map(move |i| (self.x(i), self.y(i)))
    }

    /// Design matrix with rows `x_i†`.
    pub fn design(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.len(), self.window, |i, j| self.inputs[i * self.window + j].conj())
    }

    /// Target vector with entries `conj(y_i)`.
    pub fn targets(&self) -> ComplexVector {
        self.labels.iter().map(|y| y.conj()).collect()
    }

    /// Pairs at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut out = Self::empty(self.window, self.lag);
        for &i in indices {
            out.inputs.extend_from_slice(self.x(i));
            out.labels.push(self.y(i));
        }
        out
    }

    /// First `n` pairs (or all of them if fewer).
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        RegressionSet {
            window: self.window,
            lag: self.lag,
            inputs: self.inputs[..n * self.window].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }

    /// Pairs from index `start` on.
    pub fn tail_from(&self, start: usize) -> Self {
        let start = start.min(self.len());
        RegressionSet {
            window: self.window,
            lag: self.lag,
            inputs: self.inputs[start * self.window..].to_vec(),
            labels: self.labels[start..].to_vec(),
        }
    }

    /// Appends all pairs of `other`.
    pub fn extend(&mut self, other: &RegressionSet) -> Result<()> {
        if other.window != self.window {
            return Err(Error::dimension(
                "RegressionSet::extend",
                alloc::format!("window {} into window {}", other.window, self.window),
            ));
        }
        self.inputs.extend_from_slice(&other.inputs);
        self.labels.extend_from_slice(&other.labels);
        Ok(())
    }
}

fn check_window(len: usize, window: usize, lag: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::invalid("window", "must be at least 1"));
    }
    if lag == 0 {
        return Err(Error::invalid("lag", "must be at least 1"));
    }
    let required = window + lag;
    if len < required {
        return Err(Error::FrameTooShort { len, required });
    }
    Ok(())
}

fn windows(covariates: &[Complex64], labels: &[Complex64], window: usize, lag: usize) -> Result<RegressionSet> {
    check_window(covariates.len(), window, lag)?;
    let count = covariates.len() - window - lag + 1;
    let mut set = RegressionSet::empty(window, lag);
    set.inputs.reserve(count * window);
    set.labels.reserve(count);
    for i in 0..count {
        let l = i + window - 1;
        set.inputs.extend((0..window).map(|m| covariates[l - m]));
        set.labels.push(labels[l + lag]);
    }
    Ok(set)
}

/// All lag-δ pairs of a frame's observed gains: `len - N - δ + 1` of them.
pub fn build_regression_set(frame: &ChannelFrame, window: usize, lag: usize) -> Result<RegressionSet> {
    windows(&frame.gains, &frame.gains, window, lag)
}

/// Like [`build_regression_set`] but with labels taken from the noiseless
/// channel, for scoring predictions made from noisy observations.
pub fn build_eval_set(frame: &ChannelFrame, window: usize, lag: usize) -> Result<RegressionSet> {
    windows(&frame.gains, frame.truth(), window, lag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPolicy {
    /// Earliest pairs train.
    Sequential,
    /// A seeded permutation picks the training pairs.
    Random { seed: u64 },
    /// A contiguous block of training pairs at a seeded random offset; the
    /// pairs before and after it form the test set.
    RandomBlock { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSet {
    pub train: RegressionSet,
    pub test: RegressionSet,
}

impl SplitSet {
    pub fn window(&self) -> usize {
        self.train.window()
    }
}

/// Splits `set` into `train_len` training pairs and the remaining test pairs.
pub fn split(set: &RegressionSet, train_len: usize, policy: SplitPolicy) -> Result<SplitSet> {
    if train_len > set.len() {
        return Err(Error::SplitOutOfRange { requested: train_len, available: set.len() });
    }
    match policy {
        SplitPolicy::Sequential => Ok(SplitSet { train: set.head(train_len), test: set.tail_from(train_len) }),
        SplitPolicy::Random { seed } => {
            let mut idx: Vec<usize> = (0..set.len()).collect();
            idx.shuffle(&mut seeded(seed));
            Ok(SplitSet { train: set.select(&idx[..train_len]), test: set.select(&idx[train_len..]) })
        }
        SplitPolicy::RandomBlock { seed } => {
            let start = seeded(seed).random_range(0..=set.len() - train_len);
            let test: Vec<usize> = (0..start).chain(start + train_len..set.len()).collect();
            let train: Vec<usize> = (start..start + train_len).collect();
            Ok(SplitSet { train: set.select(&train), test: set.select(&test) })
        }
    }
}
