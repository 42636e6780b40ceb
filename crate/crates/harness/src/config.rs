//! TOML experiment configuration.
//!
//! Every field has a default, so a config only names what it changes:
//!
//! ```toml
//! [channel]
//! kind = "scm"
//!
//! [noise]
//! snr_db = 20.0
//! ```

use std::path::Path;

use metapred_core::channel::{DopplerSpectrum, NoiseConfig, ScmConfig, SpectrumFamily};
use metapred_core::meta_offline::default_lambda_grid;
use metapred_core::meta_online::{EpEstimate, OnlineConfig, OnlineMode, StepSize};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Offline,
    Online,
    GenieCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Meta,
    Conventional,
    Joint,
    Genie,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Meta => "meta",
            Scheme::Conventional => "conventional",
            Scheme::Joint => "joint",
            Scheme::Genie => "genie",
        }
    }

    /// Stable tag for seed derivation.
    pub fn tag(self) -> u64 {
        match self {
            Scheme::Meta => 1,
            Scheme::Conventional => 2,
            Scheme::Joint => 3,
            Scheme::Genie => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    /// Per frame: Jakes or rounded with equal probability, random Doppler.
    DopplerMix,
    Jakes,
    Rounded,
    Flat,
    Scm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    /// Normalized maximum Doppler `w_m / 2π`, drawn uniformly per frame.
    pub doppler_range: [f64; 2],
    /// Multipath generator settings.
    pub paths: usize,
    pub power_decay: f64,
    pub doppler_hz_range: [f64; 2],
    pub slot_duration: f64,
    pub polarization: bool,
    pub xpr_mu_db: f64,
    pub xpr_sigma_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let scm = ScmConfig::default();
        ChannelConfig {
            kind: ChannelKind::DopplerMix,
            doppler_range: [0.05, 0.1],
            paths: scm.paths(),
            power_decay: metapred_core::channel::DEFAULT_POWER_DECAY,
            doppler_hz_range: [scm.doppler_hz_range.0, scm.doppler_hz_range.1],
            slot_duration: scm.slot_duration,
            polarization: scm.polarization_enabled,
            xpr_mu_db: scm.xpr_mu_db,
            xpr_sigma_db: scm.xpr_sigma_db,
        }
    }
}

impl ChannelConfig {
    pub fn scm(&self) -> ScmConfig {
        let base = ScmConfig::default();
        ScmConfig {
            path_powers: metapred_core::channel::exponential_power_profile(self.paths, self.power_decay),
            doppler_hz_range: (self.doppler_hz_range[0], self.doppler_hz_range[1]),
            slot_duration: self.slot_duration,
            polarization_enabled: self.polarization,
            xpr_mu_db: self.xpr_mu_db,
            xpr_sigma_db: self.xpr_sigma_db,
            field_gain_tx: base.field_gain_tx,
            field_gain_rx: base.field_gain_rx,
        }
    }

    /// Spectrum for a fixed family at normalized Doppler `doppler`.
    pub fn spectrum(&self, family: SpectrumFamily, doppler: f64) -> Result<DopplerSpectrum, HarnessError> {
        DopplerSpectrum::from_family(family, doppler).map_err(|e| HarnessError::field("channel.doppler_range", e))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let [lo, hi] = self.doppler_range;
        if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
            return Err(HarnessError::invalid("channel.doppler_range", "need 0 < lo <= hi <= 0.5"));
        }
        if self.kind == ChannelKind::Scm {
            self.scm().validate().map_err(|e| HarnessError::field("channel", e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub snr_db: f64,
    pub pilots: u32,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection { snr_db: 20.0, pilots: 100 }
    }
}

impl NoiseSection {
    pub fn config(&self) -> Result<NoiseConfig, HarnessError> {
        NoiseConfig::new(self.snr_db, self.pilots).map_err(|e| HarnessError::field("noise", e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnlineModeName {
    Ep,
    Implicit,
    ClosedForm,
    RecursiveRidge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateName {
    OneSided,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnlineSection {
    pub frames: usize,
    pub memory: Vec<usize>,
    pub lambda: f64,
    pub alpha: f64,
    /// Constant step size. When absent the step is `0.05 / L^te`, divided
    /// further by `M` if `normalize_step_by_memory` is set.
    pub step: Option<f64>,
    pub normalize_step_by_memory: bool,
    pub iterations: usize,
    pub mode: OnlineModeName,
    pub estimate: EstimateName,
    /// Weight on the previous bias for the recursive-ridge mode.
    pub prior_weight: f64,
    pub train_len: usize,
    pub test_len: usize,
    pub smoothing: usize,
    /// Baselines streamed alongside the online learner.
    pub baselines: Vec<Scheme>,
}

impl Default for OnlineSection {
    fn default() -> Self {
        let d = OnlineConfig::default();
        OnlineSection {
            frames: 300,
            memory: vec![1, 5, 10],
            lambda: 1.0,
            alpha: d.alpha,
            step: None,
            normalize_step_by_memory: false,
            iterations: d.iterations,
            mode: OnlineModeName::Ep,
            estimate: EstimateName::OneSided,
            prior_weight: 1.0,
            train_len: d.train_len,
            test_len: 100,
            smoothing: 100,
            baselines: vec![Scheme::Conventional, Scheme::Joint],
        }
    }
}

impl OnlineSection {
    pub fn online_config(&self, memory: usize) -> Result<OnlineConfig, HarnessError> {
        let cfg = OnlineConfig {
            memory,
            lambda: self.lambda,
            alpha: self.alpha,
            step: match (self.step, self.normalize_step_by_memory) {
                (Some(eta), _) => StepSize::Constant(eta),
                (None, true) => StepSize::Auto,
                (None, false) => StepSize::Constant(0.05 / self.test_len.max(1) as f64),
            },
            iterations: self.iterations,
            mode: match self.mode {
                OnlineModeName::Ep => OnlineMode::Ep,
                OnlineModeName::Implicit => OnlineMode::Implicit,
                OnlineModeName::ClosedForm => OnlineMode::ClosedForm,
                OnlineModeName::RecursiveRidge => OnlineMode::RecursiveRidge { prior_weight: self.prior_weight },
            },
            estimate: match self.estimate {
                EstimateName::OneSided => EpEstimate::OneSided,
                EstimateName::TwoSided => EpEstimate::TwoSided,
            },
            train_len: self.train_len,
        };
        cfg.validate().map_err(|e| HarnessError::field("online", e))?;
        Ok(cfg)
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            OnlineModeName::Ep => "ep",
            OnlineModeName::Implicit => "implicit",
            OnlineModeName::ClosedForm => "closed-form",
            OnlineModeName::RecursiveRidge => "recursive-ridge",
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.frames == 0 {
            return Err(HarnessError::invalid("online.frames", "must be at least 1"));
        }
        if self.memory.is_empty() {
            return Err(HarnessError::invalid("online.memory", "sweep must be nonempty"));
        }
        if self.smoothing == 0 {
            return Err(HarnessError::invalid("online.smoothing", "must be at least 1"));
        }
        if self.test_len == 0 {
            return Err(HarnessError::invalid("online.test_len", "must be at least 1"));
        }
        if self.baselines.iter().any(|s| matches!(s, Scheme::Meta | Scheme::Genie)) {
            return Err(HarnessError::invalid("online.baselines", "only conventional and joint stream"));
        }
        for &m in &self.memory {
            self.online_config(m)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Window size N.
    pub window: usize,
    /// Prediction lag δ.
    pub lag: usize,
    /// Meta-training frames F.
    pub meta_frames: usize,
    /// Training-pair counts L^new (also L^tr during meta-training).
    pub train_sweep: Vec<usize>,
    /// Test pairs per meta-training frame, L^te.
    pub test_len: usize,
    /// Evaluation pairs per scheme and sweep point, spread over
    /// `eval_samples / eval_pairs` fresh frames.
    pub eval_samples: usize,
    pub eval_pairs: usize,
    pub schemes: Vec<Scheme>,
    /// Meta-learning λ grid.
    pub lambdas: Vec<f64>,
    /// λ validation resplits keep training pairs contiguous; `false`
    /// permutes them.
    pub contiguous_resplit: bool,
    pub channel: ChannelConfig,
    pub noise: Option<NoiseSection>,
    /// Genie covariance includes the estimation noise.
    pub noise_aware_genie: bool,
    pub online: OnlineSection,
    pub seed: u64,
    pub replicates: usize,
    /// Measure wall time per record. Off by default: timings differ
    /// between runs and would break byte-identical output.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Offline,
            window: 5,
            lag: 3,
            meta_frames: 80,
            train_sweep: vec![1, 2, 5, 10, 20, 50, 100],
            test_len: 100,
            eval_samples: 10_000,
            eval_pairs: 100,
            schemes: vec![Scheme::Meta, Scheme::Conventional, Scheme::Joint, Scheme::Genie],
            lambdas: default_lambda_grid(),
            contiguous_resplit: true,
            channel: ChannelConfig::default(),
            noise: None,
            noise_aware_genie: true,
            online: OnlineSection::default(),
            seed: 0,
            replicates: 1,
            record_timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn noise_config(&self) -> Result<Option<NoiseConfig>, HarnessError> {
        self.noise.as_ref().map(NoiseSection::config).transpose()
    }

    pub fn eval_frames(&self) -> usize {
        self.eval_samples / self.eval_pairs.max(1)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.window == 0 {
            return Err(HarnessError::invalid("window", "must be at least 1"));
        }
        if self.lag == 0 {
            return Err(HarnessError::invalid("lag", "must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(HarnessError::invalid("replicates", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(HarnessError::invalid("schemes", "must name at least one scheme"));
        }
        let mut seen = self.schemes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.schemes.len() {
            return Err(HarnessError::invalid("schemes", "duplicate scheme"));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(HarnessError::invalid("lambdas", "need a nonempty grid of positive values"));
        }
        if self.eval_pairs == 0 || self.eval_samples == 0 || !self.eval_samples.is_multiple_of(self.eval_pairs) {
            return Err(HarnessError::invalid("eval_samples", "must be a positive multiple of eval_pairs"));
        }
        self.channel.validate()?;
        self.noise_config()?;
        match self.mode {
            Mode::Offline => {
                if self.train_sweep.is_empty() {
                    return Err(HarnessError::invalid("train_sweep", "sweep must be nonempty"));
                }
                if self.schemes.contains(&Scheme::Meta) && self.meta_frames == 0 {
                    return Err(HarnessError::invalid("meta_frames", "meta-learning needs at least one frame"));
                }
                if self.test_len == 0 {
                    return Err(HarnessError::invalid("test_len", "must be at least 1"));
                }
            }
            Mode::Online => self.online.validate()?,
            Mode::GenieCheck => {}
        }
        Ok(())
    }
}
