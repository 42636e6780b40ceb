//! Offline, online and genie-check experiment runners.
//!
//! Seeds descend from the base seed as `base → experiment → replicate →
//! role → frame`, and scheme-specific randomness hangs off its own scheme
//! tag, so adding a scheme or a sweep point never shifts another's draws.
//! Cells run on the current rayon pool; results come back in a fixed order.

use std::time::Instant;

use metapred_core::baselines::{conventional_fit, genie_for_frame, PooledLeastSquares};
use metapred_core::channel::{ChannelFrame, NoiseConfig};
use metapred_core::dataset::{build_eval_set, build_regression_set, split, RegressionSet, SplitPolicy};
use metapred_core::meta_offline::{meta_test, tune_lambda, MetaTrainConfig, TunedHyperParams};
use metapred_core::meta_online::run_online;
use metapred_core::ridge::Predictor;
use metapred_core::rng::derive_seed_path;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Mode, Scheme};
use crate::error::{HarnessError, Result};
use crate::frames::generate_frame;

const TAG_OFFLINE: u64 = 0x4f46;
const TAG_ONLINE: u64 = 0x4f4e;
const TAG_GENIE: u64 = 0x4745;
const TAG_META_FRAME: u64 = 1;
const TAG_EVAL_FRAME: u64 = 2;
const TAG_STREAM_FRAME: u64 = 3;
const TAG_SCHEME: u64 = 4;

/// One measured value.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub scheme: String,
    /// `L^new` (offline), frame index (online) or window size (genie check).
    pub sweep: u64,
    /// Replicate seed.
    pub seed: u64,
    pub mse: f64,
    pub runtime_ms: f64,
}

/// Per (sweep, replicate) details that do not fit in a record.
#[derive(Debug, Clone, PartialEq)]
pub struct OfflineCell {
    pub sweep: usize,
    pub replicate: usize,
    pub seed: u64,
    pub tuned: Option<TunedHyperParams>,
    /// Mean analytic genie MSE over the evaluation frames.
    pub genie_analytic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineReport {
    pub records: Vec<MetricRecord>,
    pub cells: Vec<OfflineCell>,
    /// Evaluation frames of the first replicate.
    pub eval_frames: Vec<ChannelFrame>,
}

fn replicate_seed(cfg: &ExperimentConfig, tag: u64, r: usize) -> u64 {
    derive_seed_path(cfg.seed, &[tag, r as u64])
}

fn frame_len(cfg: &ExperimentConfig, pairs: usize) -> usize {
    pairs + cfg.window + cfg.lag - 1
}

fn frames(
    cfg: &ExperimentConfig,
    noise: Option<&NoiseConfig>,
    count: usize,
    len: usize,
    seed: u64,
    role: u64,
) -> Result<Vec<ChannelFrame>> {
    (0..count)
        .into_par_iter()
        .map(|i| generate_frame(&cfg.channel, noise, len, derive_seed_path(seed, &[role, i as u64]), i))
        .collect()
}

fn squared_error_sum(p: &Predictor, eval: &RegressionSet) -> Result<f64> {
    Ok(p.mse(eval)? * eval.len() as f64)
}

struct Timer {
    on: bool,
    start: Option<Instant>,
}

impl Timer {
    fn start(on: bool) -> Self {
        Timer { on, start: on.then(Instant::now) }
    }

    fn ms(&self) -> f64 {
        match (self.on, self.start) {
            (true, Some(t)) => t.elapsed().as_secs_f64() * 1e3,
            _ => 0.0,
        }
    }
}

pub fn run_offline_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricRecord>> {
    Ok(run_offline_report(cfg)?.records)
}

/// Offline protocol: meta-train on `F` frames with `L^tr = L^new`, then for
/// every sweep point adapt each scheme on `L^new` pairs of fresh frames and
/// score it on the following evaluation pairs against the clean channel.
pub fn run_offline_report(cfg: &ExperimentConfig) -> Result<OfflineReport> {
    if cfg.mode != Mode::Offline {
        return Err(HarnessError::invalid("mode", "expected offline"));
    }
    cfg.validate()?;
    let noise = cfg.noise_config()?;
    let max_train = *cfg.train_sweep.iter().max().expect("validated");
    let needs_history = cfg.schemes.iter().any(|s| matches!(s, Scheme::Meta | Scheme::Joint));

    let per_replicate: Vec<(Vec<MetricRecord>, Vec<OfflineCell>, Vec<ChannelFrame>)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(cfg, TAG_OFFLINE, r);
            let meta_sets: Vec<RegressionSet> = if needs_history {
                frames(
                    cfg,
                    noise.as_ref(),
                    cfg.meta_frames,
                    frame_len(cfg, max_train + cfg.test_len),
                    seed,
                    TAG_META_FRAME,
                )?
                .iter()
                .map(|f| build_regression_set(f, cfg.window, cfg.lag))
                .collect::<metapred_core::Result<_>>()?
            } else {
                Vec::new()
            };
            let eval = frames(
                cfg,
                noise.as_ref(),
                cfg.eval_frames(),
                frame_len(cfg, max_train + cfg.eval_pairs),
                seed,
                TAG_EVAL_FRAME,
            )?;
            let cells: Vec<(Vec<MetricRecord>, OfflineCell)> = cfg
                .train_sweep
                .par_iter()
                .map(|&l| offline_cell(cfg, r, seed, l, &meta_sets, &eval))
                .collect::<Result<_>>()?;
            let (recs, cells): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
            Ok((recs.into_iter().flatten().collect(), cells, if r == 0 { eval } else { Vec::new() }))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut cells = Vec::new();
    let mut eval_frames = Vec::new();
    for (rec, c, e) in per_replicate {
        records.extend(rec);
        cells.extend(c);
        if eval_frames.is_empty() {
            eval_frames = e;
        }
    }
    // Scheme-major, then sweep, then replicate.
    let order = |name: &str| cfg.schemes.iter().position(|s| s.name() == name).unwrap_or(usize::MAX);
    records.sort_by_key(|rec| (order(&rec.scheme), rec.sweep));
    Ok(OfflineReport { records, cells, eval_frames })
}

fn offline_cell(
    cfg: &ExperimentConfig,
    replicate: usize,
    seed: u64,
    train_len: usize,
    meta_sets: &[RegressionSet],
    eval: &[ChannelFrame],
) -> Result<(Vec<MetricRecord>, OfflineCell)> {
    let history: Vec<RegressionSet> = meta_sets.iter().map(|s| s.head(train_len + cfg.test_len)).collect();

    let mut meta_ms = 0.0;
    let tuned = if cfg.schemes.contains(&Scheme::Meta) {
        let t = Timer::start(cfg.record_timing);
        let resplit = derive_seed_path(seed, &[TAG_SCHEME, Scheme::Meta.tag(), train_len as u64]);
        let mut tc = MetaTrainConfig::new(train_len, cfg.test_len, resplit);
        tc.lambdas = cfg.lambdas.clone();
        tc.contiguous_resplit = cfg.contiguous_resplit;
        let tuned = tune_lambda(&history, &tc)?;
        meta_ms += t.ms();
        Some(tuned)
    } else {
        None
    };
    let mut joint_ms = 0.0;
    let pooled = if cfg.schemes.contains(&Scheme::Joint) {
        let t = Timer::start(cfg.record_timing);
        let mut pooled = PooledLeastSquares::new(cfg.window, cfg.lag);
        for s in &history {
            pooled.add(s)?;
        }
        joint_ms += t.ms();
        Some(pooled)
    } else {
        None
    };

    let mut sums = vec![0.0; cfg.schemes.len()];
    let mut times = vec![0.0; cfg.schemes.len()];
    let mut genie_analytic = 0.0;
    let mut count = 0usize;
    for frame in eval {
        let observed = build_regression_set(frame, cfg.window, cfg.lag)?;
        let s = split(&observed, train_len, SplitPolicy::Sequential)?;
        let target = build_eval_set(frame, cfg.window, cfg.lag)?.tail_from(train_len).head(cfg.eval_pairs);
        count += target.len();
        for (k, scheme) in cfg.schemes.iter().enumerate() {
            let t = Timer::start(cfg.record_timing);
            let p = match scheme {
                Scheme::Meta => {
                    let tuned = tuned.as_ref().expect("tuned above");
                    meta_test(&s.train, tuned.lambda, &tuned.bias)?
                }
                Scheme::Conventional => conventional_fit(&s.train)?,
                Scheme::Joint => {
                    let mut pooled = pooled.clone().expect("pooled above");
                    pooled.add(&s.train)?;
                    pooled.solve()?
                }
                Scheme::Genie => {
                    let w = genie_for_frame(frame, cfg.window, cfg.lag, cfg.noise_aware_genie)?;
                    genie_analytic += w.analytic_mse;
                    w.predictor()
                }
            };
            sums[k] += squared_error_sum(&p, &target)?;
            times[k] += t.ms();
        }
    }
    let records = cfg
        .schemes
        .iter()
        .enumerate()
        .map(|(k, scheme)| {
            let setup = match scheme {
                Scheme::Meta => meta_ms,
                Scheme::Joint => joint_ms,
                _ => 0.0,
            };
            MetricRecord {
                scheme: scheme.name().to_string(),
                sweep: train_len as u64,
                seed,
                mse: sums[k] / count as f64,
                runtime_ms: times[k] + setup,
            }
        })
        .collect();
    let cell = OfflineCell {
        sweep: train_len,
        replicate,
        seed,
        tuned,
        genie_analytic: genie_analytic / eval.len().max(1) as f64,
    };
    Ok((records, cell))
}

/// Online traces: per-frame MSE of every streamed scheme, averaged over
/// replicates, with a trailing moving average.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineTrace {
    pub scheme: String,
    /// Memory `M` for meta-learning traces.
    pub memory: Option<usize>,
    pub mse: Vec<f64>,
    pub smoothed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineReport {
    pub records: Vec<MetricRecord>,
    pub traces: Vec<OnlineTrace>,
}

/// Trailing mean over at most `window` values ending at each index.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        acc += x;
        if i >= window {
            acc -= xs[i - window];
        }
        out.push(acc / (i + 1).min(window) as f64);
    }
    out
}

/// Per-frame `(mse, runtime_ms)` of one lane.
type LaneTrace = Vec<(f64, f64)>;

pub fn run_online_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricRecord>> {
    Ok(run_online_report(cfg)?.records)
}

fn online_scheme_name(cfg: &ExperimentConfig, memory: usize) -> String {
    format!("{}-M{}", cfg.online.mode_name(), memory)
}

/// Streaming protocol: each replicate draws one stream of frames that every
/// scheme sees in the same order.
pub fn run_online_report(cfg: &ExperimentConfig) -> Result<OnlineReport> {
    if cfg.mode != Mode::Online {
        return Err(HarnessError::invalid("mode", "expected online"));
    }
    cfg.validate()?;
    let on = &cfg.online;
    let noise = cfg.noise_config()?;
    let len = frame_len(cfg, on.train_len + on.test_len);

    // (name, memory) in output order.
    let mut lanes: Vec<(String, Option<usize>)> =
        on.memory.iter().map(|&m| (online_scheme_name(cfg, m), Some(m))).collect();
    lanes.extend(on.baselines.iter().map(|s| (s.name().to_string(), None)));

    let runs: Vec<(u64, Vec<LaneTrace>)> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(cfg, TAG_ONLINE, r);
            let stream = frames(cfg, noise.as_ref(), on.frames, len, seed, TAG_STREAM_FRAME)?;
            let per_lane = lanes
                .par_iter()
                .map(|(_, memory)| match memory {
                    Some(m) => {
                        let t = Timer::start(cfg.record_timing);
                        let oc = on.online_config(*m)?;
                        let recs = run_online(&stream, &oc, cfg.window, cfg.lag)?;
                        let per = t.ms() / recs.len().max(1) as f64;
                        Ok(recs.into_iter().map(|x| (x.mse, per)).collect())
                    }
                    None => Ok(Vec::new()),
                })
                .collect::<Result<Vec<LaneTrace>>>()?;
            let baselines = stream_baselines(cfg, &stream)?;
            let mut per_lane = per_lane;
            for (k, b) in baselines.into_iter().enumerate() {
                per_lane[on.memory.len() + k] = b;
            }
            Ok((seed, per_lane))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut traces = Vec::new();
    for (k, (name, memory)) in lanes.iter().enumerate() {
        let mut mean = vec![0.0; on.frames];
        for (seed, lanes) in &runs {
            for (f, &(mse, ms)) in lanes[k].iter().enumerate() {
                mean[f] += mse / cfg.replicates as f64;
                records.push(MetricRecord {
                    scheme: name.clone(),
                    sweep: f as u64 + 1,
                    seed: *seed,
                    mse,
                    runtime_ms: ms,
                });
            }
        }
        let smoothed = moving_average(&mean, on.smoothing);
        traces.push(OnlineTrace { scheme: name.clone(), memory: *memory, mse: mean, smoothed });
    }
    Ok(OnlineReport { records, traces })
}

/// Conventional and joint learning along a stream, scored like the online
/// learner: adapt on the frame's training pairs, test on the rest.
fn stream_baselines(cfg: &ExperimentConfig, stream: &[ChannelFrame]) -> Result<Vec<LaneTrace>> {
    let on = &cfg.online;
    let mut out = vec![Vec::with_capacity(stream.len()); on.baselines.len()];
    let mut pooled = PooledLeastSquares::new(cfg.window, cfg.lag);
    for frame in stream {
        let set = build_regression_set(frame, cfg.window, cfg.lag)?;
        let s = split(&set, on.train_len, SplitPolicy::Sequential)?;
        let eval = build_eval_set(frame, cfg.window, cfg.lag)?.tail_from(on.train_len);
        for (k, scheme) in on.baselines.iter().enumerate() {
            let t = Timer::start(cfg.record_timing);
            let p = match scheme {
                Scheme::Conventional => conventional_fit(&s.train)?,
                Scheme::Joint => {
                    let mut with_new = pooled.clone();
                    with_new.add(&s.train)?;
                    with_new.solve()?
                }
                Scheme::Meta | Scheme::Genie => unreachable!("rejected by validation"),
            };
            out[k].push((p.mse(&eval)?, t.ms()));
        }
        pooled.add(&set)?;
    }
    Ok(out)
}

/// Genie check: analytic versus empirical genie MSE on fresh frames for
/// every window size `1..=N`.
pub fn run_genie_check(cfg: &ExperimentConfig) -> Result<Vec<MetricRecord>> {
    if cfg.mode != Mode::GenieCheck {
        return Err(HarnessError::invalid("mode", "expected genie-check"));
    }
    cfg.validate()?;
    let noise = cfg.noise_config()?;
    let runs: Vec<Vec<MetricRecord>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(cfg, TAG_GENIE, r);
            let eval =
                frames(cfg, noise.as_ref(), cfg.eval_frames(), frame_len(cfg, cfg.eval_pairs), seed, TAG_EVAL_FRAME)?;
            let mut out = Vec::new();
            for n in 1..=cfg.window {
                let t = Timer::start(cfg.record_timing);
                let (mut analytic, mut sq, mut count) = (0.0, 0.0, 0usize);
                for frame in &eval {
                    // Same target slots for every window size.
                    let skip = cfg.window - n;
                    let target = build_eval_set(frame, n, cfg.lag)?.tail_from(skip);
                    let w = genie_for_frame(frame, n, cfg.lag, cfg.noise_aware_genie)?;
                    analytic += w.analytic_mse;
                    sq += squared_error_sum(&w.predictor(), &target)?;
                    count += target.len();
                }
                let ms = t.ms();
                let sweep = n as u64;
                out.push(MetricRecord {
                    scheme: "analytic".into(),
                    sweep,
                    seed,
                    mse: analytic / eval.len() as f64,
                    runtime_ms: ms,
                });
                out.push(MetricRecord {
                    scheme: "empirical".into(),
                    sweep,
                    seed,
                    mse: sq / count as f64,
                    runtime_ms: ms,
                });
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<MetricRecord> = runs.into_iter().flatten().collect();
    records.sort_by(|a, b| a.scheme.cmp(&b.scheme).then(a.sweep.cmp(&b.sweep)));
    Ok(records)
}
