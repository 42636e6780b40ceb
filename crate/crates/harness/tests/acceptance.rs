//! Acceptance criteria, one line per criterion. Run with
//! `cargo test -p metapred --test acceptance`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use metapred::config::{ExperimentConfig, Mode};
use metapred::experiment::{run_offline_report, run_online_report, OfflineReport};
use metapred::oracles::*;
use metapred::output::records_to_csv_string;
use metapred_core::baselines::genie_wiener;
use metapred_core::channel::{add_estimation_noise, sample_frame_scm, DopplerSpectrum, GaussianSampler, NoiseConfig};
use metapred_core::dataset::build_regression_set;
use metapred_core::meta_offline::{meta_fit, outer_loss, transform_pair};
use metapred_core::meta_online::{ep_gradient, ep_stationary_point, implicit_gradient};
use metapred_core::ridge::{ridge_solve, HyperParams};
use metapred_core::rng::derive_seed;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn closed_forms() -> Outcome {
    let (mut ridge, mut meta, mut ep): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..20 {
        let bias = random_vector(derive_seed(101, k), 5);
        let s = random_split(derive_seed(102, k), 5, 10, 10);
        let (tr, te) = (pairs_of(&s.train), pairs_of(&s.test));

        let gd = gradient_descent(|v| total_objective_grad(v, &tr, &[], 0.0, 1.0, &bias), &bias, 1e-13, 2_000_000);
        let v = ridge_solve(&s.train, &HyperParams::new(1.0, bias.clone().into()).unwrap()).unwrap().v;
        ridge = ridge.max(rel_err(&v, &gd.x));

        let frames: Vec<_> = (0..8).map(|f| random_split(derive_seed(103, k * 8 + f), 5, 10, 10)).collect();
        let direct: Vec<_> = frames.iter().map(|s| (pairs_of(&s.train), pairs_of(&s.test))).collect();
        let gd = gradient_descent(|b| outer_grad_direct(&direct, 1.0, b), &[C0; 5], 1e-13, 2_000_000);
        meta = meta.max(rel_err(&meta_fit(&frames, 1.0).unwrap(), &gd.x));

        let gd = gradient_descent(|v| total_objective_grad(v, &tr, &te, 0.01, 1.0, &bias), &bias, 1e-13, 2_000_000);
        ep = ep.max(rel_err(&ep_stationary_point(&s, &bias, 1.0, 0.01).unwrap(), &gd.x));
    }
    let worst = ridge.max(meta).max(ep);
    outcome(worst <= 1e-6, format!("max rel err ridge {ridge:.1e}, meta_fit {meta:.1e}, stationary point {ep:.1e}"))
}

const C0: metapred_core::Complex64 = metapred_core::Complex64::new(0.0, 0.0);

fn master_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let n = 1 + k as usize % 6;
        let s = random_split(derive_seed(201, k), n, k as usize % 11, 1 + k as usize % 9);
        let bias = random_vector(derive_seed(202, k), n);
        let lambda = 10f64.powf((k % 9) as f64 - 4.0);
        let direct = outer_loss_direct(&pairs_of(&s.train), &pairs_of(&s.test), lambda, &bias);
        let tp = transform_pair(&s, lambda).unwrap().loss(&bias).unwrap();
        worst = worst.max((tp - direct).abs() / direct);
    }
    outcome(worst <= 1e-8, format!("100 triples, max rel err {worst:.1e}"))
}

fn gradients() -> Outcome {
    let (mut fd_worst, mut lo, mut hi): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for k in 0..50 {
        let s = random_split(derive_seed(301, k), 5, 10, 10);
        let bias = random_vector(derive_seed(302, k), 5);
        let g = implicit_gradient(&s, &bias, 1.0).unwrap();
        let fd = finite_difference_grad(|b| outer_loss(&s, 1.0, b).unwrap(), &bias, 1e-5);
        fd_worst = fd_worst.max(rel_err(&g, &fd));
        let e1 = rel_err(&ep_gradient(&s, &bias, 1.0, 0.02).unwrap(), &g);
        let e2 = rel_err(&ep_gradient(&s, &bias, 1.0, 0.01).unwrap(), &g);
        lo = lo.min(e1 / e2);
        hi = hi.max(e1 / e2);
    }
    outcome(
        fd_worst <= 1e-4 && lo >= 1.5 && hi <= 2.5,
        format!("implicit vs FD max rel err {fd_worst:.1e}; EP halving ratio in [{lo:.3}, {hi:.3}]"),
    )
}

fn genie_analytics() -> Outcome {
    let wm = 2.0 * std::f64::consts::PI * 0.05;
    let s = DopplerSpectrum::jakes(wm).unwrap();
    let r1 = jakes_r(wm, 1);
    let expected = 1.0 - r1 * r1;
    let w = genie_wiener(&s, 1, 1, None).unwrap();
    let analytic_ok = (w.analytic_mse - expected).abs() <= 1e-6 * expected && (expected - 0.04843).abs() < 5e-5;

    // Two-slot frames give one independent pair each.
    let sampler = GaussianSampler::new(&s, 2).unwrap();
    let p = w.predictor();
    let (mut sq, mut n) = (0.0, 0usize);
    for f in 0..100_000 {
        let set = build_regression_set(&sampler.sample(derive_seed(401, f)), 1, 1).unwrap();
        sq += p.mse(&set).unwrap() * set.len() as f64;
        n += set.len();
    }
    let mc_err = (sq / n as f64 - w.analytic_mse).abs() / w.analytic_mse;

    let flat = genie_wiener(&DopplerSpectrum::Flat, 5, 3, None).unwrap();
    let flat_ok = flat.v.iter().all(|z| z.norm() == 0.0) && flat.analytic_mse == 1.0;
    outcome(
        analytic_ok && mc_err < 0.03 && flat_ok,
        format!(
            "analytic {:.6} vs 1 - r1^2 = {expected:.6}; Monte Carlo over {n} samples off by {:.2}%; flat v = 0, mse = {}",
            w.analytic_mse,
            100.0 * mc_err,
            flat.analytic_mse
        ),
    )
}

struct Summary {
    meta: f64,
    conventional: f64,
    joint: f64,
    genie: f64,
}

fn summarize(report: &OfflineReport, sweep: u64) -> Summary {
    let mean = |scheme: &str| {
        let v: Vec<f64> =
            report.records.iter().filter(|r| r.scheme == scheme && r.sweep == sweep).map(|r| r.mse).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let cells: Vec<f64> = report.cells.iter().filter(|c| c.sweep as u64 == sweep).map(|c| c.genie_analytic).collect();
    Summary {
        meta: mean("meta"),
        conventional: mean("conventional"),
        joint: mean("joint"),
        genie: cells.iter().sum::<f64>() / cells.len() as f64,
    }
}

/// Ordering checks shared by both offline reproductions.
fn offline_ordering(report: &OfflineReport) -> (bool, String) {
    let one = summarize(report, 1);
    let hundred = summarize(report, 100);
    let checks = [
        ("meta <= conventional at L=1", one.meta <= one.conventional),
        ("meta <= joint at L=1", one.meta <= one.joint),
        ("meta <= 1.5 genie at L=1", one.meta <= 1.5 * one.genie),
        ("meta <= 1.1 genie at L=100", hundred.meta <= 1.1 * hundred.genie),
        ("conventional <= 1.1 genie at L=100", hundred.conventional <= 1.1 * hundred.genie),
        ("joint > 1.1 genie at L=100", hundred.joint > 1.1 * hundred.genie),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "L=1 meta/conv/joint = {:.3}/{:.3}/{:.3} x genie; L=100 meta/conv/joint = {:.3}/{:.3}/{:.3} x genie{}",
        one.meta / one.genie,
        one.conventional / one.genie,
        one.joint / one.genie,
        hundred.meta / hundred.genie,
        hundred.conventional / hundred.genie,
        hundred.joint / hundred.genie,
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    (failed.is_empty(), detail)
}

fn doppler_mix_offline() -> Outcome {
    let report = run_offline_report(&config("offline.toml")).unwrap();
    let (ok, detail) = offline_ordering(&report);
    outcome(ok, detail)
}

fn scm_offline() -> Outcome {
    let noise = NoiseConfig::new(20.0, 100).unwrap();
    let cfg = ExperimentConfig::default().channel.scm();
    let (mut sq, mut n) = (0.0, 0usize);
    for f in 0..100 {
        let clean = sample_frame_scm(&cfg, 1000, derive_seed(601, f)).unwrap();
        let noisy = add_estimation_noise(&clean, &noise, derive_seed(602, f)).unwrap();
        for (a, b) in noisy.gains.iter().zip(clean.gains.iter()) {
            sq += (a - b).norm_sqr();
            n += 1;
        }
    }
    let emp = sq / n as f64;
    let noise_ok = noise.variance() == 1e-4 && (emp / 1e-4 - 1.0).abs() < 0.05;

    let report = run_offline_report(&config("scm.toml")).unwrap();
    let (ok, detail) = offline_ordering(&report);
    outcome(ok && noise_ok, format!("noise variance {:.4e} (empirical {emp:.4e}); {detail}", noise.variance()))
}

fn online() -> Outcome {
    let cfg = config("online.toml");
    let report = run_online_report(&cfg).unwrap();
    let tail = |scheme: &str| {
        let t = report.traces.iter().find(|t| t.scheme == scheme).unwrap();
        let last = &t.smoothed[t.smoothed.len() - 100..];
        last.iter().sum::<f64>() / 100.0
    };
    let mems: Vec<(usize, f64)> = report.traces.iter().filter_map(|t| t.memory.map(|m| (m, tail(&t.scheme)))).collect();
    let conventional = tail("conventional");
    let m1 = mems.iter().find(|m| m.0 == 1).unwrap().1;
    let monotone = mems.windows(2).all(|w| w[1].1 <= w[0].1);
    let listed: Vec<String> = mems.iter().map(|(m, v)| format!("M{m} {v:.4e}")).collect();
    outcome(
        m1 < conventional && monotone,
        format!(
            "final-100 smoothed MSE: {}, conventional {conventional:.4e}, joint {:.4e}",
            listed.join(", "),
            tail("joint")
        ),
    )
}

fn determinism() -> Outcome {
    let offline = config("offline.toml");
    let a = records_to_csv_string(&run_offline_report(&offline).unwrap().records).unwrap();
    let b = records_to_csv_string(&run_offline_report(&offline).unwrap().records).unwrap();
    let mut online = config("online.toml");
    online.mode = Mode::Online;
    online.replicates = 2;
    let c = records_to_csv_string(&run_online_report(&online).unwrap().records).unwrap();
    let d = records_to_csv_string(&run_online_report(&online).unwrap().records).unwrap();
    outcome(
        a == b && c == d,
        format!("offline CSV {} bytes, online CSV {} bytes, reruns identical: {}", a.len(), c.len(), a == b && c == d),
    )
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let criteria: [Criterion; 8] = [
        ("closed forms vs gradient descent", Duration::from_secs(10), closed_forms),
        ("transformed pair identity", Duration::from_secs(5), master_identity),
        ("gradient triangulation", Duration::from_secs(30), gradients),
        ("genie analytics", Duration::from_secs(60), genie_analytics),
        ("offline, Doppler mix", Duration::from_secs(300), doppler_mix_offline),
        ("offline, multipath with estimation noise", Duration::from_secs(300), scm_offline),
        ("online streaming", Duration::from_secs(600), online),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let mut all = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = pool.install(run);
        let took = start.elapsed();
        let passed = out.passed && took <= *budget;
        all &= passed;
        println!(
            "criterion {}: {} {name} ({:.2} s of {} s): {}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
