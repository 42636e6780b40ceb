//! Quick oracle suite behind `metapred selftest`.

use metapred_core::baselines::genie_wiener;
use metapred_core::channel::{add_estimation_noise, DopplerSpectrum, GaussianSampler, NoiseConfig};
use metapred_core::dataset::build_regression_set;
use metapred_core::meta_offline::{outer_loss, transform_pair};
use metapred_core::meta_online::{ep_gradient, ep_stationary_point, implicit_gradient};
use metapred_core::ridge::{ridge_solve, HyperParams};
use metapred_core::rng::derive_seed;

use crate::oracles::*;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn ridge_vs_descent() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let s = random_split(derive_seed(11, k), 5, 10, 0);
        let bias = random_vector(derive_seed(12, k), 5);
        let train = pairs_of(&s.train);
        let gd = gradient_descent(|v| total_objective_grad(v, &train, &[], 0.0, 1.0, &bias), &bias, 1e-12, 1_000_000);
        let v = ridge_solve(&s.train, &HyperParams::new(1.0, bias.clone().into()).unwrap()).unwrap().v;
        worst = worst.max(rel_err(&v, &gd.x));
    }
    check("ridge closed form vs gradient descent", worst <= 1e-6, format!("max rel err {worst:.2e}"))
}

fn meta_identity() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let s = random_split(derive_seed(21, k), 4, 6, 8);
        let bias = random_vector(derive_seed(22, k), 4);
        let lambda = 10f64.powi(k as i32 % 5 - 2);
        let tp = transform_pair(&s, lambda).unwrap();
        let direct = outer_loss_direct(&pairs_of(&s.train), &pairs_of(&s.test), lambda, &bias);
        worst = worst.max((tp.loss(&bias).unwrap() - direct).abs() / direct);
    }
    check("transformed pair loss vs ridge outer loss", worst <= 1e-8, format!("max rel err {worst:.2e}"))
}

fn implicit_vs_fd() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let s = random_split(derive_seed(31, k), 5, 10, 10);
        let bias = random_vector(derive_seed(32, k), 5);
        let g = implicit_gradient(&s, &bias, 1.0).unwrap();
        let fd = finite_difference_grad(|b| outer_loss(&s, 1.0, b).unwrap(), &bias, 1e-5);
        worst = worst.max(rel_err(&g, &fd));
    }
    check("implicit gradient vs finite differences", worst <= 1e-4, format!("max rel err {worst:.2e}"))
}

fn ep_first_order() -> Check {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for k in 0..10 {
        let s = random_split(derive_seed(41, k), 5, 10, 10);
        let bias = random_vector(derive_seed(42, k), 5);
        let exact = implicit_gradient(&s, &bias, 1.0).unwrap();
        let e1 = rel_err(&ep_gradient(&s, &bias, 1.0, 0.02).unwrap(), &exact);
        let e2 = rel_err(&ep_gradient(&s, &bias, 1.0, 0.01).unwrap(), &exact);
        lo = lo.min(e1 / e2);
        hi = hi.max(e1 / e2);
    }
    check(
        "equilibrium propagation error is first order",
        lo >= 1.5 && hi <= 2.5,
        format!("halving ratio in [{lo:.3}, {hi:.3}]"),
    )
}

fn ep_stationary_vs_descent() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let s = random_split(derive_seed(51, k), 5, 10, 10);
        let bias = random_vector(derive_seed(52, k), 5);
        let (tr, te) = (pairs_of(&s.train), pairs_of(&s.test));
        let gd = gradient_descent(|v| total_objective_grad(v, &tr, &te, 0.01, 1.0, &bias), &bias, 1e-12, 1_000_000);
        worst = worst.max(rel_err(&ep_stationary_point(&s, &bias, 1.0, 0.01).unwrap(), &gd.x));
    }
    check("nudged stationary point vs gradient descent", worst <= 1e-6, format!("max rel err {worst:.2e}"))
}

fn jakes_genie_analytic() -> Check {
    let wm = 2.0 * std::f64::consts::PI * 0.05;
    let s = DopplerSpectrum::jakes(wm).unwrap();
    let r1 = jakes_r(wm, 1);
    let lib_r1 = s.autocorrelation(1).unwrap().re;
    let w = genie_wiener(&s, 1, 1, None).unwrap();
    let expected = 1.0 - r1 * r1;
    let err = (w.analytic_mse - expected).abs() / expected;
    check(
        "Jakes autocorrelation and scalar genie vs Bessel series",
        (lib_r1 - r1).abs() < 1e-9 && err < 1e-6,
        format!("r1 {lib_r1:.6} vs {r1:.6}; mse {:.5e} vs {expected:.5e}", w.analytic_mse),
    )
}

fn genie_monte_carlo() -> Check {
    let s = DopplerSpectrum::jakes(2.0 * std::f64::consts::PI * 0.05).unwrap();
    let w = genie_wiener(&s, 1, 1, None).unwrap();
    let sampler = GaussianSampler::new(&s, 201).unwrap();
    let p = w.predictor();
    let (mut sq, mut n) = (0.0, 0usize);
    for f in 0..100 {
        let set = build_regression_set(&sampler.sample(derive_seed(61, f)), 1, 1).unwrap();
        sq += p.mse(&set).unwrap() * set.len() as f64;
        n += set.len();
    }
    let emp = sq / n as f64;
    let err = (emp - w.analytic_mse).abs() / w.analytic_mse;
    check("genie Monte Carlo vs analytic MSE", err < 0.05, format!("{n} samples, rel err {err:.3}"))
}

fn noise_variance() -> Check {
    let noise = NoiseConfig::new(20.0, 100).unwrap();
    let sampler = GaussianSampler::new(&DopplerSpectrum::Flat, 500).unwrap();
    let (mut sq, mut n) = (0.0, 0usize);
    for f in 0..40 {
        let noisy = add_estimation_noise(&sampler.sample(derive_seed(71, f)), &noise, derive_seed(72, f)).unwrap();
        for (a, b) in noisy.gains.iter().zip(noisy.clean.as_ref().unwrap().iter()) {
            sq += (a - b).norm_sqr();
            n += 1;
        }
    }
    let emp = sq / n as f64;
    let err = (emp - noise.variance()).abs() / noise.variance();
    check("estimation noise variance", err < 0.05, format!("{emp:.4e} vs {:.4e}", noise.variance()))
}

/// Runs every check.
pub fn run_selftest() -> Vec<Check> {
    vec![
        ridge_vs_descent(),
        meta_identity(),
        implicit_vs_fd(),
        ep_first_order(),
        ep_stationary_vs_descent(),
        jakes_genie_analytic(),
        genie_monte_carlo(),
        noise_variance(),
    ]
}
