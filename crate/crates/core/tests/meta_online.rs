mod common;

use common::*;
use metapred_core::channel::{ChannelFrame, DopplerSpectrum, GaussianSampler};
use metapred_core::dataset::{build_regression_set, split, SplitPolicy, SplitSet};
use metapred_core::meta_offline::{meta_fit, transform_pair};
use metapred_core::meta_online::{
    ep_gradient, ep_gradient_two_sided, ep_stationary_point, implicit_gradient, online_step, run_online, OnlineConfig,
    OnlineMode, OnlineState, StepSize,
};
use metapred_core::rng::derive_seed;
use proptest::prelude::*;

fn stream(seed: u64, frames: usize, len: usize) -> Vec<ChannelFrame> {
    let s = DopplerSpectrum::jakes(2.0 * std::f64::consts::PI * 0.07).unwrap();
    let sampler = GaussianSampler::new(&s, len).unwrap();
    (0..frames).map(|f| sampler.sample(derive_seed(seed, f as u64)).with_id(f)).collect()
}

fn state_with(frames: &[SplitSet], window: usize) -> OnlineState {
    let mut st = OnlineState::new(window);
    for s in frames {
        st.push(s.clone(), frames.len());
    }
    st
}

#[test]
fn implicit_gradient_matches_transformed_gradient_and_fd() {
    for k in 0..20 {
        let s = random_split(derive_seed(1, k), 4, 1 + k as usize % 8, 6);
        let bias = random_vector(derive_seed(2, k), 4);
        let lambda = 10f64.powf(k as f64 % 4.0 - 1.5);
        let g = implicit_gradient(&s, &bias, lambda).unwrap();
        let t = transform_pair(&s, lambda).unwrap().gradient(&bias).unwrap();
        assert!(rel_err(&g, &t) < 1e-8, "instance {k}");
        let fd = fd_grad(|b| outer_loss_direct(&s, lambda, b), &bias, 1e-5);
        assert!(rel_err(&g, &fd) < 1e-4, "instance {k}: {}", rel_err(&g, &fd));
    }
}

#[test]
fn implicit_gradient_vanishes_at_single_frame_optimum() {
    let s = random_split(5, 3, 4, 8);
    let v = meta_fit(std::slice::from_ref(&s), 1.0).unwrap();
    let scale = transform_pair(&s, 1.0).unwrap().target.norm().powi(2).max(1.0);
    assert!(implicit_gradient(&s, &v, 1.0).unwrap().norm() <= 1e-7 * scale);
}

#[test]
fn stationary_point_matches_descent() {
    for k in 0..10 {
        let s = random_split(derive_seed(6, k), 5, 10, 10);
        let bias = random_vector(derive_seed(7, k), 5);
        let (tr, te) = (pairs_of(&s.train), pairs_of(&s.test));
        let gd = descend(|v| objective_grad(v, &tr, &te, 0.01, 1.0, &bias), &bias, 1e-13, 2_000_000);
        let v = ep_stationary_point(&s, &bias, 1.0, 0.01).unwrap();
        assert!(rel_err(&v, &gd) < 1e-7, "instance {k}: {}", rel_err(&v, &gd));
    }
}

#[test]
fn stationary_point_limits() {
    let s = random_split(8, 3, 5, 5);
    let bias = random_vector(9, 3);
    let v0 = ep_stationary_point(&s, &bias, 1.0, 0.0).unwrap();
    assert!(rel_err(&v0, &ridge_direct(&pairs_of(&s.train), 1.0, &bias)) < 1e-12);
    let d3 = norm(&sub(&ep_stationary_point(&s, &bias, 1.0, 1e-3).unwrap(), &v0));
    let d4 = norm(&sub(&ep_stationary_point(&s, &bias, 1.0, 1e-4).unwrap(), &v0));
    assert!(d4 < d3 && d4 < 1e-3 * (1.0 + norm(&v0)));
    let empty = random_split(10, 3, 0, 0);
    assert_eq!(&ep_stationary_point(&empty, &bias, 1.0, 0.5).unwrap()[..], &bias[..]);
}

#[test]
fn ep_error_is_first_order() {
    for k in 0..50 {
        let s = random_split(derive_seed(11, k), 5, 10, 10);
        let bias = random_vector(derive_seed(12, k), 5);
        let exact = implicit_gradient(&s, &bias, 1.0).unwrap();
        let e1 = rel_err(&ep_gradient(&s, &bias, 1.0, 0.02).unwrap(), &exact);
        let e2 = rel_err(&ep_gradient(&s, &bias, 1.0, 0.01).unwrap(), &exact);
        assert!((1.6..=2.4).contains(&(e1 / e2)), "instance {k}: ratio {}", e1 / e2);
        let en = rel_err(&ep_gradient(&s, &bias, 1.0, -0.01).unwrap(), &exact);
        assert!((en / e2 - 1.0).abs() < 0.2, "instance {k}: {en} vs {e2}");
        let two = rel_err(&ep_gradient_two_sided(&s, &bias, 1.0, 0.01).unwrap(), &exact);
        assert!(two < e2);
    }
}

#[test]
fn closed_form_stream_matches_offline_fit() {
    let (n, d, l_tr, l_te) = (3, 1, 6, 12);
    let frames = stream(20, 7, l_tr + l_te + n + d - 1);
    let cfg = OnlineConfig { memory: 10, mode: OnlineMode::ClosedForm, train_len: l_tr, ..OnlineConfig::default() };
    let records = run_online(&frames, &cfg, n, d).unwrap();
    let splits: Vec<SplitSet> = frames[..6]
        .iter()
        .map(|f| split(&build_regression_set(f, n, d).unwrap(), l_tr, SplitPolicy::Sequential).unwrap())
        .collect();
    let offline = meta_fit(&splits, cfg.lambda).unwrap();
    assert!(rel_err(&records[6].bias, &offline) < 1e-10);
    assert_eq!(records, run_online(&frames, &cfg, n, d).unwrap());
}

#[test]
fn recursive_ridge_without_anchor_is_closed_form() {
    let frames: Vec<SplitSet> = (0..4).map(|f| random_split(derive_seed(30, f), 3, 4, 6)).collect();
    let mut st = OnlineState::new(3);
    st.bias = random_vector(31, 3).into();
    st.updates = 3;
    for s in &frames {
        st.push(s.clone(), 4);
    }
    let closed =
        online_step(st.clone(), &OnlineConfig { memory: 4, mode: OnlineMode::ClosedForm, ..OnlineConfig::default() })
            .unwrap();
    let rr =
        OnlineConfig { memory: 4, mode: OnlineMode::RecursiveRidge { prior_weight: 0.0 }, ..OnlineConfig::default() };
    assert!(rel_err(&online_step(st.clone(), &rr).unwrap().bias, &closed.bias) < 1e-10);
    let anchored = OnlineConfig { mode: OnlineMode::RecursiveRidge { prior_weight: 1e12 }, ..rr };
    assert!(rel_err(&online_step(st.clone(), &anchored).unwrap().bias, &st.bias) < 1e-6);
}

#[test]
fn ep_descent_converges_to_closed_form() {
    let frames: Vec<SplitSet> = (0..3).map(|f| random_split(derive_seed(40, f), 3, 5, 8)).collect();
    let target = meta_fit(&frames, 1.0).unwrap();
    let lip: f64 = frames
        .iter()
        .map(|s| 2.0 * transform_pair(s, 1.0).unwrap().design.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    let cfg = OnlineConfig {
        memory: 3,
        alpha: 1e-6,
        step: StepSize::Constant(1.0 / lip),
        iterations: 200_000,
        mode: OnlineMode::Ep,
        ..OnlineConfig::default()
    };
    let st = online_step(state_with(&frames, 3), &cfg).unwrap();
    assert!(rel_err(&st.bias, &target) < 1e-4, "{}", rel_err(&st.bias, &target));
}

#[test]
fn diminishing_steps_decrease_the_window_loss() {
    let frames: Vec<SplitSet> = (0..4).map(|f| random_split(derive_seed(50, f), 4, 6, 10)).collect();
    let lip: f64 = frames
        .iter()
        .map(|s| 2.0 * transform_pair(s, 1.0).unwrap().design.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    let cfg = OnlineConfig {
        memory: 4,
        step: StepSize::InverseTime { initial: 1.0 / lip, decay: 0.1 },
        iterations: 1,
        ..OnlineConfig::default()
    };
    let mut st = state_with(&frames, 4);
    let mut prev = st.window_loss(1.0, &st.bias).unwrap();
    for _ in 0..50 {
        st = online_step(st, &cfg).unwrap();
        let now = st.window_loss(1.0, &st.bias).unwrap();
        assert!(now <= prev * (1.0 + 1e-12));
        prev = now;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_form_ignores_window_order(seed in any::<u64>(), f in 2usize..5, shift in 1usize..4) {
        let frames: Vec<SplitSet> = (0..f).map(|i| random_split(derive_seed(seed, i as u64), 3, 3, 5)).collect();
        let mut rotated = frames.clone();
        rotated.rotate_left(shift % f);
        let cfg = OnlineConfig { memory: f, mode: OnlineMode::ClosedForm, ..OnlineConfig::default() };
        let a = online_step(state_with(&frames, 3), &cfg).unwrap().bias;
        let b = online_step(state_with(&rotated, 3), &cfg).unwrap().bias;
        prop_assert!(rel_err(&a, &b) < 1e-9);
    }

    #[test]
    fn memory_never_exceeds_m(seed in any::<u64>(), m in 1usize..5, pushes in 1usize..10) {
        let mut st = OnlineState::new(2);
        for i in 0..pushes {
            st.push(random_split(derive_seed(seed, i as u64), 2, 1, 1), m);
            prop_assert!(st.history.len() <= m);
        }
        prop_assert_eq!(st.frame_index, pushes);
    }
}
