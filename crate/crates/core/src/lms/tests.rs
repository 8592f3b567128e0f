use super::*;
use nalgebra::dvector;

fn random_w(rng: &mut StreamRng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| 3.0 * std_normal(rng))
}

#[test]
fn config_validation() {
    assert!(LqConfig::new(3.0, 1.5, 1.0).is_ok());
    assert!(LqConfig::new(3.0, 1.6, 1.0).is_err());
    assert!(LqConfig::from_p(1.0, 1.0).is_err());
    assert!(LqConfig::from_p(2.0, 0.0).is_err());
    let c = LqConfig::from_p(6.9, 1.0).unwrap();
    assert!((1.0 / c.p + 1.0 / c.q - 1.0).abs() <= DUALITY_TOL);
}

#[test]
fn gradient_examples() {
    assert_eq!(grad_phi_q(&dvector![3.0, 4.0], 2.0), dvector![3.0, 4.0]);
    assert_eq!(grad_phi_q(&Vector::zeros(3), 1.5), Vector::zeros(3));
    let g = grad_phi_dagger_q(&dvector![3.0, 4.0], 2.0, 1.0);
    assert!((g - dvector![0.6, 0.8]).norm() < 1e-15);
    assert_eq!(grad_phi_dagger_q(&Vector::zeros(2), 1.3, 2.0), Vector::zeros(2));
    // zero entries stay zero for q < 2
    let g = grad_phi_q(&dvector![0.0, 2.0], 1.17);
    assert_eq!(g[0], 0.0);
}

#[test]
fn gradient_matches_finite_differences_of_half_squared_norm() {
    let mut rng = crate::rng::root(41);
    for &q in &[1.17, 1.5, 2.0, 3.0, 6.9] {
        for _ in 0..50 {
            let w = random_w(&mut rng, 5);
            let f = |v: &Vector| 0.5 * lq_norm(v, q).powi(2);
            let e = crate::divergence::finite_difference_error(f, &grad_phi_q(&w, q), &w, 1e-5);
            assert!(e <= 1e-5, "q={q}: {e}");
        }
    }
}

#[test]
fn norm_identities() {
    let mut rng = crate::rng::root(42);
    for &q in &[1.17, 1.5, 2.0, 6.9] {
        let p = q / (q - 1.0);
        for _ in 0..1000 {
            let w = random_w(&mut rng, 8);
            let nq = lq_norm(&w, q);
            assert!((lq_norm(&grad_phi_q(&w, q), p) - nq).abs() <= 1e-10 * nq.max(1.0));
            assert!((lq_norm(&grad_phi_dagger_q(&w, q, 2.5), p) - 2.5).abs() <= 1e-10 * 2.5);
        }
    }
}

#[test]
fn composition_identities() {
    let g = grad_phi_dagger_q(&grad_phi_dagger_q(&dvector![1.0, 1.0], 2.0, 2.0), 2.0, 2.0);
    let s = 2f64.sqrt();
    assert!((g - dvector![s, s]).norm() < 1e-15);
    let mut rng = crate::rng::root(43);
    for &q in &[1.17, 1.5, 2.0, 6.9] {
        let p = q / (q - 1.0);
        for _ in 0..1000 {
            let w = random_w(&mut rng, 6);
            let big_w = 1.7;
            let oracle = &w * (big_w / lq_norm(&w, p));
            let a = grad_phi_dagger_q(&grad_phi_dagger_q(&w, p, big_w), q, big_w);
            let b = grad_phi_q(&grad_phi_dagger_q(&w, p, big_w), q);
            assert!((a - &oracle).amax() <= 1e-10 * oracle.amax().max(1.0));
            assert!((b - &oracle).amax() <= 1e-10 * oracle.amax().max(1.0));
            // the mirror maps invert each other: ∇φ_p ∘ ∇φ_q = id
            let back = grad_phi_q(&grad_phi_q(&w, q), p);
            assert!((back - &w).amax() <= 1e-10 * w.amax().max(1.0));
        }
    }
}

#[test]
fn gradients_coincide_on_the_w_sphere() {
    let mut rng = crate::rng::root(44);
    for &q in &[1.17, 1.5, 2.0, 6.9] {
        for _ in 0..200 {
            let w0 = random_w(&mut rng, 6);
            let w = &w0 * (1.3 / lq_norm(&w0, q));
            assert!((grad_phi_q(&w, q) - grad_phi_dagger_q(&w, q, 1.3)).norm() <= 1e-10);
        }
    }
}

#[test]
fn plms_step_examples() {
    let cfg = LqConfig::from_p(3.0, 1.0).unwrap();
    let s = OnlineState {
        w: dvector![0.2, -0.4],
        t: 3,
    };
    let x = dvector![1.0, 0.5];
    let y = s.w.dot(&x);
    let next = plms_step(&s, &x, y, 0.3, &cfg).unwrap();
    assert!((next.w - &s.w).amax() <= 1e-15);
    assert_eq!(next.t, 4);
    let two = LqConfig::from_p(2.0, 1.0).unwrap();
    let mut rng = crate::rng::root(45);
    for _ in 0..100 {
        let w = random_w(&mut rng, 4);
        let x = random_w(&mut rng, 4);
        let st = OnlineState { w: w.clone(), t: 0 };
        let n = plms_step(&st, &x, 0.7, 0.05, &two).unwrap();
        let lms = &w - &x * (0.05 * (w.dot(&x) - 0.7));
        assert!((n.w - lms).amax() <= 1e-12);
    }
    assert_eq!(plms_eta(&cfg, 1.0).unwrap(), 0.5);
    assert!(plms_step(&s, &x, 0.0, 0.0, &cfg).is_err());
}

#[test]
fn dnplms_hand_trace() {
    let cfg = LqConfig::from_p(2.0, 1.0).unwrap();
    let s = OnlineState::zeros(2);
    let n = dnplms_step(&s, &dvector![1.0, 0.0], 2.0, 0.5, &cfg).unwrap();
    assert!((n.w - dvector![1.0, 0.0]).norm() < 1e-15);
}

#[test]
fn dnplms_keeps_weights_when_mirror_point_vanishes() {
    let cfg = LqConfig::from_p(2.0, 1.0).unwrap();
    let s = OnlineState {
        w: dvector![1.0, 0.0],
        t: 1,
    };
    // ∇φ†(w) = [1, 0]; choose η∇ℓ = [1, 0]: (wᵀx − y)·η·x = [1, 0] with x = [1, 0], y = 0, η = 1
    let n = dnplms_step(&s, &dvector![1.0, 0.0], 0.0, 1.0, &cfg).unwrap();
    assert_eq!(n.w, s.w);
    assert_eq!(n.t, 2);
}

#[test]
fn adaptive_eta_examples() {
    let cfg = LqConfig::from_p(3.0, 1.0).unwrap();
    let e = adaptive_eta(1.0, &cfg, 2.0, 1.0).unwrap();
    assert!((e - 1.0 / 34.0).abs() < 1e-16);
    let e0 = adaptive_eta(0.0, &cfg, 2.0, 0.5).unwrap();
    assert!((e0 - 0.5 / (4.0 * 2.0 * 2.0 * 2.0)).abs() < 1e-16);
    let mut prev = f64::INFINITY;
    for r in [0.0, 0.1, 1.0, 10.0] {
        let e = adaptive_eta(r, &cfg, 2.0, 1.0).unwrap();
        assert!(e < prev);
        prev = e;
    }
    assert!(matches!(adaptive_eta(1.0, &cfg, 2.0, 0.4), Err(Error::Argument(_))));
    assert!(matches!(adaptive_eta(1.0, &cfg, 2.0, 1.1), Err(Error::Argument(_))));
}

#[test]
fn regret_examples() {
    let cfg = LqConfig::from_p(3.0, 2.0).unwrap();
    let mut rng = crate::rng::root(46);
    let u = random_w(&mut rng, 3);
    let g = lq_norm(&u, cfg.q) / cfg.w;
    let mut tracking = StepLog::default();
    let mut noiseless = StepLog::default();
    for _ in 0..50 {
        let x = random_w(&mut rng, 3);
        let y = rng.random_range(-1.0..1.0);
        tracking.push(x.clone(), y, u.dot(&x) / g);
        noiseless.push(x.clone(), u.dot(&x) / g, 0.3 * x[0]);
    }
    let r = RegretLedger::build(&tracking, &u, &cfg).unwrap();
    assert_eq!(r.learner_terms.iter().sum::<f64>(), 0.0);
    assert!(r.regret() <= 0.0);
    let r = regret_q(&noiseless, &u, &cfg).unwrap();
    assert!(r >= 0.0);
    let scaled = regret_q(&noiseless, &(&u * 7.5), &cfg).unwrap();
    assert!((scaled - r).abs() <= 1e-12 * r.abs().max(1.0));
    assert!(matches!(
        regret_q(&noiseless, &Vector::zeros(3), &cfg),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn regret_bound_examples() {
    let cfg = LqConfig::from_p(3.0, 1.0).unwrap();
    assert!((regret_bound(&cfg, 1.0, 1.0).unwrap() - 56.0).abs() < 1e-12);
    let b1 = regret_bound(&cfg, 1.0, 1.0).unwrap();
    let b2 = regret_bound(&cfg, 1.0, 2.0).unwrap();
    let b3 = regret_bound(&cfg, 1.0, 3.0).unwrap();
    assert!(((b3 - b2) - (b2 - b1)).abs() < 1e-12);
    let two = LqConfig::from_p(2.0, 1.0).unwrap();
    assert!(matches!(regret_bound(&two, 1.0, 1.0), Err(Error::OutOfRegime(_))));
}

#[test]
fn stream_inputs_have_exact_p_norm_and_targets_exact_q_norm() {
    let cfg = LqConfig::from_p(6.9, 1.3).unwrap();
    let mut rng = crate::rng::root(47);
    for _ in 0..200 {
        let x = lp_sphere_sample(&mut rng, 20, cfg.p, 2.0);
        assert!((lq_norm(&x, cfg.p) - 2.0).abs() <= 1e-12);
        let u = random_target(&mut rng, 20, TargetKind::Sparse, &cfg);
        assert!((lq_norm(&u, cfg.q) - 1.3).abs() <= 1e-12);
        assert_eq!(u.iter().filter(|&&v| v != 0.0).count(), 2);
    }
}

#[test]
fn smoke_run_norms_and_offsets() {
    let cfg = LqConfig::from_p(6.9, 1.0).unwrap();
    let spec = StreamSpec::default();
    let mut rng = crate::rng::root(48);
    let start = std::time::Instant::now();
    let sim = simulate(&spec, &cfg, &mut rng).unwrap();
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(sim.steps.len(), 5000);
    assert_eq!(sim.targets.len(), 5);
    for s in &sim.steps {
        assert!((s.norm_dn_q - 1.0).abs() <= 1e-6);
    }
    assert!(sim.max_offset_norm <= cfg.w + 1e-12);
    let t = lms_table(&sim);
    assert_eq!(t.len(), 5000);
    assert_eq!(
        lms_file_name(&cfg, 1.0, TargetKind::Dense),
        "dnplms_p6.90_q1.17_rho1.00_dense.csv"
    );
}

#[test]
fn trailing_mean_window() {
    let v = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(trailing_mean(&v, 2), vec![1.0, 1.5, 2.5, 3.5]);
}
