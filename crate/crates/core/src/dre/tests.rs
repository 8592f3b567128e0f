use super::*;
use crate::catalog::generators::SquaredNorm;
use crate::divergence::verify_scaled_identity;
use nalgebra::dvector;

fn two_class(mu: f64) -> MixtureSpec {
    MixtureSpec::new(
        dvector![0.5, 0.5],
        vec![dvector![0.0, 0.0], dvector![mu, 0.0]],
        vec![1.0, 1.0],
    )
    .unwrap()
}

fn three_class() -> MixtureSpec {
    MixtureSpec::new(
        dvector![0.2, 0.3, 0.5],
        vec![dvector![0.0, 0.0], dvector![1.0, -0.5], dvector![-0.4, 0.8]],
        vec![0.7, 1.0, 0.9],
    )
    .unwrap()
}

/// Gaussian pdf written out directly.
fn gauss_pdf(x: &Vector, mu: &Vector, s: f64) -> f64 {
    let d = x.len() as i32;
    let q: f64 = x.iter().zip(mu.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    (-q / (2.0 * s * s)).exp() / (2.0 * std::f64::consts::PI * s * s).powi(d).sqrt()
}

#[test]
fn invalid_specs_are_rejected() {
    assert!(MixtureSpec::new(dvector![1.0], vec![dvector![0.0]], vec![1.0]).is_err());
    assert!(MixtureSpec::new(dvector![1.0, 0.0], vec![dvector![0.0], dvector![1.0]], vec![1.0, 1.0]).is_err());
    assert!(MixtureSpec::new(dvector![0.5, 0.4], vec![dvector![0.0], dvector![1.0]], vec![1.0, 1.0]).is_err());
    assert!(MixtureSpec::new(dvector![0.5, 0.5], vec![dvector![0.0], dvector![1.0]], vec![1.0, 0.0]).is_err());
}

#[test]
fn too_few_samples() {
    let mut rng = crate::rng::root(1);
    assert!(matches!(
        sample_dataset(&three_class(), 0, &mut rng),
        Err(Error::Argument(_))
    ));
    assert!(matches!(
        sample_dataset(&three_class(), 2, &mut rng),
        Err(Error::Argument(_))
    ));
}

#[test]
fn class_frequencies_match_priors() {
    let spec = three_class();
    let mut rng = crate::rng::root(2);
    let n = 100_000;
    let data = sample_dataset(&spec, n, &mut rng).unwrap();
    for c in 0..3 {
        let k = data.ys.iter().filter(|&&y| y == c).count() as f64;
        let p = spec.priors()[c];
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((k - n as f64 * p).abs() <= 3.0 * sd, "class {c}: {k}");
    }
}

#[test]
fn posterior_symmetry_and_dominance() {
    let same = two_class(0.0);
    let p = true_posterior(&same, &dvector![0.3, -2.0]);
    assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    let far = two_class(10.0);
    let p = true_posterior(&far, &dvector![0.0, 0.0]);
    assert!(p[0] >= 1.0 - 1e-9);
}

#[test]
fn posterior_integrates_to_prior() {
    let spec = three_class();
    let mut rng = crate::rng::root(3);
    let n = 100_000;
    let mut acc = Vector::zeros(3);
    for _ in 0..n {
        let (x, _) = spec.sample_joint(&mut rng);
        acc += true_posterior(&spec, &x);
    }
    acc /= n as f64;
    for c in 0..3 {
        assert!((acc[c] - spec.priors()[c]).abs() <= 0.01);
    }
}

#[test]
fn eta_examples() {
    let pi = dvector![0.2, 0.3, 0.5];
    let eta = eta_from_posterior(&pi, &pi).unwrap();
    for c in 0..2 {
        assert!((eta[c] - 0.5).abs() < 1e-15);
    }
    let half = dvector![0.5, 0.5];
    let p = dvector![0.8, 0.2];
    let eta = eta_from_posterior(&p, &half).unwrap();
    assert!((eta[0] - 0.8).abs() < 1e-15);
    let third = Vector::from_element(3, 1.0 / 3.0);
    let eta = eta_from_posterior(&third, &third).unwrap();
    assert!(eta.iter().all(|&e| (e - 2.0 / 3.0).abs() < 1e-15));
    assert!(matches!(
        eta_from_posterior(&third, &dvector![0.5, 0.0, 0.5]),
        Err(Error::Domain { .. })
    ));
}

#[test]
fn ratio_examples() {
    let r = density_ratio_estimate(&Vector::from_element(4, 0.7)).unwrap();
    assert!(r.iter().all(|&v| v == 1.0));
    assert!(matches!(
        density_ratio_estimate(&dvector![0.5, 0.0]),
        Err(Error::Domain { .. })
    ));
    // binary: r̂ = (1 − π)/π · η̂/(1 − η̂) with η̂ the class-1 posterior
    for &pi in &[0.5, 0.3, 0.8] {
        for &e in &[0.5, 0.1, 0.9] {
            let priors = dvector![pi, 1.0 - pi];
            let r = density_ratio_estimate(&eta_from_posterior(&dvector![e, 1.0 - e], &priors).unwrap()).unwrap();
            let oracle = (1.0 - pi) / pi * e / (1.0 - e);
            assert!((r[0] - oracle).abs() <= 1e-14 * oracle, "{pi} {e}");
        }
    }
}

#[test]
fn exact_posterior_recovers_analytic_ratios() {
    let spec = three_class();
    let mut rng = crate::rng::root(4);
    for _ in 0..1000 {
        let x = Vector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
        let r =
            density_ratio_estimate(&eta_from_posterior(&true_posterior(&spec, &x), spec.priors()).unwrap()).unwrap();
        let pr = gauss_pdf(&x, &spec.means()[2], spec.stds()[2]);
        for c in 0..2 {
            let oracle = gauss_pdf(&x, &spec.means()[c], spec.stds()[c]) / pr;
            assert!((r[c] - oracle).abs() <= 1e-9 * oracle);
        }
    }
}

#[test]
fn scaler_examples() {
    let spec = three_class();
    let g = dre_scaler(spec.priors()).unwrap();
    assert!((g.value(&Vector::zeros(2)) - 1.0).abs() < 1e-15);
    let g = dre_scaler(&dvector![0.5, 0.5]).unwrap();
    for z in [0.0, 0.4, 3.0] {
        assert!((g.value(&dvector![z]) - (1.0 + z)).abs() < 1e-15);
    }
    assert!(g.is_affine());
}

#[test]
fn scaler_reproduces_the_marginal() {
    let spec = three_class();
    let g = dre_scaler(spec.priors()).unwrap();
    let mut rng = crate::rng::root(5);
    for _ in 0..1000 {
        let x = Vector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
        let dens: Vec<f64> = (0..3)
            .map(|c| gauss_pdf(&x, &spec.means()[c], spec.stds()[c]))
            .collect();
        let m: f64 = (0..3).map(|c| spec.priors()[c] * dens[c]).sum();
        let r = dvector![dens[0] / dens[2], dens[1] / dens[2]];
        let rhs = (1.0 - spec.priors()[2]) * g.value(&r) * dens[2];
        assert!((m - rhs).abs() <= 1e-9 * m);
    }
}

#[test]
fn binary_ratio_maps_back_to_posterior() {
    // η = r/(1 + r) at π = 1/2
    let g = dre_scaler(&dvector![0.5, 0.5]).unwrap();
    for r in [0.01, 0.5, 1.0, 7.0] {
        let rv = dvector![r];
        assert!((r / g.value(&rv) - r / (1.0 + r)).abs() < 1e-15);
    }
}

#[test]
fn affine_scaler_identity_for_arbitrary_convex_generators() {
    let spec = three_class();
    let g = dre_scaler(spec.priors()).unwrap();
    let mut rng = crate::rng::root(6);
    for _ in 0..1000 {
        let x = Vector::from_fn(2, |_, _| rng.random_range(0.01..5.0));
        let y = Vector::from_fn(2, |_, _| rng.random_range(0.01..5.0));
        for c in [
            verify_scaled_identity(&KlGenerator, &g, &x, &y).unwrap(),
            verify_scaled_identity(&SquaredNorm::with_offset(0.0), &g, &x, &y).unwrap(),
        ] {
            assert!(c.relative() <= 1e-9);
        }
    }
}

fn blobs(rng: &mut StreamRng) -> LabeledDataset {
    let spec = MixtureSpec::new(
        dvector![0.5, 0.5],
        vec![dvector![-3.0, 0.0], dvector![3.0, 0.0]],
        vec![0.7, 0.7],
    )
    .unwrap();
    sample_dataset(&spec, 400, rng).unwrap()
}

#[test]
fn softmax_separates_blobs() {
    let mut rng = crate::rng::root(7);
    let data = blobs(&mut rng);
    let (model, trace) = fit_softmax_trace(&data, 100, 1.0).unwrap();
    assert!(model.accuracy(&data) >= 0.95);
    for w in trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
    let p = model.posterior(&dvector![0.5, 1.0]);
    assert!((p.sum() - 1.0).abs() < 1e-14 && p.iter().all(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn softmax_argument_and_fit_errors() {
    let mut rng = crate::rng::root(8);
    let data = blobs(&mut rng);
    assert!(matches!(fit_softmax(&data, 0, 1.0), Err(Error::Argument(_))));
    assert!(matches!(fit_softmax(&data, 5, 0.0), Err(Error::Argument(_))));
    let single = LabeledDataset::new(vec![dvector![0.0, 0.0]; 3], vec![1; 3], 2).unwrap();
    assert!(matches!(fit_softmax(&single, 5, 1.0), Err(Error::Fit(_))));
}

#[test]
fn perfect_estimator_gives_zero_on_both_sides() {
    let spec = three_class();
    let mut rng = crate::rng::root(9);
    let c = reduction_check(&spec, &spec, &KlGenerator, 2000, &mut rng).unwrap();
    assert_eq!(c.lhs, 0.0);
    assert_eq!(c.rhs, 0.0);
    assert_eq!(c.rhs_reference, 0.0);
    assert!(c.paired_ok());
}

#[test]
fn reduction_with_perturbed_estimators() {
    let mut rng = crate::rng::root(10);
    let binary = MixtureSpec::new(dvector![0.5, 0.5], vec![dvector![0.0], dvector![0.8]], vec![1.0, 0.8]).unwrap();
    for spec in [binary, three_class()] {
        let model = TiltedPosterior::random(&spec, 0.3, &mut rng);
        let c = reduction_check(&spec, &model, &KlGenerator, 20_000, &mut rng).unwrap();
        assert!(c.lhs > 0.0);
        assert!(c.paired_ok(), "{c:?}");
        assert!(c.reference_z() < 4.0, "{c:?}");
        let c = reduction_check(&spec, &model, &SquaredNorm::with_offset(0.0), 5_000, &mut rng).unwrap();
        assert!(c.paired_ok(), "{c:?}");
    }
}

#[test]
fn dre_smoke_run() {
    let cfg = DreConfig {
        sizes: vec![256],
        trials: 2,
        seed: 3,
        ..DreConfig::default()
    };
    let start = std::time::Instant::now();
    let rows = run_dre_experiment(&cfg).unwrap();
    assert!(start.elapsed().as_secs_f64() < 10.0);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r.divergence >= -1e-6 && r.divergence.is_finite());
    }
    let again = run_dre_experiment(&cfg).unwrap();
    assert_eq!(rows, again);
    let t = dre_table(&rows);
    assert_eq!(t.header(), &["N", "trial", "divergence"]);
}
