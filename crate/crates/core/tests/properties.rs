use nalgebra::DVector;
use proptest::prelude::*;

use scaled_bregman::catalog::generators::{lq_norm, AffineScaler, KlGenerator, LpNormScaler, SquaredNorm};
use scaled_bregman::divergence::{bregman_divergence, scaled_generator, verify_scaled_identity, Vector};
use scaled_bregman::geometry::bisector_residual_identity;
use scaled_bregman::lms::{grad_phi_dagger_q, grad_phi_q, regret_q, LqConfig, StepLog};
use scaled_bregman::manifold::{seeding_probabilities, Manifold, TangentPoint};

fn vec_in(d: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vector> {
    prop::collection::vec(lo..hi, d).prop_map(DVector::from_vec)
}

fn nonzero_vec(d: usize) -> impl Strategy<Value = Vector> {
    vec_in(d, -3.0, 3.0).prop_filter("away from the origin", |v| v.norm() > 0.05)
}

proptest! {
    #[test]
    fn cosine_row_identity(x in nonzero_vec(4), y in nonzero_vec(4)) {
        let c = verify_scaled_identity(&SquaredNorm::with_offset(1.0), &LpNormScaler::new(2.0, 1.0), &x, &y).unwrap();
        prop_assert!(c.relative() <= 1e-9);
        // ‖x‖ − ⟨x, y⟩/‖y‖ in closed form
        prop_assert!((c.rhs - (x.norm() - x.dot(&y) / y.norm())).abs() <= 1e-9 * c.rhs.abs().max(1.0));
    }

    #[test]
    fn kl_sum_identity_and_residual_scaling(
        x in vec_in(3, 0.05, 4.0),
        y in vec_in(3, 0.05, 4.0),
        z in vec_in(3, 0.05, 4.0),
    ) {
        let g = AffineScaler::sum(3);
        prop_assert!(verify_scaled_identity(&KlGenerator, &g, &x, &y).unwrap().relative() <= 1e-9);
        prop_assert!(bisector_residual_identity(&KlGenerator, &g, &x, &y, &z).unwrap().relative() <= 1e-9);
    }

    #[test]
    fn scaled_divergence_vanishes_on_rays(x in vec_in(3, 0.05, 4.0), t in 0.1f64..10.0) {
        let dag = scaled_generator(KlGenerator, AffineScaler::sum(3));
        let d = bregman_divergence(&dag, &(&x * t), &x).unwrap();
        prop_assert!(d.abs() <= 1e-12 * t.max(1.0));
    }

    #[test]
    fn mirror_maps_preserve_dual_norms(w in nonzero_vec(6), q in 1.1f64..4.0, big_w in 0.1f64..5.0) {
        let p = q / (q - 1.0);
        let nq = lq_norm(&w, q);
        prop_assert!((lq_norm(&grad_phi_q(&w, q), p) - nq).abs() <= 1e-10 * nq.max(1.0));
        prop_assert!((lq_norm(&grad_phi_dagger_q(&w, q, big_w), p) - big_w).abs() <= 1e-10 * big_w);
    }

    #[test]
    fn regret_is_scale_invariant(
        xs in prop::collection::vec(vec_in(3, -1.0, 1.0), 1..20),
        u in nonzero_vec(3),
        alpha in 0.1f64..10.0,
    ) {
        let cfg = LqConfig::from_p(3.0, 1.0).unwrap();
        let mut log = StepLog::default();
        for (i, x) in xs.iter().enumerate() {
            log.push(x.clone(), (i as f64).sin(), 0.1 * i as f64);
        }
        let a = regret_q(&log, &u, &cfg).unwrap();
        let b = regret_q(&log, &(&u * alpha), &cfg).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn d_rec_is_symmetric_and_nonnegative(x in vec_in(2, -2.0, 2.0), c in vec_in(2, -2.0, 2.0)) {
        let (x, c) = (TangentPoint::new(x).unwrap(), TangentPoint::new(c).unwrap());
        for m in Manifold::ALL {
            let a = m.d_rec(&x, &c).unwrap();
            let b = m.d_rec(&c, &x).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn seeding_probabilities_sum_to_one(w in prop::collection::vec(0.0f64..5.0, 1..50)) {
        if let Some(p) = seeding_probabilities(&w) {
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        } else {
            prop_assert!(w.iter().all(|&v| v == 0.0));
        }
    }
}
