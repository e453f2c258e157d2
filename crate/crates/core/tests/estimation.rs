mod common;

use ci_domain::estimation::{log_likelihood, log_likelihood_at, mle, ConstraintSet};
use ci_domain::measurement::{NormalState, Sample};
use ci_domain::Error;
use common::{loglik_grad, TestRng};
use proptest::prelude::*;

#[test]
fn worked_examples() {
    let x = Sample::new(vec![1.0, 2.0, 3.0]).unwrap();
    let full = mle(&x, ConstraintSet::Full).unwrap();
    assert!((full.state.mu() - 2.0).abs() < 1e-15);
    assert!((full.state.sigma() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    let fs = mle(&x, ConstraintSet::FixedSigma(1.0)).unwrap();
    assert_eq!((fs.state.mu(), fs.state.sigma()), (2.0, 1.0));
    let fm = mle(&x, ConstraintSet::FixedMu(0.0)).unwrap();
    assert_eq!(fm.state.mu(), 0.0);
    assert!((fm.state.sigma() - (14.0f64 / 3.0).sqrt()).abs() < 1e-15);
}

#[test]
fn degenerate_samples() {
    let c = Sample::new(vec![4.0; 5]).unwrap();
    assert!(matches!(mle(&c, ConstraintSet::Full), Err(Error::Degenerate(_))));
    assert!(matches!(mle(&c, ConstraintSet::FixedMu(4.0)), Err(Error::Degenerate(_))));
    assert!(mle(&c, ConstraintSet::FixedMu(3.0)).is_ok());
    assert!(mle(&c, ConstraintSet::FixedSigma(1.0)).is_ok());
    assert!(log_likelihood_at(&c, 0.0, 0.0).is_err());
}

/// The maximum dominates 10^3 probes per sample: a grid around the optimum
/// plus random perturbations, all inside the constraint set.
#[test]
fn optimality_against_probes() {
    let mut rng = TestRng::new(2024);
    for i in 0..200 {
        let n = rng.int(2, 10);
        let (mu, sigma) = (rng.range(-5.0, 5.0), rng.range(0.2, 4.0));
        let x = rng.sample(n, mu, sigma);
        let k = match i % 3 {
            0 => ConstraintSet::Full,
            1 => ConstraintSet::FixedSigma(rng.range(0.1, 5.0)),
            _ => ConstraintSet::FixedMu(rng.range(-5.0, 5.0)),
        };
        let best = mle(&x, k).unwrap();
        assert!(k.contains(&best.state));
        let (mu0, s0) = (best.state.mu(), best.state.sigma());
        let mut probes = Vec::with_capacity(1000);
        for a in -10..10 {
            for b in -12..13 {
                probes.push((mu0 + 0.05 * a as f64 * s0, s0 * (0.04 * b as f64).exp()));
            }
        }
        while probes.len() < 1000 {
            probes.push((mu0 + rng.normal() * s0, s0 * (0.5 * rng.normal()).exp()));
        }
        for (mu, s) in probes {
            let (mu, s) = match k {
                ConstraintSet::Full => (mu, s),
                ConstraintSet::FixedSigma(v) => (mu, v),
                ConstraintSet::FixedMu(v) => (v, s),
            };
            let probe = NormalState::new(mu, s).unwrap();
            let l = log_likelihood(&x, &probe);
            assert!(l <= best.log_likelihood + 1e-9, "sample {i}: probe ({mu}, {s}) beats the maximum");
        }
    }
}

#[test]
fn stationarity_at_full_maximum() {
    let mut rng = TestRng::new(99);
    for _ in 0..200 {
        let n = rng.int(2, 10);
        let (mu, sigma) = (rng.range(-3.0, 3.0), rng.range(0.3, 3.0));
        let x = rng.sample(n, mu, sigma);
        let best = mle(&x, ConstraintSet::Full).unwrap();
        let (gm, gs) = loglik_grad(x.values(), best.state.mu(), best.state.sigma(), 1e-6);
        assert!(gm.hypot(gs) <= 1e-4, "gradient ({gm}, {gs})");
    }
}

proptest! {
    #[test]
    fn constraint_respected(v in prop::collection::vec(-100.0f64..100.0, 2..12), s in 0.01f64..50.0, m in -100.0f64..100.0) {
        let x = Sample::new(v).unwrap();
        prop_assume!(x.sumsq() > 0.0);
        for k in [ConstraintSet::Full, ConstraintSet::FixedSigma(s), ConstraintSet::FixedMu(m)] {
            let r = mle(&x, k).unwrap();
            prop_assert!(k.contains(&r.state));
            prop_assert!((r.log_likelihood - log_likelihood(&x, &r.state)).abs() <= 1e-9 * r.log_likelihood.abs().max(1.0));
        }
    }

    #[test]
    fn full_dominates_constrained(v in prop::collection::vec(-10.0f64..10.0, 2..12), s in 0.05f64..20.0, m in -10.0f64..10.0) {
        let x = Sample::new(v).unwrap();
        prop_assume!(x.sumsq() > 1e-9);
        let full = mle(&x, ConstraintSet::Full).unwrap().log_likelihood;
        for k in [ConstraintSet::FixedSigma(s), ConstraintSet::FixedMu(m)] {
            let ll = mle(&x, k).unwrap().log_likelihood;
            prop_assert!(ll <= full + 1e-9 * full.abs().max(1.0));
        }
    }
}
