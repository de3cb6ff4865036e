use std::sync::Arc;

use pas_core::constellation::{AskConstellation, LabelingKind};
use pas_core::error::Error;
use pas_core::infotheory::rate_report;
use pas_core::ldpc::{shipped, LdpcCode};
use pas_core::numeric::{db_to_linear, linear_to_db};
use pas_core::pipeline::PasDesign;
use pas_core::shaping::optimize_input;
use pas_core::sim::{
    adapt, backoff, crossing_snr_db, design_backoff, find_pas_operating_point, gap_db, run_fer,
    Reference, SearchPolicy, StopRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_design() -> PasDesign {
    let c = AskConstellation::new(3, LabelingKind::Brgc).unwrap();
    let code = LdpcCode::parse_alist(shipped::PEG_N1008_R2_3).unwrap();
    PasDesign::new(c, Arc::new(code.systematize().unwrap()))
}

#[test]
fn runs_are_seed_deterministic() {
    let mode = toy_design().optimal_mode(12.0).unwrap();
    let stop = StopRule {
        min_errors: 10,
        max_frames: 200,
    };
    let a = run_fer(&mode, 11.8, stop, 42);
    let b = run_fer(&mode, 11.8, stop, 42);
    assert_eq!(a, b);
    assert!((a.gap_db - gap_db(a.rate, a.snr_db)).abs() < 1e-6);
    assert!((a.gap_db - (a.snr_db - linear_to_db((2.0 * a.rate).exp2() - 1.0))).abs() < 1e-6);
}

#[test]
fn very_high_snr_gives_no_errors() {
    let mode = toy_design().optimal_mode(12.0).unwrap();
    let stop = StopRule {
        min_errors: 50,
        max_frames: 200,
    };
    let p = run_fer(&mode, 60.0, stop, 1);
    assert_eq!((p.fer, p.frames), (0.0, 200));
    assert_eq!(p.fer_upper_bound, Some(3.0 / 200.0));
    assert!(p.backoff > 0.0);
}

#[test]
fn backoff_identity_for_pas_inputs() {
    let c = AskConstellation::new(3, LabelingKind::Brgc).unwrap();
    let input = optimize_input(&c, db_to_linear(11.45)).unwrap();
    let report = rate_report(&input, 0.25);
    let reduced = 1.0 - 0.25 - report.per_level_cond_entropy.iter().sum::<f64>();
    assert!((design_backoff(&input, 0.25) - reduced).abs() < 1e-9);
    let crossing = crossing_snr_db(&c, 0.0).unwrap();
    let at = optimize_input(&c, db_to_linear(crossing)).unwrap();
    assert!(design_backoff(&at, 0.0).abs() < 1e-4);
    assert!(backoff(&input, 0.25, 1.8543) > 0.0);
}

#[test]
fn adaptation_residuals_and_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (m, gamma, rate, snr) in [(3, 0.25, 1.8543, 11.45), (2, 1.0 / 3.0, 1.1313, 6.6999)] {
        let c = AskConstellation::new(m, LabelingKind::Brgc).unwrap();
        let reference = Reference::optimal(&c, gamma, rate, snr).unwrap();
        let target = reference.backoff(&c).unwrap();
        let mut rates: Vec<f64> = (0..10)
            .map(|_| rng.random_range(gamma + 0.3..(m - 1) as f64 + gamma - 0.05))
            .collect();
        rates.sort_by(f64::total_cmp);
        let mut last = f64::NEG_INFINITY;
        for r in rates {
            let a = adapt(&c, &reference, r).unwrap();
            assert!((a.backoff - target).abs() < 1e-5);
            assert!(a.snr_db > last);
            last = a.snr_db;
        }
        assert!(adapt(&c, &reference, (m - 1) as f64 + gamma + 0.1).is_err());
    }
}

#[test]
fn operating_point_search_outcomes() {
    let design = toy_design();
    let quick = SearchPolicy {
        stop: StopRule {
            min_errors: 5,
            max_frames: 100,
        },
        ..SearchPolicy::default()
    };
    let start = std::time::Instant::now();
    let coarse = find_pas_operating_point(&design, 0.49, quick, 1).unwrap();
    assert!(coarse.fer <= 0.49);
    assert!(start.elapsed().as_secs() < 120);

    let impossible = SearchPolicy {
        max_steps: 3,
        stop: StopRule {
            min_errors: 50,
            max_frames: 1000,
        },
        ..SearchPolicy::default()
    };
    match find_pas_operating_point(&design, 1e-9, impossible, 1) {
        Err(Error::SearchFailure { trace }) => assert_eq!(trace.len(), 3),
        other => panic!("expected search failure, got {other:?}"),
    }
}

#[test]
fn operating_point_at_one_percent() {
    let policy = SearchPolicy {
        stop: StopRule {
            min_errors: 20,
            max_frames: 2000,
        },
        ..SearchPolicy::default()
    };
    let point = find_pas_operating_point(&toy_design(), 1e-2, policy, 7).unwrap();
    assert!(point.fer <= 1e-2);
    assert!(point.frames >= 300);
    assert!(point.backoff > 0.0);
}
