use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coolsim::device::ValveCalibration;
use coolsim::psychophys::fit::level_counts;
use coolsim::psychophys::{
    build_schedule, calibrate_observer, fit_psychometric, simulate_trial, ObserverModel,
    ResponseMap, ScheduleConfig, ScheduledTrial, TrialRecord,
};

const LEVELS: [f64; 7] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5];

fn big_session(observer: &ObserverModel, per_level: usize, seed: u64) -> Vec<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(per_level * LEVELS.len());
    for (li, &v) in LEVELS.iter().enumerate() {
        for i in 0..per_level {
            let trial = ScheduledTrial {
                index: li * per_level + i,
                comparison: v,
                standard: 2.0,
                comparison_first: i % 2 == 0,
            };
            records.push(simulate_trial(observer, &trial, &mut rng));
        }
    }
    records
}

#[test]
fn calibrated_observer_recovers_target_with_many_trials() {
    let target = 1.2818;
    let observer = calibrate_observer(target, ResponseMap::default(), 2.0).unwrap();
    let asymptotic = observer.asymptotic_jnd(2.0).unwrap();
    assert!((asymptotic - target).abs() < 1e-6 * target);

    let fit = fit_psychometric(&big_session(&observer, 100_000, 11)).unwrap();
    let miss = (fit.jnd - target).abs() / target;
    assert!(miss < 0.05, "fitted JND {} vs {target}", fit.jnd);
}

#[test]
fn proportions_rise_with_comparison_velocity() {
    let observer = calibrate_observer(1.2818, ResponseMap::default(), 2.0).unwrap();
    let counts = level_counts(&big_session(&observer, 10_000, 5));
    let p: Vec<f64> = counts.iter().map(|c| c.proportion()).collect();
    assert!(p.windows(2).all(|w| w[1] > w[0]), "{p:?}");
    // the standard against itself is a coin flip
    let mid = counts.iter().find(|c| c.v == 2.0).unwrap().proportion();
    assert!((mid - 0.5).abs() < 4.0 * (0.25f64 / 10_000.0).sqrt());
}

#[test]
fn presentation_order_does_not_bias_responses() {
    let observer = calibrate_observer(1.2818, ResponseMap::default(), 2.0).unwrap();
    let records = big_session(&observer, 20_000, 9);
    let rate = |first: bool| {
        let sel: Vec<_> = records
            .iter()
            .filter(|r| r.comparison == 2.5 && r.comparison_first == first)
            .collect();
        sel.iter().filter(|r| r.response_comparison_colder).count() as f64 / sel.len() as f64
    };
    assert!((rate(true) - rate(false)).abs() < 4.0 * (0.5f64 / 10_000.0).sqrt());
}

#[test]
fn fit_ignores_record_order() {
    let observer = ObserverModel::new(0.8, ResponseMap::default()).unwrap();
    let cal = ValveCalibration::default();
    let cfg = ScheduleConfig {
        rng_seed: 21,
        ..Default::default()
    };
    let mut records = coolsim::psychophys::simulate_session(&cfg, &observer, &cal).unwrap();
    let a = fit_psychometric(&records).unwrap();
    records.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let b = fit_psychometric(&records).unwrap();
    assert!((a.mu - b.mu).abs() < 1e-9 && (a.sigma - b.sigma).abs() < 1e-9);
}

#[test]
fn schedule_is_balanced_for_every_seed() {
    let cal = ValveCalibration::default();
    for seed in 0..50 {
        let s = build_schedule(
            &ScheduleConfig {
                rng_seed: seed,
                ..Default::default()
            },
            &cal,
        )
        .unwrap();
        for v in LEVELS {
            assert_eq!(s.trials.iter().filter(|t| t.comparison == v).count(), 10);
        }
        let indices: Vec<usize> = s.trials.iter().map(|t| t.index).collect();
        assert_eq!(indices, (0..70).collect::<Vec<_>>());
    }
}
