//! Property tests for the empirical classifiers: exhaustive-search
//! equivalence, dominance relations, and rank-order invariance.

use proptest::prelude::*;

use rtaudit_core::{
    median_classifier, summarize_participant, train_step_classifier, upper_bound, Condition,
    Orientation, ParticipantRecord, SplitProtocol, StepClassifier, Trial,
};

/// Records with 1..=6 trials per condition drawn from a coarse value grid so
/// ties across and within conditions happen often.
fn small_records() -> impl Strategy<Value = ParticipantRecord> {
    let rts = prop::collection::vec(0u8..20, 1..=6);
    (rts.clone(), rts).prop_map(|(cong, incong)| {
        let mut trials = Vec::new();
        for v in cong {
            trials.push(Trial { rt_ms: 300.0 + 10.0 * f64::from(v), condition: Condition::Congruent });
        }
        for v in incong {
            trials.push(Trial {
                rt_ms: 300.0 + 10.0 * f64::from(v),
                condition: Condition::Incongruent,
            });
        }
        ParticipantRecord::new("p", trials)
    })
}

/// Larger records with continuous RTs.
fn continuous_records() -> impl Strategy<Value = ParticipantRecord> {
    let rts = prop::collection::vec(200.0..900.0f64, 2..=40);
    (rts.clone(), rts).prop_map(|(cong, incong)| {
        let mut trials = Vec::new();
        for rt in cong {
            trials.push(Trial { rt_ms: rt, condition: Condition::Congruent });
        }
        for rt in incong {
            trials.push(Trial { rt_ms: rt, condition: Condition::Incongruent });
        }
        ParticipantRecord::new("p", trials)
    })
}

/// Exhaustive reference: try a threshold at every observed RT plus one below
/// the minimum, under both orientations, scoring on all trials.
fn brute_force_best_correct(record: &ParticipantRecord) -> usize {
    let mut thresholds: Vec<f64> = record.trials.iter().map(|t| t.rt_ms).collect();
    thresholds.push(f64::NEG_INFINITY);
    let mut best = 0;
    for &threshold_ms in &thresholds {
        for orientation in [Orientation::FastIsCongruent, Orientation::FastIsIncongruent] {
            let classifier = StepClassifier { threshold_ms, orientation };
            best = best.max(classifier.count_correct(&record.trials));
        }
    }
    best
}

/// A random strictly increasing map, applied through the record's sorted
/// distinct RT values so that ties and order are preserved exactly.
fn apply_random_monotone_map(record: &ParticipantRecord, increments: &[f64]) -> ParticipantRecord {
    let mut distinct: Vec<f64> = record.trials.iter().map(|t| t.rt_ms).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut mapped_values = Vec::with_capacity(distinct.len());
    let mut level = 50.0;
    for i in 0..distinct.len() {
        // increments are bounded away from zero, so the map is strictly increasing
        level += increments[i % increments.len()];
        mapped_values.push(level);
    }
    let lookup = |rt: f64| -> f64 {
        let idx = distinct.binary_search_by(|probe| probe.total_cmp(&rt)).unwrap();
        mapped_values[idx]
    };
    let trials = record
        .trials
        .iter()
        .map(|t| Trial { rt_ms: lookup(t.rt_ms), condition: t.condition })
        .collect();
    ParticipantRecord::new(record.participant_id.clone(), trials)
}

proptest! {
    #[test]
    fn upper_bound_equals_exhaustive_search(record in small_records()) {
        let outcome = upper_bound(&record).unwrap();
        let brute = brute_force_best_correct(&record);
        let n = record.trials.len();
        prop_assert_eq!(outcome.accuracy, brute as f64 / n as f64);
    }

    #[test]
    fn upper_bound_dominates_median_exactly(record in small_records()) {
        let ub = upper_bound(&record).unwrap().accuracy;
        let median = median_classifier(&record).unwrap().accuracy;
        prop_assert!(ub >= median);
    }

    #[test]
    fn upper_bound_at_least_majority_fraction(record in small_records()) {
        let n = record.trials.len();
        let n_cong = record.count_for(Condition::Congruent);
        let majority = n_cong.max(n - n_cong) as f64 / n as f64;
        let ub = upper_bound(&record).unwrap().accuracy;
        prop_assert!(ub >= majority - 1e-15);
        prop_assert!(ub >= 0.5 || n_cong * 2 != n);
    }

    #[test]
    fn classifiers_are_invariant_under_monotone_maps(
        record in continuous_records(),
        increments in prop::collection::vec(0.5..2.0f64, 8),
        seed in 0u64..100_000,
    ) {
        let mapped = apply_random_monotone_map(&record, &increments);
        prop_assert_eq!(
            median_classifier(&record).unwrap().accuracy,
            median_classifier(&mapped).unwrap().accuracy
        );
        prop_assert_eq!(
            upper_bound(&record).unwrap().accuracy,
            upper_bound(&mapped).unwrap().accuracy
        );
        let protocol = SplitProtocol { train_fraction: 0.5, repetitions: 4, seed };
        prop_assert_eq!(
            train_step_classifier(&record, &protocol).unwrap().accuracy,
            train_step_classifier(&mapped, &protocol).unwrap().accuracy
        );
    }

    #[test]
    fn trained_classifier_is_bit_reproducible(
        record in continuous_records(),
        seed in 0u64..100_000,
    ) {
        let protocol = SplitProtocol { train_fraction: 0.5, repetitions: 6, seed };
        let a = train_step_classifier(&record, &protocol).unwrap();
        let b = train_step_classifier(&record, &protocol).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn summaries_are_permutation_invariant(
        record in continuous_records(),
        rotation in 0usize..16,
    ) {
        let mut rotated = record.clone();
        let len = rotated.trials.len();
        rotated.trials.rotate_left(rotation % len);
        let a = summarize_participant(&record).unwrap();
        let b = summarize_participant(&rotated).unwrap();
        // same multiset of trials per condition; sums may associate differently,
        // so allow last-ulp slack
        prop_assert!((a.congruent.mean_ms - b.congruent.mean_ms).abs() < 1e-9);
        prop_assert!((a.incongruent.sd_ms - b.incongruent.sd_ms).abs() < 1e-9);
        prop_assert!((a.pooled_sd_ms - b.pooled_sd_ms).abs() < 1e-9);
    }

    #[test]
    fn pooled_sd_between_condition_sds(record in continuous_records()) {
        let s = summarize_participant(&record).unwrap();
        let lo = s.congruent.sd_ms.min(s.incongruent.sd_ms);
        let hi = s.congruent.sd_ms.max(s.incongruent.sd_ms);
        prop_assert!(s.pooled_sd_ms >= lo - 1e-12 && s.pooled_sd_ms <= hi + 1e-12);
    }
}

#[test]
fn trained_classifier_near_chance_without_signal() {
    // both conditions from the same distribution: test accuracy has no signal
    // to find, so the mean over many repetitions sits near 0.5
    let model =
        rtaudit_core::DistributionModel::new(rtaudit_core::Family::Normal, 500.0, 500.0, 100.0)
            .unwrap();
    let mut trials = Vec::new();
    for (idx, condition) in Condition::ALL.iter().enumerate() {
        let mut stream = rtaudit_core::rng::substream(90, &[idx as u64]);
        for _ in 0..400 {
            trials.push(Trial {
                rt_ms: model.sample_rt(*condition, &mut stream),
                condition: *condition,
            });
        }
    }
    let record = ParticipantRecord::new("null", trials);
    let protocol = SplitProtocol { train_fraction: 0.5, repetitions: 50, seed: 4242 };
    let outcome = train_step_classifier(&record, &protocol).unwrap();
    assert!(
        (outcome.accuracy - 0.5).abs() < 0.04,
        "null-data trained accuracy {}",
        outcome.accuracy
    );
}
