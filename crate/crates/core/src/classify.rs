//! The three empirical step-function classifiers, evaluated per participant:
//!
//! * median classifier — threshold at the pooled empirical median, fixed
//!   fast-is-congruent orientation, evaluated on all trials;
//! * trained classifier — threshold and orientation picked to minimize
//!   training error on a random half of the trials, scored on the other
//!   half, averaged over repeated splits;
//! * over-optimistic upper bound — best accuracy any threshold/orientation
//!   pair achieves when allowed to peek at all trials.
//!
//! Every classifier assigns the "fast" class to RTs at or below the
//! threshold, so accuracies depend only on the rank order of the RTs.

use serde::{Deserialize, Serialize};

use crate::data::{ClassifierOutcome, Condition, Orientation, ParticipantRecord, Trial};
use crate::error::{Error, Result};
use crate::math;
use crate::rng::{self, tags};

/// Threshold rule: `rt <= threshold` is the fast class (ties go fast).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepClassifier {
    pub threshold_ms: f64,
    pub orientation: Orientation,
}

impl StepClassifier {
    pub fn classify(&self, rt_ms: f64) -> Condition {
        let fast = rt_ms <= self.threshold_ms;
        match (self.orientation, fast) {
            (Orientation::FastIsCongruent, true) | (Orientation::FastIsIncongruent, false) => {
                Condition::Congruent
            }
            _ => Condition::Incongruent,
        }
    }

    pub fn count_correct<'a, I: IntoIterator<Item = &'a Trial>>(&self, trials: I) -> usize {
        trials
            .into_iter()
            .filter(|t| self.classify(t.rt_ms) == t.condition)
            .count()
    }
}

/// Train/test split protocol for the trained classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitProtocol {
    /// Fraction of each condition's trials assigned to training.
    pub train_fraction: f64,
    /// Number of random splits to average over.
    pub repetitions: u32,
    pub seed: u64,
}

impl SplitProtocol {
    pub fn new(train_fraction: f64, repetitions: u32, seed: u64) -> Result<SplitProtocol> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Domain(format!(
                "train fraction must be in (0, 1), got {train_fraction}"
            )));
        }
        if repetitions == 0 {
            return Err(Error::Domain("repetitions must be at least 1".into()));
        }
        Ok(SplitProtocol { train_fraction, repetitions, seed })
    }
}

impl Default for SplitProtocol {
    fn default() -> SplitProtocol {
        SplitProtocol { train_fraction: 0.5, repetitions: 10, seed: 0 }
    }
}

/// Mean and (n-1) SD of per-participant accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySummary {
    pub per_participant: Vec<ClassifierOutcome>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    /// False when only one participant was summarized (SD undefined,
    /// reported as 0).
    pub sd_defined: bool,
}

impl AccuracySummary {
    pub fn accuracies(&self) -> Vec<f64> {
        self.per_participant.iter().map(|o| o.accuracy).collect()
    }
}

fn require_both_conditions(record: &ParticipantRecord, min: usize) -> Result<()> {
    for condition in Condition::ALL {
        let n = record.count_for(condition);
        if n < min {
            return Err(Error::DegenerateData(format!(
                "participant {}: need at least {min} {} trial(s), found {n}",
                record.participant_id, condition
            )));
        }
    }
    Ok(())
}

/// Empirical median of the pooled RTs; midpoint convention for even counts.
fn pooled_median(record: &ParticipantRecord) -> f64 {
    let mut rts: Vec<f64> = record.trials.iter().map(|t| t.rt_ms).collect();
    rts.sort_by(f64::total_cmp);
    let n = rts.len();
    if n % 2 == 1 {
        rts[n / 2]
    } else {
        0.5 * (rts[n / 2 - 1] + rts[n / 2])
    }
}

/// Median classifier: threshold at the pooled empirical median with the
/// fast-is-congruent orientation, scored on all trials.
///
/// The orientation is fixed rather than fitted: the classifier encodes the
/// hypothesis that congruent trials are faster.
pub fn median_classifier(record: &ParticipantRecord) -> Result<ClassifierOutcome> {
    require_both_conditions(record, 1)?;
    let classifier = StepClassifier {
        threshold_ms: pooled_median(record),
        orientation: Orientation::FastIsCongruent,
    };
    let correct = classifier.count_correct(&record.trials);
    Ok(ClassifierOutcome {
        accuracy: correct as f64 / record.trials.len() as f64,
        threshold_ms: Some(classifier.threshold_ms),
        orientation: classifier.orientation,
        n_trials_evaluated: record.trials.len(),
        repetition_accuracies: None,
    })
}

/// Where candidate thresholds sit relative to the scanned data.
///
/// `Midpoints` is for classifiers that are selected and evaluated on the
/// same trials (upper bound): between two adjacent distinct values the
/// labeling is constant, so the midpoint is a faithful representative.
/// `AtValues` anchors thresholds at observed RTs (plus negative infinity for
/// the empty fast set). A trained threshold must be anchored this way:
/// `x <= t` with t an observed value is preserved by any strictly increasing
/// transform, so held-out trials that interleave with the training values
/// are still cut at the same rank.
#[derive(Clone, Copy, PartialEq)]
enum ThresholdAnchor {
    Midpoints,
    AtValues,
}

/// Scans every achievable labeling of `trials` across both orientations and
/// returns the best correct-count. Ties keep the lowest threshold, with the
/// congruent-fast orientation scanned first.
fn best_step(trials: &[Trial], anchor: ThresholdAnchor) -> (usize, StepClassifier) {
    debug_assert!(!trials.is_empty());
    let mut sorted: Vec<(f64, Condition)> =
        trials.iter().map(|t| (t.rt_ms, t.condition)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let n_cong = sorted.iter().filter(|(_, c)| *c == Condition::Congruent).count();
    let n_incong = n - n_cong;

    let below_everything = match anchor {
        ThresholdAnchor::Midpoints => sorted[0].0 - 1.0,
        ThresholdAnchor::AtValues => f64::NEG_INFINITY,
    };
    let mut best_correct = 0usize;
    let mut best = StepClassifier {
        threshold_ms: below_everything,
        orientation: Orientation::FastIsCongruent,
    };
    let mut consider = |correct: usize, threshold_ms: f64, orientation: Orientation| {
        if correct > best_correct {
            best_correct = correct;
            best = StepClassifier { threshold_ms, orientation };
        }
    };

    // empty fast set
    consider(n_incong, below_everything, Orientation::FastIsCongruent);
    consider(n_cong, below_everything, Orientation::FastIsIncongruent);

    let mut cong_prefix = 0usize;
    let mut incong_prefix = 0usize;
    for i in 0..n {
        match sorted[i].1 {
            Condition::Congruent => cong_prefix += 1,
            Condition::Incongruent => incong_prefix += 1,
        }
        // boundary only between distinct values (and after the maximum)
        let boundary = i + 1 == n || sorted[i + 1].0 > sorted[i].0;
        if !boundary {
            continue;
        }
        let threshold = match anchor {
            ThresholdAnchor::AtValues => sorted[i].0,
            ThresholdAnchor::Midpoints if i + 1 == n => sorted[i].0 + 1.0,
            ThresholdAnchor::Midpoints => 0.5 * (sorted[i].0 + sorted[i + 1].0),
        };
        consider(
            cong_prefix + (n_incong - incong_prefix),
            threshold,
            Orientation::FastIsCongruent,
        );
        consider(
            incong_prefix + (n_cong - cong_prefix),
            threshold,
            Orientation::FastIsIncongruent,
        );
    }
    (best_correct, best)
}

/// Trained step classifier: for each repetition, stratified-split each
/// condition's trials into training and test halves, pick the
/// training-error-minimizing threshold/orientation, and score it on the
/// test half. Reports the mean test accuracy over repetitions.
///
/// Deterministic given the protocol seed: each repetition draws its split
/// from a stream derived from (seed, participant id, repetition index),
/// so per-participant results do not depend on evaluation order.
pub fn train_step_classifier(
    record: &ParticipantRecord,
    protocol: &SplitProtocol,
) -> Result<ClassifierOutcome> {
    require_both_conditions(record, 2)?;
    if !(protocol.train_fraction > 0.0 && protocol.train_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "train fraction must be in (0, 1), got {}",
            protocol.train_fraction
        )));
    }
    if protocol.repetitions == 0 {
        return Err(Error::Domain("repetitions must be at least 1".into()));
    }

    let id_hash = rng::hash_id(&record.participant_id);
    let mut rep_accuracies = Vec::with_capacity(protocol.repetitions as usize);
    let mut last = StepClassifier {
        threshold_ms: 0.0,
        orientation: Orientation::FastIsCongruent,
    };
    let mut test_len = 0usize;
    for rep in 0..protocol.repetitions {
        let mut stream =
            rng::substream(protocol.seed, &[tags::SPLIT, id_hash, u64::from(rep)]);
        let mut train: Vec<Trial> = Vec::new();
        let mut test: Vec<Trial> = Vec::new();
        for condition in Condition::ALL {
            let mut idxs: Vec<usize> = record
                .trials
                .iter()
                .enumerate()
                .filter(|(_, t)| t.condition == condition)
                .map(|(i, _)| i)
                .collect();
            use rand::seq::SliceRandom;
            idxs.shuffle(&mut stream);
            // odd counts put the extra trial in training; both halves stay nonempty
            let raw = (idxs.len() as f64 * protocol.train_fraction).ceil() as usize;
            let k = raw.clamp(1, idxs.len() - 1);
            for &i in &idxs[..k] {
                train.push(record.trials[i]);
            }
            for &i in &idxs[k..] {
                test.push(record.trials[i]);
            }
        }
        let (_, classifier) = best_step(&train, ThresholdAnchor::AtValues);
        let correct = classifier.count_correct(&test);
        rep_accuracies.push(correct as f64 / test.len() as f64);
        last = classifier;
        test_len = test.len();
    }
    let accuracy = rep_accuracies.iter().sum::<f64>() / rep_accuracies.len() as f64;
    Ok(ClassifierOutcome {
        accuracy,
        threshold_ms: Some(last.threshold_ms),
        orientation: last.orientation,
        n_trials_evaluated: test_len,
        repetition_accuracies: Some(rep_accuracies),
    })
}

/// Over-optimistic upper bound: the best accuracy over every candidate
/// threshold and both orientations, selected and evaluated on all trials.
pub fn upper_bound(record: &ParticipantRecord) -> Result<ClassifierOutcome> {
    require_both_conditions(record, 1)?;
    let (correct, classifier) = best_step(&record.trials, ThresholdAnchor::Midpoints);
    Ok(ClassifierOutcome {
        accuracy: correct as f64 / record.trials.len() as f64,
        threshold_ms: Some(classifier.threshold_ms),
        orientation: classifier.orientation,
        n_trials_evaluated: record.trials.len(),
        repetition_accuracies: None,
    })
}

/// Mean and (n-1) SD over per-participant accuracies.
pub fn aggregate(outcomes: &[ClassifierOutcome]) -> Result<AccuracySummary> {
    if outcomes.is_empty() {
        return Err(Error::EmptyInput("no classifier outcomes to aggregate".into()));
    }
    let accuracies: Vec<f64> = outcomes.iter().map(|o| o.accuracy).collect();
    Ok(AccuracySummary {
        per_participant: outcomes.to_vec(),
        mean_accuracy: math::mean(&accuracies),
        sd_accuracy: math::sample_sd(&accuracies),
        sd_defined: outcomes.len() > 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn record(cong: &[f64], incong: &[f64]) -> ParticipantRecord {
        let mut trials = Vec::new();
        for &rt in cong {
            trials.push(Trial { rt_ms: rt, condition: Condition::Congruent });
        }
        for &rt in incong {
            trials.push(Trial { rt_ms: rt, condition: Condition::Incongruent });
        }
        ParticipantRecord::new("p1", trials)
    }

    #[test]
    fn median_classifier_hand_enumerated() {
        let r = record(&[400.0, 420.0, 450.0], &[430.0, 460.0, 470.0]);
        let o = median_classifier(&r).unwrap();
        assert_eq!(o.threshold_ms, Some(440.0));
        assert_eq!(o.orientation, Orientation::FastIsCongruent);
        assert_relative_eq!(o.accuracy, 4.0 / 6.0, max_relative = 1e-15);
        assert_eq!(o.n_trials_evaluated, 6);
    }

    #[test]
    fn median_classifier_perfect_separation() {
        let r = record(&[300.0, 310.0, 320.0], &[500.0, 510.0, 520.0]);
        assert_eq!(median_classifier(&r).unwrap().accuracy, 1.0);
    }

    #[test]
    fn median_classifier_needs_both_conditions() {
        let r = record(&[300.0, 310.0], &[]);
        assert!(matches!(median_classifier(&r), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn upper_bound_hand_enumerated() {
        let r = record(&[400.0, 420.0, 450.0], &[430.0, 460.0, 470.0]);
        let o = upper_bound(&r).unwrap();
        assert_relative_eq!(o.accuracy, 5.0 / 6.0, max_relative = 1e-15);
    }

    #[test]
    fn upper_bound_all_ties_equal_counts() {
        let r = record(&[500.0, 500.0], &[500.0, 500.0]);
        assert_relative_eq!(upper_bound(&r).unwrap().accuracy, 0.5);
    }

    #[test]
    fn upper_bound_dominates_median() {
        let r = record(&[412.0, 398.0, 455.0, 401.0], &[419.0, 444.0, 397.0]);
        let ub = upper_bound(&r).unwrap().accuracy;
        let med = median_classifier(&r).unwrap().accuracy;
        assert!(ub >= med);
        assert!(ub >= 0.5);
    }

    #[test]
    fn trained_classifier_is_seed_reproducible() {
        let r = record(
            &[400.0, 415.0, 390.0, 405.0, 420.0, 410.0],
            &[430.0, 445.0, 425.0, 460.0, 450.0, 455.0],
        );
        let protocol = SplitProtocol { train_fraction: 0.5, repetitions: 10, seed: 42 };
        let a = train_step_classifier(&r, &protocol).unwrap();
        let b = train_step_classifier(&r, &protocol).unwrap();
        assert_eq!(a, b);
        let c = train_step_classifier(&r, &SplitProtocol { seed: 43, ..protocol }).unwrap();
        // different stream, almost surely a different rep sequence
        assert_eq!(c.repetition_accuracies.as_ref().unwrap().len(), 10);
    }

    #[test]
    fn trained_classifier_separable_data() {
        // classes separated in every possible split: the congruent RTs are
        // tied, so the learned threshold (largest fast training value)
        // separates the held-out half too
        let r = record(
            &[300.0, 300.0, 300.0, 300.0, 300.0, 300.0],
            &[500.0, 505.0, 510.0, 515.0, 520.0, 525.0],
        );
        let protocol = SplitProtocol { train_fraction: 0.5, repetitions: 5, seed: 7 };
        assert_eq!(train_step_classifier(&r, &protocol).unwrap().accuracy, 1.0);
    }

    #[test]
    fn trained_classifier_requires_two_per_condition() {
        let r = record(&[400.0], &[430.0, 440.0]);
        let protocol = SplitProtocol::default();
        assert!(matches!(
            train_step_classifier(&r, &protocol),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn aggregate_examples() {
        let outcome = |accuracy: f64| ClassifierOutcome {
            accuracy,
            threshold_ms: None,
            orientation: Orientation::FastIsCongruent,
            n_trials_evaluated: 10,
            repetition_accuracies: None,
        };
        let s = aggregate(&[outcome(0.5), outcome(0.5), outcome(0.5)]).unwrap();
        assert_eq!(s.mean_accuracy, 0.5);
        assert_eq!(s.sd_accuracy, 0.0);
        assert!(s.sd_defined);

        let s = aggregate(&[outcome(0.4), outcome(0.6)]).unwrap();
        assert_relative_eq!(s.mean_accuracy, 0.5);
        assert_relative_eq!(s.sd_accuracy, 0.02_f64.sqrt(), max_relative = 1e-12);

        let s = aggregate(&[outcome(0.73)]).unwrap();
        assert_eq!(s.mean_accuracy, 0.73);
        assert_eq!(s.sd_accuracy, 0.0);
        assert!(!s.sd_defined);

        assert!(matches!(aggregate(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn step_classifier_tie_goes_fast() {
        let c = StepClassifier { threshold_ms: 440.0, orientation: Orientation::FastIsCongruent };
        assert_eq!(c.classify(440.0), Condition::Congruent);
        assert_eq!(c.classify(440.0000001), Condition::Incongruent);
        let c = StepClassifier { threshold_ms: 440.0, orientation: Orientation::FastIsIncongruent };
        assert_eq!(c.classify(440.0), Condition::Incongruent);
    }
}
