//! Core data model: trials, participants, datasets, and per-participant
//! descriptive summaries.
//!
//! All types are plain immutable value types; operations on them are pure
//! functions, so everything here can be shared freely across threads.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial condition. Every trial carries exactly one of the two labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Congruent,
    Incongruent,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Congruent, Condition::Incongruent];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Congruent => "congruent",
            Condition::Incongruent => "incongruent",
        }
    }

    /// Case-insensitive parse of a condition label.
    pub fn parse(s: &str) -> Option<Condition> {
        match s.trim().to_ascii_lowercase().as_str() {
            "congruent" => Some(Condition::Congruent),
            "incongruent" => Some(Condition::Incongruent),
            _ => None,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One reaction-time observation with its condition label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    /// Reaction time in milliseconds; strictly positive.
    pub rt_ms: f64,
    pub condition: Condition,
}

impl Trial {
    pub fn new(rt_ms: f64, condition: Condition) -> Result<Trial> {
        if !rt_ms.is_finite() || rt_ms <= 0.0 {
            return Err(Error::Domain(format!(
                "trial RT must be a positive finite number of milliseconds, got {rt_ms}"
            )));
        }
        Ok(Trial { rt_ms, condition })
    }
}

/// All trials of one participant, in ingestion order.
///
/// Order is preserved because reproducible train/test splits are defined
/// over trial indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub participant_id: String,
    pub trials: Vec<Trial>,
}

impl ParticipantRecord {
    pub fn new(participant_id: impl Into<String>, trials: Vec<Trial>) -> ParticipantRecord {
        ParticipantRecord { participant_id: participant_id.into(), trials }
    }

    pub fn rts_for(&self, condition: Condition) -> impl Iterator<Item = f64> + '_ {
        self.trials.iter().filter(move |t| t.condition == condition).map(|t| t.rt_ms)
    }

    pub fn count_for(&self, condition: Condition) -> usize {
        self.trials.iter().filter(|t| t.condition == condition).count()
    }
}

/// A set of participant records plus free-form provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub participants: Vec<ParticipantRecord>,
    /// Source, units, ingestion notes. A `BTreeMap` keeps serialization
    /// order deterministic.
    pub metadata: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(participants: Vec<ParticipantRecord>) -> Dataset {
        Dataset { participants, metadata: BTreeMap::new() }
    }

    pub fn total_trials(&self) -> usize {
        self.participants.iter().map(|p| p.trials.len()).sum()
    }
}

/// Which side of a step classifier's threshold is called "congruent".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// RTs at or below the threshold are classified congruent.
    FastIsCongruent,
    /// RTs at or below the threshold are classified incongruent.
    FastIsIncongruent,
}

/// Accuracy of one classifier on one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierOutcome {
    /// Fraction of evaluated trials classified correctly, in [0, 1].
    pub accuracy: f64,
    /// Threshold in milliseconds; absent for aggregate summaries. Negative
    /// infinity encodes "below every observation" (the trained classifier
    /// can legitimately learn to call everything slow).
    #[serde(with = "crate::serde_util::opt_maybe_nonfinite")]
    pub threshold_ms: Option<f64>,
    pub orientation: Orientation,
    pub n_trials_evaluated: usize,
    /// Per-repetition test accuracies for split-based classifiers, kept
    /// for audit; `None` for single-pass classifiers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetition_accuracies: Option<Vec<f64>>,
}

/// Count, mean, and unbiased SD of one condition's RTs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub n: usize,
    pub mean_ms: f64,
    pub sd_ms: f64,
}

/// Per-participant descriptive summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticipantSummary {
    pub congruent: ConditionSummary,
    pub incongruent: ConditionSummary,
    /// Square root of the df-weighted average of the two per-condition
    /// variances.
    pub pooled_sd_ms: f64,
    /// mean(incongruent) - mean(congruent).
    pub mean_diff_ms: f64,
}

fn condition_summary(rts: &[f64]) -> ConditionSummary {
    let n = rts.len();
    let mean = rts.iter().sum::<f64>() / n as f64;
    let sd = if n < 2 {
        0.0
    } else {
        (rts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
    };
    ConditionSummary { n, mean_ms: mean, sd_ms: sd }
}

/// Per-condition count/mean/SD plus the pooled within-participant SD.
///
/// Requires at least 2 trials per condition so both SDs are defined.
pub fn summarize_participant(record: &ParticipantRecord) -> Result<ParticipantSummary> {
    let cong: Vec<f64> = record.rts_for(Condition::Congruent).collect();
    let incong: Vec<f64> = record.rts_for(Condition::Incongruent).collect();
    for (label, n) in [("congruent", cong.len()), ("incongruent", incong.len())] {
        if n < 2 {
            return Err(Error::DegenerateData(format!(
                "participant {}: need at least 2 {label} trials, found {n}",
                record.participant_id
            )));
        }
    }
    let c = condition_summary(&cong);
    let i = condition_summary(&incong);
    let df_c = (c.n - 1) as f64;
    let df_i = (i.n - 1) as f64;
    let pooled = ((df_c * c.sd_ms * c.sd_ms + df_i * i.sd_ms * i.sd_ms) / (df_c + df_i)).sqrt();
    Ok(ParticipantSummary {
        congruent: c,
        incongruent: i,
        pooled_sd_ms: pooled,
        mean_diff_ms: i.mean_ms - c.mean_ms,
    })
}

/// A dataset invariant violation. Violations are data, not failures:
/// [`validate_dataset`] reports them without erroring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonPositiveRt { participant_id: String, trial_index: usize, rt_ms: f64 },
    NonFiniteRt { participant_id: String, trial_index: usize },
    DuplicateParticipant { participant_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveRt { participant_id, trial_index, rt_ms } => write!(
                f,
                "participant {participant_id}, trial {trial_index}: non-positive RT {rt_ms} ms"
            ),
            Violation::NonFiniteRt { participant_id, trial_index } => {
                write!(f, "participant {participant_id}, trial {trial_index}: non-finite RT")
            }
            Violation::DuplicateParticipant { participant_id } => {
                write!(f, "duplicate participant id {participant_id}")
            }
        }
    }
}

/// Checks every type invariant and returns the violations found.
/// Never mutates; an empty list means the dataset is well formed.
pub fn validate_dataset(ds: &Dataset) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen = BTreeSet::new();
    for record in &ds.participants {
        if !seen.insert(record.participant_id.as_str()) {
            violations.push(Violation::DuplicateParticipant {
                participant_id: record.participant_id.clone(),
            });
        }
        for (idx, trial) in record.trials.iter().enumerate() {
            if !trial.rt_ms.is_finite() {
                violations.push(Violation::NonFiniteRt {
                    participant_id: record.participant_id.clone(),
                    trial_index: idx,
                });
            } else if trial.rt_ms <= 0.0 {
                violations.push(Violation::NonPositiveRt {
                    participant_id: record.participant_id.clone(),
                    trial_index: idx,
                    rt_ms: trial.rt_ms,
                });
            }
        }
    }
    violations
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
    fn summary_matches_direct_arithmetic() {
        let s = summarize_participant(&record(&[400.0, 420.0], &[430.0, 450.0])).unwrap();
        assert_relative_eq!(s.congruent.mean_ms, 410.0);
        assert_relative_eq!(s.incongruent.mean_ms, 440.0);
        assert_relative_eq!(s.congruent.sd_ms, 200.0_f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(s.incongruent.sd_ms, 200.0_f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(s.pooled_sd_ms, 200.0_f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(s.mean_diff_ms, 30.0);
    }

    #[test]
    fn summary_zero_variance() {
        let s = summarize_participant(&record(&[500.0, 500.0], &[500.0, 500.0])).unwrap();
        assert_eq!(s.congruent.sd_ms, 0.0);
        assert_eq!(s.incongruent.sd_ms, 0.0);
        assert_eq!(s.pooled_sd_ms, 0.0);
    }

    #[test]
    fn summary_requires_two_trials_per_condition() {
        let err = summarize_participant(&record(&[400.0], &[430.0, 450.0])).unwrap_err();
        assert!(matches!(err, Error::DegenerateData(_)));
    }

    #[test]
    fn pooled_sd_lies_between_condition_sds() {
        let s = summarize_participant(&record(&[400.0, 410.0, 395.0], &[430.0, 480.0])).unwrap();
        let lo = s.congruent.sd_ms.min(s.incongruent.sd_ms);
        let hi = s.congruent.sd_ms.max(s.incongruent.sd_ms);
        assert!(s.pooled_sd_ms >= lo && s.pooled_sd_ms <= hi);
    }

    #[test]
    fn validate_flags_bad_rts_and_duplicates() {
        let good = record(&[400.0, 410.0], &[420.0, 430.0]);
        let ds = Dataset::new(vec![good.clone(), {
            let mut r = good.clone();
            r.trials[0].rt_ms = -5.0;
            r
        }]);
        let violations = validate_dataset(&ds);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::DuplicateParticipant { .. })));
        assert!(violations.iter().any(
            |v| matches!(v, Violation::NonPositiveRt { rt_ms, .. } if *rt_ms == -5.0)
        ));
    }

    #[test]
    fn validate_accepts_well_formed_dataset() {
        let mut r2 = record(&[300.0, 310.0], &[320.0, 330.0]);
        r2.participant_id = "p2".into();
        let ds = Dataset::new(vec![record(&[400.0, 410.0], &[420.0, 430.0]), r2]);
        assert!(validate_dataset(&ds).is_empty());
    }

    #[test]
    fn condition_parse_is_case_insensitive() {
        assert_eq!(Condition::parse("Congruent"), Some(Condition::Congruent));
        assert_eq!(Condition::parse(" INCONGRUENT "), Some(Condition::Incongruent));
        assert_eq!(Condition::parse("other"), None);
    }
}
