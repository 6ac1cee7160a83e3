//! Conventional inferential statistics computed alongside the classifiers:
//! paired t-test on condition means, SEM prediction, per-participant and
//! across-participant effect sizes, and accuracy-vs-chance testing.

use serde::{Deserialize, Serialize};

use crate::classify::AccuracySummary;
use crate::data::{summarize_participant, Dataset};
use crate::error::{Error, Result};
use crate::math;

/// Result of a one-sample or paired t-test.
///
/// `mean_diff` and `sem_diff` are in milliseconds when the test is on RT
/// differences and in accuracy units for accuracy-vs-chance tests. When the
/// differences have zero spread the t statistic is not a number;
/// `degenerate_sd` flags that case (t is reported as signed infinity, or 0
/// when the mean difference is also 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    /// t statistic; serialized as a tagged string for the non-finite
    /// degenerate cases so reports survive a JSON round trip.
    #[serde(with = "crate::serde_util::maybe_nonfinite")]
    pub t: f64,
    pub df: u64,
    /// Two-sided p-value.
    pub p: f64,
    pub mean_diff: f64,
    pub sem_diff: f64,
    pub degenerate_sd: bool,
}

/// One-sample two-sided t-test of `values` against `null_mean`.
pub fn one_sample_t(values: &[f64], null_mean: f64) -> Result<PairedTestResult> {
    if values.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "t-test needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = math::mean(values);
    let sd = math::sample_sd(values);
    let df = values.len() as u64 - 1;
    let mean_diff = mean - null_mean;
    if sd == 0.0 {
        let t = if mean_diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(mean_diff)
        };
        return Ok(PairedTestResult {
            t,
            df,
            p: if mean_diff == 0.0 { 1.0 } else { 0.0 },
            mean_diff,
            sem_diff: 0.0,
            degenerate_sd: true,
        });
    }
    let sem = sd / n.sqrt();
    let t = mean_diff / sem;
    Ok(PairedTestResult {
        t,
        df,
        p: math::t_two_sided_p(t, df as f64),
        mean_diff,
        sem_diff: sem,
        degenerate_sd: false,
    })
}

/// Per-participant condition-mean differences (incongruent minus congruent).
/// Requires at least one trial per condition per participant.
pub fn mean_differences(ds: &Dataset) -> Result<Vec<f64>> {
    ds.participants
        .iter()
        .map(|record| {
            let mut sums = [0.0f64; 2];
            let mut counts = [0usize; 2];
            for trial in &record.trials {
                let k = trial.condition as usize;
                sums[k] += trial.rt_ms;
                counts[k] += 1;
            }
            if counts[0] == 0 || counts[1] == 0 {
                return Err(Error::DegenerateData(format!(
                    "participant {}: both condition means must be defined",
                    record.participant_id
                )));
            }
            Ok(sums[1] / counts[1] as f64 - sums[0] / counts[0] as f64)
        })
        .collect()
}

/// Paired t-test across participants on the per-participant difference of
/// condition means.
pub fn paired_t_test(ds: &Dataset) -> Result<PairedTestResult> {
    let diffs = mean_differences(ds)?;
    one_sample_t(&diffs, 0.0)
}

/// Predicted SEM of the grand mean difference from the within-subject trial
/// SD: `within_sd * sqrt(2) / sqrt(trials_per_condition * participants)`.
///
/// The sqrt(2) is the variance of a difference of two independent
/// equal-variance means; the denominator is the total number of
/// measurements pooled by the test.
pub fn predict_sem(within_sd_ms: f64, trials_per_condition: f64, participants: f64) -> Result<f64> {
    for (label, v) in [
        ("within-subject sd", within_sd_ms),
        ("trials per condition", trials_per_condition),
        ("participants", participants),
    ] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!("{label} must be positive, got {v}")));
        }
    }
    Ok(within_sd_ms * std::f64::consts::SQRT_2 / (trials_per_condition * participants).sqrt())
}

/// Effect sizes at both levels of the design.
///
/// `per_participant_d` are trial-level standardized differences
/// (mean difference over pooled within-participant SD) — the quantity that
/// bounds single-trial classifiability. `d_across` standardizes the
/// participant-level differences (mean of d_i over SD of d_i) — the quantity
/// a significance test on the group effect is sensitive to. The two live on
/// entirely different scales, which is the point of reporting both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSizeLedger {
    pub per_participant_d: Vec<f64>,
    /// mean(d_i) / SD(d_i); undefined (flagged) when the d_i are constant.
    pub d_across: f64,
    pub d_across_defined: bool,
    /// Per-trial signal-to-noise as the mean of the per-participant d_i.
    pub snr_mean_d: f64,
    /// Per-trial signal-to-noise as mean difference over mean within-SD.
    pub snr_ratio: f64,
    pub mean_diff_ms: f64,
    pub mean_within_sd_ms: f64,
}

/// Computes the effect-size ledger. Errors if any participant has a zero
/// pooled within-participant SD (trial-level d undefined).
pub fn effect_sizes(ds: &Dataset) -> Result<EffectSizeLedger> {
    if ds.participants.is_empty() {
        return Err(Error::EmptyInput("effect sizes need at least one participant".into()));
    }
    let mut per_participant_d = Vec::with_capacity(ds.participants.len());
    let mut diffs = Vec::with_capacity(ds.participants.len());
    let mut within_sds = Vec::with_capacity(ds.participants.len());
    for record in &ds.participants {
        let summary = summarize_participant(record)?;
        if summary.pooled_sd_ms <= 0.0 {
            return Err(Error::DegenerateData(format!(
                "participant {}: pooled within-participant SD is zero",
                record.participant_id
            )));
        }
        per_participant_d.push(summary.mean_diff_ms / summary.pooled_sd_ms);
        diffs.push(summary.mean_diff_ms);
        within_sds.push(summary.pooled_sd_ms);
    }
    let mean_d = math::mean(&per_participant_d);
    let sd_d = math::sample_sd(&per_participant_d);
    let (d_across, d_across_defined) = if sd_d > 0.0 {
        (mean_d / sd_d, true)
    } else {
        (0.0, false)
    };
    let mean_diff_ms = math::mean(&diffs);
    let mean_within_sd_ms = math::mean(&within_sds);
    Ok(EffectSizeLedger {
        per_participant_d,
        d_across,
        d_across_defined,
        snr_mean_d: mean_d,
        snr_ratio: mean_diff_ms / mean_within_sd_ms,
        mean_diff_ms,
        mean_within_sd_ms,
    })
}

/// One-sample t-test of per-participant accuracies against chance (0.5).
pub fn accuracy_vs_chance_test(summary: &AccuracySummary) -> Result<PairedTestResult> {
    one_sample_t(&summary.accuracies(), 0.5)
}
