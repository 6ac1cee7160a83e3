//! Dataset-level audit report: classifier accuracy summaries side by side
//! with the significance tests and effect sizes, emitted as JSON, CSV, or a
//! plain-text table.
//!
//! Every number in a report is recomputable from the dataset plus the
//! configuration echo, and emission is deterministic: the same report always
//! serializes to the same bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classify::{self, AccuracySummary, SplitProtocol};
use crate::data::{summarize_participant, Dataset};
use crate::error::{Error, Result};
use crate::ingest::{dataset_to_csv, FORMAT_VERSION};
use crate::stats::{self, EffectSizeLedger, PairedTestResult};

/// Configuration echo carried inside a report so it can be reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub seed: u64,
    pub train_fraction: f64,
    pub repetitions: u32,
    pub rt_min_ms: Option<f64>,
    pub rt_max_ms: Option<f64>,
    pub column_map: Option<String>,
}

impl Default for AuditConfig {
    fn default() -> AuditConfig {
        AuditConfig {
            seed: 1,
            train_fraction: 0.5,
            repetitions: 10,
            rt_min_ms: None,
            rt_max_ms: None,
            column_map: None,
        }
    }
}

/// The full audit of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub format_version: u32,
    pub toolkit_version: String,
    /// SHA-256 of the canonical trials CSV.
    pub dataset_fingerprint: String,
    pub n_participants: usize,
    pub total_trials: usize,
    pub mean_trials_per_condition: f64,

    pub median_summary: AccuracySummary,
    pub trained_summary: AccuracySummary,
    pub upper_bound_summary: AccuracySummary,
    pub median_vs_chance: Option<PairedTestResult>,
    pub trained_vs_chance: Option<PairedTestResult>,
    pub upper_bound_vs_chance: Option<PairedTestResult>,

    /// Paired t-test on per-participant differences of condition means.
    pub t_test_mean_diffs: Option<PairedTestResult>,
    /// One-sample t-test on the per-participant trial-level effect sizes;
    /// reported alongside the raw-difference test since published analyses
    /// vary in which of the two they ran.
    pub t_test_effect_sizes: Option<PairedTestResult>,
    pub effect_sizes: Option<EffectSizeLedger>,

    /// Mean over participants of the pooled within-participant SD.
    pub mean_within_sd_ms: f64,
    /// Grand pooled within-SD: sqrt of the df-weighted average of all
    /// per-participant pooled variances. Reported separately from the mean
    /// of per-participant SDs because the two differ in general.
    pub grand_within_sd_ms: f64,
    /// predicted SEM of the grand mean difference from the within-subject
    /// SD and the design size.
    pub predicted_sem_ms: Option<f64>,

    pub config: AuditConfig,
}

/// SHA-256 fingerprint of the canonical trials serialization.
pub fn dataset_fingerprint(ds: &Dataset) -> String {
    let mut hasher = Sha256::new();
    hasher.update(dataset_to_csv(ds).as_bytes());
    let digest = hasher.finalize();
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Runs the full per-participant pipeline plus the dataset-level statistics.
pub fn build_report(ds: &Dataset, config: &AuditConfig) -> Result<AuditReport> {
    if ds.participants.is_empty() {
        return Err(Error::EmptyInput("dataset has no participants".into()));
    }
    let protocol = SplitProtocol::new(config.train_fraction, config.repetitions, config.seed)?;

    let mut median = Vec::with_capacity(ds.participants.len());
    let mut trained = Vec::with_capacity(ds.participants.len());
    let mut upper = Vec::with_capacity(ds.participants.len());
    for record in &ds.participants {
        median.push(classify::median_classifier(record)?);
        trained.push(classify::train_step_classifier(record, &protocol)?);
        upper.push(classify::upper_bound(record)?);
    }
    let median_summary = classify::aggregate(&median)?;
    let trained_summary = classify::aggregate(&trained)?;
    let upper_bound_summary = classify::aggregate(&upper)?;

    let chance = |s: &AccuracySummary| stats::accuracy_vs_chance_test(s).ok();
    let median_vs_chance = chance(&median_summary);
    let trained_vs_chance = chance(&trained_summary);
    let upper_bound_vs_chance = chance(&upper_bound_summary);

    let t_test_mean_diffs = stats::paired_t_test(ds).ok();
    let effect_sizes = stats::effect_sizes(ds).ok();
    let t_test_effect_sizes = effect_sizes
        .as_ref()
        .and_then(|ledger| stats::one_sample_t(&ledger.per_participant_d, 0.0).ok());

    // both within-SD readings: mean of per-participant pooled SDs, and the
    // grand df-weighted pool
    let mut sds = Vec::with_capacity(ds.participants.len());
    let mut weighted_var = 0.0;
    let mut total_df = 0.0;
    let mut trials_per_condition = Vec::with_capacity(ds.participants.len());
    for record in &ds.participants {
        let summary = summarize_participant(record)?;
        sds.push(summary.pooled_sd_ms);
        let df = (summary.congruent.n - 1 + summary.incongruent.n - 1) as f64;
        weighted_var += df * summary.pooled_sd_ms * summary.pooled_sd_ms;
        total_df += df;
        trials_per_condition
            .push(0.5 * (summary.congruent.n as f64 + summary.incongruent.n as f64));
    }
    let mean_within_sd_ms = crate::math::mean(&sds);
    let grand_within_sd_ms = (weighted_var / total_df).sqrt();
    let mean_trials_per_condition = crate::math::mean(&trials_per_condition);
    let predicted_sem_ms = stats::predict_sem(
        mean_within_sd_ms,
        mean_trials_per_condition,
        ds.participants.len() as f64,
    )
    .ok();

    Ok(AuditReport {
        format_version: FORMAT_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        dataset_fingerprint: dataset_fingerprint(ds),
        n_participants: ds.participants.len(),
        total_trials: ds.total_trials(),
        mean_trials_per_condition,
        median_summary,
        trained_summary,
        upper_bound_summary,
        median_vs_chance,
        trained_vs_chance,
        upper_bound_vs_chance,
        t_test_mean_diffs,
        t_test_effect_sizes,
        effect_sizes,
        mean_within_sd_ms,
        grand_within_sd_ms,
        predicted_sem_ms,
        config: config.clone(),
    })
}

/// Output format for report emission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<ReportFormat> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Some(ReportFormat::Json),
            "csv" => Some(ReportFormat::Csv),
            "text" | "txt" => Some(ReportFormat::Text),
            _ => None,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Text => "txt",
        }
    }
}

/// Serializes a report; deterministic byte output for every format.
pub fn emit_report(report: &AuditReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Text => emit_text(report),
    }
}

fn fmt_opt_test(out: &mut String, key: &str, test: &Option<PairedTestResult>) {
    if let Some(t) = test {
        let _ = writeln!(out, "{key}_t,{}", t.t);
        let _ = writeln!(out, "{key}_df,{}", t.df);
        let _ = writeln!(out, "{key}_p,{}", t.p);
        let _ = writeln!(out, "{key}_mean_diff,{}", t.mean_diff);
        let _ = writeln!(out, "{key}_sem_diff,{}", t.sem_diff);
        let _ = writeln!(out, "{key}_degenerate_sd,{}", t.degenerate_sd);
    }
}

fn emit_csv(report: &AuditReport) -> String {
    let mut out = String::new();
    out.push_str("metric,value\n");
    let _ = writeln!(out, "format_version,{}", report.format_version);
    let _ = writeln!(out, "toolkit_version,{}", report.toolkit_version);
    let _ = writeln!(out, "dataset_fingerprint,{}", report.dataset_fingerprint);
    let _ = writeln!(out, "n_participants,{}", report.n_participants);
    let _ = writeln!(out, "total_trials,{}", report.total_trials);
    let _ = writeln!(out, "mean_trials_per_condition,{}", report.mean_trials_per_condition);
    for (name, summary) in [
        ("median", &report.median_summary),
        ("trained", &report.trained_summary),
        ("upper_bound", &report.upper_bound_summary),
    ] {
        let _ = writeln!(out, "{name}_mean_accuracy,{}", summary.mean_accuracy);
        let _ = writeln!(out, "{name}_sd_accuracy,{}", summary.sd_accuracy);
    }
    fmt_opt_test(&mut out, "t_mean_diffs", &report.t_test_mean_diffs);
    fmt_opt_test(&mut out, "t_effect_sizes", &report.t_test_effect_sizes);
    fmt_opt_test(&mut out, "median_vs_chance", &report.median_vs_chance);
    fmt_opt_test(&mut out, "trained_vs_chance", &report.trained_vs_chance);
    fmt_opt_test(&mut out, "upper_bound_vs_chance", &report.upper_bound_vs_chance);
    if let Some(ledger) = &report.effect_sizes {
        let _ = writeln!(out, "d_across,{}", ledger.d_across);
        let _ = writeln!(out, "d_across_defined,{}", ledger.d_across_defined);
        let _ = writeln!(out, "snr_mean_d,{}", ledger.snr_mean_d);
        let _ = writeln!(out, "snr_ratio,{}", ledger.snr_ratio);
        let _ = writeln!(out, "mean_diff_ms,{}", ledger.mean_diff_ms);
    }
    let _ = writeln!(out, "mean_within_sd_ms,{}", report.mean_within_sd_ms);
    let _ = writeln!(out, "grand_within_sd_ms,{}", report.grand_within_sd_ms);
    if let Some(sem) = report.predicted_sem_ms {
        let _ = writeln!(out, "predicted_sem_ms,{sem}");
    }
    let _ = writeln!(out, "seed,{}", report.config.seed);
    let _ = writeln!(out, "train_fraction,{}", report.config.train_fraction);
    let _ = writeln!(out, "repetitions,{}", report.config.repetitions);
    out
}

fn fmt_pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn fmt_test_line(test: &Option<PairedTestResult>) -> String {
    match test {
        None => "n/a".to_string(),
        Some(t) if t.degenerate_sd => format!(
            "t({}) undefined (zero variance), mean diff {:.4}",
            t.df, t.mean_diff
        ),
        Some(t) => format!(
            "t({}) = {:.3}, p = {:.4}, mean diff {:.4}, SEM {:.4}",
            t.df, t.t, t.p, t.mean_diff, t.sem_diff
        ),
    }
}

fn emit_text(report: &AuditReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "RT congruency audit (format v{})", report.format_version);
    let _ = writeln!(
        out,
        "dataset: {} participants, {} trials ({:.1} per condition on average)",
        report.n_participants, report.total_trials, report.mean_trials_per_condition
    );
    let _ = writeln!(out, "fingerprint: {}", report.dataset_fingerprint);
    out.push('\n');
    let _ = writeln!(out, "Single-trial classification accuracy");
    let _ = writeln!(
        out,
        "  {:<42} {:>14} {:>14}",
        "Method", "mean(accuracy)", "std(accuracy)"
    );
    let _ = writeln!(out, "  {}", "-".repeat(72));
    // the median classifier is parameter-free: it is the optimal classifier
    // under either model family, so it is listed under both labels
    for (label, summary) in [
        ("Median classifier (model: lognormal)", &report.median_summary),
        ("Median classifier (model: normal)", &report.median_summary),
        ("Trained classifier (model-free)", &report.trained_summary),
        ("Over-optimistic upper bound", &report.upper_bound_summary),
    ] {
        let sd = if summary.sd_defined {
            fmt_pct(summary.sd_accuracy)
        } else {
            "n/a (single participant)".to_string()
        };
        let _ = writeln!(
            out,
            "  {:<42} {:>14} {:>14}",
            label,
            fmt_pct(summary.mean_accuracy),
            sd
        );
    }
    out.push('\n');
    let _ = writeln!(out, "Accuracy vs chance (one-sample t against 0.5)");
    let _ = writeln!(out, "  median:      {}", fmt_test_line(&report.median_vs_chance));
    let _ = writeln!(out, "  trained:     {}", fmt_test_line(&report.trained_vs_chance));
    let _ = writeln!(out, "  upper bound: {}", fmt_test_line(&report.upper_bound_vs_chance));
    out.push('\n');
    let _ = writeln!(out, "Conventional statistics");
    let _ = writeln!(
        out,
        "  paired t-test on condition-mean differences (ms): {}",
        fmt_test_line(&report.t_test_mean_diffs)
    );
    let _ = writeln!(
        out,
        "  one-sample t-test on per-participant effect sizes: {}",
        fmt_test_line(&report.t_test_effect_sizes)
    );
    if let Some(ledger) = &report.effect_sizes {
        let d_across = if ledger.d_across_defined {
            format!("{:.3}", ledger.d_across)
        } else {
            "undefined (constant d_i)".to_string()
        };
        let _ = writeln!(out, "  d_across (mean d_i / SD d_i): {d_across}");
        let _ = writeln!(
            out,
            "  per-trial signal-to-noise: mean d_i = {:.4}; mean diff / mean within-SD = {:.4}",
            ledger.snr_mean_d, ledger.snr_ratio
        );
        let _ = writeln!(out, "  mean condition difference: {:.2} ms", ledger.mean_diff_ms);
    }
    let _ = writeln!(
        out,
        "  within-subject SD: mean of per-participant pooled SDs {:.1} ms; grand pooled {:.1} ms",
        report.mean_within_sd_ms, report.grand_within_sd_ms
    );
    if let Some(sem) = report.predicted_sem_ms {
        let _ = writeln!(
            out,
            "  predicted SEM of the mean difference (within-SD * sqrt(2) / sqrt(trials * participants)): {sem:.2} ms"
        );
    }
    let _ = writeln!(
        out,
        "\nconfig: seed {}, train fraction {}, repetitions {}",
        report.config.seed, report.config.train_fraction, report.config.repetitions
    );
    out
}

/// Sweep results as CSV: one row per grid cell.
pub fn sweep_to_csv(result: &crate::sim::SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
    out.push_str(
        "participants,trials_per_condition,delta_ms,rejection_rate,bayes_accuracy,median_accuracy,trained_accuracy,upper_bound_accuracy\n",
    );
    for cell in &result.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cell.participants,
            cell.trials_per_condition,
            cell.delta_ms,
            cell.rejection_rate,
            cell.bayes_accuracy,
            cell.median_accuracy,
            cell.trained_accuracy,
            cell.upper_bound_accuracy
        );
    }
    out
}

/// Sweep results as JSON, configuration echo included.
pub fn sweep_to_json(result: &crate::sim::SweepResult) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("sweep serializes");
    s.push('\n');
    s
}
