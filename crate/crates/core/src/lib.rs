//! Audit toolkit for reaction-time congruency experiments.
//!
//! A significant difference between condition means says nothing about how
//! well individual trials can be classified: with enough trials and
//! participants, a few milliseconds of mean difference reach significance
//! while every single-trial classifier stays at chance. This crate puts both
//! quantities side by side:
//!
//! * [`classify`] — the empirical classifiers: median threshold, trained
//!   split-evaluated threshold, and the over-optimistic upper bound;
//! * [`dist`] — normal/lognormal class-conditional models, the optimal
//!   threshold (the pooled median), and closed-form optimal accuracy;
//! * [`stats`] — paired t-test, SEM prediction, effect-size ledger, and
//!   accuracy-vs-chance tests;
//! * [`sim`] — seeded Monte-Carlo engine that regenerates the
//!   significant-yet-unclassifiable regime and sweeps design grids;
//! * [`hist`] — accuracy bounds for pre-binned (digitized) RT histograms;
//! * [`ingest`] / [`report`] / [`plot`] — CSV ingestion, audit reports in
//!   JSON/CSV/text, and deterministic SVG figures.
//!
//! All randomness is derived hierarchically from a single seed, so every
//! result is reproducible bit-for-bit regardless of thread count.

pub mod classify;
pub mod data;
pub mod dist;
pub mod error;
pub mod hist;
pub mod ingest;
pub mod math;
pub mod plot;
pub mod report;
pub mod rng;
mod serde_util;
pub mod sim;
pub mod stats;

pub use classify::{
    aggregate, median_classifier, train_step_classifier, upper_bound, AccuracySummary,
    SplitProtocol, StepClassifier,
};
pub use data::{
    summarize_participant, validate_dataset, ClassifierOutcome, Condition, ConditionSummary,
    Dataset, Orientation, ParticipantRecord, ParticipantSummary, Trial, Violation,
};
pub use dist::{fit_model, DistributionModel, Family, MixtureMarginal, OptimalThreshold};
pub use error::{Error, Result};
pub use hist::{HistogramPair, HistogramStepResult, Weighting};
pub use ingest::{
    dataset_to_csv, histogram_to_csv, ingest_histogram, ingest_histogram_file, ingest_trials,
    ingest_trials_file, ColumnMap, IngestOptions, FORMAT_VERSION,
};
pub use plot::{
    plot_mean_sem_distributions, plot_model_distributions, plot_record_distributions, PlotStyle,
};
pub use report::{
    build_report, dataset_fingerprint, emit_report, sweep_to_csv, sweep_to_json, AuditConfig,
    AuditReport, ReportFormat,
};
pub use sim::{
    run_fallacy_experiment, sweep, synthesize_dataset, FallacyResult, ReplicationSummary,
    SimulationConfig, SweepCell, SweepResult,
};
pub use stats::{
    accuracy_vs_chance_test, effect_sizes, mean_differences, one_sample_t, paired_t_test,
    predict_sem, EffectSizeLedger, PairedTestResult,
};
