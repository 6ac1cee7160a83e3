//! Behavioral tests for the simulation engine: scheduling independence,
//! common-random-number monotonicity, and moment fidelity.

use rtaudit_core::{run_fallacy_experiment, sweep, Family, SimulationConfig};

fn config(
    participants: usize,
    trials: usize,
    replications: usize,
    delta: f64,
    seed: u64,
) -> SimulationConfig {
    let mut cfg = SimulationConfig::from_targets(
        Family::Lognormal,
        delta,
        146.5,
        participants,
        trials,
        replications,
        seed,
    )
    .unwrap();
    cfg.split_repetitions = 5;
    cfg
}

#[test]
fn results_are_identical_across_worker_counts() {
    let cfg = config(6, 20, 8, 4.4, 555);
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_fallacy_experiment(&cfg).unwrap());
    let multi = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run_fallacy_experiment(&cfg).unwrap());
    assert_eq!(single, multi);
}

#[test]
fn adding_participants_raises_power_with_common_random_numbers() {
    // same seed, growing participant count: the first k participants' data
    // is shared between the cells, so the comparison is paired
    let small = run_fallacy_experiment(&config(10, 60, 60, 10.0, 808)).unwrap();
    let large = run_fallacy_experiment(&config(40, 60, 60, 10.0, 808)).unwrap();
    assert!(
        large.rejection_rate >= small.rejection_rate,
        "power went down: {} -> {}",
        small.rejection_rate,
        large.rejection_rate
    );
    // the shared prefix really is shared
    let a = rtaudit_core::synthesize_dataset(&config(10, 60, 1, 10.0, 808), 0);
    let b = rtaudit_core::synthesize_dataset(&config(40, 60, 1, 10.0, 808), 0);
    assert_eq!(a.participants[..10], b.participants[..10]);
}

#[test]
fn empirical_within_sd_matches_configured_sigma() {
    // lognormal moment matching: the mean within-participant SD lands within
    // 1% of the configured millisecond-scale sigma
    let result = run_fallacy_experiment(&config(30, 120, 12, 4.4, 99)).unwrap();
    let relative = (result.mean_within_sd_ms - 146.5).abs() / 146.5;
    assert!(
        relative < 0.01,
        "mean within-SD {} is {:.2}% off the 146.5 target",
        result.mean_within_sd_ms,
        100.0 * relative
    );
}

#[test]
fn closed_form_accuracy_upper_bounds_median_classifier_mean() {
    let result = run_fallacy_experiment(&config(40, 100, 25, 4.4, 1717)).unwrap();
    // Monte-Carlo standard error of the grand mean of per-participant
    // accuracies (~0.5/sqrt(trials) per participant)
    let per_participant_sd = 0.5 / (200.0f64).sqrt();
    let se = per_participant_sd / ((40 * 25) as f64).sqrt();
    assert!(
        result.bayes_accuracy >= result.mean_median_accuracy - 2.0 * se,
        "median mean {} exceeds closed form {} by more than 2 SE ({se})",
        result.mean_median_accuracy,
        result.bayes_accuracy
    );
}

#[test]
fn sweep_join_matches_individual_runs() {
    let base = config(6, 24, 10, 4.4, 31);
    let grid = sweep(&base, &[6], &[24], &[0.0, 4.4]).unwrap();
    assert_eq!(grid.cells.len(), 2);
    let mut null_cfg = base.clone();
    null_cfg.delta_ms = 0.0;
    null_cfg.model = rtaudit_core::DistributionModel::from_ms_targets(
        Family::Lognormal,
        null_cfg.base_mean_ms,
        0.0,
        146.5,
    )
    .unwrap();
    let individual = run_fallacy_experiment(&null_cfg).unwrap();
    let cell = &grid.cells[0];
    assert_eq!(cell.rejection_rate, individual.rejection_rate);
    assert_eq!(cell.median_accuracy, individual.mean_median_accuracy);
    assert_eq!(cell.bayes_accuracy, 0.5);
}
