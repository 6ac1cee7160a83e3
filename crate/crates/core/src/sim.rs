//! Monte-Carlo engine: synthesizes datasets from a distribution model and
//! maps how often the paired t-test on condition means rejects while the
//! single-trial classifiers stay at chance.
//!
//! Replications (and sweep cells) are independent and run in parallel; all
//! randomness flows through hierarchically derived streams keyed by
//! (seed, replication, participant, condition), so results are identical
//! for any worker count and any evaluation order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{self, SplitProtocol};
use crate::data::{summarize_participant, Condition, Dataset, ParticipantRecord, Trial};
use crate::dist::{DistributionModel, Family};
use crate::error::{Error, Result};
use crate::rng::{self, tags};
use crate::stats;

/// Full configuration of one simulated experiment.
///
/// The model is constructed from millisecond-scale targets (base mean, mean
/// difference, within-condition SD); both the targets and the resulting
/// model parameters are carried so reports can echo them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: DistributionModel,
    pub family: Family,
    pub delta_ms: f64,
    pub sigma_ms: f64,
    pub base_mean_ms: f64,
    pub participants: usize,
    pub trials_per_condition: usize,
    pub replications: usize,
    pub seed: u64,
    /// SD of a per-participant shift of both class locations, in ms.
    /// Defaults to 0: a pure within-subject design.
    pub between_subject_sd_ms: f64,
    /// Two-sided rejection threshold for the t-test.
    pub alpha: f64,
    pub train_fraction: f64,
    pub split_repetitions: u32,
}

impl SimulationConfig {
    /// Paper-scale defaults: 66 participants, 180 trials per condition,
    /// lognormal model matched to a 4.4 ms difference and 146.5 ms
    /// within-condition SD, 500 replications.
    pub fn default_cell(seed: u64) -> SimulationConfig {
        SimulationConfig::from_targets(Family::Lognormal, 4.4, 146.5, 66, 180, 500, seed)
            .expect("default configuration is valid")
    }

    pub fn from_targets(
        family: Family,
        delta_ms: f64,
        sigma_ms: f64,
        participants: usize,
        trials_per_condition: usize,
        replications: usize,
        seed: u64,
    ) -> Result<SimulationConfig> {
        let base_mean_ms = 500.0;
        let model = DistributionModel::from_ms_targets(family, base_mean_ms, delta_ms, sigma_ms)?;
        let cfg = SimulationConfig {
            model,
            family,
            delta_ms,
            sigma_ms,
            base_mean_ms,
            participants,
            trials_per_condition,
            replications,
            seed,
            between_subject_sd_ms: 0.0,
            alpha: 0.05,
            train_fraction: 0.5,
            split_repetitions: 10,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.participants < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 participants, got {}",
                self.participants
            )));
        }
        if self.trials_per_condition < 2 {
            return Err(Error::Domain(format!(
                "need at least 2 trials per condition, got {}",
                self.trials_per_condition
            )));
        }
        if self.replications == 0 {
            return Err(Error::Domain("need at least 1 replication".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.between_subject_sd_ms < 0.0 {
            return Err(Error::Domain("between-subject SD cannot be negative".into()));
        }
        Ok(())
    }

    /// The model for one participant: the base model with both class
    /// locations shifted by the participant's between-subject jitter.
    fn participant_model(&self, replication: usize, participant: usize) -> DistributionModel {
        if self.between_subject_sd_ms == 0.0 {
            return self.model;
        }
        let mut stream = rng::substream(
            self.seed,
            &[tags::JITTER, replication as u64, participant as u64],
        );
        let z: f64 = rand::Rng::sample(&mut stream, rand_distr::StandardNormal);
        let jitter = self.between_subject_sd_ms * z;
        // keep class means positive; relevant only for extreme jitter draws
        let base = (self.base_mean_ms + jitter).max(self.delta_ms.abs() * 0.5 + 1.0);
        DistributionModel::from_ms_targets(self.family, base, self.delta_ms, self.sigma_ms)
            .expect("jittered model parameters stay valid")
    }
}

/// Draws one synthetic dataset. Deterministic given (config, replication):
/// participant `i`'s trials come from streams keyed by
/// (seed, replication, i, condition), congruent block first.
pub fn synthesize_dataset(cfg: &SimulationConfig, replication: usize) -> Dataset {
    let participants = (0..cfg.participants)
        .map(|p| {
            let model = cfg.participant_model(replication, p);
            let mut trials = Vec::with_capacity(2 * cfg.trials_per_condition);
            for (c_idx, condition) in Condition::ALL.iter().enumerate() {
                let mut stream = rng::substream(
                    cfg.seed,
                    &[tags::SYNTH, replication as u64, p as u64, c_idx as u64],
                );
                for _ in 0..cfg.trials_per_condition {
                    trials.push(Trial {
                        rt_ms: model.sample_rt(*condition, &mut stream),
                        condition: *condition,
                    });
                }
            }
            ParticipantRecord::new(format!("p{:03}", p + 1), trials)
        })
        .collect();
    let mut ds = Dataset::new(participants);
    ds.metadata.insert("source".into(), "simulated".into());
    ds.metadata.insert("replication".into(), replication.to_string());
    ds
}

/// Compact per-replication record retained for audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replication: usize,
    pub t: f64,
    pub p: f64,
    pub rejected: bool,
    pub mean_diff_ms: f64,
    pub median_mean_accuracy: f64,
    pub trained_mean_accuracy: f64,
    pub upper_mean_accuracy: f64,
    pub mean_within_sd_ms: f64,
}

/// Aggregated result of a simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallacyResult {
    pub config: SimulationConfig,
    pub replications: Vec<ReplicationSummary>,
    /// Fraction of replications with p below alpha.
    pub rejection_rate: f64,
    /// Closed-form accuracy of the optimal classifier under the model.
    pub bayes_accuracy: f64,
    pub mean_median_accuracy: f64,
    pub mean_trained_accuracy: f64,
    pub mean_upper_accuracy: f64,
    pub mean_empirical_diff_ms: f64,
    pub mean_within_sd_ms: f64,
}

fn run_replication(cfg: &SimulationConfig, replication: usize) -> Result<ReplicationSummary> {
    let ds = synthesize_dataset(cfg, replication);
    let protocol = SplitProtocol {
        train_fraction: cfg.train_fraction,
        repetitions: cfg.split_repetitions,
        seed: rng::derive_seed(cfg.seed, &[tags::PROTOCOL, replication as u64]),
    };

    let mut median = Vec::with_capacity(ds.participants.len());
    let mut trained = Vec::with_capacity(ds.participants.len());
    let mut upper = Vec::with_capacity(ds.participants.len());
    let mut within_sds = Vec::with_capacity(ds.participants.len());
    for record in &ds.participants {
        median.push(classify::median_classifier(record)?.accuracy);
        trained.push(classify::train_step_classifier(record, &protocol)?.accuracy);
        upper.push(classify::upper_bound(record)?.accuracy);
        within_sds.push(summarize_participant(record)?.pooled_sd_ms);
    }
    let t_test = stats::paired_t_test(&ds)?;
    Ok(ReplicationSummary {
        replication,
        t: t_test.t,
        p: t_test.p,
        rejected: !t_test.degenerate_sd && t_test.p < cfg.alpha,
        mean_diff_ms: t_test.mean_diff,
        median_mean_accuracy: crate::math::mean(&median),
        trained_mean_accuracy: crate::math::mean(&trained),
        upper_mean_accuracy: crate::math::mean(&upper),
        mean_within_sd_ms: crate::math::mean(&within_sds),
    })
}

/// Runs the full experiment: for every replication, synthesize a dataset,
/// run the paired t-test and all three classifiers, then aggregate the
/// rejection rate and accuracy means.
pub fn run_fallacy_experiment(cfg: &SimulationConfig) -> Result<FallacyResult> {
    cfg.validate()?;
    let replications: Vec<ReplicationSummary> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(cfg, r))
        .collect::<Result<Vec<_>>>()?;

    let n = replications.len() as f64;
    let rejection_rate = replications.iter().filter(|r| r.rejected).count() as f64 / n;
    let mean_of = |f: fn(&ReplicationSummary) -> f64| -> f64 {
        replications.iter().map(f).sum::<f64>() / n
    };
    Ok(FallacyResult {
        config: cfg.clone(),
        rejection_rate,
        bayes_accuracy: cfg.model.bayes_accuracy(),
        mean_median_accuracy: mean_of(|r| r.median_mean_accuracy),
        mean_trained_accuracy: mean_of(|r| r.trained_mean_accuracy),
        mean_upper_accuracy: mean_of(|r| r.upper_mean_accuracy),
        mean_empirical_diff_ms: mean_of(|r| r.mean_diff_ms),
        mean_within_sd_ms: mean_of(|r| r.mean_within_sd_ms),
        replications,
    })
}

/// One cell of a sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub participants: usize,
    pub trials_per_condition: usize,
    pub delta_ms: f64,
    pub rejection_rate: f64,
    pub bayes_accuracy: f64,
    pub median_accuracy: f64,
    pub trained_accuracy: f64,
    pub upper_bound_accuracy: f64,
}

/// Phase map over (participants, trials, delta) grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub base: SimulationConfig,
    pub cells: Vec<SweepCell>,
}

/// Runs the experiment for every grid cell. Cells share random streams
/// (they are keyed by replication/participant/condition, not by cell
/// parameters), giving common random numbers across the grid.
pub fn sweep(
    base: &SimulationConfig,
    participant_grid: &[usize],
    trial_grid: &[usize],
    delta_grid: &[f64],
) -> Result<SweepResult> {
    if participant_grid.is_empty() || trial_grid.is_empty() || delta_grid.is_empty() {
        return Err(Error::EmptyInput("sweep grids must be nonempty".into()));
    }
    let mut cells = Vec::new();
    for &participants in participant_grid {
        for &trials in trial_grid {
            for &delta_ms in delta_grid {
                let mut cfg = base.clone();
                cfg.participants = participants;
                cfg.trials_per_condition = trials;
                cfg.delta_ms = delta_ms;
                cfg.model = DistributionModel::from_ms_targets(
                    cfg.family,
                    cfg.base_mean_ms,
                    delta_ms,
                    cfg.sigma_ms,
                )?;
                let result = run_fallacy_experiment(&cfg)?;
                cells.push(SweepCell {
                    participants,
                    trials_per_condition: trials,
                    delta_ms,
                    rejection_rate: result.rejection_rate,
                    bayes_accuracy: result.bayes_accuracy,
                    median_accuracy: result.mean_median_accuracy,
                    trained_accuracy: result.mean_trained_accuracy,
                    upper_bound_accuracy: result.mean_upper_accuracy,
                });
            }
        }
    }
    Ok(SweepResult { base: base.clone(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(seed: u64) -> SimulationConfig {
        let mut cfg =
            SimulationConfig::from_targets(Family::Lognormal, 4.4, 146.5, 4, 12, 3, seed).unwrap();
        cfg.split_repetitions = 3;
        cfg
    }

    #[test]
    fn synthesis_is_deterministic() {
        let cfg = small_cfg(99);
        let a = synthesize_dataset(&cfg, 1);
        let b = synthesize_dataset(&cfg, 1);
        assert_eq!(a, b);
        let c = synthesize_dataset(&cfg, 2);
        assert_ne!(a, c);
    }

    #[test]
    fn synthesis_counts_and_positivity() {
        let cfg = small_cfg(5);
        let ds = synthesize_dataset(&cfg, 0);
        assert_eq!(ds.participants.len(), 4);
        for record in &ds.participants {
            assert_eq!(record.count_for(Condition::Congruent), 12);
            assert_eq!(record.count_for(Condition::Incongruent), 12);
            assert!(record.trials.iter().all(|t| t.rt_ms > 0.0));
        }
    }

    #[test]
    fn experiment_is_deterministic_and_order_free() {
        let cfg = small_cfg(1234);
        let a = run_fallacy_experiment(&cfg).unwrap();
        let b = run_fallacy_experiment(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_diff_tracks_target_at_scale() {
        // CLT check: per-participant empirical mean differences center on the
        // configured delta with SD close to sigma*sqrt(2)/sqrt(n).
        let cfg = SimulationConfig::from_targets(Family::Normal, 4.4, 146.5, 200, 180, 1, 31)
            .unwrap();
        let ds = synthesize_dataset(&cfg, 0);
        let diffs = stats::mean_differences(&ds).unwrap();
        let mean = crate::math::mean(&diffs);
        let sd = crate::math::sample_sd(&diffs);
        let expected_sd = 146.5 * std::f64::consts::SQRT_2 / (180.0_f64).sqrt();
        assert!((mean - 4.4).abs() < 4.0 * expected_sd / (200.0_f64).sqrt(), "mean {mean}");
        assert!((sd - expected_sd).abs() < 0.15 * expected_sd, "sd {sd} vs {expected_sd}");
    }

    #[test]
    fn between_subject_jitter_changes_locations_not_delta() {
        let mut cfg = small_cfg(77);
        cfg.between_subject_sd_ms = 40.0;
        let ds = synthesize_dataset(&cfg, 0);
        // with jitter on, participants see different base locations
        let m0 = crate::math::mean(
            &ds.participants[0].trials.iter().map(|t| t.rt_ms).collect::<Vec<_>>(),
        );
        let m1 = crate::math::mean(
            &ds.participants[1].trials.iter().map(|t| t.rt_ms).collect::<Vec<_>>(),
        );
        assert!((m0 - m1).abs() > 1.0);
    }

    #[test]
    fn sweep_shapes_and_null_cell() {
        let mut cfg = small_cfg(3);
        cfg.replications = 2;
        let result = sweep(&cfg, &[4], &[12], &[0.0, 4.4]).unwrap();
        assert_eq!(result.cells.len(), 2);
        let null = &result.cells[0];
        assert_eq!(null.delta_ms, 0.0);
        assert_eq!(null.bayes_accuracy, 0.5);
        assert!(sweep(&cfg, &[], &[12], &[0.0]).is_err());
    }
}
