//! Writes a synthetic trials CSV to stdout. The repository's
//! `fixtures/simulated_trials.csv` was produced with the default arguments:
//!
//! ```text
//! cargo run -p rtaudit-core --example synthesize_trials > fixtures/simulated_trials.csv
//! ```
//!
//! Arguments (all optional, positional): seed participants trials_per_condition delta_ms sigma_ms

use rtaudit_core::{dataset_to_csv, synthesize_dataset, Family, SimulationConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| -> f64 {
        args.get(i).map(|s| s.parse().expect("numeric argument")).unwrap_or(default)
    };
    let seed = arg(0, 7.0) as u64;
    let participants = arg(1, 66.0) as usize;
    let trials = arg(2, 180.0) as usize;
    let delta = arg(3, 4.4);
    let sigma = arg(4, 146.5);

    let cfg = SimulationConfig::from_targets(
        Family::Lognormal,
        delta,
        sigma,
        participants,
        trials,
        1,
        seed,
    )
    .expect("valid configuration");
    let ds = synthesize_dataset(&cfg, 0);
    print!("{}", dataset_to_csv(&ds));
}
