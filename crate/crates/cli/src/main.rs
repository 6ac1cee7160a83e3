//! `rtaudit` — audits reaction-time congruency experiments by putting
//! single-trial classifiability next to conventional significance tests.
//!
//! Subcommands: `analyze` a trials CSV, `simulate` the
//! significant-but-unclassifiable regime, `histogram` accuracy bounds for
//! digitized distributions, and `plot` the two distribution figures.
//!
//! Exit codes: 0 success, 2 unreadable input file, 3 parse error,
//! 4 invalid or degenerate data, 1 anything else.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rtaudit_core as core;
use rtaudit_core::{
    AuditConfig, ColumnMap, Dataset, Family, IngestOptions, PlotStyle, ReportFormat,
    SimulationConfig, Weighting,
};

#[derive(Parser)]
#[command(
    name = "rtaudit",
    version,
    about = "Single-trial classifiability audits for RT congruency experiments",
    propagate_version = true
)]
struct Cli {
    /// Directory where output files are written (created if missing).
    #[arg(long, global = true, default_value = "rtaudit-out")]
    output_dir: PathBuf,

    /// Comma-separated output formats: json, csv, text.
    #[arg(long, global = true, default_value = "json,csv,text")]
    format: String,

    /// Root random seed. Reruns with the same seed and flags are
    /// byte-identical.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Cap worker threads; results are identical for every worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit a trials CSV: classifier table, t-tests, effect sizes, SEM.
    Analyze(AnalyzeArgs),
    /// Monte-Carlo sweep: t-test rejection rate vs classifier accuracy.
    Simulate(SimulateArgs),
    /// Accuracy bounds for a pre-binned (digitized) histogram pair.
    Histogram(HistogramArgs),
    /// Emit a distribution figure as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trials CSV with header participant_id,condition,rt_ms.
    #[arg(long)]
    input: PathBuf,

    /// Training fraction for the trained classifier.
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,

    /// Number of random train/test splits to average.
    #[arg(long, default_value_t = 10)]
    repetitions: u32,

    /// Drop trials faster than this bound (ms).
    #[arg(long)]
    rt_min: Option<f64>,

    /// Drop trials slower than this bound (ms).
    #[arg(long)]
    rt_max: Option<f64>,

    /// Column mapping for foreign files, e.g.
    /// participant_id=Subj,condition=Cond,rt_ms=RT.
    #[arg(long)]
    column_map: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Participant counts (comma-separated grid).
    #[arg(long, value_delimiter = ',', default_value = "66")]
    participants: Vec<usize>,

    /// Trials per condition (comma-separated grid).
    #[arg(long, value_delimiter = ',', default_value = "180")]
    trials: Vec<usize>,

    /// Condition mean differences in ms (comma-separated grid).
    #[arg(long, value_delimiter = ',', default_value = "4.4")]
    delta_ms: Vec<f64>,

    /// Within-condition SD in ms.
    #[arg(long, default_value_t = 146.5)]
    sigma_ms: f64,

    /// Distribution family: normal or lognormal.
    #[arg(long, default_value = "lognormal")]
    family: String,

    /// Replications per grid cell.
    #[arg(long, default_value_t = 500)]
    replications: usize,

    /// Two-sided rejection threshold for the t-test.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,

    /// Training fraction for the trained classifier.
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,

    /// Number of random train/test splits to average.
    #[arg(long, default_value_t = 10)]
    repetitions: u32,
}

#[derive(Args)]
struct HistogramArgs {
    /// Histogram CSV with header edge_ms,congruent,incongruent.
    #[arg(long)]
    input: PathBuf,

    /// Weight classes by raw counts instead of equal priors.
    #[arg(long)]
    raw_counts: bool,
}

#[derive(Args)]
struct PlotArgs {
    /// Optional trials CSV; without it the figure uses the model targets.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Figure style: trial (per-trial distributions) or mean-sem
    /// (sampling distributions of the condition means).
    #[arg(long, default_value = "trial")]
    style: String,

    /// Distribution family for model-based figures.
    #[arg(long, default_value = "lognormal")]
    family: String,

    /// Condition mean difference in ms for model-based figures.
    #[arg(long, default_value_t = 4.4)]
    delta_ms: f64,

    /// Within-condition SD in ms for model-based figures.
    #[arg(long, default_value_t = 146.5)]
    sigma_ms: f64,
}

struct CliError {
    code: u8,
    message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<core::Error> for CliError {
    fn from(e: core::Error) -> CliError {
        let code = match &e {
            core::Error::Parse { .. } => 3,
            core::Error::DegenerateData(_)
            | core::Error::Domain(_)
            | core::Error::EmptyInput(_)
            | core::Error::EmptyHistogram(_)
            | core::Error::InvariantViolations(_) => 4,
            core::Error::Io(_) => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

fn other(message: impl Into<String>) -> CliError {
    CliError { code: 1, message: message.into() }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        // identical output for any worker count; this only caps parallelism
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(args) => cmd_analyze(cli, args),
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::Histogram(args) => cmd_histogram(cli, args),
        Command::Plot(args) => cmd_plot(cli, args),
    }
}

fn parse_formats(spec: &str) -> CliResult<Vec<ReportFormat>> {
    let mut formats = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let format = ReportFormat::parse(part)
            .ok_or_else(|| other(format!("unknown format `{part}` (expected json, csv, text)")))?;
        if !formats.contains(&format) {
            formats.push(format);
        }
    }
    if formats.is_empty() {
        return Err(other("no output formats selected"));
    }
    Ok(formats)
}

fn parse_family(s: &str) -> CliResult<Family> {
    Family::parse(s)
        .ok_or_else(|| other(format!("unknown family `{s}` (expected normal or lognormal)")))
}

fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn write_output(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir)
        .map_err(|e| other(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| other(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn ingest_dataset(
    path: &Path,
    rt_min: Option<f64>,
    rt_max: Option<f64>,
    column_map: Option<&str>,
) -> CliResult<Dataset> {
    let raw = read_input(path)?;
    let options = IngestOptions {
        rt_min_ms: rt_min,
        rt_max_ms: rt_max,
        column_map: column_map.map(ColumnMap::parse).transpose()?,
    };
    let mut ds = core::ingest_trials(&raw, &options)?;
    ds.metadata.insert("source".into(), path.display().to_string());
    Ok(ds)
}

fn cmd_analyze(cli: &Cli, args: &AnalyzeArgs) -> CliResult<()> {
    let formats = parse_formats(&cli.format)?;
    let ds = ingest_dataset(&args.input, args.rt_min, args.rt_max, args.column_map.as_deref())?;
    let config = AuditConfig {
        seed: cli.seed,
        train_fraction: args.train_fraction,
        repetitions: args.repetitions,
        rt_min_ms: args.rt_min,
        rt_max_ms: args.rt_max,
        column_map: args.column_map.clone(),
    };
    let report = core::build_report(&ds, &config)?;
    for format in &formats {
        let name = format!("audit_report.{}", format.extension());
        write_output(&cli.output_dir, &name, &core::emit_report(&report, *format))?;
    }
    // the classifier table goes to stdout regardless of file formats
    print!("{}", core::emit_report(&report, ReportFormat::Text));
    Ok(())
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> CliResult<()> {
    let formats = parse_formats(&cli.format)?;
    let family = parse_family(&args.family)?;
    let first_delta = *args
        .delta_ms
        .first()
        .ok_or_else(|| other("delta grid must be nonempty"))?;
    let base_participants =
        *args.participants.first().ok_or_else(|| other("participant grid must be nonempty"))?;
    let base_trials =
        *args.trials.first().ok_or_else(|| other("trial grid must be nonempty"))?;
    let mut base = SimulationConfig::from_targets(
        family,
        first_delta,
        args.sigma_ms,
        base_participants,
        base_trials,
        args.replications,
        cli.seed,
    )?;
    base.alpha = args.alpha;
    base.train_fraction = args.train_fraction;
    base.split_repetitions = args.repetitions;

    let result = core::sweep(&base, &args.participants, &args.trials, &args.delta_ms)?;

    if formats.contains(&ReportFormat::Csv) {
        write_output(&cli.output_dir, "sweep.csv", &core::sweep_to_csv(&result))?;
    }
    if formats.contains(&ReportFormat::Json) {
        write_output(&cli.output_dir, "sweep.json", &core::sweep_to_json(&result))?;
    }

    println!(
        "{:>12} {:>7} {:>9} {:>10} {:>8} {:>8} {:>8} {:>8}",
        "participants", "trials", "delta_ms", "rejection", "bayes", "median", "trained", "upper"
    );
    for cell in &result.cells {
        println!(
            "{:>12} {:>7} {:>9.2} {:>10.3} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
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
    if let Some(cell) = result.cells.iter().find(|c| {
        c.participants == 66 && c.trials_per_condition == 180 && (c.delta_ms - 4.4).abs() < 1e-9
    }) {
        println!(
            "\ncell (66 participants, 180 trials, 4.4 ms): the t-test rejects in {:.0}% of \
             replications while the best single-trial accuracy any threshold could reach is \
             {:.1}% (optimal classifier: {:.1}%)",
            100.0 * cell.rejection_rate,
            100.0 * cell.upper_bound_accuracy,
            100.0 * cell.bayes_accuracy
        );
    }
    Ok(())
}

fn cmd_histogram(cli: &Cli, args: &HistogramArgs) -> CliResult<()> {
    let formats = parse_formats(&cli.format)?;
    let raw = read_input(&args.input)?;
    let pair = core::ingest_histogram(&raw)?;
    let weighting = if args.raw_counts { Weighting::RawCounts } else { Weighting::EqualPriors };
    let step = pair.step_accuracy(weighting)?;
    let bayes = pair.bayes_accuracy(weighting)?;

    let weighting_label = if args.raw_counts { "raw_counts" } else { "equal_priors" };
    let json = serde_json::json!({
        "format_version": core::FORMAT_VERSION,
        "n_bins": pair.n_bins(),
        "weighting": weighting_label,
        "step": {
            "accuracy": step.accuracy,
            "threshold_edge_ms": step.threshold_edge_ms,
            "orientation": step.orientation,
        },
        "per_bin_bayes_accuracy": bayes,
    });
    let mut json_text = serde_json::to_string_pretty(&json).expect("histogram report serializes");
    json_text.push('\n');

    let csv_text = format!(
        "metric,value\nformat_version,{}\nn_bins,{}\nweighting,{}\nstep_accuracy,{}\nstep_threshold_edge_ms,{}\nper_bin_bayes_accuracy,{}\n",
        core::FORMAT_VERSION,
        pair.n_bins(),
        weighting_label,
        step.accuracy,
        step.threshold_edge_ms,
        bayes
    );
    let text = format!(
        "histogram accuracy bounds ({} bins, {} weighting)\n\
         best step classifier: {:.2}% at edge {} ms\n\
         per-bin rule (upper bound): {:.2}%\n",
        pair.n_bins(),
        weighting_label,
        100.0 * step.accuracy,
        step.threshold_edge_ms,
        100.0 * bayes
    );

    for format in &formats {
        let name = format!("histogram_report.{}", format.extension());
        let contents = match format {
            ReportFormat::Json => &json_text,
            ReportFormat::Csv => &csv_text,
            ReportFormat::Text => &text,
        };
        write_output(&cli.output_dir, &name, contents)?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_plot(cli: &Cli, args: &PlotArgs) -> CliResult<()> {
    let style = PlotStyle::parse(&args.style)
        .ok_or_else(|| other(format!("unknown style `{}` (expected trial or mean-sem)", args.style)))?;
    let family = parse_family(&args.family)?;

    let (name, svg) = match (&args.input, style) {
        (Some(path), PlotStyle::TrialDistributions) => {
            let ds = ingest_dataset(path, None, None, None)?;
            let record = ds
                .participants
                .first()
                .ok_or_else(|| other("dataset has no participants to plot"))?;
            ("plot_trial_distributions.svg", core::plot_record_distributions(record, family)?)
        }
        (Some(path), PlotStyle::MeanSemDistributions) => {
            let ds = ingest_dataset(path, None, None, None)?;
            let t = core::paired_t_test(&ds)?;
            let diffs = core::mean_differences(&ds)?;
            let grand_incong_minus_cong = t.mean_diff;
            // center the two curves on the grand condition means
            let mut cong_means = Vec::with_capacity(ds.participants.len());
            for (record, diff) in ds.participants.iter().zip(&diffs) {
                let all: f64 = record.trials.iter().map(|tr| tr.rt_ms).sum::<f64>()
                    / record.trials.len() as f64;
                cong_means.push(all - 0.5 * diff);
            }
            let mean_cong = cong_means.iter().sum::<f64>() / cong_means.len() as f64;
            (
                "plot_mean_sem_distributions.svg",
                core::plot_mean_sem_distributions(
                    mean_cong,
                    mean_cong + grand_incong_minus_cong,
                    t.sem_diff,
                )?,
            )
        }
        (None, PlotStyle::TrialDistributions) => {
            let model =
                core::DistributionModel::from_ms_targets(family, 500.0, args.delta_ms, args.sigma_ms)?;
            ("plot_trial_distributions.svg", core::plot_model_distributions(&model)?)
        }
        (None, PlotStyle::MeanSemDistributions) => {
            // paper-scale default design: 180 trials/condition, 66 participants
            let sem = core::predict_sem(args.sigma_ms, 180.0, 66.0)?;
            (
                "plot_mean_sem_distributions.svg",
                core::plot_mean_sem_distributions(
                    500.0 - 0.5 * args.delta_ms,
                    500.0 + 0.5 * args.delta_ms,
                    sem,
                )?,
            )
        }
    };
    let path = write_output(&cli.output_dir, name, &svg)?;
    println!("wrote {}", path.display());
    Ok(())
}
