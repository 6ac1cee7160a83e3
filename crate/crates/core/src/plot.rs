//! Deterministic SVG plots of the two distribution views: the trial-level
//! RT distributions that govern single-trial classification, and the
//! SEM-width sampling distributions of the condition means that govern the
//! significance test. Output is plain text with fixed-precision coordinates,
//! so identical inputs yield byte-identical files.

use std::fmt::Write as _;

use crate::data::{summarize_participant, Condition, ParticipantRecord};
use crate::dist::{fit_model, DistributionModel, Family};
use crate::error::{Error, Result};
use crate::ingest::FORMAT_VERSION;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 44.0;
const CURVE_POINTS: usize = 240;
const HIST_BINS: usize = 30;

/// Plot style selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    /// Per-trial RT distributions for the two conditions.
    TrialDistributions,
    /// Sampling distributions of the condition means (SD = SEM).
    MeanSemDistributions,
}

impl PlotStyle {
    pub fn parse(s: &str) -> Option<PlotStyle> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trial" | "trial-distributions" | "trial_distributions" => {
                Some(PlotStyle::TrialDistributions)
            }
            "mean-sem" | "mean_sem" | "mean-sem-distributions" | "mean_sem_distributions" => {
                Some(PlotStyle::MeanSemDistributions)
            }
            _ => None,
        }
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let inner = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        HEIGHT - MARGIN_BOTTOM - v / self.y_max * inner
    }
}

fn polyline(points: &[(f64, f64)], frame: &Frame, dashed: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let _ = write!(
            d,
            "{}{:.3},{:.3}",
            if i == 0 { "M" } else { " L" },
            frame.x(*x),
            frame.y(*y)
        );
    }
    let dash = if dashed { " stroke-dasharray=\"7,4\"" } else { "" };
    format!(
        "  <path d=\"{d}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"{dash}/>\n"
    )
}

fn svg_document(
    title: &str,
    subtitle: &str,
    x_label: &str,
    frame: &Frame,
    body: &str,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<!-- format_version: {FORMAT_VERSION} -->");
    let _ = writeln!(out, "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>",
        MARGIN_LEFT
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"34\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">{subtitle}</text>",
        MARGIN_LEFT
    );
    // axes
    let x0 = frame.x(frame.x_min);
    let x1 = frame.x(frame.x_max);
    let y0 = frame.y(0.0);
    let _ = writeln!(
        out,
        "  <line x1=\"{x0:.3}\" y1=\"{y0:.3}\" x2=\"{x1:.3}\" y2=\"{y0:.3}\" stroke=\"black\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{x0:.3}\" y1=\"{:.3}\" x2=\"{x0:.3}\" y2=\"{y0:.3}\" stroke=\"black\" stroke-width=\"1\"/>",
        frame.y(frame.y_max)
    );
    // x tick labels
    for i in 0..=4 {
        let v = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            "  <text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{:.1}</text>",
            frame.x(v),
            y0 + 16.0,
            v
        );
    }
    let _ = writeln!(
        out,
        "  <text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{x_label}</text>",
        0.5 * (x0 + x1),
        y0 + 34.0
    );
    // legend: dashed = congruent, solid = incongruent
    let legend_x = WIDTH - MARGIN_RIGHT - 190.0;
    let _ = writeln!(
        out,
        "  <line x1=\"{legend_x:.1}\" y1=\"14\" x2=\"{:.1}\" y2=\"14\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"7,4\"/>",
        legend_x + 28.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"18\" font-family=\"sans-serif\" font-size=\"11\">congruent</text>",
        legend_x + 34.0
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{legend_x:.1}\" y1=\"30\" x2=\"{:.1}\" y2=\"30\" stroke=\"black\" stroke-width=\"1.5\"/>",
        legend_x + 28.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.1}\" y=\"34\" font-family=\"sans-serif\" font-size=\"11\">incongruent</text>",
        legend_x + 34.0
    );
    out.push_str(body);
    out.push_str("</svg>\n");
    out
}

fn density_curve(model: &DistributionModel, class: Condition, x_min: f64, x_max: f64) -> Vec<(f64, f64)> {
    (0..=CURVE_POINTS)
        .map(|i| {
            let x = x_min + (x_max - x_min) * i as f64 / CURVE_POINTS as f64;
            let x = if model.family == Family::Lognormal { x.max(1e-9) } else { x };
            (x, model.class_conditional_pdf(class, x).unwrap_or(0.0))
        })
        .collect()
}

fn model_x_range(model: &DistributionModel) -> (f64, f64) {
    match model.family {
        Family::Normal => (
            model.mu1.min(model.mu2) - 4.0 * model.sigma,
            model.mu1.max(model.mu2) + 4.0 * model.sigma,
        ),
        Family::Lognormal => (
            (model.mu1.min(model.mu2) - 4.0 * model.sigma).exp(),
            (model.mu1.max(model.mu2) + 4.0 * model.sigma).exp(),
        ),
    }
}

/// Trial-level distribution plot for a fitted model (no histogram bars).
pub fn plot_model_distributions(model: &DistributionModel) -> Result<String> {
    let (x_min, x_max) = model_x_range(model);
    let cong = density_curve(model, Condition::Congruent, x_min, x_max);
    let incong = density_curve(model, Condition::Incongruent, x_min, x_max);
    let y_max = cong
        .iter()
        .chain(&incong)
        .map(|(_, y)| *y)
        .fold(0.0_f64, f64::max)
        * 1.08;
    if y_max <= 0.0 || !y_max.is_finite() {
        return Err(Error::DegenerateData("model density has no mass in range".into()));
    }
    let frame = Frame { x_min, x_max, y_max };
    let mut body = String::new();
    body.push_str(&polyline(&cong, &frame, true));
    body.push_str(&polyline(&incong, &frame, false));
    let subtitle = format!(
        "{} model: mu1 = {:.4}, mu2 = {:.4}, sigma = {:.4} (equal priors)",
        model.family.as_str(),
        model.mu1,
        model.mu2,
        model.sigma
    );
    Ok(svg_document(
        "Trial-level RT distributions by condition",
        &subtitle,
        "reaction time (ms)",
        &frame,
        &body,
    ))
}

/// Trial-level plot for a participant record: per-condition histograms as
/// density step curves, with the fitted model's densities overlaid. The
/// fitting choice (method of moments on the chosen scale) is stated in the
/// subtitle.
pub fn plot_record_distributions(record: &ParticipantRecord, family: Family) -> Result<String> {
    let summary = summarize_participant(record)?;
    if summary.pooled_sd_ms <= 0.0 {
        return Err(Error::DegenerateData(format!(
            "participant {}: zero-variance RTs cannot be plotted as densities",
            record.participant_id
        )));
    }
    let model = fit_model(record, family)?;
    let rts: Vec<f64> = record.trials.iter().map(|t| t.rt_ms).collect();
    let x_min = rts.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = rts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (x_max - x_min).max(1e-9);
    let (x_min, x_max) = (x_min - 0.05 * span, x_max + 0.05 * span);

    let histogram = |condition: Condition| -> Vec<(f64, f64)> {
        let values: Vec<f64> = record.rts_for(condition).collect();
        let h = (x_max - x_min) / HIST_BINS as f64;
        let mut counts = vec![0.0f64; HIST_BINS];
        for v in &values {
            let idx = (((v - x_min) / h) as usize).min(HIST_BINS - 1);
            counts[idx] += 1.0;
        }
        let norm = values.len() as f64 * h;
        // step outline
        let mut points = Vec::with_capacity(2 * HIST_BINS + 2);
        points.push((x_min, 0.0));
        for (i, c) in counts.iter().enumerate() {
            let density = c / norm;
            points.push((x_min + h * i as f64, density));
            points.push((x_min + h * (i + 1) as f64, density));
        }
        points.push((x_max, 0.0));
        points
    };

    let cong_hist = histogram(Condition::Congruent);
    let incong_hist = histogram(Condition::Incongruent);
    let cong_curve = density_curve(&model, Condition::Congruent, x_min.max(1e-9), x_max);
    let incong_curve = density_curve(&model, Condition::Incongruent, x_min.max(1e-9), x_max);
    let y_max = cong_hist
        .iter()
        .chain(&incong_hist)
        .chain(&cong_curve)
        .chain(&incong_curve)
        .map(|(_, y)| *y)
        .fold(0.0_f64, f64::max)
        * 1.08;
    let frame = Frame { x_min, x_max, y_max };
    let mut body = String::new();
    body.push_str(&polyline(&cong_hist, &frame, true));
    body.push_str(&polyline(&incong_hist, &frame, false));
    body.push_str(&polyline(&cong_curve, &frame, true));
    body.push_str(&polyline(&incong_curve, &frame, false));
    let subtitle = format!(
        "participant {}: histograms + {} fit by method of moments on the {} scale (mu1 = {:.4}, mu2 = {:.4}, sigma = {:.4})",
        record.participant_id,
        model.family.as_str(),
        match family {
            Family::Normal => "ms",
            Family::Lognormal => "log",
        },
        model.mu1,
        model.mu2,
        model.sigma
    );
    Ok(svg_document(
        "Trial-level RT distributions by condition",
        &subtitle,
        "reaction time (ms)",
        &frame,
        &body,
    ))
}

/// Sampling distributions of the two condition means: normal curves centered
/// at the means with SD equal to the SEM. Note how much narrower the x-range
/// is than in the trial-level view.
pub fn plot_mean_sem_distributions(
    mean_congruent_ms: f64,
    mean_incongruent_ms: f64,
    sem_ms: f64,
) -> Result<String> {
    if !(sem_ms > 0.0) || !sem_ms.is_finite() {
        return Err(Error::DegenerateData(format!(
            "SEM must be positive to draw sampling distributions, got {sem_ms}"
        )));
    }
    let lo = mean_congruent_ms.min(mean_incongruent_ms) - 5.0 * sem_ms;
    let hi = mean_congruent_ms.max(mean_incongruent_ms) + 5.0 * sem_ms;
    let model = DistributionModel::new(
        Family::Normal,
        mean_congruent_ms,
        mean_incongruent_ms,
        sem_ms,
    )?;
    let cong = density_curve(&model, Condition::Congruent, lo, hi);
    let incong = density_curve(&model, Condition::Incongruent, lo, hi);
    let y_max = cong.iter().chain(&incong).map(|(_, y)| *y).fold(0.0_f64, f64::max) * 1.08;
    let frame = Frame { x_min: lo, x_max: hi, y_max };
    let mut body = String::new();
    body.push_str(&polyline(&cong, &frame, true));
    body.push_str(&polyline(&incong, &frame, false));
    let subtitle = format!(
        "normal curves at the condition means with SD = SEM = {sem_ms:.3} ms; x-axis spans only {:.1} ms",
        hi - lo
    );
    Ok(svg_document(
        "Sampling distributions of the condition means",
        &subtitle,
        "mean reaction time (ms)",
        &frame,
        &body,
    ))
}
