//! File ingestion and canonical emission.
//!
//! Trials ship as CSV with header `participant_id,condition,rt_ms`;
//! histograms as CSV with header `edge_ms,congruent,incongruent` where the
//! final row carries only the last edge (empty count cells). Lines starting
//! with `#` are comments; emitters write a `# format_version` comment that
//! ingestion skips, so emit-then-ingest is the identity.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{validate_dataset, Condition, Dataset, ParticipantRecord, Trial};
use crate::error::{Error, Result};
use crate::hist::HistogramPair;

pub const FORMAT_VERSION: u32 = 1;

/// Maps the toolkit's logical trial columns onto the columns of a foreign
/// file. Parsed from `logical=actual` pairs, e.g.
/// `participant_id=SubjID,condition=Cond,rt_ms=RT`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub participant_id: String,
    pub condition: String,
    pub rt_ms: String,
}

impl Default for ColumnMap {
    fn default() -> ColumnMap {
        ColumnMap {
            participant_id: "participant_id".into(),
            condition: "condition".into(),
            rt_ms: "rt_ms".into(),
        }
    }
}

impl ColumnMap {
    pub fn parse(spec: &str) -> Result<ColumnMap> {
        let mut map = ColumnMap::default();
        for part in spec.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (logical, actual) = part.split_once('=').ok_or_else(|| Error::Domain(format!(
                "column map entry `{part}` is not of the form logical=actual"
            )))?;
            let actual = actual.trim().to_string();
            match logical.trim() {
                "participant_id" => map.participant_id = actual,
                "condition" => map.condition = actual,
                "rt_ms" => map.rt_ms = actual,
                other => {
                    return Err(Error::Domain(format!(
                        "unknown logical column `{other}` (expected participant_id, condition, rt_ms)"
                    )))
                }
            }
        }
        Ok(map)
    }

    /// A mapped RT column whose name declares seconds (`_s`, `_sec`,
    /// `_seconds` suffix or exactly `rt`-less equivalents) is converted to
    /// milliseconds on ingestion.
    fn rt_unit_scale(&self) -> f64 {
        let name = self.rt_ms.to_ascii_lowercase();
        let seconds = name.ends_with("_s")
            || name.ends_with("_sec")
            || name.ends_with("_secs")
            || name.ends_with("_seconds")
            || name == "seconds";
        if seconds {
            1000.0
        } else {
            1.0
        }
    }
}

/// Options for trial ingestion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Drop trials with RT below this bound (milliseconds).
    pub rt_min_ms: Option<f64>,
    /// Drop trials with RT above this bound (milliseconds).
    pub rt_max_ms: Option<f64>,
    pub column_map: Option<ColumnMap>,
}

fn csv_reader(data: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(data.as_bytes())
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// Parses a trials CSV into a validated dataset.
///
/// Rows failing the optional RT filter are dropped and counted in
/// `metadata["dropped_by_rt_filter"]`. Participant order is order of first
/// appearance; within a participant, trial order is file order.
pub fn ingest_trials(data: &str, options: &IngestOptions) -> Result<Dataset> {
    let map = options.column_map.clone().unwrap_or_default();
    let scale = map.rt_unit_scale();
    let mut reader = csv_reader(data);

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: format!("cannot read header: {e}") })?
        .clone();
    let column = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column `{name}` in header {:?}", headers),
        })
    };
    let id_col = column(&map.participant_id)?;
    let cond_col = column(&map.condition)?;
    let rt_col = column(&map.rt_ms)?;

    let mut order: Vec<String> = Vec::new();
    let mut by_id: BTreeMap<String, Vec<Trial>> = BTreeMap::new();
    let mut dropped = 0usize;
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&row);
        let field = |idx: usize, name: &str| -> Result<&str> {
            row.get(idx).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing field `{name}`"),
            })
        };
        let id = field(id_col, &map.participant_id)?.to_string();
        if id.is_empty() {
            return Err(Error::Parse { line, message: "empty participant id".into() });
        }
        let cond_raw = field(cond_col, &map.condition)?;
        let condition = Condition::parse(cond_raw).ok_or_else(|| Error::Parse {
            line,
            message: format!(
                "unknown condition label `{cond_raw}` (expected congruent or incongruent)"
            ),
        })?;
        let rt_raw = field(rt_col, &map.rt_ms)?;
        let rt_ms: f64 = rt_raw
            .parse::<f64>()
            .map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse RT `{rt_raw}` as a number"),
            })?
            * scale;

        if options.rt_min_ms.is_some_and(|lo| rt_ms < lo)
            || options.rt_max_ms.is_some_and(|hi| rt_ms > hi)
        {
            dropped += 1;
            continue;
        }
        if !by_id.contains_key(&id) {
            order.push(id.clone());
        }
        by_id.entry(id).or_default().push(Trial { rt_ms, condition });
    }

    let participants: Vec<ParticipantRecord> = order
        .into_iter()
        .map(|id| {
            let trials = by_id.remove(&id).unwrap_or_default();
            ParticipantRecord::new(id, trials)
        })
        .collect();
    let mut ds = Dataset::new(participants);
    ds.metadata.insert("format_version".into(), FORMAT_VERSION.to_string());
    ds.metadata.insert("dropped_by_rt_filter".into(), dropped.to_string());
    if scale != 1.0 {
        ds.metadata.insert("rt_unit_converted_from".into(), "seconds".into());
    }

    let violations = validate_dataset(&ds);
    if !violations.is_empty() {
        return Err(Error::InvariantViolations(violations));
    }
    Ok(ds)
}

/// Reads a trials CSV file; see [`ingest_trials`].
pub fn ingest_trials_file(path: &Path, options: &IngestOptions) -> Result<Dataset> {
    let data = std::fs::read_to_string(path)?;
    let mut ds = ingest_trials(&data, options)?;
    ds.metadata.insert("source".into(), path.display().to_string());
    Ok(ds)
}

/// Canonical trials CSV for a dataset; `ingest_trials` of the output
/// reproduces the participants exactly.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
    out.push_str("participant_id,condition,rt_ms\n");
    for record in &ds.participants {
        for trial in &record.trials {
            let _ = writeln!(
                out,
                "{},{},{}",
                record.participant_id,
                trial.condition.as_str(),
                trial.rt_ms
            );
        }
    }
    out
}

/// Parses a histogram CSV: header `edge_ms,congruent,incongruent`, one row
/// per bin with its lower edge and both counts, and a final row carrying
/// only the upper edge of the last bin.
pub fn ingest_histogram(data: &str) -> Result<HistogramPair> {
    let mut reader = csv_reader(data);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: format!("cannot read header: {e}") })?
        .clone();
    let expected = ["edge_ms", "congruent", "incongruent"];
    for name in expected {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::Parse {
                line: 1,
                message: format!("missing column `{name}` in header {:?}", headers),
            });
        }
    }
    let idx = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (edge_col, cong_col, incong_col) =
        (idx("edge_ms"), idx("congruent"), idx("incongruent"));

    let mut edges: Vec<f64> = Vec::new();
    let mut cong: Vec<f64> = Vec::new();
    let mut incong: Vec<f64> = Vec::new();
    let mut pending_counts: Option<usize> = None; // line of a row that had counts after the final edge
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record_line(&row);
        if let Some(final_line) = pending_counts {
            return Err(Error::Parse {
                line: final_line,
                message: "rows found after the final-edge row".into(),
            });
        }
        let edge_raw = row.get(edge_col).unwrap_or("");
        let edge: f64 = edge_raw.parse().map_err(|_| Error::Parse {
            line,
            message: format!("cannot parse edge `{edge_raw}` as a number"),
        })?;
        edges.push(edge);
        let cong_raw = row.get(cong_col).unwrap_or("");
        let incong_raw = row.get(incong_col).unwrap_or("");
        match (cong_raw.is_empty(), incong_raw.is_empty()) {
            (true, true) => pending_counts = Some(line),
            (false, false) => {
                let parse = |raw: &str, label: &str| -> Result<f64> {
                    raw.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("cannot parse {label} count `{raw}` as a number"),
                    })
                };
                cong.push(parse(cong_raw, "congruent")?);
                incong.push(parse(incong_raw, "incongruent")?);
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "row must carry both counts or neither".into(),
                })
            }
        }
    }
    if pending_counts.is_none() {
        return Err(Error::Parse {
            line: edges.len() + 2,
            message: "missing final-edge row (empty count cells)".into(),
        });
    }
    HistogramPair::new(edges, cong, incong)
}

pub fn ingest_histogram_file(path: &Path) -> Result<HistogramPair> {
    let data = std::fs::read_to_string(path)?;
    ingest_histogram(&data)
}

/// Canonical histogram CSV; inverse of [`ingest_histogram`].
pub fn histogram_to_csv(h: &HistogramPair) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
    out.push_str("edge_ms,congruent,incongruent\n");
    for i in 0..h.n_bins() {
        let _ = writeln!(
            out,
            "{},{},{}",
            h.bin_edges[i], h.congruent_counts[i], h.incongruent_counts[i]
        );
    }
    let _ = writeln!(out, "{},,", h.bin_edges[h.n_bins()]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const VALID: &str = "participant_id,condition,rt_ms\n\
                         p1,congruent,400\n\
                         p1,incongruent,430\n\
                         p2,Congruent,410.5\n\
                         p2,INCONGRUENT,445\n";

    #[test]
    fn ingest_valid_file() {
        let ds = ingest_trials(VALID, &IngestOptions::default()).unwrap();
        assert_eq!(ds.participants.len(), 2);
        assert_eq!(ds.participants[0].participant_id, "p1");
        assert_eq!(ds.participants[1].trials[0].rt_ms, 410.5);
        assert_eq!(ds.metadata["dropped_by_rt_filter"], "0");
    }

    #[test]
    fn unknown_condition_is_a_line_numbered_parse_error() {
        let data = "participant_id,condition,rt_ms\np1,congruent,400\np1,weird,430\n";
        match ingest_trials(data, &IngestOptions::default()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("weird"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn rt_filter_drops_and_counts() {
        let data = "participant_id,condition,rt_ms\n\
                    p1,congruent,400\np1,congruent,5000\np1,incongruent,430\n";
        let options = IngestOptions {
            rt_min_ms: Some(200.0),
            rt_max_ms: Some(1500.0),
            ..Default::default()
        };
        let ds = ingest_trials(data, &options).unwrap();
        assert_eq!(ds.participants[0].trials.len(), 2);
        assert_eq!(ds.metadata["dropped_by_rt_filter"], "1");
    }

    #[test]
    fn nonpositive_rt_is_invariant_violation() {
        let data = "participant_id,condition,rt_ms\np1,congruent,-5\np1,incongruent,430\n";
        assert!(matches!(
            ingest_trials(data, &IngestOptions::default()),
            Err(Error::InvariantViolations(_))
        ));
    }

    #[test]
    fn column_map_and_seconds_conversion() {
        let map = ColumnMap::parse("participant_id=Subj,condition=Cond,rt_ms=RT_s").unwrap();
        let data = "Subj,Cond,RT_s\ns1,congruent,0.4\ns1,incongruent,0.43\n";
        let ds = ingest_trials(
            data,
            &IngestOptions { column_map: Some(map), ..Default::default() },
        )
        .unwrap();
        assert_eq!(ds.participants[0].trials[0].rt_ms, 400.0);
        assert_eq!(ds.metadata["rt_unit_converted_from"], "seconds");
    }

    #[test]
    fn column_map_rejects_unknown_logical_names() {
        assert!(ColumnMap::parse("bogus=x").is_err());
        assert!(ColumnMap::parse("participant_id").is_err());
    }

    #[test]
    fn trials_round_trip() {
        let ds = ingest_trials(VALID, &IngestOptions::default()).unwrap();
        let emitted = dataset_to_csv(&ds);
        let again = ingest_trials(&emitted, &IngestOptions::default()).unwrap();
        assert_eq!(ds.participants, again.participants);
    }

    const HIST: &str = "edge_ms,congruent,incongruent\n300,6,4\n500,4,6\n700,,\n";

    #[test]
    fn ingest_histogram_well_formed() {
        let h = ingest_histogram(HIST).unwrap();
        assert_eq!(h.n_bins(), 2);
        assert_eq!(h.bin_edges, vec![300.0, 500.0, 700.0]);
        assert_eq!(h.congruent_counts, vec![6.0, 4.0]);
    }

    #[test]
    fn ingest_histogram_nonmonotone_edges() {
        let data = "edge_ms,congruent,incongruent\n300,6,4\n200,4,6\n700,,\n";
        assert!(matches!(ingest_histogram(data), Err(Error::Domain(_))));
    }

    #[test]
    fn ingest_histogram_missing_final_edge() {
        let data = "edge_ms,congruent,incongruent\n300,6,4\n500,4,6\n";
        assert!(matches!(ingest_histogram(data), Err(Error::Parse { .. })));
    }

    #[test]
    fn histogram_round_trip() {
        let h = ingest_histogram(HIST).unwrap();
        let emitted = histogram_to_csv(&h);
        let again = ingest_histogram(&emitted).unwrap();
        assert_eq!(h, again);
    }
}
