//! Accuracy estimation for pre-binned RT distributions, e.g. histograms
//! digitized from published figures.
//!
//! Two estimators are always reported: the best step-function (threshold at
//! a bin edge) accuracy, and the per-bin rule that picks the class with the
//! larger mass in each bin. The per-bin rule dominates any threshold rule,
//! so it serves as the histogram-level upper bound.

use serde::{Deserialize, Serialize};

use crate::data::Orientation;
use crate::error::{Error, Result};

/// How class masses are weighted when scoring accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Normalize each class to total mass 0.5 (equal priors). Default.
    EqualPriors,
    /// Weight classes by their raw total counts.
    RawCounts,
}

/// A pair of aligned histograms, one per condition, over shared bin edges.
///
/// Counts are nonnegative reals so that digitized (fractional) data is
/// representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramPair {
    /// n + 1 strictly increasing edges, in milliseconds.
    pub bin_edges: Vec<f64>,
    pub congruent_counts: Vec<f64>,
    pub incongruent_counts: Vec<f64>,
}

/// Result of the best edge-threshold classifier on a histogram pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramStepResult {
    pub accuracy: f64,
    pub threshold_edge_ms: f64,
    pub orientation: Orientation,
}

impl HistogramPair {
    pub fn new(
        bin_edges: Vec<f64>,
        congruent_counts: Vec<f64>,
        incongruent_counts: Vec<f64>,
    ) -> Result<HistogramPair> {
        let n = congruent_counts.len();
        if n == 0 {
            return Err(Error::Domain("histogram needs at least one bin".into()));
        }
        if incongruent_counts.len() != n {
            return Err(Error::Domain(format!(
                "count vectors must have equal length: {} vs {}",
                n,
                incongruent_counts.len()
            )));
        }
        if bin_edges.len() != n + 1 {
            return Err(Error::Domain(format!(
                "{} bins need {} edges, got {}",
                n,
                n + 1,
                bin_edges.len()
            )));
        }
        if bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("bin edges must be strictly increasing".into()));
        }
        for (label, counts) in
            [("congruent", &congruent_counts), ("incongruent", &incongruent_counts)]
        {
            if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(Error::Domain(format!(
                    "{label} counts must be finite and nonnegative"
                )));
            }
        }
        Ok(HistogramPair { bin_edges, congruent_counts, incongruent_counts })
    }

    pub fn n_bins(&self) -> usize {
        self.congruent_counts.len()
    }

    /// Per-class bin masses under the given weighting. Equal priors
    /// normalizes each class to 0.5; raw counts normalizes jointly.
    fn class_masses(&self, weighting: Weighting) -> Result<(Vec<f64>, Vec<f64>)> {
        let total_c: f64 = self.congruent_counts.iter().sum();
        let total_i: f64 = self.incongruent_counts.iter().sum();
        if total_c <= 0.0 {
            return Err(Error::EmptyHistogram("congruent class has no mass".into()));
        }
        if total_i <= 0.0 {
            return Err(Error::EmptyHistogram("incongruent class has no mass".into()));
        }
        let (wc, wi) = match weighting {
            Weighting::EqualPriors => (0.5 / total_c, 0.5 / total_i),
            Weighting::RawCounts => {
                let total = total_c + total_i;
                (1.0 / total, 1.0 / total)
            }
        };
        Ok((
            self.congruent_counts.iter().map(|c| c * wc).collect(),
            self.incongruent_counts.iter().map(|c| c * wi).collect(),
        ))
    }

    /// Best accuracy over thresholds at bin edges and both orientations.
    /// A threshold at edge k sends bins below k to the fast class. Ties keep
    /// the lowest edge with congruent-fast scanned first.
    pub fn step_accuracy(&self, weighting: Weighting) -> Result<HistogramStepResult> {
        let (cong, incong) = self.class_masses(weighting)?;
        let total_cong: f64 = cong.iter().sum();
        let total_incong: f64 = incong.iter().sum();

        let mut best = HistogramStepResult {
            accuracy: -1.0,
            threshold_edge_ms: self.bin_edges[0],
            orientation: Orientation::FastIsCongruent,
        };
        let mut cong_prefix = 0.0;
        let mut incong_prefix = 0.0;
        for k in 0..=self.n_bins() {
            if k > 0 {
                cong_prefix += cong[k - 1];
                incong_prefix += incong[k - 1];
            }
            let candidates = [
                (cong_prefix + (total_incong - incong_prefix), Orientation::FastIsCongruent),
                (incong_prefix + (total_cong - cong_prefix), Orientation::FastIsIncongruent),
            ];
            for (accuracy, orientation) in candidates {
                if accuracy > best.accuracy + 1e-15 {
                    best = HistogramStepResult {
                        accuracy,
                        threshold_edge_ms: self.bin_edges[k],
                        orientation,
                    };
                }
            }
        }
        Ok(best)
    }

    /// Per-bin rule: in each bin pick the class with the larger mass.
    /// With equal priors this is `0.5 * sum_b max(p_cong(b), p_incong(b))`
    /// over per-class normalized masses. Always at least 0.5 and at least
    /// the step accuracy.
    pub fn bayes_accuracy(&self, weighting: Weighting) -> Result<f64> {
        let (cong, incong) = self.class_masses(weighting)?;
        Ok(cong.iter().zip(&incong).map(|(c, i)| c.max(*i)).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(cong: &[f64], incong: &[f64]) -> HistogramPair {
        let edges: Vec<f64> = (0..=cong.len()).map(|i| 100.0 * i as f64).collect();
        HistogramPair::new(edges, cong.to_vec(), incong.to_vec()).unwrap()
    }

    #[test]
    fn disjoint_support_is_perfect() {
        let h = pair(&[10.0, 0.0], &[0.0, 10.0]);
        let step = h.step_accuracy(Weighting::EqualPriors).unwrap();
        assert_eq!(step.accuracy, 1.0);
        assert_eq!(step.threshold_edge_ms, 100.0);
        assert_eq!(step.orientation, Orientation::FastIsCongruent);
        assert_eq!(h.bayes_accuracy(Weighting::EqualPriors).unwrap(), 1.0);
    }

    #[test]
    fn identical_histograms_are_chance() {
        let h = pair(&[3.0, 5.0, 2.0], &[3.0, 5.0, 2.0]);
        assert_relative_eq!(h.step_accuracy(Weighting::EqualPriors).unwrap().accuracy, 0.5);
        assert_relative_eq!(h.bayes_accuracy(Weighting::EqualPriors).unwrap(), 0.5);
    }

    #[test]
    fn six_four_example() {
        let h = pair(&[6.0, 4.0], &[4.0, 6.0]);
        let step = h.step_accuracy(Weighting::EqualPriors).unwrap();
        assert_relative_eq!(step.accuracy, 0.6, max_relative = 1e-12);
        assert_relative_eq!(
            h.bayes_accuracy(Weighting::EqualPriors).unwrap(),
            0.6,
            max_relative = 1e-12
        );
    }

    #[test]
    fn three_bin_bayes_beats_step() {
        // per-class masses: cong (0.2, 0.6, 0.2), incong (0.4, 0.2, 0.4)
        let h = pair(&[2.0, 6.0, 2.0], &[4.0, 2.0, 4.0]);
        let bayes = h.bayes_accuracy(Weighting::EqualPriors).unwrap();
        assert_relative_eq!(bayes, 0.7, max_relative = 1e-12);
        let step = h.step_accuracy(Weighting::EqualPriors).unwrap();
        assert!(bayes >= step.accuracy);
    }

    #[test]
    fn scaling_one_class_is_a_no_op_under_equal_priors() {
        let a = pair(&[6.0, 4.0], &[4.0, 6.0]);
        let b = pair(&[60.0, 40.0], &[4.0, 6.0]);
        assert_relative_eq!(
            a.step_accuracy(Weighting::EqualPriors).unwrap().accuracy,
            b.step_accuracy(Weighting::EqualPriors).unwrap().accuracy,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            a.bayes_accuracy(Weighting::EqualPriors).unwrap(),
            b.bayes_accuracy(Weighting::EqualPriors).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn raw_count_weighting_differs_for_unbalanced_classes() {
        let h = pair(&[30.0, 10.0], &[1.0, 3.0]);
        let eq = h.bayes_accuracy(Weighting::EqualPriors).unwrap();
        let raw = h.bayes_accuracy(Weighting::RawCounts).unwrap();
        assert!((eq - raw).abs() > 1e-6);
    }

    #[test]
    fn empty_class_errors() {
        let h = pair(&[0.0, 0.0], &[1.0, 2.0]);
        assert!(matches!(
            h.step_accuracy(Weighting::EqualPriors),
            Err(Error::EmptyHistogram(_))
        ));
    }

    #[test]
    fn construction_validates_shapes_and_edges() {
        assert!(HistogramPair::new(vec![0.0, 1.0], vec![1.0], vec![1.0]).is_ok());
        assert!(HistogramPair::new(vec![0.0, 0.0], vec![1.0], vec![1.0]).is_err());
        assert!(HistogramPair::new(vec![1.0, 0.0], vec![1.0], vec![1.0]).is_err());
        assert!(HistogramPair::new(vec![0.0, 1.0], vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(HistogramPair::new(vec![0.0, 1.0], vec![-1.0], vec![1.0]).is_err());
    }
}
