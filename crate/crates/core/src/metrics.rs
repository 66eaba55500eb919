use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::model::{Compartment, N_COMPARTMENTS};

/// Counts of (true, predicted) compartment pairs. Rows are true labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: [[u64; N_COMPARTMENTS]; N_COMPARTMENTS],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(Compartment, Compartment)]) -> Self {
        let mut cm = Self::new();
        for &(t, p) in pairs {
            cm.record(t, p);
        }
        cm
    }

    pub fn record(&mut self, truth: Compartment, predicted: Compartment) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn get(&self, truth: Compartment, predicted: Compartment) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn counts(&self) -> &[[u64; N_COMPARTMENTS]; N_COMPARTMENTS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..N_COMPARTMENTS).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, truth: Compartment) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }

    /// Overall accuracy; `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.correct() as f64 / total as f64)
    }

    /// Tab-separated matrix with a header row of predicted labels.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("true/pred");
        for c in Compartment::ALL {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
        for t in Compartment::ALL {
            let _ = write!(out, "{t}");
            for p in Compartment::ALL {
                let _ = write!(out, "\t{}", self.get(t, p));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_tsv())
    }
}

/// Fraction of pairs whose prediction equals the truth.
pub fn accuracy(pairs: &[(Compartment, Compartment)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("accuracy of an empty prediction list"));
    }
    let hits = pairs.iter().filter(|(t, p)| t == p).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// Misclassification rate as a percentage.
pub fn error_limit_pct(acc: f64) -> f64 {
    100.0 * (1.0 - acc)
}

/// Recall for one compartment; `None` when the compartment never occurs as a true label.
pub fn sensitivity(cm: &ConfusionMatrix, c: Compartment) -> Option<f64> {
    let row = cm.row_total(c);
    (row > 0).then(|| cm.get(c, c) as f64 / row as f64)
}

/// Formats an optional fraction, printing `n/a` for undefined values.
pub fn fmt_fraction(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}
