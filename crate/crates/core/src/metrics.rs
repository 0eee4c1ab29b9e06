//! Confusion matrices and per-class precision, recall and F1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when a metric's denominator was zero and the value defaulted to 0.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub class_names: Vec<String>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

/// Harmonic mean of precision and recall; `None` when both are zero.
pub fn f1_score(precision: f64, recall: f64) -> Option<f64> {
    let s = precision + recall;
    (s > 0.0).then(|| 2.0 * precision * recall / s)
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn evaluate(predictions: &[usize], truths: &[usize], class_names: &[String]) -> Result<EvalReport> {
    if predictions.is_empty() {
        return Err(Error::Degenerate("evaluate on empty input".into()));
    }
    if predictions.len() != truths.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let k = class_names.len();
    if let Some(&c) = predictions.iter().chain(truths).find(|&&c| c >= k) {
        return Err(Error::Shape(format!("label {c} outside {k} classes")));
    }
    let mut confusion = vec![vec![0u64; k]; k];
    for (&p, &t) in predictions.iter().zip(truths) {
        confusion[t][p] += 1;
    }
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let row: u64 = confusion[c].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[c]).sum();
            let (precision, precision_undefined) = ratio(tp, col);
            let (recall, recall_undefined) = ratio(tp, row);
            let (f1, f1_undefined) = match f1_score(precision, recall) {
                Some(f) => (f, false),
                None => (0.0, true),
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support: row,
                precision_undefined,
                recall_undefined,
                f1_undefined,
            }
        })
        .collect();
    let kf = k as f64;
    let diag: u64 = (0..k).map(|c| confusion[c][c]).sum();
    Ok(EvalReport {
        class_names: class_names.to_vec(),
        macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / kf,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / kf,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / kf,
        accuracy: diag as f64 / predictions.len() as f64,
        confusion,
        per_class,
    })
}

impl EvalReport {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Classes ranked by F1, best first (ties by index).
    pub fn f1_ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.per_class.len()).collect();
        idx.sort_by(|&a, &b| {
            self.per_class[b]
                .f1
                .partial_cmp(&self.per_class[a].f1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }
}
