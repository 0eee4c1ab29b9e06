//! Classical classifiers compared against the network.

mod adaboost;
mod forest;
mod knn;
mod naive_bayes;
mod svm;
mod tree;

pub use adaboost::AdaBoostSamme;
pub use forest::{ForestParams, RandomForest};
pub use knn::Knn;
pub use naive_bayes::GaussianNb;
pub use svm::{LinearSvm, SvmParams};
pub use tree::{DecisionTree, TreeParams};

use ndarray::{ArrayView1, ArrayView2};

use crate::error::{invalid, Error, Result};
use crate::Scalar;

pub trait Classifier<T: Scalar> {
    fn predict_one(&self, x: ArrayView1<'_, T>) -> usize;

    fn predict(&self, x: ArrayView2<'_, T>) -> Vec<usize> {
        x.rows().into_iter().map(|r| self.predict_one(r)).collect()
    }
}

/// Shared argument checks for `fit` constructors.
pub(crate) fn check_fit<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: &[usize],
    n_classes: usize,
) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::Degenerate("no training rows".into()));
    }
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows vs {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if let Some(&c) = y.iter().find(|&&c| c >= n_classes) {
        return Err(invalid("labels", format!("label {c} >= {n_classes} classes")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }
    Ok(())
}

/// Index of the largest count; ties go to the smaller index.
pub(crate) fn argmax_ties_low<V: PartialOrd + Copy>(xs: &[V]) -> usize {
    let mut best = 0;
    for (k, &v) in xs.iter().enumerate() {
        if v > xs[best] {
            best = k;
        }
    }
    best
}
