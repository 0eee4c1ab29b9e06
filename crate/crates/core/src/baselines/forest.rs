use ndarray::{ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_ties_low, check_fit, Classifier, DecisionTree, TreeParams};
use crate::error::{invalid, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Fraction of features examined at each split.
    pub feature_fraction: f64,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            feature_fraction: 0.3,
            max_depth: None,
            seed: 0,
        }
    }
}

/// Bagged CART trees with per-split feature subsampling; majority vote.
#[derive(Debug, Clone)]
pub struct RandomForest<T> {
    trees: Vec<DecisionTree<T>>,
    n_classes: usize,
}

impl<T: Scalar> RandomForest<T> {
    pub fn fit(x: ArrayView2<'_, T>, y: &[usize], n_classes: usize, p: &ForestParams) -> Result<Self> {
        check_fit(x, y, n_classes)?;
        if p.n_trees == 0 {
            return Err(invalid("n_trees", "must be positive"));
        }
        if !(p.feature_fraction > 0.0 && p.feature_fraction <= 1.0) {
            return Err(invalid("feature_fraction", "must lie in (0, 1]"));
        }
        let n = x.nrows();
        let max_features = ((x.ncols() as f64 * p.feature_fraction).ceil() as usize).max(1);
        let tree_params = TreeParams {
            max_depth: p.max_depth,
            min_samples_split: 2,
            max_features: Some(max_features),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut trees = Vec::with_capacity(p.n_trees);
        for _ in 0..p.n_trees {
            // Bootstrap as multiplicity weights.
            let mut w = vec![0.0; n];
            for _ in 0..n {
                w[rng.gen_range(0..n)] += 1.0;
            }
            let keep: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
            let xs = x.select(ndarray::Axis(0), &keep);
            let ys: Vec<usize> = keep.iter().map(|&i| y[i]).collect();
            let ws: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
            trees.push(DecisionTree::fit_weighted(
                xs.view(),
                &ys,
                &ws,
                n_classes,
                &tree_params,
                Some(&mut rng),
            )?);
        }
        Ok(Self { trees, n_classes })
    }
}

impl<T: Scalar> Classifier<T> for RandomForest<T> {
    fn predict_one(&self, x: ArrayView1<'_, T>) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_one(x)] += 1;
        }
        argmax_ties_low(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn forest_is_deterministic_and_fits_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 200;
        let x = Array2::from_shape_fn((n, 2), |(i, _)| (i % 2) as f64 * 3.0 + rng.gen::<f64>());
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let p = ForestParams {
            n_trees: 15,
            feature_fraction: 0.5,
            ..ForestParams::default()
        };
        let a = RandomForest::fit(x.view(), &y, 2, &p).unwrap();
        let b = RandomForest::fit(x.view(), &y, 2, &p).unwrap();
        assert_eq!(a.predict(x.view()), y);
        assert_eq!(a.predict(x.view()), b.predict(x.view()));
    }
}
