use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{argmax_ties_low, check_fit, Classifier};
use crate::error::{invalid, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone)]
enum Node<T> {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// CART classifier using weighted Gini impurity. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone)]
pub struct DecisionTree<T> {
    nodes: Vec<Node<T>>,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

struct Builder<'a, 'x, T, R> {
    x: ArrayView2<'x, T>,
    y: &'a [usize],
    w: &'a [f64],
    n_classes: usize,
    params: &'a TreeParams,
    rng: Option<&'a mut R>,
    nodes: Vec<Node<T>>,
}

impl<T: Scalar, R: Rng> Builder<'_, '_, T, R> {
    fn class_weights(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += self.w[i];
        }
        c
    }

    fn best_split(&mut self, idx: &[usize], parent: &[f64]) -> Option<(usize, T)> {
        let d = self.x.ncols();
        let features: Vec<usize> = match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < d => {
                let mut f = sample(rng, d, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        };
        let total: f64 = parent.iter().sum();
        let mut best: Option<(f64, usize, T)> = None;
        let mut sorted = idx.to_vec();
        for f in features {
            let col = self.x.column(f);
            sorted.sort_by(|&a, &b| {
                col[a]
                    .partial_cmp(&col[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mut left = vec![0.0; self.n_classes];
            let mut wl = 0.0;
            for k in 0..sorted.len() - 1 {
                let i = sorted[k];
                left[self.y[i]] += self.w[i];
                wl += self.w[i];
                let (v, next) = (col[i], col[sorted[k + 1]]);
                if !(v < next) {
                    continue;
                }
                let right: Vec<f64> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
                let wr = total - wl;
                let imp = wl * gini(&left, wl) + wr * gini(&right, wr);
                if best.as_ref().map_or(true, |b| imp < b.0 - 1e-12) {
                    let thr = v + (next - v) / T::of(2.0);
                    // Midpoints can round up to `next` for adjacent floats.
                    let thr = if thr >= next { v } else { thr };
                    best = Some((imp, f, thr));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.class_weights(&idx);
        let class = argmax_ties_low(&counts);
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let at_depth = self.params.max_depth.is_some_and(|m| depth >= m);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class });
        if pure || at_depth || idx.len() < self.params.min_samples_split.max(2) {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(&idx, &counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.x[[i, feature]] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

impl<T: Scalar> DecisionTree<T> {
    pub fn fit(x: ArrayView2<'_, T>, y: &[usize], n_classes: usize, params: &TreeParams) -> Result<Self> {
        let w = vec![1.0; y.len()];
        Self::fit_weighted::<rand_chacha::ChaCha8Rng>(x, y, &w, n_classes, params, None)
    }

    /// Fits on the given row weights. `rng` drives per-split feature
    /// subsampling when `max_features` is set.
    pub fn fit_weighted<R: Rng>(
        x: ArrayView2<'_, T>,
        y: &[usize],
        w: &[f64],
        n_classes: usize,
        params: &TreeParams,
        rng: Option<&mut R>,
    ) -> Result<Self> {
        check_fit(x, y, n_classes)?;
        if w.len() != y.len() || w.iter().any(|&v| !(v >= 0.0)) {
            return Err(invalid("weights", "one non-negative weight per row"));
        }
        let mut b = Builder {
            x,
            y,
            w,
            n_classes,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.grow((0..y.len()).collect(), 0);
        Ok(Self { nodes: b.nodes })
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl<T: Scalar> Classifier<T> for DecisionTree<T> {
    fn predict_one(&self, x: ArrayView1<'_, T>) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { class } => return *class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}
