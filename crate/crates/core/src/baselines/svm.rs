use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_fit, Classifier};
use crate::error::{invalid, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// L2 regularisation strength.
    pub lambda: f64,
    pub epochs: usize,
    /// Initial step; decays as `eta0 / (1 + eta0 * lambda * t)`.
    pub eta0: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            lambda: 1e-3,
            epochs: 30,
            eta0: 0.1,
            seed: 0,
        }
    }
}

/// One-vs-rest linear SVM fitted by hinge-loss subgradient descent.
#[derive(Debug, Clone)]
pub struct LinearSvm<T> {
    weights: Array2<T>,
    bias: Array1<T>,
}

impl<T: Scalar> LinearSvm<T> {
    pub fn fit(x: ArrayView2<'_, T>, y: &[usize], n_classes: usize, p: &SvmParams) -> Result<Self> {
        check_fit(x, y, n_classes)?;
        if !(p.lambda > 0.0) || !(p.eta0 > 0.0) {
            return Err(invalid("lambda", "lambda and eta0 must be positive"));
        }
        let d = x.ncols();
        let mut weights = Array2::<T>::zeros((n_classes, d));
        let mut bias = Array1::<T>::zeros(n_classes);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        for c in 0..n_classes {
            let mut w = Array1::<T>::zeros(d);
            let mut b = T::zero();
            let mut t = 0u64;
            for _ in 0..p.epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    t += 1;
                    let eta = p.eta0 / (1.0 + p.eta0 * p.lambda * t as f64);
                    let sign = if y[i] == c { T::one() } else { -T::one() };
                    let row = x.row(i);
                    let margin = sign * (w.dot(&row) + b);
                    w.mapv_inplace(|v| v * T::of(1.0 - eta * p.lambda));
                    if margin < T::one() {
                        w.scaled_add(T::of(eta) * sign, &row);
                        b += T::of(eta) * sign;
                    }
                }
            }
            weights.row_mut(c).assign(&w);
            bias[c] = b;
        }
        Ok(Self { weights, bias })
    }

    pub fn scores(&self, x: ArrayView1<'_, T>) -> Array1<T> {
        self.weights.dot(&x) + &self.bias
    }
}

impl<T: Scalar> Classifier<T> for LinearSvm<T> {
    fn predict_one(&self, x: ArrayView1<'_, T>) -> usize {
        let s = self.scores(x);
        super::argmax_ties_low(s.as_slice().expect("contiguous"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn separates_three_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let centres = [(-4.0, 0.0), (4.0, 0.0), (0.0, 5.0)];
        let n = 300;
        let mut x = Array2::<f64>::zeros((n, 2));
        let mut y = vec![0; n];
        for i in 0..n {
            let c = i % 3;
            x[[i, 0]] = centres[c].0 + rng.gen_range(-1.0..1.0);
            x[[i, 1]] = centres[c].1 + rng.gen_range(-1.0..1.0);
            y[i] = c;
        }
        let m = LinearSvm::fit(x.view(), &y, 3, &SvmParams::default()).unwrap();
        let acc = m
            .predict(x.view())
            .iter()
            .zip(&y)
            .filter(|(a, b)| a == b)
            .count() as f64
            / n as f64;
        assert!(acc > 0.97, "accuracy {acc}");
    }
}
