use ndarray::{Array2, ArrayView1, ArrayView2};

use super::{check_fit, Classifier};
use crate::error::Result;
use crate::Scalar;

/// Gaussian naive Bayes with a variance floor of `1e-9` times the largest
/// feature variance.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    log_prior: Vec<f64>,
    means: Array2<f64>,
    vars: Array2<f64>,
}

impl GaussianNb {
    pub fn fit<T: Scalar>(x: ArrayView2<'_, T>, y: &[usize], n_classes: usize) -> Result<Self> {
        check_fit(x, y, n_classes)?;
        let d = x.ncols();
        let n = y.len() as f64;
        let mut counts = vec![0.0; n_classes];
        let mut means = Array2::<f64>::zeros((n_classes, d));
        let mut vars = Array2::<f64>::zeros((n_classes, d));
        for (row, &c) in x.rows().into_iter().zip(y) {
            counts[c] += 1.0;
            for j in 0..d {
                means[[c, j]] += row[j].as_f64();
            }
        }
        for c in 0..n_classes {
            if counts[c] > 0.0 {
                means.row_mut(c).mapv_inplace(|v| v / counts[c]);
            }
        }
        for (row, &c) in x.rows().into_iter().zip(y) {
            for j in 0..d {
                vars[[c, j]] += (row[j].as_f64() - means[[c, j]]).powi(2);
            }
        }
        let mut max_var: f64 = 0.0;
        for j in 0..d {
            let col = x.column(j);
            let m = col.iter().map(|v| v.as_f64()).sum::<f64>() / n;
            let v = col.iter().map(|v| (v.as_f64() - m).powi(2)).sum::<f64>() / n;
            max_var = max_var.max(v);
        }
        let floor = 1e-9 * max_var.max(f64::MIN_POSITIVE);
        for c in 0..n_classes {
            for j in 0..d {
                vars[[c, j]] = if counts[c] > 0.0 {
                    vars[[c, j]] / counts[c] + floor
                } else {
                    1.0
                };
            }
        }
        let log_prior = counts
            .iter()
            .map(|&k| if k > 0.0 { (k / n).ln() } else { f64::NEG_INFINITY })
            .collect();
        Ok(Self {
            log_prior,
            means,
            vars,
        })
    }

    pub fn log_joint<T: Scalar>(&self, x: ArrayView1<'_, T>) -> Vec<f64> {
        let two_pi = 2.0 * std::f64::consts::PI;
        (0..self.log_prior.len())
            .map(|c| {
                let mut s = self.log_prior[c];
                for j in 0..x.len() {
                    let v = self.vars[[c, j]];
                    let d = x[j].as_f64() - self.means[[c, j]];
                    s -= 0.5 * ((two_pi * v).ln() + d * d / v);
                }
                s
            })
            .collect()
    }
}

impl<T: Scalar> Classifier<T> for GaussianNb {
    fn predict_one(&self, x: ArrayView1<'_, T>) -> usize {
        let lj = self.log_joint(x);
        let mut best = 0;
        for (k, &v) in lj.iter().enumerate() {
            if v > lj[best] || lj[best].is_nan() {
                best = k;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn separated_blobs_are_classified() {
        // Centres 8 apart with unit variance: the Bayes error is
        // Phi(-4) ~ 3e-5, so 0.99 leaves ample room for sampling noise.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 2000;
        let mut x = Array2::<f64>::zeros((n, 2));
        let mut y = vec![0; n];
        for i in 0..n {
            let c = i % 2;
            let off = if c == 0 { -4.0 } else { 4.0 };
            x[[i, 0]] = off + rng.sample::<f64, _>(StandardNormal);
            x[[i, 1]] = rng.sample::<f64, _>(StandardNormal);
            y[i] = c;
        }
        let m = GaussianNb::fit(x.view(), &y, 2).unwrap();
        let p = Classifier::<f64>::predict(&m, x.view());
        let acc = p.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / n as f64;
        assert!(acc >= 0.99, "accuracy {acc}");
    }
}
