use ndarray::{Array2, ArrayView1, ArrayView2};

use super::{argmax_ties_low, check_fit, Classifier};
use crate::error::{invalid, Result};
use crate::Scalar;

/// Brute-force Euclidean k-nearest-neighbours.
///
/// Neighbours at equal distance are ordered by smaller label index, and vote
/// ties also go to the smaller label.
#[derive(Debug, Clone)]
pub struct Knn<T> {
    k: usize,
    n_classes: usize,
    x: Array2<T>,
    y: Vec<usize>,
}

impl<T: Scalar> Knn<T> {
    pub fn fit(x: ArrayView2<'_, T>, y: &[usize], n_classes: usize, k: usize) -> Result<Self> {
        check_fit(x, y, n_classes)?;
        if k == 0 || k > x.nrows() {
            return Err(invalid(
                "k",
                format!("k = {k} must be in 1..={} training rows", x.nrows()),
            ));
        }
        Ok(Self {
            k,
            n_classes,
            x: x.to_owned(),
            y: y.to_vec(),
        })
    }
}

impl<T: Scalar> Classifier<T> for Knn<T> {
    fn predict_one(&self, q: ArrayView1<'_, T>) -> usize {
        let mut d: Vec<(T, usize)> = self
            .x
            .rows()
            .into_iter()
            .zip(&self.y)
            .map(|(r, &c)| {
                let s = r
                    .iter()
                    .zip(q.iter())
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .sum::<T>();
                (s, c)
            })
            .collect();
        let cmp = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        };
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
        }
        let mut votes = vec![0usize; self.n_classes];
        for &(_, c) in &d[..self.k] {
            votes[c] += 1;
        }
        argmax_ties_low(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn k1_returns_training_label() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [5.0, 5.0]];
        let m = Knn::fit(x.view(), &[2, 0, 1], 3, 1).unwrap();
        assert_eq!(m.predict(x.view()), vec![2, 0, 1]);
    }

    #[test]
    fn equidistant_neighbours_prefer_smaller_label() {
        let x = array![[1.0], [-1.0]];
        let m = Knn::fit(x.view(), &[3, 1], 4, 1).unwrap();
        assert_eq!(m.predict_one(array![0.0].view()), 1);
    }

    #[test]
    fn k_larger_than_n_is_an_error() {
        let x = array![[1.0], [2.0]];
        assert!(Knn::fit(x.view(), &[0, 1], 2, 3).is_err());
    }
}
