//! Moments, tail statistics and distribution distances.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let n = T::from_usize(xs.len())?;
    Some(xs.iter().copied().sum::<T>() / n)
}

/// Population variance (divides by n).
pub fn variance<T: Scalar>(xs: &[T]) -> Option<T> {
    let m = mean(xs)?;
    let n = T::from_usize(xs.len())?;
    Some(xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / n)
}

pub fn std_dev<T: Scalar>(xs: &[T]) -> Option<T> {
    variance(xs).map(|v| v.sqrt())
}

/// Sample excess kurtosis, `m4 / m2^2 - 3`, without small-sample bias correction.
pub fn excess_kurtosis<T: Scalar>(xs: &[T]) -> Result<T> {
    if xs.len() < 4 {
        return Err(Error::Degenerate(format!(
            "kurtosis needs at least 4 values, got {}",
            xs.len()
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("kurtosis input"));
    }
    let m = mean(xs).expect("non-empty");
    let n = T::of(xs.len() as f64);
    let (mut m2, mut m4) = (T::zero(), T::zero());
    for &x in xs {
        let d2 = (x - m) * (x - m);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if m2 <= T::zero() {
        return Err(Error::Degenerate("kurtosis of zero-variance data".into()));
    }
    Ok(m4 / (m2 * m2) - T::of(3.0))
}

/// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
///
/// Returns 0 when either sample is empty.
pub fn ks_statistic<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    if xs.is_empty() || ys.is_empty() {
        return T::zero();
    }
    let mut a: Vec<T> = xs.to_vec();
    let mut b: Vec<T> = ys.to_vec();
    let cmp = |p: &T, q: &T| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal);
    a.sort_by(cmp);
    b.sort_by(cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    T::of(best)
}

/// What to do with a feature whose training variance is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstantPolicy {
    /// Remove the column from the transformed output.
    Drop,
    /// Keep the column, centring it and using a unit scale.
    UnitScale,
}

/// Per-column z-score parameters fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns present in the transformed output, in order.
    pub kept: Vec<usize>,
    /// Columns removed because their training variance was zero.
    pub dropped: Vec<usize>,
}

impl ZScoreParams {
    pub fn fit<T: Scalar>(rows: ArrayView2<'_, T>, policy: ConstantPolicy) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::Degenerate("z-score fit on zero rows".into()));
        }
        let n = rows.nrows() as f64;
        let mut means = Vec::with_capacity(rows.ncols());
        let mut stds = Vec::with_capacity(rows.ncols());
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for (j, col) in rows.axis_iter(Axis(1)).enumerate() {
            let m = col.iter().map(|x| x.as_f64()).sum::<f64>() / n;
            let var = col.iter().map(|x| (x.as_f64() - m).powi(2)).sum::<f64>() / n;
            if !m.is_finite() || !var.is_finite() {
                return Err(Error::NonFinite("z-score fit"));
            }
            let sd = var.sqrt();
            means.push(m);
            if sd > 0.0 {
                stds.push(sd);
                kept.push(j);
            } else {
                stds.push(1.0);
                match policy {
                    ConstantPolicy::Drop => {
                        log::warn!("feature {j} has zero variance in the training split; dropped");
                        dropped.push(j);
                    }
                    ConstantPolicy::UnitScale => kept.push(j),
                }
            }
        }
        Ok(Self {
            means,
            stds,
            kept,
            dropped,
        })
    }

    pub fn input_width(&self) -> usize {
        self.means.len()
    }

    pub fn output_width(&self) -> usize {
        self.kept.len()
    }

    pub fn apply<T: Scalar>(&self, rows: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if rows.ncols() != self.input_width() {
            return Err(Error::Shape(format!(
                "z-score params fitted on {} columns, got {}",
                self.input_width(),
                rows.ncols()
            )));
        }
        let mut out = Array2::zeros((rows.nrows(), self.kept.len()));
        for (k, &j) in self.kept.iter().enumerate() {
            let (m, s) = (T::of(self.means[j]), T::of(self.stds[j]));
            let col = rows.column(j);
            out.column_mut(k).zip_mut_with(&col, |o, &x| *o = (x - m) / s);
        }
        Ok(out)
    }

    /// Maps transformed columns back to original units (kept columns only).
    pub fn invert<T: Scalar>(&self, z: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if z.ncols() != self.kept.len() {
            return Err(Error::Shape(format!(
                "expected {} transformed columns, got {}",
                self.kept.len(),
                z.ncols()
            )));
        }
        let mut out = z.to_owned();
        for (k, &j) in self.kept.iter().enumerate() {
            let (m, s) = (T::of(self.means[j]), T::of(self.stds[j]));
            out.column_mut(k).mapv_inplace(|x| x * s + m);
        }
        Ok(out)
    }
}

/// Column means of a matrix.
pub fn column_means<T: Scalar>(rows: ArrayView2<'_, T>) -> Array1<T> {
    rows.mean_axis(Axis(0))
        .unwrap_or_else(|| Array1::zeros(rows.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn kurtosis_two_point_is_minus_two() {
        let xs = [-1.0f64, 1.0, -1.0, 1.0, 1.0, -1.0];
        assert!((excess_kurtosis(&xs).unwrap() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_uniform_and_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let uni: Vec<f64> = (0..200_000).map(|_| rng.gen::<f64>()).collect();
        assert!((excess_kurtosis(&uni).unwrap() + 1.2).abs() < 0.05);
        let nor: Vec<f64> = (0..1_000_000).map(|_| rng.sample(StandardNormal)).collect();
        assert!(excess_kurtosis(&nor).unwrap().abs() < 0.05);
    }

    #[test]
    fn kurtosis_rejects_degenerate() {
        assert!(excess_kurtosis(&[1.0f64, 2.0, 3.0]).is_err());
        assert!(excess_kurtosis(&[2.0f64; 10]).is_err());
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let xs = [1.0f64, 2.0, 3.0, 3.0];
        assert_eq!(ks_statistic(&xs, &xs), 0.0);
        assert_eq!(ks_statistic(&xs, &[10.0, 11.0]), 1.0);
    }

    #[test]
    fn ks_same_normal_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| rng.sample(StandardNormal)).collect();
        assert!(ks_statistic(&a, &b) < 0.03);
    }

    #[test]
    fn zscore_analytic_values() {
        let x = array![[1.0f64], [2.0], [3.0]];
        let p = ZScoreParams::fit(x.view(), ConstantPolicy::Drop).unwrap();
        let z = p.apply(x.view()).unwrap();
        let want = 1.224_744_871_391_589;
        assert!((z[[0, 0]] + want).abs() < 1e-12);
        assert!(z[[1, 0]].abs() < 1e-12);
        assert!((z[[2, 0]] - want).abs() < 1e-12);
    }

    #[test]
    fn zscore_drops_constant_columns() {
        let x = array![[1.0f64, 5.0], [2.0, 5.0], [4.0, 5.0]];
        let p = ZScoreParams::fit(x.view(), ConstantPolicy::Drop).unwrap();
        assert_eq!(p.kept, vec![0]);
        assert_eq!(p.dropped, vec![1]);
        assert_eq!(p.apply(x.view()).unwrap().ncols(), 1);
        let keep = ZScoreParams::fit(x.view(), ConstantPolicy::UnitScale).unwrap();
        let z = keep.apply(x.view()).unwrap();
        assert_eq!(z.column(1).to_vec(), vec![0.0, 0.0, 0.0]);
    }

    proptest::proptest! {
        #[test]
        fn zscore_round_trip(rows in proptest::collection::vec(
            proptest::collection::vec(-1e4f64..1e4, 3), 2..40)) {
            let n = rows.len();
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let x = Array2::from_shape_vec((n, 3), flat).unwrap();
            let p = ZScoreParams::fit(x.view(), ConstantPolicy::UnitScale).unwrap();
            let z = p.apply(x.view()).unwrap();
            let back = p.invert(z.view()).unwrap();
            for (a, b) in x.iter().zip(back.iter()) {
                proptest::prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
            }
            for j in 0..3 {
                if !p.dropped.contains(&j) && p.stds[j] > 0.0 {
                    let col: Vec<f64> = z.column(j).to_vec();
                    proptest::prop_assert!(mean(&col).unwrap().abs() < 1e-9);
                }
            }
        }
    }
}
