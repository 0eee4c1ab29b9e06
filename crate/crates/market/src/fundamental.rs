//! Exogenous fundamental value series, noisy observation of it, and the
//! intraday volume profile used by VWAP.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result, SimError};
use crate::rng;
use crate::types::{round_ticks, SimTime, Ticks, NS_PER_MIN, NS_PER_SEC};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalSeries {
    times: Vec<SimTime>,
    values: Vec<Ticks>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    time_ns: u64,
    price_ticks: Ticks,
}

impl FundamentalSeries {
    /// Validates strictly increasing times and positive values. Errors name
    /// the 1-based data row.
    pub fn new(points: Vec<(SimTime, Ticks)>) -> Result<Self> {
        Self::validated(points, "fundamental")
    }

    fn validated(points: Vec<(SimTime, Ticks)>, file: &str) -> Result<Self> {
        let bad = |row: usize, reason: String| SimError::Data {
            file: file.to_string(),
            row,
            reason,
        };
        if points.is_empty() {
            return Err(bad(0, "series is empty".into()));
        }
        for (i, &(t, v)) in points.iter().enumerate() {
            if v <= 0 {
                return Err(bad(i + 1, format!("price_ticks must be positive, got {v}")));
            }
            if i > 0 && t <= points[i - 1].0 {
                return Err(bad(i + 1, format!("time_ns {} not after previous {}", t.0, points[i - 1].0 .0)));
            }
        }
        let (times, values) = points.into_iter().unzip();
        Ok(Self { times, values })
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, &path.display().to_string())
    }

    pub fn read_csv<R: Read>(input: R, name: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let mut points = Vec::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| SimError::Data {
                file: name.to_string(),
                row: i + 1,
                reason: e.to_string(),
            })?;
            points.push((SimTime(row.time_ns), row.price_ticks));
        }
        Self::validated(points, name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (t, v) in self.iter() {
            w.serialize(Row {
                time_ns: t.0,
                price_ticks: v,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn first_time(&self) -> SimTime {
        self.times[0]
    }

    pub fn last_time(&self) -> SimTime {
        *self.times.last().expect("non-empty")
    }

    pub fn last_value(&self) -> Ticks {
        *self.values.last().expect("non-empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (SimTime, Ticks)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    pub fn values(&self) -> &[Ticks] {
        &self.values
    }

    pub fn covers(&self, start: SimTime, end: SimTime) -> bool {
        self.first_time() <= start && self.last_time() >= end
    }

    /// Value at the greatest grid time not after `t`.
    pub fn value_at(&self, t: SimTime) -> Result<Ticks> {
        let n = self.times.partition_point(|&x| x <= t);
        if n == 0 {
            return Err(SimError::Fundamental(format!(
                "{t} precedes first point {}",
                self.first_time()
            )));
        }
        Ok(self.values[n - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservationModel {
    /// Noise variance in ticks².
    pub sigma_n: f64,
}

impl Default for ObservationModel {
    fn default() -> Self {
        Self { sigma_n: 50.0 }
    }
}

impl ObservationModel {
    pub const EXACT: ObservationModel = ObservationModel { sigma_n: 0.0 };
}

/// `r̂_t = r_t + N(0, σ_n)`, rounded to ticks.
pub fn observe<R: Rng + ?Sized>(
    series: &FundamentalSeries,
    t: SimTime,
    model: ObservationModel,
    rng: &mut R,
) -> Result<Ticks> {
    if !(model.sigma_n >= 0.0) {
        return Err(config_err("sigma_n", "must be non-negative"));
    }
    let r = series.value_at(t)?;
    if model.sigma_n == 0.0 {
        return Ok(r);
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(r + round_ticks(model.sigma_n.sqrt() * z))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OuParams {
    pub mean_ticks: f64,
    /// Per second.
    pub reversion_rate: f64,
    /// Ticks per square-root second.
    pub vol: f64,
    pub dt_ns: u64,
    /// Starting value of the first day; `None` starts at the mean.
    pub initial_ticks: Option<f64>,
}

impl Default for OuParams {
    fn default() -> Self {
        Self {
            mean_ticks: 100_000.0,
            reversion_rate: 1e-4,
            vol: 0.2,
            dt_ns: NS_PER_SEC,
            initial_ticks: None,
        }
    }
}

impl OuParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.reversion_rate >= 0.0) {
            return Err(config_err("fundamental.reversion_rate", "must be >= 0"));
        }
        if !(self.vol >= 0.0) {
            return Err(config_err("fundamental.vol", "must be >= 0"));
        }
        if self.dt_ns == 0 {
            return Err(config_err("fundamental.dt_ns", "must be positive"));
        }
        if !(self.mean_ticks > 0.0) {
            return Err(config_err("fundamental.mean_ticks", "must be positive"));
        }
        Ok(())
    }

    /// Exact one-step transition `(decay, noise_std)` for step `dt` seconds.
    fn step(&self, dt: f64) -> (f64, f64) {
        let th = self.reversion_rate;
        if th == 0.0 {
            (1.0, self.vol * dt.sqrt())
        } else {
            let decay = (-th * dt).exp();
            (decay, self.vol * ((1.0 - (-2.0 * th * dt).exp()) / (2.0 * th)).sqrt())
        }
    }
}

/// Ornstein-Uhlenbeck path on the grid `start, start+dt, …` up to and
/// including `end`. Values are clamped to at least one tick.
pub fn generate_ou(
    params: &OuParams,
    start: SimTime,
    end: SimTime,
    initial: f64,
    rng: &mut impl Rng,
) -> Result<(FundamentalSeries, f64)> {
    params.validate()?;
    if end < start {
        return Err(config_err("session", "end before start"));
    }
    let (decay, noise) = params.step(params.dt_ns as f64 / NS_PER_SEC as f64);
    let mut x = initial;
    let mut points = Vec::with_capacity(((end.0 - start.0) / params.dt_ns + 2) as usize);
    let mut t = start.0;
    loop {
        points.push((SimTime(t), round_ticks(x).max(1)));
        if t >= end.0 {
            break;
        }
        let z: f64 = StandardNormal.sample(rng);
        x = params.mean_ticks + (x - params.mean_ticks) * decay + noise * z;
        t = (t + params.dt_ns).min(end.0);
    }
    Ok((FundamentalSeries::new(points)?, x))
}

/// One series per day; each day resumes from the previous day's end state.
pub fn generate_ou_days(
    params: &OuParams,
    start: SimTime,
    end: SimTime,
    days: u32,
    seed: u64,
) -> Result<Vec<FundamentalSeries>> {
    let mut rng = rng::stream(seed, rng::FUNDAMENTAL_STREAM);
    let mut x = params.initial_ticks.unwrap_or(params.mean_ticks);
    let mut out = Vec::with_capacity(days as usize);
    for _ in 0..days {
        let (series, end_state) = generate_ou(params, start, end, x, &mut rng)?;
        x = end_state;
        out.push(series);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeProfile {
    pub start: SimTime,
    pub bucket_ns: u64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BucketRow {
    bucket_index: usize,
    weight: f64,
}

impl VolumeProfile {
    pub const HALF_HOUR_NS: u64 = 30 * NS_PER_MIN;

    /// Normalises `weights` to sum to one.
    pub fn new(start: SimTime, bucket_ns: u64, weights: Vec<f64>) -> Result<Self> {
        if bucket_ns == 0 {
            return Err(config_err("volume_profile.bucket_ns", "must be positive"));
        }
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(config_err("volume_profile.weights", "need finite non-negative weights"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(config_err("volume_profile.weights", "all weights are zero"));
        }
        Ok(Self {
            start,
            bucket_ns,
            weights: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    /// Thirteen half-hour buckets, heavier at both ends.
    pub fn u_shape(open: SimTime) -> Self {
        let weights = (0..13)
            .map(|i| {
                let z = (i as f64 - 6.0) / 6.0;
                1.0 + 2.0 * z * z
            })
            .collect();
        Self::new(open, Self::HALF_HOUR_NS, weights).expect("valid")
    }

    pub fn uniform(open: SimTime, buckets: usize) -> Self {
        Self::new(open, Self::HALF_HOUR_NS, vec![1.0; buckets]).expect("valid")
    }

    pub fn load_csv(path: &Path, open: SimTime) -> Result<Self> {
        let name = path.display().to_string();
        let mut reader = csv::Reader::from_path(path)?;
        let mut weights = Vec::new();
        for (i, row) in reader.deserialize::<BucketRow>().enumerate() {
            let row = row.map_err(|e| SimError::Data {
                file: name.clone(),
                row: i + 1,
                reason: e.to_string(),
            })?;
            if row.bucket_index != i {
                return Err(SimError::Data {
                    file: name,
                    row: i + 1,
                    reason: format!("expected bucket_index {i}, got {}", row.bucket_index),
                });
            }
            weights.push(row.weight);
        }
        Self::new(open, Self::HALF_HOUR_NS, weights)
    }

    /// Weight of the bucket containing `t`; zero outside the profile.
    pub fn weight_at(&self, t: SimTime) -> f64 {
        if t < self.start {
            return 0.0;
        }
        let i = ((t.0 - self.start.0) / self.bucket_ns) as usize;
        self.weights.get(i).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn csv_validation_names_rows() {
        let ok = FundamentalSeries::read_csv("time_ns,price_ticks\n0,100\n5,101\n".as_bytes(), "f").unwrap();
        assert_eq!(ok.len(), 2);
        let dup = FundamentalSeries::read_csv("time_ns,price_ticks\n0,100\n0,101\n".as_bytes(), "f");
        assert!(matches!(dup, Err(SimError::Data { row: 2, .. })));
        let neg = FundamentalSeries::read_csv("time_ns,price_ticks\n0,-1\n".as_bytes(), "f");
        assert!(matches!(neg, Err(SimError::Data { row: 1, .. })));
        assert!(FundamentalSeries::read_csv("time_ns,price_ticks\n".as_bytes(), "f").is_err());
        assert!(FundamentalSeries::read_csv("".as_bytes(), "f").is_err());
    }

    #[test]
    fn step_interpolation() {
        let s = FundamentalSeries::new(vec![(SimTime(10), 100), (SimTime(20), 105)]).unwrap();
        assert!(s.value_at(SimTime(9)).is_err());
        assert_eq!(s.value_at(SimTime(10)).unwrap(), 100);
        assert_eq!(s.value_at(SimTime(19)).unwrap(), 100);
        assert_eq!(s.value_at(SimTime(20)).unwrap(), 105);
        assert_eq!(s.value_at(SimTime(99)).unwrap(), 105);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(observe(&s, SimTime(15), ObservationModel::EXACT, &mut rng).unwrap(), 100);
    }

    #[test]
    fn zero_vol_decays_to_mean() {
        let p = OuParams {
            mean_ticks: 1000.0,
            reversion_rate: 0.01,
            vol: 0.0,
            ..OuParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (s, _) = generate_ou(&p, SimTime(0), SimTime::from_secs(100), 1000.0, &mut rng).unwrap();
        assert!(s.values().iter().all(|&v| v == 1000));
        let (s, _) = generate_ou(&p, SimTime(0), SimTime::from_secs(1000), 2000.0, &mut rng).unwrap();
        let v = s.values();
        assert_eq!(v[0], 2000);
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
        let expect = 1000.0 + 1000.0 * (-0.01f64 * 1000.0).exp();
        assert!((*v.last().unwrap() as f64 - expect).abs() <= 0.5);
    }

    #[test]
    fn ou_grid_and_determinism() {
        let p = OuParams::default();
        let a = generate_ou_days(&p, SimTime::from_hm(9, 30), SimTime::from_hm(16, 0), 2, 5).unwrap();
        let b = generate_ou_days(&p, SimTime::from_hm(9, 30), SimTime::from_hm(16, 0), 2, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].len(), 23_401);
        assert!(a[0].covers(SimTime::from_hm(9, 30), SimTime::from_hm(16, 0)));
    }

    #[test]
    fn u_shape_profile() {
        let p = VolumeProfile::u_shape(SimTime(0));
        assert_eq!(p.weights.len(), 13);
        assert!((p.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.weights[0] > p.weights[6] && p.weights[12] > p.weights[6]);
        assert_eq!(p.weights[0], p.weights[12]);
        assert_eq!(p.weight_at(SimTime(VolumeProfile::HALF_HOUR_NS * 13)), 0.0);
    }
}
