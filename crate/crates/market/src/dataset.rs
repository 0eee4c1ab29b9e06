//! Labelled per-order samples built from the order log and the L2 log.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::agents::Archetype;
use crate::error::{Result, SimError};
use crate::exchange::{L2Snapshot, OrderAction, OrderEvent, L2_DEPTH};
use crate::rng;
use crate::types::{AgentId, Side, SimTime, Ticks};
use lob_arena_core::stats::{ConstantPolicy, ZScoreParams};

pub const N_FEATURES: usize = 23;
/// Leading book-state columns shared by the classifier and the cloners.
pub const N_BOOK_FEATURES: usize = 4 * L2_DEPTH;
pub const DIR: usize = 20;
pub const PRICE: usize = 21;
pub const SIZE: usize = 22;

pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(N_FEATURES);
    for block in ["ask_p", "ask_v", "bid_p", "bid_v"] {
        for i in 1..=L2_DEPTH {
            names.push(format!("{block}{i}"));
        }
    }
    names.extend(["dir", "price", "size"].map(String::from));
    names
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: [f64; N_FEATURES],
    pub label: Archetype,
    pub day: u32,
    pub time: SimTime,
}

impl Sample {
    pub fn side(&self) -> Side {
        if self.features[DIR] > 0.0 {
            Side::Buy
        } else {
            Side::Sell
        }
    }

    /// Cloning target: order price and signed size.
    pub fn action(&self) -> [f64; 2] {
        [self.features[PRICE], self.features[DIR] * self.features[SIZE]]
    }

    pub fn book(&self) -> &[f64] {
        &self.features[..N_BOOK_FEATURES]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractStats {
    pub orders: usize,
    pub cancels: usize,
    pub samples: usize,
    pub no_prior_snapshot: usize,
    pub no_reference_price: usize,
}

impl ExtractStats {
    pub fn add(&mut self, o: &ExtractStats) {
        self.orders += o.orders;
        self.cancels += o.cancels;
        self.samples += o.samples;
        self.no_prior_snapshot += o.no_prior_snapshot;
        self.no_reference_price += o.no_reference_price;
    }
}

/// Price used for empty levels: the last trade, else any touch price.
fn reference_price(snap: &L2Snapshot) -> Option<Ticks> {
    snap.last_trade.or(snap.best_bid()).or(snap.best_ask())
}

fn level(prices: &[Ticks], volumes: &[u64], i: usize, fill: Ticks) -> (f64, f64) {
    if volumes[i] > 0 {
        (prices[i] as f64, volumes[i] as f64)
    } else {
        (fill as f64, 0.0)
    }
}

/// One sample per LIMIT or MARKET row, joined to the last L2 row strictly
/// before the order's receipt time. Both inputs must be time-sorted.
pub fn extract_samples(orders: &[OrderEvent], l2: &[L2Snapshot], day: u32) -> (Vec<Sample>, ExtractStats) {
    let mut stats = ExtractStats::default();
    let mut out = Vec::new();
    for o in orders {
        if o.action == OrderAction::Cancel {
            stats.cancels += 1;
            continue;
        }
        stats.orders += 1;
        let n = l2.partition_point(|s| s.time < o.time);
        if n == 0 {
            stats.no_prior_snapshot += 1;
            continue;
        }
        let snap = &l2[n - 1];
        let Some(fill) = reference_price(snap) else {
            stats.no_reference_price += 1;
            continue;
        };
        let mut f = [0.0; N_FEATURES];
        for i in 0..L2_DEPTH {
            let (ap, av) = level(&snap.ask_prices, &snap.ask_volumes, i, fill);
            let (bp, bv) = level(&snap.bid_prices, &snap.bid_volumes, i, fill);
            f[i] = ap;
            f[L2_DEPTH + i] = av;
            f[2 * L2_DEPTH + i] = bp;
            f[3 * L2_DEPTH + i] = bv;
        }
        f[DIR] = o.side.sign() as f64;
        f[PRICE] = match o.price {
            Some(p) => p as f64,
            None => match o.side {
                Side::Buy => f[0],
                Side::Sell => f[2 * L2_DEPTH],
            },
        };
        f[SIZE] = o.qty as f64;
        out.push(Sample {
            features: f,
            label: o.archetype,
            day,
            time: o.time,
        });
    }
    stats.samples = out.len();
    (out, stats)
}

pub fn class_counts(samples: &[Sample]) -> [usize; 4] {
    let mut c = [0; 4];
    for s in samples {
        c[s.label.index()] += 1;
    }
    c
}

/// Down-samples every class to the smallest class count, uniformly without
/// replacement. Output keeps the input order.
pub fn balance_downsample(samples: &[Sample], seed: u64) -> Result<Vec<Sample>> {
    let counts = class_counts(samples);
    if let Some(a) = Archetype::ALL.iter().find(|a| counts[a.index()] == 0) {
        return Err(SimError::Dataset(format!("class {} has no samples", a.name())));
    }
    let keep_n = *counts.iter().min().expect("four classes");
    let mut rng = rng::stream(seed, rng::DATASET_STREAM);
    let mut keep = vec![false; samples.len()];
    for a in Archetype::ALL {
        let mut idx: Vec<usize> = (0..samples.len()).filter(|&i| samples[i].label == a).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..keep_n] {
            keep[i] = true;
        }
    }
    Ok(samples
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(s, _)| s.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaySplit {
    pub train_days: Vec<u32>,
    pub test_days: Vec<u32>,
}

/// Chronological split: the first `train_days` distinct days train, the
/// next `test_days` test; later days are unused.
pub fn split_by_day(samples: &[Sample], train_days: usize, test_days: usize) -> Result<(Vec<Sample>, Vec<Sample>, DaySplit)> {
    let days: Vec<u32> = samples.iter().map(|s| s.day).collect::<BTreeSet<_>>().into_iter().collect();
    if days.len() < train_days + test_days {
        return Err(SimError::Dataset(format!(
            "{} distinct days, need {train_days} train + {test_days} test",
            days.len()
        )));
    }
    let split = DaySplit {
        train_days: days[..train_days].to_vec(),
        test_days: days[train_days..train_days + test_days].to_vec(),
    };
    let pick = |set: &[u32]| samples.iter().filter(|s| set.contains(&s.day)).cloned().collect::<Vec<_>>();
    Ok((pick(&split.train_days), pick(&split.test_days), split))
}

pub fn feature_matrix(samples: &[Sample]) -> Array2<f64> {
    let mut m = Array2::zeros((samples.len(), N_FEATURES));
    for (i, s) in samples.iter().enumerate() {
        for j in 0..N_FEATURES {
            m[[i, j]] = s.features[j];
        }
    }
    m
}

pub fn book_matrix(samples: &[Sample]) -> Array2<f64> {
    let mut m = Array2::zeros((samples.len(), N_BOOK_FEATURES));
    for (i, s) in samples.iter().enumerate() {
        for (j, v) in s.book().iter().enumerate() {
            m[[i, j]] = *v;
        }
    }
    m
}

pub fn action_matrix(samples: &[Sample]) -> Array2<f64> {
    let mut m = Array2::zeros((samples.len(), 2));
    for (i, s) in samples.iter().enumerate() {
        let a = s.action();
        m[[i, 0]] = a[0];
        m[[i, 1]] = a[1];
    }
    m
}

pub fn labels(samples: &[Sample]) -> Vec<usize> {
    samples.iter().map(|s| s.label.index()).collect()
}

pub fn zscore_fit(train: &[Sample]) -> Result<ZScoreParams> {
    Ok(ZScoreParams::fit(feature_matrix(train).view(), ConstantPolicy::Drop)?)
}

pub fn zscore_apply(params: &ZScoreParams, samples: &[Sample]) -> Result<Array2<f64>> {
    Ok(params.apply(feature_matrix(samples).view())?)
}

pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = (0..N_FEATURES).map(|j| format!("f{j:02}")).collect();
    h.extend(["label", "day", "time_ns"].map(String::from));
    h
}

pub fn write_samples<W: Write>(out: W, samples: &[Sample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for s in samples {
        let mut rec: Vec<String> = s.features.iter().map(|v| format!("{v}")).collect();
        rec.push(s.label.index().to_string());
        rec.push(s.day.to_string());
        rec.push(s.time.0.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(input: R, file: &str) -> Result<Vec<Sample>> {
    let bad = |row: usize, reason: String| SimError::Data {
        file: file.to_string(),
        row,
        reason,
    };
    let mut rd = csv::Reader::from_reader(input);
    if rd.headers()?.iter().ne(csv_header().iter().map(String::as_str)) {
        return Err(bad(0, "unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| bad(row, e.to_string()))?;
        if rec.len() != N_FEATURES + 3 {
            return Err(bad(row, format!("{} columns", rec.len())));
        }
        let mut features = [0.0; N_FEATURES];
        for (j, f) in features.iter_mut().enumerate() {
            *f = rec[j].parse().map_err(|e| bad(row, format!("f{j:02}: {e}")))?;
        }
        let label: usize = rec[N_FEATURES].parse().map_err(|e| bad(row, format!("label: {e}")))?;
        out.push(Sample {
            features,
            label: Archetype::from_index(label).ok_or_else(|| bad(row, format!("label {label}")))?,
            day: rec[N_FEATURES + 1].parse().map_err(|e| bad(row, format!("day: {e}")))?,
            time: SimTime(rec[N_FEATURES + 2].parse().map_err(|e| bad(row, format!("time_ns: {e}")))?),
        });
    }
    Ok(out)
}

pub fn load_samples(path: &Path) -> Result<Vec<Sample>> {
    let f = std::fs::File::open(path)
        .map_err(|e| SimError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read_samples(std::io::BufReader::new(f), &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub split: DaySplit,
    pub seed: u64,
    pub extract: ExtractStats,
    pub train_counts_before: [usize; 4],
    pub test_counts_before: [usize; 4],
    pub train_counts_after: [usize; 4],
    pub test_counts_after: [usize; 4],
    /// Fitted on the balanced training split.
    pub zscore: ZScoreParams,
}

pub struct Dataset {
    /// Every sample of the split days, unbalanced.
    pub all: Vec<Sample>,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub manifest: DatasetManifest,
}

/// Extracts, splits by day, balances each split and fits the scaler.
pub fn build_dataset(
    days: &[(u32, Vec<OrderEvent>, Vec<L2Snapshot>)],
    train_days: usize,
    test_days: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut all = Vec::new();
    let mut extract = ExtractStats::default();
    for (day, orders, l2) in days {
        let (s, st) = extract_samples(orders, l2, *day);
        all.extend(s);
        extract.add(&st);
    }
    let (train_all, test_all, split) = split_by_day(&all, train_days, test_days)?;
    let train = balance_downsample(&train_all, seed)?;
    let test = balance_downsample(&test_all, rng::mix(seed, 1))?;
    let zscore = zscore_fit(&train)?;
    let manifest = DatasetManifest {
        class_names: Archetype::names(),
        feature_names: feature_names(),
        split: split.clone(),
        seed,
        extract,
        train_counts_before: class_counts(&train_all),
        test_counts_before: class_counts(&test_all),
        train_counts_after: class_counts(&train),
        test_counts_after: class_counts(&test),
        zscore,
    };
    let used: BTreeSet<u32> = split.train_days.iter().chain(&split.test_days).copied().collect();
    all.retain(|s| used.contains(&s.day));
    Ok(Dataset {
        all,
        train,
        test,
        manifest,
    })
}

/// Convenience for tests: the agent id is not part of a sample.
pub fn order(time: u64, agent: u32, archetype: Archetype, action: OrderAction, side: Side, price: Option<Ticks>, qty: u64) -> OrderEvent {
    OrderEvent {
        time: SimTime(time),
        agent: AgentId(agent),
        archetype,
        action,
        side,
        price,
        qty,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(t: u64, bid: Ticks, ask: Ticks, last: Option<Ticks>) -> L2Snapshot {
        L2Snapshot {
            time: SimTime(t),
            bid_prices: vec![bid, bid - 1, 0, 0, 0],
            bid_volumes: vec![5, 6, 0, 0, 0],
            ask_prices: vec![ask, 0, 0, 0, 0],
            ask_volumes: vec![7, 0, 0, 0, 0],
            last_trade: last,
        }
    }

    fn sample(label: Archetype, day: u32) -> Sample {
        Sample {
            features: [day as f64; N_FEATURES],
            label,
            day,
            time: SimTime(0),
        }
    }

    #[test]
    fn feature_layout() {
        let n = feature_names();
        assert_eq!(n.len(), 23);
        assert_eq!((n[0].as_str(), n[5].as_str(), n[10].as_str(), n[15].as_str()), ("ask_p1", "ask_v1", "bid_p1", "bid_v1"));
        assert_eq!((n[20].as_str(), n[21].as_str(), n[22].as_str()), ("dir", "price", "size"));
        assert_eq!(csv_header()[0], "f00");
        assert_eq!(csv_header()[25], "time_ns");
    }

    #[test]
    fn join_is_strictly_before() {
        let l2 = vec![snap(10, 100, 105, None), snap(20, 101, 104, Some(103))];
        let orders = vec![
            order(5, 1, Archetype::Background, OrderAction::Limit, Side::Buy, Some(99), 3),
            order(20, 1, Archetype::Background, OrderAction::Limit, Side::Buy, Some(100), 3),
            order(21, 1, Archetype::MarketTaker, OrderAction::Market, Side::Buy, None, 9),
            order(22, 1, Archetype::MarketMaker, OrderAction::Cancel, Side::Sell, Some(104), 2),
            order(23, 1, Archetype::DirectionalTrader, OrderAction::Market, Side::Sell, None, 4),
        ];
        let (s, st) = extract_samples(&orders, &l2, 0);
        assert_eq!(st.no_prior_snapshot, 1);
        assert_eq!(st.cancels, 1);
        assert_eq!(s.len(), 3);
        // order at t=20 sees the row from t=10
        assert_eq!(s[0].features[0], 105.0);
        assert_eq!(s[0].features[2 * L2_DEPTH], 100.0);
        // empty levels: no trade yet, falls back to the best bid
        assert_eq!(s[0].features[1], 100.0);
        assert_eq!(s[0].features[L2_DEPTH + 1], 0.0);
        // market buy priced at the best ask; pads use the last trade
        assert_eq!(s[1].features[PRICE], 104.0);
        assert_eq!(s[1].features[1], 103.0);
        assert_eq!(s[1].features[2 * L2_DEPTH + 2], 103.0);
        assert_eq!(s[1].action(), [104.0, 9.0]);
        // market sell priced at the best bid, negative signed size
        assert_eq!(s[2].features[PRICE], 101.0);
        assert_eq!(s[2].action(), [101.0, -4.0]);
    }

    #[test]
    fn balancing() {
        let mut v = Vec::new();
        for (a, n) in [(Archetype::MarketMaker, 10), (Archetype::MarketTaker, 4), (Archetype::DirectionalTrader, 4), (Archetype::Background, 4)] {
            v.extend(std::iter::repeat(sample(a, 0)).take(n));
        }
        let b = balance_downsample(&v, 1).unwrap();
        assert_eq!(class_counts(&b), [4; 4]);
        assert_eq!(b, balance_downsample(&v, 1).unwrap());
        let even: Vec<Sample> = v[6..].to_vec();
        assert_eq!(balance_downsample(&even, 3).unwrap(), even);
        let missing: Vec<Sample> = v[..14].to_vec();
        let err = balance_downsample(&missing, 1).unwrap_err();
        assert!(err.to_string().contains("DIRECTIONAL_TRADER"), "{err}");
    }

    #[test]
    fn day_split() {
        let v: Vec<Sample> = (0..5).map(|d| sample(Archetype::Background, d)).collect();
        let (tr, te, sp) = split_by_day(&v, 3, 2).unwrap();
        assert_eq!(sp.train_days, vec![0, 1, 2]);
        assert_eq!(sp.test_days, vec![3, 4]);
        assert_eq!((tr.len(), te.len()), (3, 2));
        assert!(split_by_day(&v[..4], 3, 2).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut s = sample(Archetype::MarketTaker, 2);
        s.features[5] = 0.1;
        s.time = SimTime(77);
        let mut buf = Vec::new();
        write_samples(&mut buf, &[s.clone()]).unwrap();
        assert_eq!(read_samples(&buf[..], "d").unwrap(), vec![s]);
    }
}
