//! Mid-price log returns and their tail statistics.

use serde::{Deserialize, Serialize};

use crate::exchange::L2Snapshot;
use crate::types::{div_round_half_away, SimTime, NS_PER_SEC};
use lob_arena_core::stats;

/// Mid price sampled every `step_ns` over `[open, close]`, carrying the last
/// two-sided mid forward. `None` until the book has first been two-sided.
pub fn sample_mids(rows: &[L2Snapshot], open: SimTime, close: SimTime, step_ns: u64) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(((close.0 - open.0) / step_ns + 1) as usize);
    let mut i = 0;
    let mut current: Option<f64> = None;
    let mut t = open.0;
    while t <= close.0 {
        while i < rows.len() && rows[i].time.0 <= t {
            if let (Some(b), Some(a)) = (rows[i].best_bid(), rows[i].best_ask()) {
                current = Some((a + b) as f64 / 2.0);
            }
            i += 1;
        }
        out.push(current);
        t += step_ns;
    }
    out
}

pub fn sample_mids_per_second(rows: &[L2Snapshot], open: SimTime, close: SimTime) -> Vec<Option<f64>> {
    sample_mids(rows, open, close, NS_PER_SEC)
}

/// Non-overlapping `ln(p[k+h]/p[k])` for `k = 0, h, 2h, …` within one session.
pub fn log_returns(mids: &[Option<f64>], horizon: usize) -> Vec<f64> {
    if horizon == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut k = 0;
    while k + horizon < mids.len() {
        if let (Some(p0), Some(p1)) = (mids[k], mids[k + horizon]) {
            if p0 > 0.0 && p1 > 0.0 {
                out.push((p1 / p0).ln());
            }
        }
        k += horizon;
    }
    out
}

/// Returns from several sessions, never bridging two of them.
pub fn pooled_log_returns(sessions: &[Vec<Option<f64>>], horizon: usize) -> Vec<f64> {
    sessions.iter().flat_map(|s| log_returns(s, horizon)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnReport {
    pub horizon: String,
    pub horizon_s: u64,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// Absent when fewer than four returns or zero variance.
    pub excess_kurtosis: Option<f64>,
}

impl ReturnReport {
    pub fn new(horizon_s: u64, xs: &[f64]) -> Self {
        let horizon = if horizon_s % 60 == 0 {
            format!("{}min", horizon_s / 60)
        } else {
            format!("{horizon_s}s")
        };
        let mean = stats::mean(xs).unwrap_or(0.0);
        let std = stats::std_dev(xs).unwrap_or(0.0);
        Self {
            horizon,
            horizon_s,
            n: xs.len(),
            mean,
            std,
            excess_kurtosis: stats::excess_kurtosis(xs).ok(),
        }
    }
}

/// Integer mid in ticks, rounded half away from zero.
pub fn mid_ticks(snap: &L2Snapshot) -> Option<i64> {
    Some(div_round_half_away(snap.best_bid()? + snap.best_ask()?, 2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn returns_examples() {
        let r = log_returns(&[Some(100.0), Some(101.0)], 1);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.00995033).abs() < 1e-8);
        assert!(log_returns(&[Some(5.0); 7], 2).iter().all(|&x| x == 0.0));
        assert!(log_returns(&[Some(5.0)], 1).is_empty());
        let pooled = pooled_log_returns(&[vec![Some(1.0), Some(2.0)], vec![Some(8.0), Some(8.0)]], 1);
        assert_eq!(pooled.len(), 2);
        assert!((pooled[0] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(pooled[1], 0.0);
        let gaps = log_returns(&[None, Some(1.0), Some(1.0), None], 1);
        assert_eq!(gaps, vec![0.0]);
    }

    #[test]
    fn carry_forward_sampling() {
        let snap = |t: u64, b: i64, a: i64| L2Snapshot {
            time: SimTime(t),
            bid_prices: vec![b, 0, 0, 0, 0],
            bid_volumes: vec![u64::from(b > 0), 0, 0, 0, 0],
            ask_prices: vec![a, 0, 0, 0, 0],
            ask_volumes: vec![u64::from(a > 0), 0, 0, 0, 0],
            last_trade: None,
        };
        let rows = vec![snap(5, 100, 0), snap(10, 100, 102), snap(25, 0, 102), snap(31, 104, 106)];
        let m = sample_mids(&rows, SimTime(0), SimTime(40), 10);
        assert_eq!(m, vec![None, Some(101.0), Some(101.0), Some(101.0), Some(105.0)]);
    }

    #[test]
    fn report_fields() {
        let r = ReturnReport::new(60, &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(r.horizon, "1min");
        assert_eq!(r.n, 4);
        assert_eq!(r.excess_kurtosis, Some(-2.0));
        assert_eq!(ReturnReport::new(600, &[]).excess_kurtosis, None);
    }
}
