use serde::{Deserialize, Serialize};

use super::{OrderIds, Strategy, EXCHANGE};
use crate::error::{config_err, Result};
use crate::fundamental::VolumeProfile;
use crate::kernel::{Agent, Ctx, Message};
use crate::types::{AgentId, Qty, Side, SimTime, NS_PER_MIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TakerConfig {
    pub parent_qty: Qty,
    pub window_ns: u64,
    pub n_slots: u32,
    /// Window starts are staggered by this much per taker.
    pub stagger_ns: u64,
}

impl Default for TakerConfig {
    fn default() -> Self {
        Self {
            parent_qty: 2_000,
            window_ns: 120 * NS_PER_MIN,
            n_slots: 24,
            stagger_ns: 45 * NS_PER_MIN,
        }
    }
}

impl TakerConfig {
    pub fn validate(&self, session: (SimTime, SimTime)) -> Result<()> {
        if self.parent_qty == 0 {
            return Err(config_err("taker.parent_qty", "must be positive"));
        }
        if self.n_slots == 0 {
            return Err(config_err("taker.n_slots", "must be >= 1"));
        }
        if self.window_ns == 0 || self.window_ns > session.1 .0 - session.0 .0 {
            return Err(config_err("taker.window_ns", "window must fit inside the session"));
        }
        Ok(())
    }

    /// Window of the `k`-th taker, wrapped so it always ends by the close.
    pub fn window(&self, k: usize, session: (SimTime, SimTime)) -> (SimTime, SimTime) {
        let room = session.1 .0 - session.0 .0 - self.window_ns;
        let offset = if room == 0 {
            0
        } else {
            (k as u64 * self.stagger_ns) % (room + 1)
        };
        let start = session.0.plus(offset);
        (start, start.plus(self.window_ns))
    }
}

fn slot_times(start: SimTime, end: SimTime, n: u32) -> Vec<SimTime> {
    let span = (end.0 - start.0) as u128;
    (0..n as u128)
        .map(|k| SimTime(start.0 + (k * span / n as u128) as u64))
        .collect()
}

/// Largest-remainder split of `total` by `weights`; leftover units go to the
/// largest fractional parts, earlier index first on ties.
pub fn apportion(total: Qty, weights: &[f64]) -> Option<Vec<Qty>> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return None;
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut sizes: Vec<Qty> = quotas.iter().map(|q| q.floor() as Qty).collect();
    let assigned: Qty = sizes.iter().sum();
    let mut left = total.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = quotas[i] - quotas[i].floor();
        let fj = quotas[j] - quotas[j].floor();
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        sizes[i] += 1;
        left -= 1;
    }
    Some(sizes)
}

pub fn twap_schedule(total: Qty, start: SimTime, end: SimTime, n: u32) -> Vec<(SimTime, Qty)> {
    let n = n.max(1);
    let base = total / n as Qty;
    let extra = (total % n as Qty) as usize;
    slot_times(start, end, n)
        .into_iter()
        .enumerate()
        .map(|(k, t)| (t, base + Qty::from(k < extra)))
        .collect()
}

/// Slot sizes follow the profile weight at each slot time; an all-zero
/// window falls back to the even split.
pub fn vwap_schedule(
    total: Qty,
    start: SimTime,
    end: SimTime,
    n: u32,
    profile: &VolumeProfile,
) -> Vec<(SimTime, Qty)> {
    let times = slot_times(start, end, n.max(1));
    let weights: Vec<f64> = times.iter().map(|&t| profile.weight_at(t)).collect();
    match apportion(total, &weights) {
        Some(sizes) => times.into_iter().zip(sizes).collect(),
        None => {
            log::warn!("vwap: profile has no weight in window, using even split");
            twap_schedule(total, start, end, n)
        }
    }
}

/// Works a parent order as market-order children on a fixed schedule.
pub struct TakerAgent {
    strategy: Strategy,
    side: Side,
    schedule: Vec<(SimTime, Qty)>,
    next: usize,
    ids: OrderIds,
}

impl TakerAgent {
    pub fn new(id: AgentId, strategy: Strategy, side: Side, schedule: Vec<(SimTime, Qty)>) -> Self {
        Self {
            strategy,
            side,
            schedule,
            next: 0,
            ids: OrderIds::new(id),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn schedule(&self) -> &[(SimTime, Qty)] {
        &self.schedule
    }
}

impl Agent for TakerAgent {
    fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        if let Some(&(t, _)) = self.schedule.first() {
            ctx.wakeup_at(t)?;
        }
        Ok(())
    }

    fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        let Some(&(_, qty)) = self.schedule.get(self.next) else {
            return Ok(());
        };
        self.next += 1;
        if qty > 0 {
            let order_id = self.ids.next_id();
            ctx.send(
                EXCHANGE,
                Message::MarketOrder {
                    order_id,
                    side: self.side,
                    qty,
                },
            )?;
        }
        if let Some(&(t, _)) = self.schedule.get(self.next) {
            ctx.wakeup_at(t)?;
        }
        Ok(())
    }

    fn on_message(&mut self, _from: AgentId, _msg: Message, _ctx: &mut Ctx<'_>) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(s: &[(SimTime, Qty)]) -> Vec<Qty> {
        s.iter().map(|x| x.1).collect()
    }

    #[test]
    fn twap_examples() {
        assert_eq!(sizes(&twap_schedule(100, SimTime(0), SimTime(400), 4)), vec![25; 4]);
        let s = twap_schedule(10, SimTime(0), SimTime(30), 3);
        assert_eq!(sizes(&s), vec![4, 3, 3]);
        let t: Vec<u64> = s.iter().map(|x| x.0 .0).collect();
        assert_eq!(t, vec![0, 10, 20]);
    }

    #[test]
    fn apportion_examples() {
        assert_eq!(apportion(100, &[0.4, 0.1, 0.1, 0.4]).unwrap(), vec![40, 10, 10, 40]);
        assert_eq!(apportion(7, &[0.5, 0.5]).unwrap(), vec![4, 3]);
        assert_eq!(apportion(10, &[1.0; 3]).unwrap(), vec![4, 3, 3]);
        assert!(apportion(5, &[0.0, 0.0]).is_none());
    }

    #[test]
    fn vwap_uniform_matches_twap_and_zero_falls_back() {
        let open = SimTime(0);
        let prof = VolumeProfile::uniform(open, 13);
        let end = SimTime(VolumeProfile::HALF_HOUR_NS * 4);
        assert_eq!(
            vwap_schedule(1000, open, end, 7, &prof),
            twap_schedule(1000, open, end, 7)
        );
        let late = SimTime(VolumeProfile::HALF_HOUR_NS * 20);
        let s = vwap_schedule(10, late, late.plus(30), 3, &prof);
        assert_eq!(s, twap_schedule(10, late, late.plus(30), 3));
    }

    #[test]
    fn windows_stay_in_session() {
        let cfg = TakerConfig::default();
        let session = (SimTime::from_hm(9, 30), SimTime::from_hm(16, 0));
        for k in 0..10 {
            let (a, b) = cfg.window(k, session);
            assert!(a >= session.0 && b <= session.1);
        }
    }
}
