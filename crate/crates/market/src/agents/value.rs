use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sampling, OrderIds, EXCHANGE};
use crate::error::{config_err, Result};
use crate::exchange::L2Snapshot;
use crate::fundamental::{observe, FundamentalSeries, ObservationModel};
use crate::kernel::{Agent, Ctx, Message};
use crate::rng::SimRng;
use crate::types::{AgentId, Qty, Side, Ticks, NS_PER_SEC};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValueConfig {
    /// Mean inter-arrival in nanoseconds.
    pub lambda_a_ns: f64,
    pub delta_s: u32,
    pub q: Qty,
    pub xi: f64,
    pub sigma_n: f64,
}

impl Default for ValueConfig {
    fn default() -> Self {
        Self {
            lambda_a_ns: 60.0 * NS_PER_SEC as f64,
            delta_s: 2,
            q: 100,
            xi: 0.5,
            sigma_n: ObservationModel::default().sigma_n,
        }
    }
}

impl ValueConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_a_ns > 0.0) {
            return Err(config_err("value.lambda_a_ns", "must be positive"));
        }
        if self.delta_s < 1 {
            return Err(config_err("value.delta_s", "must be >= 1"));
        }
        if self.q == 0 {
            return Err(config_err("value.q", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(config_err("value.xi", "must lie in [0, 1]"));
        }
        if !(self.sigma_n >= 0.0) {
            return Err(config_err("value.sigma_n", "must be >= 0"));
        }
        Ok(())
    }
}

/// Order side and limit price for a given offset `delta`. The offset is cut
/// to `s − 1` whenever it would reach the opposite touch.
pub fn value_price(bid: Ticks, ask: Ticks, mid: Ticks, r_hat: Ticks, delta: Ticks) -> (Side, Ticks) {
    let spread = ask - bid;
    let delta = if delta >= spread { spread - 1 } else { delta };
    if mid < r_hat {
        (Side::Buy, bid + delta)
    } else {
        (Side::Sell, ask - delta)
    }
}

/// Draws `X` and `Δ`, then prices the order. `None` on a one-sided book.
pub fn value_decision<R: Rng + ?Sized>(
    cfg: &ValueConfig,
    snap: &L2Snapshot,
    r_hat: Ticks,
    rng: &mut R,
) -> Option<(Side, Ticks)> {
    let (bid, ask, mid) = (snap.best_bid()?, snap.best_ask()?, snap.mid()?);
    let spread = ask - bid;
    let delta = if rng.gen_bool(cfg.xi) {
        rng.gen_range(0..=spread * cfg.delta_s as Ticks)
    } else {
        0
    };
    Some(value_price(bid, ask, mid, r_hat, delta))
}

/// Places one passive limit order per wakeup toward its fundamental estimate.
pub struct ValueAgent {
    rng: SimRng,
    cfg: ValueConfig,
    fundamental: Arc<FundamentalSeries>,
    ids: OrderIds,
}

impl ValueAgent {
    pub fn new(id: AgentId, cfg: ValueConfig, fundamental: Arc<FundamentalSeries>, rng: SimRng) -> Self {
        Self {
            rng,
            cfg,
            fundamental,
            ids: OrderIds::new(id),
        }
    }

    fn schedule_next(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        let gap = sampling::exp_interarrival_ns(self.cfg.lambda_a_ns, &mut self.rng)?;
        ctx.wakeup_at(ctx.now().plus(gap))?;
        Ok(())
    }
}

impl Agent for ValueAgent {
    fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        self.schedule_next(ctx)
    }

    fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        ctx.send(EXCHANGE, Message::L2Request { depth: 1 })?;
        self.schedule_next(ctx)
    }

    fn on_message(&mut self, _from: AgentId, msg: Message, ctx: &mut Ctx<'_>) -> Result<()> {
        let Message::L2Response(snap) = msg else {
            return Ok(());
        };
        let model = ObservationModel {
            sigma_n: self.cfg.sigma_n,
        };
        let r_hat = observe(&self.fundamental, ctx.now(), model, &mut self.rng)?;
        if let Some((side, price)) = value_decision(&self.cfg, &snap, r_hat, &mut self.rng) {
            let order_id = self.ids.next_id();
            ctx.send(
                EXCHANGE,
                Message::LimitOrder {
                    order_id,
                    side,
                    price,
                    qty: self.cfg.q,
                },
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buy_and_sell_branches() {
        assert_eq!(value_price(1000, 1010, 1005, 1008, 0), (Side::Buy, 1000));
        assert_eq!(value_price(1000, 1010, 1005, 1001, 0), (Side::Sell, 1010));
        assert_eq!(value_price(1000, 1010, 1005, 1005, 0), (Side::Sell, 1010));
    }

    #[test]
    fn offset_never_crosses() {
        assert_eq!(value_price(1000, 1010, 1005, 2000, 20), (Side::Buy, 1009));
        assert_eq!(value_price(1000, 1010, 1005, 0, 10), (Side::Sell, 1001));
        assert_eq!(value_price(1000, 1010, 1005, 2000, 9), (Side::Buy, 1009));
        assert_eq!(value_price(1000, 1001, 1001, 2000, 2), (Side::Buy, 1000));
    }
}
