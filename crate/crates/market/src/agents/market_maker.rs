use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sampling, OrderIds, EXCHANGE};
use crate::error::{config_err, Result};
use crate::fundamental::{observe, FundamentalSeries, ObservationModel};
use crate::kernel::{Agent, Ctx, Message};
use crate::rng::SimRng;
use crate::types::{div_round_half_away, AgentId, OrderId, Qty, Side, Ticks, NS_PER_SEC};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarketMakerConfig {
    pub lambda_a_ns: f64,
    pub q_max: Qty,
    pub delta_s: u32,
}

impl Default for MarketMakerConfig {
    fn default() -> Self {
        Self {
            lambda_a_ns: 10.0 * NS_PER_SEC as f64,
            q_max: 100,
            delta_s: 5,
        }
    }
}

impl MarketMakerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_a_ns > 0.0) {
            return Err(config_err("market_maker.lambda_a_ns", "must be positive"));
        }
        if self.q_max < 2 || self.q_max % 2 != 0 {
            return Err(config_err("market_maker.q_max", "must be even and >= 2"));
        }
        if self.delta_s < 1 {
            return Err(config_err("market_maker.delta_s", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quote {
    pub side: Side,
    pub price: Ticks,
    pub qty: Qty,
}

/// Symmetric quotes around `p = round(½(m + r̂))`: `ceil(q/2)` bid at `p − s`
/// and `floor(q/2)` ask at `p + s`. Empty or non-positive quotes are left out.
pub fn mm_quotes(mid: Ticks, r_hat: Ticks, q: Qty, s: Ticks) -> Vec<Quote> {
    let p = div_round_half_away(mid + r_hat, 2);
    [
        Quote {
            side: Side::Buy,
            price: p - s,
            qty: q.div_ceil(2),
        },
        Quote {
            side: Side::Sell,
            price: p + s,
            qty: q / 2,
        },
    ]
    .into_iter()
    .filter(|q| q.qty > 0 && q.price > 0)
    .collect()
}

pub struct MarketMakerAgent {
    rng: SimRng,
    cfg: MarketMakerConfig,
    fundamental: Arc<FundamentalSeries>,
    ids: OrderIds,
    open: BTreeSet<OrderId>,
}

impl MarketMakerAgent {
    pub fn new(id: AgentId, cfg: MarketMakerConfig, fundamental: Arc<FundamentalSeries>, rng: SimRng) -> Self {
        Self {
            rng,
            cfg,
            fundamental,
            ids: OrderIds::new(id),
            open: BTreeSet::new(),
        }
    }

    pub fn open_orders(&self) -> usize {
        self.open.len()
    }

    fn schedule_next(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        let gap = sampling::exp_interarrival_ns(self.cfg.lambda_a_ns, &mut self.rng)?;
        ctx.wakeup_at(ctx.now().plus(gap))?;
        Ok(())
    }
}

impl Agent for MarketMakerAgent {
    fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        self.schedule_next(ctx)
    }

    fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        for order_id in std::mem::take(&mut self.open) {
            ctx.send(EXCHANGE, Message::CancelOrder { order_id })?;
        }
        ctx.send(EXCHANGE, Message::L2Request { depth: 1 })?;
        self.schedule_next(ctx)
    }

    fn on_message(&mut self, _from: AgentId, msg: Message, ctx: &mut Ctx<'_>) -> Result<()> {
        match msg {
            Message::L2Response(snap) => {
                let Some(mid) = snap.mid() else {
                    return Ok(());
                };
                let r_hat = observe(&self.fundamental, ctx.now(), ObservationModel::EXACT, &mut self.rng)?;
                let q = self.rng.gen_range(1..=self.cfg.q_max);
                let s = self.rng.gen_range(1..=self.cfg.delta_s) as Ticks;
                for quote in mm_quotes(mid, r_hat, q, s) {
                    let order_id = self.ids.next_id();
                    self.open.insert(order_id);
                    ctx.send(
                        EXCHANGE,
                        Message::LimitOrder {
                            order_id,
                            side: quote.side,
                            price: quote.price,
                            qty: quote.qty,
                        },
                    )?;
                }
            }
            Message::OrderExecuted {
                order_id,
                remaining: 0,
                ..
            }
            | Message::OrderRejected { order_id, .. } => {
                self.open.remove(&order_id);
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quote_arithmetic() {
        let q = mm_quotes(1005, 1009, 10, 2);
        assert_eq!(
            q,
            vec![
                Quote { side: Side::Buy, price: 1005, qty: 5 },
                Quote { side: Side::Sell, price: 1009, qty: 5 },
            ]
        );
        let odd = mm_quotes(1005, 1009, 7, 1);
        assert_eq!((odd[0].qty, odd[1].qty), (4, 3));
        let one = mm_quotes(1005, 1009, 1, 1);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].side, Side::Buy);
        assert_eq!(mm_quotes(1000, 1001, 4, 1)[0].price, 1000);
    }
}
