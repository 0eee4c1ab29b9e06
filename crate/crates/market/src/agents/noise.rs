use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sampling, OrderIds, EXCHANGE};
use crate::error::{config_err, Result};
use crate::kernel::{Agent, Ctx, Message};
use crate::rng::SimRng;
use crate::types::{AgentId, Qty, Side, SimTime};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Each agent draws its size once from `q_min..=q_max`.
    pub q_min: Qty,
    pub q_max: Qty,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { q_min: 10, q_max: 100 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q_min == 0 || self.q_min > self.q_max {
            return Err(config_err("noise.q_min", "need 0 < q_min <= q_max"));
        }
        Ok(())
    }
}

/// Trades once per day with a market order of fixed size and random sign.
pub struct NoiseAgent {
    rng: SimRng,
    q: Qty,
    ids: OrderIds,
    session: (SimTime, SimTime),
    acted: bool,
}

impl NoiseAgent {
    pub fn new(id: AgentId, cfg: &NoiseConfig, session: (SimTime, SimTime), mut rng: SimRng) -> Self {
        let q = rng.gen_range(cfg.q_min..=cfg.q_max);
        Self {
            rng,
            q,
            ids: OrderIds::new(id),
            session,
            acted: false,
        }
    }

    pub fn q(&self) -> Qty {
        self.q
    }

    /// Direction draw for one step.
    pub fn draw_side(rng: &mut impl Rng) -> Side {
        if rng.gen_bool(0.5) {
            Side::Buy
        } else {
            Side::Sell
        }
    }
}

impl Agent for NoiseAgent {
    fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        let t = sampling::u_quadratic_time(self.session.0, self.session.1, &mut self.rng)?;
        ctx.wakeup_at(t)?;
        Ok(())
    }

    fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        if self.acted {
            return Ok(());
        }
        self.acted = true;
        let side = Self::draw_side(&mut self.rng);
        let order_id = self.ids.next_id();
        ctx.send(
            EXCHANGE,
            Message::MarketOrder {
                order_id,
                side,
                qty: self.q,
            },
        )?;
        Ok(())
    }

    fn on_message(&mut self, _from: AgentId, _msg: Message, _ctx: &mut Ctx<'_>) -> Result<()> {
        Ok(())
    }
}
