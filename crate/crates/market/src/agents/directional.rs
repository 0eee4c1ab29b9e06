use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{OrderIds, Strategy, EXCHANGE};
use crate::error::{config_err, Result};
use crate::kernel::{Agent, Ctx, Message};
use crate::rng::SimRng;
use crate::types::{AgentId, Qty, Side, Ticks, NS_PER_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DirectionalMode {
    Momentum,
    MeanReversion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirectionalConfig {
    /// Window lengths in samples of `sample_interval_ns`.
    pub short_window: usize,
    pub long_window: usize,
    pub sample_interval_ns: u64,
    /// Trade on every n-th sample once history is long enough.
    pub trade_every: usize,
    pub q_max: Qty,
}

impl Default for DirectionalConfig {
    fn default() -> Self {
        Self {
            short_window: 20,
            long_window: 50,
            sample_interval_ns: NS_PER_MIN,
            trade_every: 5,
            q_max: 50,
        }
    }
}

impl DirectionalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.short_window == 0 || self.short_window >= self.long_window {
            return Err(config_err("directional.short_window", "need 0 < short < long"));
        }
        if self.sample_interval_ns == 0 {
            return Err(config_err("directional.sample_interval_ns", "must be positive"));
        }
        if self.trade_every == 0 {
            return Err(config_err("directional.trade_every", "must be >= 1"));
        }
        if self.q_max == 0 {
            return Err(config_err("directional.q_max", "must be positive"));
        }
        Ok(())
    }
}

/// SMA crossover rule evaluated on the most recent samples, compared exactly
/// as `long·Σshort > short·Σlong`. `None` until `long` samples exist.
pub fn directional_decision(mode: DirectionalMode, history: &[Ticks], short: usize, long: usize) -> Option<Side> {
    if history.len() < long || short == 0 {
        return None;
    }
    let sum = |n: usize| -> i128 { history[history.len() - n..].iter().map(|&x| x as i128).sum() };
    let rising = sum(short) * long as i128 > sum(long) * short as i128;
    Some(match (mode, rising) {
        (DirectionalMode::Momentum, true) | (DirectionalMode::MeanReversion, false) => Side::Buy,
        _ => Side::Sell,
    })
}

pub struct DirectionalAgent {
    mode: DirectionalMode,
    cfg: DirectionalConfig,
    rng: SimRng,
    ids: OrderIds,
    mids: Vec<Ticks>,
    samples: usize,
}

impl DirectionalAgent {
    pub fn new(id: AgentId, mode: DirectionalMode, cfg: DirectionalConfig, rng: SimRng) -> Self {
        Self {
            mode,
            cfg,
            rng,
            ids: OrderIds::new(id),
            mids: Vec::new(),
            samples: 0,
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self.mode {
            DirectionalMode::Momentum => Strategy::Momentum,
            DirectionalMode::MeanReversion => Strategy::MeanReversion,
        }
    }
}

impl Agent for DirectionalAgent {
    fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        // random phase so agents of one kind do not sample in lockstep
        let phase = self.rng.gen_range(0..self.cfg.sample_interval_ns);
        ctx.wakeup_at(ctx.window().0.plus(phase))?;
        Ok(())
    }

    fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        ctx.send(EXCHANGE, Message::L2Request { depth: 1 })?;
        ctx.wakeup_at(ctx.now().plus(self.cfg.sample_interval_ns))?;
        Ok(())
    }

    fn on_message(&mut self, _from: AgentId, msg: Message, ctx: &mut Ctx<'_>) -> Result<()> {
        let Message::L2Response(snap) = msg else {
            return Ok(());
        };
        match snap.mid() {
            Some(m) => self.mids.push(m),
            None => match self.mids.last() {
                Some(&m) => self.mids.push(m),
                None => return Ok(()),
            },
        }
        if self.mids.len() > self.cfg.long_window {
            self.mids.remove(0);
        }
        self.samples += 1;
        if self.samples % self.cfg.trade_every != 0 {
            return Ok(());
        }
        if let Some(side) = directional_decision(self.mode, &self.mids, self.cfg.short_window, self.cfg.long_window) {
            let qty = self.rng.gen_range(1..=self.cfg.q_max);
            let order_id = self.ids.next_id();
            ctx.send(EXCHANGE, Message::MarketOrder { order_id, side, qty })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_rules() {
        let rising: Vec<Ticks> = (0..60).map(|i| 1000 + i).collect();
        assert_eq!(directional_decision(DirectionalMode::Momentum, &rising, 20, 50), Some(Side::Buy));
        assert_eq!(directional_decision(DirectionalMode::MeanReversion, &rising, 20, 50), Some(Side::Sell));
        let flat = vec![1000; 50];
        assert_eq!(directional_decision(DirectionalMode::Momentum, &flat, 20, 50), Some(Side::Sell));
        assert_eq!(directional_decision(DirectionalMode::MeanReversion, &flat, 20, 50), Some(Side::Buy));
        assert_eq!(directional_decision(DirectionalMode::Momentum, &flat[..49], 20, 50), None);
    }
}
