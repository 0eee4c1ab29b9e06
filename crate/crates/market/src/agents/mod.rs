//! Scripted trading strategies and their archetype labels.

mod directional;
mod market_maker;
mod noise;
pub mod sampling;
mod taker;
mod value;

use serde::{Deserialize, Serialize};

pub use directional::{directional_decision, DirectionalAgent, DirectionalConfig, DirectionalMode};
pub use market_maker::{mm_quotes, MarketMakerAgent, MarketMakerConfig, Quote};
pub use noise::{NoiseAgent, NoiseConfig};
pub use taker::{apportion, twap_schedule, vwap_schedule, TakerAgent, TakerConfig};
pub use value::{value_decision, value_price, ValueAgent, ValueConfig};

use crate::error::Result;
use crate::exchange::ExchangeAgent;
use crate::kernel::{Agent, Ctx, Message};
use crate::types::{AgentId, OrderId};

/// The exchange is always registered first.
pub const EXCHANGE: AgentId = AgentId(0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Archetype {
    MarketMaker,
    MarketTaker,
    DirectionalTrader,
    Background,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::MarketMaker,
        Archetype::MarketTaker,
        Archetype::DirectionalTrader,
        Archetype::Background,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Archetype::MarketMaker => "MARKET_MAKER",
            Archetype::MarketTaker => "MARKET_TAKER",
            Archetype::DirectionalTrader => "DIRECTIONAL_TRADER",
            Archetype::Background => "BACKGROUND",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn names() -> Vec<String> {
        Self::ALL.iter().map(|a| a.name().to_string()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    Noise,
    Value,
    MarketMaker,
    Twap,
    Vwap,
    Momentum,
    MeanReversion,
}

impl Strategy {
    pub fn archetype(self) -> Archetype {
        match self {
            Strategy::Noise | Strategy::Value => Archetype::Background,
            Strategy::MarketMaker => Archetype::MarketMaker,
            Strategy::Twap | Strategy::Vwap => Archetype::MarketTaker,
            Strategy::Momentum | Strategy::MeanReversion => Archetype::DirectionalTrader,
        }
    }
}

/// Per-agent order id allocator.
#[derive(Debug, Clone)]
pub struct OrderIds {
    agent: AgentId,
    next: u32,
}

impl OrderIds {
    pub fn new(agent: AgentId) -> Self {
        Self { agent, next: 0 }
    }

    pub fn next_id(&mut self) -> OrderId {
        let id = OrderId::compose(self.agent, self.next);
        self.next += 1;
        id
    }
}

pub enum SimAgent {
    Exchange(Box<ExchangeAgent>),
    Noise(NoiseAgent),
    Value(ValueAgent),
    MarketMaker(MarketMakerAgent),
    Taker(TakerAgent),
    Directional(DirectionalAgent),
}

impl SimAgent {
    pub fn strategy(&self) -> Option<Strategy> {
        match self {
            SimAgent::Exchange(_) => None,
            SimAgent::Noise(_) => Some(Strategy::Noise),
            SimAgent::Value(_) => Some(Strategy::Value),
            SimAgent::MarketMaker(_) => Some(Strategy::MarketMaker),
            SimAgent::Taker(t) => Some(t.strategy()),
            SimAgent::Directional(d) => Some(d.strategy()),
        }
    }

    pub fn as_exchange(&self) -> Option<&ExchangeAgent> {
        match self {
            SimAgent::Exchange(e) => Some(e),
            _ => None,
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $a:ident => $e:expr) => {
        match $self {
            SimAgent::Exchange($a) => $e,
            SimAgent::Noise($a) => $e,
            SimAgent::Value($a) => $e,
            SimAgent::MarketMaker($a) => $e,
            SimAgent::Taker($a) => $e,
            SimAgent::Directional($a) => $e,
        }
    };
}

impl Agent for SimAgent {
    fn on_start(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        dispatch!(self, a => a.on_start(ctx))
    }

    fn on_wakeup(&mut self, ctx: &mut Ctx<'_>) -> Result<()> {
        dispatch!(self, a => a.on_wakeup(ctx))
    }

    fn on_message(&mut self, from: AgentId, msg: Message, ctx: &mut Ctx<'_>) -> Result<()> {
        dispatch!(self, a => a.on_message(from, msg, ctx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn archetype_labels() {
        assert_eq!(Archetype::MarketMaker.index(), 0);
        assert_eq!(Archetype::Background.index(), 3);
        assert_eq!(Archetype::parse("MARKET_TAKER"), Some(Archetype::MarketTaker));
        assert_eq!(Strategy::Noise.archetype(), Archetype::Background);
        assert_eq!(Strategy::Value.archetype(), Archetype::Background);
        assert_eq!(Strategy::Twap.archetype(), Archetype::MarketTaker);
        assert_eq!(Strategy::Vwap.archetype(), Archetype::MarketTaker);
        assert_eq!(Strategy::Momentum.archetype(), Archetype::DirectionalTrader);
        assert_eq!(Strategy::MeanReversion.archetype(), Archetype::DirectionalTrader);
        assert_eq!(
            serde_json::to_string(&Archetype::DirectionalTrader).unwrap(),
            "\"DIRECTIONAL_TRADER\""
        );
    }

    #[test]
    fn order_ids_carry_owner() {
        let mut ids = OrderIds::new(AgentId(3));
        let a = ids.next_id();
        let b = ids.next_id();
        assert_ne!(a, b);
        assert_eq!(a.0 >> 32, 3);
    }
}
