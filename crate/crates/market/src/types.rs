use std::fmt;

use serde::{Deserialize, Serialize};

pub const NS_PER_SEC: u64 = 1_000_000_000;
pub const NS_PER_MIN: u64 = 60 * NS_PER_SEC;

/// Prices are integer ticks of one cent.
pub type Ticks = i64;
pub type Qty = u64;

/// Nanoseconds since the start of the simulated day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_secs(s: u64) -> Self {
        SimTime(s * NS_PER_SEC)
    }

    pub fn from_hm(h: u64, m: u64) -> Self {
        SimTime::from_secs(h * 3600 + m * 60)
    }

    pub fn ns(self) -> u64 {
        self.0
    }

    pub fn plus(self, ns: u64) -> Self {
        SimTime(self.0.saturating_add(ns))
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0 / NS_PER_SEC;
        write!(
            f,
            "{:02}:{:02}:{:02}.{:09}",
            s / 3600,
            (s / 60) % 60,
            s % 60,
            self.0 % NS_PER_SEC
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl AgentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderId(pub u64);

impl OrderId {
    /// Agent-scoped ids: the owner in the high 32 bits, a counter below.
    pub fn compose(agent: AgentId, counter: u32) -> Self {
        OrderId(((agent.0 as u64) << 32) | counter as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    /// +1 for buys, -1 for sells.
    pub fn sign(self) -> i64 {
        match self {
            Side::Buy => 1,
            Side::Sell => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "BUY",
            Side::Sell => "SELL",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "BUY" => Some(Side::Buy),
            "SELL" => Some(Side::Sell),
            _ => None,
        }
    }
}

/// Integer division rounding half away from zero.
pub fn div_round_half_away(num: i64, den: i64) -> i64 {
    assert!(den != 0, "division by zero");
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den.abs() {
        if (num < 0) != (den < 0) {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

/// Rounds a real tick value half away from zero.
pub fn round_ticks(v: f64) -> Ticks {
    v.round() as Ticks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_away_rounding() {
        assert_eq!(div_round_half_away(2010, 2), 1005);
        assert_eq!(div_round_half_away(2011, 2), 1006);
        assert_eq!(div_round_half_away(-3, 2), -2);
        assert_eq!(div_round_half_away(-1, 4), 0);
        assert_eq!(div_round_half_away(7, 4), 2);
        assert_eq!(round_ticks(1006.5), 1007);
        assert_eq!(round_ticks(-0.5), -1);
    }

    #[test]
    fn display_time() {
        assert_eq!(SimTime::from_hm(9, 30).to_string(), "09:30:00.000000000");
    }

    #[test]
    fn composed_ids_are_unique_per_agent() {
        assert_ne!(
            OrderId::compose(AgentId(1), 0),
            OrderId::compose(AgentId(0), 1)
        );
    }
}
