use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::agents::{DirectionalConfig, MarketMakerConfig, NoiseConfig, TakerConfig, ValueConfig};
use crate::error::{config_err, Result};
use crate::exchange::OpeningBook;
use crate::fundamental::OuParams;
use crate::kernel::LatencyModel;
use crate::types::SimTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentCounts {
    pub noise: u32,
    pub value: u32,
    pub market_makers: u32,
    pub twap: u32,
    pub vwap: u32,
    pub momentum: u32,
    pub mean_reversion: u32,
}

impl Default for AgentCounts {
    fn default() -> Self {
        Self {
            noise: 5000,
            value: 100,
            market_makers: 3,
            twap: 3,
            vwap: 3,
            momentum: 5,
            mean_reversion: 5,
        }
    }
}

impl AgentCounts {
    pub fn small() -> Self {
        Self {
            noise: 500,
            value: 10,
            market_makers: 1,
            twap: 1,
            vwap: 1,
            momentum: 1,
            mean_reversion: 1,
        }
    }

    pub fn total(&self) -> u32 {
        self.noise + self.value + self.market_makers + self.twap + self.vwap + self.momentum + self.mean_reversion
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FundamentalSource {
    Ou(OuParams),
    /// One `time_ns,price_ticks` file per day, in day order.
    Csv { paths: Vec<PathBuf> },
}

impl Default for FundamentalSource {
    fn default() -> Self {
        FundamentalSource::Ou(OuParams::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub days: u32,
    pub seed: u64,
    pub session_open: SimTime,
    pub session_close: SimTime,
    /// Dollars per tick; informational, all arithmetic is in ticks.
    pub tick_size: f64,
    pub latency: LatencyModel,
    pub fundamental: FundamentalSource,
    pub counts: AgentCounts,
    pub noise: NoiseConfig,
    pub value: ValueConfig,
    pub market_maker: MarketMakerConfig,
    pub taker: TakerConfig,
    pub directional: DirectionalConfig,
    pub opening_book: OpeningBook,
    /// `bucket_index,weight` CSV; the built-in U shape when absent.
    pub volume_profile: Option<PathBuf>,
    /// Write a per-day NDJSON event trace.
    pub trace: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            days: 5,
            seed: 0,
            session_open: SimTime::from_hm(9, 30),
            session_close: SimTime::from_hm(16, 0),
            tick_size: 0.01,
            latency: LatencyModel::default(),
            fundamental: FundamentalSource::default(),
            counts: AgentCounts::default(),
            noise: NoiseConfig::default(),
            value: ValueConfig::default(),
            market_maker: MarketMakerConfig::default(),
            taker: TakerConfig::default(),
            directional: DirectionalConfig::default(),
            opening_book: OpeningBook::default(),
            volume_profile: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Default,
    Small,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "default" => Some(Preset::Default),
            "small" => Some(Preset::Small),
            _ => None,
        }
    }
}

impl ScenarioConfig {
    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Default => Self::default(),
            Preset::Small => Self {
                counts: AgentCounts::small(),
                ..Self::default()
            },
        }
    }

    pub fn session(&self) -> (SimTime, SimTime) {
        (self.session_open, self.session_close)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err("scenario", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.days < 1 {
            return Err(config_err("days", "must be >= 1"));
        }
        if self.session_open >= self.session_close {
            return Err(config_err("session_open", "must precede session_close"));
        }
        if !(self.tick_size > 0.0) {
            return Err(config_err("tick_size", "must be positive"));
        }
        match &self.fundamental {
            FundamentalSource::Ou(p) => p.validate()?,
            FundamentalSource::Csv { paths } => {
                if paths.len() < self.days as usize {
                    return Err(config_err(
                        "fundamental.paths",
                        format!("{} files for {} days", paths.len(), self.days),
                    ));
                }
            }
        }
        self.noise.validate()?;
        self.value.validate()?;
        self.market_maker.validate()?;
        self.taker.validate(self.session())?;
        self.directional.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_and_json() {
        let d = ScenarioConfig::preset(Preset::Default);
        assert_eq!(d.counts.total(), 5119);
        assert_eq!(d.session_open, SimTime::from_secs(34_200));
        assert_eq!(d.session_close, SimTime::from_secs(57_600));
        let s = ScenarioConfig::preset(Preset::Small);
        assert_eq!(s.counts.noise, 500);
        assert_eq!(s.counts.twap + s.counts.vwap, 2);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), s);
        let partial = ScenarioConfig::from_json(r#"{"days": 2, "counts": {"noise": 1}}"#).unwrap();
        assert_eq!(partial.counts.noise, 1);
        assert_eq!(partial.counts.value, 100);
        let err = ScenarioConfig::from_json(r#"{"days": 0}"#).unwrap_err();
        assert!(err.to_string().contains("days"));
        assert!(ScenarioConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
