//! `simulate` and `stylized-facts`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use lob_arena_core::plot::{histogram_svg, Histogram};
use lob_arena_market::scenario::{io, list_days, run_scenario, Preset, ScenarioConfig};
use lob_arena_market::stylized::{pooled_log_returns, sample_mids_per_second, ReturnReport};
use serde::{Deserialize, Serialize};

use crate::manifest::Outputs;

pub const SCENARIO_FILE: &str = "scenario.json";
pub const STYLIZED_FILE: &str = "stylized.json";
pub const DEFAULT_HORIZONS_S: [u64; 2] = [60, 600];
const RETURN_BINS: usize = 60;

/// Preset or scenario file, with the seed (and optionally the day count)
/// taken from the command line.
pub fn resolve_scenario(preset: Option<&str>, scenario: Option<&Path>, seed: u64, days: Option<u32>) -> Result<ScenarioConfig> {
    let mut cfg = match (preset, scenario) {
        (Some(_), Some(_)) => bail!("--preset and --scenario are mutually exclusive"),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("--scenario {}", p.display()))?;
            ScenarioConfig::from_json(&text).with_context(|| format!("--scenario {}", p.display()))?
        }
        (Some(name), None) => {
            let Some(p) = Preset::parse(name) else {
                bail!("--preset: unknown preset `{name}` (expected small or default)");
            };
            ScenarioConfig::preset(p)
        }
        (None, None) => ScenarioConfig::preset(Preset::Default),
    };
    cfg.seed = seed;
    if let Some(d) = days {
        cfg.days = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate(cfg: &ScenarioConfig, out: &Path) -> Result<Outputs> {
    std::fs::create_dir_all(out).with_context(|| format!("--out {}", out.display()))?;
    let mut o = Outputs::default();
    o.write_json(out.join(SCENARIO_FILE), cfg)?;
    for day in run_scenario(cfg, out)? {
        o.file(day.manifest);
        o.files.extend(day.extra);
    }
    Ok(o)
}

pub fn load_scenario(run: &Path) -> Result<ScenarioConfig> {
    let p = run.join(SCENARIO_FILE);
    let text = std::fs::read_to_string(&p).with_context(|| format!("--run: missing {}", p.display()))?;
    Ok(ScenarioConfig::from_json(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StylizedReport {
    pub days: Vec<u32>,
    pub sampling_s: u64,
    pub reports: Vec<ReturnReport>,
}

impl StylizedReport {
    pub fn kurtosis(&self, horizon_s: u64) -> Option<f64> {
        self.reports.iter().find(|r| r.horizon_s == horizon_s)?.excess_kurtosis
    }
}

/// Pooled non-overlapping returns per horizon, from the L2 logs of a run.
pub fn returns_by_horizon(run: &Path, horizons: &[u64]) -> Result<(Vec<u32>, Vec<Vec<f64>>)> {
    let cfg = load_scenario(run)?;
    let days = list_days(run)?;
    if days.is_empty() {
        bail!("--run {}: no day directories", run.display());
    }
    let mut sessions = Vec::with_capacity(days.len());
    for (_, dir) in &days {
        let l2 = io::load_l2(&dir.join(lob_arena_market::scenario::L2_FILE))?;
        sessions.push(sample_mids_per_second(&l2, cfg.session_open, cfg.session_close));
    }
    let rets = horizons.iter().map(|&h| pooled_log_returns(&sessions, h as usize)).collect();
    Ok((days.into_iter().map(|(d, _)| d).collect(), rets))
}

/// Report JSON plus a histogram CSV and SVG per horizon.
pub fn stylized_facts(run: &Path, out: &Path, horizons: &[u64]) -> Result<Outputs> {
    if horizons.is_empty() || horizons.contains(&0) {
        bail!("--horizons: need positive horizons in seconds");
    }
    std::fs::create_dir_all(out).with_context(|| format!("--out {}", out.display()))?;
    let (days, rets) = returns_by_horizon(run, horizons)?;
    let mut o = Outputs::default();
    o.input(run);
    let reports: Vec<ReturnReport> = horizons.iter().zip(&rets).map(|(&h, xs)| ReturnReport::new(h, xs)).collect();
    for r in &reports {
        match r.excess_kurtosis {
            Some(k) => log::info!("{} returns: n = {}, excess kurtosis {k:.3}", r.horizon, r.n),
            None => log::warn!("{} returns: n = {}, kurtosis undefined", r.horizon, r.n),
        }
    }
    o.extend(render_returns(out, &reports, &rets)?);
    o.write_json(out.join(STYLIZED_FILE), &StylizedReport { days, sampling_s: 1, reports })?;
    Ok(o)
}

pub fn render_returns(out: &Path, reports: &[ReturnReport], rets: &[Vec<f64>]) -> Result<Outputs> {
    let mut o = Outputs::default();
    for (r, xs) in reports.iter().zip(rets) {
        let h = Histogram::new(xs, RETURN_BINS)?;
        o.write_text(out.join(format!("returns_{}.csv", r.horizon)), &h.to_csv())?;
        let title = format!("{} mid-price log returns", r.horizon);
        o.write_text(out.join(format!("returns_{}.svg", r.horizon)), &histogram_svg(&title, &[(&r.horizon, xs)], RETURN_BINS)?)?;
    }
    Ok(o)
}

pub fn parse_horizons(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|p| p.trim().parse::<u64>().with_context(|| format!("--horizons: bad value `{p}`")))
        .collect()
}

