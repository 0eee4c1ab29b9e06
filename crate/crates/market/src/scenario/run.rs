use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{FundamentalSource, ScenarioConfig};
use super::io;
use crate::agents::{
    twap_schedule, vwap_schedule, Archetype, DirectionalAgent, DirectionalMode, MarketMakerAgent, NoiseAgent, SimAgent,
    Strategy, TakerAgent, ValueAgent, EXCHANGE,
};
use crate::error::{config_err, Result, SimError};
use crate::exchange::{ExchangeAgent, L2Snapshot, OrderEvent, Trade};
use crate::fundamental::{generate_ou_days, FundamentalSeries, VolumeProfile};
use crate::kernel::Kernel;
use crate::rng::{self, day_seed};
use crate::types::{AgentId, Side};

pub const ORDERS_FILE: &str = "orders.csv";
pub const TRADES_FILE: &str = "trades.csv";
pub const L2_FILE: &str = "l2.csv";
pub const DAY_MANIFEST: &str = "manifest.json";
pub const FUNDAMENTAL_FILE: &str = "fundamental.csv";
pub const TRACE_FILE: &str = "trace.ndjson";

pub fn day_dir(root: &Path, day: u32) -> PathBuf {
    root.join(format!("day_{day}"))
}

/// Fundamental series for every day, checked to cover the whole session.
pub fn load_fundamentals(cfg: &ScenarioConfig) -> Result<Vec<FundamentalSeries>> {
    let (open, close) = cfg.session();
    let series = match &cfg.fundamental {
        FundamentalSource::Ou(p) => generate_ou_days(p, open, close, cfg.days, cfg.seed)?,
        FundamentalSource::Csv { paths } => paths
            .iter()
            .take(cfg.days as usize)
            .map(|p| FundamentalSeries::load_csv(p))
            .collect::<Result<_>>()?,
    };
    if series.len() < cfg.days as usize {
        return Err(config_err("fundamental", format!("{} series for {} days", series.len(), cfg.days)));
    }
    for (d, s) in series.iter().enumerate() {
        if !s.covers(open, close) {
            return Err(SimError::Fundamental(format!(
                "day {d}: series spans {}..{} but the session is {open}..{close}",
                s.first_time(),
                s.last_time()
            )));
        }
    }
    Ok(series)
}

pub fn volume_profile(cfg: &ScenarioConfig) -> Result<VolumeProfile> {
    match &cfg.volume_profile {
        Some(p) => VolumeProfile::load_csv(p, cfg.session_open),
        None => Ok(VolumeProfile::u_shape(cfg.session_open)),
    }
}

/// Strategy of every agent id in registration order; id 0 is the exchange.
pub fn roster(cfg: &ScenarioConfig) -> Vec<Option<Strategy>> {
    let c = &cfg.counts;
    let mut out = vec![None];
    for (n, s) in [
        (c.noise, Strategy::Noise),
        (c.value, Strategy::Value),
        (c.market_makers, Strategy::MarketMaker),
        (c.twap, Strategy::Twap),
        (c.vwap, Strategy::Vwap),
        (c.momentum, Strategy::Momentum),
        (c.mean_reversion, Strategy::MeanReversion),
    ] {
        out.extend(std::iter::repeat(Some(s)).take(n as usize));
    }
    out
}

pub fn build_day(
    cfg: &ScenarioConfig,
    day: u32,
    fundamental: Arc<FundamentalSeries>,
    profile: &VolumeProfile,
) -> Result<Kernel<SimAgent>> {
    cfg.validate()?;
    let session = cfg.session();
    let seed = day_seed(cfg.seed, day);
    let roster = roster(cfg);
    let labels = roster.iter().map(|s| s.map(Strategy::archetype)).collect();
    let reference = fundamental.value_at(session.0)?;
    let mut kernel = Kernel::new(cfg.latency.clone(), session.0, session.1);
    let ex = kernel.add_agent(SimAgent::Exchange(Box::new(ExchangeAgent::new(
        EXCHANGE,
        labels,
        cfg.opening_book.clone(),
        reference,
    ))));
    debug_assert_eq!(ex, EXCHANGE);
    let mut taker_k = 0usize;
    for (i, strategy) in roster.iter().enumerate().skip(1) {
        let id = AgentId(i as u32);
        let rng = rng::stream(seed, i as u64);
        let agent = match strategy.expect("traders have a strategy") {
            Strategy::Noise => SimAgent::Noise(NoiseAgent::new(id, &cfg.noise, session, rng)),
            Strategy::Value => SimAgent::Value(ValueAgent::new(id, cfg.value.clone(), fundamental.clone(), rng)),
            Strategy::MarketMaker => {
                SimAgent::MarketMaker(MarketMakerAgent::new(id, cfg.market_maker.clone(), fundamental.clone(), rng))
            }
            s @ (Strategy::Twap | Strategy::Vwap) => {
                let t = &cfg.taker;
                let (start, end) = t.window(taker_k, session);
                let side = if (taker_k + day as usize) % 2 == 0 { Side::Buy } else { Side::Sell };
                taker_k += 1;
                let schedule = if s == Strategy::Twap {
                    twap_schedule(t.parent_qty, start, end, t.n_slots)
                } else {
                    vwap_schedule(t.parent_qty, start, end, t.n_slots, profile)
                };
                SimAgent::Taker(TakerAgent::new(id, s, side, schedule))
            }
            s @ (Strategy::Momentum | Strategy::MeanReversion) => {
                let mode = if s == Strategy::Momentum {
                    DirectionalMode::Momentum
                } else {
                    DirectionalMode::MeanReversion
                };
                SimAgent::Directional(DirectionalAgent::new(id, mode, cfg.directional.clone(), rng))
            }
        };
        kernel.add_agent(agent);
    }
    Ok(kernel)
}

#[derive(Debug, Clone)]
pub struct DayLogs {
    pub day: u32,
    pub orders: Vec<OrderEvent>,
    pub trades: Vec<Trade>,
    pub l2: Vec<L2Snapshot>,
    pub events: u64,
    pub dropped_wakeups: u64,
    pub trace_digest: String,
}

pub fn finish_day(day: u32, mut kernel: Kernel<SimAgent>, until: crate::types::SimTime) -> Result<DayLogs> {
    let events = kernel.run(until)?;
    let trace_digest = kernel.trace_digest();
    let dropped_wakeups = kernel.dropped_wakeups();
    let exchange = match kernel.into_agents().into_iter().next() {
        Some(SimAgent::Exchange(e)) => e,
        _ => unreachable!("agent 0 is the exchange"),
    };
    let (orders, trades, l2) = exchange.into_logs();
    Ok(DayLogs {
        day,
        orders,
        trades,
        l2,
        events,
        dropped_wakeups,
        trace_digest,
    })
}

/// Runs one day in memory.
pub fn run_day(cfg: &ScenarioConfig, day: u32, fundamental: Arc<FundamentalSeries>) -> Result<DayLogs> {
    let profile = volume_profile(cfg)?;
    let kernel = build_day(cfg, day, fundamental, &profile)?;
    finish_day(day, kernel, cfg.session_close)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

impl FileEntry {
    /// `path` is recorded relative to `base`.
    pub fn of(base: &Path, path: &Path) -> Result<Self> {
        let rel = path.strip_prefix(base).unwrap_or(path);
        Ok(Self {
            path: rel.to_string_lossy().replace('\\', "/"),
            sha256: io::sha256_file(path)?,
            bytes: std::fs::metadata(path)?.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayManifest {
    pub day: u32,
    pub day_seed: u64,
    pub events: u64,
    pub dropped_wakeups: u64,
    pub trace_sha256: String,
    pub orders: usize,
    pub trades: usize,
    pub l2_rows: usize,
    pub per_archetype_orders: Vec<(Archetype, usize)>,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone)]
pub struct DayArtifacts {
    pub day: u32,
    pub dir: PathBuf,
    pub manifest: PathBuf,
    /// Outputs not listed in the day manifest (fundamental, trace).
    pub extra: Vec<PathBuf>,
}

fn write_day(cfg: &ScenarioConfig, root: &Path, logs: &DayLogs, fundamental: &FundamentalSeries) -> Result<DayArtifacts> {
    let dir = day_dir(root, logs.day);
    std::fs::create_dir_all(&dir)?;
    let paths = [dir.join(ORDERS_FILE), dir.join(TRADES_FILE), dir.join(L2_FILE)];
    io::write_orders(io::create(&paths[0])?, &logs.orders)?;
    io::write_trades(io::create(&paths[1])?, &logs.trades)?;
    io::write_l2(io::create(&paths[2])?, &logs.l2)?;
    let fpath = dir.join(FUNDAMENTAL_FILE);
    fundamental.write_csv(io::create(&fpath)?)?;
    let mut per_archetype_orders: Vec<(Archetype, usize)> = Archetype::ALL.iter().map(|&a| (a, 0)).collect();
    for o in &logs.orders {
        per_archetype_orders[o.archetype.index()].1 += 1;
    }
    let manifest = DayManifest {
        day: logs.day,
        day_seed: day_seed(cfg.seed, logs.day),
        events: logs.events,
        dropped_wakeups: logs.dropped_wakeups,
        trace_sha256: logs.trace_digest.clone(),
        orders: logs.orders.len(),
        trades: logs.trades.len(),
        l2_rows: logs.l2.len(),
        per_archetype_orders,
        files: paths.iter().map(|p| FileEntry::of(&dir, p)).collect::<Result<_>>()?,
    };
    let mpath = dir.join(DAY_MANIFEST);
    serde_json::to_writer_pretty(io::create(&mpath)?, &manifest)?;
    let mut extra = vec![fpath];
    if cfg.trace {
        extra.push(dir.join(TRACE_FILE));
    }
    Ok(DayArtifacts {
        day: logs.day,
        dir,
        manifest: mpath,
        extra,
    })
}

/// Simulates every day (in parallel on the current rayon pool) and writes
/// `day_{d}/` under `out`.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<DayArtifacts>> {
    cfg.validate()?;
    let fundamentals = load_fundamentals(cfg)?;
    let profile = volume_profile(cfg)?;
    std::fs::create_dir_all(out)?;
    (0..cfg.days)
        .into_par_iter()
        .map(|day| {
            let f = Arc::new(fundamentals[day as usize].clone());
            let mut kernel = build_day(cfg, day, f.clone(), &profile)?;
            if cfg.trace {
                let path = day_dir(out, day).join(TRACE_FILE);
                kernel = kernel.with_trace(Box::new(io::create(&path)?));
            }
            let logs = finish_day(day, kernel, cfg.session_close)?;
            log::info!(
                "day {day}: {} events, {} orders, {} trades",
                logs.events,
                logs.orders.len(),
                logs.trades.len()
            );
            write_day(cfg, out, &logs, &f)
        })
        .collect()
}

pub fn read_day_manifest(path: &Path) -> Result<DayManifest> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Day directories under `root`, sorted by day index.
pub fn list_days(root: &Path) -> Result<Vec<(u32, PathBuf)>> {
    let mut days = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(d) = name.to_str().and_then(|n| n.strip_prefix("day_")).and_then(|n| n.parse().ok()) else {
            continue;
        };
        if entry.path().join(DAY_MANIFEST).is_file() {
            days.push((d, entry.path()));
        }
    }
    days.sort();
    Ok(days)
}
