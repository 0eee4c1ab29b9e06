//! Multi-day market runs and their on-disk logs.

mod config;
pub mod io;
mod run;

pub use config::{AgentCounts, FundamentalSource, Preset, ScenarioConfig};
pub use run::{
    build_day, day_dir, finish_day, list_days, load_fundamentals, read_day_manifest, roster, run_day, run_scenario,
    volume_profile, DayArtifacts, DayLogs, DayManifest, FileEntry, DAY_MANIFEST, FUNDAMENTAL_FILE, L2_FILE,
    ORDERS_FILE, TRACE_FILE, TRADES_FILE,
};
