//! `all`: every stage in order, one manifest for the whole tree.

use std::path::Path;

use anyhow::Result;
use lob_arena_core::nn::Hyperparams;
use lob_arena_market::agents::Archetype;
use lob_arena_market::scenario::ScenarioConfig;
use serde::Serialize;

use crate::manifest::{Outputs, RunManifest, Stage};
use crate::{data, eval, sim, train};

pub const SIM_DIR: &str = "sim";
pub const STYLIZED_DIR: &str = "stylized";
pub const DATASET_DIR: &str = "dataset";
pub const MODELS_DIR: &str = "models";
pub const EVAL_DIR: &str = "eval";
pub const REPORT_DIR: &str = "report";

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub scenario: ScenarioConfig,
    pub train_days: usize,
    pub test_days: usize,
    pub classifier: Hyperparams,
    pub search_budget: usize,
    pub cloner: Hyperparams,
    pub cloner_max_samples: usize,
    pub baselines: bool,
}

impl PipelineConfig {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            scenario,
            train_days: 3,
            test_days: 2,
            classifier: Hyperparams { epochs: train::CLASSIFIER_EPOCHS, ..Default::default() },
            search_budget: 0,
            cloner: Hyperparams { epochs: train::CLONER_EPOCHS, ..Default::default() },
            cloner_max_samples: train::CLONER_MAX_SAMPLES,
            baselines: true,
        }
    }
}

pub fn run_all(cfg: &PipelineConfig, out: &Path) -> Result<RunManifest> {
    let seed = cfg.scenario.seed;
    let stage = Stage::start("all", cfg, Some(seed))?;
    let [simd, styd, dsd, modd, evd, repd] = [SIM_DIR, STYLIZED_DIR, DATASET_DIR, MODELS_DIR, EVAL_DIR, REPORT_DIR].map(|d| out.join(d));
    let mut o = Outputs::default();
    log::info!("simulating {} days", cfg.scenario.days);
    o.extend(sim::simulate(&cfg.scenario, &simd)?);
    o.extend(sim::stylized_facts(&simd, &styd, &sim::DEFAULT_HORIZONS_S)?);
    o.extend(data::build(&simd, &dsd, seed, cfg.train_days, cfg.test_days)?);
    o.extend(train::train_classifier(&dsd, &modd, seed, &cfg.classifier, cfg.search_budget)?);
    o.extend(train::train_cloners(&dsd, &modd, seed, &cfg.cloner, cfg.cloner_max_samples, &Archetype::ALL)?);
    o.extend(eval::evaluate(&dsd, &modd, &evd, seed, cfg.baselines)?);
    o.extend(eval::report(&simd, Some(&evd), &repd)?);
    o.inputs.clear();
    stage.finish(out, &o)
}
