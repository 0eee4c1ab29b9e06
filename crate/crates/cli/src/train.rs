//! `train-classifier` and `train-cloner`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lob_arena_core::metrics::evaluate;
use lob_arena_core::nn::{self, Hyperparams, MlpModel, TrainHistory};
use lob_arena_core::stats::{ConstantPolicy, ZScoreParams};
use lob_arena_core::tuner::{random_search, SearchResult, SearchSpace};
use lob_arena_core::Mlp32;
use lob_arena_market::agents::Archetype;
use lob_arena_market::dataset::{self, Sample};
use lob_arena_market::rng::mix;
use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data;
use crate::manifest::Outputs;

pub const CLASSIFIER_MODEL: &str = "classifier.bin";
pub const CLASSIFIER_INFO: &str = "classifier.json";
pub const CLASSIFIER_EPOCHS: usize = 200;
pub const CLONER_EPOCHS: usize = 50;
pub const CLONER_MAX_SAMPLES: usize = 2000;

const CLASSIFIER_STREAM: u64 = 1;
const SEARCH_STREAM: u64 = 2;
const CLONER_STREAM: u64 = 16;

pub fn cloner_model(a: Archetype) -> String {
    format!("cloner_{}.bin", a.name().to_lowercase())
}

pub fn cloner_info(a: Archetype) -> String {
    format!("cloner_{}.json", a.name().to_lowercase())
}

pub fn to_f32(x: ArrayView2<'_, f64>) -> Array2<f32> {
    x.mapv(|v| v as f32)
}

pub fn load_hyperparams(path: Option<&Path>) -> Result<Hyperparams> {
    match path {
        None => Ok(Hyperparams::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("--hyperparams {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("--hyperparams {}", p.display()))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierInfo {
    pub class_names: Vec<String>,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    pub train_rows: usize,
    /// Held out during hyperparameter search only.
    pub validation_day: u32,
    pub search: Option<SearchResult>,
    pub history: TrainHistory,
}

fn macro_f1(model: &Mlp32, x: ArrayView2<'_, f32>, y: &[usize]) -> lob_arena_core::Result<f64> {
    let pred = nn::predict_classes(model, x)?;
    Ok(evaluate(&pred, y, &Archetype::names())?.macro_f1)
}

pub fn train_classifier(dataset_dir: &Path, out: &Path, seed: u64, hp: &Hyperparams, search_budget: usize) -> Result<Outputs> {
    let ds = data::load(dataset_dir)?;
    let z = &ds.manifest.zscore;
    let x = to_f32(dataset::zscore_apply(z, &ds.train)?.view());
    let y = dataset::labels(&ds.train);
    let validation_day = *ds.manifest.split.train_days.last().context("--dataset: no training days")?;

    let search = if search_budget > 0 {
        let (fit_idx, val_idx): (Vec<usize>, Vec<usize>) = (0..ds.train.len()).partition(|&i| ds.train[i].day != validation_day);
        let pick = |idx: &[usize]| (x.select(ndarray::Axis(0), idx), idx.iter().map(|&i| y[i]).collect::<Vec<_>>());
        let (fx, fy) = pick(&fit_idx);
        let (vx, vy) = pick(&val_idx);
        let result = random_search(
            &SearchSpace::default(),
            hp,
            search_budget,
            |trial| {
                let (m, _) = nn::train_classifier(fx.view(), &fy, 4, None, trial, mix(seed, CLASSIFIER_STREAM))?;
                let f1 = macro_f1(&m, vx.view(), &vy)?;
                log::info!("search: lr {:.2e} dropout {:.2} batch {} -> validation macro-F1 {f1:.3}", trial.learning_rate, trial.dropout, trial.batch_size);
                Ok(f1)
            },
            mix(seed, SEARCH_STREAM),
        )?;
        Some(result)
    } else {
        None
    };
    let hp = search.as_ref().map_or_else(|| hp.clone(), |s| s.best.clone());
    let model_seed = mix(seed, CLASSIFIER_STREAM);
    log::info!("training classifier on {} rows for {} epochs", x.nrows(), hp.epochs);
    let (model, history) = nn::train_classifier(x.view(), &y, 4, None, &hp, model_seed)?;
    log::info!(
        "classifier loss {:.4} -> {:.4}",
        history.first_loss().unwrap_or(f64::NAN),
        history.last_loss().unwrap_or(f64::NAN)
    );

    std::fs::create_dir_all(out).with_context(|| format!("--out {}", out.display()))?;
    let mut o = Outputs::default();
    o.input(dataset_dir);
    let meta = serde_json::json!({ "class_names": Archetype::names(), "task": "classifier" });
    o.file(write_model(&out.join(CLASSIFIER_MODEL), &model, model_seed, Some(data::DATASET_MANIFEST.into()), meta)?);
    let info = ClassifierInfo {
        class_names: Archetype::names(),
        hyperparams: hp,
        seed: model_seed,
        train_rows: x.nrows(),
        validation_day,
        search,
        history,
    };
    o.write_json(out.join(CLASSIFIER_INFO), &info)?;
    Ok(o)
}

fn write_model(path: &Path, model: &Mlp32, seed: u64, zref: Option<String>, meta: serde_json::Value) -> Result<PathBuf> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?);
    nn::write_model(&mut f, model, seed, zref, meta)?;
    std::io::Write::flush(&mut f)?;
    Ok(path.to_path_buf())
}

pub fn read_model(path: &Path, flag: &str) -> Result<Mlp32> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path).with_context(|| format!("{flag}: missing {}", path.display()))?);
    let (m, _) = nn::read_model::<f32, _>(&mut f).with_context(|| format!("{flag}: {}", path.display()))?;
    Ok(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClonerInfo {
    pub archetype: Archetype,
    pub seed: u64,
    pub available: usize,
    pub train_rows: usize,
    pub hyperparams: Hyperparams,
    /// Over the 20 book columns.
    pub input_zscore: ZScoreParams,
    /// Over (price, signed size).
    pub target_zscore: ZScoreParams,
    pub history: TrainHistory,
}

impl ClonerInfo {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("--models: missing {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn inputs(&self, rows: &[Sample]) -> Result<Array2<f32>> {
        Ok(to_f32(self.input_zscore.apply(dataset::book_matrix(rows).view())?.view()))
    }

    pub fn targets(&self, rows: &[Sample]) -> Result<Array2<f64>> {
        Ok(self.target_zscore.apply(dataset::action_matrix(rows).view())?)
    }
}

/// Training-day demonstrations of one archetype, capped by a seeded subsample.
pub fn cloner_rows(all: &[Sample], train_days: &[u32], a: Archetype, cap: usize, seed: u64) -> (usize, Vec<Sample>) {
    let rows: Vec<&Sample> = all.iter().filter(|s| s.label == a && train_days.contains(&s.day)).collect();
    let n = rows.len();
    if n <= cap {
        return (n, rows.into_iter().cloned().collect());
    }
    let mut rng = lob_arena_market::rng::stream(seed, a.index() as u64);
    let mut idx = sample(&mut rng, n, cap).into_vec();
    idx.sort_unstable();
    (n, idx.into_iter().map(|i| rows[i].clone()).collect())
}

fn train_one(all: &[Sample], train_days: &[u32], a: Archetype, cap: usize, hp: &Hyperparams, seed: u64) -> Result<(Mlp32, ClonerInfo)> {
    let cseed = mix(seed, CLONER_STREAM + a.index() as u64);
    let (available, rows) = cloner_rows(all, train_days, a, cap, cseed);
    let input_zscore = ZScoreParams::fit(dataset::book_matrix(&rows).view(), ConstantPolicy::Drop)
        .with_context(|| format!("cloner {}", a.name()))?;
    let target_zscore = ZScoreParams::fit(dataset::action_matrix(&rows).view(), ConstantPolicy::UnitScale)
        .with_context(|| format!("cloner {}", a.name()))?;
    let mut info = ClonerInfo {
        archetype: a,
        seed: cseed,
        available,
        train_rows: rows.len(),
        hyperparams: hp.clone(),
        input_zscore,
        target_zscore,
        history: TrainHistory::default(),
    };
    let x = info.inputs(&rows)?;
    let y = to_f32(info.targets(&rows)?.view());
    log::info!("training {} cloner on {} of {available} demonstrations", a.name(), rows.len());
    let (model, history) = nn::train_cloner(x.view(), y.view(), hp, cseed).with_context(|| format!("cloner {}", a.name()))?;
    info.history = history;
    Ok((model, info))
}

pub fn train_cloners(dataset_dir: &Path, out: &Path, seed: u64, hp: &Hyperparams, cap: usize, which: &[Archetype]) -> Result<Outputs> {
    let manifest = data::load_manifest(dataset_dir)?;
    let all = data::load_all(dataset_dir)?;
    let trained = which
        .par_iter()
        .map(|&a| train_one(&all, &manifest.split.train_days, a, cap, hp, seed))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out).with_context(|| format!("--out {}", out.display()))?;
    let mut o = Outputs::default();
    o.input(dataset_dir);
    for (model, info) in trained {
        let a = info.archetype;
        let meta = serde_json::json!({ "task": "cloner", "archetype": a.name(), "targets": ["price", "signed_size"] });
        o.file(write_model(&out.join(cloner_model(a)), &model, info.seed, Some(cloner_info(a)), meta)?);
        o.write_json(out.join(cloner_info(a)), &info)?;
    }
    Ok(o)
}

/// Model predictions in z-scored target units.
pub fn predict(model: &MlpModel<f32>, x: ArrayView2<'_, f32>) -> Result<Array2<f64>> {
    Ok(nn::predict_proba(model, x)?.mapv(|v| v as f64))
}
