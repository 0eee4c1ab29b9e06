//! `dataset`: labelled samples, day split, balancing and scaling.

use std::path::Path;

use anyhow::{bail, Context, Result};
use lob_arena_market::dataset::{self, build_dataset, DatasetManifest, Sample};
use lob_arena_market::scenario::{io, list_days, L2_FILE, ORDERS_FILE};
use rayon::prelude::*;

use crate::manifest::Outputs;

pub const SAMPLES_FILE: &str = "samples.csv";
pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const DATASET_MANIFEST: &str = "dataset.json";

pub fn build(run: &Path, out: &Path, seed: u64, train_days: usize, test_days: usize) -> Result<Outputs> {
    let days = list_days(run).with_context(|| format!("--run {}", run.display()))?;
    if days.is_empty() {
        bail!("--run {}: no day directories", run.display());
    }
    let logs = days
        .par_iter()
        .map(|(d, dir)| Ok((*d, io::load_orders(&dir.join(ORDERS_FILE))?, io::load_l2(&dir.join(L2_FILE))?)))
        .collect::<Result<Vec<_>>>()?;
    let ds = build_dataset(&logs, train_days, test_days, seed)?;
    let m = &ds.manifest;
    log::info!(
        "dataset: {} samples, train days {:?} ({} per class), test days {:?} ({} per class)",
        ds.all.len(),
        m.split.train_days,
        m.train_counts_after[0],
        m.split.test_days,
        m.test_counts_after[0]
    );
    if !m.zscore.dropped.is_empty() {
        log::warn!("constant features dropped: {:?}", m.zscore.dropped);
    }
    std::fs::create_dir_all(out).with_context(|| format!("--out {}", out.display()))?;
    let mut o = Outputs::default();
    o.input(run);
    for (name, rows) in [(SAMPLES_FILE, &ds.all), (TRAIN_FILE, &ds.train), (TEST_FILE, &ds.test)] {
        let p = out.join(name);
        dataset::write_samples(io::create(&p)?, rows)?;
        o.file(p);
    }
    o.write_json(out.join(DATASET_MANIFEST), m)?;
    Ok(o)
}

/// A dataset directory read back from disk.
pub struct Loaded {
    pub manifest: DatasetManifest,
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
}

pub fn load_manifest(dir: &Path) -> Result<DatasetManifest> {
    let p = dir.join(DATASET_MANIFEST);
    let text = std::fs::read_to_string(&p).with_context(|| format!("--dataset: missing {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("--dataset: bad {}", p.display()))
}

pub fn load(dir: &Path) -> Result<Loaded> {
    Ok(Loaded {
        manifest: load_manifest(dir)?,
        train: dataset::load_samples(&dir.join(TRAIN_FILE))?,
        test: dataset::load_samples(&dir.join(TEST_FILE))?,
    })
}

pub fn load_all(dir: &Path) -> Result<Vec<Sample>> {
    Ok(dataset::load_samples(&dir.join(SAMPLES_FILE))?)
}
