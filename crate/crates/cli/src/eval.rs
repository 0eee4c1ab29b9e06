//! `evaluate` and `report`.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lob_arena_core::baselines::{Classifier, ForestParams, GaussianNb, SvmParams, TreeParams};
use lob_arena_core::metrics::{evaluate as eval_report, EvalReport};
use lob_arena_core::plot::{confusion_svg, histogram_svg};
use lob_arena_core::stats::{ks_statistic, mean, std_dev};
use lob_arena_core::{nn, AdaBoost, Forest, Knn, LinearSvm, Tree};
use lob_arena_market::agents::Archetype;
use lob_arena_market::dataset::{self, Sample};
use lob_arena_market::rng::mix;
use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data;
use crate::manifest::Outputs;
use crate::sim;
use crate::train::{self, ClonerInfo};

pub const CLASSIFIER_EVAL: &str = "classifier_eval.json";
pub const BASELINES_EVAL: &str = "baselines.json";
pub const CLONING_EVAL: &str = "cloning.json";
pub const TABLE_FILE: &str = "table.csv";
pub const CLASSIFIER_NAME: &str = "mlp";
const BASELINE_STREAM: u64 = 32;
const CLONING_BINS: usize = 40;
pub const TARGETS: [&str; 2] = ["price", "signed_size"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Knn,
    LinearSvm,
    DecisionTree,
    RandomForest,
    Adaboost,
    GaussianNb,
}

impl Baseline {
    pub const ALL: [Baseline; 6] = [
        Baseline::Knn,
        Baseline::LinearSvm,
        Baseline::DecisionTree,
        Baseline::RandomForest,
        Baseline::Adaboost,
        Baseline::GaussianNb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Knn => "knn",
            Baseline::LinearSvm => "linear_svm",
            Baseline::DecisionTree => "decision_tree",
            Baseline::RandomForest => "random_forest",
            Baseline::Adaboost => "adaboost",
            Baseline::GaussianNb => "gaussian_nb",
        }
    }
}

pub const KNN_K: usize = 5;
pub const TREE_MAX_DEPTH: usize = 10;
pub const ADABOOST_STUMPS: usize = 200;

fn fit_predict(b: Baseline, x: ArrayView2<'_, f64>, y: &[usize], xt: ArrayView2<'_, f64>, seed: u64) -> Result<Vec<usize>> {
    let seed = mix(seed, BASELINE_STREAM + b as u64);
    Ok(match b {
        Baseline::Knn => Knn::fit(x, y, 4, KNN_K)?.predict(xt),
        Baseline::LinearSvm => LinearSvm::fit(x, y, 4, &SvmParams { seed, ..Default::default() })?.predict(xt),
        Baseline::DecisionTree => {
            let p = TreeParams { max_depth: Some(TREE_MAX_DEPTH), ..Default::default() };
            Tree::fit(x, y, 4, &p)?.predict(xt)
        }
        Baseline::RandomForest => Forest::fit(x, y, 4, &ForestParams { seed, ..Default::default() })?.predict(xt),
        Baseline::Adaboost => AdaBoost::fit(x, y, 4, ADABOOST_STUMPS)?.predict(xt),
        Baseline::GaussianNb => GaussianNb::fit(x, y, 4)?.predict(xt),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetFit {
    pub target: String,
    pub n: usize,
    pub true_mean: f64,
    pub true_std: f64,
    pub pred_mean: f64,
    pub pred_std: f64,
    /// |pred_mean - true_mean| / true_std.
    pub mean_gap: f64,
    pub ks: f64,
}

impl TargetFit {
    pub fn new(target: &str, truth: &[f64], pred: &[f64]) -> Self {
        let true_mean = mean(truth).unwrap_or(0.0);
        let true_std = std_dev(truth).unwrap_or(0.0);
        let pred_mean = mean(pred).unwrap_or(0.0);
        let gap = (pred_mean - true_mean).abs();
        Self {
            target: target.to_string(),
            n: truth.len(),
            true_mean,
            true_std,
            pred_mean,
            pred_std: std_dev(pred).unwrap_or(0.0),
            mean_gap: if true_std > 0.0 { gap / true_std } else if gap == 0.0 { 0.0 } else { f64::INFINITY },
            ks: ks_statistic(truth, pred),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloningEval {
    pub archetype: Archetype,
    pub targets: Vec<TargetFit>,
}

fn predictions_file(model: &str) -> String {
    format!("predictions_{model}.csv")
}

fn cloning_file(a: Archetype) -> String {
    format!("cloning_{}.csv", a.name().to_lowercase())
}

fn write_predictions(path: &Path, truth: &[usize], pred: &[usize]) -> Result<()> {
    let mut s = String::from("true,predicted\n");
    for (t, p) in truth.iter().zip(pred) {
        let _ = writeln!(s, "{t},{p}");
    }
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn read_columns(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cols = vec![Vec::new(); width];
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != width {
            bail!("{} row {}: expected {width} columns", path.display(), i + 1);
        }
        for (c, v) in cols.iter_mut().zip(rec.iter()) {
            c.push(v.parse().with_context(|| format!("{} row {}", path.display(), i + 1))?);
        }
    }
    Ok(cols)
}

/// Report JSON and confusion heatmap for one model's predictions.
pub fn render_classification(out: &Path, model: &str, truth: &[usize], pred: &[usize]) -> Result<(EvalReport, Outputs)> {
    let report = eval_report(pred, truth, &Archetype::names())?;
    let mut o = Outputs::default();
    let title = format!("{model} confusion (macro-F1 {:.3})", report.macro_f1);
    o.write_text(out.join(format!("confusion_{model}.svg")), &confusion_svg(&title, &report.class_names, &report.confusion))?;
    Ok((report, o))
}

/// Moment and KS comparison plus overlaid histograms for one cloner.
/// `cols` holds true price, predicted price, true size, predicted size.
pub fn render_cloning(out: &Path, a: Archetype, cols: &[Vec<f64>]) -> Result<(CloningEval, Outputs)> {
    let mut o = Outputs::default();
    let mut targets = Vec::new();
    for (k, name) in TARGETS.iter().enumerate() {
        let (t, p) = (&cols[2 * k], &cols[2 * k + 1]);
        targets.push(TargetFit::new(name, t, p));
        let title = format!("{} {name} (z-score)", a.name());
        let svg = histogram_svg(&title, &[("true", t), ("predicted", p)], CLONING_BINS)?;
        o.write_text(out.join(format!("cloning_{}_{name}.svg", a.name().to_lowercase())), &svg)?;
    }
    Ok((CloningEval { archetype: a, targets }, o))
}

fn table(reports: &[(String, EvalReport)]) -> String {
    let mut s = String::from("model,class,precision,recall,f1\n");
    for (m, r) in reports {
        for (name, c) in r.class_names.iter().zip(&r.per_class) {
            let _ = writeln!(s, "{m},{name},{:.4},{:.4},{:.4}", c.precision, c.recall, c.f1);
        }
        let _ = writeln!(s, "{m},MACRO,{:.4},{:.4},{:.4}", r.macro_precision, r.macro_recall, r.macro_f1);
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineReport {
    pub model: Baseline,
    pub report: EvalReport,
}

pub fn evaluate(dataset_dir: &Path, models: &Path, out: &Path, seed: u64, baselines: bool) -> Result<Outputs> {
    let ds = data::load(dataset_dir)?;
    let classifier = train::read_model(&models.join(train::CLASSIFIER_MODEL), "--models")?;
    std::fs::create_dir_all(out).with_context(|| format!("--out {}", out.display()))?;
    let mut o = Outputs::default();
    o.input(dataset_dir);
    o.input(models);

    let z = &ds.manifest.zscore;
    let x = dataset::zscore_apply(z, &ds.train)?;
    let xt = dataset::zscore_apply(z, &ds.test)?;
    let y = dataset::labels(&ds.train);
    let yt = dataset::labels(&ds.test);

    let pred = nn::predict_classes(&classifier, train::to_f32(xt.view()).view())?;
    let p = out.join(predictions_file(CLASSIFIER_NAME));
    write_predictions(&p, &yt, &pred)?;
    o.file(p);
    let (mlp, r) = render_classification(out, CLASSIFIER_NAME, &yt, &pred)?;
    o.extend(r);
    log::info!("classifier macro-F1 {:.3}", mlp.macro_f1);
    o.write_json(out.join(CLASSIFIER_EVAL), &mlp)?;
    let mut rows = vec![(CLASSIFIER_NAME.to_string(), mlp)];

    if baselines {
        let preds = Baseline::ALL
            .par_iter()
            .map(|&b| Ok((b, fit_predict(b, x.view(), &y, xt.view(), seed)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut reports = Vec::new();
        for (b, pred) in preds {
            let p = out.join(predictions_file(b.name()));
            write_predictions(&p, &yt, &pred)?;
            o.file(p);
            let (report, r) = render_classification(out, b.name(), &yt, &pred)?;
            o.extend(r);
            log::info!("{} macro-F1 {:.3}", b.name(), report.macro_f1);
            rows.push((b.name().to_string(), report.clone()));
            reports.push(BaselineReport { model: b, report });
        }
        o.write_json(out.join(BASELINES_EVAL), &reports)?;
    }

    let mut cloning = Vec::new();
    let mut all: Option<Vec<Sample>> = None;
    for a in Archetype::ALL {
        let info_path = models.join(train::cloner_info(a));
        if !info_path.is_file() {
            continue;
        }
        let info = ClonerInfo::load(&info_path)?;
        let model = train::read_model(&models.join(train::cloner_model(a)), "--models")?;
        if all.is_none() {
            all = Some(data::load_all(dataset_dir)?);
        }
        let held: Vec<Sample> = all
            .iter()
            .flatten()
            .filter(|s| s.label == a && ds.manifest.split.test_days.contains(&s.day))
            .cloned()
            .collect();
        if held.is_empty() {
            log::warn!("no held-out {} samples", a.name());
            continue;
        }
        let truth = info.targets(&held)?;
        let predicted = train::predict(&model, info.inputs(&held)?.view())?;
        let cols = vec![
            truth.column(0).to_vec(),
            predicted.column(0).to_vec(),
            truth.column(1).to_vec(),
            predicted.column(1).to_vec(),
        ];
        let p = out.join(cloning_file(a));
        write_cloning(&p, &cols)?;
        o.file(p);
        let (c, r) = render_cloning(out, a, &cols)?;
        o.extend(r);
        for t in &c.targets {
            log::info!("{} {}: mean gap {:.3} std, KS {:.3}", a.name(), t.target, t.mean_gap, t.ks);
        }
        cloning.push(c);
    }
    if !cloning.is_empty() {
        o.write_json(out.join(CLONING_EVAL), &cloning)?;
    }
    o.write_text(out.join(TABLE_FILE), &table(&rows))?;
    Ok(o)
}

fn write_cloning(path: &Path, cols: &[Vec<f64>]) -> Result<()> {
    let mut s = String::from("price_true,price_pred,signed_size_true,signed_size_pred\n");
    for i in 0..cols[0].len() {
        let _ = writeln!(s, "{},{},{},{}", cols[0][i], cols[1][i], cols[2][i], cols[3][i]);
    }
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// Rebuilds every chart and table from simulation logs and saved
/// predictions.
pub fn report(sim_dir: &Path, eval_dir: Option<&Path>, out: &Path) -> Result<Outputs> {
    std::fs::create_dir_all(out).with_context(|| format!("--out {}", out.display()))?;
    let mut o = Outputs::default();
    o.input(sim_dir);
    let hs = sim::DEFAULT_HORIZONS_S;
    let (days, rets) = sim::returns_by_horizon(sim_dir, &hs)?;
    let reports: Vec<_> = hs.iter().zip(&rets).map(|(&h, xs)| lob_arena_market::stylized::ReturnReport::new(h, xs)).collect();
    o.extend(sim::render_returns(out, &reports, &rets)?);
    o.write_json(out.join(sim::STYLIZED_FILE), &sim::StylizedReport { days, sampling_s: 1, reports })?;
    let Some(eval_dir) = eval_dir else {
        return Ok(o);
    };
    o.input(eval_dir);
    let mut rows = Vec::new();
    let names = std::iter::once(CLASSIFIER_NAME).chain(Baseline::ALL.iter().map(|b| b.name()));
    for m in names {
        let p = eval_dir.join(predictions_file(m));
        if !p.is_file() {
            continue;
        }
        let cols = read_columns(&p, 2)?;
        let as_labels = |c: &[f64]| c.iter().map(|&v| v as usize).collect::<Vec<_>>();
        let (r, files) = render_classification(out, m, &as_labels(&cols[0]), &as_labels(&cols[1]))?;
        o.extend(files);
        rows.push((m.to_string(), r));
    }
    if rows.is_empty() {
        bail!("--eval {}: no prediction files", eval_dir.display());
    }
    o.write_text(out.join(TABLE_FILE), &table(&rows))?;
    let mut cloning = Vec::new();
    for a in Archetype::ALL {
        let p = eval_dir.join(cloning_file(a));
        if p.is_file() {
            let (c, files) = render_cloning(out, a, &read_columns(&p, 4)?)?;
            o.extend(files);
            cloning.push(c);
        }
    }
    if !cloning.is_empty() {
        o.write_json(out.join(CLONING_EVAL), &cloning)?;
    }
    Ok(o)
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

