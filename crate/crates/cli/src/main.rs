use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lob_arena::manifest::Stage;
use lob_arena::pipeline::{run_all, PipelineConfig};
use lob_arena::{data, eval, sim, train};
use lob_arena_market::agents::Archetype;
use serde_json::json;

#[derive(Parser)]
#[command(name = "lob-arena", version, about = "Agent-based limit order book simulation and order-flow learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Built-in scenario: `small` or `default`.
    #[arg(long)]
    preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Override the number of simulated days.
    #[arg(long)]
    days: Option<u32>,
    /// Also write a per-day event trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the market simulation and write per-day logs.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Return statistics from the L2 logs of a run.
    StylizedFacts {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated horizons in seconds.
        #[arg(long, default_value = "60,600")]
        horizons: String,
    },
    /// Build the labelled, balanced and split dataset from a run.
    Dataset {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        train_days: usize,
        #[arg(long, default_value_t = 2)]
        test_days: usize,
    },
    /// Train the archetype classifier.
    TrainClassifier {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        /// Hyperparameter JSON; missing fields take defaults.
        #[arg(long)]
        hyperparams: Option<PathBuf>,
        /// Random-search trials scored on the last training day.
        #[arg(long, default_value_t = 0)]
        search_budget: usize,
    },
    /// Train one behavioural cloner per archetype.
    TrainCloner {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        hyperparams: Option<PathBuf>,
        #[arg(long, default_value_t = train::CLONER_MAX_SAMPLES)]
        max_samples: usize,
        /// Restrict to these archetypes (repeatable).
        #[arg(long)]
        archetype: Vec<String>,
    },
    /// Score trained models and the baselines on the test days.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// Directory holding the trained models.
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        no_baselines: bool,
    },
    /// Regenerate charts and tables from logs and saved predictions.
    Report {
        #[arg(long)]
        sim: PathBuf,
        #[arg(long)]
        eval: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate, build the dataset, train, evaluate and report.
    All {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        cloner_epochs: Option<usize>,
        #[arg(long, default_value_t = 0)]
        search_budget: usize,
        #[arg(long)]
        no_baselines: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate { .. } => "simulate",
            Command::StylizedFacts { .. } => "stylized-facts",
            Command::Dataset { .. } => "dataset",
            Command::TrainClassifier { .. } => "train-classifier",
            Command::TrainCloner { .. } => "train-cloner",
            Command::Evaluate { .. } => "evaluate",
            Command::Report { .. } => "report",
            Command::All { .. } => "all",
        }
    }
}

fn scenario(a: &ScenarioArgs, seed: u64) -> Result<lob_arena_market::scenario::ScenarioConfig> {
    let mut cfg = sim::resolve_scenario(a.preset.as_deref(), a.scenario.as_deref(), seed, a.days)?;
    cfg.trace |= a.trace;
    Ok(cfg)
}

fn with_epochs(hp: lob_arena_core::nn::Hyperparams, epochs: Option<usize>) -> lob_arena_core::nn::Hyperparams {
    match epochs {
        Some(e) => lob_arena_core::nn::Hyperparams { epochs: e, ..hp },
        None => hp,
    }
}

fn run(cmd: Command) -> Result<()> {
    let name = cmd.name();
    match cmd {
        Command::Simulate { scenario: a, seed, out } => {
            let cfg = scenario(&a, seed)?;
            let stage = Stage::start(name, &cfg, Some(seed))?;
            let o = sim::simulate(&cfg, &out)?;
            stage.finish(&out, &o)?;
        }
        Command::StylizedFacts { run, out, horizons } => {
            let hs = sim::parse_horizons(&horizons)?;
            let stage = Stage::start(name, &hs, None)?;
            let o = sim::stylized_facts(&run, &out, &hs)?;
            stage.finish(&out, &o)?;
        }
        Command::Dataset { run, out, seed, train_days, test_days } => {
            let stage = Stage::start(name, &(train_days, test_days), Some(seed))?;
            let o = data::build(&run, &out, seed, train_days, test_days)?;
            stage.finish(&out, &o)?;
        }
        Command::TrainClassifier { dataset, out, seed, epochs, hyperparams, search_budget } => {
            let hp = with_epochs(train::load_hyperparams(hyperparams.as_deref())?, epochs);
            let stage = Stage::start(name, &(&hp, search_budget), Some(seed))?;
            let o = train::train_classifier(&dataset, &out, seed, &hp, search_budget)?;
            stage.finish(&out, &o)?;
        }
        Command::TrainCloner { dataset, out, seed, epochs, hyperparams, max_samples, archetype } => {
            let base = match hyperparams {
                Some(p) => train::load_hyperparams(Some(&p))?,
                None => lob_arena_core::nn::Hyperparams { epochs: train::CLONER_EPOCHS, ..Default::default() },
            };
            let hp = with_epochs(base, epochs);
            let which = if archetype.is_empty() {
                Archetype::ALL.to_vec()
            } else {
                archetype
                    .iter()
                    .map(|s| Archetype::parse(&s.to_uppercase()).with_context(|| format!("--archetype: unknown `{s}`")))
                    .collect::<Result<_>>()?
            };
            let stage = Stage::start(name, &(&hp, max_samples, &which), Some(seed))?;
            let o = train::train_cloners(&dataset, &out, seed, &hp, max_samples, &which)?;
            stage.finish(&out, &o)?;
        }
        Command::Evaluate { dataset, models, out, seed, no_baselines } => {
            let Some(models) = models else {
                bail!("--models: path to trained models is required");
            };
            let stage = Stage::start(name, &!no_baselines, Some(seed))?;
            let o = eval::evaluate(&dataset, &models, &out, seed, !no_baselines)?;
            stage.finish(&out, &o)?;
        }
        Command::Report { sim, eval: e, out } => {
            let stage = Stage::start(name, &(), None)?;
            let o = eval::report(&sim, e.as_deref(), &out)?;
            stage.finish(&out, &o)?;
        }
        Command::All { scenario: a, seed, out, epochs, cloner_epochs, search_budget, no_baselines } => {
            let mut cfg = PipelineConfig::new(scenario(&a, seed)?);
            cfg.classifier = with_epochs(cfg.classifier, epochs);
            cfg.cloner = with_epochs(cfg.cloner, cloner_epochs);
            cfg.search_budget = search_budget;
            cfg.baselines = !no_baselines;
            run_all(&cfg, &out)?;
        }
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("LOB_ARENA_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).with_context(|| format!("LOB_ARENA_THREADS: expected a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn fail(command: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "status": "error", "command": command, "message": message }));
    ExitCode::from(2)
}

/// Clap's multi-line message folded onto one line, without the usage block.
fn one_line(e: &clap::Error) -> String {
    let text = e.to_string();
    let mut parts = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with("Usage:") || line.starts_with("For more information") {
            break;
        }
        if !line.is_empty() {
            parts.push(line.trim_start_matches("error: "));
        }
    }
    parts.join(" ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", one_line(&e)),
    };
    if let Err(e) = init_threads() {
        return fail("init", format!("{e:#}"));
    }
    let name = cli.command.name();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(name, format!("{e:#}")),
    }
}

