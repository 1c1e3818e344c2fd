//! Command-line front end for the obus simulation lab.
//!
//! Subcommands:
//!
//! * `generate` — write one trial's catalog, query pools, and oracle profile.
//! * `run`      — run a single strategy arm over the trial grid.
//! * `compare`  — run the baseline comparison arms.
//! * `ablate`   — run the score-ablation arms.
//! * `plot`     — render line plots from a previously written CSV.
//!
//! Every command exits 0 on success and 1 with a diagnostic on stderr
//! otherwise. Flags override values loaded from `--config`.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use obus_core::controller::{build_world, run_trial_observed};
use obus_core::harness::{aggregate, read_csv, sort_records, write_csv, write_meta};
use obus_core::plot::write_plot;
use obus_core::poolgen::write_queries;
use obus_core::regression::FittedModel;
use obus_core::{run_experiment, ExperimentConfig, ExperimentOutput, MetricKind, StrategyKind};

#[derive(Debug, Parser)]
#[command(
    name = "obus",
    version,
    about = "Simulation lab for output-biased uncertainty sampling in active preference learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one trial's world: catalog, train/test pools, oracle profile
    Generate(GenerateArgs),
    /// Run a single strategy arm and write its CSV, metadata, and plots
    Run(RunArgs),
    /// Run the baseline comparison arms: obus_full, uncertainty, random
    Compare(ExperimentArgs),
    /// Run the ablation arms: obus_full, obus_no_freq, obus_no_discovery, obus_base_only
    Ablate(ExperimentArgs),
    /// Render line plots from a previously written results CSV
    Plot(PlotArgs),
}

/// Options shared by every experiment-running subcommand.
#[derive(Debug, Args)]
struct CommonOpts {
    /// Flat TOML config file; the flags below override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory artifacts are written into (created if missing)
    #[arg(long, value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,

    /// Worker threads for trial execution; 0 means one per logical CPU.
    /// Output bytes are identical for any worker count
    #[arg(long, default_value_t = 0)]
    workers: usize,

    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,

    /// Override the number of paired trials
    #[arg(long)]
    trials: Option<u32>,

    /// Override the number of feedback rounds per trial
    #[arg(long)]
    rounds: Option<u32>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Flat TOML config file; the flags below override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory artifacts are written into (created if missing)
    #[arg(long, value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,

    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,

    /// Which paired trial's world to write
    #[arg(long, default_value_t = 0)]
    trial: u32,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonOpts,

    /// Strategy arm: obus_full, obus_no_freq, obus_no_discovery,
    /// obus_base_only, uncertainty, or random
    #[arg(long)]
    strategy: StrategyKind,

    /// Also write per-round fitted coefficients for trial 0
    #[arg(long)]
    dump_models: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Results CSV produced by run/compare/ablate
    #[arg(value_name = "CSV")]
    input: PathBuf,

    /// Metric to plot: error_vb_extreme, mae_overall, n_relevant_discovered,
    /// or n_features_seen; omit to plot all four
    #[arg(long)]
    metric: Option<MetricKind>,

    /// Directory plots are written into (created if missing)
    #[arg(long, value_name = "DIR", default_value = "out")]
    out_dir: PathBuf,
}

fn main() {
    if let Err(err) = dispatch(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => {
            let mut cfg = load_config(&args.common)?;
            cfg.strategies =
                vec![StrategyKind::ObusFull, StrategyKind::Uncertainty, StrategyKind::Random];
            execute_experiment(&cfg, &args.common, "compare")
        }
        Command::Ablate(args) => {
            let mut cfg = load_config(&args.common)?;
            cfg.strategies = vec![
                StrategyKind::ObusFull,
                StrategyKind::ObusNoFreq,
                StrategyKind::ObusNoDiscovery,
                StrategyKind::ObusBaseOnly,
            ];
            execute_experiment(&cfg, &args.common, "ablation")
        }
        Command::Plot(args) => cmd_plot(args),
    }
}

/// Load the config file (or defaults) and apply flag overrides.
fn load_config(opts: &CommonOpts) -> Result<ExperimentConfig> {
    let mut cfg = match &opts.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = opts.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = opts.trials {
        cfg.trials = trials;
    }
    if let Some(rounds) = opts.rounds {
        cfg.rounds = rounds;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;

    let world = build_world(&cfg, args.trial)?;
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let catalog_path = args.out_dir.join("catalog.txt");
    let mut catalog_text = String::from("feature,probability\n");
    for (i, p) in world.catalog.probs().iter().enumerate() {
        let _ = writeln!(catalog_text, "{i},{p}");
    }
    fs::write(&catalog_path, catalog_text)
        .with_context(|| format!("writing {}", catalog_path.display()))?;

    let train_path = args.out_dir.join("train.txt");
    let test_path = args.out_dir.join("test.txt");
    let oracle_path = args.out_dir.join("oracle.txt");
    write_queries(&world.train, &train_path)?;
    write_queries(&world.test, &test_path)?;
    world.oracle.dump_profile(&oracle_path)?;

    println!(
        "trial {} world: {} features, {} train / {} test queries, {} relevant features",
        args.trial,
        world.catalog.probs().len(),
        world.train.len(),
        world.test.len(),
        world.oracle.relevant_count()
    );
    for p in [&catalog_path, &train_path, &test_path, &oracle_path] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    cfg.strategies = vec![args.strategy];
    execute_experiment(&cfg, &args.common, args.strategy.label())?;

    if args.dump_models {
        let path = args.common.out_dir.join(format!("{}_models_trial0.txt", args.strategy.label()));
        let mut text = format!(
            "# per-round fitted coefficients, strategy {}, trial 0\n",
            args.strategy.label()
        );
        let mut observer = |round: u32, model: &FittedModel| {
            append_model(&mut text, round, model);
        };
        run_trial_observed(&cfg, args.strategy, 0, Some(&mut observer))?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Run the experiment grid and write `<stem>.csv`, `<stem>_meta.txt`, and one
/// SVG per metric.
fn execute_experiment(cfg: &ExperimentConfig, opts: &CommonOpts, stem: &str) -> Result<()> {
    fs::create_dir_all(&opts.out_dir)
        .with_context(|| format!("creating {}", opts.out_dir.display()))?;
    let output = run_experiment(cfg, opts.workers)?;

    let csv_path = opts.out_dir.join(format!("{stem}.csv"));
    write_csv(&output.records, &csv_path)?;
    println!("wrote {} ({} rows)", csv_path.display(), output.records.len());

    let meta_path = opts.out_dir.join(format!("{stem}_meta.txt"));
    write_meta(cfg, &output, &meta_path)?;
    println!("wrote {}", meta_path.display());

    for metric in MetricKind::all() {
        let plot_path = opts.out_dir.join(format!("{stem}_{}.svg", metric.label()));
        write_plot(&output.curves, metric, &plot_path)?;
        println!("wrote {}", plot_path.display());
    }

    report_truncation(&output);
    Ok(())
}

fn report_truncation(output: &ExperimentOutput) {
    if output.truncated_runs > 0 {
        eprintln!(
            "warning: {} run(s) exhausted the train pool before the configured round count",
            output.truncated_runs
        );
    }
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let mut records = read_csv(&args.input)?;
    sort_records(&mut records);
    let curves = aggregate(&records);
    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results")
        .to_string();
    let metrics: Vec<MetricKind> = match args.metric {
        Some(m) => vec![m],
        None => MetricKind::all().to_vec(),
    };
    for metric in metrics {
        let path = args.out_dir.join(format!("{stem}_{}.svg", metric.label()));
        write_plot(&curves, metric, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// One block per round: example count, active feature count, and each
/// coefficient with its standard error (`-` when the wide fallback applies).
fn append_model(out: &mut String, round: u32, model: &FittedModel) {
    if model.coefficients().is_empty() {
        let _ = writeln!(out, "round {round}: n={} no active features", model.n_examples());
        return;
    }
    let _ = writeln!(
        out,
        "round {round}: n={} active={}",
        model.n_examples(),
        model.coefficients().len()
    );
    for c in model.coefficients() {
        match c.std_error {
            Some(se) => {
                let _ = writeln!(out, "  feature {:>4}  weight {:>12.6}  se {:.6}", c.feature.0, c.weight, se);
            }
            None => {
                let _ = writeln!(out, "  feature {:>4}  weight {:>12.6}  se -", c.feature.0, c.weight);
            }
        }
    }
}
