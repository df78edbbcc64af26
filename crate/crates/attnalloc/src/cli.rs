//! Command-line front end. `run` parses arguments, executes one subcommand
//! and returns the process exit code.

use crate::config::ConfigFile;
use crate::formats::{self, AllocationSummary};
use crate::{Error, Result};
use attnalloc_core::allocator::{allocate_uniform_for, allocate_weighted, AllocationProblem};
use attnalloc_core::attention::ground_truth;
use attnalloc_core::experiment::{ExperimentConfig, ExperimentContext};
use attnalloc_core::predict::{evaluate, fit_baseline, fit_mf, holdout_mask, Metrics};
use attnalloc_core::sparsify::sparsify_all;
use attnalloc_core::world::{generate_world, World};
use attnalloc_core::SparseAttentionRecords;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "attnalloc", version, arg_required_else_help = true)]
#[command(about = "Attention-aware rendering capacity allocation experiments")]
pub struct Cli {
    /// Master seed; overrides `experiment.seed` from the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Precomputed artifacts. Anything not given is rebuilt from the config and
/// seed exactly as `experiment` would build it.
#[derive(Debug, Args)]
pub struct Inputs {
    #[arg(long)]
    pub world: Option<PathBuf>,
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic world file.
    Generate {
        /// Also write the dense ground-truth level matrix here.
        #[arg(long)]
        truth_out: Option<PathBuf>,
    },
    /// Draw viewing histories and write the sparse records CSV.
    Sparsify {
        #[arg(long)]
        world: Option<PathBuf>,
    },
    /// Fit the factor model and write it as JSON.
    Fit {
        /// Records CSV; drawn from the world when omitted.
        #[arg(long)]
        records: Option<PathBuf>,
        /// World file, used for matrix dimensions or to draw records.
        #[arg(long)]
        world: Option<PathBuf>,
    },
    /// Held-out RMSE and MAE of the factor model and the mean baseline.
    Eval {
        #[command(flatten)]
        inputs: Inputs,
        /// Cap on held-out pairs per user.
        #[arg(long)]
        per_user: Option<usize>,
    },
    /// Solve one allocation problem.
    Allocate {
        /// Comma-separated object weights.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
              required_unless_present = "weights_file", conflicts_with = "weights_file")]
        weights: Vec<f64>,
        /// CSV with header `object_id,weight`.
        #[arg(long)]
        weights_file: Option<PathBuf>,
        /// Total capacity in K; defaults to objects × budget factor.
        #[arg(long)]
        budget: Option<f64>,
        /// Per-object minimum in K; defaults to `experiment.floor_k`.
        #[arg(long)]
        floor: Option<f64>,
        /// Split the budget evenly instead of by weight.
        #[arg(long)]
        uniform: bool,
        /// JSON summary destination.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Per-user comparison of uniform, attention-aware and oracle allocation.
    Experiment {
        #[command(flatten)]
        inputs: Inputs,
        /// JSON summary destination; defaults to `--out` with a .json extension.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Mean improvement over the configured range of budget factors.
    Sweep {
        #[command(flatten)]
        inputs: Inputs,
        /// Users to average over; defaults to `experiment.sweep_user`.
        #[arg(long, value_delimiter = ',')]
        users: Vec<usize>,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("attnalloc: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = cli.seed {
        file.experiment.seed = seed;
    }
    let out = cli.out.as_deref();
    if cli.print_config {
        let text = file.to_toml();
        return emit(out, |w| Ok(w.write_all(text.as_bytes())?));
    }
    let Some(command) = cli.command else {
        return Err(Error::Usage("a subcommand is required".into()));
    };
    let config = file.to_experiment()?;
    let seed = config.seed;
    match command {
        Command::Generate { truth_out } => {
            let world = generate_world(&config.world, seed)?;
            if let Some(path) = truth_out {
                formats::save_truth(&path, ground_truth(&world).levels())?;
            }
            emit(out, |w| formats::write_world(w, &world))
        }
        Command::Sparsify { world } => {
            let world = world_or_generate(&config, world.as_deref())?;
            let records = sparsify_all(&world, seed)?;
            emit(out, |w| formats::write_records(w, &records))
        }
        Command::Fit { records, world } => {
            let records = match (records, world) {
                (Some(r), Some(w)) => {
                    let world = formats::load_world(&w)?;
                    formats::load_records(&r, Some((world.num_users(), world.num_objects())))?
                }
                (Some(r), None) => formats::load_records(&r, None)?,
                (None, w) => sparsify_all(&world_or_generate(&config, w.as_deref())?, seed)?,
            };
            let model = fit_mf(&records, &config.fit_config())?;
            emit(out, |w| formats::write_model(w, &model))
        }
        Command::Eval { inputs, per_user } => {
            let ctx = context(&config, &inputs)?;
            let levels = ground_truth(&ctx.world).into_levels();
            let mask = holdout_mask(&ctx.records, &levels, per_user, seed);
            let mf = evaluate(&ctx.model, &levels, &mask)?;
            let baseline = evaluate(&fit_baseline(&ctx.records)?, &levels, &mask)?;
            let body = json!({
                "observed": ctx.records.len(),
                "held_out": mask.len(),
                "mf": metrics_json(&mf),
                "baseline": metrics_json(&baseline),
            });
            emit(out, |w| formats::write_summary(w, seed, &file, body))
        }
        Command::Allocate {
            weights,
            weights_file,
            budget,
            floor,
            uniform,
            summary,
        } => {
            let (ids, weights) = match weights_file {
                Some(path) => {
                    let (ids, w) = formats::read_weights(formats::open(&path)?)?;
                    (Some(ids), w)
                }
                None => (None, weights),
            };
            let budget = budget.unwrap_or(weights.len() as f64 * config.budget_factor_k);
            let problem = AllocationProblem::new(weights, budget, floor.unwrap_or(config.floor_k))?;
            let result = if uniform {
                allocate_uniform_for(&problem)?
            } else {
                allocate_weighted(&problem)?
            };
            if let Some(path) = summary {
                let s = AllocationSummary::new(&problem, &result);
                save(&path, |w| formats::write_allocation_summary(w, &s))?;
            }
            emit(out, |w| formats::write_allocation(w, ids.as_deref(), &problem, &result))
        }
        Command::Experiment { inputs, summary } => {
            let ctx = context(&config, &inputs)?;
            let result = ctx.run_all()?;
            emit(out, |w| formats::write_report_csv(w, &result.reports))?;
            let summary = summary.or_else(|| out.map(|p| p.with_extension("json")));
            if let Some(path) = summary {
                let a = &result.aggregate;
                let body = json!({
                    "aggregate": {
                        "max_improvement_pct": a.max_improvement_pct,
                        "min_improvement_pct": a.min_improvement_pct,
                        "mean_improvement_pct": a.mean_improvement_pct,
                    },
                    "reports": result.reports.iter().map(|r| json!({
                        "user_id": r.user,
                        "n_objects": r.n_objects,
                        "qoe_uniform": r.qoe_uniform,
                        "qoe_aware": r.qoe_aware,
                        "qoe_oracle": r.qoe_oracle,
                        "improvement_pct": r.improvement_pct,
                    })).collect::<Vec<_>>(),
                });
                save(&path, |w| formats::write_summary(w, seed, &file, body))?;
            }
            Ok(())
        }
        Command::Sweep {
            inputs,
            users,
            summary,
        } => {
            let ctx = context(&config, &inputs)?;
            let users = if users.is_empty() {
                vec![config.sweep_user]
            } else {
                users
            };
            let sweep = ctx.run_sweep(&users)?;
            emit(out, |w| formats::write_sweep_csv(w, &sweep))?;
            if let Some(path) = summary {
                let body = json!({
                    "users": sweep.users,
                    "points": sweep.points.iter().map(|p| json!({
                        "budget_factor_k": p.budget_factor_k,
                        "mean_improvement_pct": p.mean_improvement_pct,
                    })).collect::<Vec<_>>(),
                });
                save(&path, |w| formats::write_summary(w, seed, &file, body))?;
            }
            Ok(())
        }
    }
}

fn metrics_json(m: &Metrics) -> serde_json::Value {
    json!({ "rmse": m.rmse, "mae": m.mae, "count": m.count })
}

fn world_or_generate(config: &ExperimentConfig, path: Option<&Path>) -> Result<World> {
    match path {
        Some(p) => formats::load_world(p),
        None => Ok(generate_world(&config.world, config.seed)?),
    }
}

/// Loads whatever artifacts were given and rebuilds the rest.
fn context(config: &ExperimentConfig, inputs: &Inputs) -> Result<ExperimentContext> {
    if inputs.world.is_none() && inputs.records.is_none() && inputs.model.is_none() {
        return Ok(ExperimentContext::prepare(config)?);
    }
    let world = world_or_generate(config, inputs.world.as_deref())?;
    let dims = (world.num_users(), world.num_objects());
    let records: SparseAttentionRecords = match &inputs.records {
        Some(p) => formats::load_records(p, Some(dims))?,
        None => sparsify_all(&world, config.seed)?,
    };
    let model = match &inputs.model {
        Some(p) => formats::load_model(p)?,
        None => fit_mf(&records, &config.fit_config())?,
    };
    if (model.num_users, model.num_objects) != dims {
        return Err(Error::Format(format!(
            "model is {}x{} but the world is {}x{}",
            model.num_users, model.num_objects, dims.0, dims.1
        )));
    }
    Ok(ExperimentContext {
        config: config.clone(),
        truth: ground_truth(&world),
        world,
        records,
        model,
        link: config.link.resolve()?,
    })
}

fn save<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn emit<F>(out: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => save(path, body),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            Ok(lock.flush()?)
        }
    }
}
