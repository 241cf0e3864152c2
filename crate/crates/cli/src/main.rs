//! `nbrw` — experiment driver for non-backtracking walk studies: generate
//! graphs, measure mixing, histogram visit counts against the Poisson law,
//! and evaluate sieve bounds. Outputs are deterministic in (config, seed);
//! exit codes: 0 ok, 2 bad config, 3 mathematical refusal, 4 resource cap.

mod commands;
mod config;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, Parser, Subcommand};
use commands::{Meta, SievePreset, Sink};
use config::{config_hash, FileConfig, GraphSource};
use nbrw::graph::GraphError;
use nbrw::sieve::SieveError;
use nbrw::spectral::SpectralError;
use nbrw::stats::StatsError;
use nbrw::walk::{WalkError, WalkKind};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "nbrw", version, about = "non-backtracking random walk laboratory")]
struct Cli {
    /// Defaults file of `key = value` lines; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed; recorded in every output.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker pool size, 0 = one per core. Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory. Without it, results stream to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and write its edge list.
    Generate {
        /// named:NAME | random:n=..,d=..[,girth=..]
        #[arg(long)]
        graph: Option<String>,
        /// Skip the eigenvalue summary (cheaper on huge graphs).
        #[arg(long, action = ArgAction::SetTrue)]
        no_spectral: bool,
    },
    /// Exact mixing report: rho, the fine mixing time, per-step deviations.
    Mixing {
        /// named:NAME | file:PATH | random:n=..,d=..
        #[arg(long)]
        graph: Option<String>,
        /// Largest step count to examine.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Visit-count histograms over walk trials, against the Poisson law.
    Visits {
        /// named:NAME | file:PATH | random:n=..,d=..
        #[arg(long)]
        graph: Option<String>,
        /// nbrw | srw
        #[arg(long)]
        walk: Option<String>,
        /// Steps per walk; defaults to the vertex count.
        #[arg(long)]
        length: Option<usize>,
        /// Start vertex.
        #[arg(long)]
        start: Option<u32>,
        /// Independent walks to aggregate.
        #[arg(long)]
        trials: Option<usize>,
        /// Drop vertices within this BFS distance of the start.
        #[arg(long)]
        radius: Option<usize>,
        /// Report deviations for t up to this.
        #[arg(long)]
        t_range: Option<usize>,
        /// Replace walks by the balls-and-bins reference experiment.
        #[arg(long, action = ArgAction::SetTrue)]
        oracle: bool,
        /// Bin count for oracle mode (defaults to the graph size).
        #[arg(long)]
        bins: Option<usize>,
        /// Record the full vertex path (trials = 1 only).
        #[arg(long, action = ArgAction::SetTrue)]
        trace: bool,
    },
    /// Bonferroni bounds from a factorial-moment table.
    Sieve {
        /// JSON moment table produced earlier.
        #[arg(long)]
        table: Option<PathBuf>,
        /// poisson:mu=..,r=.. | coin:p=..
        #[arg(long)]
        preset: Option<String>,
        /// Estimate the table from walk trials instead.
        #[arg(long, action = ArgAction::SetTrue)]
        from_trials: bool,
        /// Graph for --from-trials.
        #[arg(long)]
        graph: Option<String>,
        /// nbrw | srw (for --from-trials).
        #[arg(long)]
        walk: Option<String>,
        /// Steps per walk for --from-trials; defaults to the vertex count.
        #[arg(long)]
        length: Option<usize>,
        /// Start vertex for --from-trials.
        #[arg(long)]
        start: Option<u32>,
        /// Walks to estimate moments from.
        #[arg(long)]
        trials: Option<usize>,
        /// Vertices whose visit counts form the joint vector, e.g. 0,17,42.
        #[arg(long)]
        targets: Option<String>,
        /// Target tuple for the bounds, e.g. 1,1. Defaults to all zeros.
        #[arg(long)]
        m: Option<String>,
        /// Sandwich depth kmax.
        #[arg(long)]
        depth: Option<usize>,
    },
}

/// Flag value if given, else the config-file value, else None.
fn opt<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get::<T>(key),
    }
}

fn parse_walk(s: &str) -> Result<WalkKind> {
    match s {
        "nbrw" => Ok(WalkKind::Nbrw),
        "srw" => Ok(WalkKind::Srw),
        _ => bail!("walk must be `nbrw` or `srw`, got `{s}`"),
    }
}

fn parse_tuple<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|tok| tok.trim().parse::<T>().map_err(|e| anyhow!("{what} `{tok}`: {e}")))
        .collect()
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "auto".to_string(),
    }
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    let file = FileConfig::load(cli.config.as_deref())?;

    let seed = opt(cli.seed, &file, "seed")?.unwrap_or(0);
    let threads = opt(cli.threads, &file, "threads")?.unwrap_or(0);
    let out = match cli.out {
        Some(dir) => Some(dir),
        None => file.get::<PathBuf>("out")?,
    };
    let sink = Sink::new(out);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building the worker pool")?;

    match cli.command {
        Command::Generate { graph, no_spectral } => {
            let source: GraphSource = opt(graph, &file, "graph")?
                .ok_or_else(|| anyhow!("generate needs --graph"))?
                .parse()?;
            let spectral = if no_spectral {
                false
            } else {
                file.get::<bool>("spectral")?.unwrap_or(true)
            };
            let hash = config_hash(&[
                ("cmd", "generate".into()),
                ("graph", source.canonical()),
                ("seed", seed.to_string()),
                ("spectral", spectral.to_string()),
            ]);
            let meta = Meta::new(seed, hash);
            pool.install(|| commands::cmd_generate(&source, spectral, &meta, &sink))
        }
        Command::Mixing { graph, cap } => {
            let source: GraphSource = opt(graph, &file, "graph")?
                .ok_or_else(|| anyhow!("mixing needs --graph"))?
                .parse()?;
            let cap = opt(cap, &file, "cap")?.unwrap_or(200);
            if cap < 1 {
                bail!("--cap must be at least 1");
            }
            let hash = config_hash(&[
                ("cmd", "mixing".into()),
                ("graph", source.canonical()),
                ("cap", cap.to_string()),
                ("seed", seed.to_string()),
            ]);
            let meta = Meta::new(seed, hash);
            pool.install(|| commands::cmd_mixing(&source, cap, &meta, &sink))
        }
        Command::Visits {
            graph,
            walk,
            length,
            start,
            trials,
            radius,
            t_range,
            oracle,
            bins,
            trace,
        } => {
            let source = opt(graph, &file, "graph")?
                .map(|s| s.parse::<GraphSource>())
                .transpose()?;
            let walk = match opt(walk, &file, "walk")? {
                Some(s) => parse_walk(&s)?,
                None => WalkKind::Nbrw,
            };
            let params = commands::VisitsParams {
                source,
                walk,
                oracle: oracle || file.get::<bool>("oracle")?.unwrap_or(false),
                length: opt(length, &file, "length")?,
                start: opt(start, &file, "start")?.unwrap_or(0),
                trials: opt(trials, &file, "trials")?.unwrap_or(1),
                radius: opt(radius, &file, "radius")?.unwrap_or(0),
                t_range: opt(t_range, &file, "t_range")?.unwrap_or(6),
                bins: opt(bins, &file, "bins")?,
                trace: trace || file.get::<bool>("trace")?.unwrap_or(false),
            };
            if params.trials < 1 {
                bail!("--trials must be at least 1");
            }
            let hash = config_hash(&[
                ("cmd", "visits".into()),
                ("graph", params.source.as_ref().map_or("none".into(), |s| s.canonical())),
                ("walk", if params.oracle {
                    "balls-bins".into()
                } else {
                    format!("{:?}", params.walk).to_lowercase()
                }),
                ("length", fmt_opt(&params.length)),
                ("start", params.start.to_string()),
                ("trials", params.trials.to_string()),
                ("radius", params.radius.to_string()),
                ("t_range", params.t_range.to_string()),
                ("bins", fmt_opt(&params.bins)),
                ("trace", params.trace.to_string()),
                ("seed", seed.to_string()),
            ]);
            let meta = Meta::new(seed, hash);
            pool.install(|| commands::cmd_visits(&params, &meta, &sink))
        }
        Command::Sieve {
            table,
            preset,
            from_trials,
            graph,
            walk,
            length,
            start,
            trials,
            targets,
            m,
            depth,
        } => {
            let source = opt(graph, &file, "graph")?
                .map(|s| s.parse::<GraphSource>())
                .transpose()?;
            let walk = match opt(walk, &file, "walk")? {
                Some(s) => parse_walk(&s)?,
                None => WalkKind::Nbrw,
            };
            let preset = preset.map(|s| s.parse::<SievePreset>()).transpose()?;
            let targets = match opt(targets, &file, "targets")? {
                Some(s) => parse_tuple::<u32>(&s, "target vertex")?,
                None => Vec::new(),
            };
            let m = match opt(m, &file, "m")? {
                Some(s) => Some(parse_tuple::<usize>(&s, "tuple entry")?),
                None => None,
            };
            let params = commands::SieveParams {
                table,
                preset,
                from_trials,
                source,
                walk,
                length: opt(length, &file, "length")?,
                start: opt(start, &file, "start")?.unwrap_or(0),
                trials: opt(trials, &file, "trials")?.unwrap_or(1),
                targets,
                m,
                depth: opt(depth, &file, "depth")?.unwrap_or(12),
            };
            let hash = config_hash(&[
                ("cmd", "sieve".into()),
                ("table", params.table.as_ref().map_or("none".into(), |p| p.display().to_string())),
                ("preset", params.preset.as_ref().map_or("none".into(), |p| format!("{p:?}"))),
                ("from_trials", params.from_trials.to_string()),
                ("graph", params.source.as_ref().map_or("none".into(), |s| s.canonical())),
                ("walk", format!("{:?}", params.walk).to_lowercase()),
                ("length", fmt_opt(&params.length)),
                ("start", params.start.to_string()),
                ("trials", params.trials.to_string()),
                ("targets", params.targets.iter().map(u32::to_string).collect::<Vec<_>>().join(",")),
                ("m", params.m.as_ref().map_or("auto".into(), |m| {
                    m.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
                })),
                ("depth", params.depth.to_string()),
                ("seed", seed.to_string()),
            ]);
            let meta = Meta::new(seed, hash);
            pool.install(|| commands::cmd_sieve(&params, &meta, &sink))
        }
    }
}

/// 2 = invalid config or input, 3 = the mathematics refuses (bipartite,
/// infeasible, table too small), 4 = a resource cap was hit.
fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(e) = err.downcast_ref::<GraphError>() {
        return match e {
            GraphError::Format(_) | GraphError::Io(_) => 2,
            GraphError::AttemptsExhausted(_) => 4,
            _ => 3,
        };
    }
    if let Some(e) = err.downcast_ref::<SpectralError>() {
        return match e {
            SpectralError::NoConvergence { .. } | SpectralError::HorizonExceeded { .. } => 4,
            _ => 3,
        };
    }
    if let Some(e) = err.downcast_ref::<WalkError>() {
        return match e {
            WalkError::BadStart { .. } => 2,
            WalkError::DegreeTooSmall { .. } => 3,
        };
    }
    if let Some(e) = err.downcast_ref::<SieveError>() {
        return match e {
            SieveError::TableTooSmall { .. } => 3,
            SieveError::OverflowRisk(_) => 4,
            _ => 2,
        };
    }
    if err.downcast_ref::<StatsError>().is_some() {
        return 3;
    }
    2
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("nbrw: {err:#}");
            std::process::exit(exit_code(&err));
        }
    }
}
