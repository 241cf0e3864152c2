//! The four experiment stages behind the subcommands. Every byte that
//! reaches a file or stdout is deterministic in (config, seed); wall-clock
//! timestamps go only to the run.log sidecar.

use crate::config::GraphSource;
use anyhow::{anyhow, bail, Context, Result};
use nbrw::graph::write_edge_list;
use nbrw::sieve::{
    bonferroni_bounds, factorial_moments_exact, factorial_moments_mc, FactorialMomentTable,
    JointPmf, PoissonParams, SieveBounds,
};
use nbrw::spectral::{default_tolerance, fine_mixing_time_tau, second_eigenvalue};
use nbrw::stats::{balls_and_bins, compare_to_poisson, expected_fraction, visit_histogram,
    ComparisonReport, VisitHistogram};
use nbrw::walk::{run_trials, VisitCounts, WalkConfig, WalkKind};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

/// Provenance block embedded in every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub seed: u64,
    pub config_hash: String,
}

impl Meta {
    pub fn new(seed: u64, config_hash: String) -> Self {
        Self { version: env!("CARGO_PKG_VERSION"), seed, config_hash }
    }

    fn comment_block(&self) -> String {
        format!(
            "# version={}\n# seed={}\n# config={}\n",
            self.version, self.seed, self.config_hash
        )
    }
}

#[derive(Serialize)]
struct Envelope<'m, T: Serialize> {
    meta: &'m Meta,
    report: T,
}

fn render_json<T: Serialize>(meta: &Meta, report: T) -> String {
    let mut text = serde_json::to_string_pretty(&Envelope { meta, report })
        .expect("reports serialize infallibly");
    text.push('\n');
    text
}

/// Output routing: files under a directory (plus run.log) or plain stdout.
pub struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Self { out }
    }

    pub fn to_files(&self) -> bool {
        self.out.is_some()
    }

    /// Writes `name` under the output directory and echoes the path, or
    /// streams the content to stdout when no directory was given.
    fn emit(&self, name: &str, content: &str) -> Result<()> {
        match &self.out {
            None => {
                print!("{content}");
                Ok(())
            }
            Some(dir) => {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
                let path = dir.join(name);
                std::fs::write(&path, content)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
                Ok(())
            }
        }
    }

    /// Appends one timestamped line to the sidecar log. Only the sidecar
    /// may carry wall-clock time; everything else must rerun bit-for-bit.
    fn log(&self, command: &str, meta: &Meta) -> Result<()> {
        let Some(dir) = &self.out else {
            return Ok(());
        };
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join("run.log"))
            .context("opening run.log")?;
        writeln!(file, "{secs} {command} seed={} config={}", meta.seed, meta.config_hash)
            .context("writing run.log")?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// generate

pub fn cmd_generate(
    source: &GraphSource,
    spectral: bool,
    meta: &Meta,
    sink: &Sink,
) -> Result<i32> {
    if matches!(source, GraphSource::File(_)) {
        bail!("generate builds a graph; `file:` is already one (use named:* or random:*)");
    }
    let g = source.load(meta.seed)?;

    let mut text = meta.comment_block();
    let mut body = Vec::new();
    write_edge_list(&g, &mut body)?;
    text.push_str(&String::from_utf8(body).expect("edge lists are ascii"));

    let girth = match g.girth() {
        Some(c) => c.to_string(),
        None => "none".to_string(),
    };
    let mut summary = format!(
        "graph: n={} d={} edges={} girth={girth}\n",
        g.vertex_count(),
        g.degree(),
        g.edge_count()
    );
    if spectral {
        let s = second_eigenvalue::<f64>(&g, default_tolerance())?;
        let _ = writeln!(summary, "spectral: lambda={:.12} gap={}", s.lambda, s.has_gap());
    }

    sink.emit("graph.edges", &text)?;
    if sink.to_files() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    sink.log("generate", meta)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// mixing

pub fn cmd_mixing(source: &GraphSource, cap: usize, meta: &Meta, sink: &Sink) -> Result<i32> {
    let g = source.load(meta.seed)?;
    let report = fine_mixing_time_tau::<f64>(&g, cap)?;

    sink.emit("mixing.json", &render_json(meta, &report))?;
    if sink.to_files() {
        let csv = format!("{}{}", meta.comment_block(), report.dev_csv());
        sink.emit("dev.csv", &csv)?;
    }
    sink.log("mixing", meta)?;

    if report.tau.is_none() {
        eprintln!("nbrw: deviation still above 1/n^2 at the cap of {cap} steps");
        return Ok(4);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// visits

pub struct VisitsParams {
    pub source: Option<GraphSource>,
    pub walk: WalkKind,
    pub oracle: bool,
    pub length: Option<usize>,
    pub start: u32,
    pub trials: usize,
    pub radius: usize,
    pub t_range: usize,
    pub bins: Option<usize>,
    pub trace: bool,
}

#[derive(Serialize)]
struct VisitsReport {
    walk: &'static str,
    n: usize,
    m: usize,
    trials: usize,
    radius: usize,
    mu: f64,
    counted_vertices: u64,
    counted_visits: u64,
    per_trial_max: Vec<usize>,
    comparison: ComparisonReport<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<u32>>,
}

pub fn cmd_visits(params: &VisitsParams, meta: &Meta, sink: &Sink) -> Result<i32> {
    if params.trace && params.trials != 1 {
        bail!("--trace records a single path; it needs trials = 1");
    }

    let mut trace = None;
    let (walk_label, n, m, hists): (&'static str, usize, usize, Vec<VisitHistogram>) =
        if params.oracle {
            let n = match (params.bins, &params.source) {
                (Some(bins), _) => bins,
                (None, Some(source)) => source.load(meta.seed)?.vertex_count(),
                (None, None) => bail!("oracle mode needs --bins or a graph source"),
            };
            let m = params.length.unwrap_or(n);
            let hists = (0..params.trials as u64)
                .map(|t| balls_and_bins(m, n, meta.seed.wrapping_add(t)))
                .collect();
            ("balls-bins", n, m, hists)
        } else {
            let source = params
                .source
                .as_ref()
                .ok_or_else(|| anyhow!("visits needs a graph source"))?;
            let g = source.load(meta.seed)?;
            let n = g.vertex_count();
            let m = params.length.unwrap_or(n);
            let mut cfg = WalkConfig::new(params.walk, m, params.start, meta.seed);
            if params.trace {
                cfg = cfg.with_trace();
            }
            let samples: Vec<VisitCounts> = run_trials(&g, &cfg, params.trials)?;
            if params.trace {
                trace = samples[0].trace.clone();
            }
            let label = match params.walk {
                WalkKind::Nbrw => "nbrw",
                WalkKind::Srw => "srw",
            };
            let hists =
                samples.iter().map(|s| visit_histogram(s, &g, params.radius)).collect();
            (label, n, m, hists)
        };

    let mut merged = hists[0].clone();
    for h in &hists[1..] {
        merged.merge(h);
    }
    let mu = m as f64 / n as f64;

    // per-t series: mean count, mean fraction and its standard error over
    // the trials, next to the Poisson reference
    let mut csv = meta.comment_block();
    csv.push_str("t,mean_count,mean_fraction,stderr,poisson_reference\n");
    let trials_f = params.trials as f64;
    for t in 0..=merged.max_visit() {
        let fractions: Vec<f64> = hists
            .iter()
            .map(|h| h.count(t) as f64 / h.counted_vertices() as f64)
            .collect();
        let mean = fractions.iter().sum::<f64>() / trials_f;
        let stderr = if params.trials >= 2 {
            let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>()
                / (trials_f - 1.0);
            (var / trials_f).sqrt()
        } else {
            0.0
        };
        let mean_count = merged.count(t) as f64 / trials_f;
        let reference = expected_fraction(t, mu);
        let _ = writeln!(csv, "{t},{mean_count},{mean},{stderr},{reference}");
    }

    let report = VisitsReport {
        walk: walk_label,
        n,
        m,
        trials: params.trials,
        radius: params.radius,
        mu,
        counted_vertices: merged.counted_vertices(),
        counted_visits: merged.counted_visits(),
        per_trial_max: hists.iter().map(VisitHistogram::max_visit).collect(),
        comparison: compare_to_poisson(&merged, mu, params.t_range),
        trace,
    };

    sink.emit("visits.json", &render_json(meta, &report))?;
    if sink.to_files() {
        sink.emit("visits.csv", &csv)?;
    }
    sink.log("visits", meta)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// sieve

/// Built-in moment tables: an exact Poisson product or a biased coin.
#[derive(Debug, Clone, PartialEq)]
pub enum SievePreset {
    Poisson { mu: f64, r: usize },
    Coin { p: f64 },
}

impl FromStr for SievePreset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "poisson" => {
                let mut mu = 1.0f64;
                let mut r = 1usize;
                for field in rest.split(',').filter(|f| !f.is_empty()) {
                    match field.split_once('=') {
                        Some(("mu", v)) => mu = v.parse().context("preset mu")?,
                        Some(("r", v)) => r = v.parse().context("preset r")?,
                        _ => bail!("poisson preset: unknown field `{field}`"),
                    }
                }
                Ok(SievePreset::Poisson { mu, r })
            }
            "coin" => {
                let mut p = 0.5f64;
                for field in rest.split(',').filter(|f| !f.is_empty()) {
                    match field.split_once('=') {
                        Some(("p", v)) => p = v.parse().context("preset p")?,
                        _ => bail!("coin preset: unknown field `{field}`"),
                    }
                }
                if !(0.0..=1.0).contains(&p) {
                    bail!("coin preset: p = {p} is not a probability");
                }
                Ok(SievePreset::Coin { p })
            }
            _ => bail!("unknown preset `{s}` (try poisson:mu=1,r=1 or coin:p=0.5)"),
        }
    }
}

pub struct SieveParams {
    pub table: Option<PathBuf>,
    pub preset: Option<SievePreset>,
    pub from_trials: bool,
    pub source: Option<GraphSource>,
    pub walk: WalkKind,
    pub length: Option<usize>,
    pub start: u32,
    pub trials: usize,
    pub targets: Vec<u32>,
    pub m: Option<Vec<usize>>,
    pub depth: usize,
}

#[derive(Serialize)]
struct SieveReport {
    source: String,
    depth: usize,
    bounds: SieveBounds<f64>,
}

pub fn cmd_sieve(params: &SieveParams, meta: &Meta, sink: &Sink) -> Result<i32> {
    if params.depth < 1 {
        bail!("--depth must be at least 1");
    }
    let chosen = [params.table.is_some(), params.preset.is_some(), params.from_trials];
    if chosen.iter().filter(|&&c| c).count() != 1 {
        bail!("pick exactly one moment source: --table, --preset, or --from-trials");
    }
    let max_m = params.m.as_ref().map_or(0, |m| m.iter().copied().max().unwrap_or(0));
    let tmax = max_m + params.depth;

    let (label, table): (String, FactorialMomentTable<f64>) = if let Some(path) = &params.table
    {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        (format!("table:{}", path.display()), FactorialMomentTable::from_json(&text)?)
    } else if let Some(preset) = &params.preset {
        match preset {
            SievePreset::Poisson { mu, r } => {
                let table =
                    FactorialMomentTable::from_poisson(&PoissonParams::uniform(*mu, *r)?, tmax);
                (format!("poisson:mu={mu},r={r}"), table)
            }
            SievePreset::Coin { p } => {
                let pmf = JointPmf::new(1, [(vec![0], 1.0 - p), (vec![1], *p)])?;
                (format!("coin:p={p}"), factorial_moments_exact(&pmf, tmax)?)
            }
        }
    } else {
        let source = params
            .source
            .as_ref()
            .ok_or_else(|| anyhow!("--from-trials needs a graph source"))?;
        if params.targets.is_empty() {
            bail!("--from-trials needs --targets");
        }
        let g = source.load(meta.seed)?;
        let mut seen = params.targets.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != params.targets.len() {
            bail!("--targets must be distinct");
        }
        for &v in &params.targets {
            if !g.contains_vertex(v) {
                bail!("target {v} outside a graph of {} vertices", g.vertex_count());
            }
        }
        let m = params.length.unwrap_or_else(|| g.vertex_count());
        let cfg = WalkConfig::new(params.walk, m, params.start, meta.seed);
        let samples = run_trials(&g, &cfg, params.trials)?;
        let rows: Vec<Vec<u64>> = samples
            .iter()
            .map(|s| params.targets.iter().map(|&v| s.counts[v as usize]).collect())
            .collect();
        (format!("trials:{}", source.canonical()), factorial_moments_mc(&rows, tmax)?)
    };

    let m = params.m.clone().unwrap_or_else(|| vec![0; table.r()]);
    let bounds = bonferroni_bounds(&table, &m, params.depth)?;

    let report = SieveReport { source: label, depth: params.depth, bounds };
    sink.emit("sieve.json", &render_json(meta, &report))?;
    sink.log("sieve", meta)?;
    Ok(0)
}
