//! Experiment configuration: a small `key = value` file format, the graph
//! source notation shared by flags and config files, and the config hash
//! that every output embeds.

use anyhow::{anyhow, bail, Context, Result};
use nbrw::graph::{named_graph, random_regular, read_edge_list, GraphGenSpec, RegularGraph};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Keys a config file may set. Anything else is a typo and gets rejected.
const KNOWN_KEYS: &[&str] = &[
    "graph", "walk", "length", "start", "trials", "seed", "threads", "out", "cap", "depth",
    "radius", "t_range", "bins", "spectral", "trace", "targets", "m",
];

/// Defaults read from a config file; command-line flags override these.
#[derive(Debug, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected `key = value`", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                bail!("config line {}: unknown key `{key}`", lineno + 1);
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                bail!("config line {}: duplicate key `{key}`", lineno + 1);
            }
        }
        Ok(Self { map })
    }

    /// Parsed value for `key`, or None when the file does not set it.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key `{key}`: {e}")),
        }
    }
}

/// Where the graph comes from: `petersen`, `file:graph.edges`, or
/// `random:n=2000,d=3[,girth=6]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSource {
    Named(String),
    File(PathBuf),
    Random { n: usize, d: usize, girth: Option<usize> },
}

impl FromStr for GraphSource {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("file:") {
            if rest.is_empty() {
                bail!("graph source `file:` needs a path");
            }
            return Ok(GraphSource::File(PathBuf::from(rest)));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let mut n = None;
            let mut d = None;
            let mut girth = None;
            for field in rest.split(',') {
                let (key, value) = field
                    .split_once('=')
                    .ok_or_else(|| anyhow!("random graph field `{field}`: expected key=value"))?;
                let slot = match key {
                    "n" => &mut n,
                    "d" => &mut d,
                    "girth" => &mut girth,
                    _ => bail!("random graph source: unknown field `{key}`"),
                };
                if slot.is_some() {
                    bail!("random graph source: duplicate field `{key}`");
                }
                *slot = Some(value.parse::<usize>().context("random graph field value")?);
            }
            let n = n.ok_or_else(|| anyhow!("random graph source: missing n"))?;
            let d = d.ok_or_else(|| anyhow!("random graph source: missing d"))?;
            return Ok(GraphSource::Random { n, d, girth });
        }
        let name = s.strip_prefix("named:").unwrap_or(s);
        if name.is_empty() || name.contains([':', '=', ',']) {
            bail!("`{s}` is not a graph source");
        }
        Ok(GraphSource::Named(name.to_string()))
    }
}

impl GraphSource {
    /// The normal form that goes into the config hash.
    pub fn canonical(&self) -> String {
        match self {
            GraphSource::Named(name) => format!("named:{name}"),
            GraphSource::File(path) => format!("file:{}", path.display()),
            GraphSource::Random { n, d, girth } => match girth {
                None => format!("random:n={n},d={d}"),
                Some(g) => format!("random:n={n},d={d},girth={g}"),
            },
        }
    }

    /// Builds or reads the graph. Random sources draw from the master seed.
    pub fn load(&self, seed: u64) -> Result<RegularGraph> {
        match self {
            GraphSource::Named(name) => Ok(named_graph(name)?),
            GraphSource::File(path) => {
                let file = File::open(path)
                    .with_context(|| format!("opening graph file {}", path.display()))?;
                Ok(read_edge_list(BufReader::new(file))?)
            }
            GraphSource::Random { n, d, girth } => {
                let mut spec = GraphGenSpec::new(*n, *d, seed);
                if let Some(g) = girth {
                    spec = spec.with_min_girth(*g);
                }
                Ok(random_regular(&spec)?)
            }
        }
    }
}

/// SHA-256 over the effective settings, sorted by key so flag order and
/// provenance (flag vs config file) cannot change the digest. Settings that
/// do not affect output bytes — thread count, output paths — must not be
/// fed in.
pub fn config_hash(settings: &[(&str, String)]) -> String {
    let mut sorted: Vec<_> = settings.to_vec();
    sorted.sort_by_key(|(k, _)| *k);
    let mut hasher = Sha256::new();
    for (key, value) in sorted {
        hasher.update(key.as_bytes());
        hasher.update(b"=");
        hasher.update(value.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}
