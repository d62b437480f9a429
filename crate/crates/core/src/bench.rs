//! Batch evaluation: per-instance MUS counts, average ranks and PAR2.
//!
//! Ranks follow the "more MUSes is better" rule: per instance, configurations
//! are ordered by MUS count descending and tied configurations share the mean
//! of the positions they span.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::Budget;
use crate::cnf::{parse_dimacs, CnfFormula, ParseError};
use crate::encoder::HeuristicFlags;
use crate::enumerate::{hybrid_enumerate_with, HybridPolicy, RunConfig};

pub const TIE_RULE: &str = "mean-of-positions";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub engine: String,
    pub mus_count: usize,
    /// Enumeration finished within the timeout.
    pub solved: bool,
    /// Seconds.
    pub elapsed: f64,
    /// Seconds.
    pub timeout: f64,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no run records")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("invalid config spec: {0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Ranks for one instance, aligned with `counts`.
pub fn instance_ranks(counts: &[usize]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]));
    let mut ranks = vec![0.0; counts.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && counts[order[end + 1]] == counts[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end+1
        let mean = (start + end) as f64 / 2.0 + 1.0;
        for &k in &order[start..=end] {
            ranks[k] = mean;
        }
        start = end + 1;
    }
    ranks
}

/// Average rank per configuration. A configuration without a record for some
/// instance counts as having found 0 MUSes there.
pub fn rank_configs(records: &[RunRecord]) -> Result<BTreeMap<String, f64>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let configs: Vec<&str> = records
        .iter()
        .map(|r| r.config.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut by_instance: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for r in records {
        by_instance
            .entry(&r.instance)
            .or_default()
            .insert(&r.config, r.mus_count);
    }
    let mut totals = vec![0.0; configs.len()];
    for counts in by_instance.values() {
        let row: Vec<usize> = configs
            .iter()
            .map(|c| counts.get(c).copied().unwrap_or(0))
            .collect();
        for (t, r) in totals.iter_mut().zip(instance_ranks(&row)) {
            *t += r;
        }
    }
    let n = by_instance.len() as f64;
    Ok(configs
        .into_iter()
        .zip(totals)
        .map(|(c, t)| (c.to_string(), t / n))
        .collect())
}

/// PAR2 per configuration: unsolved runs score twice their timeout.
pub fn par2(records: &[RunRecord]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = acc.entry(r.config.clone()).or_default();
        e.0 += if r.solved { r.elapsed } else { 2.0 * r.timeout };
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(c, (sum, n))| (c, sum / n as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub config: String,
    pub average_rank: f64,
    pub solved: usize,
    pub runs: usize,
    pub par2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scoreboard {
    pub instances: usize,
    pub tie_rule: String,
    pub configs: Vec<ConfigScore>,
}

impl Scoreboard {
    pub fn from_records(records: &[RunRecord]) -> Result<Self, BenchError> {
        let ranks = rank_configs(records)?;
        let par2 = par2(records);
        let configs = ranks
            .into_iter()
            .map(|(config, average_rank)| {
                let own = records.iter().filter(|r| r.config == config);
                ConfigScore {
                    average_rank,
                    solved: own.clone().filter(|r| r.solved).count(),
                    runs: own.count(),
                    par2: par2[&config],
                    config,
                }
            })
            .collect();
        let instances = records
            .iter()
            .map(|r| r.instance.as_str())
            .collect::<BTreeSet<_>>()
            .len();
        Ok(Scoreboard {
            instances,
            tie_rule: TIE_RULE.to_string(),
            configs,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<(), BenchError> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(io_err(path))
    }
}

pub fn write_csv(path: &Path, records: &[RunRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>, BenchError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(BenchError::from))
        .collect()
}

/// A named configuration of the hybrid enumerator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub name: String,
    #[serde(default)]
    pub flags: HeuristicFlags,
    #[serde(default = "default_threshold")]
    pub threshold: usize,
}

fn default_threshold() -> usize {
    HybridPolicy::default().clause_threshold
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub configs: Vec<BenchConfig>,
}

impl BenchSpec {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let spec: BenchSpec = serde_json::from_str(text)?;
        if spec.configs.is_empty() {
            return Err(BenchError::Config("no configs".into()));
        }
        let mut names = BTreeSet::new();
        for c in &spec.configs {
            if !names.insert(c.name.as_str()) {
                return Err(BenchError::Config(format!(
                    "duplicate config name {:?}",
                    c.name
                )));
            }
            if c.threshold == 0 {
                return Err(BenchError::Config(format!(
                    "{}: threshold must be positive",
                    c.name
                )));
            }
        }
        Ok(spec)
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub formula: CnfFormula,
}

/// Every `*.cnf` file in `dir`, ordered by file name.
pub fn load_instances(dir: &Path) -> Result<Vec<Instance>, BenchError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cnf"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            let parsed = parse_dimacs(&bytes).map_err(|source| BenchError::Parse {
                path: path.clone(),
                source,
            })?;
            let id = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            Ok(Instance {
                id,
                formula: parsed.formula,
            })
        })
        .collect()
}

pub fn run_one(
    instance: &Instance,
    config: &BenchConfig,
    timeout: Duration,
    run: &RunConfig,
) -> RunRecord {
    let budget = Budget::unlimited().with_time_limit(timeout);
    let policy = HybridPolicy::new(config.threshold);
    let result = hybrid_enumerate_with(&instance.formula, &policy, config.flags, &budget, run);
    let elapsed = result.elapsed.as_secs_f64();
    RunRecord {
        instance: instance.id.clone(),
        config: config.name.clone(),
        engine: result.engine.name().to_string(),
        mus_count: result.count,
        solved: result.complete && elapsed <= timeout.as_secs_f64(),
        elapsed,
        timeout: timeout.as_secs_f64(),
    }
}

/// Runs every configuration on every instance with `jobs` workers. Records
/// come back ordered by instance, then by configuration order in `configs`.
pub fn run_bench(
    instances: &[Instance],
    configs: &[BenchConfig],
    timeout: Duration,
    jobs: usize,
    run: &RunConfig,
) -> Vec<RunRecord> {
    let total = instances.len() * configs.len();
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(total.max(1)) {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= total {
                    break;
                }
                let (inst, cfg) = (&instances[k / configs.len()], &configs[k % configs.len()]);
                let record = run_one(inst, cfg, timeout, run);
                log::debug!(
                    "{} / {}: {} MUSes, solved={}, {:.3}s",
                    record.instance,
                    record.config,
                    record.mus_count,
                    record.solved,
                    record.elapsed
                );
                if tx.send((k, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
    });
    let mut slots: Vec<Option<RunRecord>> = vec![None; total];
    for (k, record) in rx {
        slots[k] = Some(record);
    }
    slots.into_iter().flatten().collect()
}
