//! Batch runs of the ringsense solvers: configuration, sweeps, resumable
//! content-addressed output and the invariant checks behind `validate`.

pub mod commands;
pub mod config;
pub mod output;
pub mod validate;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use commands::{Command, Status};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config at `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] ringsense::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Solver(_) => "solver",
        }
    }

    pub fn report(&self) -> Value {
        json!({ "error": self.kind(), "message": self.to_string() })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a temporary file so an interrupted run never leaves a
/// truncated result that a later run would reuse.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub overrides: Vec<(String, f64)>,
    pub status: Status,
    pub summary: Value,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub config_hash: String,
    pub records: Vec<PointRecord>,
    pub computed: Vec<usize>,
    pub reused: Vec<usize>,
}

impl RunOutcome {
    pub fn failed(&self) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.status == Status::Failed)
            .map(|r| r.index)
            .collect()
    }
}

pub fn run_dir(out: &Path, cmd: Command, hash: &str) -> PathBuf {
    out.join(format!("{}-{}", cmd.name(), &hash[..16]))
}

/// Runs every sweep point of `cfg`, reusing points already on disk unless
/// `force` is set. Output order follows the sweep index.
pub fn run(cmd: Command, cfg: &RunConfig, out: &Path, force: bool) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    cfg.validate()?;
    let hash = cfg.hash(cmd.name());
    let dir = run_dir(out, cmd, &hash);
    let points_dir = dir.join("points");
    fs::create_dir_all(&points_dir).map_err(io_err(&points_dir))?;
    write_atomic(
        &dir.join("config.json"),
        serde_json::to_string_pretty(cfg).expect("json").as_bytes(),
    )?;

    let points = cfg.expand()?;
    let csv_path = |i: usize| points_dir.join(format!("p{i:05}.csv"));
    let rec_path = |i: usize| points_dir.join(format!("p{i:05}.json"));

    let mut records: Vec<Option<PointRecord>> = vec![None; points.len()];
    if !force {
        for (i, slot) in records.iter_mut().enumerate() {
            if cfg.emit.csv && !csv_path(i).exists() {
                continue;
            }
            if let Ok(text) = fs::read_to_string(rec_path(i)) {
                if let Ok(r) = serde_json::from_str::<PointRecord>(&text) {
                    if r.index == i {
                        *slot = Some(r);
                    }
                }
            }
        }
    }
    let reused: Vec<usize> = (0..points.len())
        .filter(|i| records[*i].is_some())
        .collect();
    let todo: Vec<usize> = (0..points.len())
        .filter(|i| records[*i].is_none())
        .collect();

    let fresh: Vec<(usize, commands::PointResult)> = todo
        .par_iter()
        .map(|&i| (i, commands::run_point(cmd, &points[i].1)))
        .collect();
    for (i, res) in fresh {
        if cfg.emit.csv {
            write_atomic(
                &csv_path(i),
                res.table
                    .to_csv(&format!("ringsense {}", cmd.name()))
                    .as_bytes(),
            )?;
        }
        let rec = PointRecord {
            index: i,
            overrides: points[i].0.clone(),
            status: res.status,
            summary: res.summary,
        };
        write_atomic(
            &rec_path(i),
            serde_json::to_string_pretty(&rec).expect("json").as_bytes(),
        )?;
        records[i] = Some(rec);
    }
    let records: Vec<PointRecord> = records
        .into_iter()
        .map(|r| r.expect("every point filled"))
        .collect();

    if cfg.emit.json {
        let summary = json!({
            "command": cmd.name(),
            "config_hash": hash,
            "points": records,
        });
        write_atomic(
            &dir.join("summary.json"),
            serde_json::to_string_pretty(&summary)
                .expect("json")
                .as_bytes(),
        )?;
    }
    let manifest = json!({
        "config_hash": hash,
        "command": cmd.name(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "constants": { "hbar": ringsense::consts::HBAR, "k_b": ringsense::consts::K_B },
        "started_unix": started_unix,
        "wall_clock_s": started.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
        "points": records.iter().map(|r| json!({
            "index": r.index,
            "status": r.status,
            "reused": reused.contains(&r.index),
        })).collect::<Vec<_>>(),
    });
    write_atomic(
        &dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)
            .expect("json")
            .as_bytes(),
    )?;

    Ok(RunOutcome {
        dir,
        config_hash: hash,
        records,
        computed: todo,
        reused,
    })
}

/// Loads a config: preset, then the optional file on top of it.
pub fn load_config(path: Option<&Path>, preset: &str) -> Result<RunConfig, CliError> {
    let base = RunConfig::preset(preset)?;
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            RunConfig::from_toml(&text, &base)
        }
        None => {
            base.validate()?;
            Ok(base)
        }
    }
}
