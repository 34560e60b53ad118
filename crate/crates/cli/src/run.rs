//! `run` and `resume`: drive one chain and stream its artifacts to disk.
//!
//! Output tree under the configured directory:
//!
//! ```text
//! series.csv               step,W,U,m
//! snapshots/step_N.{pgm,txt,lat}
//! final.{pgm,txt,lat}
//! clusters.csv             cluster_id,size of the final configuration
//! cluster_summary.csv
//! checkpoint.txt
//! ```

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use corruption_lattice::{label_clusters, ChainState, Configuration, Measurement};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::formats::{self, Plane, SERIES_HEADER};

pub const SERIES_FILE: &str = "series.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// What a finished run leaves behind, for callers that want numbers rather
/// than files.
#[derive(Debug)]
pub struct RunSummary {
    pub state: ChainState,
    pub elapsed: std::time::Duration,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn snapshot_name(step: u64) -> String {
    format!("step_{step:012}")
}

/// Step encoded in a snapshot file name, if it is one of ours.
fn snapshot_step(name: &str) -> Option<u64> {
    let stem = name.strip_prefix("step_")?;
    let (digits, ext) = stem.split_once('.')?;
    matches!(ext, "pgm" | "txt" | "lat").then_some(())?;
    digits.parse().ok()
}

/// Removes snapshot files taken after `after` (all of them when `None`).
fn prune_snapshots(dir: &Path, after: Option<u64>) -> Result<()> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(CliError::io(dir, e)),
    };
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let Some(step) = entry.file_name().to_str().and_then(snapshot_step) else {
            continue;
        };
        if after.is_none_or(|a| step > a) {
            fs::remove_file(entry.path()).map_err(|e| CliError::io(entry.path(), e))?;
        }
    }
    Ok(())
}

fn write_configuration(cfg: &RunConfig, state: &ChainState, dir: &Path, stem: &str) -> Result<()> {
    let plane = Plane::cut(
        state.geometry(),
        state.config(),
        cfg.snapshot_axis,
        cfg.snapshot_index,
    );
    write_file(&dir.join(format!("{stem}.pgm")), &plane.to_pgm())?;
    write_file(&dir.join(format!("{stem}.txt")), &plane.to_ascii())?;
    write_file(
        &dir.join(format!("{stem}.lat")),
        &formats::lattice_dump(state.geometry(), state.config(), state.step_count()),
    )
}

fn write_final(cfg: &RunConfig, state: &ChainState) -> Result<()> {
    write_configuration(cfg, state, &cfg.output, "final")?;
    let report = label_clusters(state.config(), state.geometry())?.report();
    write_file(
        &cfg.output.join("clusters.csv"),
        &formats::cluster_sizes_csv(&report),
    )?;
    write_file(
        &cfg.output.join("cluster_summary.csv"),
        &formats::cluster_summary_csv(&report),
    )
}

struct SeriesSink {
    path: PathBuf,
    out: Option<BufWriter<File>>,
}

impl SeriesSink {
    fn push(&mut self, state: &ChainState) -> Result<()> {
        if let Some(out) = &mut self.out {
            let m = Measurement::of(state.step_count(), state.current_w(), state.config());
            writeln!(out, "{}", formats::series_row(&m))
                .map_err(|e| CliError::io(&self.path, e))?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        if let Some(out) = &mut self.out {
            out.flush().map_err(|e| CliError::io(&self.path, e))?;
        }
        Ok(())
    }
}

fn next_multiple(step: u64, every: Option<u64>) -> u64 {
    every.map_or(u64::MAX, |e| (step / e + 1) * e)
}

/// Advances `state` to `cfg.steps`, emitting rows, snapshots and checkpoints
/// on their cadences. Events falling on the same step are handled in the
/// order snapshot, series row, checkpoint.
fn drive(
    cfg: &RunConfig,
    state: &mut ChainState,
    series: &mut SeriesSink,
    hash: &str,
) -> Result<()> {
    let steps = cfg.steps;
    let snapshots = cfg.output.join(SNAPSHOT_DIR);
    let checkpoint = cfg.output.join(CHECKPOINT_FILE);
    while state.step_count() < steps {
        let now = state.step_count();
        let next_measure = next_multiple(now, cfg.measure_every);
        let next_snapshot = next_multiple(now, cfg.snapshot_every);
        let next_checkpoint = next_multiple(now, cfg.checkpoint_every);
        let target = next_measure
            .min(next_snapshot)
            .min(next_checkpoint)
            .min(steps);
        state.advance(target - now);
        if target == next_snapshot {
            write_configuration(cfg, state, &snapshots, &snapshot_name(target))?;
        }
        if target == next_measure || target == steps {
            series.push(state)?;
        }
        if target == next_checkpoint || target == steps {
            series.flush()?;
            Checkpoint::capture(state, hash).write(&checkpoint)?;
        }
    }
    series.flush()
}

/// Starts a fresh run, replacing any artifacts of an earlier one.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let started = std::time::Instant::now();
    let (geometry, model) = cfg.build()?;
    let mut state = ChainState::new(geometry, model, cfg.chain_params()?)?;
    let hash = cfg.config_hash();

    create_dir(&cfg.output)?;
    let snapshots = cfg.output.join(SNAPSHOT_DIR);
    prune_snapshots(&snapshots, None)?;
    if cfg.snapshot_every.is_some() {
        create_dir(&snapshots)?;
    }

    let series_path = cfg.output.join(SERIES_FILE);
    let mut series = SeriesSink {
        out: None,
        path: series_path.clone(),
    };
    if cfg.measure_every.is_some() {
        let file = File::create(&series_path).map_err(|e| CliError::io(&series_path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{SERIES_HEADER}").map_err(|e| CliError::io(&series_path, e))?;
        series.out = Some(out);
        series.push(&state)?;
    } else if series_path.exists() {
        fs::remove_file(&series_path).map_err(|e| CliError::io(&series_path, e))?;
    }

    drive(cfg, &mut state, &mut series, &hash)?;
    write_final(cfg, &state)?;
    Ok(RunSummary {
        state,
        elapsed: started.elapsed(),
    })
}

/// Keeps the rows an uninterrupted run would have written up to `step`.
fn truncate_series(path: &Path, step: u64, every: u64) -> Result<()> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut kept = String::new();
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(header)) if header == SERIES_HEADER => {
            kept.push_str(&header);
            kept.push('\n');
        }
        Some(Err(e)) => return Err(CliError::io(path, e)),
        _ => {
            return Err(CliError::format(
                path,
                format!("expected header `{SERIES_HEADER}`"),
            ))
        }
    }
    for line in lines {
        let line = line.map_err(|e| CliError::io(path, e))?;
        // A torn last line from an interrupted write does not parse and is
        // dropped with everything after the checkpoint.
        let Some(m) = formats::parse_series_row(&line) else {
            break;
        };
        if m.step > step {
            break;
        }
        if m.step % every == 0 {
            kept.push_str(&line);
            kept.push('\n');
        }
    }
    write_file(path, &kept)
}

/// Continues a run from the checkpoint in `cfg.output` (or `checkpoint`),
/// up to the possibly extended `cfg.steps`.
pub fn cmd_resume(cfg: &RunConfig, checkpoint: Option<&Path>) -> Result<RunSummary> {
    let started = std::time::Instant::now();
    let path = checkpoint.map_or_else(|| cfg.output.join(CHECKPOINT_FILE), Path::to_path_buf);
    let cp = Checkpoint::read(&path)?;
    let hash = cfg.config_hash();
    if cp.config_hash != hash {
        return Err(CliError::HashMismatch {
            path,
            found: cp.config_hash,
            expected: hash,
        });
    }
    if cp.step > cfg.steps {
        return Err(CliError::Usage(format!(
            "checkpoint is at step {} but the configured budget is {} steps",
            cp.step, cfg.steps
        )));
    }
    let (geometry, model) = cfg.build()?;
    let mut state = cp.restore(&path, geometry, model, cfg.chain_params()?)?;

    create_dir(&cfg.output)?;
    let snapshots = cfg.output.join(SNAPSHOT_DIR);
    prune_snapshots(&snapshots, Some(cp.step))?;
    if cfg.snapshot_every.is_some() {
        create_dir(&snapshots)?;
    }

    let series_path = cfg.output.join(SERIES_FILE);
    let mut series = SeriesSink {
        out: None,
        path: series_path.clone(),
    };
    if let Some(every) = cfg.measure_every {
        truncate_series(&series_path, cp.step, every)?;
        let file = fs::OpenOptions::new()
            .append(true)
            .open(&series_path)
            .map_err(|e| CliError::io(&series_path, e))?;
        series.out = Some(BufWriter::new(file));
    }

    drive(cfg, &mut state, &mut series, &hash)?;
    if state.step_count() == cp.step {
        // Nothing left to run; the truncated series still needs its last row.
        if cfg.measure_every.is_some_and(|e| cp.step % e != 0) {
            series.push(&state)?;
            series.flush()?;
        }
        Checkpoint::capture(&state, &hash).write(&cfg.output.join(CHECKPOINT_FILE))?;
    }
    write_final(cfg, &state)?;
    Ok(RunSummary {
        state,
        elapsed: started.elapsed(),
    })
}

/// Reads a series CSV back into measurements.
pub fn read_series(path: &Path) -> Result<Vec<Measurement>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(SERIES_HEADER) {
        return Err(CliError::format(
            path,
            format!("expected header `{SERIES_HEADER}`"),
        ));
    }
    lines
        .enumerate()
        .map(|(n, l)| {
            formats::parse_series_row(l)
                .ok_or_else(|| CliError::format(path, format!("bad row {}", n + 2)))
        })
        .collect()
}

/// Loads the final configuration written by a run.
pub fn read_final(dir: &Path) -> Result<(corruption_lattice::LatticeGeometry, Configuration)> {
    let path = dir.join("final.lat");
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let snap = formats::parse_snapshot(&path, &text)?;
    Ok((snap.geometry, snap.config))
}
