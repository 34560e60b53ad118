//! `sweep`: independent chains over a grid of temperatures and seeds.

use std::fmt::Write as _;
use std::path::Path;

use corruption_lattice::{label_clusters, ChainState, Measurement};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::formats;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: &str = "T,seed,mean_abs_m,mean_U,mean_n_clusters,samples";
pub const CHAIN_HEADER: &str = "step,W,U,m,n_clusters";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub measurement: Measurement,
    pub n_clusters: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSummary {
    pub temperature: f64,
    pub seed: u64,
    pub mean_abs_m: f64,
    pub mean_u: f64,
    pub mean_n_clusters: f64,
    pub samples: usize,
    pub points: Vec<SweepPoint>,
}

impl ChainSummary {
    /// Averages over the final half of the recorded points.
    fn from_points(temperature: f64, seed: u64, points: Vec<SweepPoint>) -> Self {
        let tail = &points[points.len() / 2..];
        let n = tail.len() as f64;
        let mean = |f: &dyn Fn(&SweepPoint) -> f64| tail.iter().map(f).sum::<f64>() / n;
        Self {
            temperature,
            seed,
            mean_abs_m: mean(&|p| p.measurement.m.abs()),
            mean_u: mean(&|p| p.measurement.u as f64),
            mean_n_clusters: mean(&|p| p.n_clusters as f64),
            samples: tail.len(),
            points,
        }
    }

    pub fn summary_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.temperature,
            self.seed,
            self.mean_abs_m,
            self.mean_u,
            self.mean_n_clusters,
            self.samples
        )
    }

    fn chain_csv(&self) -> String {
        let mut out = format!("{CHAIN_HEADER}\n");
        for p in &self.points {
            writeln!(
                out,
                "{},{}",
                formats::series_row(&p.measurement),
                p.n_clusters
            )
            .unwrap();
        }
        out
    }
}

fn point(state: &ChainState) -> Result<SweepPoint> {
    Ok(SweepPoint {
        measurement: Measurement::of(state.step_count(), state.current_w(), state.config()),
        n_clusters: label_clusters(state.config(), state.geometry())?.n_clusters(),
    })
}

/// Runs one chain, measuring at step 0, each multiple of `measure_every` and
/// the last step. Without a measurement cadence only the endpoints are kept.
pub fn run_point(cfg: &RunConfig, temperature: f64, seed: u64) -> Result<ChainSummary> {
    let (geometry, model) = cfg.build()?;
    let mut state = ChainState::new(geometry, model, cfg.chain_params_at(temperature, seed)?)?;
    let every = cfg.measure_every.unwrap_or(cfg.steps);
    let mut points = vec![point(&state)?];
    while state.step_count() < cfg.steps {
        let now = state.step_count();
        let target = ((now / every + 1) * every).min(cfg.steps);
        state.advance(target - now);
        points.push(point(&state)?);
    }
    Ok(ChainSummary::from_points(temperature, seed, points))
}

/// Every `(T, seed)` pair, temperatures outermost, seeds `seed, seed + 1, ..`.
pub fn grid(cfg: &RunConfig) -> Vec<(f64, u64)> {
    cfg.temperatures
        .iter()
        .flat_map(|&t| (0..cfg.seeds_per_temperature).map(move |i| (t, cfg.seed.wrapping_add(i))))
        .collect()
}

/// Runs the grid on `cfg.workers` threads. Results come back in grid order
/// whatever the scheduling.
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<ChainSummary>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(|| {
        grid(cfg)
            .into_par_iter()
            .map(|(t, seed)| run_point(cfg, t, seed))
            .collect()
    })
}

pub fn summary_csv(results: &[ChainSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in results {
        writeln!(out, "{}", r.summary_row()).unwrap();
    }
    out
}

/// Writes `summary.csv` and one `chains/T{T}_seed{seed}.csv` per chain.
pub fn write_sweep(dir: &Path, results: &[ChainSummary]) -> Result<()> {
    let chains = dir.join("chains");
    std::fs::create_dir_all(&chains).map_err(|e| CliError::io(&chains, e))?;
    for r in results {
        let path = chains.join(format!("T{}_seed{}.csv", r.temperature, r.seed));
        std::fs::write(&path, r.chain_csv()).map_err(|e| CliError::io(&path, e))?;
    }
    let path = dir.join(SUMMARY_FILE);
    std::fs::write(&path, summary_csv(results)).map_err(|e| CliError::io(&path, e))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<ChainSummary>> {
    let results = run_sweep(cfg)?;
    write_sweep(&cfg.output, &results)?;
    Ok(results)
}
