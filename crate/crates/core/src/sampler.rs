//! Single-flip Metropolis chain.
//!
//! One step is one agent decision: pick a site (uniformly at random, or the
//! next one in row-major order), compute `ΔW` for flipping it, and accept if
//! `ΔW <= 0` or if `exp(-βΔW) >= ξ` for a fresh uniform `ξ`. A uniform real is
//! drawn only when `ΔW > 0`.

use std::sync::Arc;

use crate::lattice::{Configuration, InitMode, LatticeGeometry, SiteId};
use crate::model::{CouplingModel, Model};
use crate::observables::TimeSeries;
use crate::rng::RngState;
use crate::{Error, Result};

/// How often the running objective is audited against a full recompute in
/// debug builds.
const AUDIT_INTERVAL: u64 = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Schedule {
    #[default]
    RandomSite,
    SequentialSweep,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainParams {
    pub temperature: f64,
    pub beta: f64,
    /// Elementary trial moves.
    pub steps: u64,
    pub schedule: Schedule,
    pub seed: u64,
    pub init: InitMode,
}

impl ChainParams {
    pub fn new(
        temperature: f64,
        steps: u64,
        schedule: Schedule,
        seed: u64,
        init: InitMode,
    ) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::InvalidParams(format!(
                "temperature {temperature} must be positive and finite"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidParams(
                "step budget must be at least 1".into(),
            ));
        }
        init.validate()?;
        Ok(Self {
            temperature,
            beta: 1.0 / temperature,
            steps,
            schedule,
            seed,
            init,
        })
    }
}

/// Probability of accepting a proposed change `delta_w` at inverse
/// temperature `beta`.
#[inline]
pub fn acceptance_probability(delta_w: f64, beta: f64) -> f64 {
    if delta_w <= 0.0 {
        1.0
    } else {
        (-beta * delta_w).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub site: SiteId,
    pub delta_w: f64,
    pub accepted: bool,
}

/// Precomputed `ΔW` and acceptance for uniform couplings, indexed by
/// `c_k * Σ_j c_j + 2d`.
#[derive(Clone, Debug)]
struct UniformTable {
    delta: Vec<f64>,
    accept: Vec<f64>,
}

impl UniformTable {
    fn new(model: &Model, degree: usize, beta: f64) -> Option<Self> {
        let CouplingModel::Uniform { j } = model.couplings else {
            return None;
        };
        let factor = model.convention.factor();
        let delta: Vec<f64> = (0..=2 * degree)
            .map(|idx| 2.0 * j * (idx as f64 - degree as f64) * factor)
            .collect();
        let accept = delta
            .iter()
            .map(|&dw| acceptance_probability(dw, beta))
            .collect();
        Some(Self { delta, accept })
    }
}

#[derive(Clone, Debug)]
pub struct ChainState {
    geometry: Arc<LatticeGeometry>,
    model: Arc<Model>,
    params: ChainParams,
    config: Configuration,
    rng: RngState,
    step_count: u64,
    current_w: f64,
    table: Option<UniformTable>,
}

impl ChainState {
    /// Starts a chain at step 0. The initial configuration is drawn from the
    /// chain's own stream, so it is part of the seeded trajectory.
    pub fn new(
        geometry: Arc<LatticeGeometry>,
        model: Arc<Model>,
        params: ChainParams,
    ) -> Result<Self> {
        let mut rng = RngState::seed_from_u64(params.seed);
        let config = Configuration::init(&geometry, params.init, &mut rng)?;
        Self::from_parts(geometry, model, params, config, rng, 0)
    }

    /// Rebuilds a chain mid-run, recomputing the objective from `config`.
    pub fn from_parts(
        geometry: Arc<LatticeGeometry>,
        model: Arc<Model>,
        params: ChainParams,
        config: Configuration,
        rng: RngState,
        step_count: u64,
    ) -> Result<Self> {
        model.check(&geometry, &config)?;
        let current_w = model.total_objective(&geometry, &config)?;
        let table = UniformTable::new(&model, geometry.degree(), params.beta);
        Ok(Self {
            geometry,
            model,
            params,
            config,
            rng,
            step_count,
            current_w,
            table,
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn rng(&self) -> &RngState {
        &self.rng
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Running objective, maintained incrementally.
    pub fn current_w(&self) -> f64 {
        self.current_w
    }

    /// Replaces the step budget, e.g. to extend a resumed run.
    pub fn set_steps(&mut self, steps: u64) -> Result<()> {
        if steps == 0 {
            return Err(Error::InvalidParams(
                "step budget must be at least 1".into(),
            ));
        }
        self.params.steps = steps;
        Ok(())
    }

    #[inline]
    fn next_site(&mut self) -> usize {
        let m = self.geometry.site_count();
        match self.params.schedule {
            Schedule::RandomSite => self.rng.below(m as u64) as usize,
            Schedule::SequentialSweep => (self.step_count % m as u64) as usize,
        }
    }

    #[inline]
    pub fn metropolis_step(&mut self) -> StepOutcome {
        let k = self.next_site();
        let (delta_w, p) = match &self.table {
            Some(table) => {
                let nbrs = self.geometry.neighbor_slots(k);
                let s: i32 = nbrs
                    .iter()
                    .map(|&n| i32::from(self.config.get(n as usize)))
                    .sum();
                let idx = (i32::from(self.config.get(k)) * s + nbrs.len() as i32) as usize;
                (table.delta[idx], Some(table.accept[idx]))
            }
            None => (
                self.model
                    .flip_delta_unchecked(&self.geometry, &self.config, k),
                None,
            ),
        };
        let accepted = if delta_w <= 0.0 {
            true
        } else {
            let p = p.unwrap_or_else(|| acceptance_probability(delta_w, self.params.beta));
            p >= self.rng.uniform()
        };
        if accepted {
            self.config.flip(k);
            self.current_w += delta_w;
        }
        self.step_count += 1;
        StepOutcome {
            site: SiteId(k),
            delta_w,
            accepted,
        }
    }

    /// Performs `n` steps; returns how many were accepted.
    pub fn advance(&mut self, n: u64) -> u64 {
        let mut accepted = 0;
        for _ in 0..n {
            accepted += u64::from(self.metropolis_step().accepted);
            if cfg!(debug_assertions) && self.step_count.is_multiple_of(AUDIT_INTERVAL) {
                self.audit_objective();
            }
        }
        accepted
    }

    /// Allowed gap between the running and the recomputed objective.
    fn drift_tolerance(&self) -> f64 {
        if self.model.couplings.is_integer_valued() {
            0.0
        } else {
            1e-9 * self.model.objective_bound(&self.geometry).max(1.0)
        }
    }

    /// Restores a running objective saved from an earlier run of this chain.
    ///
    /// For real-valued couplings the running sum carries rounding history;
    /// keeping it makes a resumed run bit-identical to an uninterrupted one.
    pub fn restore_running_w(&mut self, w: f64) -> Result<()> {
        let fresh = self.recompute_w();
        // Written so that a NaN difference is rejected too.
        let consistent = (fresh - w).abs() <= self.drift_tolerance();
        if !consistent {
            return Err(Error::ContractViolation(format!(
                "saved objective {w} does not match configuration objective {fresh}"
            )));
        }
        self.current_w = w;
        Ok(())
    }

    fn audit_objective(&self) {
        let fresh = self.recompute_w();
        let tolerance = self.drift_tolerance();
        assert!(
            (fresh - self.current_w).abs() <= tolerance,
            "running objective {} drifted from recomputed {fresh} at step {}",
            self.current_w,
            self.step_count
        );
    }

    /// Full recompute of `W` from the configuration.
    pub fn recompute_w(&self) -> f64 {
        self.model
            .total_objective(&self.geometry, &self.config)
            .expect("chain state is consistent")
    }
}

/// Recording cadence for [`run_chain`]. `None` disables a hook.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunHooks {
    pub measure_every: Option<u64>,
    pub snapshot_every: Option<u64>,
}

impl RunHooks {
    pub fn validate(&self) -> Result<()> {
        if self.measure_every == Some(0) || self.snapshot_every == Some(0) {
            return Err(Error::InvalidParams(
                "hook intervals must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub state: ChainState,
    pub series: TimeSeries,
    pub snapshots: Vec<(u64, Configuration)>,
}

/// Smallest multiple of `every` strictly after `step`.
fn next_multiple(step: u64, every: Option<u64>) -> u64 {
    every.map_or(u64::MAX, |e| (step / e + 1) * e)
}

/// Runs a fresh chain for `params.steps` steps.
///
/// With measurements enabled the series holds step 0, every multiple of
/// `measure_every`, and the final step. Snapshots are taken at multiples of
/// `snapshot_every`.
pub fn run_chain(
    geometry: Arc<LatticeGeometry>,
    model: Arc<Model>,
    params: ChainParams,
    hooks: RunHooks,
) -> Result<RunResult> {
    hooks.validate()?;
    let steps = params.steps;
    let mut state = ChainState::new(geometry, model, params)?;
    let mut series = TimeSeries::new();
    let mut snapshots = Vec::new();
    if hooks.measure_every.is_some() {
        series.record(&state)?;
    }
    while state.step_count() < steps {
        let now = state.step_count();
        let next_measure = next_multiple(now, hooks.measure_every);
        let next_snapshot = next_multiple(now, hooks.snapshot_every);
        let target = next_measure.min(next_snapshot).min(steps);
        state.advance(target - now);
        if target == next_snapshot {
            snapshots.push((target, state.config().clone()));
        }
        if hooks.measure_every.is_some() && (target == next_measure || target == steps) {
            series.record(&state)?;
        }
    }
    Ok(RunResult {
        state,
        series,
        snapshots,
    })
}
