//! Exact Boltzmann distribution by enumeration, for small lattices.
//!
//! Configuration `c` is identified with the bitmask whose bit `i` is set when
//! agent `i` is corrupt. Probabilities are `exp(-β (W(c) - W_min)) / Z`.

use crate::lattice::{Configuration, LatticeGeometry};
use crate::model::Model;
use crate::observables::{mean_state, total_profit};
use crate::sampler::acceptance_probability;
use crate::{Error, Result};

/// Largest lattice that [`enumerate`] accepts.
pub const MAX_ENUMERATION_SITES: usize = 24;
/// Largest lattice for which a dense transition matrix is built.
pub const MAX_MATRIX_SITES: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    /// Corrupt-agent count `U`.
    Profit,
    /// Objective `W`.
    Objective,
    /// Mean state `m`.
    MeanState,
}

impl Observable {
    fn value(self, config: &Configuration, w: f64) -> f64 {
        match self {
            Observable::Profit => total_profit(config) as f64,
            Observable::Objective => w,
            Observable::MeanState => mean_state(config),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactDistribution {
    geometry: LatticeGeometry,
    beta: f64,
    /// Indexed by configuration bitmask.
    objectives: Vec<f64>,
    probabilities: Vec<f64>,
}

fn check_size(geometry: &LatticeGeometry, limit: usize) -> Result<()> {
    if geometry.site_count() > limit {
        return Err(Error::TooLarge {
            site_count: geometry.site_count(),
            limit,
        });
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "beta {beta} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// Objective of every configuration, indexed by bitmask.
fn all_objectives(geometry: &LatticeGeometry, model: &Model) -> Result<Vec<f64>> {
    let m = geometry.site_count();
    let mut config = Configuration::uniform(geometry, Configuration::HONEST)?;
    let mut out = Vec::with_capacity(1 << m);
    let mut prev = 0u64;
    for mask in 0..1u64 << m {
        // Walk only the bits that changed since the previous mask.
        let mut changed = mask ^ prev;
        while changed != 0 {
            config.flip(changed.trailing_zeros() as usize);
            changed &= changed - 1;
        }
        prev = mask;
        out.push(model.total_objective(geometry, &config)?);
    }
    Ok(out)
}

/// Enumerates the stationary distribution `p(c) ∝ exp(-β W(c))`.
pub fn enumerate(
    geometry: &LatticeGeometry,
    model: &Model,
    beta: f64,
) -> Result<ExactDistribution> {
    check_size(geometry, MAX_ENUMERATION_SITES)?;
    check_beta(beta)?;
    let objectives = all_objectives(geometry, model)?;
    let w_min = objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = objectives
        .iter()
        .map(|&w| (-beta * (w - w_min)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    Ok(ExactDistribution {
        geometry: geometry.clone(),
        beta,
        objectives,
        probabilities: weights.into_iter().map(|w| w / z).collect(),
    })
}

impl ExactDistribution {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn objectives(&self) -> &[f64] {
        &self.objectives
    }

    pub fn probability(&self, mask: u64) -> f64 {
        self.probabilities[mask as usize]
    }

    fn observable_values(&self, observable: Observable) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(mask, &p)| {
                let config = Configuration::from_bits(&self.geometry, mask as u64)
                    .expect("enumerated lattices fit a 64-bit mask");
                (observable.value(&config, self.objectives[mask]), p)
            })
    }

    /// Exact pushforward of the distribution onto `observable`, as
    /// `(value, mass)` pairs sorted by value.
    pub fn observable_marginal(&self, observable: Observable) -> Vec<(f64, f64)> {
        let mut pairs: Vec<(f64, f64)> = self.observable_values(observable).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut table: Vec<(f64, f64)> = Vec::new();
        for (v, p) in pairs {
            match table.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => table.push((v, p)),
            }
        }
        table
    }

    pub fn exact_expectation(&self, observable: Observable) -> f64 {
        self.observable_values(observable).map(|(v, p)| v * p).sum()
    }
}

/// Dense row-stochastic matrix over configuration bitmasks.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.entries[from * self.n + to]
    }

    /// `p ↦ p P`, one step of the chain applied to a distribution.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (from, &mass) in p.iter().enumerate() {
            let row = &self.entries[from * self.n..(from + 1) * self.n];
            for (acc, &t) in out.iter_mut().zip(row) {
                *acc += mass * t;
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries
            .chunks(self.n)
            .map(|r| r.iter().sum())
            .collect()
    }
}

fn build_kernel(
    geometry: &LatticeGeometry,
    model: &Model,
    beta: f64,
    sites: &[usize],
) -> Result<TransitionMatrix> {
    check_size(geometry, MAX_MATRIX_SITES)?;
    check_beta(beta)?;
    let objectives = all_objectives(geometry, model)?;
    let n = objectives.len();
    let proposal = 1.0 / sites.len() as f64;
    let mut entries = vec![0.0; n * n];
    for from in 0..n {
        let mut leave = 0.0;
        for &k in sites {
            let to = from ^ (1 << k);
            let p = proposal * acceptance_probability(objectives[to] - objectives[from], beta);
            entries[from * n + to] += p;
            leave += p;
        }
        entries[from * n + from] += 1.0 - leave;
    }
    Ok(TransitionMatrix { n, entries })
}

/// One-step kernel of the random-site schedule: each site proposed with
/// probability `1/M`, accepted with [`acceptance_probability`].
pub fn random_site_kernel(
    geometry: &LatticeGeometry,
    model: &Model,
    beta: f64,
) -> Result<TransitionMatrix> {
    let sites: Vec<usize> = (0..geometry.site_count()).collect();
    build_kernel(geometry, model, beta, &sites)
}

/// Kernel of a single deterministic update of site `site`, as used by the
/// sequential schedule.
pub fn site_kernel(
    geometry: &LatticeGeometry,
    model: &Model,
    beta: f64,
    site: usize,
) -> Result<TransitionMatrix> {
    if site >= geometry.site_count() {
        return Err(Error::InvalidSite {
            site,
            site_count: geometry.site_count(),
        });
    }
    build_kernel(geometry, model, beta, &[site])
}
