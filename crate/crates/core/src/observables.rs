//! Scalar observables and the per-run measurement series.

use crate::lattice::Configuration;
use crate::sampler::ChainState;
use crate::{Error, Result};

/// Total corruption profit `U = Σ_{c_j > 0} c_j`, i.e. the number of corrupt
/// agents under the ±1 encoding.
pub fn total_profit(config: &Configuration) -> u64 {
    config.states().iter().filter(|&&s| s > 0).count() as u64
}

/// Mean state `m = Σ c_i / M`.
pub fn mean_state(config: &Configuration) -> f64 {
    let sum: i64 = config.states().iter().map(|&s| i64::from(s)).sum();
    sum as f64 / config.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub step: u64,
    pub w: f64,
    pub u: u64,
    pub m: f64,
}

impl Measurement {
    pub fn of(step: u64, w: f64, config: &Configuration) -> Self {
        Self {
            step,
            w,
            u: total_profit(config),
            m: mean_state(config),
        }
    }
}

/// Append-only series with strictly increasing steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    entries: Vec<Measurement>,
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the chain's current step, running `W`, `U` and `m`.
    pub fn record(&mut self, state: &ChainState) -> Result<&Measurement> {
        self.push(Measurement::of(
            state.step_count(),
            state.current_w(),
            state.config(),
        ))
    }

    pub fn push(&mut self, measurement: Measurement) -> Result<&Measurement> {
        if let Some(last) = self.entries.last() {
            if measurement.step <= last.step {
                return Err(Error::ContractViolation(format!(
                    "measurement at step {} does not follow step {}",
                    measurement.step, last.step
                )));
            }
        }
        self.entries.push(measurement);
        Ok(self.entries.last().expect("just pushed"))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Measurement> {
        self.entries.iter()
    }

    pub fn as_slice(&self) -> &[Measurement] {
        &self.entries
    }

    pub fn last(&self) -> Option<&Measurement> {
        self.entries.last()
    }

    /// The trailing half of the entries (the larger half when the count is
    /// odd).
    pub fn final_half(&self) -> &[Measurement] {
        &self.entries[self.entries.len() / 2..]
    }
}
