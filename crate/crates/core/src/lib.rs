//! Lattice model of corruption activity.
//!
//! Agents sit on the sites of a periodic Cartesian lattice and hold one of two
//! states: `+1` (takes part in corruption) or `-1` (stays honest). The system
//! evolves by single-agent Metropolis decisions driven by a nearest-neighbour
//! interaction objective `W = -Σ_<ij> J_ij c_i c_j`, with uniform or quenched
//! per-bond couplings.
//!
//! Modules, bottom-up:
//!
//! * [`lattice`] geometry, neighbour tables and configurations
//! * [`rng`] the seeded generator every stochastic routine draws from
//! * [`model`] couplings, local terms, `W` and single-flip `ΔW`
//! * [`sampler`] the Metropolis chain
//! * [`observables`] profit `U`, mean state `m`, time series
//! * [`clusters`] connected components of corrupt agents
//! * [`oracle`] exact Boltzmann enumeration for small lattices

pub mod clusters;
pub mod lattice;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod rng;
pub mod sampler;

mod error;

pub use error::{Error, Result};

pub use clusters::{label_clusters, ClusterLabeling, ClusterReport, SizeHistogram};
pub use lattice::{Configuration, InitMode, LatticeGeometry, SiteId};
pub use model::{BondDistribution, CouplingModel, Model, ObjectiveConvention};
pub use observables::{mean_state, total_profit, Measurement, TimeSeries};
pub use oracle::{ExactDistribution, Observable};
pub use rng::RngState;
pub use sampler::{
    acceptance_probability, ChainParams, ChainState, RunHooks, RunResult, Schedule, StepOutcome,
};
