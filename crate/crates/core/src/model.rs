//! Interaction objective `W` and its single-flip change.
//!
//! `W` is summed over unordered bonds, `W = -Σ_<ij> J_ij c_i c_j`, so one flip
//! of agent `k` changes it by `ΔW = 2 c_k Σ_j J_kj c_j`. The per-site term
//! `φ_i = -Σ_j J_ij c_i c_j` counts each bond from both ends, hence
//! `Σ_i φ_i = 2W`. [`ObjectiveConvention::Literal`] reports `W` (and drives the
//! dynamics with `ΔW`) at that doubled scale.

use crate::lattice::{Configuration, LatticeGeometry, SiteId};
use crate::rng::RngState;
use crate::{Error, Result};

/// Distribution of quenched per-bond couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BondDistribution {
    /// `+magnitude` or `-magnitude`, each with probability one half.
    Bimodal { magnitude: f64 },
    /// Uniform on `[low, high)`.
    Interval { low: f64, high: f64 },
}

impl BondDistribution {
    fn validate(&self) -> Result<()> {
        match *self {
            BondDistribution::Bimodal { magnitude } if !magnitude.is_finite() => Err(
                Error::InvalidParams(format!("bond magnitude {magnitude} is not finite")),
            ),
            BondDistribution::Interval { low, high }
                if !(low.is_finite() && high.is_finite() && low <= high) =>
            {
                Err(Error::InvalidParams(format!(
                    "bond interval [{low}, {high}) is empty or not finite"
                )))
            }
            _ => Ok(()),
        }
    }

    fn sample(&self, rng: &mut RngState) -> f64 {
        match *self {
            BondDistribution::Bimodal { magnitude } => {
                if rng.uniform() < 0.5 {
                    magnitude
                } else {
                    -magnitude
                }
            }
            BondDistribution::Interval { low, high } => low + (high - low) * rng.uniform(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CouplingModel {
    Uniform {
        j: f64,
    },
    /// One coupling per bond (see [`LatticeGeometry::slot_bond`] for bond ids),
    /// with a per-slot copy laid out like the neighbour table.
    PerBond {
        bonds: Vec<f64>,
        slots: Vec<f64>,
    },
}

impl CouplingModel {
    pub fn uniform(j: f64) -> Result<Self> {
        if !j.is_finite() {
            return Err(Error::InvalidParams(format!("coupling {j} is not finite")));
        }
        Ok(CouplingModel::Uniform { j })
    }

    pub fn per_bond(geometry: &LatticeGeometry, bonds: Vec<f64>) -> Result<Self> {
        if bonds.len() != geometry.bond_count() {
            return Err(Error::InvalidParams(format!(
                "{} bond couplings given, lattice has {} bonds",
                bonds.len(),
                geometry.bond_count()
            )));
        }
        if let Some(bad) = bonds.iter().find(|j| !j.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "coupling {bad} is not finite"
            )));
        }
        let deg = geometry.degree();
        let slots = (0..geometry.site_count())
            .flat_map(|i| (0..deg).map(move |s| (i, s)))
            .map(|(i, s)| bonds[geometry.slot_bond(i, s)])
            .collect();
        Ok(CouplingModel::PerBond { bonds, slots })
    }

    /// Draws one coupling per bond, in bond-id order, from its own stream.
    pub fn quenched(
        geometry: &LatticeGeometry,
        distribution: BondDistribution,
        disorder_seed: u64,
    ) -> Result<Self> {
        distribution.validate()?;
        let mut rng = RngState::seed_from_u64(disorder_seed);
        let bonds = (0..geometry.bond_count())
            .map(|_| distribution.sample(&mut rng))
            .collect();
        Self::per_bond(geometry, bonds)
    }

    /// Coupling on bond `bond`.
    pub fn bond(&self, bond: usize) -> f64 {
        match self {
            CouplingModel::Uniform { j } => *j,
            CouplingModel::PerBond { bonds, .. } => bonds[bond],
        }
    }

    /// Coupling seen from neighbour slot `slot` of site `index`.
    #[inline]
    pub fn slot(&self, degree: usize, index: usize, slot: usize) -> f64 {
        match self {
            CouplingModel::Uniform { j } => *j,
            CouplingModel::PerBond { slots, .. } => slots[index * degree + slot],
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        match self {
            CouplingModel::Uniform { j } => j.fract() == 0.0,
            CouplingModel::PerBond { bonds, .. } => bonds.iter().all(|j| j.fract() == 0.0),
        }
    }

    fn check(&self, geometry: &LatticeGeometry) -> Result<()> {
        match self {
            CouplingModel::PerBond { bonds, .. } if bonds.len() != geometry.bond_count() => {
                Err(Error::InvalidParams(format!(
                    "{} bond couplings for a lattice with {} bonds",
                    bonds.len(),
                    geometry.bond_count()
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Scale at which `W` is reported and fed to the acceptance rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ObjectiveConvention {
    /// Each unordered bond counted once.
    #[default]
    BondOnce,
    /// `Σ_i φ_i`, every bond counted from both ends.
    Literal,
}

impl ObjectiveConvention {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            ObjectiveConvention::BondOnce => 1.0,
            ObjectiveConvention::Literal => 2.0,
        }
    }
}

/// Couplings plus the scale convention: everything needed to evaluate `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub couplings: CouplingModel,
    pub convention: ObjectiveConvention,
}

impl Model {
    pub fn new(couplings: CouplingModel, convention: ObjectiveConvention) -> Self {
        Self {
            couplings,
            convention,
        }
    }

    pub fn uniform(j: f64) -> Result<Self> {
        Ok(Self::new(
            CouplingModel::uniform(j)?,
            ObjectiveConvention::BondOnce,
        ))
    }

    /// Checks that couplings and configuration fit `geometry`.
    pub fn check(&self, geometry: &LatticeGeometry, config: &Configuration) -> Result<()> {
        self.couplings.check(geometry)?;
        config.matches(geometry)
    }

    /// `φ_i = -Σ_j J_ij c_i c_j` over the `2d` neighbour slots of `site`.
    pub fn local_term(
        &self,
        geometry: &LatticeGeometry,
        config: &Configuration,
        site: SiteId,
    ) -> Result<f64> {
        geometry.check_site(site)?;
        self.check(geometry, config)?;
        let i = site.index();
        Ok(-f64::from(config.get(i)) * self.local_field(geometry, config, i))
    }

    /// `Σ_j J_ij c_j` over the neighbour slots of `index`.
    #[inline]
    pub fn local_field(
        &self,
        geometry: &LatticeGeometry,
        config: &Configuration,
        index: usize,
    ) -> f64 {
        let nbrs = geometry.neighbor_slots(index);
        match &self.couplings {
            CouplingModel::Uniform { j } => {
                let s: i32 = nbrs
                    .iter()
                    .map(|&n| i32::from(config.get(n as usize)))
                    .sum();
                j * f64::from(s)
            }
            CouplingModel::PerBond { slots, .. } => {
                let deg = nbrs.len();
                let js = &slots[index * deg..(index + 1) * deg];
                nbrs.iter()
                    .zip(js)
                    .map(|(&n, &j)| j * f64::from(config.get(n as usize)))
                    .sum()
            }
        }
    }

    /// `W` over unordered bonds, scaled by the convention factor.
    pub fn total_objective(
        &self,
        geometry: &LatticeGeometry,
        config: &Configuration,
    ) -> Result<f64> {
        self.check(geometry, config)?;
        let d = geometry.dimension();
        let mut sum = 0.0;
        for i in 0..geometry.site_count() {
            let ci = f64::from(config.get(i));
            let nbrs = geometry.neighbor_slots(i);
            for axis in 0..d {
                let j = nbrs[2 * axis + 1] as usize;
                sum += self.couplings.bond(i * d + axis) * ci * f64::from(config.get(j));
            }
        }
        Ok(-sum * self.convention.factor())
    }

    /// Change of `W` when agent `site` switches state.
    pub fn flip_delta(
        &self,
        geometry: &LatticeGeometry,
        config: &Configuration,
        site: SiteId,
    ) -> Result<f64> {
        geometry.check_site(site)?;
        self.check(geometry, config)?;
        Ok(self.flip_delta_unchecked(geometry, config, site.index()))
    }

    #[inline]
    pub fn flip_delta_unchecked(
        &self,
        geometry: &LatticeGeometry,
        config: &Configuration,
        index: usize,
    ) -> f64 {
        2.0 * f64::from(config.get(index))
            * self.local_field(geometry, config, index)
            * self.convention.factor()
    }

    /// `Σ_bonds |J_ij|` times the convention factor; an upper bound on `|W|`.
    pub fn objective_bound(&self, geometry: &LatticeGeometry) -> f64 {
        let raw = match &self.couplings {
            CouplingModel::Uniform { j } => j.abs() * geometry.bond_count() as f64,
            CouplingModel::PerBond { bonds, .. } => bonds.iter().map(|j| j.abs()).sum(),
        };
        raw * self.convention.factor()
    }
}
