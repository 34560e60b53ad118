//! Periodic Cartesian lattices and agent configurations.
//!
//! Sites are encoded row-major with the last axis varying fastest. Each site
//! owns `2d` neighbour slots ordered `(-x, +x, -y, +y, -z, +z)` for the axes
//! that exist. On a length-2 axis both offsets wrap onto the same site and
//! both slots are kept, so every local sum has exactly `2d` terms.

use crate::rng::RngState;
use crate::{Error, Result};

pub const MAX_DIMENSION: usize = 3;

/// Index of an agent in `[0, M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteId(pub usize);

impl SiteId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for SiteId {
    fn from(index: usize) -> Self {
        SiteId(index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeGeometry {
    lengths: Vec<usize>,
    strides: Vec<usize>,
    site_count: usize,
    /// `site_count * 2d` neighbour indices, slot-major per site.
    neighbors: Vec<u32>,
}

impl LatticeGeometry {
    pub fn new(lengths: &[usize]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::InvalidGeometry("no axes given".into()));
        }
        if lengths.len() > MAX_DIMENSION {
            return Err(Error::InvalidGeometry(format!(
                "{} axes given, at most {MAX_DIMENSION} supported",
                lengths.len()
            )));
        }
        if let Some(bad) = lengths.iter().find(|&&l| l < 2) {
            return Err(Error::InvalidGeometry(format!(
                "axis length {bad} is below the minimum of 2"
            )));
        }
        let site_count = lengths
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .filter(|&m| m <= u32::MAX as usize)
            .ok_or_else(|| Error::InvalidGeometry("site count does not fit in 32 bits".into()))?;

        let d = lengths.len();
        let mut strides = vec![1usize; d];
        for axis in (0..d - 1).rev() {
            strides[axis] = strides[axis + 1] * lengths[axis + 1];
        }

        let mut neighbors = Vec::with_capacity(site_count * 2 * d);
        for site in 0..site_count {
            for axis in 0..d {
                let len = lengths[axis];
                let stride = strides[axis];
                let coord = (site / stride) % len;
                let base = site - coord * stride;
                let down = (coord + len - 1) % len;
                let up = (coord + 1) % len;
                neighbors.push((base + down * stride) as u32);
                neighbors.push((base + up * stride) as u32);
            }
        }

        Ok(Self {
            lengths: lengths.to_vec(),
            strides,
            site_count,
            neighbors,
        })
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    /// Number of agents `M`.
    pub fn site_count(&self) -> usize {
        self.site_count
    }

    /// Neighbour slots per site, `2d`.
    pub fn degree(&self) -> usize {
        2 * self.lengths.len()
    }

    /// Unordered bonds, one per site and axis (`dM`).
    pub fn bond_count(&self) -> usize {
        self.site_count * self.lengths.len()
    }

    pub fn check_site(&self, site: SiteId) -> Result<()> {
        if site.0 < self.site_count {
            Ok(())
        } else {
            Err(Error::InvalidSite {
                site: site.0,
                site_count: self.site_count,
            })
        }
    }

    pub fn neighbors(&self, site: SiteId) -> Result<Vec<SiteId>> {
        self.check_site(site)?;
        Ok(self
            .neighbor_slots(site.0)
            .iter()
            .map(|&n| SiteId(n as usize))
            .collect())
    }

    /// Unchecked neighbour slice for hot loops.
    #[inline]
    pub fn neighbor_slots(&self, index: usize) -> &[u32] {
        let deg = self.degree();
        &self.neighbors[index * deg..(index + 1) * deg]
    }

    /// Bond id carried by neighbour slot `slot` of `index`.
    ///
    /// The `+axis` slot of a site owns bond `site * d + axis`; the `-axis`
    /// slot refers to the bond owned by the neighbour on that side.
    #[inline]
    pub fn slot_bond(&self, index: usize, slot: usize) -> usize {
        let d = self.dimension();
        let axis = slot / 2;
        let owner = if slot % 2 == 1 {
            index
        } else {
            self.neighbor_slots(index)[slot] as usize
        };
        owner * d + axis
    }

    /// Endpoints of bond `bond`: the owner and its `+axis` neighbour.
    pub fn bond_endpoints(&self, bond: usize) -> (usize, usize) {
        let d = self.dimension();
        let owner = bond / d;
        let axis = bond % d;
        (owner, self.neighbor_slots(owner)[2 * axis + 1] as usize)
    }

    pub fn coords(&self, site: SiteId) -> Result<Vec<usize>> {
        self.check_site(site)?;
        Ok(self
            .lengths
            .iter()
            .zip(&self.strides)
            .map(|(&len, &stride)| (site.0 / stride) % len)
            .collect())
    }

    pub fn site_at(&self, coords: &[usize]) -> Result<SiteId> {
        if coords.len() != self.dimension() {
            return Err(Error::InvalidGeometry(format!(
                "{} coordinates given for a {}-dimensional lattice",
                coords.len(),
                self.dimension()
            )));
        }
        let mut index = 0;
        for ((&c, &len), &stride) in coords.iter().zip(&self.lengths).zip(&self.strides) {
            if c >= len {
                return Err(Error::InvalidGeometry(format!(
                    "coordinate {c} outside axis of length {len}"
                )));
            }
            index += c * stride;
        }
        Ok(SiteId(index))
    }
}

/// How a chain's first configuration is drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitMode {
    AllCorrupt,
    AllHonest,
    /// Each site independently corrupt with probability `p_corrupt`.
    Random {
        p_corrupt: f64,
    },
}

impl InitMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitMode::Random { p_corrupt } if !(0.0..=1.0).contains(&p_corrupt) => Err(
                Error::InvalidParams(format!("p_corrupt {p_corrupt} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }
}

/// Agent states `c_i ∈ {-1, +1}`, `+1` meaning the agent takes part in
/// corruption.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    states: Vec<i8>,
}

impl Configuration {
    pub const CORRUPT: i8 = 1;
    pub const HONEST: i8 = -1;

    pub fn uniform(geometry: &LatticeGeometry, state: i8) -> Result<Self> {
        Self::check_state(state)?;
        Ok(Self {
            states: vec![state; geometry.site_count()],
        })
    }

    pub fn from_states(geometry: &LatticeGeometry, states: Vec<i8>) -> Result<Self> {
        if states.len() != geometry.site_count() {
            return Err(Error::InvalidParams(format!(
                "configuration has {} states, lattice has {} sites",
                states.len(),
                geometry.site_count()
            )));
        }
        states.iter().try_for_each(|&s| Self::check_state(s))?;
        Ok(Self { states })
    }

    /// Builds a configuration from the bits of `bits`: bit `i` set means site
    /// `i` is corrupt. Only meaningful for `M <= 64`.
    pub fn from_bits(geometry: &LatticeGeometry, bits: u64) -> Result<Self> {
        let m = geometry.site_count();
        if m > 64 {
            return Err(Error::InvalidParams(format!(
                "{m} sites do not fit a 64-bit mask"
            )));
        }
        Ok(Self {
            states: (0..m)
                .map(|i| {
                    if bits >> i & 1 == 1 {
                        Self::CORRUPT
                    } else {
                        Self::HONEST
                    }
                })
                .collect(),
        })
    }

    pub fn init(geometry: &LatticeGeometry, mode: InitMode, rng: &mut RngState) -> Result<Self> {
        mode.validate()?;
        match mode {
            InitMode::AllCorrupt => Self::uniform(geometry, Self::CORRUPT),
            InitMode::AllHonest => Self::uniform(geometry, Self::HONEST),
            InitMode::Random { p_corrupt } => Ok(Self {
                states: (0..geometry.site_count())
                    .map(|_| {
                        if rng.uniform() < p_corrupt {
                            Self::CORRUPT
                        } else {
                            Self::HONEST
                        }
                    })
                    .collect(),
            }),
        }
    }

    fn check_state(state: i8) -> Result<()> {
        if state == 1 || state == -1 {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "agent state {state} is not ±1"
            )))
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[i8] {
        &self.states
    }

    #[inline]
    pub fn get(&self, index: usize) -> i8 {
        self.states[index]
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        self.states[index] = -self.states[index];
    }

    pub fn is_corrupt(&self, index: usize) -> bool {
        self.states[index] > 0
    }

    /// Global flip `c -> -c`.
    pub fn negated(&self) -> Self {
        Self {
            states: self.states.iter().map(|&s| -s).collect(),
        }
    }

    pub fn matches(&self, geometry: &LatticeGeometry) -> Result<()> {
        if self.states.len() == geometry.site_count() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "configuration has {} states, lattice has {} sites",
                self.states.len(),
                geometry.site_count()
            )))
        }
    }
}
