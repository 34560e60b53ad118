//! Connected clusters of corrupt agents.
//!
//! Two corrupt agents belong to the same cluster when a path of corrupt
//! nearest neighbours joins them, using the same periodic adjacency as the
//! dynamics. Labelling is a Hoshen–Kopelman style raster scan: every corrupt
//! site is merged with its corrupt `-axis` neighbours in a union-find forest,
//! which visits each bond exactly once, wrap-around bonds included.

use crate::lattice::{Configuration, LatticeGeometry};
use crate::{Error, Result};

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

/// Cluster id per site; honest sites carry none. Ids run `0..n_clusters` in
/// order of each cluster's smallest site index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabeling {
    labels: Vec<Option<u32>>,
    n_clusters: usize,
}

impl ClusterLabeling {
    pub fn label(&self, index: usize) -> Option<usize> {
        self.labels[index].map(|l| l as usize)
    }

    pub fn labels(&self) -> &[Option<u32>] {
        &self.labels
    }

    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    pub fn report(&self) -> ClusterReport {
        let mut sizes = vec![0u64; self.n_clusters];
        for l in self.labels.iter().flatten() {
            sizes[*l as usize] += 1;
        }
        ClusterReport::from_sizes(sizes)
    }
}

pub fn label_clusters(
    config: &Configuration,
    geometry: &LatticeGeometry,
) -> Result<ClusterLabeling> {
    config.matches(geometry)?;
    let m = geometry.site_count();
    let mut forest = UnionFind::new(m);
    for i in 0..m {
        if !config.is_corrupt(i) {
            continue;
        }
        for &n in geometry.neighbor_slots(i).iter().step_by(2) {
            if config.is_corrupt(n as usize) {
                forest.union(i as u32, n);
            }
        }
    }

    let mut root_label = vec![u32::MAX; m];
    let mut labels = vec![None; m];
    let mut n_clusters = 0u32;
    for (i, label) in labels.iter_mut().enumerate() {
        if !config.is_corrupt(i) {
            continue;
        }
        let root = forest.find(i as u32) as usize;
        if root_label[root] == u32::MAX {
            root_label[root] = n_clusters;
            n_clusters += 1;
        }
        *label = Some(root_label[root]);
    }
    Ok(ClusterLabeling {
        labels,
        n_clusters: n_clusters as usize,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterReport {
    pub n_clusters: usize,
    /// Size of each cluster, indexed by cluster id.
    pub sizes: Vec<u64>,
    pub largest: u64,
    /// Number-average size, `U / n_clusters` (0 with no clusters).
    pub mean_size: f64,
    /// Size-weighted average, `Σ s² / Σ s` (0 with no clusters).
    pub weighted_mean_size: f64,
}

impl ClusterReport {
    pub fn from_sizes(sizes: Vec<u64>) -> Self {
        let total: u64 = sizes.iter().sum();
        let squares: u64 = sizes.iter().map(|s| s * s).sum();
        let n = sizes.len();
        let (mean_size, weighted_mean_size) = if n == 0 {
            (0.0, 0.0)
        } else {
            (total as f64 / n as f64, squares as f64 / total as f64)
        };
        Self {
            n_clusters: n,
            largest: sizes.iter().copied().max().unwrap_or(0),
            sizes,
            mean_size,
            weighted_mean_size,
        }
    }

    /// Number of corrupt agents covered, equal to `U`.
    pub fn total_size(&self) -> u64 {
        self.sizes.iter().sum()
    }

    /// Counts clusters into `bins` equal-width bins over `[1, largest]`.
    pub fn size_histogram(&self, bins: usize) -> Result<SizeHistogram> {
        if bins == 0 {
            return Err(Error::InvalidParams(
                "histogram needs at least one bin".into(),
            ));
        }
        let width = self.largest.div_ceil(bins as u64).max(1);
        let mut counts = vec![0u64; bins];
        for &s in &self.sizes {
            counts[((s - 1) / width) as usize] += 1;
        }
        Ok(SizeHistogram { width, counts })
    }
}

/// Bin `b` counts clusters with size in `[1 + b·width, (b + 1)·width]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeHistogram {
    pub width: u64,
    pub counts: Vec<u64>,
}

impl SizeHistogram {
    pub fn lower_bound(&self, bin: usize) -> u64 {
        1 + bin as u64 * self.width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}
