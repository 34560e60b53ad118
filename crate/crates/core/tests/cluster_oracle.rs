//! Cluster labelling compared with a breadth-first flood fill that computes
//! adjacency from coordinates.

use std::collections::VecDeque;

use corruption_lattice::{
    label_clusters, total_profit, Configuration, InitMode, LatticeGeometry, RngState,
};

fn decode(lengths: &[usize], mut index: usize) -> Vec<usize> {
    let mut coords = vec![0; lengths.len()];
    for axis in (0..lengths.len()).rev() {
        coords[axis] = index % lengths[axis];
        index /= lengths[axis];
    }
    coords
}

fn encode(lengths: &[usize], coords: &[usize]) -> usize {
    coords
        .iter()
        .zip(lengths)
        .fold(0, |acc, (&c, &l)| acc * l + c)
}

/// Component id per corrupt site, numbered by first site reached in index
/// order, which is also the smallest member.
fn bfs_labels(lengths: &[usize], states: &[i8]) -> Vec<Option<usize>> {
    let mut labels = vec![None; states.len()];
    let mut next = 0;
    for start in 0..states.len() {
        if states[start] < 0 || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        let mut queue = VecDeque::from([start]);
        while let Some(site) = queue.pop_front() {
            let c = decode(lengths, site);
            for axis in 0..lengths.len() {
                for step in [lengths[axis] - 1, 1] {
                    let mut n = c.clone();
                    n[axis] = (n[axis] + step) % lengths[axis];
                    let j = encode(lengths, &n);
                    if states[j] > 0 && labels[j].is_none() {
                        labels[j] = Some(next);
                        queue.push_back(j);
                    }
                }
            }
        }
        next += 1;
    }
    labels
}

fn check(lengths: &[usize], config: &Configuration, g: &LatticeGeometry) {
    let labeling = label_clusters(config, g).unwrap();
    let want = bfs_labels(lengths, config.states());
    let got: Vec<Option<usize>> = (0..g.site_count()).map(|i| labeling.label(i)).collect();
    assert_eq!(got, want, "{lengths:?} {:?}", config.states());

    let report = labeling.report();
    let n_bfs = want.iter().flatten().max().map_or(0, |m| m + 1);
    assert_eq!(report.n_clusters, n_bfs);
    assert_eq!(report.total_size(), total_profit(config));
    assert_eq!(
        report.largest,
        report.sizes.iter().copied().max().unwrap_or(0)
    );
    assert_eq!(report.size_histogram(5).unwrap().total(), n_bfs as u64);
}

#[test]
fn exhaustive_small_lattices() {
    for lengths in [&[2, 2][..], &[2, 2, 2]] {
        let g = LatticeGeometry::new(lengths).unwrap();
        for mask in 0..1u64 << g.site_count() {
            check(lengths, &Configuration::from_bits(&g, mask).unwrap(), &g);
        }
    }
}

#[test]
fn random_configs_on_444() {
    let lengths = [4, 4, 4];
    let g = LatticeGeometry::new(&lengths).unwrap();
    let mut rng = RngState::seed_from_u64(2024);
    for trial in 0..1000 {
        let p = [0.2, 0.31, 0.5, 0.7][trial % 4];
        let c = Configuration::init(&g, InitMode::Random { p_corrupt: p }, &mut rng).unwrap();
        check(&lengths, &c, &g);
    }
}

#[test]
fn assorted_geometries_up_to_512_sites() {
    let shapes: [&[usize]; 8] = [
        &[2],
        &[7],
        &[512],
        &[3, 5],
        &[16, 32],
        &[2, 3, 4],
        &[8, 8, 8],
        &[2, 16, 16],
    ];
    let mut rng = RngState::seed_from_u64(99);
    for lengths in shapes {
        let g = LatticeGeometry::new(lengths).unwrap();
        assert!(g.site_count() <= 512);
        for p in [0.25, 0.45, 0.6] {
            for _ in 0..20 {
                let c =
                    Configuration::init(&g, InitMode::Random { p_corrupt: p }, &mut rng).unwrap();
                check(lengths, &c, &g);
            }
        }
    }
}

#[test]
fn partition_is_translation_invariant() {
    let lengths = [5, 4, 3];
    let g = LatticeGeometry::new(&lengths).unwrap();
    let mut rng = RngState::seed_from_u64(7);
    for _ in 0..200 {
        let c = Configuration::init(&g, InitMode::Random { p_corrupt: 0.4 }, &mut rng).unwrap();
        let shift: Vec<usize> = lengths
            .iter()
            .map(|&l| rng.below(l as u64) as usize)
            .collect();
        let mut moved = vec![0i8; c.len()];
        let mut image = vec![0usize; c.len()];
        for i in 0..c.len() {
            let coords: Vec<usize> = decode(&lengths, i)
                .iter()
                .zip(&shift)
                .zip(&lengths)
                .map(|((&x, &d), &l)| (x + d) % l)
                .collect();
            image[i] = encode(&lengths, &coords);
            moved[image[i]] = c.get(i);
        }
        let moved = Configuration::from_states(&g, moved).unwrap();
        let a = label_clusters(&c, &g).unwrap();
        let b = label_clusters(&moved, &g).unwrap();
        assert_eq!(a.n_clusters(), b.n_clusters());
        for i in 0..c.len() {
            for j in 0..c.len() {
                let same_a = a.label(i).is_some() && a.label(i) == a.label(j);
                let same_b = b.label(image[i]).is_some() && b.label(image[i]) == b.label(image[j]);
                assert_eq!(same_a, same_b);
            }
        }
    }
}
