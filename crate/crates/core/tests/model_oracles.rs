//! Objective, local term and flip delta checked against a bond list built
//! from coordinates, independent of the neighbour tables.

use corruption_lattice::model::{BondDistribution, CouplingModel, Model, ObjectiveConvention};
use corruption_lattice::{Configuration, InitMode, LatticeGeometry, RngState, SiteId};
use proptest::prelude::*;

/// Row-major index from coordinates, last axis fastest.
fn encode(lengths: &[usize], coords: &[usize]) -> usize {
    coords
        .iter()
        .zip(lengths)
        .fold(0, |acc, (&c, &l)| acc * l + c)
}

fn decode(lengths: &[usize], mut index: usize) -> Vec<usize> {
    let mut coords = vec![0; lengths.len()];
    for axis in (0..lengths.len()).rev() {
        coords[axis] = index % lengths[axis];
        index /= lengths[axis];
    }
    coords
}

/// `(owner, +axis neighbour)` for every site and axis, in bond-id order.
fn bond_list(lengths: &[usize]) -> Vec<(usize, usize)> {
    let m: usize = lengths.iter().product();
    let mut bonds = Vec::new();
    for i in 0..m {
        let c = decode(lengths, i);
        for axis in 0..lengths.len() {
            let mut n = c.clone();
            n[axis] = (n[axis] + 1) % lengths[axis];
            bonds.push((i, encode(lengths, &n)));
        }
    }
    bonds
}

fn oracle_w(lengths: &[usize], couplings: &[f64], config: &Configuration) -> f64 {
    let s = config.states();
    -bond_list(lengths)
        .iter()
        .zip(couplings)
        .map(|(&(a, b), &j)| j * f64::from(s[a]) * f64::from(s[b]))
        .sum::<f64>()
}

/// `φ_i` by walking the bond list and picking every bond touching `site`.
fn oracle_phi(lengths: &[usize], couplings: &[f64], config: &Configuration, site: usize) -> f64 {
    let s = config.states();
    let mut phi = 0.0;
    for (&(a, b), &j) in bond_list(lengths).iter().zip(couplings) {
        if a == site {
            phi -= j * f64::from(s[a]) * f64::from(s[b]);
        }
        if b == site {
            phi -= j * f64::from(s[b]) * f64::from(s[a]);
        }
    }
    phi
}

fn random_config(g: &LatticeGeometry, rng: &mut RngState) -> Configuration {
    Configuration::init(g, InitMode::Random { p_corrupt: 0.5 }, rng).unwrap()
}

fn flipped(c: &Configuration, site: usize) -> Configuration {
    let mut out = c.clone();
    out.flip(site);
    out
}

#[test]
fn objective_matches_bond_list_on_random_configs() {
    let lengths = [3, 3, 3];
    let g = LatticeGeometry::new(&lengths).unwrap();
    let model = Model::uniform(1.0).unwrap();
    let ones = vec![1.0; g.bond_count()];
    let mut rng = RngState::seed_from_u64(100);
    for _ in 0..100 {
        let c = random_config(&g, &mut rng);
        assert_eq!(
            model.total_objective(&g, &c).unwrap(),
            oracle_w(&lengths, &ones, &c)
        );
    }
}

#[test]
fn per_bond_local_term_matches_slot_sum() {
    let lengths = [3, 3];
    let g = LatticeGeometry::new(&lengths).unwrap();
    let couplings =
        CouplingModel::quenched(&g, BondDistribution::Bimodal { magnitude: 1.0 }, 21).unwrap();
    let bonds: Vec<f64> = (0..g.bond_count()).map(|b| couplings.bond(b)).collect();
    let model = Model::new(couplings, ObjectiveConvention::BondOnce);
    let mut rng = RngState::seed_from_u64(5);
    for _ in 0..50 {
        let c = random_config(&g, &mut rng);
        for i in 0..g.site_count() {
            assert_eq!(
                model.local_term(&g, &c, SiteId(i)).unwrap(),
                oracle_phi(&lengths, &bonds, &c, i)
            );
        }
        assert_eq!(
            model.total_objective(&g, &c).unwrap(),
            oracle_w(&lengths, &bonds, &c)
        );
    }
}

#[test]
fn length_two_axes_count_both_bonds() {
    // [2] ring: two bonds between the same pair, W = -2 J c0 c1.
    let lengths = [2];
    let g = LatticeGeometry::new(&lengths).unwrap();
    let model = Model::uniform(1.5).unwrap();
    let c = Configuration::from_states(&g, vec![1, -1]).unwrap();
    assert_eq!(model.total_objective(&g, &c).unwrap(), 3.0);
    assert_eq!(model.flip_delta(&g, &c, SiteId(0)).unwrap(), -6.0);

    let lengths = [2, 3, 2];
    let g = LatticeGeometry::new(&lengths).unwrap();
    let ones = vec![1.0; g.bond_count()];
    let mut rng = RngState::seed_from_u64(8);
    for _ in 0..20 {
        let c = random_config(&g, &mut rng);
        let w = Model::uniform(1.0)
            .unwrap()
            .total_objective(&g, &c)
            .unwrap();
        assert_eq!(w, oracle_w(&lengths, &ones, &c));
    }
}

#[test]
fn flip_delta_matches_full_recompute_integer_couplings() {
    let g = LatticeGeometry::new(&[4, 4, 4]).unwrap();
    let models = [
        Model::uniform(1.0).unwrap(),
        Model::uniform(-2.0).unwrap(),
        Model::new(
            CouplingModel::quenched(&g, BondDistribution::Bimodal { magnitude: 1.0 }, 3).unwrap(),
            ObjectiveConvention::BondOnce,
        ),
        Model::new(
            CouplingModel::uniform(1.0).unwrap(),
            ObjectiveConvention::Literal,
        ),
    ];
    let mut rng = RngState::seed_from_u64(1234);
    for model in &models {
        for _ in 0..1000 {
            let c = random_config(&g, &mut rng);
            let k = rng.below(g.site_count() as u64) as usize;
            let delta = model.flip_delta(&g, &c, SiteId(k)).unwrap();
            let full = model.total_objective(&g, &flipped(&c, k)).unwrap()
                - model.total_objective(&g, &c).unwrap();
            assert_eq!(delta, full);
        }
    }
}

#[test]
fn flip_delta_matches_full_recompute_real_couplings() {
    let g = LatticeGeometry::new(&[4, 4, 4]).unwrap();
    let model = Model::new(
        CouplingModel::quenched(
            &g,
            BondDistribution::Interval {
                low: -1.3,
                high: 2.7,
            },
            9,
        )
        .unwrap(),
        ObjectiveConvention::BondOnce,
    );
    let uniform = Model::uniform(0.731).unwrap();
    let mut rng = RngState::seed_from_u64(4321);
    for m in [&model, &uniform] {
        for _ in 0..1000 {
            let c = random_config(&g, &mut rng);
            let k = rng.below(g.site_count() as u64) as usize;
            let delta = m.flip_delta(&g, &c, SiteId(k)).unwrap();
            let before = m.total_objective(&g, &c).unwrap();
            let full = m.total_objective(&g, &flipped(&c, k)).unwrap() - before;
            // Recomputing W rounds at the scale of Σ|J_ij|, not |W|: the bond
            // terms can cancel to zero.
            let scale = delta.abs().max(m.objective_bound(&g));
            assert!((delta - full).abs() / scale <= 1e-12, "{delta} vs {full}");
        }
    }
}

fn translate(lengths: &[usize], c: &Configuration, shift: &[usize]) -> Vec<i8> {
    let m = c.len();
    let mut out = vec![0; m];
    for (i, &s) in c.states().iter().enumerate() {
        let coords: Vec<usize> = decode(lengths, i)
            .iter()
            .zip(shift)
            .zip(lengths)
            .map(|((&x, &d), &l)| (x + d) % l)
            .collect();
        out[encode(lengths, &coords)] = s;
    }
    out
}

fn geometry_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..5, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn global_flip_symmetry(lengths in geometry_strategy(), seed: u64, disorder: u64) {
        let g = LatticeGeometry::new(&lengths).unwrap();
        let mut rng = RngState::seed_from_u64(seed);
        let c = random_config(&g, &mut rng);
        let spin_glass = Model::new(
            CouplingModel::quenched(&g, BondDistribution::Interval { low: -1.0, high: 1.0 }, disorder).unwrap(),
            ObjectiveConvention::BondOnce,
        );
        for model in [Model::uniform(1.0).unwrap(), spin_glass] {
            prop_assert_eq!(
                model.total_objective(&g, &c).unwrap(),
                model.total_objective(&g, &c.negated()).unwrap()
            );
        }
    }

    #[test]
    fn objective_bounded_by_coupling_mass(lengths in geometry_strategy(), seed: u64, disorder: u64) {
        let g = LatticeGeometry::new(&lengths).unwrap();
        let mut rng = RngState::seed_from_u64(seed);
        let c = random_config(&g, &mut rng);
        let model = Model::new(
            CouplingModel::quenched(&g, BondDistribution::Bimodal { magnitude: 1.0 }, disorder).unwrap(),
            ObjectiveConvention::BondOnce,
        );
        let w = model.total_objective(&g, &c).unwrap();
        let bound = model.objective_bound(&g);
        prop_assert!(w.abs() <= bound);

        // Equality when every bond is satisfied: ferromagnetic ground state.
        let ferro = Model::uniform(1.0).unwrap();
        let aligned = Configuration::uniform(&g, 1).unwrap();
        prop_assert_eq!(ferro.total_objective(&g, &aligned).unwrap(), -ferro.objective_bound(&g));
    }

    #[test]
    fn uniform_objective_translation_invariant(lengths in geometry_strategy(), seed: u64, shift_seed: u64) {
        let g = LatticeGeometry::new(&lengths).unwrap();
        let mut rng = RngState::seed_from_u64(seed);
        let c = random_config(&g, &mut rng);
        let mut srng = RngState::seed_from_u64(shift_seed);
        let shift: Vec<usize> = lengths.iter().map(|&l| srng.below(l as u64) as usize).collect();
        let moved = Configuration::from_states(&g, translate(&lengths, &c, &shift)).unwrap();
        let model = Model::uniform(1.0).unwrap();
        prop_assert_eq!(model.total_objective(&g, &c).unwrap(), model.total_objective(&g, &moved).unwrap());
    }

    #[test]
    fn literal_objective_is_sum_of_local_terms(lengths in geometry_strategy(), seed: u64) {
        let g = LatticeGeometry::new(&lengths).unwrap();
        let mut rng = RngState::seed_from_u64(seed);
        let c = random_config(&g, &mut rng);
        let once = Model::uniform(1.0).unwrap();
        let literal = Model::new(CouplingModel::uniform(1.0).unwrap(), ObjectiveConvention::Literal);
        let phi: f64 = (0..g.site_count()).map(|i| once.local_term(&g, &c, SiteId(i)).unwrap()).sum();
        prop_assert_eq!(literal.total_objective(&g, &c).unwrap(), phi);
    }
}
