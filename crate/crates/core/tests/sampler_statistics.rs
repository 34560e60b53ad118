//! Metropolis chain against exact enumeration.

use std::sync::Arc;

use corruption_lattice::model::{BondDistribution, CouplingModel, Model, ObjectiveConvention};
use corruption_lattice::oracle::{enumerate, random_site_kernel, site_kernel};
use corruption_lattice::sampler::run_chain;
use corruption_lattice::{
    acceptance_probability, mean_state, ChainParams, ChainState, InitMode, LatticeGeometry,
    Observable, RunHooks, Schedule,
};

fn chain(
    lengths: &[usize],
    model: Model,
    t: f64,
    schedule: Schedule,
    seed: u64,
    init: InitMode,
) -> ChainState {
    let g = Arc::new(LatticeGeometry::new(lengths).unwrap());
    let p = ChainParams::new(t, 1, schedule, seed, init).unwrap();
    ChainState::new(g, Arc::new(model), p).unwrap()
}

fn mask_of(state: &ChainState) -> usize {
    state
        .config()
        .states()
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(i, _)| 1 << i)
        .sum()
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[test]
fn detailed_balance_of_acceptance_rule() {
    // P(c→c')/P(c'→c) = A(ΔW)/A(-ΔW) must equal exp(-βΔW) for either sign.
    for beta in [0.1, 0.5, 1.0, 2.0, 7.5] {
        for dw in [-12.0, -4.0, -0.3, 0.3, 4.0, 12.0] {
            let ratio = acceptance_probability(dw, beta) / acceptance_probability(-dw, beta);
            let want = (-beta * dw).exp();
            assert!((ratio - want).abs() <= 1e-15 * want.max(1.0), "{beta} {dw}");
        }
    }
}

#[test]
fn enumerated_distribution_is_stationary_for_every_kernel() {
    let g = LatticeGeometry::new(&[2, 2, 2]).unwrap();
    let spin_glass = Model::new(
        CouplingModel::quenched(
            &g,
            BondDistribution::Interval {
                low: -1.0,
                high: 1.0,
            },
            17,
        )
        .unwrap(),
        ObjectiveConvention::BondOnce,
    );
    let literal = Model::new(
        CouplingModel::uniform(1.0).unwrap(),
        ObjectiveConvention::Literal,
    );
    for model in [
        Model::uniform(1.0).unwrap(),
        Model::uniform(-1.0).unwrap(),
        spin_glass,
        literal,
    ] {
        for t in [0.5, 2.0, 5.0] {
            let beta = 1.0 / t;
            let dist = enumerate(&g, &model, beta).unwrap();
            let p = dist.probabilities();
            let k = random_site_kernel(&g, &model, beta).unwrap();
            let moved = k.apply(p);
            let err = p
                .iter()
                .zip(&moved)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-10, "random-site kernel off by {err}");
            for site in 0..g.site_count() {
                let moved = site_kernel(&g, &model, beta, site).unwrap().apply(p);
                let err = p
                    .iter()
                    .zip(&moved)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err <= 1e-10, "site {site} kernel off by {err}");
            }
        }
    }
}

#[test]
fn two_site_ring_matches_boltzmann() {
    // Reference probabilities from an independent enumeration of W = -2 c0 c1
    // at T = 1: aligned pairs e^2/(2e^2 + 2e^-2), split pairs e^-2/(...).
    let exact = [
        0.491_006_895_018_954_2,
        0.008_993_104_981_045_778,
        0.008_993_104_981_045_778,
        0.491_006_895_018_954_2,
    ];
    let g = LatticeGeometry::new(&[2]).unwrap();
    let dist = enumerate(&g, &Model::uniform(1.0).unwrap(), 1.0).unwrap();
    for (p, q) in dist.probabilities().iter().zip(exact) {
        assert!((p - q).abs() < 1e-15);
    }

    let mut c = chain(
        &[2],
        Model::uniform(1.0).unwrap(),
        1.0,
        Schedule::RandomSite,
        31,
        InitMode::Random { p_corrupt: 0.5 },
    );
    let mut counts = [0u64; 4];
    let n = 10_000_000;
    for _ in 0..n {
        c.metropolis_step();
        counts[mask_of(&c)] += 1;
    }
    let empirical: Vec<f64> = counts.iter().map(|&k| k as f64 / n as f64).collect();
    let tv = total_variation(&empirical, &exact);
    assert!(tv <= 0.01, "TV {tv}: {empirical:?}");
}

#[test]
fn sequential_sweep_samples_boltzmann_with_disorder() {
    // With uniform J many moves have ΔW = 0 and are always accepted, which
    // makes the deterministic sweep periodic on small lattices. Generic real
    // couplings remove those ties.
    let g = LatticeGeometry::new(&[2, 2]).unwrap();
    let model = Model::new(
        CouplingModel::quenched(
            &g,
            BondDistribution::Interval {
                low: -1.0,
                high: 1.0,
            },
            1,
        )
        .unwrap(),
        ObjectiveConvention::BondOnce,
    );
    let beta = 0.4;
    let exact = enumerate(&g, &model, beta).unwrap();
    let mut c = chain(
        &[2, 2],
        model,
        1.0 / beta,
        Schedule::SequentialSweep,
        3,
        InitMode::AllHonest,
    );
    let mut counts = [0u64; 16];
    let sweeps = 1_000_000;
    for _ in 0..sweeps {
        c.advance(4);
        counts[mask_of(&c)] += 1;
    }
    let empirical: Vec<f64> = counts.iter().map(|&k| k as f64 / sweeps as f64).collect();
    let tv = total_variation(&empirical, exact.probabilities());
    assert!(tv <= 0.01, "TV {tv}");
}

#[test]
fn exact_fixtures_from_independent_enumeration() {
    let square = LatticeGeometry::new(&[2, 2]).unwrap();
    let d = enumerate(&square, &Model::uniform(1.0).unwrap(), 0.4).unwrap();
    assert!((d.exact_expectation(Observable::Objective) - -6.408_670_069_765_764).abs() < 1e-12);

    let g = LatticeGeometry::new(&[3, 3]).unwrap();
    let d = enumerate(&g, &Model::uniform(1.0).unwrap(), 0.5).unwrap();
    let table = d.observable_marginal(Observable::Profit);
    let want = [
        0.396_471_796_790_86,
        0.065_354_708_336_300_92,
        0.020_083_622_402_211_45,
        0.011_347_193_469_603_448,
        0.006_742_679_001_028_655,
        0.006_742_679_001_028_654,
        0.011_347_193_469_603_452,
        0.020_083_622_402_211_45,
        0.065_354_708_336_300_92,
        0.396_471_796_790_86,
    ];
    assert_eq!(table.len(), 10);
    for (u, ((value, mass), w)) in table.iter().zip(want).enumerate() {
        assert_eq!(*value, u as f64);
        assert!((mass - w).abs() < 1e-12, "U={u}: {mass} vs {w}");
    }
}

// Trajectory of seed 7 on [2,2], J = 1, T = 2, random init: the visited site
// and whether the flip was accepted, frozen from the first recorded run.
const GOLDEN_SITES: &str =
    "1001031233100120302113313011020313111230133222121231020230313030222321031233113010233002130110233031";
const GOLDEN_ACCEPTED: &str =
    "1110111000000000101111110100000000001011011100000000000000000000000000000000000000000000111001100100";

#[test]
fn golden_trajectory() {
    let mut c = chain(
        &[2, 2],
        Model::uniform(1.0).unwrap(),
        2.0,
        Schedule::RandomSite,
        7,
        InitMode::Random { p_corrupt: 0.5 },
    );
    let mut sites = String::new();
    let mut accepted = String::new();
    for _ in 0..100 {
        let out = c.metropolis_step();
        sites.push(char::from(b'0' + out.site.index() as u8));
        accepted.push(if out.accepted { '1' } else { '0' });
    }
    assert_eq!(sites, GOLDEN_SITES);
    assert_eq!(accepted, GOLDEN_ACCEPTED);
}

#[test]
fn identical_inputs_give_identical_runs() {
    let g = Arc::new(LatticeGeometry::new(&[6, 6, 6]).unwrap());
    let model = Arc::new(Model::uniform(1.0).unwrap());
    let p = ChainParams::new(
        3.0,
        200_000,
        Schedule::RandomSite,
        42,
        InitMode::Random { p_corrupt: 0.5 },
    )
    .unwrap();
    let hooks = RunHooks {
        measure_every: Some(1000),
        snapshot_every: Some(50_000),
    };
    let a = run_chain(g.clone(), model.clone(), p.clone(), hooks).unwrap();
    let b = run_chain(g, model, p, hooks).unwrap();
    assert_eq!(a.series, b.series);
    assert_eq!(a.snapshots, b.snapshots);
    assert_eq!(a.state.config(), b.state.config());
    assert_eq!(a.state.rng(), b.state.rng());
}

#[test]
fn cold_chain_stays_ordered() {
    let mut c = chain(
        &[16, 16, 16],
        Model::uniform(1.0).unwrap(),
        0.5,
        Schedule::RandomSite,
        1,
        InitMode::AllCorrupt,
    );
    for _ in 0..100 {
        c.advance(100_000);
        assert!(mean_state(c.config()) > 0.99);
    }
    assert_eq!(c.current_w(), c.recompute_w());
}

#[test]
fn every_flip_is_reachable() {
    // Random site proposals reach every site and positive temperature gives
    // every uphill move a nonzero chance.
    let mut c = chain(
        &[3, 3, 3],
        Model::uniform(1.0).unwrap(),
        0.5,
        Schedule::RandomSite,
        5,
        InitMode::AllCorrupt,
    );
    let mut seen = [false; 27];
    for _ in 0..10_000 {
        seen[c.metropolis_step().site.index()] = true;
    }
    assert!(seen.iter().all(|&s| s));
    assert!(acceptance_probability(24.0, 2.0) > 0.0);
}
