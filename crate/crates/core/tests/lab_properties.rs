mod common;

use std::sync::Arc;

use common::*;
use satgeom::lab::{estimate_probability, Bracket, Experiment, Prober, Property, ScanRow};
use satgeom::random::{generate, GenSpec, Model};
use satgeom::solutions::enumerate_solutions;
use satgeom::ConstraintSet;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn probes_are_identical_at_any_worker_count() {
    let exp = Experiment::new(ksat(3), 40, Property::Sat, 64);
    let rows: Vec<ScanRow> = [1, 3, 8]
        .into_iter()
        .map(|t| in_pool(t, || estimate_probability(&exp, 4.2, 99).unwrap()))
        .collect();
    assert_eq!(rows[0], rows[1]);
    assert_eq!(rows[0], rows[2]);
}

#[test]
fn bisection_is_identical_at_any_worker_count() {
    let run = |t| {
        in_pool(t, || {
            let mut p = Prober::new(Experiment::new(ksat(2), 50, Property::Sat, 100), 5).unwrap();
            let b = Bracket { lo: 0.2, hi: 2.5, tol: 0.05 };
            (p.find_threshold(0.5, b.lo, b.hi, b.tol).unwrap(), p.pool())
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn sat_frequency_matches_enumeration() {
    // the Monte Carlo count must equal an enumeration of the same formulas
    let set = Arc::new(ConstraintSet::one_in_k(3));
    let exp = Experiment::new(set.clone(), 12, Property::Sat, 80);
    let row = estimate_probability(&exp, 0.6, 8).unwrap();
    let expected = (0..80)
        .filter(|&t| {
            let seed = satgeom::random::derive_seed(8, t);
            let phi = generate(&GenSpec::at_density(set.clone(), 12, 0.6, seed)).unwrap();
            !enumerate_solutions(&phi).unwrap().is_empty()
        })
        .count();
    assert_eq!(row.successes, expected);
}

#[test]
fn probability_is_monotone_up_to_noise() {
    let exp = Experiment::new(ksat(2), 80, Property::Sat, 300);
    let rows: Vec<ScanRow> = [0.4, 0.8, 1.2, 1.6, 2.0]
        .iter()
        .map(|&d| estimate_probability(&exp, d, 1).unwrap())
        .collect();
    for w in rows.windows(2) {
        assert!(w[1].ci_lo <= w[0].ci_hi, "{:?}", w);
    }
}

#[test]
fn generators_are_identical_at_any_worker_count() {
    let spec = GenSpec { model: Model::ConstantProbability { p: 0.01 }, n: 60, set: ksat(2), seed: 4 };
    let a = in_pool(1, || generate(&spec).unwrap());
    let b = in_pool(8, || generate(&spec).unwrap());
    assert_eq!(a, b);
}
