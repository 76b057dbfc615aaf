mod common;

use common::*;
use proptest::prelude::*;
use satgeom::classify::{classify, is_implicate, strongly_depends_on_2xor, strongly_depends_on_literal};
use satgeom::formula::{overlap, BandWidth};
use satgeom::io::{emit_formula, parse_formula, Format};
use satgeom::solutions::{clusters, decide_q_overlap_in, enumerate_solutions, overlap_histogram, QOverlapOptions};
use satgeom::{Assignment, ConstraintSet, Rational};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn overlap_is_symmetric_and_bounded(a in arb_assignment(13), b in arb_assignment(13)) {
        let ab = overlap(&a, &b).unwrap();
        prop_assert_eq!(ab, overlap(&b, &a).unwrap());
        prop_assert!(ab <= Rational::from_integer(1));
        prop_assert_eq!(overlap(&a, &a).unwrap(), Rational::from_integer(1));
        prop_assert_eq!(a.agreement(&b).unwrap() + a.hamming(&b).unwrap(), 13);
        prop_assert_eq!(overlap(&a, &a.complement()).unwrap(), Rational::from_integer(0));
    }

    #[test]
    fn eval_matches_constraint_loop(phi in arb_formula(3, 9, 12), bits in 0u64..512) {
        let n = phi.num_vars();
        let a = Assignment::from_bits(bits & ((1 << n) - 1), n);
        let expected = phi.applications().iter().all(|app| {
            let args: Vec<bool> = app.vars.iter().map(|&v| a.get(v as usize)).collect();
            phi.relation_of(app).eval(&args).unwrap()
        });
        prop_assert_eq!(phi.eval(&a).unwrap(), expected);
        prop_assert_eq!(phi.eval_bits(a.to_bits().unwrap()), expected);
    }

    #[test]
    fn gbcsp_round_trip(phi in arb_formula(3, 8, 10)) {
        let text = emit_formula(&phi, Format::Gbcsp).unwrap();
        let back = parse_formula(&text, Format::Gbcsp).unwrap();
        prop_assert!(back.same_constraints(&phi));
        prop_assert_eq!(emit_formula(&back, Format::Gbcsp).unwrap(), text);
    }

    #[test]
    fn dimacs_round_trip(seed in any::<u64>(), k in 2usize..=3, c in 0.0f64..3.0) {
        let phi = random_formula(&ksat(k), 10, c, seed);
        // an empty clause list carries no width
        prop_assume!(phi.num_constraints() > 0);
        let text = emit_formula(&phi, Format::Dimacs).unwrap();
        let back = parse_formula(&text, Format::Dimacs).unwrap();
        prop_assert_eq!(&back, &phi);
    }

    #[test]
    fn classify_matches_brute_force(cs in arb_set(3)) {
        prop_assert_eq!(classify(&cs).verdict, brute_classify(&cs));
    }

    #[test]
    fn classify_matches_brute_force_binary(cs in arb_set(2)) {
        prop_assert_eq!(classify(&cs).verdict, brute_classify(&cs));
    }

    #[test]
    fn classify_is_invariant_under_argument_permutation(cs in arb_set(3), p in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let permuted = ConstraintSet::new(
            cs.relations().iter().map(|r| r.permuted(&perms[p]).unwrap()).collect(),
        ).unwrap();
        prop_assert_eq!(classify(&cs).verdict, classify(&permuted).verdict);
    }

    #[test]
    fn dependence_witnesses_are_implicates(r in arb_relation(4, "r")) {
        if let Some((i, v)) = strongly_depends_on_literal(&r) {
            prop_assert!(is_implicate(&r, &unit_table(4, i - 1, v)).unwrap());
        }
        if let Some((i, j)) = strongly_depends_on_2xor(&r) {
            prop_assert!(i < j);
            prop_assert!(is_implicate(&r, &xor_table(4, i - 1, j - 1)).unwrap());
        }
    }

    #[test]
    fn enumeration_matches_naive(phi in arb_formula(3, 11, 14)) {
        let sols = enumerate_solutions(&phi).unwrap();
        prop_assert_eq!(sols.solutions, naive_solutions(&phi));
    }

    #[test]
    fn clusters_match_bfs(seed in any::<u64>(), c in 0.2f64..1.5, f in 1usize..4) {
        let phi = random_formula(&ksat(2), 11, c, seed);
        let sols = enumerate_solutions(&phi).unwrap();
        let report = clusters(&sols, f).unwrap();
        prop_assert_eq!(&report.cluster_of, &bfs_clusters(&sols.solutions, f as u32));
        prop_assert_eq!(report.sizes.iter().sum::<usize>(), sols.len());
    }

    #[test]
    fn histogram_counts_every_pair(seed in any::<u64>(), c in 0.2f64..1.5) {
        let phi = random_formula(&ksat(2), 10, c, seed);
        let sols = enumerate_solutions(&phi).unwrap();
        let report = clusters(&sols, 2).unwrap();
        let h = overlap_histogram(&sols, Some(&report)).unwrap();
        let s = sols.len() as u64;
        prop_assert_eq!(h.total(), s * s.saturating_sub(1) / 2);
        let w = h.within_cluster.unwrap();
        let x = h.cross_cluster.unwrap();
        for a in 0..=10 {
            prop_assert_eq!(w[a] + x[a], h.pairs[a]);
        }
    }

    #[test]
    fn complement_closed_sets_have_palindromic_histograms(seed in any::<u64>(), c in 0.1f64..0.8) {
        // XOR2 solutions are closed under complement, so distance d and n − d pair up
        let phi = random_formula(&std::sync::Arc::new(ConstraintSet::xor2()), 12, c, seed);
        let sols = enumerate_solutions(&phi).unwrap();
        let h = overlap_histogram(&sols, None).unwrap();
        for a in 1..12 {
            prop_assert_eq!(h.pairs[a], h.pairs[12 - a]);
        }
    }

    #[test]
    fn q_overlap_matches_pair_scan(seed in any::<u64>(), c in 0.2f64..2.0, num in 1u64..=20, distinct: bool) {
        let phi = random_formula(&ksat(3), 10, c, seed);
        let sols = enumerate_solutions(&phi).unwrap();
        let q = Rational::new(num, 20);
        for width in [BandWidth::InvSqrt, BandWidth::Agreements(0), BandWidth::Agreements(1)] {
            let d = decide_q_overlap_in(&sols, q, QOverlapOptions { width, distinct }).unwrap();
            prop_assert_eq!(d.satisfiable, naive_q_overlap(&sols.solutions, 10, q, width, distinct));
            if let Some((a, b)) = d.witness {
                prop_assert!(phi.eval(&a).unwrap() && phi.eval(&b).unwrap());
                prop_assert_eq!(Some(a.agreement(&b).unwrap()), d.agreement);
                prop_assert!(!distinct || a != b);
            }
        }
    }
}
