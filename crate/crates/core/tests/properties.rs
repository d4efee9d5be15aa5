mod common;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

use common::q;
use rdnm::arith::{pow2, round_down_dyadic, solve_linear, RMatrix};
use rdnm::decomp::{build_graph, decompose};
use rdnm::driver::rescale;
use rdnm::newton::{run_rnm_with, RnmOptions, TraceMode};
use rdnm::{
    certify_params_scc, clean, detect_zero_variables, parse_rational, solve, to_snf, value_iterate, zero_set_oracle,
    Mode, MonotoneSystem, Rational, RnmConfig, SolveOptions,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| q(n, d))
}

fn non_negative() -> impl Strategy<Value = Rational> {
    (0i64..64, 1i64..16).prop_map(|(n, d)| q(n, d))
}

fn seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_text_round_trip(r in rational()) {
        prop_assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn arithmetic_is_exact(a in rational(), b in rational(), c in rational()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!((&a + &b) * &c, &a * &c + &b * &c);
        if !b.is_zero() {
            prop_assert_eq!(&(&a / &b) * &b, a);
        }
    }

    #[test]
    fn round_down_brackets(r in rational(), h in 0u32..80) {
        let d = round_down_dyadic(&r, h);
        let v = d.to_rational();
        let clamped = r.max(Rational::zero());
        prop_assert!(v >= Rational::zero());
        prop_assert!(v <= clamped);
        prop_assert!(&clamped - &v < pow2(-(h as i64)));
        prop_assert_eq!(d.scale(), h);
    }

    #[test]
    fn solve_satisfies_system(n in 1usize..5, entries in prop::collection::vec(rational(), 16), rhs in prop::collection::vec(rational(), 4)) {
        // strict diagonal dominance keeps the matrix nonsingular
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut row: Vec<Rational> = (0..n).map(|j| entries[i * 4 + j].clone()).collect();
                let off: Rational = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| num_traits::abs(v.clone())).sum();
                row[i] = off + Rational::one();
                row
            })
            .collect();
        let a = RMatrix::from_rows(rows).unwrap();
        let b = &rhs[..n];
        let x = solve_linear(&a, b).unwrap();
        prop_assert_eq!(a.mul_vec(&x), b.to_vec());
    }

    #[test]
    fn evaluation_is_monotone(s in seed(), bumps in prop::collection::vec(non_negative(), 4), base in prop::collection::vec(non_negative(), 4)) {
        let mut r = common::rng(s);
        let sys = common::sparse_system(&mut r, 4, 3, 3);
        let y: Vec<Rational> = base.iter().zip(&bumps).map(|(a, b)| a + b).collect();
        for (px, py) in sys.eval(&base).iter().zip(sys.eval(&y)) {
            prop_assert!(*px <= py);
        }
    }

    #[test]
    fn jacobian_midpoint_identity(s in seed(), a in prop::collection::vec(non_negative(), 4), b in prop::collection::vec(non_negative(), 4)) {
        let mut r = common::rng(s);
        let sys = common::sparse_system(&mut r, 4, 4, 2);
        let two = Rational::from_integer(BigInt::from(2));
        let mid: Vec<Rational> = a.iter().zip(&b).map(|(x, y)| (x + y) / &two).collect();
        let diff: Vec<Rational> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let lhs: Vec<Rational> = sys.eval(&a).iter().zip(sys.eval(&b)).map(|(x, y)| x - y).collect();
        prop_assert_eq!(lhs, sys.eval_jacobian(&mid).unwrap().mul_vec(&diff));
    }

    #[test]
    fn json_round_trip(s in seed(), n in 1usize..6) {
        let mut r = common::rng(s);
        let sys = common::sparse_system(&mut r, n, 4, 3);
        prop_assert_eq!(MonotoneSystem::parse(&sys.to_json()).unwrap(), sys);
    }

    #[test]
    fn zero_detection_matches_value_iteration(s in seed(), n in 1usize..7) {
        let mut r = common::rng(s);
        let sys = common::sparse_system(&mut r, n, 3, 2);
        prop_assert_eq!(detect_zero_variables(&sys), zero_set_oracle(&sys));
    }

    #[test]
    fn cleaning_removes_exactly_the_zero_set(s in seed(), n in 1usize..7) {
        let mut r = common::rng(s);
        let sys = common::sparse_system(&mut r, n, 3, 2);
        let cleaned = clean(&sys);
        prop_assert_eq!(cleaned.zero.len() + cleaned.kept.len(), n);
        prop_assert!(detect_zero_variables(&cleaned.system).is_empty());
        // the cleaned system iterates like the original on the kept variables
        let full = value_iterate(&sys, 3);
        let part = value_iterate(&cleaned.system, 3);
        for (j, &i) in cleaned.kept.iter().enumerate() {
            prop_assert_eq!(&part[j], &full[i]);
        }
    }

    #[test]
    fn normal_form_shape_and_projection(s in seed(), n in 1usize..5) {
        let mut r = common::rng(s);
        let sys = common::sparse_system(&mut r, n, 3, 4);
        let snf = to_snf(&sys);
        prop_assert!(snf.is_valid());
        prop_assert!(snf.system.degree() <= 2);
        prop_assert_eq!(snf.projection.len(), n);
        let zero_orig = detect_zero_variables(&sys);
        let zero_snf = detect_zero_variables(&snf.system);
        for (i, &p) in snf.projection.iter().enumerate() {
            prop_assert_eq!(zero_orig.contains(&i), zero_snf.contains(&p));
        }
    }

    #[test]
    fn decomposition_is_closed(s in seed(), n in 1usize..8) {
        let mut r = common::rng(s);
        let sys = common::sparse_system(&mut r, n, 3, 2);
        let graph = build_graph(&sys);
        let dec = decompose(&graph, &sys);
        let mut owner = vec![usize::MAX; n];
        for (k, scc) in dec.sccs.iter().enumerate() {
            for &v in &scc.vars {
                prop_assert_eq!(owner[v], usize::MAX);
                owner[v] = k;
            }
        }
        prop_assert!(owner.iter().all(|&k| k != usize::MAX));
        for (i, j) in graph.edges() {
            let (a, b) = (&dec.sccs[owner[i]], &dec.sccs[owner[j]]);
            if owner[i] != owner[j] {
                prop_assert!(b.height < a.height);
                prop_assert!(a.deps.contains(&j));
                prop_assert!(b.deps.iter().all(|v| a.deps.contains(v)));
            }
        }
        prop_assert_eq!(dec.depth, dec.sccs.iter().map(|s| s.height).max().unwrap_or(0));
    }

    #[test]
    fn certified_parameters_over_approximate(n in 1usize..6, an in 1i64..50, ad in 1i64..200, e in 1i64..40) {
        let alpha = q(an.min(ad), ad);
        let eps = pow2(-e);
        let cfg = certify_params_scc(n, &alpha, &eps).unwrap();
        prop_assert!(cfg.has_enough_iterations());
        // 2^(h - 2) >= alpha^-n / eps
        let need = num_traits::pow(alpha.recip(), n) / &eps;
        prop_assert!(pow2(cfg.h as i64 - 2) >= need);
    }

    #[test]
    fn rescaling_is_bit_exact(s in seed(), n in 1usize..4, u in 1u32..4) {
        let mut r = common::rng(s);
        let sys = common::probabilistic_quadratic(&mut r, n);
        let opts = RnmOptions { divergence_exponent: None, trace: TraceMode::Full };
        if let Ok(base) = run_rnm_with(&sys, RnmConfig::new(20, 12).unwrap(), &opts) {
            let scaled = run_rnm_with(&rescale(&sys, u), RnmConfig::new(20 + u, 12).unwrap(), &opts).unwrap();
            prop_assert_eq!(base.trace.records.len(), scaled.trace.records.len());
            for (a, b) in base.trace.records.iter().zip(&scaled.trace.records) {
                let lifted: Vec<_> = b.iterate.iter().map(|x| x.mul_pow2(u)).collect();
                prop_assert_eq!(&a.iterate, &lifted);
            }
        }
    }

    #[test]
    fn rounded_newton_stays_below_a_post_fixed_point(s in seed(), n in 1usize..4) {
        let mut r = common::rng(s);
        let sys = clean(&common::probabilistic_quadratic(&mut r, n)).system;
        let opts = RnmOptions { divergence_exponent: Some(0), trace: TraceMode::Full };
        let run = run_rnm_with(&sys, RnmConfig::new(32, 24).unwrap(), &opts).unwrap();
        for rec in &run.trace.records {
            prop_assert!(rec.iterate.iter().all(|x| x.to_rational() <= Rational::one()));
        }
    }

    #[test]
    fn termination_systems_have_nonlinear_depth_at_most_one(s in seed(), states in 1usize..5) {
        let mut r = common::rng(s);
        let model = common::random_p1ca(&mut r, states);
        let sys = rdnm::build_termination_mps(&model).unwrap();
        let cleaned = clean(&sys).system;
        let dec = decompose(&build_graph(&cleaned), &cleaned);
        prop_assert!(dec.nonlinear_depth <= 1);
        prop_assert_eq!(sys.len(), states * states);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn normal_form_keeps_the_fixed_point(s in seed(), n in 1usize..4) {
        let mut r = common::rng(s);
        let sys = common::probabilistic_quadratic(&mut r, n);
        let eps = pow2(-10);
        let run = |snf| {
            let opts = SolveOptions { mode: Mode::Adaptive, snf, h: Some(64), iters: Some(63), ..Default::default() };
            solve(&sys, &eps, &opts).unwrap().approximation
        };
        for (a, b) in run(true).iter().zip(run(false)) {
            let gap = num_traits::abs(a.to_rational() - b.to_rational());
            prop_assert!(gap <= pow2(-8), "gap {}", gap);
        }
    }
}
