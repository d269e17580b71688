mod common;

use common::*;
use focq::covers::{build_cover, solve_splitter, validate_cover};
use focq::generators::{self, random_fo, random_structure, ExprGen};
use focq::locality::{local_radius, ClBuilder, ClEngine, ClKind, DirectEngine};
use focq::logic::{parse_expr, parse_formula, Expr, Registry, Var};
use focq::PatternGraph;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vars(names: &[&str]) -> Vec<Var> {
    names.iter().map(|s| s.to_string()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let preds = Registry::builtin();
        let e = ExprGen::default().expr(&mut rng);
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text, None, &preds).unwrap(), e);
        let f = random_fo(&mut rng, &vars(&["x", "y"]), 2, 3);
        let text = f.to_string();
        prop_assert_eq!(parse_formula(&text, None, &preds).unwrap(), f);
    }

    #[test]
    fn patterns_partition_tuples(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_structure(n, 0.25, &mut rng);
        let ys = focq::locality::clterm::canonical_vars(k);
        let body = local_body(&mut rng, &ys, 2);
        let r = local_radius(&body, &ys).unwrap();
        let brute = pattern_counts(&a, &body, &ys, r);
        let mut builder = ClBuilder::default();
        let mut total = BigInt::from(0);
        for g in PatternGraph::all(k) {
            let poly = builder.count_pattern(&ys, &g, &body, ClKind::Ground, r).unwrap();
            let got = poly.eval(&|b| BigInt::from(DirectEngine.ground(&a, b).unwrap()));
            prop_assert_eq!(&got, &BigInt::from(brute.get(&g).copied().unwrap_or(0)), "{} on {}", g, body);
            total += got;
        }
        let all = pattern_counts(&a, &focq::logic::Formula::tt(), &ys, r);
        prop_assert_eq!(all.values().sum::<i128>(), n.pow(k as u32) as i128);
        prop_assert_eq!(total, BigInt::from(brute.values().sum::<i128>()));
    }

    #[test]
    fn removal_formula_contract(seed in any::<u64>(), n in 2usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_structure(n, 0.2, &mut rng);
        let xs = vars(&["x", "y"]);
        let f = random_fo(&mut rng, &xs, 2, 2);
        let d = rng.gen_range(0..n) as focq::Elem;
        for beta in tuples(n, 2) {
            if let Err(e) = formula_contract(&a, &f, &xs, &beta, d) {
                return Err(TestCaseError::fail(e));
            }
        }
    }

    #[test]
    fn removal_term_contracts(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_structure(n, 0.2, &mut rng);
        let ys = vars(&["x", "y"]);
        let body = random_fo(&mut rng, &ys, 1, 2);
        let d = rng.gen_range(0..n) as focq::Elem;
        if let Err(e) = term_contracts(&a, &body, &ys, d) {
            return Err(TestCaseError::fail(e));
        }
    }

    #[test]
    fn game_value_monotone_and_closed(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ps = pairs(n);
        let mask: u32 = rng.gen::<u32>() & ((1u64 << ps.len()) - 1) as u32;
        let value = |mask: u32, r: u32| {
            solve_splitter(&graph_from_mask(n, &ps, mask), r, n as u32 + 1, 31).unwrap().value.unwrap()
        };
        let v1 = value(mask, 1);
        let v2 = value(mask, 2);
        prop_assert!(v1 <= v2);
        prop_assert!(v2 <= n as u32);
        let sub = mask & rng.gen::<u32>();
        prop_assert!(value(sub, 1) <= v1);
        prop_assert!(value(sub, 2) <= v2);
    }

    #[test]
    fn covers_are_valid(seed in any::<u64>(), n in 1usize..=300, r in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = ["tree", "grid", "deg3", "cycle"][rng.gen_range(0..4)];
        let a = generators::family(kind, n, &mut rng).unwrap();
        let cover = build_cover(&a, r);
        let report = validate_cover(&a, &cover);
        prop_assert!(report.ok, "{:?}", report.violations);
        prop_assert!(report.total_size <= a.len() * report.max_degree);
    }

    #[test]
    fn generated_expressions_are_fo1c(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e: Expr = ExprGen::default().expr(&mut rng);
        prop_assert!(focq::logic::validate_fo1c(&e).ok);
    }
}
