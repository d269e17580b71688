//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any gated criterion fails.

mod common;

use std::time::Instant;

use common::*;
use focq::covers::{build_cover, solve_splitter, validate_cover};
use focq::eval::{eval, eval_formula, Interpretation};
use focq::generators::{self, random_fo, random_structure};
use focq::locality::clterm::canonical_vars;
use focq::locality::{eval_in_neighbourhood, local_radius, BasicClTerm, ClBuilder, ClEngine, ClKind, DirectEngine};
use focq::localized::{benchmark, evaluate, EvalConfig};
use focq::logic::{parse_formula, Formula, Registry};
use focq::reductions::{
    encode_string, encode_tree, rewrite_string_formula, rewrite_tree_formula, sentence_pool, undirected_graph,
};
use focq::structures::GaifmanGraph;
use focq::{Elem, PatternGraph, Structure};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn oracle_equivalence() -> Outcome {
    const PAIRS: usize = 200;
    const BUDGET_SECS: f64 = 600.0;
    let preds = Registry::builtin();
    let cfg = EvalConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let (mut agree, mut fallbacks) = (0, 0);
    let mut first_bad = None;
    for i in 0..PAIRS {
        let (_, a, e) = generators::corpus_pair(i, &mut rng);
        let want = eval(&e, &a, &preds).unwrap();
        match evaluate(&e, &a, &cfg, &preds) {
            Ok(got) if got.value == want => {
                agree += 1;
                fallbacks += usize::from(got.engine.fallback);
            }
            Ok(got) => {
                first_bad.get_or_insert(format!("{e}: {:?} vs {:?}", got.value, want));
            }
            Err(err) => {
                first_bad.get_or_insert(format!("{e}: {err}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut detail =
        format!("{agree}/{PAIRS} pairs exact, {fallbacks} with fallback, {secs:.1}s (limit {BUDGET_SECS}s)");
    if let Some(bad) = first_bad {
        detail += &format!("; first mismatch {bad}");
    }
    outcome(agree == PAIRS && secs < BUDGET_SECS, detail)
}

fn violations<T: std::fmt::Debug>(bad: &[T]) -> String {
    match bad.first() {
        None => "0 violations".into(),
        Some(b) => format!("{} violations, first {b:?}", bad.len()),
    }
}

fn shown(v: Option<u32>) -> String {
    v.map_or("over the round cap".into(), |v| v.to_string())
}

fn pattern_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    let mut bad = Vec::new();
    for s in 0..50 {
        let n = rng.gen_range(1..=8);
        let a = random_structure(n, 0.2, &mut rng);
        for k in 1..=3 {
            let ys = canonical_vars(k);
            for body in [Formula::tt(), local_body(&mut rng, &ys, 2)] {
                let r = local_radius(&body, &ys).unwrap();
                let brute = pattern_counts(&a, &body, &ys, r);
                let mut builder = ClBuilder::default();
                let mut total = BigInt::from(0);
                for g in PatternGraph::all(k) {
                    let poly = builder.count_pattern(&ys, &g, &body, ClKind::Ground, r).unwrap();
                    let got = poly.eval(&|b| BigInt::from(DirectEngine.ground(&a, b).unwrap()));
                    checked += 1;
                    if got != BigInt::from(brute.get(&g).copied().unwrap_or(0)) {
                        bad.push(format!("structure {s}, {g}, {body}"));
                    }
                    total += got;
                }
                if body == Formula::tt() && total != BigInt::from(n.pow(k as u32)) {
                    bad.push(format!(
                        "structure {s}, k={k}: patterns sum to {total}, not {}",
                        n.pow(k as u32)
                    ));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} (structure, body, G) counts exact, {}", violations(&bad)),
    )
}

fn removal_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<String> = vec!["x".into(), "y".into()];
    let mut bad = Vec::new();
    let mut formulas = 0;
    while formulas < 500 {
        let n = rng.gen_range(2..=10);
        let a = random_structure(n, 0.15, &mut rng);
        let f = random_fo(&mut rng, &xs, 2, 2);
        let d = rng.gen_range(0..n) as Elem;
        let beta: Vec<Elem> = (0..2)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    d
                } else {
                    rng.gen_range(0..n) as Elem
                }
            })
            .collect();
        formulas += 1;
        if let Err(e) = formula_contract(&a, &f, &xs, &beta, d) {
            bad.push(e);
        }
    }
    let mut terms = 0;
    while terms < 200 {
        let n = rng.gen_range(2..=8);
        let a = random_structure(n, 0.15, &mut rng);
        let body = random_fo(&mut rng, &xs, 1, 2);
        let d = rng.gen_range(0..n) as Elem;
        terms += 1;
        if let Err(e) = term_contracts(&a, &body, &xs, d) {
            bad.push(e);
        }
    }
    outcome(
        bad.is_empty(),
        format!("{formulas} formula and {terms} term instances, {}", violations(&bad)),
    )
}

fn sentence_holds(f: &Formula, a: &Structure) -> bool {
    let i = Interpretation {
        structure: a,
        assignment: Vec::new(),
    };
    eval_formula(f, &i, &Registry::builtin()).unwrap()
}

fn reduction_soundness() -> Outcome {
    let preds = Registry::builtin();
    let pool: Vec<(Formula, Formula, Formula)> = sentence_pool()
        .into_iter()
        .map(|(_, text)| {
            let f = parse_formula(text, None, &preds).unwrap();
            (
                f.clone(),
                rewrite_tree_formula(&f).unwrap(),
                rewrite_string_formula(&f).unwrap(),
            )
        })
        .collect();
    let mut graphs = Vec::new();
    for n in 1..=4 {
        let ps = pairs(n);
        for mask in 0u32..1 << ps.len() {
            let edges: Vec<_> = ps
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, p)| *p)
                .collect();
            graphs.push(undirected_graph(n, &edges));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let n = rng.gen_range(1..=8);
        let p = rng.gen_range(0.1..0.6);
        let edges: Vec<_> = pairs(n).into_iter().filter(|_| rng.gen_bool(p)).collect();
        graphs.push(undirected_graph(n, &edges));
    }
    let mut bad = 0;
    for g in &graphs {
        let t = encode_tree(g).unwrap().tree;
        let s = encode_string(g).unwrap();
        for (f, ft, fs) in &pool {
            let want = sentence_holds(f, g);
            bad += usize::from(sentence_holds(ft, &t) != want) + usize::from(sentence_holds(fs, &s) != want);
        }
    }
    let k2 = encode_tree(&undirected_graph(2, &[(0, 1)])).unwrap();
    let k2_ok = k2.tree.len() == 20 && k2.height() == 3;
    outcome(
        bad == 0 && k2_ok,
        format!(
            "{} graphs x {} sentences x 2 encodings, {bad} mismatches; K_2 tree has {} vertices, height {}",
            graphs.len(),
            pool.len(),
            k2.tree.len(),
            k2.height()
        ),
    )
}

fn cover_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [100, 1_000, 10_000] {
        let side = (n as f64).sqrt() as usize;
        let structures = [
            ("tree", generators::random_tree(n, &mut rng)),
            ("grid", generators::grid(side, side)),
        ];
        for (kind, a) in &structures {
            for r in 1..=2 {
                let cover = build_cover(a, r);
                let rep = validate_cover(a, &cover);
                ok &= rep.ok && rep.total_size <= a.len() * rep.max_degree;
                if a.len() >= 10_000 {
                    lines.push(format!(
                        "{kind} n={} r={r}: {} clusters, degree {}, histogram {:?}",
                        a.len(),
                        rep.clusters,
                        rep.max_degree,
                        rep.degree_histogram
                    ));
                }
            }
        }
    }
    outcome(ok, format!("12 covers valid; {}", lines.join("; ")))
}

fn splitter_game() -> Outcome {
    let value = |g: &GaifmanGraph, r| solve_splitter(g, r, 8, 31).unwrap().value;
    let single = value(&GaifmanGraph::from_edges(1, []), 1);
    let k2 = value(&GaifmanGraph::from_edges(2, [(0, 1)]), 1);
    let p3 = value(&GaifmanGraph::from_edges(3, [(0, 1), (0, 2)]), 1);
    let hand = single == Some(1) && k2 == Some(2) && p3 == Some(2);
    let (checked, bad) = game_properties(6, 2);
    outcome(
        hand && bad.is_empty(),
        format!(
            "single vertex {}, K_2 {}, K_1,2 {}; {checked} graphs (n <= 6, r <= 2), {}",
            shown(single),
            shown(k2),
            shown(p3),
            violations(&bad)
        ),
    )
}

fn locality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = Vec::new();
    let mut anchors = 0;
    for i in 0..100 {
        let n = rng.gen_range(4..=24);
        let base = match i % 3 {
            0 => generators::random_tree(n, &mut rng),
            1 => generators::grid(rng.gen_range(2..=5), rng.gen_range(2..=5)),
            _ => generators::random_max_degree(n, 3, 2 * n, &mut rng),
        };
        let a = generators::with_unary(&base, "P", 0.4, &mut rng).unwrap();
        let k = rng.gen_range(1..=3);
        let ys = canonical_vars(k);
        let connected: Vec<PatternGraph> = PatternGraph::all(k).into_iter().filter(|g| g.is_connected()).collect();
        let g = connected[rng.gen_range(0..connected.len())];
        let body = local_body(&mut rng, &ys, 2);
        let r = local_radius(&body, &ys).unwrap();
        let t = BasicClTerm::new(ClKind::Unary, &ys, g, r, &body);
        for x in a.elements() {
            anchors += 1;
            let local = eval_in_neighbourhood(&a, &t, x).unwrap();
            let whole = anchored_count(&a, &body, &ys, &g, r, x);
            if local != whole {
                bad.push(format!("instance {i}, {g}, r={r}, {body} at {x}: {local} vs {whole}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("100 instances, {anchors} anchors, {}", violations(&bad)),
    )
}

fn scaling() -> Outcome {
    const LOCAL_MAX: f64 = 1.3;
    const NAIVE_MIN: f64 = 1.8;
    let body = parse_formula("(E(y1, y2) | E(y2, y1))", None, &Registry::builtin()).unwrap();
    let t = BasicClTerm::new(ClKind::Ground, &canonical_vars(2), PatternGraph::complete(2), 1, &body);
    let cfg = EvalConfig::default();
    let sizes = [1_000, 10_000, 100_000];
    let mut pass = true;
    let mut parts = Vec::new();
    let families: [(&str, fn(usize) -> Structure); 2] = [("star", generators::star), ("path", generators::path)];
    for (name, make) in families {
        let rep = benchmark(name, &make, &sizes, &t, &cfg, 10_000, 3).unwrap();
        let local = rep.local_slope.unwrap_or(f64::NAN);
        let naive = rep.naive_slope.unwrap_or(f64::NAN);
        let agree = rep.rows.iter().all(|r| r.agree != Some(false));
        pass &= local <= LOCAL_MAX && naive >= NAIVE_MIN && agree;
        parts.push(format!(
            "{name}: local slope {local:.2} (<= {LOCAL_MAX}), naive slope {naive:.2} (>= {NAIVE_MIN})"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, bool); 8] = [
        ("oracle equivalence", oracle_equivalence, true),
        ("pattern-count identity", pattern_identity, true),
        ("removal contracts", removal_contracts, true),
        ("reduction soundness", reduction_soundness, true),
        ("cover validity", cover_validity, true),
        ("splitter game", splitter_game, true),
        ("locality of basic cl-terms", locality, true),
        ("scaling (soft)", scaling, false),
    ];
    let mut failed = 0;
    for (i, (name, run, gated)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let status = match (out.pass, gated) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (reported only)",
        };
        println!(
            "criterion {}: {name}: {status} [{:.1}s] {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            out.detail
        );
        failed += usize::from(!out.pass && *gated);
    }
    if failed > 0 {
        println!("{failed} gated criteria failed");
        std::process::exit(1);
    }
}
