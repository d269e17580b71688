//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use focq::covers::{remove, solve_splitter};
use focq::eval::{eval_formula, eval_term, Interpretation};
use focq::logic::analysis::max_dist_bound;
use focq::logic::{Formula, Registry, Var};
use focq::structures::GaifmanGraph;
use focq::transforms::{removal_formula, removal_ground_term, removal_unary_term, BasicTerm};
use focq::{Elem, PatternGraph, Structure};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn holds(a: &Structure, f: &Formula, vars: &[Var], tuple: &[Elem]) -> bool {
    let assignment = vars.iter().cloned().zip(tuple.iter().copied()).collect();
    eval_formula(
        f,
        &Interpretation {
            structure: a,
            assignment,
        },
        &Registry::builtin(),
    )
    .unwrap()
}

pub fn tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<Elem>> {
    (0..n.pow(k as u32)).map(move |mut i| {
        let mut t = vec![0 as Elem; k];
        for slot in t.iter_mut().rev() {
            *slot = (i % n) as Elem;
            i /= n;
        }
        t
    })
}

/// Number of satisfying `k`-tuples per distance pattern at threshold `2r+1`.
pub fn pattern_counts(a: &Structure, body: &Formula, vars: &[Var], r: u32) -> HashMap<PatternGraph, i128> {
    let mut out = HashMap::new();
    for t in tuples(a.len(), vars.len()) {
        if holds(a, body, vars, &t) {
            *out.entry(a.pattern_graph(&t, 2 * r + 1).unwrap()).or_insert(0) += 1;
        }
    }
    out
}

/// Satisfying tuples `(anchor, y2..yk)` with pattern exactly `g`.
pub fn anchored_count(a: &Structure, body: &Formula, vars: &[Var], g: &PatternGraph, r: u32, anchor: Elem) -> i128 {
    let mut total = 0;
    for rest in tuples(a.len(), vars.len() - 1) {
        let mut t = vec![anchor];
        t.extend(rest);
        if a.pattern_graph(&t, 2 * r + 1).unwrap() == *g && holds(a, body, vars, &t) {
            total += 1;
        }
    }
    total
}

/// Random body over `vars` that is syntactically local: atoms among the
/// variables and guarded quantifiers `∃z (E(v, z) & ..)`.
pub fn local_body(rng: &mut impl Rng, vars: &[Var], size: usize) -> Formula {
    let v = |rng: &mut _| vars.choose(rng).unwrap().clone();
    if size == 0 {
        return match rng.gen_range(0..5) {
            0 | 1 => Formula::atom("E", [v(rng), v(rng)]),
            2 => Formula::atom("P", [v(rng)]),
            3 => Formula::eq(v(rng), v(rng)),
            _ => Formula::dist(v(rng), v(rng), rng.gen_range(1..=3)),
        };
    }
    match rng.gen_range(0..5) {
        0 => Formula::not(local_body(rng, vars, size - 1)),
        1 => Formula::or(local_body(rng, vars, size - 1), local_body(rng, vars, size - 1)),
        2 => Formula::and(local_body(rng, vars, size - 1), local_body(rng, vars, size - 1)),
        3 => {
            let z = format!("z{size}");
            let anchor = v(rng);
            let mut inner = vars.to_vec();
            inner.push(z.clone());
            Formula::exists(
                z.clone(),
                Formula::and(Formula::atom("E", [anchor, z]), local_body(rng, &inner, size - 1)),
            )
        }
        _ => local_body(rng, vars, 0),
    }
}

/// Checks `A ⊨ φ[β]` iff `A⟅d ⊨ φ̃_V[β']` for one assignment.
pub fn formula_contract(a: &Structure, f: &Formula, vars: &[Var], beta: &[Elem], d: Elem) -> Result<(), String> {
    let radius = max_dist_bound(f).max(1);
    let rem = remove(a, d, radius).map_err(|e| e.to_string())?;
    let v: BTreeSet<Var> = vars
        .iter()
        .zip(beta)
        .filter(|(_, e)| **e == d)
        .map(|(x, _)| x.clone())
        .collect();
    let g = removal_formula(f, &v, &rem.names).map_err(|e| e.to_string())?;
    let lhs = holds(a, f, vars, beta);
    let assignment = vars
        .iter()
        .zip(beta)
        .filter_map(|(x, e)| rem.to_new(*e).map(|e| (x.clone(), e)))
        .collect();
    let rhs = eval_formula(
        &g,
        &Interpretation {
            structure: &rem.structure,
            assignment,
        },
        &Registry::builtin(),
    )
    .map_err(|e| e.to_string())?;
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("{f} with V={v:?}, d={d}: {lhs} vs {rhs} for {g}"))
    }
}

fn term_value(a: &Structure, t: &BasicTerm, free: Option<(Var, Elem)>) -> BigInt {
    let assignment = free.into_iter().collect();
    eval_term(
        &t.as_term(),
        &Interpretation {
            structure: a,
            assignment,
        },
        &Registry::builtin(),
    )
    .unwrap()
}

/// Both term contracts: `g^A = Σ ĝ_i` for the ground term `#(ys).φ`, and
/// the two-branch identity for the unary term `#(ys[1..]).φ` with free
/// `ys[0]`.
pub fn term_contracts(a: &Structure, body: &Formula, ys: &[Var], d: Elem) -> Result<(), String> {
    let radius = max_dist_bound(body).max(1);
    let rem = remove(a, d, radius).map_err(|e| e.to_string())?;
    let b = &rem.structure;

    let g = BasicTerm::ground(ys.to_vec(), body.clone());
    let parts = removal_ground_term(&g, &rem.names).map_err(|e| e.to_string())?;
    let lhs = term_value(a, &g, None);
    let rhs: BigInt = parts.iter().map(|p| term_value(b, p, None)).sum();
    if lhs != rhs {
        return Err(format!("ground {g}: {lhs} vs {rhs}"));
    }

    let u = BasicTerm::unary(ys[0].clone(), ys[1..].to_vec(), body.clone());
    let (grounds, unaries) = removal_unary_term(&u, &rem.names).map_err(|e| e.to_string())?;
    for x in a.elements() {
        let lhs = term_value(a, &u, Some((ys[0].clone(), x)));
        let rhs: BigInt = match rem.to_new(x) {
            None => grounds.iter().map(|p| term_value(b, p, None)).sum(),
            Some(x2) => unaries
                .iter()
                .map(|p| term_value(b, p, Some((ys[0].clone(), x2))))
                .sum(),
        };
        if lhs != rhs {
            return Err(format!("unary {u} at {x} (d={d}): {lhs} vs {rhs}"));
        }
    }
    Ok(())
}

/// Exact splitter-game values at radius `r` for every graph on `n`
/// vertices, indexed by edge mask over the pairs in lexicographic order.
pub fn all_game_values(n: usize, r: u32) -> Vec<u32> {
    let pairs = pairs(n);
    (0u32..1 << pairs.len())
        .map(|mask| {
            let g = graph_from_mask(n, &pairs, mask);
            solve_splitter(&g, r, n as u32 + 1, 31).unwrap().value.unwrap()
        })
        .collect()
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub fn graph_from_mask(n: usize, pairs: &[(usize, usize)], mask: u32) -> GaifmanGraph {
    GaifmanGraph::from_edges(
        n,
        pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &(a, b))| (a as Elem, b as Elem)),
    )
}

/// Edge mask of the graph on `n-1` vertices left after deleting `v`.
pub fn delete_vertex(n: usize, mask: u32, v: usize) -> u32 {
    let big = pairs(n);
    let small = pairs(n - 1);
    let shift = |x: usize| if x > v { x - 1 } else { x };
    let mut out = 0;
    for (i, &(a, b)) in big.iter().enumerate() {
        if mask >> i & 1 == 1 && a != v && b != v {
            let j = small.iter().position(|&p| p == (shift(a), shift(b))).unwrap();
            out |= 1 << j;
        }
    }
    out
}

/// Violations of monotonicity in `r` and closure under edge and vertex
/// deletion, over all graphs with at most `max_n` vertices and radii
/// `1..=max_r`. Returns the number of graphs checked and the violations.
pub fn game_properties(max_n: usize, max_r: u32) -> (usize, Vec<String>) {
    let mut bad = Vec::new();
    let mut checked = 0;
    let mut prev: Vec<Vec<u32>> = Vec::new();
    for n in 1..=max_n {
        let values: Vec<Vec<u32>> = (1..=max_r).map(|r| all_game_values(n, r)).collect();
        let m = pairs(n).len();
        for mask in 0u32..1 << m {
            checked += 1;
            for ri in 0..values.len() {
                let v = values[ri][mask as usize];
                if ri + 1 < values.len() && v > values[ri + 1][mask as usize] {
                    bad.push(format!("n={n} mask={mask:b}: not monotone at r={}", ri + 1));
                }
                for e in 0..m {
                    if mask >> e & 1 == 1 && values[ri][(mask & !(1 << e)) as usize] > v {
                        bad.push(format!(
                            "n={n} mask={mask:b} r={}: edge {e} deletion raises the value",
                            ri + 1
                        ));
                    }
                }
                if n > 1 {
                    for x in 0..n {
                        if prev[ri][delete_vertex(n, mask, x) as usize] > v {
                            bad.push(format!(
                                "n={n} mask={mask:b} r={}: deleting {x} raises the value",
                                ri + 1
                            ));
                        }
                    }
                }
            }
        }
        prev = values;
    }
    (checked, bad)
}
