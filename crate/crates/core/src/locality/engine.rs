//! Evaluation of basic cl-terms by direct enumeration of pattern tuples.

use rayon::prelude::*;

use super::clterm::{BasicClTerm, ClKind};
use super::compiled::{Compiled, Evaluator};
use crate::error::{Error, Result};
use crate::structures::{BfsScratch, Elem, Structure};

/// Something that evaluates basic cl-terms.
pub trait ClEngine: Sync {
    /// Values of a unary basic term (its `y1` is the free variable) at every
    /// element, in element order.
    fn unary(&self, a: &Structure, t: &BasicClTerm) -> Result<Vec<i128>>;

    /// Value of a ground basic term.
    fn ground(&self, a: &Structure, t: &BasicClTerm) -> Result<i128> {
        let mut unary = t.clone();
        unary.kind = ClKind::Unary;
        Ok(self.unary(a, &unary)?.into_iter().sum())
    }
}

/// Enumerates pattern tuples around each anchor inside its ball.
#[derive(Clone, Copy, Debug, Default)]
pub struct DirectEngine;

impl ClEngine for DirectEngine {
    fn unary(&self, a: &Structure, t: &BasicClTerm) -> Result<Vec<i128>> {
        let targets: Vec<Elem> = a.elements().collect();
        direct_values(a, t, &targets)
    }
}

/// BFS order of the pattern from vertex 0, with the parent of each vertex.
fn spanning_order(t: &BasicClTerm) -> Result<Vec<(usize, Option<usize>)>> {
    let k = t.width();
    let mut order = vec![(0usize, None)];
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let v = order[i].0;
        for w in 0..k {
            if !seen[w] && t.pattern.has_edge(v, w) {
                seen[w] = true;
                order.push((w, Some(v)));
            }
        }
        i += 1;
    }
    if order.len() != k {
        return Err(Error::Input(format!(
            "pattern {} of a basic cl-term is not connected",
            t.pattern
        )));
    }
    Ok(order)
}

struct Walk<'a> {
    t: &'a BasicClTerm,
    a: &'a Structure,
    body: &'a Compiled<'a>,
    order: Vec<(usize, Option<usize>)>,
    // position in `order` of each pattern vertex
    rank: Vec<usize>,
    threshold: u32,
    env: Vec<Elem>,
    balls: Vec<Vec<Elem>>,
}

impl Walk<'_> {
    fn count(&mut self, depth: usize, ev: &mut Evaluator, scratch: &mut BfsScratch) -> i128 {
        let k = self.order.len();
        if depth == k {
            return i128::from(self.body.eval(ev, &self.env));
        }
        let (v, parent) = self.order[depth];
        let candidates: Vec<Elem> = match parent {
            None => vec![self.env[v]],
            Some(p) => self.balls[self.rank[p]].clone(),
        };
        let mut total = 0;
        'cand: for c in candidates {
            // exact pattern check against every earlier vertex
            for j in 0..depth {
                let w = self.order[j].0;
                let close = self.balls[j].binary_search(&c).is_ok();
                if close != self.t.pattern.has_edge(v, w) {
                    continue 'cand;
                }
            }
            self.env[v] = c;
            if depth + 1 < k {
                let mut ball: Vec<Elem> = scratch
                    .ball(self.a.gaifman_graph(), &[c], self.threshold)
                    .into_iter()
                    .map(|(e, _)| e)
                    .collect();
                ball.sort_unstable();
                self.balls[depth] = ball;
            }
            total += self.count(depth + 1, ev, scratch);
        }
        total
    }
}

/// Unary values of `t` at `targets`, computed by enumerating tuples
/// `(target, y2, .., yk)` along a spanning tree of the pattern.
pub fn direct_values(a: &Structure, t: &BasicClTerm, targets: &[Elem]) -> Result<Vec<i128>> {
    let vars = t.vars();
    let body = Compiled::new(&t.body, &vars, a)?;
    let order = spanning_order(t)?;
    let mut rank = vec![0; order.len()];
    for (i, (v, _)) in order.iter().enumerate() {
        rank[*v] = i;
    }
    let threshold = 2 * t.radius + 1;
    Ok(targets
        .par_chunks(256)
        .map(|chunk| {
            let mut ev = body.evaluator();
            let mut scratch = BfsScratch::new(a.len());
            let mut walk = Walk {
                t,
                a,
                body: &body,
                order: order.clone(),
                rank: rank.clone(),
                threshold,
                env: vec![0; vars.len()],
                balls: vec![Vec::new(); vars.len()],
            };
            chunk
                .iter()
                .map(|&x| {
                    walk.env[0] = x;
                    walk.count(0, &mut ev, &mut scratch)
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect())
}

/// Unary value at `anchor`, computed inside its `R`-neighbourhood with
/// `R = r + (k-1)(2r+1)`.
pub fn eval_in_neighbourhood(a: &Structure, t: &BasicClTerm, anchor: Elem) -> Result<i128> {
    let n = a.neighborhood(&[anchor], t.neighbourhood_radius())?;
    let local = n.elem(a.name(anchor))?;
    Ok(direct_values(&n, t, &[local])?[0])
}

/// Value of a basic term: per-anchor for unary terms, the sum for ground ones.
pub fn eval_basic_cl(a: &Structure, t: &BasicClTerm, anchor: Option<Elem>) -> Result<i128> {
    match (t.kind, anchor) {
        (ClKind::Unary, Some(x)) => Ok(direct_values(a, t, &[x])?[0]),
        (ClKind::Unary, None) => Err(Error::Input("a unary cl-term needs an anchor".into())),
        (ClKind::Ground, _) => DirectEngine.ground(a, t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_term, Interpretation};
    use crate::logic::{parse_formula, Registry, Var};
    use crate::structures::PatternGraph;
    use num_bigint::BigInt;

    fn star() -> Structure {
        let mut b = Structure::builder().elements(["c", "l1", "l2", "l3"]);
        for l in ["l1", "l2", "l3"] {
            b.add_tuple("E", &["c", l]);
            b.add_tuple("E", &[l, "c"]);
        }
        b.build().unwrap()
    }

    #[test]
    fn star_edge_pattern() {
        let a = star();
        let vars: Vec<Var> = vec!["y1".into(), "y2".into()];
        let t = BasicClTerm::new(
            ClKind::Unary,
            &vars,
            PatternGraph::complete(2),
            0,
            &crate::logic::Formula::tt(),
        );
        let c = a.elem("c").unwrap();
        // pairs (c, y) with dist <= 1: c itself and the three leaves
        assert_eq!(eval_basic_cl(&a, &t, Some(c)).unwrap(), 4);
        let total: i128 = a.elements().map(|x| eval_basic_cl(&a, &t, Some(x)).unwrap()).sum();
        let g = BasicClTerm {
            kind: ClKind::Ground,
            ..t
        };
        assert_eq!(eval_basic_cl(&a, &g, None).unwrap(), total);
    }

    #[test]
    fn matches_reference_on_paths() {
        let mut b = Structure::builder().elements((0..8).map(|i| format!("v{i}")));
        for i in 0..7 {
            b.add_tuple("E", &[format!("v{i}"), format!("v{}", i + 1)]);
        }
        b.add_tuple("P", &["v3"]);
        let a = b.build().unwrap();
        let preds = Registry::builtin();
        let body = parse_formula("(P(y2) | exists z. (E(y3, z) & !P(z)))", None, &preds).unwrap();
        let vars: Vec<Var> = vec!["y1".into(), "y2".into(), "y3".into()];
        for g in PatternGraph::all(3).into_iter().filter(|g| g.is_connected()) {
            let t = BasicClTerm::new(ClKind::Unary, &vars, g, 1, &body);
            for x in a.elements() {
                let i = Interpretation {
                    structure: &a,
                    assignment: vec![("y1".into(), x)],
                };
                let want = eval_term(&t.as_term(), &i, &preds).unwrap();
                assert_eq!(BigInt::from(eval_basic_cl(&a, &t, Some(x)).unwrap()), want);
                assert_eq!(
                    eval_in_neighbourhood(&a, &t, x).unwrap(),
                    eval_basic_cl(&a, &t, Some(x)).unwrap()
                );
            }
        }
    }
}
