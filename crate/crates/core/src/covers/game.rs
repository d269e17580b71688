//! The `(l, r)`-splitter game: exact solving on small graphs and move
//! heuristics on large ones.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::structures::{Elem, GaifmanGraph};

/// Largest graph solved exactly by default.
pub const DEFAULT_EXACT_CAP: usize = 16;

/// How a Splitter move was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Exact,
    ForestRoot,
    MaxDegree,
}

/// One row of a Splitter strategy: in the position given by `position`,
/// Connector plays `connector` and Splitter answers `splitter`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrategyEntry {
    pub position: Vec<Elem>,
    pub connector: Elem,
    pub splitter: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GameValue {
    pub radius: u32,
    pub max_rounds: u32,
    /// Least number of rounds Splitter needs, or `None` if Connector
    /// survives `max_rounds` rounds.
    pub value: Option<u32>,
    pub strategy: Vec<StrategyEntry>,
}

struct Solver {
    adj: Vec<u32>,
    r: u32,
    memo: HashMap<u32, u32>,
}

impl Solver {
    fn new(g: &GaifmanGraph, r: u32) -> Self {
        let adj = (0..g.num_vertices())
            .map(|v| g.neighbors(v as Elem).iter().fold(0u32, |m, &w| m | 1 << w))
            .collect();
        Solver {
            adj,
            r,
            memo: HashMap::new(),
        }
    }

    fn ball(&self, pos: u32, a: usize) -> u32 {
        let mut ball = 1u32 << a;
        let mut frontier = ball;
        for _ in 0..self.r {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adj[v];
            }
            next &= pos & !ball;
            if next == 0 {
                break;
            }
            ball |= next;
            frontier = next;
        }
        ball
    }

    /// Rounds Splitter needs if she answers `b` to `a` in `pos`.
    fn after(&mut self, pos: u32, a: usize, b: usize) -> u32 {
        let rest = self.ball(pos, a) & !(1 << b);
        if rest == 0 {
            1
        } else {
            1 + self.value(rest)
        }
    }

    fn best_answer(&mut self, pos: u32, a: usize) -> (usize, u32) {
        let ball = self.ball(pos, a);
        let mut best = (a, u32::MAX);
        let mut m = ball;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            let v = self.after(pos, a, b);
            if v < best.1 {
                best = (b, v);
            }
        }
        best
    }

    fn value(&mut self, pos: u32) -> u32 {
        if let Some(&v) = self.memo.get(&pos) {
            return v;
        }
        let mut worst = 0;
        let mut m = pos;
        while m != 0 {
            let a = m.trailing_zeros() as usize;
            m &= m - 1;
            worst = worst.max(self.best_answer(pos, a).1);
        }
        self.memo.insert(pos, worst);
        worst
    }
}

fn members(mask: u32) -> Vec<Elem> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// Exact game value with an optimal Splitter strategy covering every
/// position reachable when she follows it.
pub fn solve_splitter(g: &GaifmanGraph, r: u32, max_rounds: u32, cap: usize) -> Result<GameValue> {
    let n = g.num_vertices();
    if n > cap.min(31) {
        return Err(Error::Limit(format!(
            "exact splitter game solving is limited to {} vertices, graph has {n}",
            cap.min(31)
        )));
    }
    if n == 0 {
        return Err(Error::Input("splitter game on an empty graph".into()));
    }
    let mut s = Solver::new(g, r);
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let v = s.value(full);
    let mut strategy = Vec::new();
    if v <= max_rounds {
        let mut stack = vec![full];
        let mut seen = std::collections::HashSet::new();
        while let Some(pos) = stack.pop() {
            if !seen.insert(pos) {
                continue;
            }
            for a in members(pos) {
                let (b, _) = s.best_answer(pos, a as usize);
                strategy.push(StrategyEntry {
                    position: members(pos),
                    connector: a,
                    splitter: b as Elem,
                });
                let rest = s.ball(pos, a as usize) & !(1 << b);
                if rest != 0 {
                    stack.push(rest);
                }
            }
        }
    }
    Ok(GameValue {
        radius: r,
        max_rounds,
        value: (v <= max_rounds).then_some(v),
        strategy,
    })
}

/// Splitter's answer when Connector picks `a`: optimal for graphs with at
/// most `exact_cap` vertices, otherwise the vertex of `N_r(a)` closest to
/// the root (minimum vertex) of its component on forests, and the
/// maximum-degree vertex of `N_r(a)` elsewhere.
pub fn splitter_move(g: &GaifmanGraph, a: Elem, r: u32, exact_cap: usize) -> (Elem, MoveKind) {
    let n = g.num_vertices();
    if n <= exact_cap.min(31) {
        let mut s = Solver::new(g, r);
        let full = (1u32 << n) - 1;
        return (s.best_answer(full, a as usize).0 as Elem, MoveKind::Exact);
    }
    let ball = g.bfs_bounded(&[a], Some(r), |_| true);
    if g.is_forest() {
        let comp = g.bfs_bounded(&[a], None, |_| true);
        let root = comp.iter().map(|(v, _)| *v).min().unwrap_or(a);
        let depth: HashMap<Elem, u32> = g.bfs_bounded(&[root], None, |_| true).into_iter().collect();
        let best = ball.iter().map(|(v, _)| *v).min_by_key(|v| (depth[v], *v)).unwrap_or(a);
        return (best, MoveKind::ForestRoot);
    }
    let best = ball
        .iter()
        .map(|(v, _)| *v)
        .min_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v))
        .unwrap_or(a);
    (best, MoveKind::MaxDegree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(Elem, Elem)]) -> GaifmanGraph {
        GaifmanGraph::from_edges(n, edges.iter().copied())
    }

    #[test]
    fn small_values() {
        let v = |g: &GaifmanGraph, r| solve_splitter(g, r, 10, 16).unwrap().value;
        assert_eq!(v(&graph(1, &[]), 1), Some(1));
        assert_eq!(v(&graph(2, &[(0, 1)]), 1), Some(2));
        assert_eq!(v(&graph(3, &[(0, 1), (0, 2)]), 1), Some(2));
        assert_eq!(solve_splitter(&graph(2, &[(0, 1)]), 1, 1, 16).unwrap().value, None);
    }

    #[test]
    fn strategy_moves_stay_in_ball() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let gv = solve_splitter(&g, 1, 10, 16).unwrap();
        assert!(!gv.strategy.is_empty());
        for e in &gv.strategy {
            assert!(e.position.contains(&e.connector));
            assert!(e.position.contains(&e.splitter));
        }
    }

    #[test]
    fn heuristics() {
        let mut edges = Vec::new();
        for i in 1..40 {
            edges.push((0, i));
        }
        let star = graph(40, &edges);
        assert_eq!(splitter_move(&star, 7, 1, 16), (0, MoveKind::ForestRoot));
        let lonely = graph(20, &[]);
        assert_eq!(splitter_move(&lonely, 3, 2, 16).0, 3);
        let mut edges: Vec<(Elem, Elem)> = (0..20).map(|i| (i, (i + 1) % 20)).collect();
        edges.push((5, 12));
        let cyc = graph(20, &edges);
        assert_eq!(splitter_move(&cyc, 4, 1, 16), (5, MoveKind::MaxDegree));
        assert!(solve_splitter(&cyc, 1, 5, 16).is_err());
    }
}
