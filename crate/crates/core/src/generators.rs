//! Seeded generators for sparse structures and random FO₁C expressions.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::logic::{Expr, Formula, Term, Var};
use crate::structures::{Elem, Structure};

fn name(i: usize) -> String {
    format!("v{i}")
}

/// Structure with elements `v0..v{n-1}` and the binary relation `E`
/// holding each listed pair.
pub fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut b = Structure::builder().elements((0..n).map(name)).relation("E", 2);
    for &(x, y) in edges {
        b.add_tuple("E", &[name(x), name(y)]);
    }
    b.build().expect("generated structures are well formed")
}

pub fn path(n: usize) -> Structure {
    graph(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>())
}

pub fn cycle(n: usize) -> Structure {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    if n >= 3 {
        edges.push((n - 1, 0));
    }
    graph(n, &edges)
}

/// `K_{1,n-1}` with centre `v0`.
pub fn star(n: usize) -> Structure {
    graph(n, &(1..n).map(|i| (0, i)).collect::<Vec<_>>())
}

/// `w × h` grid, element `v{y*w+x}` at `(x, y)`.
pub fn grid(w: usize, h: usize) -> Structure {
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            if x + 1 < w {
                edges.push((v, v + 1));
            }
            if y + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    graph(w * h, &edges)
}

/// Uniform random recursive tree: each vertex attaches to an earlier one.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Structure {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    graph(n, &edges)
}

/// Random graph of maximum degree `max_degree`: `attempts` random pairs,
/// each kept when both endpoints still have spare degree.
pub fn random_max_degree(n: usize, max_degree: usize, attempts: usize, rng: &mut impl Rng) -> Structure {
    let mut deg = vec![0usize; n];
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    if n >= 2 {
        for _ in 0..attempts {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            let key = (x.min(y), x.max(y));
            if x == y || deg[x] >= max_degree || deg[y] >= max_degree || !seen.insert(key) {
                continue;
            }
            deg[x] += 1;
            deg[y] += 1;
            edges.push((x, y));
        }
    }
    graph(n, &edges)
}

/// Random graph on `n` vertices with each pair an edge with probability `p`.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Structure {
    let mut edges = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            if rng.gen_bool(p) {
                edges.push((x, y));
            }
        }
    }
    graph(n, &edges)
}

/// Disjoint union of the given structures.
pub fn disjoint_union(parts: &[Structure]) -> Result<Structure> {
    let mut it = parts.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::Input("disjoint union of no structures".into()))?;
    it.try_fold(first.clone(), |acc, s| Structure::disjoint_union(&acc, s))
}

/// Adds a unary relation holding at each element with probability `p`.
pub fn with_unary(a: &Structure, rel: &str, p: f64, rng: &mut impl Rng) -> Result<Structure> {
    let tuples: Vec<Vec<Elem>> = a.elements().filter(|_| rng.gen_bool(p)).map(|e| vec![e]).collect();
    a.expand(vec![(rel.to_string(), 1, tuples)])
}

/// Builds a family member by name: `path`, `cycle`, `star`, `grid`
/// (closest square), `tree`, `deg3`.
pub fn family(kind: &str, n: usize, rng: &mut impl Rng) -> Result<Structure> {
    if n == 0 {
        return Err(Error::Input("structures need at least one element".into()));
    }
    Ok(match kind {
        "path" => path(n),
        "cycle" => cycle(n),
        "star" => star(n),
        "grid" => {
            let w = ((n as f64).sqrt().round() as usize).max(1);
            grid(w, n.div_ceil(w))
        }
        "tree" => random_tree(n, rng),
        "deg3" => random_max_degree(n, 3, 2 * n, rng),
        other => {
            return Err(Error::Input(format!(
                "unknown family `{other}` (expected path, cycle, star, grid, tree or deg3)"
            )))
        }
    })
}

/// Random FO₁C expressions over `E/2` and `P/1` with the builtin
/// predicates. Quantifiers inside counting terms are guarded by an `E`
/// atom or a distance atom, so every expression has a cl-decomposition.
#[derive(Clone, Debug)]
pub struct ExprGen {
    pub max_count_depth: usize,
    /// Largest number of variables of a counting term, free one included.
    pub max_width: usize,
    pub max_quantifier_depth: usize,
    pub unary: bool,
}

impl Default for ExprGen {
    fn default() -> Self {
        ExprGen {
            max_count_depth: 2,
            max_width: 3,
            max_quantifier_depth: 1,
            unary: true,
        }
    }
}

struct Fresh(usize);

impl Fresh {
    fn next(&mut self) -> Var {
        self.0 += 1;
        format!("x{}", self.0)
    }
}

impl ExprGen {
    pub fn expr(&self, rng: &mut impl Rng) -> Expr {
        if rng.gen_bool(0.3) {
            Expr::Term(self.ground_term(rng))
        } else {
            Expr::Formula(self.sentence(rng))
        }
    }

    pub fn sentence(&self, rng: &mut impl Rng) -> Formula {
        let mut fresh = Fresh(0);
        self.sentence_with(rng, &mut fresh, 1)
    }

    fn sentence_with(&self, rng: &mut impl Rng, fresh: &mut Fresh, combine: usize) -> Formula {
        match rng.gen_range(0..if combine > 0 { 5 } else { 4 }) {
            0 => {
                let x = fresh.next();
                let body = self.local(
                    rng,
                    std::slice::from_ref(&x),
                    self.max_quantifier_depth,
                    self.max_count_depth,
                    fresh,
                );
                Formula::exists(x, body)
            }
            1 => {
                let x = fresh.next();
                let body = self.local(
                    rng,
                    std::slice::from_ref(&x),
                    self.max_quantifier_depth,
                    self.max_count_depth,
                    fresh,
                );
                Formula::forall(x, body)
            }
            2 | 3 => {
                let t = self.count_term(rng, None, self.max_count_depth, fresh);
                self.apply(rng, t, None, self.max_count_depth, fresh)
            }
            _ => {
                let a = self.sentence_with(rng, fresh, combine - 1);
                let b = self.sentence_with(rng, fresh, combine - 1);
                match rng.gen_range(0..3) {
                    0 => Formula::and(a, b),
                    1 => Formula::or(a, b),
                    _ => Formula::not(Formula::and(a, b)),
                }
            }
        }
    }

    pub fn ground_term(&self, rng: &mut impl Rng) -> Term {
        let mut fresh = Fresh(0);
        let t = self.count_term(rng, None, self.max_count_depth, &mut fresh);
        match rng.gen_range(0..4) {
            0 => Term::add(t, Term::int(rng.gen_range(0..3))),
            1 => {
                let u = self.count_term(rng, None, 1, &mut fresh);
                Term::mul(t, u)
            }
            _ => t,
        }
    }

    /// A numerical predicate applied to `t` (free variable `free`, if any).
    fn apply(&self, rng: &mut impl Rng, t: Term, free: Option<&Var>, depth: usize, fresh: &mut Fresh) -> Formula {
        match rng.gen_range(0..5) {
            0 => Formula::pred("prime", vec![t]),
            1 => Formula::pred("geq1", vec![t]),
            2 => Formula::pred("leq", vec![t, Term::int(rng.gen_range(0..4))]),
            3 => Formula::pred("leq", vec![Term::int(rng.gen_range(1..3)), t]),
            _ => {
                let u = self.count_term(rng, free, depth, fresh);
                Formula::pred("eq", vec![t, u])
            }
        }
    }

    /// `#(ys). body` with `free` the only other variable of `body`.
    fn count_term(&self, rng: &mut impl Rng, free: Option<&Var>, depth: usize, fresh: &mut Fresh) -> Term {
        let room = self.max_width.saturating_sub(usize::from(free.is_some())).max(1);
        let k = rng.gen_range(1..=room.min(2));
        let ys: Vec<Var> = (0..k).map(|_| fresh.next()).collect();
        let mut scope: Vec<Var> = free.into_iter().cloned().collect();
        scope.extend(ys.iter().cloned());
        let mut parts = Vec::new();
        // tie most counted variables to the previous ones
        for (i, y) in ys.iter().enumerate() {
            let prev: Vec<&Var> = scope.iter().take_while(|v| *v != y).collect();
            if let Some(u) = prev.choose(rng) {
                if rng.gen_bool(0.8) || i > 0 {
                    parts.push(self.link(rng, u, y));
                }
            }
        }
        parts.push(self.local(rng, &scope, self.max_quantifier_depth, depth.saturating_sub(1), fresh));
        Term::count(ys, Formula::and_all(parts))
    }

    fn link(&self, rng: &mut impl Rng, u: &Var, y: &Var) -> Formula {
        match rng.gen_range(0..4) {
            0 => Formula::atom("E", [u.clone(), y.clone()]),
            1 => Formula::atom("E", [y.clone(), u.clone()]),
            2 => Formula::or(
                Formula::atom("E", [u.clone(), y.clone()]),
                Formula::atom("E", [y.clone(), u.clone()]),
            ),
            _ => Formula::dist(u.clone(), y.clone(), rng.gen_range(1..=2)),
        }
    }

    fn atom(&self, rng: &mut impl Rng, scope: &[Var]) -> Formula {
        let pick = |rng: &mut _| scope.choose(rng).expect("non-empty scope").clone();
        match rng.gen_range(0..6) {
            0 | 1 => Formula::atom("E", [pick(rng), pick(rng)]),
            2 if self.unary => Formula::atom("P", [pick(rng)]),
            3 => Formula::eq(pick(rng), pick(rng)),
            4 => Formula::dist(pick(rng), pick(rng), rng.gen_range(1..=3)),
            _ => Formula::atom("E", [pick(rng), pick(rng)]),
        }
    }

    /// A formula over `scope` whose quantifiers are guarded.
    fn local(&self, rng: &mut impl Rng, scope: &[Var], qdepth: usize, cdepth: usize, fresh: &mut Fresh) -> Formula {
        let choice = rng.gen_range(0..10);
        match choice {
            0..=3 => self.atom(rng, scope),
            4 => Formula::not(self.local(rng, scope, qdepth, cdepth, fresh)),
            5 => Formula::and(
                self.local(rng, scope, qdepth, cdepth, fresh),
                self.local(rng, scope, qdepth, cdepth, fresh),
            ),
            6 => Formula::or(
                self.local(rng, scope, qdepth, cdepth, fresh),
                self.local(rng, scope, qdepth, cdepth, fresh),
            ),
            7 if qdepth > 0 => {
                let u = scope.choose(rng).expect("non-empty scope").clone();
                let z = fresh.next();
                let guard = match rng.gen_range(0..3) {
                    0 => Formula::atom("E", [u.clone(), z.clone()]),
                    1 => Formula::atom("E", [z.clone(), u.clone()]),
                    _ => Formula::dist(u.clone(), z.clone(), 1),
                };
                let mut inner = scope.to_vec();
                inner.push(z.clone());
                let body = self.local(rng, &inner, qdepth - 1, cdepth, fresh);
                Formula::exists(z, Formula::and(guard, body))
            }
            8 | 9 if cdepth > 0 => {
                let x = scope.choose(rng).expect("non-empty scope").clone();
                let t = self.count_term(rng, Some(&x), cdepth, fresh);
                self.apply(rng, t, Some(&x), cdepth, fresh)
            }
            _ => self.atom(rng, scope),
        }
    }
}

/// One input of the oracle-equivalence corpus: a sparse structure with a
/// unary `P` (random tree, 10x10 grid, max-degree-3 graph or star, in
/// rotation by `i`, at most 60 elements) and a generated expression.
pub fn corpus_pair(i: usize, rng: &mut impl Rng) -> (String, Structure, Expr) {
    let n = rng.gen_range(8..=60);
    let (family, base) = match i % 4 {
        0 => ("tree", random_tree(n, rng)),
        1 => ("grid", grid(10, 10)),
        2 => ("deg3", random_max_degree(n, 3, 2 * n, rng)),
        _ => ("star", star(n)),
    };
    let a = with_unary(&base, "P", 0.4, rng).expect("fresh relation");
    let e = ExprGen::default().expr(rng);
    (family.to_string(), a, e)
}

/// Random first-order formula over `E/2`, `P/1`, equality and distance
/// atoms, with free variables among `scope` and quantifier rank at most
/// `rank`.
pub fn random_fo(rng: &mut impl Rng, scope: &[Var], rank: usize, max_dist: u32) -> Formula {
    let mut fresh = Fresh(scope.len() + 100);
    fo_rec(rng, scope, rank, max_dist.max(1), &mut fresh, 3)
}

fn fo_rec(rng: &mut impl Rng, scope: &[Var], rank: usize, max_dist: u32, fresh: &mut Fresh, size: usize) -> Formula {
    let atom = |rng: &mut dyn RngCore| -> Formula {
        let (Some(x), Some(y)) = (scope.choose(rng).cloned(), scope.choose(rng).cloned()) else {
            return Formula::Bool(rng.gen_bool(0.5));
        };
        match rng.gen_range(0..5) {
            0 | 1 => Formula::atom("E", [x, y]),
            2 => Formula::atom("P", [x]),
            3 => Formula::eq(x, y),
            _ => Formula::dist(x, y, rng.gen_range(1..=max_dist)),
        }
    };
    if size == 0 {
        return atom(rng);
    }
    match rng.gen_range(0..6) {
        0 | 1 => atom(rng),
        2 => Formula::not(fo_rec(rng, scope, rank, max_dist, fresh, size - 1)),
        3 => Formula::or(
            fo_rec(rng, scope, rank, max_dist, fresh, size - 1),
            fo_rec(rng, scope, rank, max_dist, fresh, size - 1),
        ),
        4 => Formula::and(
            fo_rec(rng, scope, rank, max_dist, fresh, size - 1),
            fo_rec(rng, scope, rank, max_dist, fresh, size - 1),
        ),
        _ if rank > 0 => {
            // reuse a name now and then to exercise shadowing
            let z = match scope.choose(rng) {
                Some(v) if rng.gen_bool(0.2) => v.clone(),
                _ => fresh.next(),
            };
            let mut inner = scope.to_vec();
            inner.push(z.clone());
            let body = fo_rec(rng, &inner, rank - 1, max_dist, fresh, size);
            if rng.gen_bool(0.5) {
                Formula::exists(z, body)
            } else {
                Formula::forall(z, body)
            }
        }
        _ => atom(rng),
    }
}

/// Random structure over `E/2` (each ordered pair with probability `p`)
/// and `P/1` (each element with probability 1/2).
pub fn random_structure(n: usize, p: f64, rng: &mut impl Rng) -> Structure {
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if rng.gen_bool(p) {
                edges.push((x, y));
            }
        }
    }
    let g = graph(n, &edges);
    with_unary(&g, "P", 0.5, rng).expect("fresh relation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::analysis::{count_depth_expr, validate_fo1c};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn families() {
        assert_eq!(path(5).gaifman_graph().num_edges(), 4);
        assert_eq!(cycle(5).gaifman_graph().num_edges(), 5);
        assert_eq!(star(6).gaifman_graph().degree(0), 5);
        assert_eq!(grid(3, 4).gaifman_graph().num_edges(), 2 * 4 + 3 * 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(random_tree(50, &mut rng).gaifman_graph().is_forest());
        let g = random_max_degree(100, 3, 300, &mut rng);
        assert!(g.elements().all(|v| g.gaifman_graph().degree(v) <= 3));
        let u = disjoint_union(&[path(3), star(4)]).unwrap();
        assert_eq!(u.len(), 7);
        assert!(family("blob", 3, &mut rng).is_err());
    }

    #[test]
    fn seeded_and_fo1c() {
        let g = ExprGen::default();
        let a: Vec<String> = (0..20)
            .map(|_| g.expr(&mut ChaCha8Rng::seed_from_u64(7)).to_string())
            .collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let e = g.expr(&mut rng);
            assert!(validate_fo1c(&e).ok, "{e}");
            assert!(count_depth_expr(&e) <= 2, "{e}");
            assert!(crate::logic::free_vars_expr(&e).is_empty(), "{e}");
        }
    }
}
