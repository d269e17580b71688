//! Encodings of graphs as trees and strings, with the matching rewriting
//! of first-order sentences into sentences with counting.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logic::{Formula, Term, Var};
use crate::structures::{Elem, Structure};

/// Undirected graph on `v1..vn` as a symmetric relation `E`.
pub fn undirected_graph(n: usize, edges: &[(usize, usize)]) -> Structure {
    let name = |i: usize| format!("v{}", i + 1);
    let mut b = Structure::builder().elements((0..n).map(name)).relation("E", 2);
    for &(x, y) in edges {
        if x != y {
            b.add_tuple("E", &[name(x), name(y)]);
            b.add_tuple("E", &[name(y), name(x)]);
        }
    }
    b.build().expect("graph is well formed")
}

/// Sorted neighbour lists of a graph given by a symmetric, irreflexive
/// binary relation `E`. Vertex `i` is the `i`-th element (0-based).
pub fn neighbour_lists(g: &Structure) -> Result<Vec<Vec<usize>>> {
    if g.is_empty() {
        return Err(Error::Input("the graph needs at least one vertex".into()));
    }
    let e = g
        .relation("E")
        .filter(|r| r.arity() == 2)
        .ok_or_else(|| Error::Input("the graph needs a binary relation E".into()))?;
    if g.signature().len() != 1 {
        return Err(Error::Input("the graph must have E as its only relation".into()));
    }
    let mut adj = vec![BTreeSet::new(); g.len()];
    for t in e.tuples() {
        if t[0] == t[1] {
            return Err(Error::Input(format!("E has a loop at {}", g.name(t[0]))));
        }
        if !e.contains(&[t[1], t[0]]) {
            return Err(Error::Input(format!(
                "E is not symmetric: ({}, {}) lacks its reverse",
                g.name(t[0]),
                g.name(t[1])
            )));
        }
        adj[t[0] as usize].insert(t[1] as usize);
    }
    Ok(adj.into_iter().map(|s| s.into_iter().collect()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Root,
    A,
    B,
    C,
    D,
    E,
}

impl Role {
    pub const ALL: [Role; 6] = [Role::Root, Role::A, Role::B, Role::C, Role::D, Role::E];
}

#[derive(Clone, Debug)]
pub struct TreeEncoding {
    pub tree: Structure,
    /// Role of each tree vertex, in element order.
    pub roles: Vec<Role>,
}

impl TreeEncoding {
    /// Largest distance from the root.
    pub fn height(&self) -> u32 {
        let root = self.roles.iter().position(|r| *r == Role::Root).unwrap_or(0) as Elem;
        self.tree
            .gaifman_graph()
            .bfs_bounded(&[root], None, |_| true)
            .into_iter()
            .map(|(_, d)| d)
            .max()
            .unwrap_or(0)
    }

    pub fn role_map(&self) -> BTreeMap<String, Role> {
        self.roles
            .iter()
            .enumerate()
            .map(|(i, r)| (self.tree.name(i as Elem).to_string(), *r))
            .collect()
    }
}

/// The tree `T_G`: a root joined to one vertex `a(i)` per graph vertex;
/// `a(i)` carries `i+1` pendant paths `b_j(i) c_j(i)` and, per neighbour
/// `j`, a vertex `d(i,j)` with `j+1` leaves `e_k(i,j)`.
pub fn encode_tree(g: &Structure) -> Result<TreeEncoding> {
    let adj = neighbour_lists(g)?;
    let mut names: Vec<String> = vec!["r".into()];
    let mut roles = vec![Role::Root];
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut add = |name: String, role: Role, parent: Option<&str>, names: &mut Vec<String>, roles: &mut Vec<Role>| {
        if let Some(p) = parent {
            edges.push((p.to_string(), name.clone()));
        }
        names.push(name);
        roles.push(role);
    };
    for (i0, nbrs) in adj.iter().enumerate() {
        let i = i0 + 1;
        let a = format!("a{i}");
        add(a.clone(), Role::A, Some("r"), &mut names, &mut roles);
        for j in 1..=i + 1 {
            let b = format!("b{i}_{j}");
            add(b.clone(), Role::B, Some(&a), &mut names, &mut roles);
            add(format!("c{i}_{j}"), Role::C, Some(&b), &mut names, &mut roles);
        }
        for &j0 in nbrs {
            let j = j0 + 1;
            let d = format!("d{i}_{j}");
            add(d.clone(), Role::D, Some(&a), &mut names, &mut roles);
            for k in 1..=j + 1 {
                add(format!("e{i}_{j}_{k}"), Role::E, Some(&d), &mut names, &mut roles);
            }
        }
    }
    let mut b = Structure::builder().elements(names.iter().cloned()).relation("E", 2);
    for (x, y) in &edges {
        b.add_tuple("E", &[x, y]);
        b.add_tuple("E", &[y, x]);
    }
    let tree = b.build()?;
    let mut by_elem = vec![Role::Root; tree.len()];
    for (n, r) in names.iter().zip(roles) {
        by_elem[tree.elem(n)? as usize] = r;
    }
    Ok(TreeEncoding { tree, roles: by_elem })
}

/// The word `s_1 s_2 .. s_n` with `s_i = a c^i b c^{j_1} .. b c^{j_m}` for
/// the neighbours `j_1 < .. < j_m` of `i`.
pub fn string_word(g: &Structure) -> Result<String> {
    let adj = neighbour_lists(g)?;
    let mut w = String::new();
    for (i0, nbrs) in adj.iter().enumerate() {
        w.push('a');
        w.push_str(&"c".repeat(i0 + 1));
        for &j0 in nbrs {
            w.push('b');
            w.push_str(&"c".repeat(j0 + 1));
        }
    }
    Ok(w)
}

/// A word as a structure with zero-padded positions `p1..pn`, the reflexive linear
/// order `Le` and letter predicates `Pa`, `Pb`, `Pc`, ...
pub fn word_structure(word: &str) -> Result<Structure> {
    if word.is_empty() {
        return Err(Error::Input("the empty word has no string structure".into()));
    }
    let letters: Vec<char> = word.chars().collect();
    let width = letters.len().to_string().len();
    let name = |i: usize| format!("p{:0width$}", i + 1);
    let mut b = Structure::builder()
        .elements((0..letters.len()).map(name))
        .relation("Le", 2);
    let alphabet: BTreeSet<char> = letters.iter().copied().collect();
    for c in &alphabet {
        if !c.is_ascii_alphabetic() {
            return Err(Error::Input(format!("letter `{c}` is not an ASCII letter")));
        }
        b = b.relation(format!("P{c}"), 1);
    }
    for (i, c) in letters.iter().enumerate() {
        b.add_tuple(&format!("P{c}"), &[name(i)]);
        for j in i..letters.len() {
            b.add_tuple("Le", &[name(i), name(j)]);
        }
    }
    b.build()
}

/// `S_G` over `{Le, Pa, Pb, Pc}`.
pub fn encode_string(g: &Structure) -> Result<Structure> {
    let s = word_structure(&string_word(g)?)?;
    let mut extra = Vec::new();
    for rel in ["Pa", "Pb", "Pc"] {
        if s.relation(rel).is_none() {
            extra.push((rel.to_string(), 1, Vec::new()));
        }
    }
    s.expand(extra)
}

/// Fresh variable names avoiding those of a given formula.
struct Namer {
    taken: BTreeSet<Var>,
    next: usize,
}

impl Namer {
    fn new(f: &Formula) -> Self {
        let mut taken = BTreeSet::new();
        collect_vars(f, &mut taken);
        Namer { taken, next: 0 }
    }

    fn fresh(&mut self) -> Var {
        loop {
            self.next += 1;
            let v = format!("w{}", self.next);
            if !self.taken.contains(&v) {
                self.taken.insert(v.clone());
                return v;
            }
        }
    }
}

fn collect_vars(f: &Formula, out: &mut BTreeSet<Var>) {
    match f {
        Formula::Bool(_) => {}
        Formula::Eq(x, y) | Formula::Dist(x, y, _) => {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        Formula::Atom(_, vs) => out.extend(vs.iter().cloned()),
        Formula::Not(a) => collect_vars(a, out),
        Formula::Or(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Formula::Exists(x, a) => {
            out.insert(x.clone());
            collect_vars(a, out);
        }
        Formula::Pred(_, ts) => {
            for t in ts {
                collect_term_vars(t, out);
            }
        }
    }
}

fn collect_term_vars(t: &Term, out: &mut BTreeSet<Var>) {
    match t {
        Term::Int(_) => {}
        Term::Count(vs, b) => {
            out.extend(vs.iter().cloned());
            collect_vars(b, out);
        }
        Term::Add(a, b) | Term::Mul(a, b) => {
            collect_term_vars(a, out);
            collect_term_vars(b, out);
        }
    }
}

fn e(x: &Var, y: &Var) -> Formula {
    Formula::atom("E", [x.clone(), y.clone()])
}

fn p_eq(a: Term, b: Term) -> Formula {
    Formula::pred("eq", vec![a, b])
}

/// Role formulas on `T_G`, one free variable each.
struct TreeRoles<'n> {
    namer: &'n mut Namer,
}

impl TreeRoles<'_> {
    fn degree_is(&mut self, x: &Var, k: i64) -> Formula {
        let y = self.namer.fresh();
        p_eq(Term::count([y.clone()], e(x, &y)), Term::int(k))
    }

    /// Some neighbour satisfies `inner`.
    fn neighbour(&mut self, x: &Var, inner: impl FnOnce(&mut Self, &Var) -> Formula) -> Formula {
        let y = self.namer.fresh();
        let body = inner(self, &y);
        Formula::exists(y.clone(), Formula::and(e(x, &y), body))
    }

    fn c(&mut self, x: &Var) -> Formula {
        let leaf = self.degree_is(x, 1);
        let via = self.neighbour(x, |s, y| s.degree_is(y, 2));
        Formula::and(leaf, via)
    }

    fn b(&mut self, x: &Var) -> Formula {
        self.neighbour(x, |s, y| s.c(y))
    }

    fn a(&mut self, x: &Var) -> Formula {
        let not_c = Formula::not(self.c(x));
        Formula::and(not_c, self.neighbour(x, |s, y| s.b(y)))
    }

    fn e(&mut self, x: &Var) -> Formula {
        // leaves other than c-vertices, and other than the root when n = 1
        let leaf = self.degree_is(x, 1);
        let not_c = Formula::not(self.c(x));
        let not_root = Formula::not(self.neighbour(x, |s, y| s.a(y)));
        Formula::and_all([leaf, not_c, not_root])
    }

    fn d(&mut self, x: &Var) -> Formula {
        self.neighbour(x, |s, y| s.e(y))
    }

    fn root(&mut self, x: &Var) -> Formula {
        let not_b = Formula::not(self.b(x));
        let has_a = self.neighbour(x, |s, y| s.a(y));
        let y = self.namer.fresh();
        let all_a = Formula::forall(y.clone(), Formula::or(Formula::not(self.a(&y)), e(x, &y)));
        Formula::and_all([not_b, has_a, all_a])
    }

    fn role(&mut self, role: Role, x: &Var) -> Formula {
        match role {
            Role::Root => self.root(x),
            Role::A => self.a(x),
            Role::B => self.b(x),
            Role::C => self.c(x),
            Role::D => self.d(x),
            Role::E => self.e(x),
        }
    }

    /// `x` has a d-neighbour whose number of e-neighbours equals the
    /// number of b-neighbours of `x2`.
    fn edge(&mut self, x: &Var, x2: &Var) -> Formula {
        let y = self.namer.fresh();
        let z1 = self.namer.fresh();
        let z2 = self.namer.fresh();
        let es = Term::count([z1.clone()], Formula::and(e(&y, &z1), self.e(&z1)));
        let bs = Term::count([z2.clone()], Formula::and(e(x2, &z2), self.b(&z2)));
        Formula::exists(y.clone(), Formula::and(e(x, &y), p_eq(es, bs)))
    }
}

/// The role formula `psi_role(x)` for tree encodings.
pub fn tree_role_formula(role: Role, x: &str) -> Formula {
    let mut namer = Namer::new(&Formula::eq(x, x));
    TreeRoles { namer: &mut namer }.role(role, &x.to_string())
}

fn check_graph_sentence(f: &Formula) -> Result<()> {
    match f {
        Formula::Bool(_) | Formula::Eq(..) => Ok(()),
        Formula::Atom(r, vs) if r == "E" && vs.len() == 2 => Ok(()),
        Formula::Not(a) | Formula::Exists(_, a) => check_graph_sentence(a),
        Formula::Or(a, b) => {
            check_graph_sentence(a)?;
            check_graph_sentence(b)
        }
        other => Err(Error::Input(format!(
            "`{other}`: graph sentences may only use E, equality and the Boolean connectives"
        ))),
    }
}

fn relativize(
    f: &Formula,
    dom: &mut dyn FnMut(&Var) -> Formula,
    edge: &mut dyn FnMut(&Var, &Var) -> Formula,
) -> Formula {
    match f {
        Formula::Atom(_, vs) => edge(&vs[0], &vs[1]),
        Formula::Not(a) => Formula::not(relativize(a, dom, edge)),
        Formula::Or(a, b) => {
            let a = relativize(a, dom, edge);
            Formula::or(a, relativize(b, dom, edge))
        }
        Formula::Exists(x, a) => {
            let guard = dom(x);
            Formula::exists(x.clone(), Formula::and(guard, relativize(a, dom, edge)))
        }
        other => other.clone(),
    }
}

/// `phi-hat`: edges become `psi_E` and quantifiers are relativized to
/// a-vertices. `G ⊨ phi` iff `T_G ⊨ phi-hat`.
pub fn rewrite_tree_formula(phi: &Formula) -> Result<Formula> {
    check_graph_sentence(phi)?;
    let mut namer = Namer::new(phi);
    let roles = std::cell::RefCell::new(TreeRoles { namer: &mut namer });
    Ok(relativize(phi, &mut |x| roles.borrow_mut().a(x), &mut |x, y| {
        roles.borrow_mut().edge(x, y)
    }))
}

struct StringDefs<'n> {
    namer: &'n mut Namer,
}

impl StringDefs<'_> {
    fn lt(x: &Var, y: &Var) -> Formula {
        Formula::and(
            Formula::atom("Le", [x.clone(), y.clone()]),
            Formula::not(Formula::eq(x.clone(), y.clone())),
        )
    }

    /// Length of the run of `c`s directly after `y`.
    fn run(&mut self, y: &Var) -> Term {
        let z = self.namer.fresh();
        let w = self.namer.fresh();
        let gap = Formula::and_all([
            Formula::not(Formula::atom("Pc", [w.clone()])),
            Self::lt(y, &w),
            Formula::atom("Le", [w.clone(), z.clone()]),
        ]);
        Term::count(
            [z.clone()],
            Formula::and(Self::lt(y, &z), Formula::not(Formula::exists(w, gap))),
        )
    }

    /// Some `b` in the block of `x` is followed by as many `c`s as `x2`.
    fn edge(&mut self, x: &Var, x2: &Var) -> Formula {
        let y = self.namer.fresh();
        let w = self.namer.fresh();
        let other_a = Formula::and_all([
            Formula::atom("Pa", [w.clone()]),
            Self::lt(x, &w),
            Formula::atom("Le", [w.clone(), y.clone()]),
        ]);
        let (ry, rx) = (self.run(&y), self.run(x2));
        let body = Formula::and_all([
            Formula::atom("Pb", [y.clone()]),
            Self::lt(x, &y),
            Formula::not(Formula::exists(w, other_a)),
            p_eq(ry, rx),
        ]);
        Formula::exists(y, body)
    }
}

/// The string version of `phi-hat`: vertices are `a`-positions and edges
/// compare `c`-run lengths. `G ⊨ phi` iff `S_G ⊨` the result.
pub fn rewrite_string_formula(phi: &Formula) -> Result<Formula> {
    check_graph_sentence(phi)?;
    let mut namer = Namer::new(phi);
    let defs = std::cell::RefCell::new(StringDefs { namer: &mut namer });
    Ok(relativize(
        phi,
        &mut |x| Formula::atom("Pa", [x.clone()]),
        &mut |x, y| defs.borrow_mut().edge(x, y),
    ))
}

/// Edge existence, triangle, isolated vertex, dominating vertex, 2-path.
pub fn sentence_pool() -> Vec<(&'static str, &'static str)> {
    vec![
        ("edge", "exists x. exists y. E(x, y)"),
        (
            "triangle",
            "exists x. exists y. exists z. (E(x, y) & (E(y, z) & E(z, x)))",
        ),
        ("isolated", "exists x. forall y. !E(x, y)"),
        ("dominating", "exists x. forall y. (x = y | E(x, y))"),
        (
            "two_path",
            "exists x. exists y. exists z. (!x = z & (E(x, y) & E(y, z)))",
        ),
    ]
}

/// Distances from the root are at most `height` (BFS helper for tests).
pub fn bfs_depths(s: &Structure, root: Elem) -> Vec<u32> {
    let mut depth = vec![u32::MAX; s.len()];
    depth[root as usize] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &w in s.gaifman_graph().neighbors(v) {
            if depth[w as usize] == u32::MAX {
                depth[w as usize] = depth[v as usize] + 1;
                q.push_back(w);
            }
        }
    }
    depth
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_formula, Interpretation};
    use crate::logic::{parse_formula, Registry};

    fn k2() -> Structure {
        undirected_graph(2, &[(0, 1)])
    }

    fn holds(f: &Formula, a: &Structure) -> bool {
        eval_formula(
            f,
            &Interpretation {
                structure: a,
                assignment: Vec::new(),
            },
            &Registry::builtin(),
        )
        .unwrap()
    }

    #[test]
    fn tree_sizes() {
        let t = encode_tree(&k2()).unwrap();
        assert_eq!(t.tree.len(), 20);
        assert_eq!(t.height(), 3);
        assert!(t.tree.gaifman_graph().is_forest() && t.tree.gaifman_graph().is_connected());
        let one = encode_tree(&undirected_graph(1, &[])).unwrap();
        assert_eq!(one.tree.len(), 6);
        assert_eq!(t.role_map()["e1_2_3"], Role::E);
    }

    #[test]
    fn strings() {
        assert_eq!(string_word(&k2()).unwrap(), "acbccaccbc");
        assert_eq!(string_word(&undirected_graph(1, &[])).unwrap(), "ac");
        let s = encode_string(&k2()).unwrap();
        assert_eq!(s.len(), 10);
        let total: usize = ["Pa", "Pb", "Pc"].iter().map(|r| s.relation(r).unwrap().len()).sum();
        assert_eq!(total, 10);
        assert_eq!(s.relation("Le").unwrap().len(), 55);
    }

    #[test]
    fn roles_on_small_graphs() {
        for g in [k2(), undirected_graph(1, &[]), undirected_graph(3, &[(0, 2)])] {
            let t = encode_tree(&g).unwrap();
            for role in Role::ALL {
                let f = tree_role_formula(role, "x");
                for v in t.tree.elements() {
                    let got = eval_formula(
                        &f,
                        &Interpretation {
                            structure: &t.tree,
                            assignment: vec![("x".into(), v)],
                        },
                        &Registry::builtin(),
                    )
                    .unwrap();
                    assert_eq!(got, t.roles[v as usize] == role, "{role:?} at {}", t.tree.name(v));
                }
            }
        }
    }

    #[test]
    fn k2_examples() {
        let preds = Registry::builtin();
        let edge = parse_formula("exists x. exists y. E(x, y)", None, &preds).unwrap();
        let tri = parse_formula(sentence_pool()[1].1, None, &preds).unwrap();
        let g = k2();
        let t = encode_tree(&g).unwrap().tree;
        let s = encode_string(&g).unwrap();
        assert!(holds(&rewrite_tree_formula(&edge).unwrap(), &t));
        assert!(holds(&rewrite_string_formula(&edge).unwrap(), &s));
        assert!(!holds(&rewrite_tree_formula(&tri).unwrap(), &t));
        assert!(!holds(&rewrite_string_formula(&tri).unwrap(), &s));
    }

    #[test]
    fn rejects_bad_input() {
        let directed = crate::generators::graph(2, &[(0, 1)]);
        assert!(encode_tree(&directed).is_err());
        let f = parse_formula("exists x. P(x)", None, &Registry::builtin()).unwrap();
        assert!(rewrite_tree_formula(&f).is_err());
    }

    #[test]
    fn capture_is_avoided() {
        let preds = Registry::builtin();
        let f = parse_formula("exists w1. exists w2. E(w1, w2)", None, &preds).unwrap();
        let t = encode_tree(&k2()).unwrap().tree;
        assert!(holds(&rewrite_tree_formula(&f).unwrap(), &t));
        let s = encode_string(&k2()).unwrap();
        assert!(holds(&rewrite_string_formula(&f).unwrap(), &s));
    }
}
