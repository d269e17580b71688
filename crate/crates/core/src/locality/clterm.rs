//! Basic cl-terms, cl-term polynomials, and the pattern-count recursion
//! that expresses a local count as a cl-term.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value as Json};

use super::split::fv_split;
use super::syntax::{local_radius, restrict_to_pattern};
use crate::error::{Error, Result};
use crate::logic::{rename_free, simplify, Formula, Term, Var};
use crate::structures::PatternGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClKind {
    Ground,
    Unary,
}

/// `#(y1..yk). (delta_{G,2r+1}(y) & psi(y))`, or the unary version in which
/// `y1` stays free and only `y2..yk` are counted. Variables are always
/// named `y1..yk`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicClTerm {
    pub kind: ClKind,
    pub radius: u32,
    pub pattern: PatternGraph,
    pub body: Formula,
}

pub fn canonical_vars(k: usize) -> Vec<Var> {
    (1..=k).map(|i| format!("y{i}")).collect()
}

impl BasicClTerm {
    /// Builds a basic term over `vars`, renaming them to `y1..yk`.
    pub fn new(kind: ClKind, vars: &[Var], pattern: PatternGraph, radius: u32, body: &Formula) -> Self {
        assert_eq!(vars.len(), pattern.k());
        let canon = canonical_vars(vars.len());
        let pairs: Vec<(Var, Var)> = vars
            .iter()
            .cloned()
            .zip(canon.iter().cloned())
            .filter(|(a, b)| a != b)
            .collect();
        // rename through temporaries so that swaps like (y2, y1) work
        let tmp: Vec<(Var, Var)> = pairs.iter().map(|(a, _)| (a.clone(), format!("{a}__tmp"))).collect();
        let back: Vec<(Var, Var)> = pairs.iter().map(|(a, b)| (format!("{a}__tmp"), b.clone())).collect();
        let body = rename_free(&rename_free(body, &tmp), &back);
        BasicClTerm {
            kind,
            radius,
            pattern,
            body,
        }
    }

    pub fn width(&self) -> usize {
        self.pattern.k()
    }

    pub fn vars(&self) -> Vec<Var> {
        canonical_vars(self.width())
    }

    /// Radius of the neighbourhood of `y1` that determines the value.
    pub fn neighbourhood_radius(&self) -> u32 {
        let r = self.radius;
        r + (self.width() as u32).saturating_sub(1) * (2 * r + 1)
    }

    /// `delta_{G,2r+1}(y) & psi(y)` as an FO⁺ formula.
    pub fn full_body(&self) -> Formula {
        Formula::and(
            super::delta_formula(&self.pattern, 2 * self.radius + 1, &self.vars()),
            self.body.clone(),
        )
    }

    /// The term as an ordinary counting term (free `y1` when unary).
    pub fn as_term(&self) -> Term {
        let vars = self.vars();
        let counted = match self.kind {
            ClKind::Ground => vars,
            ClKind::Unary => vars[1..].to_vec(),
        };
        if counted.is_empty() {
            // only reachable for width-1 unary terms: #(y1').(y1' = y1 & body)
            let pad = "y1_".to_string();
            let body = Formula::and(Formula::eq(pad.clone(), "y1"), self.full_body());
            return Term::count([pad], body);
        }
        Term::count(counted, self.full_body())
    }

    pub fn to_json(&self) -> Json {
        json!({
            "kind": match self.kind { ClKind::Ground => "ground", ClKind::Unary => "unary" },
            "width": self.width(),
            "radius": self.radius,
            "pattern": self.pattern,
            "body": self.body.to_string(),
        })
    }
}

impl fmt::Display for BasicClTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = self.vars();
        let counted = match self.kind {
            ClKind::Ground => &vars[..],
            ClKind::Unary => &vars[1..],
        };
        write!(
            f,
            "#({})[{} r={}]. {}",
            counted.join(", "),
            self.pattern,
            self.radius,
            self.body
        )
    }
}

/// Integer polynomial over basic cl-terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClPoly {
    terms: BTreeMap<Vec<Arc<BasicClTerm>>, BigInt>,
}

impl ClPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero();
        p.add_monomial(Vec::new(), c.into());
        p
    }

    pub fn basic(t: BasicClTerm) -> Self {
        let mut p = Self::zero();
        p.add_monomial(vec![Arc::new(t)], BigInt::one());
        p
    }

    fn add_monomial(&mut self, mut key: Vec<Arc<BasicClTerm>>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        key.sort();
        let e = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &ClPoly) -> ClPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_monomial(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &BigInt) -> ClPoly {
        let mut out = ClPoly::zero();
        for (k, c) in &self.terms {
            out.add_monomial(k.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, other: &ClPoly) -> ClPoly {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn mul(&self, other: &ClPoly) -> ClPoly {
        let mut out = ClPoly::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let mut k = k1.clone();
                k.extend(k2.iter().cloned());
                out.add_monomial(k, c1 * c2);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(coefficient, factors)` pairs.
    pub fn monomials(&self) -> impl Iterator<Item = (&BigInt, &[Arc<BasicClTerm>])> {
        self.terms.iter().map(|(k, c)| (c, k.as_slice()))
    }

    /// Distinct basic terms occurring in the polynomial.
    pub fn basics(&self) -> Vec<Arc<BasicClTerm>> {
        let mut out: Vec<Arc<BasicClTerm>> = self.terms.keys().flatten().cloned().collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn max_radius(&self) -> u32 {
        self.basics().iter().map(|b| b.radius).max().unwrap_or(0)
    }

    pub fn max_width(&self) -> usize {
        self.basics().iter().map(|b| b.width()).max().unwrap_or(0)
    }

    /// Evaluates with the given basic-term values.
    pub fn eval(&self, value: &dyn Fn(&BasicClTerm) -> BigInt) -> BigInt {
        let mut total = BigInt::zero();
        for (k, c) in &self.terms {
            let mut m = c.clone();
            for b in k {
                if m.is_zero() {
                    break;
                }
                m *= value(b);
            }
            total += m;
        }
        total
    }

    /// Evaluates with machine integers; `None` on overflow.
    pub fn eval_i128(&self, value: &dyn Fn(&BasicClTerm) -> i128) -> Option<i128> {
        let mut total: i128 = 0;
        for (k, c) in &self.terms {
            let mut m = i128::try_from(c).ok()?;
            for b in k {
                if m == 0 {
                    break;
                }
                m = m.checked_mul(value(b))?;
            }
            total = total.checked_add(m)?;
        }
        Some(total)
    }

    /// The polynomial as an ordinary term over the basic terms.
    pub fn to_term(&self) -> Term {
        let mut sum: Option<Term> = None;
        for (k, c) in &self.terms {
            let mut factors: Vec<Term> = k.iter().map(|b| b.as_term()).collect();
            if !c.is_one() || factors.is_empty() {
                factors.insert(0, Term::Int(c.clone()));
            }
            let m = factors.into_iter().reduce(Term::mul).expect("non-empty monomial");
            sum = Some(match sum {
                None => m,
                Some(s) => Term::add(s, m),
            });
        }
        sum.unwrap_or_else(|| Term::int(0))
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.terms
                .iter()
                .map(|(k, c)| {
                    json!({
                        "coefficient": c.to_string(),
                        "factors": k.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
                    })
                })
                .collect(),
        )
    }
}

impl fmt::Display for ClPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for b in k {
                write!(f, " * [{b}]")?;
            }
        }
        Ok(())
    }
}

/// Default upper bound on the width of counted tuples.
pub const DEFAULT_WIDTH_CAP: usize = 4;

/// Expresses counts of local formulas as cl-terms via the pattern
/// recursion. Results are memoized.
#[derive(Debug)]
pub struct ClBuilder {
    pub width_cap: usize,
    memo: HashMap<(Vec<Var>, PatternGraph, Formula, ClKind, u32), ClPoly>,
}

impl Default for ClBuilder {
    fn default() -> Self {
        Self::new(DEFAULT_WIDTH_CAP)
    }
}

impl ClBuilder {
    pub fn new(width_cap: usize) -> Self {
        ClBuilder {
            width_cap,
            memo: HashMap::new(),
        }
    }

    /// cl-term for `#(counted). body`, where `free` (if any) is the single
    /// free variable. `body` must be syntactically local around
    /// `free ++ counted`.
    pub fn count_term(&mut self, free: Option<&Var>, counted: &[Var], body: &Formula) -> Result<ClPoly> {
        let mut vars: Vec<Var> = free.into_iter().cloned().collect();
        vars.extend(counted.iter().cloned());
        let k = vars.len();
        if k > self.width_cap.min(crate::structures::MAX_PATTERN_WIDTH) {
            return Err(Error::Limit(format!(
                "counting term of width {k} exceeds the width cap {}",
                self.width_cap
            )));
        }
        let kind = if free.is_some() { ClKind::Unary } else { ClKind::Ground };
        let body = simplify(body);
        if k == 0 {
            return Err(Error::Internal("count over an empty tuple".into()));
        }
        let r = local_radius(&body, &vars)?;
        let mut total = ClPoly::zero();
        for g in PatternGraph::all(k) {
            total = total.add(&self.count_pattern(&vars, &g, &body, kind, r)?);
        }
        Ok(total)
    }

    /// cl-term counting tuples with pattern exactly `g` (threshold `2r+1`)
    /// satisfying `body`, via the product-minus-corrections recursion.
    pub fn count_pattern(
        &mut self,
        vars: &[Var],
        g: &PatternGraph,
        body: &Formula,
        kind: ClKind,
        r: u32,
    ) -> Result<ClPoly> {
        let key = (vars.to_vec(), *g, body.clone(), kind, r);
        if let Some(p) = self.memo.get(&key) {
            return Ok(p.clone());
        }
        let theta = restrict_to_pattern(body, vars, g, r);
        let out = if theta == Formula::ff() {
            ClPoly::zero()
        } else if g.is_connected() {
            if kind == ClKind::Unary && vars.len() == 1 {
                // #(y2). (theta(y1) & y2 = y1), a width-2 term with the edge pattern
                let pad = format!("{}_pad", vars[0]);
                let padded = Formula::and(theta, Formula::eq(pad.clone(), vars[0].clone()));
                ClPoly::basic(BasicClTerm::new(
                    kind,
                    &[vars[0].clone(), pad],
                    PatternGraph::complete(2),
                    r,
                    &padded,
                ))
            } else {
                ClPoly::basic(BasicClTerm::new(kind, vars, *g, r, &theta))
            }
        } else {
            let comps = g.components();
            let first: Vec<usize> = comps[0].clone();
            let rest: Vec<usize> = (0..vars.len()).filter(|i| !first.contains(i)).collect();
            let vars1: Vec<Var> = first.iter().map(|&i| vars[i].clone()).collect();
            let vars2: Vec<Var> = rest.iter().map(|&i| vars[i].clone()).collect();
            let g1 = g.induced(&first);
            let g2 = g.induced(&rest);
            let pairs = fv_split(&theta, vars, &|i| first.contains(&i))?;
            let extensions = cross_extensions(g, &first, &rest);
            let mut total = ClPoly::zero();
            for (psi1, psi2) in pairs {
                if psi1 == Formula::ff() || psi2 == Formula::ff() {
                    continue;
                }
                let p1 = self.count_pattern(&vars1, &g1, &psi1, kind, r)?;
                let p2 = self.count_pattern(&vars2, &g2, &psi2, ClKind::Ground, r)?;
                let mut term = p1.mul(&p2);
                let both = Formula::and(psi1.clone(), psi2.clone());
                for h in &extensions {
                    term = term.sub(&self.count_pattern(vars, h, &both, kind, r)?);
                }
                total = total.add(&term);
            }
            total
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

/// Graphs `H` on the same vertices with `H[first] = G[first]`,
/// `H[rest] = G[rest]` and at least one edge between the two sides.
pub fn cross_extensions(g: &PatternGraph, first: &[usize], rest: &[usize]) -> Vec<PatternGraph> {
    let cross: Vec<(usize, usize)> = first.iter().flat_map(|&i| rest.iter().map(move |&j| (i, j))).collect();
    (1u64..(1u64 << cross.len()))
        .map(|mask| {
            let mut h = *g;
            for (b, &(i, j)) in cross.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    h.add_edge(i, j);
                }
            }
            h
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_term, Interpretation};
    use crate::logic::{parse_formula, Registry};
    use crate::structures::Structure;

    fn sample() -> Structure {
        let mut b = Structure::builder().elements((0..9).map(|i| format!("v{i}")));
        for (a, c) in [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 4), (7, 8)] {
            b.add_tuple("E", &[format!("v{a}"), format!("v{c}")]);
        }
        for i in [0, 2, 5, 8] {
            b.add_tuple("P", &[format!("v{i}")]);
        }
        b.build().unwrap()
    }

    fn value(b: &BasicClTerm, a: &Structure, y1: Option<u32>) -> BigInt {
        let preds = Registry::builtin();
        let assignment = match (b.kind, y1) {
            (ClKind::Unary, Some(e)) => vec![("y1".to_string(), e)],
            _ => vec![],
        };
        let i = Interpretation {
            structure: a,
            assignment,
        };
        eval_term(&b.as_term(), &i, &preds).unwrap()
    }

    fn check(free: Option<&str>, counted: &[&str], body: &str) {
        let a = sample();
        let preds = Registry::builtin();
        let f = parse_formula(body, None, &preds).unwrap();
        let counted: Vec<Var> = counted.iter().map(|s| s.to_string()).collect();
        let free_var = free.map(|s| s.to_string());
        let poly = ClBuilder::default()
            .count_term(free_var.as_ref(), &counted, &f)
            .unwrap();
        let direct = Term::count(counted.clone(), f);
        let anchors: Vec<Option<u32>> = match free {
            Some(_) => a.elements().map(Some).collect(),
            None => vec![None],
        };
        for e in anchors {
            let assignment = match (free, e) {
                (Some(x), Some(e)) => vec![(x.to_string(), e)],
                _ => vec![],
            };
            let i = Interpretation {
                structure: &a,
                assignment,
            };
            let want = eval_term(&direct, &i, &preds).unwrap();
            let got = poly.eval(&|b| value(b, &a, e));
            assert_eq!(got, want, "{body} at {e:?}: {poly}");
        }
    }

    #[test]
    fn ground_counts_match_reference() {
        check(None, &["x"], "P(x)");
        check(None, &["x", "y"], "(P(x) & P(y))");
        check(None, &["x", "y"], "(E(x, y) | (P(x) & !P(y)))");
        check(None, &["x", "y"], "(exists z. (E(x, z) & P(z)) & !E(y, x))");
        check(None, &["x", "y", "z"], "((P(x) | E(y, z)) & !P(z))");
    }

    #[test]
    fn unary_counts_match_reference() {
        check(Some("x"), &["y"], "(P(y) & !E(x, y))");
        check(Some("x"), &["y"], "E(x, y)");
        check(
            Some("x"),
            &["y", "z"],
            "((E(x, y) | P(z)) & exists w. (E(z, w) & P(w)))",
        );
    }

    #[test]
    fn polynomial_arithmetic() {
        let b = BasicClTerm::new(
            ClKind::Ground,
            &["y1".into()],
            PatternGraph::complete(1),
            0,
            &Formula::tt(),
        );
        let p = ClPoly::basic(b).add(&ClPoly::constant(2));
        let sq = p.mul(&p);
        assert_eq!(sq.monomials().count(), 3);
        assert_eq!(sq.eval(&|_| BigInt::from(3)), BigInt::from(25));
        assert!(sq.sub(&sq).is_zero());
    }
}
