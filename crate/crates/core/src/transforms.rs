//! Rewriting formulas and basic terms over a structure into formulas and
//! terms over its removal structures.

use std::collections::BTreeSet;
use std::fmt;

use crate::covers::RemovalNames;
use crate::error::{Error, Result};
use crate::logic::{simplify, Formula, Term, Var};

/// `#(counted). body`, with at most one free variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicTerm {
    pub free: Option<Var>,
    pub counted: Vec<Var>,
    pub body: Formula,
}

impl BasicTerm {
    pub fn ground(counted: Vec<Var>, body: Formula) -> Self {
        BasicTerm {
            free: None,
            counted,
            body,
        }
    }

    pub fn unary(free: Var, counted: Vec<Var>, body: Formula) -> Self {
        BasicTerm {
            free: Some(free),
            counted,
            body,
        }
    }

    pub fn width(&self) -> usize {
        self.counted.len() + usize::from(self.free.is_some())
    }

    /// The term as a counting term; an empty count is 1 or 0.
    pub fn as_term(&self) -> Term {
        Term::count(self.counted.clone(), self.body.clone())
    }
}

impl fmt::Display for BasicTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#({}). {}", self.counted.join(", "), self.body)
    }
}

/// `φ̃_V`: for every structure `A` with at least two elements, every `d`
/// and every assignment mapping exactly the free variables in `V` to `d`,
/// `A ⊨ φ` iff `A⟅_r d ⊨ φ̃_V` under the same assignment of the other
/// variables.
pub fn removal_formula(f: &Formula, v: &BTreeSet<Var>, names: &RemovalNames) -> Result<Formula> {
    Ok(simplify(&rewrite(f, &mut v.clone(), names)?))
}

fn rewrite(f: &Formula, v: &mut BTreeSet<Var>, names: &RemovalNames) -> Result<Formula> {
    Ok(match f {
        Formula::Bool(_) => f.clone(),
        Formula::Atom(r, xs) => {
            if names.base.arity(r).is_none() {
                return Err(Error::UnknownRelation(r.clone()));
            }
            let positions: Vec<usize> = (0..xs.len()).filter(|&i| v.contains(&xs[i])).collect();
            let rest: Vec<Var> = xs.iter().filter(|x| !v.contains(*x)).cloned().collect();
            Formula::atom(names.tilde(r, &positions), rest)
        }
        Formula::Eq(x, y) => match (v.contains(x), v.contains(y)) {
            (false, false) => f.clone(),
            (true, true) => Formula::tt(),
            _ => Formula::ff(),
        },
        Formula::Dist(x, y, i) => match (v.contains(x), v.contains(y)) {
            (true, true) => Formula::tt(),
            (true, false) => halo(names, *i, y)?,
            (false, true) => halo(names, *i, x)?,
            (false, false) => {
                let mut parts = vec![f.clone()];
                for i1 in 1..*i {
                    parts.push(Formula::and(halo(names, i1, x)?, halo(names, i - i1, y)?));
                }
                Formula::or_all(parts)
            }
        },
        Formula::Not(a) => Formula::not(rewrite(a, v, names)?),
        Formula::Or(a, b) => Formula::or(rewrite(a, v, names)?, rewrite(b, v, names)?),
        Formula::Exists(x, body) => {
            let had = v.contains(x);
            v.insert(x.clone());
            let at_d = rewrite(body, v, names);
            v.remove(x);
            let away = rewrite(body, v, names);
            if had {
                v.insert(x.clone());
            }
            Formula::or(at_d?, Formula::exists(x.clone(), away?))
        }
        Formula::Pred(..) => {
            return Err(Error::Input(format!(
                "`{f}`: removal is defined for formulas without counting"
            )))
        }
    })
}

/// `S_i(x)`, where `S_0` is empty.
fn halo(names: &RemovalNames, i: u32, x: &Var) -> Result<Formula> {
    if i == 0 {
        return Ok(Formula::ff());
    }
    Ok(Formula::atom(names.halo(i)?, [x.clone()]))
}

fn subsets(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1 << k)).map(move |m| (0..k).filter(|i| m >> i & 1 == 1).collect())
}

/// Ground terms `ĝ_i` with `g^A = Σ ĝ_i^{A⟅_r d}`.
pub fn removal_ground_term(g: &BasicTerm, names: &RemovalNames) -> Result<Vec<BasicTerm>> {
    if g.free.is_some() {
        return Err(Error::Input(format!("`{g}` is not a ground term")));
    }
    let mut out = Vec::new();
    for positions in subsets(g.counted.len()) {
        let v: BTreeSet<Var> = positions.iter().map(|&i| g.counted[i].clone()).collect();
        let body = removal_formula(&g.body, &v, names)?;
        if body == Formula::ff() {
            continue;
        }
        let counted = g.counted.iter().filter(|x| !v.contains(*x)).cloned().collect();
        out.push(BasicTerm::ground(counted, body));
    }
    Ok(out)
}

/// Ground terms `ĝ_i` and unary terms `û_j` with `u^A[d] = Σ ĝ_i^{A⟅_r d}`
/// and `u^A[a] = Σ û_j^{A⟅_r d}[a]` for `a ≠ d`.
pub fn removal_unary_term(u: &BasicTerm, names: &RemovalNames) -> Result<(Vec<BasicTerm>, Vec<BasicTerm>)> {
    let Some(x) = &u.free else {
        return Err(Error::Input(format!("`{u}` is not a unary term")));
    };
    let mut vars = vec![x.clone()];
    vars.extend(u.counted.iter().cloned());
    let mut grounds = Vec::new();
    let mut unaries = Vec::new();
    for positions in subsets(vars.len()) {
        let v: BTreeSet<Var> = positions.iter().map(|&i| vars[i].clone()).collect();
        let body = removal_formula(&u.body, &v, names)?;
        if body == Formula::ff() {
            continue;
        }
        let counted: Vec<Var> = u.counted.iter().filter(|y| !v.contains(*y)).cloned().collect();
        if v.contains(x) {
            grounds.push(BasicTerm::ground(counted, body));
        } else {
            unaries.push(BasicTerm::unary(x.clone(), counted, body));
        }
    }
    Ok((grounds, unaries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::remove;
    use crate::eval::{eval_formula, Interpretation};
    use crate::logic::{parse_formula, Registry};
    use crate::structures::{Signature, Structure};

    fn names() -> RemovalNames {
        RemovalNames::new(&Signature::new().with("E", 2).with("R", 2), 3)
    }

    fn p(s: &str) -> Formula {
        parse_formula(s, None, &Registry::builtin()).unwrap()
    }

    fn set(vs: &[&str]) -> BTreeSet<Var> {
        vs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn base_cases() {
        let n = names();
        assert_eq!(
            removal_formula(&p("x1 = x2"), &set(&["x1", "x2"]), &n).unwrap(),
            Formula::tt()
        );
        assert_eq!(
            removal_formula(&p("x1 = x2"), &set(&["x1"]), &n).unwrap(),
            Formula::ff()
        );
        assert_eq!(
            removal_formula(&p("dist(x1, x2) <= 2"), &set(&["x1"]), &n).unwrap(),
            p("Sd2(x2)")
        );
        assert_eq!(removal_formula(&p("R(x, y)"), &set(&["y"]), &n).unwrap(), p("R_d2(x)"));
        assert_eq!(
            removal_formula(&p("dist(x, y) <= 2"), &set(&[]), &n).unwrap(),
            p("(dist(x, y) <= 2 | (Sd1(x) & Sd1(y)))")
        );
        assert!(removal_formula(&p("dist(x, y) <= 4"), &set(&["x"]), &n).is_err());
    }

    #[test]
    fn contract_on_a_small_graph() {
        let mut b = Structure::builder().elements(["a", "b", "c", "d", "e"]);
        for (x, y) in [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("d", "e")] {
            b.add_tuple("E", &[x, y]);
        }
        b.add_tuple("R", &["e", "e"]);
        let a = b.build().unwrap();
        let preds = Registry::builtin();
        let f = p("exists z. (E(x, z) & (dist(z, y) <= 2 | R(y, y)))");
        for d in a.elements() {
            let rem = remove(&a, d, 3).unwrap();
            for x in a.elements() {
                for y in a.elements() {
                    let v: BTreeSet<Var> = [("x", x), ("y", y)]
                        .iter()
                        .filter(|(_, e)| *e == d)
                        .map(|(n, _)| n.to_string())
                        .collect();
                    let g = removal_formula(&f, &v, &rem.names).unwrap();
                    let lhs = eval_formula(
                        &f,
                        &Interpretation {
                            structure: &a,
                            assignment: vec![("x".into(), x), ("y".into(), y)],
                        },
                        &preds,
                    )
                    .unwrap();
                    let assignment = [("x", x), ("y", y)]
                        .iter()
                        .filter_map(|(n, e)| rem.to_new(*e).map(|e| (n.to_string(), e)))
                        .collect();
                    let rhs = eval_formula(
                        &g,
                        &Interpretation {
                            structure: &rem.structure,
                            assignment,
                        },
                        &preds,
                    )
                    .unwrap();
                    assert_eq!(lhs, rhs, "d={d} x={x} y={y}: {g}");
                }
            }
        }
    }

    #[test]
    fn term_lists() {
        let n = names();
        let g = BasicTerm::ground(vec!["y".into()], Formula::tt());
        let parts = removal_ground_term(&g, &n).unwrap();
        assert_eq!(parts.len(), 2);
        let u = BasicTerm::unary("x".into(), vec!["z".into()], p("E(x, z)"));
        let (grounds, unaries) = removal_unary_term(&u, &n).unwrap();
        assert_eq!(grounds.len(), 2);
        assert_eq!(unaries.len(), 2);
        assert!(
            removal_ground_term(&BasicTerm::ground(vec!["y".into()], Formula::ff()), &n)
                .unwrap()
                .is_empty()
        );
    }
}
