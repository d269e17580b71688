//! Syntactic locality.
//!
//! A formula is accepted as local around anchor variables `y1..yk` when
//! every quantifier `exists z` has a top-level positive conjunct tying `z`
//! to a variable `u` already in scope: a relation atom mentioning both
//! (`z` is then within distance 1 of `u`), `dist(u, z) <= d` (within `d`),
//! or `z = u` (distance 0). Each bound variable thus inherits an origin
//! anchor and an accumulated distance bound from it. The radius is the
//! smallest `r` bounding every accumulated distance and satisfying
//! `a_u + a_v + d <= 2r + 1` for every distance atom.

use crate::error::{Error, Result};
use crate::logic::{Formula, Var};
use crate::structures::PatternGraph;

/// Anchor index and distance bound from that anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Origin {
    pub anchor: usize,
    pub acc: u32,
}

pub(crate) type Scope<'f> = Vec<(&'f str, Origin)>;

pub(crate) fn lookup(scope: &Scope<'_>, x: &str) -> Option<Origin> {
    scope.iter().rev().find(|(n, _)| *n == x).map(|(_, o)| *o)
}

pub(crate) fn anchor_scope(anchors: &[Var]) -> Scope<'_> {
    anchors
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), Origin { anchor: i, acc: 0 }))
        .collect()
}

/// Guard of `exists z. body`, as the origin it gives to `z`.
pub(crate) fn guard(z: &str, body: &Formula, scope: &Scope<'_>) -> Option<Origin> {
    let mut best: Option<Origin> = None;
    let mut offer = |o: Origin| {
        if best.is_none_or(|b| o.acc < b.acc) {
            best = Some(o);
        }
    };
    for c in body.conjuncts() {
        if !c.positive {
            continue;
        }
        match c.formula {
            Formula::Eq(a, b) => {
                let other = if a == z {
                    b
                } else if b == z {
                    a
                } else {
                    continue;
                };
                if other != z {
                    if let Some(o) = lookup(scope, other) {
                        offer(o);
                    }
                }
            }
            Formula::Atom(_, vs) if vs.iter().any(|v| v == z) => {
                for u in vs.iter().filter(|u| *u != z) {
                    if let Some(o) = lookup(scope, u) {
                        offer(Origin {
                            anchor: o.anchor,
                            acc: o.acc + 1,
                        });
                    }
                }
            }
            Formula::Dist(a, b, d) => {
                let other = if a == z {
                    b
                } else if b == z {
                    a
                } else {
                    continue;
                };
                if other != z {
                    if let Some(o) = lookup(scope, other) {
                        offer(Origin {
                            anchor: o.anchor,
                            acc: o.acc + d,
                        });
                    }
                }
            }
            _ => {}
        }
    }
    best
}

fn not_local(sub: &Formula, anchors: &[Var], why: &str) -> Error {
    Error::Unsupported(format!(
        "`{sub}` is not syntactically local around ({}): {why}",
        anchors.join(", ")
    ))
}

/// Smallest radius for which `f` is syntactically local around `anchors`.
pub fn local_radius(f: &Formula, anchors: &[Var]) -> Result<u32> {
    let mut scope = anchor_scope(anchors);
    let mut r = 0;
    radius_rec(f, anchors, &mut scope, &mut r)?;
    Ok(r)
}

fn origin(scope: &Scope<'_>, x: &str, f: &Formula, anchors: &[Var]) -> Result<Origin> {
    lookup(scope, x).ok_or_else(|| not_local(f, anchors, &format!("variable `{x}` is not an anchor")))
}

fn radius_rec<'f>(f: &'f Formula, anchors: &[Var], scope: &mut Scope<'f>, r: &mut u32) -> Result<()> {
    match f {
        Formula::Bool(_) => Ok(()),
        Formula::Eq(x, y) => {
            origin(scope, x, f, anchors)?;
            origin(scope, y, f, anchors)?;
            Ok(())
        }
        Formula::Atom(_, vs) => {
            for v in vs {
                origin(scope, v, f, anchors)?;
            }
            Ok(())
        }
        Formula::Dist(x, y, d) => {
            let need = origin(scope, x, f, anchors)?.acc + origin(scope, y, f, anchors)?.acc + d;
            *r = (*r).max(need / 2);
            Ok(())
        }
        Formula::Not(a) => radius_rec(a, anchors, scope, r),
        Formula::Or(a, b) => {
            radius_rec(a, anchors, scope, r)?;
            radius_rec(b, anchors, scope, r)
        }
        Formula::Exists(z, body) => {
            let o = guard(z, body, scope)
                .ok_or_else(|| not_local(f, anchors, &format!("quantifier over `{z}` has no guard")))?;
            *r = (*r).max(o.acc);
            scope.push((z, o));
            let res = radius_rec(body, anchors, scope, r);
            scope.pop();
            res
        }
        Formula::Pred(..) => Err(not_local(f, anchors, "predicate applications are not local")),
    }
}

/// Simplifies `f` under the assumption that the anchors realise pattern `g`
/// at threshold `2r+1`: atoms relating variables whose origins are not
/// adjacent in `g` become false, and distance atoms between adjacent
/// anchors with bound at least `2r+1` become true. Requires
/// `local_radius(f, anchors) <= r`.
pub fn restrict_to_pattern(f: &Formula, anchors: &[Var], g: &PatternGraph, r: u32) -> Formula {
    let mut scope = anchor_scope(anchors);
    crate::logic::simplify(&restrict_rec(f, &mut scope, g, r))
}

fn far_apart(scope: &Scope<'_>, vars: &[&Var], g: &PatternGraph) -> bool {
    let origins: Vec<usize> = vars.iter().filter_map(|v| lookup(scope, v)).map(|o| o.anchor).collect();
    for (i, &a) in origins.iter().enumerate() {
        for &b in &origins[i + 1..] {
            if a != b && !g.has_edge(a, b) {
                return true;
            }
        }
    }
    false
}

fn restrict_rec<'f>(f: &'f Formula, scope: &mut Scope<'f>, g: &PatternGraph, r: u32) -> Formula {
    match f {
        Formula::Eq(x, y) => {
            if far_apart(scope, &[x, y], g) {
                Formula::ff()
            } else {
                f.clone()
            }
        }
        Formula::Atom(_, vs) => {
            let refs: Vec<&Var> = vs.iter().collect();
            if far_apart(scope, &refs, g) {
                Formula::ff()
            } else {
                f.clone()
            }
        }
        Formula::Dist(x, y, d) => {
            if far_apart(scope, &[x, y], g) {
                return Formula::ff();
            }
            if let (Some(ox), Some(oy)) = (lookup(scope, x), lookup(scope, y)) {
                if ox.acc == 0 && oy.acc == 0 && ox.anchor != oy.anchor && *d > 2 * r {
                    return Formula::tt();
                }
                if ox.acc == 0 && oy.acc == 0 && ox.anchor == oy.anchor {
                    return Formula::tt();
                }
            }
            f.clone()
        }
        Formula::Not(a) => Formula::not(restrict_rec(a, scope, g, r)),
        Formula::Or(a, b) => {
            let a = restrict_rec(a, scope, g, r);
            Formula::or(a, restrict_rec(b, scope, g, r))
        }
        Formula::Exists(z, body) => match guard(z, body, scope) {
            Some(o) => {
                scope.push((z, o));
                let body = restrict_rec(body, scope, g, r);
                scope.pop();
                Formula::exists(z.clone(), body)
            }
            None => f.clone(),
        },
        Formula::Bool(_) | Formula::Pred(..) => f.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Registry};

    fn p(s: &str) -> Formula {
        parse_formula(s, None, &Registry::builtin()).unwrap()
    }

    fn vars(v: &[&str]) -> Vec<Var> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn radius_of_guarded_formulas() {
        assert_eq!(local_radius(&p("E(x, y)"), &vars(&["x", "y"])).unwrap(), 0);
        assert_eq!(
            local_radius(&p("exists z. (E(x, z) & P(z))"), &vars(&["x"])).unwrap(),
            1
        );
        assert_eq!(
            local_radius(&p("exists z. (E(x, z) & exists w. (E(z, w) & P(w)))"), &vars(&["x"])).unwrap(),
            2
        );
        assert_eq!(
            local_radius(&p("exists z. (dist(x, z) <= 3 & P(z))"), &vars(&["x"])).unwrap(),
            3
        );
        assert_eq!(local_radius(&p("dist(x, y) <= 3"), &vars(&["x", "y"])).unwrap(), 1);
        assert_eq!(local_radius(&p("dist(x, y) <= 4"), &vars(&["x", "y"])).unwrap(), 2);
        assert_eq!(
            local_radius(&p("forall z. (E(x, z) -> P(z))"), &vars(&["x"])).unwrap(),
            1
        );
    }

    #[test]
    fn rejects_unguarded() {
        assert!(local_radius(&p("exists z. P(z)"), &vars(&["x"])).is_err());
        assert!(local_radius(&p("exists z. (!E(x, z) & P(z))"), &vars(&["x"])).is_err());
        assert!(local_radius(&p("E(x, w)"), &vars(&["x"])).is_err());
    }

    #[test]
    fn restriction_falsifies_cross_atoms() {
        let g = PatternGraph::empty(2);
        let f = p("(E(x, y) | (P(x) & exists z. (E(x, z) & E(z, y))))");
        let out = restrict_to_pattern(&f, &vars(&["x", "y"]), &g, 1);
        assert_eq!(out, Formula::ff());
        let f = p("(E(x, y) | P(y))");
        assert_eq!(restrict_to_pattern(&f, &vars(&["x", "y"]), &g, 0), p("P(y)"));
        let mut e = PatternGraph::empty(2);
        e.add_edge(0, 1);
        assert_eq!(
            restrict_to_pattern(&p("dist(x, y) <= 3"), &vars(&["x", "y"]), &e, 1),
            Formula::tt()
        );
    }
}
