//! Splitting a local formula into a part over the first component of a
//! pattern and a part over the remaining anchors.
//!
//! The input must already be restricted to the pattern (see
//! [`restrict_to_pattern`](super::syntax::restrict_to_pattern)), so every
//! atom talks about one side only. Quantified blocks that still mix sides
//! are purified by case-splitting on the foreign subformulas, which do not
//! mention the block's variable. A final case split over the first side's
//! subformulas yields pairs `(psi1_i, psi2_i)` with pairwise exclusive
//! `psi1_i` whose disjunction of conjunctions is equivalent to the input.

use std::collections::BTreeSet;

use super::syntax::{anchor_scope, guard, lookup, Scope};
use crate::error::{Error, Result};
use crate::logic::analysis::free_vars;
use crate::logic::{simplify, Formula, Var};

const MAX_SPLIT_UNITS: usize = 14;

/// Boolean-level constituents of a formula (everything below `!` and `|`).
pub(crate) fn units(f: &Formula) -> Vec<&Formula> {
    fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::Not(a) => go(a, out),
            Formula::Or(a, b) => {
                go(a, out);
                go(b, out);
            }
            Formula::Bool(_) => {}
            other => {
                if !out.contains(&other) {
                    out.push(other)
                }
            }
        }
    }
    let mut out = Vec::new();
    go(f, &mut out);
    out
}

/// Replaces a Boolean-level constituent by a constant.
pub(crate) fn replace_unit(f: &Formula, unit: &Formula, value: bool) -> Formula {
    if f == unit {
        return Formula::Bool(value);
    }
    match f {
        Formula::Not(a) => Formula::not(replace_unit(a, unit, value)),
        Formula::Or(a, b) => Formula::or(replace_unit(a, unit, value), replace_unit(b, unit, value)),
        other => other.clone(),
    }
}

/// Case split on the units selected by `pick`. Returns `(path, residual)`
/// leaves with pairwise exclusive paths, residuals free of picked units,
/// and identical residuals merged.
pub(crate) fn shannon(f: &Formula, pick: &dyn Fn(&Formula) -> bool) -> Result<Vec<(Formula, Formula)>> {
    let picked: Vec<Formula> = units(f).into_iter().filter(|u| pick(u)).cloned().collect();
    if picked.len() > MAX_SPLIT_UNITS {
        return Err(Error::Limit(format!(
            "case split over {} subformulas exceeds the limit of {MAX_SPLIT_UNITS}",
            picked.len()
        )));
    }
    let mut leaves: Vec<(Formula, Formula)> = Vec::new();
    branch(simplify(f), Vec::new(), pick, &mut leaves);
    // merge equal residuals
    let mut merged: Vec<(Vec<Formula>, Formula)> = Vec::new();
    for (path, res) in leaves {
        if res == Formula::ff() {
            continue;
        }
        match merged.iter_mut().find(|(_, r)| *r == res) {
            Some((paths, _)) => paths.push(path),
            None => merged.push((vec![path], res)),
        }
    }
    Ok(merged
        .into_iter()
        .map(|(paths, res)| (simplify(&Formula::or_all(paths)), res))
        .collect())
}

fn branch(f: Formula, path: Vec<Formula>, pick: &dyn Fn(&Formula) -> bool, out: &mut Vec<(Formula, Formula)>) {
    let next = units(&f).into_iter().find(|u| pick(u)).cloned();
    match next {
        None => out.push((Formula::and_all(path), f)),
        Some(u) => {
            for value in [true, false] {
                let g = simplify(&replace_unit(&f, &u, value));
                if g == Formula::ff() {
                    continue;
                }
                let mut p = path.clone();
                p.push(if value { u.clone() } else { Formula::not(u.clone()) });
                branch(g, p, pick, out);
            }
        }
    }
}

/// Side of a unit: `Some(true)` for the first side, `Some(false)` for the
/// second, `None` when it mixes both.
fn side_of(unit: &Formula, scope: &Scope<'_>, first: &dyn Fn(usize) -> bool) -> Option<bool> {
    let mut sides = BTreeSet::new();
    for v in free_vars(unit) {
        if let Some(o) = lookup(scope, &v) {
            sides.insert(first(o.anchor));
        }
    }
    match sides.len() {
        0 => Some(true),
        1 => sides.into_iter().next(),
        _ => None,
    }
}

fn purify<'f>(
    f: &'f Formula,
    scope: &mut Scope<'f>,
    first: &dyn Fn(usize) -> bool,
    anchors: &[Var],
) -> Result<Formula> {
    match f {
        Formula::Not(a) => Ok(Formula::not(purify(a, scope, first, anchors)?)),
        Formula::Or(a, b) => {
            let a = purify(a, scope, first, anchors)?;
            Ok(Formula::or(a, purify(b, scope, first, anchors)?))
        }
        Formula::Exists(z, body) => {
            let o = guard(z, body, scope)
                .ok_or_else(|| Error::Unsupported(format!("`{f}` has an unguarded quantifier")))?;
            let z_side = first(o.anchor);
            scope.push((z, o));
            let inner = purify(body, scope, first, anchors);
            let out = inner.and_then(|body| {
                let foreign = |u: &Formula| side_of(u, scope, first) != Some(z_side);
                for u in units(&body) {
                    if side_of(u, scope, first).is_none() {
                        return Err(Error::Unsupported(format!(
                            "`{u}` relates anchors from different components of the distance pattern around ({})",
                            anchors.join(", ")
                        )));
                    }
                    if foreign(u) && free_vars(u).contains(z.as_str()) {
                        return Err(Error::Internal(format!("foreign subformula `{u}` mentions `{z}`")));
                    }
                }
                let leaves = shannon(&body, &foreign)?;
                Ok(Formula::or_all(leaves.into_iter().map(|(path, res)| {
                    Formula::and(path, Formula::exists(z.clone(), res))
                })))
            });
            scope.pop();
            out.map(|f| simplify(&f))
        }
        other => Ok(other.clone()),
    }
}

/// Splits `f` (local around `anchors`, restricted to a pattern in which
/// the anchors selected by `first` form a union of components) into pairs
/// `(psi1, psi2)` with `psi1` over the first side and `psi2` over the
/// rest. The `psi1` are pairwise exclusive.
pub fn fv_split(f: &Formula, anchors: &[Var], first: &dyn Fn(usize) -> bool) -> Result<Vec<(Formula, Formula)>> {
    let mut scope = anchor_scope(anchors);
    let pure = purify(f, &mut scope, first, anchors)?;
    for u in units(&pure) {
        if side_of(u, &scope, first).is_none() {
            return Err(Error::Unsupported(format!(
                "`{u}` relates anchors from different components of the distance pattern around ({})",
                anchors.join(", ")
            )));
        }
    }
    let pick = |u: &Formula| side_of(u, &scope, first) == Some(true);
    shannon(&pure, &pick)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_formula, Interpretation};
    use crate::logic::{parse_formula, Registry};
    use crate::structures::Structure;

    fn p(s: &str) -> Formula {
        parse_formula(s, None, &Registry::builtin()).unwrap()
    }

    fn check_equivalent(f: &Formula, pairs: &[(Formula, Formula)], a: &Structure, vars: &[&str]) {
        let preds = Registry::builtin();
        for x in a.elements() {
            for y in a.elements() {
                let i = Interpretation {
                    structure: a,
                    assignment: vec![(vars[0].to_string(), x), (vars[1].to_string(), y)],
                };
                let lhs = eval_formula(f, &i, &preds).unwrap();
                let mut hits = 0;
                for (a1, a2) in pairs {
                    if eval_formula(a1, &i, &preds).unwrap() && eval_formula(a2, &i, &preds).unwrap() {
                        hits += 1;
                    }
                }
                assert!(hits <= 1);
                assert_eq!(lhs, hits == 1);
            }
        }
    }

    #[test]
    fn splits_boolean_combinations() {
        let a = Structure::builder()
            .elements(["a", "b", "c", "d"])
            .tuple("P", &["a"])
            .tuple("P", &["c"])
            .tuple("Q", &["b"])
            .tuple("Q", &["c"])
            .tuple("E", &["a", "b"])
            .build()
            .unwrap();
        let vars = vec!["x".to_string(), "y".to_string()];
        for s in [
            "(P(x) | Q(y))",
            "((P(x) & Q(y)) | (!P(x) & !Q(y)))",
            "exists z. (E(x, z) & (P(z) | Q(y)))",
            "(P(x) -> exists z. (E(y, z) & !P(y)))",
        ] {
            let f = p(s);
            let pairs = fv_split(&f, &vars, &|i| i == 0).unwrap();
            for (a1, a2) in &pairs {
                assert!(!free_vars(a1).contains("y"), "{a1}");
                assert!(!free_vars(a2).contains("x"), "{a2}");
            }
            check_equivalent(&f, &pairs, &a, &["x", "y"]);
        }
    }

    #[test]
    fn rejects_mixed_atoms() {
        let vars = vec!["x".to_string(), "y".to_string()];
        assert!(fv_split(&p("E(x, y)"), &vars, &|i| i == 0).is_err());
    }
}
