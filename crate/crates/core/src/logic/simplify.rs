//! Constant folding and atom substitution.

use super::analysis::free_vars;
use super::ast::{Formula, Term};

/// Folds Boolean constants, removes double negations, drops vacuous
/// quantifiers and merges identical disjuncts. Preserves semantics on
/// every structure (universes are non-empty).
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::Not(a) => match simplify(a) {
            Formula::Bool(b) => Formula::Bool(!b),
            Formula::Not(inner) => *inner,
            other => Formula::not(other),
        },
        Formula::Or(a, b) => {
            let a = simplify(a);
            let b = simplify(b);
            match (a, b) {
                (Formula::Bool(true), _) | (_, Formula::Bool(true)) => Formula::tt(),
                (Formula::Bool(false), x) | (x, Formula::Bool(false)) => x,
                (a, b) if a == b => a,
                (a, b) => Formula::or(a, b),
            }
        }
        Formula::Exists(x, body) => {
            let body = simplify(body);
            if let Formula::Bool(b) = body {
                Formula::Bool(b)
            } else if !free_vars(&body).contains(x) {
                body
            } else {
                Formula::exists(x.clone(), body)
            }
        }
        Formula::Pred(p, ts) => Formula::Pred(p.clone(), ts.iter().map(simplify_term).collect()),
        other => other.clone(),
    }
}

pub fn simplify_term(t: &Term) -> Term {
    match t {
        Term::Count(vs, body) => Term::Count(vs.clone(), Box::new(simplify(body))),
        Term::Add(a, b) => Term::add(simplify_term(a), simplify_term(b)),
        Term::Mul(a, b) => Term::mul(simplify_term(a), simplify_term(b)),
        Term::Int(_) => t.clone(),
    }
}

/// Replaces atoms for which `value` returns a truth value, then simplifies.
/// Only atoms outside predicate applications are visited.
pub fn assign_atoms(f: &Formula, value: &dyn Fn(&Formula) -> Option<bool>) -> Formula {
    fn go(f: &Formula, value: &dyn Fn(&Formula) -> Option<bool>) -> Formula {
        if let Some(b) = value(f) {
            return Formula::Bool(b);
        }
        match f {
            Formula::Not(a) => Formula::not(go(a, value)),
            Formula::Or(a, b) => Formula::or(go(a, value), go(b, value)),
            Formula::Exists(x, a) => Formula::exists(x.clone(), go(a, value)),
            other => other.clone(),
        }
    }
    simplify(&go(f, value))
}
