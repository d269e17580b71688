//! Static analysis: free variables, #-depth, FO₁C check, q-rank, size.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Pow;

use super::ast::{Expr, Formula, Term, Var};
use super::parser::tokenize;
use super::predicates::Registry;
use crate::error::{Error, Result};
use crate::structures::Signature;

pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    free_formula(f, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_term(t: &Term) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    free_term(t, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_expr(e: &Expr) -> BTreeSet<Var> {
    match e {
        Expr::Formula(f) => free_vars(f),
        Expr::Term(t) => free_vars_term(t),
    }
}

fn note(x: &Var, bound: &[Var], out: &mut BTreeSet<Var>) {
    if !bound.contains(x) {
        out.insert(x.clone());
    }
}

fn free_formula(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match f {
        Formula::Bool(_) => {}
        Formula::Eq(x, y) | Formula::Dist(x, y, _) => {
            note(x, bound, out);
            note(y, bound, out);
        }
        Formula::Atom(_, vs) => vs.iter().for_each(|v| note(v, bound, out)),
        Formula::Not(a) => free_formula(a, bound, out),
        Formula::Or(a, b) => {
            free_formula(a, bound, out);
            free_formula(b, bound, out);
        }
        Formula::Exists(x, a) => {
            bound.push(x.clone());
            free_formula(a, bound, out);
            bound.pop();
        }
        Formula::Pred(_, ts) => ts.iter().for_each(|t| free_term(t, bound, out)),
    }
}

fn free_term(t: &Term, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match t {
        Term::Int(_) => {}
        Term::Count(vs, body) => {
            let n = bound.len();
            bound.extend(vs.iter().cloned());
            free_formula(body, bound, out);
            bound.truncate(n);
        }
        Term::Add(a, b) | Term::Mul(a, b) => {
            free_term(a, bound, out);
            free_term(b, bound, out);
        }
    }
}

/// Nesting depth of counting terms.
pub fn count_depth(f: &Formula) -> usize {
    match f {
        Formula::Bool(_) | Formula::Eq(..) | Formula::Atom(..) | Formula::Dist(..) => 0,
        Formula::Not(a) | Formula::Exists(_, a) => count_depth(a),
        Formula::Or(a, b) => count_depth(a).max(count_depth(b)),
        Formula::Pred(_, ts) => ts.iter().map(count_depth_term).max().unwrap_or(0),
    }
}

pub fn count_depth_term(t: &Term) -> usize {
    match t {
        Term::Int(_) => 0,
        Term::Count(_, body) => count_depth(body) + 1,
        Term::Add(a, b) | Term::Mul(a, b) => count_depth_term(a).max(count_depth_term(b)),
    }
}

pub fn count_depth_expr(e: &Expr) -> usize {
    match e {
        Expr::Formula(f) => count_depth(f),
        Expr::Term(t) => count_depth_term(t),
    }
}

/// Outcome of the FO₁C membership check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fo1cReport {
    pub ok: bool,
    /// Rendered predicate applications whose arguments share more than one
    /// free variable, with those variables.
    pub violations: Vec<(String, Vec<Var>)>,
}

pub fn validate_fo1c(e: &Expr) -> Fo1cReport {
    let mut violations = Vec::new();
    match e {
        Expr::Formula(f) => fo1c_formula(f, &mut violations),
        Expr::Term(t) => fo1c_term(t, &mut violations),
    }
    Fo1cReport {
        ok: violations.is_empty(),
        violations,
    }
}

fn fo1c_formula(f: &Formula, out: &mut Vec<(String, Vec<Var>)>) {
    match f {
        Formula::Bool(_) | Formula::Eq(..) | Formula::Atom(..) | Formula::Dist(..) => {}
        Formula::Not(a) | Formula::Exists(_, a) => fo1c_formula(a, out),
        Formula::Or(a, b) => {
            fo1c_formula(a, out);
            fo1c_formula(b, out);
        }
        Formula::Pred(_, ts) => {
            let mut joint = BTreeSet::new();
            for t in ts {
                joint.extend(free_vars_term(t));
                fo1c_term(t, out);
            }
            if joint.len() > 1 {
                out.push((f.to_string(), joint.into_iter().collect()));
            }
        }
    }
}

fn fo1c_term(t: &Term, out: &mut Vec<(String, Vec<Var>)>) {
    match t {
        Term::Int(_) => {}
        Term::Count(_, body) => fo1c_formula(body, out),
        Term::Add(a, b) | Term::Mul(a, b) => {
            fo1c_term(a, out);
            fo1c_term(b, out);
        }
    }
}

pub fn quantifier_rank(f: &Formula) -> usize {
    match f {
        Formula::Bool(_) | Formula::Eq(..) | Formula::Atom(..) | Formula::Dist(..) => 0,
        Formula::Not(a) => quantifier_rank(a),
        Formula::Exists(_, a) => quantifier_rank(a) + 1,
        Formula::Or(a, b) => quantifier_rank(a).max(quantifier_rank(b)),
        Formula::Pred(_, ts) => ts.iter().map(quantifier_rank_term).max().unwrap_or(0),
    }
}

fn quantifier_rank_term(t: &Term) -> usize {
    match t {
        Term::Int(_) => 0,
        Term::Count(vs, body) => quantifier_rank(body) + vs.len(),
        Term::Add(a, b) | Term::Mul(a, b) => quantifier_rank_term(a).max(quantifier_rank_term(b)),
    }
}

/// `(4q)^(q+l)`.
pub fn f_q(q: u32, l: u32) -> BigInt {
    BigInt::from(4u64 * q as u64).pow(q + l)
}

/// Whether an FO⁺ formula has q-rank at most `l`: quantifier rank at most
/// `l`, and each distance atom under `i` quantifiers has bound at most
/// `(4q)^(q+l-i)`.
pub fn q_rank_check(f: &Formula, q: u32, l: u32) -> Result<bool> {
    fn go(f: &Formula, q: u32, l: u32, depth: u32) -> Result<bool> {
        Ok(match f {
            Formula::Bool(_) | Formula::Eq(..) | Formula::Atom(..) => true,
            Formula::Dist(_, _, d) => depth <= l && BigInt::from(*d) <= f_q(q, l - depth),
            Formula::Not(a) => go(a, q, l, depth)?,
            Formula::Or(a, b) => go(a, q, l, depth)? && go(b, q, l, depth)?,
            Formula::Exists(_, a) => depth < l && go(a, q, l, depth + 1)?,
            Formula::Pred(..) => {
                return Err(Error::Input(
                    "q-rank is defined for FO+ formulas without counting".into(),
                ))
            }
        })
    }
    go(f, q, l, 0)
}

/// Number of tokens of the canonical rendering.
pub fn size(e: &Expr) -> usize {
    tokenize(&e.to_string()).map(|t| t.len()).unwrap_or(0)
}

/// Checks that every relation atom and predicate application matches the
/// given signature and registry.
pub fn check_names(e: &Expr, sig: &Signature, preds: &Registry) -> Result<()> {
    fn formula(f: &Formula, sig: &Signature, preds: &Registry) -> Result<()> {
        match f {
            Formula::Bool(_) | Formula::Eq(..) | Formula::Dist(..) => Ok(()),
            Formula::Atom(r, vs) => match sig.arity(r) {
                None => Err(Error::UnknownRelation(r.clone())),
                Some(a) if a != vs.len() => Err(Error::Arity {
                    name: r.clone(),
                    expected: a,
                    found: vs.len(),
                }),
                Some(_) => Ok(()),
            },
            Formula::Not(a) | Formula::Exists(_, a) => formula(a, sig, preds),
            Formula::Or(a, b) => {
                formula(a, sig, preds)?;
                formula(b, sig, preds)
            }
            Formula::Pred(p, ts) => {
                let pred = preds.get(p).ok_or_else(|| Error::UnknownPredicate(p.clone()))?;
                if pred.arity != ts.len() {
                    return Err(Error::Arity {
                        name: p.clone(),
                        expected: pred.arity,
                        found: ts.len(),
                    });
                }
                ts.iter().try_for_each(|t| term(t, sig, preds))
            }
        }
    }
    fn term(t: &Term, sig: &Signature, preds: &Registry) -> Result<()> {
        match t {
            Term::Int(_) => Ok(()),
            Term::Count(vs, body) => {
                for (i, v) in vs.iter().enumerate() {
                    if vs[..i].contains(v) {
                        return Err(Error::Input(format!("variable `{v}` counted twice")));
                    }
                }
                formula(body, sig, preds)
            }
            Term::Add(a, b) | Term::Mul(a, b) => {
                term(a, sig, preds)?;
                term(b, sig, preds)
            }
        }
    }
    match e {
        Expr::Formula(f) => formula(f, sig, preds),
        Expr::Term(t) => term(t, sig, preds),
    }
}

/// Relation symbols used by an expression, with their arities.
pub fn signature_of(e: &Expr) -> Result<Signature> {
    fn formula(f: &Formula, sig: &mut Signature) -> Result<()> {
        match f {
            Formula::Bool(_) | Formula::Eq(..) | Formula::Dist(..) => Ok(()),
            Formula::Atom(r, vs) => match sig.arity(r) {
                Some(a) if a != vs.len() => Err(Error::Arity {
                    name: r.clone(),
                    expected: a,
                    found: vs.len(),
                }),
                _ => {
                    sig.insert(r.clone(), vs.len());
                    Ok(())
                }
            },
            Formula::Not(a) | Formula::Exists(_, a) => formula(a, sig),
            Formula::Or(a, b) => {
                formula(a, sig)?;
                formula(b, sig)
            }
            Formula::Pred(_, ts) => ts.iter().try_for_each(|t| term(t, sig)),
        }
    }
    fn term(t: &Term, sig: &mut Signature) -> Result<()> {
        match t {
            Term::Int(_) => Ok(()),
            Term::Count(_, body) => formula(body, sig),
            Term::Add(a, b) | Term::Mul(a, b) => {
                term(a, sig)?;
                term(b, sig)
            }
        }
    }
    let mut sig = Signature::new();
    match e {
        Expr::Formula(f) => formula(f, &mut sig)?,
        Expr::Term(t) => term(t, &mut sig)?,
    }
    Ok(sig)
}

/// Whether the formula contains counting terms or predicate applications.
pub fn has_counting(f: &Formula) -> bool {
    match f {
        Formula::Bool(_) | Formula::Eq(..) | Formula::Atom(..) | Formula::Dist(..) => false,
        Formula::Not(a) | Formula::Exists(_, a) => has_counting(a),
        Formula::Or(a, b) => has_counting(a) || has_counting(b),
        Formula::Pred(..) => true,
    }
}

/// Largest distance-atom bound in a formula (0 if none).
pub fn max_dist_bound(f: &Formula) -> u32 {
    match f {
        Formula::Dist(_, _, d) => *d,
        Formula::Bool(_) | Formula::Eq(..) | Formula::Atom(..) => 0,
        Formula::Not(a) | Formula::Exists(_, a) => max_dist_bound(a),
        Formula::Or(a, b) => max_dist_bound(a).max(max_dist_bound(b)),
        Formula::Pred(_, ts) => ts.iter().map(max_dist_bound_term).max().unwrap_or(0),
    }
}

fn max_dist_bound_term(t: &Term) -> u32 {
    match t {
        Term::Int(_) => 0,
        Term::Count(_, b) => max_dist_bound(b),
        Term::Add(a, b) | Term::Mul(a, b) => max_dist_bound_term(a).max(max_dist_bound_term(b)),
    }
}
