//! Reference evaluator: a direct implementation of the semantics, used as
//! ground truth by the rest of the crate.
//!
//! Counting iterates over `A^k`, skipping subtrees as soon as a
//! quantifier-free conjunct over the already-bound variables fails.
//! Results of counting terms, predicate applications and existential
//! subformulas with at most three free variables are memoized per call.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::logic::analysis::{free_vars, free_vars_term};
use crate::logic::{Formula, Query, Registry, Term, Var};
use crate::structures::{Elem, Signature, Structure};

/// Value of an expression: formulas evaluate to booleans, terms to integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(i) => Some(i),
            Value::Bool(_) => None,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Bool(b) => Json::Bool(*b),
            Value::Int(i) => int_json(i),
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
        }
    }
}

/// JSON number when exactly representable as a double, decimal string otherwise.
pub fn int_json(i: &BigInt) -> Json {
    const LIMIT: i64 = 1 << 53;
    match i.to_i64() {
        Some(v) if (-LIMIT..=LIMIT).contains(&v) => Json::from(v),
        _ => Json::String(i.to_string()),
    }
}

type MemoKey = (usize, u8, [Elem; 3]);

/// A structure plus a partial assignment of variables.
pub struct Interpretation<'a> {
    pub structure: &'a Structure,
    pub assignment: Vec<(Var, Elem)>,
}

struct Ctx<'a> {
    a: &'a Structure,
    preds: &'a Registry,
    memo: RefCell<HashMap<MemoKey, Value>>,
    free: RefCell<HashMap<usize, Rc<Vec<Var>>>>,
    tuple: RefCell<Vec<Elem>>,
}

type Env<'e> = Vec<(&'e str, Elem)>;

fn lookup(env: &Env<'_>, x: &str) -> Result<Elem> {
    env.iter()
        .rev()
        .find(|(n, _)| *n == x)
        .map(|(_, e)| *e)
        .ok_or_else(|| Error::Unassigned(x.to_string()))
}

impl<'a> Ctx<'a> {
    fn new(a: &'a Structure, preds: &'a Registry) -> Self {
        Ctx {
            a,
            preds,
            memo: RefCell::new(HashMap::new()),
            free: RefCell::new(HashMap::new()),
            tuple: RefCell::new(Vec::new()),
        }
    }

    fn free_of(&self, addr: usize, compute: impl FnOnce() -> Vec<Var>) -> Rc<Vec<Var>> {
        self.free
            .borrow_mut()
            .entry(addr)
            .or_insert_with(|| Rc::new(compute()))
            .clone()
    }

    fn key(&self, addr: usize, free: &[Var], env: &Env<'_>) -> Result<Option<MemoKey>> {
        if free.len() > 3 {
            return Ok(None);
        }
        let mut vals = [0; 3];
        for (i, v) in free.iter().enumerate() {
            vals[i] = lookup(env, v)?;
        }
        Ok(Some((addr, free.len() as u8, vals)))
    }

    fn formula<'e>(&self, f: &'e Formula, env: &mut Env<'e>) -> Result<bool> {
        match f {
            Formula::Bool(b) => Ok(*b),
            Formula::Eq(x, y) => Ok(lookup(env, x)? == lookup(env, y)?),
            Formula::Atom(r, vs) => {
                let rel = self.a.relation(r).ok_or_else(|| Error::UnknownRelation(r.clone()))?;
                if rel.arity() != vs.len() {
                    return Err(Error::Arity {
                        name: r.clone(),
                        expected: rel.arity(),
                        found: vs.len(),
                    });
                }
                let mut t = self.tuple.borrow_mut();
                t.clear();
                for v in vs {
                    t.push(lookup(env, v)?);
                }
                Ok(rel.contains(&t))
            }
            Formula::Dist(x, y, d) => {
                let (x, y) = (lookup(env, x)?, lookup(env, y)?);
                Ok(self.a.dist(&[x], y)?.at_most(*d))
            }
            Formula::Not(g) => Ok(!self.formula(g, env)?),
            Formula::Or(g, h) => Ok(self.formula(g, env)? || self.formula(h, env)?),
            Formula::Exists(x, body) => {
                let addr = f as *const Formula as usize;
                let free = self.free_of(addr, || free_vars(f).into_iter().collect());
                let key = self.key(addr, &free, env)?;
                if let Some(k) = key {
                    if let Some(Value::Bool(b)) = self.memo.borrow().get(&k) {
                        return Ok(*b);
                    }
                }
                let mut found = false;
                for a in self.a.elements() {
                    env.push((x, a));
                    let r = self.formula(body, env);
                    env.pop();
                    if r? {
                        found = true;
                        break;
                    }
                }
                if let Some(k) = key {
                    self.memo.borrow_mut().insert(k, Value::Bool(found));
                }
                Ok(found)
            }
            Formula::Pred(p, ts) => {
                let addr = f as *const Formula as usize;
                let free = self.free_of(addr, || free_vars(f).into_iter().collect());
                let key = self.key(addr, &free, env)?;
                if let Some(k) = key {
                    if let Some(Value::Bool(b)) = self.memo.borrow().get(&k) {
                        return Ok(*b);
                    }
                }
                let mut args = Vec::with_capacity(ts.len());
                for t in ts {
                    args.push(self.term(t, env)?);
                }
                let v = self.preds.call(p, &args)?;
                if let Some(k) = key {
                    self.memo.borrow_mut().insert(k, Value::Bool(v));
                }
                Ok(v)
            }
        }
    }

    fn term<'e>(&self, t: &'e Term, env: &mut Env<'e>) -> Result<BigInt> {
        match t {
            Term::Int(i) => Ok(i.clone()),
            Term::Add(a, b) => Ok(self.term(a, env)? + self.term(b, env)?),
            Term::Mul(a, b) => Ok(self.term(a, env)? * self.term(b, env)?),
            Term::Count(vs, body) => {
                let addr = t as *const Term as usize;
                let free = self.free_of(addr, || free_vars_term(t).into_iter().collect());
                let key = self.key(addr, &free, env)?;
                if let Some(k) = key {
                    if let Some(Value::Int(i)) = self.memo.borrow().get(&k) {
                        return Ok(i.clone());
                    }
                }
                let plan = prune_plan(vs, body);
                let mut count = 0u64;
                self.count_rec(vs, body, &plan, 0, env, &mut count)?;
                let v = BigInt::from(count);
                if let Some(k) = key {
                    self.memo.borrow_mut().insert(k, Value::Int(v.clone()));
                }
                Ok(v)
            }
        }
    }

    fn count_rec<'e>(
        &self,
        vs: &'e [Var],
        body: &'e Formula,
        plan: &[Vec<(bool, &'e Formula)>],
        level: usize,
        env: &mut Env<'e>,
        count: &mut u64,
    ) -> Result<()> {
        if level == vs.len() {
            if self.formula(body, env)? {
                *count += 1;
            }
            return Ok(());
        }
        'elems: for a in self.a.elements() {
            env.push((&vs[level], a));
            for &(positive, c) in &plan[level] {
                match self.formula(c, env) {
                    Ok(v) if v != positive => {
                        env.pop();
                        continue 'elems;
                    }
                    Ok(_) => {}
                    Err(e) => {
                        env.pop();
                        return Err(e);
                    }
                }
            }
            let r = self.count_rec(vs, body, plan, level + 1, env, count);
            env.pop();
            r?;
        }
        Ok(())
    }
}

/// For each counted variable, the quantifier-free conjuncts that can be
/// checked once that variable (and all earlier ones) are bound.
fn prune_plan<'e>(vs: &'e [Var], body: &'e Formula) -> Vec<Vec<(bool, &'e Formula)>> {
    let mut plan = vec![Vec::new(); vs.len()];
    for c in body.conjuncts() {
        if !is_quantifier_free(c.formula) {
            continue;
        }
        let fv = free_vars(c.formula);
        let last = vs.iter().rposition(|v| fv.contains(v));
        if let Some(level) = last {
            plan[level].push((c.positive, c.formula));
        }
    }
    plan
}

fn is_quantifier_free(f: &Formula) -> bool {
    match f {
        Formula::Bool(_) | Formula::Eq(..) | Formula::Atom(..) | Formula::Dist(..) => true,
        Formula::Not(a) => is_quantifier_free(a),
        Formula::Or(a, b) => is_quantifier_free(a) && is_quantifier_free(b),
        Formula::Exists(..) | Formula::Pred(..) => false,
    }
}

fn env_of<'a>(i: &'a Interpretation<'_>) -> Vec<(&'a str, Elem)> {
    i.assignment.iter().map(|(v, e)| (v.as_str(), *e)).collect()
}

/// Truth value of a formula under an interpretation.
pub fn eval_formula(f: &Formula, i: &Interpretation<'_>, preds: &Registry) -> Result<bool> {
    check_assignment(i)?;
    let ctx = Ctx::new(i.structure, preds);
    let mut env = env_of(i);
    ctx.formula(f, &mut env)
}

/// Value of a term under an interpretation.
pub fn eval_term(t: &Term, i: &Interpretation<'_>, preds: &Registry) -> Result<BigInt> {
    check_assignment(i)?;
    let ctx = Ctx::new(i.structure, preds);
    let mut env = env_of(i);
    ctx.term(t, &mut env)
}

/// Evaluates a sentence or ground term on a structure.
pub fn eval(e: &crate::logic::Expr, a: &Structure, preds: &Registry) -> Result<Value> {
    let i = Interpretation {
        structure: a,
        assignment: Vec::new(),
    };
    match e {
        crate::logic::Expr::Formula(f) => eval_formula(f, &i, preds).map(Value::Bool),
        crate::logic::Expr::Term(t) => eval_term(t, &i, preds).map(Value::Int),
    }
}

fn check_assignment(i: &Interpretation<'_>) -> Result<()> {
    for (_, e) in &i.assignment {
        if *e as usize >= i.structure.len() {
            return Err(Error::UnknownElement(format!("#{e}")));
        }
    }
    Ok(())
}

/// Rows of a query result: element identifiers followed by integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub rows: Vec<(Vec<String>, Vec<BigInt>)>,
}

impl QueryResult {
    pub fn to_json(&self) -> Json {
        Json::Array(
            self.rows
                .iter()
                .map(|(es, ns)| {
                    Json::Array(
                        es.iter()
                            .map(|e| Json::String(e.clone()))
                            .chain(ns.iter().map(int_json))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Checks the shape required of a query: distinct output variables, body
/// free variables equal to them, and terms using only them.
pub fn check_query(q: &Query) -> Result<()> {
    for (i, v) in q.out_vars.iter().enumerate() {
        if q.out_vars[..i].contains(v) {
            return Err(Error::Input(format!("output variable `{v}` repeated")));
        }
    }
    let fv = free_vars(&q.body);
    let outs: std::collections::BTreeSet<Var> = q.out_vars.iter().cloned().collect();
    if fv != outs {
        return Err(Error::Input(format!(
            "free variables of the body ({}) must be exactly the output variables ({})",
            fv.into_iter().collect::<Vec<_>>().join(", "),
            q.out_vars.join(", ")
        )));
    }
    for t in &q.out_terms {
        if let Some(v) = free_vars_term(t).into_iter().find(|v| !outs.contains(v)) {
            return Err(Error::Input(format!("output term uses non-output variable `{v}`")));
        }
    }
    Ok(())
}

/// All rows `(a1..ak, n1..nl)` with `A |= body[a]` and `n_j = t_j[a]`, in
/// lexicographic order of the element identifiers.
pub fn eval_query(q: &Query, a: &Structure, preds: &Registry) -> Result<QueryResult> {
    check_query(q)?;
    let ctx = Ctx::new(a, preds);
    let plan = prune_plan(&q.out_vars, &q.body);
    let mut rows = Vec::new();
    let mut env: Env<'_> = Vec::new();
    query_rec(&ctx, q, &plan, &mut env, &mut rows)?;
    Ok(QueryResult { rows })
}

fn query_rec<'e>(
    ctx: &Ctx<'_>,
    q: &'e Query,
    plan: &[Vec<(bool, &'e Formula)>],
    env: &mut Env<'e>,
    rows: &mut Vec<(Vec<String>, Vec<BigInt>)>,
) -> Result<()> {
    let level = env.len();
    if level == q.out_vars.len() {
        if ctx.formula(&q.body, env)? {
            let mut nums = Vec::new();
            for t in &q.out_terms {
                nums.push(ctx.term(t, env)?);
            }
            let names = env.iter().map(|(_, e)| ctx.a.name(*e).to_string()).collect();
            rows.push((names, nums));
        }
        return Ok(());
    }
    'elems: for e in ctx.a.elements() {
        env.push((&q.out_vars[level], e));
        for &(positive, c) in &plan[level] {
            if ctx.formula(c, env)? != positive {
                env.pop();
                continue 'elems;
            }
        }
        let r = query_rec(ctx, q, plan, env, rows);
        env.pop();
        r?;
    }
    Ok(())
}

/// Result of removing free variables with singleton marker relations.
#[derive(Clone, Debug)]
pub struct Tilde {
    /// `exists x1..xk (X1(x1) & .. & Xk(xk) & body)`
    pub sentence: Formula,
    /// Output terms with every top-level count body wrapped likewise.
    pub terms: Vec<Term>,
    pub signature: Signature,
    /// Marker relation names, in output-variable order.
    pub markers: Vec<String>,
}

impl Tilde {
    /// Expands `a` by the markers `X_i = {tuple[i]}`.
    pub fn expand(&self, a: &Structure, tuple: &[Elem]) -> Result<Structure> {
        if tuple.len() != self.markers.len() {
            return Err(Error::Input("tuple length differs from the number of markers".into()));
        }
        a.expand(
            self.markers
                .iter()
                .zip(tuple)
                .map(|(m, &e)| (m.clone(), 1, vec![vec![e]]))
                .collect(),
        )
    }
}

/// Fresh marker names `X1, X2, ...`, extended with underscores on clashes.
pub fn marker_names(k: usize, sig: &Signature) -> Vec<String> {
    let mut prefix = "X".to_string();
    while (1..=k).any(|i| sig.contains(&format!("{prefix}{i}"))) {
        prefix.push('_');
    }
    (1..=k).map(|i| format!("{prefix}{i}")).collect()
}

/// Replaces the output variables of a query by unary singleton markers.
pub fn eliminate_free_vars(q: &Query, sig: &Signature) -> Result<Tilde> {
    check_query(q)?;
    let markers = marker_names(q.out_vars.len(), sig);
    let mut signature = sig.clone();
    for m in &markers {
        signature.insert(m.clone(), 1);
    }
    let guard = |vars: &[&Var]| {
        Formula::and_all(vars.iter().map(|v| {
            let i = q.out_vars.iter().position(|o| o == *v).unwrap();
            Formula::atom(markers[i].clone(), [(*v).clone()])
        }))
    };
    let all: Vec<&Var> = q.out_vars.iter().collect();
    let sentence = Formula::exists_all(&q.out_vars, Formula::and(guard(&all), q.body.clone()));
    let terms = q.out_terms.iter().map(|t| wrap_term(t, &q.out_vars, &guard)).collect();
    Ok(Tilde {
        sentence: crate::logic::simplify(&sentence),
        terms,
        signature,
        markers,
    })
}

fn wrap_term(t: &Term, outs: &[Var], guard: &dyn Fn(&[&Var]) -> Formula) -> Term {
    match t {
        Term::Int(_) => t.clone(),
        Term::Add(a, b) => Term::add(wrap_term(a, outs, guard), wrap_term(b, outs, guard)),
        Term::Mul(a, b) => Term::mul(wrap_term(a, outs, guard), wrap_term(b, outs, guard)),
        Term::Count(vs, body) => {
            let fv = free_vars_term(t);
            let used: Vec<&Var> = outs.iter().filter(|v| fv.contains(*v)).collect();
            if used.is_empty() {
                return t.clone();
            }
            let owned: Vec<Var> = used.iter().map(|v| (*v).clone()).collect();
            let body = Formula::exists_all(&owned, Formula::and(guard(&used), (**body).clone()));
            Term::Count(vs.clone(), Box::new(body))
        }
    }
}

/// Same as [`eliminate_free_vars`], but the output variables are added to
/// the counted tuple instead of being existentially quantified. The two
/// forms agree on expansions with singleton markers.
pub fn eliminate_free_vars_flat(q: &Query, sig: &Signature) -> Result<Tilde> {
    let mut tilde = eliminate_free_vars(q, sig)?;
    let markers = tilde.markers.clone();
    let guard = |vars: &[&Var]| {
        Formula::and_all(vars.iter().map(|v| {
            let i = q.out_vars.iter().position(|o| o == *v).unwrap();
            Formula::atom(markers[i].clone(), [(*v).clone()])
        }))
    };
    tilde.terms = q.out_terms.iter().map(|t| flat_term(t, &q.out_vars, &guard)).collect();
    Ok(tilde)
}

fn flat_term(t: &Term, outs: &[Var], guard: &dyn Fn(&[&Var]) -> Formula) -> Term {
    match t {
        Term::Int(_) => t.clone(),
        Term::Add(a, b) => Term::add(flat_term(a, outs, guard), flat_term(b, outs, guard)),
        Term::Mul(a, b) => Term::mul(flat_term(a, outs, guard), flat_term(b, outs, guard)),
        Term::Count(vs, body) => {
            let fv = free_vars_term(t);
            let used: Vec<&Var> = outs.iter().filter(|v| fv.contains(*v)).collect();
            if used.is_empty() {
                return t.clone();
            }
            let mut all: Vec<Var> = used.iter().map(|v| (*v).clone()).collect();
            all.extend(vs.iter().cloned());
            Term::Count(all, Box::new(Formula::and(guard(&used), (**body).clone())))
        }
    }
}

/// `1` for true, `0` for false.
pub fn indicator(b: bool) -> BigInt {
    if b {
        BigInt::one()
    } else {
        BigInt::zero()
    }
}
