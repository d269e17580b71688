use std::collections::BTreeSet;

use num_bigint::BigInt;

/// Variable name.
pub type Var = String;

/// Formulas of FOC(P), plus distance atoms and Boolean constants.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Bool(bool),
    Eq(Var, Var),
    Atom(String, Vec<Var>),
    /// `dist(x, y) <= d`
    Dist(Var, Var, u32),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Pred(String, Vec<Term>),
}

/// Counting terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(BigInt),
    Count(Vec<Var>, Box<Formula>),
    Add(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
}

/// Either a formula or a term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Formula(Formula),
    Term(Term),
}

/// An FO₁C(P) query `(x1..xk, t1..tl) . body`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub out_vars: Vec<Var>,
    pub out_terms: Vec<Term>,
    pub body: Formula,
}

/// One entry of a flattened conjunction: `positive == false` means the
/// conjunct is the negation of `formula`.
#[derive(Clone, Copy, Debug)]
pub struct Conjunct<'a> {
    pub positive: bool,
    pub formula: &'a Formula,
}

impl Formula {
    pub fn tt() -> Self {
        Formula::Bool(true)
    }

    pub fn ff() -> Self {
        Formula::Bool(false)
    }

    pub fn eq(x: impl Into<Var>, y: impl Into<Var>) -> Self {
        Formula::Eq(x.into(), y.into())
    }

    pub fn atom<S: Into<Var>>(rel: impl Into<String>, vars: impl IntoIterator<Item = S>) -> Self {
        Formula::Atom(rel.into(), vars.into_iter().map(Into::into).collect())
    }

    pub fn dist(x: impl Into<Var>, y: impl Into<Var>, d: u32) -> Self {
        Formula::Dist(x.into(), y.into(), d)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// `a & b`, encoded as `!(!a | !b)`.
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
    }

    /// `a -> b`, encoded as `!a | b`.
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn exists(x: impl Into<Var>, body: Formula) -> Self {
        Formula::Exists(x.into(), Box::new(body))
    }

    /// `forall x. body`, encoded as `!exists x. !body`.
    pub fn forall(x: impl Into<Var>, body: Formula) -> Self {
        Formula::not(Formula::exists(x, Formula::not(body)))
    }

    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Pred(name.into(), args)
    }

    /// `t >= 1`.
    pub fn geq1(t: Term) -> Self {
        Formula::Pred("geq1".into(), vec![t])
    }

    /// Conjunction of a list; empty list gives `true`.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::tt(),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; empty list gives `false`.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::ff(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn exists_all(vars: &[Var], body: Formula) -> Self {
        vars.iter().rev().fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    /// Recognises the encoding `!(!a | !b)` and returns `(a, b)`.
    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Not(inner) = self {
            if let Formula::Or(a, b) = inner.as_ref() {
                if let (Formula::Not(a), Formula::Not(b)) = (a.as_ref(), b.as_ref()) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Recognises `!exists x. !body`.
    pub fn as_forall(&self) -> Option<(&Var, &Formula)> {
        if let Formula::Not(inner) = self {
            if let Formula::Exists(x, body) = inner.as_ref() {
                if let Formula::Not(b) = body.as_ref() {
                    return Some((x, b));
                }
            }
        }
        None
    }

    /// Top-level conjuncts, looking through the `!(!a | !b)` encoding and
    /// double negations.
    pub fn conjuncts(&self) -> Vec<Conjunct<'_>> {
        let mut out = Vec::new();
        collect_conjuncts(self, true, &mut out);
        out
    }

    pub fn is_const(&self) -> Option<bool> {
        match self {
            Formula::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

fn collect_conjuncts<'a>(f: &'a Formula, positive: bool, out: &mut Vec<Conjunct<'a>>) {
    match (f, positive) {
        (Formula::Not(inner), true) => match inner.as_ref() {
            Formula::Or(a, b) => {
                collect_conjuncts(a, false, out);
                collect_conjuncts(b, false, out);
            }
            other => collect_conjuncts(other, false, out),
        },
        (Formula::Not(inner), false) => collect_conjuncts(inner, true, out),
        (Formula::Bool(b), p) if *b == p => {}
        _ => out.push(Conjunct { positive, formula: f }),
    }
}

impl Term {
    pub fn int(i: impl Into<BigInt>) -> Self {
        Term::Int(i.into())
    }

    pub fn count<S: Into<Var>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Self {
        Term::Count(vars.into_iter().map(Into::into).collect(), Box::new(body))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Term, b: Term) -> Self {
        Term::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Term, b: Term) -> Self {
        Term::Mul(Box::new(a), Box::new(b))
    }
}

impl Expr {
    pub fn as_formula(&self) -> Option<&Formula> {
        match self {
            Expr::Formula(f) => Some(f),
            Expr::Term(_) => None,
        }
    }

    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Expr::Term(t) => Some(t),
            Expr::Formula(_) => None,
        }
    }
}

impl From<Formula> for Expr {
    fn from(f: Formula) -> Self {
        Expr::Formula(f)
    }
}

impl From<Term> for Expr {
    fn from(t: Term) -> Self {
        Expr::Term(t)
    }
}

/// Renames free variables according to `pairs`. Bound variables whose name
/// equals a rename target are renamed to fresh names first, so no capture
/// can happen.
pub fn rename_free(f: &Formula, pairs: &[(Var, Var)]) -> Formula {
    let mut ctx = Renamer::new(pairs);
    collect_all_vars_formula(f, &mut ctx.avoid);
    ctx.formula(f)
}

/// Term version of [`rename_free`].
pub fn rename_free_term(t: &Term, pairs: &[(Var, Var)]) -> Term {
    let mut ctx = Renamer::new(pairs);
    collect_all_vars_term(t, &mut ctx.avoid);
    ctx.term(t)
}

struct Renamer<'a> {
    pairs: &'a [(Var, Var)],
    // innermost binding last; `Some(new)` when the bound variable was renamed
    scope: Vec<(Var, Option<Var>)>,
    avoid: BTreeSet<Var>,
}

impl<'a> Renamer<'a> {
    fn new(pairs: &'a [(Var, Var)]) -> Self {
        let mut avoid = BTreeSet::new();
        for (a, b) in pairs {
            avoid.insert(a.clone());
            avoid.insert(b.clone());
        }
        Renamer {
            pairs,
            scope: Vec::new(),
            avoid,
        }
    }

    fn var(&self, x: &str) -> Var {
        if let Some((_, r)) = self.scope.iter().rev().find(|(n, _)| n == x) {
            return r.clone().unwrap_or_else(|| x.to_string());
        }
        self.pairs
            .iter()
            .find(|(from, _)| from == x)
            .map(|(_, to)| to.clone())
            .unwrap_or_else(|| x.to_string())
    }

    fn bind(&mut self, x: &str) -> Var {
        if self.pairs.iter().any(|(_, to)| to == x) {
            let mut i = 1;
            let fresh = loop {
                let cand = format!("{x}_{i}");
                if !self.avoid.contains(&cand) {
                    break cand;
                }
                i += 1;
            };
            self.avoid.insert(fresh.clone());
            self.scope.push((x.to_string(), Some(fresh.clone())));
            fresh
        } else {
            self.scope.push((x.to_string(), None));
            x.to_string()
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Bool(b) => Formula::Bool(*b),
            Formula::Eq(x, y) => Formula::Eq(self.var(x), self.var(y)),
            Formula::Atom(n, vs) => Formula::Atom(n.clone(), vs.iter().map(|v| self.var(v)).collect()),
            Formula::Dist(x, y, d) => Formula::Dist(self.var(x), self.var(y), *d),
            Formula::Not(a) => Formula::not(self.formula(a)),
            Formula::Or(a, b) => {
                let a = self.formula(a);
                Formula::or(a, self.formula(b))
            }
            Formula::Exists(x, body) => {
                let bound = self.bind(x);
                let body = self.formula(body);
                self.scope.pop();
                Formula::exists(bound, body)
            }
            Formula::Pred(p, ts) => Formula::Pred(p.clone(), ts.iter().map(|t| self.term(t)).collect()),
        }
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Int(i) => Term::Int(i.clone()),
            Term::Count(vs, body) => {
                let bound: Vec<Var> = vs.iter().map(|v| self.bind(v)).collect();
                let body = self.formula(body);
                for _ in vs {
                    self.scope.pop();
                }
                Term::Count(bound, Box::new(body))
            }
            Term::Add(a, b) => {
                let a = self.term(a);
                Term::add(a, self.term(b))
            }
            Term::Mul(a, b) => {
                let a = self.term(a);
                Term::mul(a, self.term(b))
            }
        }
    }
}

pub(crate) fn collect_all_vars_formula(f: &Formula, out: &mut BTreeSet<Var>) {
    match f {
        Formula::Bool(_) => {}
        Formula::Eq(x, y) | Formula::Dist(x, y, _) => {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        Formula::Atom(_, vs) => out.extend(vs.iter().cloned()),
        Formula::Not(a) => collect_all_vars_formula(a, out),
        Formula::Or(a, b) => {
            collect_all_vars_formula(a, out);
            collect_all_vars_formula(b, out);
        }
        Formula::Exists(x, a) => {
            out.insert(x.clone());
            collect_all_vars_formula(a, out);
        }
        Formula::Pred(_, ts) => ts.iter().for_each(|t| collect_all_vars_term(t, out)),
    }
}

pub(crate) fn collect_all_vars_term(t: &Term, out: &mut BTreeSet<Var>) {
    match t {
        Term::Int(_) => {}
        Term::Count(vs, body) => {
            out.extend(vs.iter().cloned());
            collect_all_vars_formula(body, out);
        }
        Term::Add(a, b) | Term::Mul(a, b) => {
            collect_all_vars_term(a, out);
            collect_all_vars_term(b, out);
        }
    }
}
