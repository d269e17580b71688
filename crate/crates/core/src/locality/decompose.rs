//! cl-decompositions: a layered sequence of fresh unary and 0-ary symbols
//! defined by numerical predicates over cl-terms, followed by a final
//! propositional formula or ground cl-term.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use super::clterm::{BasicClTerm, ClBuilder, ClKind, ClPoly, DEFAULT_WIDTH_CAP};
use super::engine::ClEngine;
use crate::error::{Error, Result};
use crate::eval::{eval_formula, Interpretation, Value};
use crate::logic::analysis::{check_names, free_vars, free_vars_term};
use crate::logic::{assign_atoms, simplify, Expr, Formula, Registry, Term, Var};
use crate::structures::{Elem, Signature, Structure};

/// `symbol(y1) :<-> pred(args)` or `symbol() :<-> pred(args)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub symbol: String,
    pub arity: usize,
    pub pred: String,
    pub args: Vec<ClPoly>,
    pub layer: usize,
}

impl Definition {
    /// The defining formula, with free variable `y1` for unary symbols.
    pub fn formula(&self) -> Formula {
        Formula::pred(self.pred.clone(), self.args.iter().map(ClPoly::to_term).collect())
    }

    pub fn radius(&self) -> u32 {
        self.args.iter().map(ClPoly::max_radius).max().unwrap_or(0)
    }

    pub fn width(&self) -> usize {
        self.args.iter().map(ClPoly::max_width).max().unwrap_or(0)
    }

    pub fn basics(&self) -> Vec<std::sync::Arc<BasicClTerm>> {
        let mut out: Vec<_> = self.args.iter().flat_map(ClPoly::basics).collect();
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Final {
    /// Propositional formula over 0-ary symbols and 0-ary relations.
    Sentence(Formula),
    Term(ClPoly),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClDecomposition {
    pub signature: Signature,
    /// Layer `i` holds the symbols defined over `signature` and the symbols
    /// of earlier layers.
    pub layers: Vec<Vec<Definition>>,
    pub last: Final,
}

impl ClDecomposition {
    pub fn max_radius(&self) -> u32 {
        let defs = self.layers.iter().flatten().map(Definition::radius).max().unwrap_or(0);
        match &self.last {
            Final::Term(p) => defs.max(p.max_radius()),
            Final::Sentence(_) => defs,
        }
    }

    pub fn max_width(&self) -> usize {
        let defs = self.layers.iter().flatten().map(Definition::width).max().unwrap_or(0);
        match &self.last {
            Final::Term(p) => defs.max(p.max_width()),
            Final::Sentence(_) => defs,
        }
    }

    /// Every basic cl-term, in layer order.
    pub fn basics(&self) -> Vec<std::sync::Arc<BasicClTerm>> {
        let mut out: Vec<_> = self.layers.iter().flatten().flat_map(|d| d.basics()).collect();
        if let Final::Term(p) = &self.last {
            out.extend(p.basics());
        }
        out.dedup();
        out
    }

    pub fn to_json(&self) -> Json {
        let layers: Vec<Json> = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, defs)| {
                json!({
                    "layer": i + 1,
                    "symbols": defs.iter().map(|d| json!({
                        "symbol": d.symbol,
                        "arity": d.arity,
                        "free_variable": if d.arity == 1 { Json::from("y1") } else { Json::Null },
                        "definition": d.formula().to_string(),
                        "radius": d.radius(),
                        "width": d.width(),
                        "args": d.args.iter().map(ClPoly::to_json).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let last = match &self.last {
            Final::Sentence(f) => json!({"kind": "sentence", "formula": f.to_string()}),
            Final::Term(p) => json!({
                "kind": "term",
                "term": p.to_term().to_string(),
                "radius": p.max_radius(),
                "width": p.max_width(),
                "polynomial": p.to_json(),
            }),
        };
        json!({
            "layers": layers,
            "final": last,
            "radius": self.max_radius(),
            "width": self.max_width(),
        })
    }
}

struct Decomposer<'p> {
    preds: &'p Registry,
    taken: Signature,
    builder: ClBuilder,
    defs: Vec<Definition>,
    by_key: HashMap<String, usize>,
}

fn hash8(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(4).map(|b| format!("{b:02x}")).collect()
}

impl Decomposer<'_> {
    fn layer_of_formula(&self, f: &Formula) -> usize {
        match f {
            Formula::Atom(r, _) => self
                .by_key
                .values()
                .map(|&i| &self.defs[i])
                .find(|d| &d.symbol == r)
                .map_or(0, |d| d.layer),
            Formula::Not(a) | Formula::Exists(_, a) => self.layer_of_formula(a),
            Formula::Or(a, b) => self.layer_of_formula(a).max(self.layer_of_formula(b)),
            _ => 0,
        }
    }

    fn define(&mut self, arity: usize, pred: &str, args: Vec<ClPoly>) -> Result<String> {
        let key = format!(
            "{arity}:{pred}({})",
            args.iter()
                .map(|a| a.to_term().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        if let Some(&i) = self.by_key.get(&key) {
            return Ok(self.defs[i].symbol.clone());
        }
        let layer = 1 + args
            .iter()
            .flat_map(ClPoly::basics)
            .map(|b| self.layer_of_formula(&b.body))
            .max()
            .unwrap_or(0);
        let prefix = if arity == 1 { "U" } else { "B" };
        let mut symbol = format!("{prefix}_{}", hash8(&key));
        while self.taken.contains(&symbol) {
            symbol.push('_');
        }
        self.taken.insert(symbol.clone(), arity);
        self.by_key.insert(key, self.defs.len());
        self.defs.push(Definition {
            symbol: symbol.clone(),
            arity,
            pred: pred.to_string(),
            args,
            layer,
        });
        Ok(symbol)
    }

    /// Replaces predicate applications by atoms over fresh symbols.
    fn lift(&mut self, f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::Not(a) => Formula::not(self.lift(a)?),
            Formula::Or(a, b) => Formula::or(self.lift(a)?, self.lift(b)?),
            Formula::Exists(x, a) => Formula::exists(x.clone(), self.lift(a)?),
            Formula::Pred(p, ts) => {
                let free: Vec<Var> = free_vars(f).into_iter().collect();
                if free.len() > 1 {
                    return Err(Error::Unsupported(format!(
                        "`{f}` has {} free variables ({}); only one is allowed in a predicate application",
                        free.len(),
                        free.join(", ")
                    )));
                }
                let z = free.first();
                let args = ts.iter().map(|t| self.term(t, z)).collect::<Result<Vec<_>>>()?;
                let arity = usize::from(z.is_some());
                let symbol = self.define(arity, p, args)?;
                Formula::atom(symbol, z.cloned())
            }
            other => other.clone(),
        })
    }

    fn term(&mut self, t: &Term, z: Option<&Var>) -> Result<ClPoly> {
        Ok(match t {
            Term::Int(i) => ClPoly::constant(i.clone()),
            Term::Add(a, b) => self.term(a, z)?.add(&self.term(b, z)?),
            Term::Mul(a, b) => self.term(a, z)?.mul(&self.term(b, z)?),
            Term::Count(ys, body) => {
                let body = self.lift(body)?;
                let body = self.gates(&body)?;
                let free = free_vars_term(&Term::count(ys.clone(), body.clone()));
                if ys.is_empty() {
                    return Err(Error::Unsupported(format!("`{t}` counts over no variables")));
                }
                match free.iter().next() {
                    None => self.builder.count_term(None, ys, &body)?,
                    Some(x) if Some(x) == z => self.builder.count_term(Some(x), ys, &body)?,
                    Some(x) => return Err(Error::Internal(format!("unexpected free variable `{x}` in `{t}`"))),
                }
            }
        })
    }

    /// Replaces closed quantified subformulas by propositional formulas
    /// over 0-ary symbols.
    fn gates(&mut self, f: &Formula) -> Result<Formula> {
        if matches!(f, Formula::Exists(..)) && free_vars(f).is_empty() {
            return self.sentence(f);
        }
        Ok(match f {
            Formula::Not(a) => Formula::not(self.gates(a)?),
            Formula::Or(a, b) => Formula::or(self.gates(a)?, self.gates(b)?),
            Formula::Exists(x, a) => Formula::exists(x.clone(), self.gates(a)?),
            other => other.clone(),
        })
    }

    /// A lifted sentence as a propositional formula over 0-ary symbols:
    /// each maximal quantifier block `exists x1..xk. θ` becomes the symbol
    /// for `#(x1..xk). θ >= 1`.
    fn sentence(&mut self, f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::Not(a) => Formula::not(self.sentence(a)?),
            Formula::Or(a, b) => Formula::or(self.sentence(a)?, self.sentence(b)?),
            Formula::Exists(..) => {
                let mut vars = Vec::new();
                let mut body = f;
                while let Formula::Exists(x, inner) = body {
                    if !vars.contains(x) {
                        vars.push(x.clone());
                    }
                    body = inner;
                }
                let body = self.gates(body)?;
                // variables shadowed by an inner quantifier are vacuous outside it
                let free = free_vars(&body);
                vars.retain(|v| free.contains(v));
                if vars.is_empty() {
                    return Ok(body);
                }
                let poly = self.builder.count_term(None, &vars, &body)?;
                Formula::atom(self.define(0, "geq1", vec![poly])?, Vec::<Var>::new())
            }
            other => other.clone(),
        })
    }
}

/// Builds a cl-decomposition of a sentence or ground term.
pub fn cl_decompose(e: &Expr, sig: &Signature, preds: &Registry) -> Result<ClDecomposition> {
    cl_decompose_with(e, sig, preds, DEFAULT_WIDTH_CAP)
}

pub fn cl_decompose_with(e: &Expr, sig: &Signature, preds: &Registry, width_cap: usize) -> Result<ClDecomposition> {
    check_names(e, sig, preds)?;
    let free = crate::logic::free_vars_expr(e);
    if !free.is_empty() {
        return Err(Error::Input(format!(
            "expected a sentence or ground term, found free variables {}",
            free.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let mut d = Decomposer {
        preds,
        taken: sig.clone(),
        builder: ClBuilder::new(width_cap),
        defs: Vec::new(),
        by_key: HashMap::new(),
    };
    let last = match e {
        Expr::Formula(f) => {
            let lifted = d.lift(f)?;
            Final::Sentence(simplify(&d.sentence(&lifted)?))
        }
        Expr::Term(t) => Final::Term(d.term(t, None)?),
    };
    for def in &d.defs {
        if d.preds.get(&def.pred).is_none() {
            return Err(Error::UnknownPredicate(def.pred.clone()));
        }
    }
    let depth = d.defs.iter().map(|x| x.layer).max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth];
    for def in d.defs {
        layers[def.layer - 1].push(def);
    }
    Ok(ClDecomposition {
        signature: sig.clone(),
        layers,
        last,
    })
}

/// Evaluates each sentence once on `a` and substitutes the results into
/// `f`. Returns the indices of the true sentences and the simplified rest.
pub fn dispatch_sentences(
    f: &Formula,
    sentences: &[Formula],
    a: &Structure,
    preds: &Registry,
) -> Result<(BTreeSet<usize>, Formula)> {
    let mut truth = Vec::with_capacity(sentences.len());
    let mut chosen = BTreeSet::new();
    for (j, s) in sentences.iter().enumerate() {
        let v = eval_formula(
            s,
            &Interpretation {
                structure: a,
                assignment: Vec::new(),
            },
            preds,
        )?;
        if v {
            chosen.insert(j);
        }
        truth.push(v);
    }
    let out = assign_atoms(f, &|g| sentences.iter().position(|s| s == g).map(|j| truth[j]));
    Ok((chosen, out))
}

/// Per-run statistics of [`eval_decomposition`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecompositionStats {
    pub basic_terms: usize,
    pub oracle_calls: usize,
}

#[derive(Default)]
struct Cache {
    unary: HashMap<BasicClTerm, Vec<i128>>,
    ground: HashMap<BasicClTerm, i128>,
}

impl Cache {
    fn fill(&mut self, engine: &dyn ClEngine, s: &Structure, p: &ClPoly, stats: &mut DecompositionStats) -> Result<()> {
        for b in p.basics() {
            match b.kind {
                ClKind::Unary if !self.unary.contains_key(&b) => {
                    stats.basic_terms += 1;
                    self.unary.insert((*b).clone(), engine.unary(s, &b)?);
                }
                ClKind::Ground if !self.ground.contains_key(&b) => {
                    stats.basic_terms += 1;
                    self.ground.insert((*b).clone(), engine.ground(s, &b)?);
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Evaluates a decomposition layer by layer: each layer's symbols are
/// computed from cl-term values and oracle calls, and added to the structure.
pub fn eval_decomposition(
    d: &ClDecomposition,
    a: &Structure,
    engine: &dyn ClEngine,
    preds: &Registry,
) -> Result<(Value, DecompositionStats)> {
    let mut stats = DecompositionStats::default();
    let mut cur = a.clone();
    let mut cache = Cache::default();
    let overflow = || Error::Limit("cl-term value exceeds 128-bit integers".into());
    for layer in &d.layers {
        let mut extra = Vec::new();
        for def in layer {
            for p in &def.args {
                cache.fill(engine, &cur, p, &mut stats)?;
            }
            let mut tuples: Vec<Vec<Elem>> = Vec::new();
            if def.arity == 0 {
                let args = def
                    .args
                    .iter()
                    .map(|p| p.eval_i128(&|b| cache.ground[b]).map(BigInt::from).ok_or_else(overflow))
                    .collect::<Result<Vec<_>>>()?;
                stats.oracle_calls += 1;
                if preds.call(&def.pred, &args)? {
                    tuples.push(Vec::new());
                }
            } else {
                for x in cur.elements() {
                    let args = def
                        .args
                        .iter()
                        .map(|p| {
                            p.eval_i128(&|b| match b.kind {
                                ClKind::Unary => cache.unary[b][x as usize],
                                ClKind::Ground => cache.ground[b],
                            })
                            .map(BigInt::from)
                            .ok_or_else(overflow)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    stats.oracle_calls += 1;
                    if preds.call(&def.pred, &args)? {
                        tuples.push(vec![x]);
                    }
                }
            }
            extra.push((def.symbol.clone(), def.arity, tuples));
        }
        cur = cur.expand(extra)?;
    }
    let value = match &d.last {
        Final::Sentence(f) => {
            let g = assign_atoms(f, &|g| match g {
                Formula::Atom(r, vs) if vs.is_empty() => Some(cur.holds(r, &[])),
                _ => None,
            });
            match simplify(&g) {
                Formula::Bool(b) => Value::Bool(b),
                other => return Err(Error::Internal(format!("final formula did not reduce: {other}"))),
            }
        }
        Final::Term(p) => {
            cache.fill(engine, &cur, p, &mut stats)?;
            Value::Int(BigInt::from(p.eval_i128(&|b| cache.ground[b]).ok_or_else(overflow)?))
        }
    };
    Ok((value, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval;
    use crate::locality::DirectEngine;
    use crate::logic::parse_expr;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut b = Structure::builder()
            .elements((0..n).map(|i| format!("v{i}")))
            .relation("E", 2);
        for &(x, y) in edges {
            b.add_tuple("E", &[format!("v{x}"), format!("v{y}")]);
            b.add_tuple("E", &[format!("v{y}"), format!("v{x}")]);
        }
        b.build().unwrap()
    }

    fn check(text: &str, a: &Structure) -> ClDecomposition {
        let preds = Registry::builtin();
        let e = parse_expr(text, None, &preds).unwrap();
        let d = cl_decompose(&e, &a.signature(), &preds).unwrap();
        let (got, _) = eval_decomposition(&d, a, &DirectEngine, &preds).unwrap();
        assert_eq!(got, eval(&e, a, &preds).unwrap(), "{text}");
        d
    }

    #[test]
    fn edge_count() {
        let a = graph(5, &[(0, 1), (1, 2), (3, 4)]);
        let d = check("#(x, y). E(x, y)", &a);
        assert!(d.layers.is_empty());
        assert!(matches!(d.last, Final::Term(_)));
    }

    #[test]
    fn prime_degree() {
        let a = graph(6, &[(0, 1), (0, 2), (0, 3), (3, 4), (4, 5), (5, 3)]);
        let d = check("exists y. prime(#(z). E(y, z))", &a);
        assert_eq!(d.layers.len(), 2);
        assert_eq!(d.layers[0][0].arity, 1);
        assert_eq!(d.layers[1][0].arity, 0);
        check("forall y. (#(z). E(y, z) >= 1 | y = y)", &a);
        check("prime((#(x). x = x + #(x, y). E(x, y)))", &a);
        check(
            "exists x. (prime(#(y). (E(x, y) & exists z. (E(y, z) & !z = x))) & !exists w. (E(w, w)))",
            &a,
        );
    }

    #[test]
    fn nested_layers() {
        let a = graph(7, &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5)]);
        let d = check("exists x. prime(#(y). (E(x, y) & prime(#(z). E(y, z))))", &a);
        assert_eq!(d.layers.len(), 3);
        assert!(d.layers[..2].iter().flatten().all(|x| x.arity == 1));
    }

    #[test]
    fn rejects_two_free_variables() {
        let preds = Registry::builtin();
        let e = parse_expr(
            "exists x. exists y. (E(x, y) & eq(#(z). E(x, z), #(z). E(y, z)))",
            None,
            &preds,
        )
        .unwrap();
        let a = graph(2, &[(0, 1)]);
        assert!(matches!(
            cl_decompose(&e, &a.signature(), &preds),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dispatch() {
        let a = graph(3, &[(0, 1)]);
        let preds = Registry::builtin();
        let s1 = crate::logic::parse_formula("exists x. exists y. E(x, y)", None, &preds).unwrap();
        let s2 = Formula::not(s1.clone());
        let f = Formula::or(s1.clone(), Formula::atom("P", ["x"]));
        let (j, rest) = dispatch_sentences(&f, &[s1.clone(), s2], &a, &preds).unwrap();
        assert_eq!(j, BTreeSet::from([0]));
        assert_eq!(rest, Formula::tt());
        let (j, rest) = dispatch_sentences(&f, &[], &a, &preds).unwrap();
        assert!(j.is_empty());
        assert_eq!(rest, simplify(&f));
    }
}
