//! Slot-indexed evaluation of counting-free formulas, with quantifiers
//! ranging over candidates drawn from their guards.

use crate::error::{Error, Result};
use crate::logic::{Formula, Var};
use crate::structures::{BfsScratch, Elem, Relation, Structure};

#[derive(Clone, Debug)]
enum Source {
    Equal(usize),
    Adjacent(usize),
    Ball(usize, u32),
    Members { rel: usize, pos: usize },
    All,
}

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Eq(usize, usize),
    Atom(usize, Vec<usize>),
    Dist(usize, usize, u32),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists {
        slot: usize,
        source: Source,
        body: Box<Node>,
    },
}

/// A formula compiled against one structure.
#[derive(Debug)]
pub struct Compiled<'s> {
    structure: &'s Structure,
    rels: Vec<&'s Relation>,
    root: Node,
    slots: usize,
    free: usize,
}

struct Compiler<'s> {
    structure: &'s Structure,
    rels: Vec<(&'s str, &'s Relation)>,
    scope: Vec<(Var, usize)>,
    slots: usize,
}

impl<'s> Compiler<'s> {
    fn slot(&self, x: &str) -> Result<usize> {
        self.scope
            .iter()
            .rev()
            .find(|(v, _)| v == x)
            .map(|(_, s)| *s)
            .ok_or_else(|| Error::Unassigned(x.to_string()))
    }

    fn rel(&mut self, name: &str, arity: usize) -> Result<usize> {
        if let Some(i) = self.rels.iter().position(|(n, _)| *n == name) {
            return Ok(i);
        }
        let (n, r) = self
            .structure
            .relations()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
        if r.arity() != arity {
            return Err(Error::Arity {
                name: name.to_string(),
                expected: r.arity(),
                found: arity,
            });
        }
        self.rels.push((n, r));
        Ok(self.rels.len() - 1)
    }

    fn compile(&mut self, f: &Formula) -> Result<Node> {
        if f.as_and().is_some() {
            let mut parts = Vec::new();
            for c in flatten_and(f) {
                parts.push(self.compile(c)?);
            }
            return Ok(Node::And(parts));
        }
        Ok(match f {
            Formula::Bool(b) => Node::Const(*b),
            Formula::Eq(x, y) => Node::Eq(self.slot(x)?, self.slot(y)?),
            Formula::Atom(r, vs) => {
                let rel = self.rel(r, vs.len())?;
                let slots = vs.iter().map(|v| self.slot(v)).collect::<Result<_>>()?;
                Node::Atom(rel, slots)
            }
            Formula::Dist(x, y, d) => Node::Dist(self.slot(x)?, self.slot(y)?, *d),
            Formula::Not(a) => Node::Not(Box::new(self.compile(a)?)),
            Formula::Or(..) => {
                let mut parts = Vec::new();
                for c in flatten_or(f) {
                    parts.push(self.compile(c)?);
                }
                Node::Or(parts)
            }
            Formula::Exists(z, body) => {
                let source = self.source(z, body)?;
                let slot = self.slots;
                self.slots += 1;
                self.scope.push((z.clone(), slot));
                let body = self.compile(body);
                self.scope.pop();
                Node::Exists {
                    slot,
                    source,
                    body: Box::new(body?),
                }
            }
            Formula::Pred(..) => {
                return Err(Error::Unsupported(format!(
                    "`{f}`: counting is not supported by the compiled evaluator"
                )))
            }
        })
    }

    fn source(&mut self, z: &str, body: &Formula) -> Result<Source> {
        let mut best = (5u32, u32::MAX, Source::All);
        let mut offer = |rank: u32, tie: u32, s: Source| {
            if (rank, tie) < (best.0, best.1) {
                best = (rank, tie, s);
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
                        if let Ok(s) = self.slot(other) {
                            offer(0, 0, Source::Equal(s));
                        }
                    }
                }
                Formula::Atom(r, vs) if vs.iter().any(|v| v == z) => {
                    let mut found = false;
                    for u in vs.iter().filter(|u| *u != z) {
                        if let Ok(s) = self.slot(u) {
                            offer(1, 0, Source::Adjacent(s));
                            found = true;
                        }
                    }
                    if !found && vs.iter().all(|v| v == z) {
                        let rel = self.rel(r, vs.len())?;
                        let len = self.rels[rel].1.len() as u32;
                        offer(3, len, Source::Members { rel, pos: 0 });
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
                        if let Ok(s) = self.slot(other) {
                            offer(2, *d, Source::Ball(s, *d));
                        }
                    }
                }
                _ => {}
            }
        }
        Ok(best.2)
    }
}

fn flatten_and(f: &Formula) -> Vec<&Formula> {
    match f.as_and() {
        Some((a, b)) => {
            let mut out = flatten_and(a);
            out.extend(flatten_and(b));
            out
        }
        None => vec![f],
    }
}

fn flatten_or(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::Or(a, b) => {
            let mut out = flatten_or(a);
            out.extend(flatten_or(b));
            out
        }
        _ => vec![f],
    }
}

impl<'s> Compiled<'s> {
    /// Compiles `f`; its free variables must be among `free`, which occupy
    /// slots `0..free.len()` in that order.
    pub fn new(f: &Formula, free: &[Var], structure: &'s Structure) -> Result<Self> {
        let mut c = Compiler {
            structure,
            rels: Vec::new(),
            scope: free.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect(),
            slots: free.len(),
        };
        let root = c.compile(f)?;
        Ok(Compiled {
            structure,
            rels: c.rels.into_iter().map(|(_, r)| r).collect(),
            root,
            slots: c.slots,
            free: free.len(),
        })
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator {
            env: vec![0; self.slots],
            scratch: BfsScratch::new(self.structure.len()),
        }
    }

    /// Truth value under the given values of the free variables.
    pub fn eval(&self, ev: &mut Evaluator, values: &[Elem]) -> bool {
        debug_assert_eq!(values.len(), self.free);
        ev.env[..values.len()].copy_from_slice(values);
        self.node(&self.root, ev)
    }

    fn node(&self, n: &Node, ev: &mut Evaluator) -> bool {
        match n {
            Node::Const(b) => *b,
            Node::Eq(a, b) => ev.env[*a] == ev.env[*b],
            Node::Atom(r, slots) => {
                let mut t = [0 as Elem; 8];
                if slots.len() <= 8 {
                    for (i, &s) in slots.iter().enumerate() {
                        t[i] = ev.env[s];
                    }
                    self.rels[*r].contains(&t[..slots.len()])
                } else {
                    let t: Vec<Elem> = slots.iter().map(|&s| ev.env[s]).collect();
                    self.rels[*r].contains(&t)
                }
            }
            Node::Dist(a, b, d) => {
                let (x, y) = (ev.env[*a], ev.env[*b]);
                ev.scratch.within(self.structure.gaifman_graph(), x, y, *d)
            }
            Node::Not(a) => !self.node(a, ev),
            Node::And(parts) => parts.iter().all(|p| self.node(p, ev)),
            Node::Or(parts) => parts.iter().any(|p| self.node(p, ev)),
            Node::Exists { slot, source, body } => {
                let g = self.structure.gaifman_graph();
                match source {
                    Source::Equal(s) => {
                        ev.env[*slot] = ev.env[*s];
                        self.node(body, ev)
                    }
                    Source::Adjacent(s) => {
                        let u = ev.env[*s];
                        ev.env[*slot] = u;
                        if self.node(body, ev) {
                            return true;
                        }
                        g.neighbors(u).iter().any(|&w| {
                            ev.env[*slot] = w;
                            self.node(body, ev)
                        })
                    }
                    Source::Ball(s, d) => {
                        let ball = ev.scratch.ball(g, &[ev.env[*s]], *d);
                        ball.into_iter().any(|(w, _)| {
                            ev.env[*slot] = w;
                            self.node(body, ev)
                        })
                    }
                    Source::Members { rel, pos } => self.rels[*rel].tuples().iter().any(|t| {
                        ev.env[*slot] = t[*pos];
                        self.node(body, ev)
                    }),
                    Source::All => self.structure.elements().any(|w| {
                        ev.env[*slot] = w;
                        self.node(body, ev)
                    }),
                }
            }
        }
    }
}

/// Per-thread evaluation state.
#[derive(Debug)]
pub struct Evaluator {
    env: Vec<Elem>,
    scratch: BfsScratch,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_formula, Interpretation};
    use crate::logic::{parse_formula, Registry};

    #[test]
    fn agrees_with_reference() {
        let mut b = Structure::builder().elements((0..7).map(|i| format!("v{i}")));
        for (x, y) in [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (6, 6)] {
            b.add_tuple("E", &[format!("v{x}"), format!("v{y}")]);
        }
        for i in [1, 4, 6] {
            b.add_tuple("P", &[format!("v{i}")]);
        }
        let a = b.build().unwrap();
        let preds = Registry::builtin();
        for s in [
            "exists z. (E(x, z) & P(z))",
            "forall z. (E(z, x) -> !P(z))",
            "exists z. (dist(x, z) <= 2 & (!P(z) & z = z))",
            "exists z. (P(z) & !E(z, x))",
            "exists z. (E(z, z) & dist(z, x) <= 0)",
            "(dist(x, y) <= 2 | exists z. (z = y & E(z, x)))",
            "exists z. exists w. (E(z, w) & (!z = x & !w = y))",
        ] {
            let f = parse_formula(s, None, &preds).unwrap();
            let vars = vec!["x".to_string(), "y".to_string()];
            let c = Compiled::new(&f, &vars, &a).unwrap();
            let mut ev = c.evaluator();
            for x in a.elements() {
                for y in a.elements() {
                    let i = Interpretation {
                        structure: &a,
                        assignment: vec![("x".into(), x), ("y".into(), y)],
                    };
                    assert_eq!(c.eval(&mut ev, &[x, y]), eval_formula(&f, &i, &preds).unwrap(), "{s}");
                }
            }
        }
    }
}
