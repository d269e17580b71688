//! Canonical rendering. Conjunction, universal quantification and `t >= 1`
//! are printed in their sugared form, so `parse(render(e)) == e`.

use std::fmt::{self, Display, Write};

use super::ast::{Expr, Formula, Query, Term};

impl Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((a, b)) = self.as_and() {
            return write!(f, "({a} & {b})");
        }
        if let Some((x, body)) = self.as_forall() {
            return write!(f, "forall {x}. {body}");
        }
        match self {
            Formula::Bool(true) => f.write_str("true"),
            Formula::Bool(false) => f.write_str("false"),
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::Atom(r, vs) => write!(f, "{r}({})", vs.join(", ")),
            Formula::Dist(x, y, d) => write!(f, "dist({x}, {y}) <= {d}"),
            Formula::Not(a) => write!(f, "!{a}"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Exists(x, body) => write!(f, "exists {x}. {body}"),
            Formula::Pred(p, ts) if p == "geq1" && ts.len() == 1 => write!(f, "{} >= 1", ts[0]),
            Formula::Pred(p, ts) => {
                write!(f, "{p}(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_char(')')
            }
        }
    }
}

impl Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(i) => write!(f, "{i}"),
            Term::Count(vs, body) => write!(f, "#({}). {body}", vs.join(", ")),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Mul(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Formula(x) => x.fmt(f),
            Expr::Term(x) => x.fmt(f),
        }
    }
}

impl Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('(')?;
        let mut first = true;
        for v in &self.out_vars {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            f.write_str(v)?;
        }
        for t in &self.out_terms {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{t}")?;
        }
        write!(f, "). {}", self.body)
    }
}
