//! Tokenizer and recursive-descent parser for the expression grammar.

use num_bigint::BigInt;

use super::ast::{Expr, Formula, Query, Term, Var};
use super::predicates::Registry;
use crate::error::{Error, Result};
use crate::structures::Signature;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Bang,
    Bar,
    Amp,
    Arrow,
    Plus,
    Star,
    Hash,
    Le,
    Ge,
}

/// Splits text into tokens, each paired with its byte offset.
pub fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = |n: u8| bytes.get(i + 1) == Some(&n);
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'=' => Tok::Eq,
            b'!' => Tok::Bang,
            b'|' => Tok::Bar,
            b'&' => Tok::Amp,
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b'#' => Tok::Hash,
            b'-' if two(b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'<' if two(b'=') => {
                i += 1;
                Tok::Le
            }
            b'>' if two(b'=') => {
                i += 1;
                Tok::Ge
            }
            b'-' | b'0'..=b'9' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if c == b'-' && j == i + 1 {
                    return Err(Error::Syntax {
                        pos: i,
                        msg: "expected digits after `-`".into(),
                    });
                }
                let value: BigInt = text[i..j].parse().map_err(|_| Error::Syntax {
                    pos: i,
                    msg: "bad integer literal".into(),
                })?;
                i = j;
                out.push((start, Tok::Int(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i + 1;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                out.push((start, Tok::Ident(text[i..j].to_string())));
                i = j;
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap_or('?')),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

const KEYWORDS: [&str; 5] = ["exists", "forall", "dist", "true", "false"];

/// Parser state. Relation names are checked against `sig` when one is
/// given; identifiers registered in `preds` are predicate names.
pub struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    sig: Option<&'a Signature>,
    preds: &'a Registry,
}

impl<'a> Parser<'a> {
    pub fn new(text: &str, sig: Option<&'a Signature>, preds: &'a Registry) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            end: text.len(),
            sig,
            preds,
        })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn var(&mut self) -> Result<Var> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected a variable"),
        }
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            self.err("unexpected trailing input")
        } else {
            Ok(())
        }
    }

    pub fn parse_expr(mut self) -> Result<Expr> {
        let e = self.unit(true)?;
        self.finish()?;
        Ok(e)
    }

    pub fn parse_query(mut self) -> Result<Query> {
        self.expect(Tok::LParen, "`(` opening the query head")?;
        let mut out_vars = Vec::new();
        let mut out_terms = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let is_var = matches!(self.peek(), Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()))
                    && matches!(self.peek_at(1), Some(Tok::Comma) | Some(Tok::RParen));
                if is_var {
                    if !out_terms.is_empty() {
                        return self.err("output variables must precede output terms");
                    }
                    out_vars.push(self.var()?);
                } else {
                    out_terms.push(self.term()?);
                }
                match self.next() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected `,` or `)` in query head");
                    }
                }
            }
        } else {
            self.pos += 1;
        }
        self.expect(Tok::Dot, "`.` after the query head")?;
        let body = self.formula()?;
        self.finish()?;
        Ok(Query {
            out_vars,
            out_terms,
            body,
        })
    }

    fn formula(&mut self) -> Result<Formula> {
        let at = self.offset();
        match self.unit(true)? {
            Expr::Formula(f) => Ok(f),
            Expr::Term(_) => Err(Error::Syntax {
                pos: at,
                msg: "expected a formula, found a term".into(),
            }),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let at = self.offset();
        match self.unit(false)? {
            Expr::Term(t) => Ok(t),
            Expr::Formula(_) => Err(Error::Syntax {
                pos: at,
                msg: "expected a term, found a formula".into(),
            }),
        }
    }

    fn unit(&mut self, allow_geq: bool) -> Result<Expr> {
        let e = self.primary()?;
        if let Expr::Term(t) = &e {
            if allow_geq && self.peek() == Some(&Tok::Ge) {
                self.pos += 1;
                match self.next() {
                    Some(Tok::Int(i)) if i == BigInt::from(1) => {
                        return Ok(Expr::Formula(Formula::geq1(t.clone())));
                    }
                    _ => {
                        self.pos -= 1;
                        return self.err("only `>= 1` comparisons are supported");
                    }
                }
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            None => self.err("unexpected end of input"),
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(Formula::not(self.formula()?).into())
            }
            Some(Tok::Int(i)) => {
                self.pos += 1;
                Ok(Term::Int(i).into())
            }
            Some(Tok::Hash) => {
                self.pos += 1;
                self.expect(Tok::LParen, "`(` after `#`")?;
                let mut vars = vec![self.var()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    vars.push(self.var()?);
                }
                self.expect(Tok::RParen, "`)` closing the counted variables")?;
                for (i, v) in vars.iter().enumerate() {
                    if vars[..i].contains(v) {
                        return self.err(format!("variable `{v}` counted twice"));
                    }
                }
                self.expect(Tok::Dot, "`.` after the counted variables")?;
                let body = self.formula()?;
                Ok(Term::Count(vars, Box::new(body)).into())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let first = self.unit(true)?;
                let op = self.next();
                let out = match (op, first) {
                    (Some(Tok::RParen), e) => return Ok(e),
                    (Some(Tok::Bar), Expr::Formula(a)) => Formula::or(a, self.formula()?).into(),
                    (Some(Tok::Amp), Expr::Formula(a)) => Formula::and(a, self.formula()?).into(),
                    (Some(Tok::Arrow), Expr::Formula(a)) => Formula::implies(a, self.formula()?).into(),
                    (Some(Tok::Plus), Expr::Term(a)) => Term::add(a, self.term()?).into(),
                    (Some(Tok::Star), Expr::Term(a)) => Term::mul(a, self.term()?).into(),
                    _ => {
                        self.pos -= 1;
                        return self.err("expected a binary operator matching the left operand");
                    }
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(out)
            }
            Some(Tok::Ident(name)) => self.ident(name),
            Some(_) => self.err("unexpected token"),
        }
    }

    fn ident(&mut self, name: String) -> Result<Expr> {
        match name.as_str() {
            "true" => {
                self.pos += 1;
                return Ok(Formula::tt().into());
            }
            "false" => {
                self.pos += 1;
                return Ok(Formula::ff().into());
            }
            "exists" | "forall" => {
                self.pos += 1;
                let v = self.var()?;
                self.expect(Tok::Dot, "`.` after the quantified variable")?;
                let body = self.formula()?;
                return Ok(if name == "exists" {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
                .into());
            }
            "dist" if self.peek_at(1) == Some(&Tok::LParen) => {
                self.pos += 2;
                let x = self.var()?;
                self.expect(Tok::Comma, "`,`")?;
                let y = self.var()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Le, "`<=` after dist(..)")?;
                let at = self.offset();
                let d = match self.next() {
                    Some(Tok::Int(i)) => i,
                    _ => {
                        return Err(Error::Syntax {
                            pos: at,
                            msg: "expected a distance bound".into(),
                        })
                    }
                };
                let d: u32 = d.try_into().map_err(|_| Error::Syntax {
                    pos: at,
                    msg: "distance bound must be a non-negative 32-bit integer".into(),
                })?;
                return Ok(Formula::Dist(x, y, d).into());
            }
            _ => {}
        }
        match self.peek_at(1) {
            Some(Tok::LParen) => {
                let at = self.offset();
                self.pos += 2;
                if let Some(pred) = self.preds.get(&name) {
                    let arity = pred.arity;
                    let mut args = vec![self.term()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)` closing the predicate arguments")?;
                    if args.len() != arity {
                        return Err(Error::Arity {
                            name,
                            expected: arity,
                            found: args.len(),
                        });
                    }
                    return Ok(Formula::Pred(name, args).into());
                }
                let mut vars = Vec::new();
                if self.peek() != Some(&Tok::RParen) {
                    vars.push(self.var()?);
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        vars.push(self.var()?);
                    }
                }
                self.expect(Tok::RParen, "`)` closing the relation arguments")?;
                if let Some(sig) = self.sig {
                    match sig.arity(&name) {
                        None => {
                            let _ = at;
                            return Err(Error::UnknownRelation(name));
                        }
                        Some(a) if a != vars.len() => {
                            return Err(Error::Arity {
                                name,
                                expected: a,
                                found: vars.len(),
                            })
                        }
                        _ => {}
                    }
                }
                Ok(Formula::Atom(name, vars).into())
            }
            Some(Tok::Eq) => {
                let x = self.var()?;
                self.pos += 1;
                let y = self.var()?;
                Ok(Formula::Eq(x, y).into())
            }
            _ => self.err(format!("unexpected identifier `{name}`")),
        }
    }
}

/// Parses a formula or term.
pub fn parse_expr(text: &str, sig: Option<&Signature>, preds: &Registry) -> Result<Expr> {
    Parser::new(text, sig, preds)?.parse_expr()
}

pub fn parse_formula(text: &str, sig: Option<&Signature>, preds: &Registry) -> Result<Formula> {
    match parse_expr(text, sig, preds)? {
        Expr::Formula(f) => Ok(f),
        Expr::Term(_) => Err(Error::Syntax {
            pos: 0,
            msg: "expected a formula, found a term".into(),
        }),
    }
}

pub fn parse_term(text: &str, sig: Option<&Signature>, preds: &Registry) -> Result<Term> {
    match parse_expr(text, sig, preds)? {
        Expr::Term(t) => Ok(t),
        Expr::Formula(_) => Err(Error::Syntax {
            pos: 0,
            msg: "expected a term, found a formula".into(),
        }),
    }
}

pub fn parse_query(text: &str, sig: Option<&Signature>, preds: &Registry) -> Result<Query> {
    Parser::new(text, sig, preds)?.parse_query()
}
