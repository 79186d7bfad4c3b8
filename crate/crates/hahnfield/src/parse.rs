//! Expression parser for series arithmetic: rational literals, spine
//! monomials with rational powers, the four arithmetic operators, and the
//! function forms log, exp, d, ai, int. Precedence is the usual one:
//! function application, then ^, then * /, then + - with unary minus.

use std::sync::Arc;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coeff::Coeff;
use crate::el::{
    derive_el, exp_el, integrate_el, log_el, ElContext, ElExponent, ElSeries,
};
use crate::error::{Error, Result};
use crate::hahn::{Exponent, Spine, SpineIndex};
use crate::integrate::monomial_ai;
use crate::series::Series;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Rational(Coeff),
    Monomial(Exponent),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Log(Box<Expr>),
    Exp(Box<Expr>),
    Derive(Box<Expr>),
    Ai(Box<Expr>),
    Integrate(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let col = i + 1;
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                toks.push((Tok::Int(text[start..i].to_string()), col));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(text[start..i].to_string()), col));
            }
            b'+' => {
                toks.push((Tok::Plus, col));
                i += 1;
            }
            b'-' => {
                toks.push((Tok::Minus, col));
                i += 1;
            }
            b'*' => {
                toks.push((Tok::Star, col));
                i += 1;
            }
            b'/' => {
                toks.push((Tok::Slash, col));
                i += 1;
            }
            b'^' => {
                toks.push((Tok::Caret, col));
                i += 1;
            }
            b'(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            b'{' => {
                toks.push((Tok::LBrace, col));
                i += 1;
            }
            b'}' => {
                toks.push((Tok::RBrace, col));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            b':' => {
                toks.push((Tok::Colon, col));
                i += 1;
            }
            other => {
                return Err(Error::Parse {
                    col,
                    msg: format!("unexpected character '{}'", other as char),
                })
            }
        }
    }
    Ok(Lexer { toks })
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    spine: &'a Arc<Spine>,
    end_col: usize,
}

pub fn parse_expression(text: &str, spine: &Arc<Spine>) -> Result<Expr> {
    let lexer = lex(text)?;
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
        spine,
        end_col: text.len() + 1,
    };
    let e = p.expr()?;
    if let Some((_, col)) = p.toks.get(p.pos) {
        return Err(Error::Parse {
            col: *col,
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_col)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let col = self.col();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::Parse {
                col,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn fail<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse {
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !matches!(self.peek(), Some(Tok::Caret)) {
            return Ok(base);
        }
        self.bump();
        // A monomial takes a rational power directly; anything else only an
        // integer power.
        if let Expr::Monomial(e) = &base {
            let q = self.exponent_rational()?;
            return Ok(Expr::Monomial(e.scale(&q)));
        }
        let col = self.col();
        let q = self.exponent_rational()?;
        if !q.is_integer() {
            return Err(Error::Parse {
                col,
                msg: "fractional power of a non-monomial".into(),
            });
        }
        let n = q.to_integer().to_i64().ok_or(Error::Parse {
            col,
            msg: "power out of range".into(),
        })?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    /// `2`, `-2`, `(1/2)`, `(-1/2)` after a caret.
    fn exponent_rational(&mut self) -> Result<Coeff> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(-self.exponent_rational()?)
            }
            Some(Tok::Int(_)) => {
                let Some(Tok::Int(s)) = self.bump() else { unreachable!() };
                Ok(parse_int(&s, self.col())?)
            }
            Some(Tok::LParen) => {
                self.bump();
                let q = self.signed_fraction()?;
                self.expect(Tok::RParen, "')' after exponent")?;
                Ok(q)
            }
            _ => self.fail("expected an exponent"),
        }
    }

    /// `p`, `-p`, `p/q`, `-p/q`.
    fn signed_fraction(&mut self) -> Result<Coeff> {
        let negative = if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        let col = self.col();
        let Some(Tok::Int(n)) = self.bump() else {
            return Err(Error::Parse {
                col,
                msg: "expected a number".into(),
            });
        };
        let mut q = parse_int(&n, col)?;
        if matches!(self.peek(), Some(Tok::Slash)) {
            self.bump();
            let col = self.col();
            let Some(Tok::Int(d)) = self.bump() else {
                return Err(Error::Parse {
                    col,
                    msg: "expected a denominator".into(),
                });
            };
            let d = parse_int(&d, col)?;
            if d.is_zero() {
                return Err(Error::Parse {
                    col,
                    msg: "zero denominator".into(),
                });
            }
            q = q / d;
        }
        Ok(if negative { -q } else { q })
    }

    fn atom(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.bump();
                Ok(Expr::Rational(parse_int(&s, col)?))
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                match name.as_str() {
                    "log" | "exp" | "d" | "ai" | "int" => {
                        self.expect(Tok::LParen, "'(' after function name")?;
                        let arg = Box::new(self.expr()?);
                        self.expect(Tok::RParen, "')'")?;
                        Ok(match name.as_str() {
                            "log" => Expr::Log(arg),
                            "exp" => Expr::Exp(arg),
                            "d" => Expr::Derive(arg),
                            "ai" => Expr::Ai(arg),
                            _ => Expr::Integrate(arg),
                        })
                    }
                    "t" if matches!(self.peek(), Some(Tok::Caret)) => {
                        self.bump();
                        self.exponent_literal()
                    }
                    _ => match self.spine.index_of(&name) {
                        Some(idx) => Ok(Expr::Monomial(Exponent::single(idx, Coeff::one()))),
                        None => Err(Error::Parse {
                            col,
                            msg: format!("unknown monomial '{name}'"),
                        }),
                    },
                }
            }
            _ => self.fail("expected a value"),
        }
    }

    /// `t^(1,0,-2)` over finite spines, `t^{0:1, 3:-2}` over the naturals.
    fn exponent_literal(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.bump();
                let rank = match self.spine.rank() {
                    Some(r) => r,
                    None => return self.fail("tuple exponents need a finite spine"),
                };
                let mut entries = Vec::new();
                loop {
                    entries.push(self.signed_fraction()?);
                    match self.bump() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RParen) => break,
                        _ => return self.fail("expected ',' or ')'"),
                    }
                }
                if entries.len() != rank {
                    return self.fail(&format!("tuple must have {rank} entries"));
                }
                Ok(Expr::Monomial(Exponent::from_pairs(
                    entries.into_iter().enumerate(),
                )))
            }
            Some(Tok::LBrace) => {
                self.bump();
                let mut pairs = Vec::new();
                if matches!(self.peek(), Some(Tok::RBrace)) {
                    self.bump();
                    return Ok(Expr::Monomial(Exponent::zero()));
                }
                loop {
                    let col = self.col();
                    let Some(Tok::Int(idx)) = self.bump() else {
                        return Err(Error::Parse {
                            col,
                            msg: "expected a spine index".into(),
                        });
                    };
                    let idx: usize = idx.parse().map_err(|_| Error::Parse {
                        col,
                        msg: "spine index out of range".into(),
                    })?;
                    self.expect(Tok::Colon, "':'")?;
                    pairs.push((idx, self.signed_fraction()?));
                    match self.bump() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::RBrace) => break,
                        _ => return self.fail("expected ',' or '}'"),
                    }
                }
                let e = Exponent::from_pairs(pairs);
                self.spine.check_exponent(&e).map_err(|_| Error::Parse {
                    col: self.col(),
                    msg: "exponent index outside the spine".into(),
                })?;
                Ok(Expr::Monomial(e))
            }
            _ => self.fail("expected '(' or '{' after t^"),
        }
    }
}

fn parse_int(s: &str, col: usize) -> Result<Coeff> {
    let n: num_bigint::BigInt = s.parse().map_err(|_| Error::Parse {
        col,
        msg: "bad integer".into(),
    })?;
    Ok(Coeff::from_integer(n))
}

/// Evaluate in the tower with the context's budgets.
pub fn eval(expr: &Expr, ctx: &ElContext) -> Result<ElSeries> {
    let spine = ctx.field.spine().clone();
    Ok(match expr {
        Expr::Rational(c) => ElSeries::monomial(spine, ElExponent::zero(), c.clone()),
        Expr::Monomial(e) => {
            ctx.field.spine().check_exponent(e)?;
            ElSeries::monomial(spine, ElExponent::Base(e.clone()), Coeff::one())
        }
        Expr::Neg(a) => eval(a, ctx)?.neg(),
        Expr::Add(a, b) => eval(a, ctx)?.add(&eval(b, ctx)?, ctx)?,
        Expr::Sub(a, b) => eval(a, ctx)?.sub(&eval(b, ctx)?, ctx)?,
        Expr::Mul(a, b) => eval(a, ctx)?.mul(&eval(b, ctx)?, ctx)?,
        Expr::Div(a, b) => eval(a, ctx)?.mul(&eval(b, ctx)?.invert(ctx)?, ctx)?,
        Expr::Pow(a, n) => {
            let base = eval(a, ctx)?;
            let mut out = ElSeries::one(base.spine().clone());
            for _ in 0..n.unsigned_abs() {
                out = out.mul(&base, ctx)?;
            }
            if *n < 0 {
                out = out.invert(ctx)?;
            }
            out
        }
        Expr::Log(a) => log_el(&eval(a, ctx)?, ctx)?,
        Expr::Exp(a) => exp_el(&eval(a, ctx)?, ctx)?,
        Expr::Derive(a) => derive_el(&eval(a, ctx)?, ctx)?,
        Expr::Ai(a) => {
            let v = eval(a, ctx)?;
            if v.level() == 0 {
                ElSeries::from_series(monomial_ai(&v.to_series()?, ctx.field.derivation())?)
            } else {
                let r = integrate_el(&v, ctx)?;
                if r.iterations == 0 {
                    return Err(Error::NoAsymptoticIntegral("tower residual".into()));
                }
                r.value
            }
        }
        Expr::Integrate(a) => {
            let r = integrate_el(&eval(a, ctx)?, ctx)?;
            r.value.with_exact(r.exact)
        }
    })
}

/// Literal evaluator for field-config values: arithmetic only, at level 0.
pub fn eval_literal(expr: &Expr, spine: &Arc<Spine>, max_terms: u32) -> Result<Series> {
    Ok(match expr {
        Expr::Rational(c) => Series::constant(spine.clone(), c.clone()),
        Expr::Monomial(e) => {
            spine.check_exponent(e)?;
            Series::monomial(spine.clone(), e.clone(), Coeff::one())
        }
        Expr::Neg(a) => eval_literal(a, spine, max_terms)?.neg(),
        Expr::Add(a, b) => {
            eval_literal(a, spine, max_terms)?.add(&eval_literal(b, spine, max_terms)?)?
        }
        Expr::Sub(a, b) => {
            eval_literal(a, spine, max_terms)?.sub(&eval_literal(b, spine, max_terms)?)?
        }
        Expr::Mul(a, b) => {
            eval_literal(a, spine, max_terms)?.mul(&eval_literal(b, spine, max_terms)?)?
        }
        Expr::Div(a, b) => eval_literal(a, spine, max_terms)?
            .mul(&eval_literal(b, spine, max_terms)?.invert(max_terms)?)?,
        Expr::Pow(a, n) => {
            let base = eval_literal(a, spine, max_terms)?;
            let mut out = Series::one(spine.clone());
            for _ in 0..n.unsigned_abs() {
                out = out.mul(&base)?;
            }
            if *n < 0 {
                out = out.invert(max_terms)?;
            }
            out
        }
        _ => {
            return Err(Error::Config(
                "function calls are not allowed in field-config series".into(),
            ))
        }
    })
}
