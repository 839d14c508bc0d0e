//! Tokenizer shared by the expression front ends, and the parser for the
//! canonical text form of polynomials and rational functions.

use num_bigint::BigInt;
use num_traits::Zero;

use super::context::VarContext;
use super::poly::Poly;
use super::ratfun::RationalFunction;
use super::Q;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(Q),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        let tok = match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let lit = &text[start..i];
                out.push(Token {
                    tok: Tok::Num(
                        parse_decimal(lit).ok_or_else(|| Error::syntax(start, format!("bad number '{lit}'")))?,
                    ),
                    pos: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(text[start..i].to_string()), pos: start });
                continue;
            }
            _ => return Err(Error::syntax(start, format!("unexpected character '{}'", ch as char))),
        };
        out.push(Token { tok, pos: start });
        i += 1;
    }
    Ok(out)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `3.`.
fn parse_decimal(lit: &str) -> Option<Q> {
    let mut parts = lit.splitn(2, '.');
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(Q::new(n, d))
}

/// Cursor over a token stream with position-annotated errors.
pub struct Cursor<'a> {
    toks: &'a [Token],
    idx: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], text_len: usize) -> Self {
        Cursor { toks, idx: 0, end: text_len }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    pub fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |t| t.pos)
    }

    pub fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.idx).map(|t| &t.tok);
        self.idx += 1;
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(Error::syntax(self.pos(), format!("expected {what}")))
        }
    }

    pub fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    /// Integer exponent after `^` (an optional leading minus is allowed).
    pub fn exponent(&mut self) -> Result<i64> {
        let pos = self.pos();
        let neg = self.eat(&Tok::Minus);
        match self.next() {
            Some(Tok::Num(q)) if q.is_integer() => {
                let v: i64 = q.to_integer().try_into().map_err(|_| Error::syntax(pos, "exponent too large"))?;
                Ok(if neg { -v } else { v })
            }
            _ => Err(Error::syntax(pos, "expected integer exponent")),
        }
    }
}

/// Parses the canonical text form (any rational expression in the context's
/// variables) into a reduced rational function.
pub fn parse_rational_function(text: &str, ctx: &VarContext) -> Result<RationalFunction> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, text.len());
    let v = rf_expr(&mut cur, ctx)?;
    if !cur.at_end() {
        return Err(Error::syntax(cur.pos(), "unexpected trailing input"));
    }
    Ok(v)
}

pub fn parse_poly(text: &str, ctx: &VarContext) -> Result<Poly> {
    let f = parse_rational_function(text, ctx)?;
    if !f.is_polynomial() {
        return Err(Error::syntax(0, "expected a polynomial"));
    }
    Ok(f.num().clone())
}

fn rf_expr(cur: &mut Cursor, ctx: &VarContext) -> Result<RationalFunction> {
    let mut acc = rf_term(cur, ctx)?;
    loop {
        if cur.eat(&Tok::Plus) {
            acc = &acc + &rf_term(cur, ctx)?;
        } else if cur.eat(&Tok::Minus) {
            acc = &acc - &rf_term(cur, ctx)?;
        } else {
            return Ok(acc);
        }
    }
}

fn rf_term(cur: &mut Cursor, ctx: &VarContext) -> Result<RationalFunction> {
    let mut acc = rf_unary(cur, ctx)?;
    loop {
        if cur.eat(&Tok::Star) {
            acc = &acc * &rf_unary(cur, ctx)?;
        } else if cur.peek() == Some(&Tok::Slash) {
            let pos = cur.pos();
            cur.next();
            let d = rf_unary(cur, ctx)?;
            if d.is_zero() {
                return Err(Error::syntax(pos, "division by zero"));
            }
            acc = &acc / &d;
        } else {
            return Ok(acc);
        }
    }
}

fn rf_unary(cur: &mut Cursor, ctx: &VarContext) -> Result<RationalFunction> {
    if cur.eat(&Tok::Minus) {
        return Ok(-&rf_unary(cur, ctx)?);
    }
    if cur.eat(&Tok::Plus) {
        return rf_unary(cur, ctx);
    }
    rf_power(cur, ctx)
}

fn rf_power(cur: &mut Cursor, ctx: &VarContext) -> Result<RationalFunction> {
    let base = rf_primary(cur, ctx)?;
    if !cur.eat(&Tok::Caret) {
        return Ok(base);
    }
    let pos = cur.pos();
    let e = cur.exponent()?;
    if e >= 0 {
        let p = RationalFunction::new(base.num().pow(e as u32), base.den().pow(e as u32))?;
        Ok(p)
    } else {
        if base.is_zero() {
            return Err(Error::syntax(pos, "negative power of zero"));
        }
        let k = (-e) as u32;
        RationalFunction::new(base.den().pow(k), base.num().pow(k))
    }
}

fn rf_primary(cur: &mut Cursor, ctx: &VarContext) -> Result<RationalFunction> {
    let pos = cur.pos();
    let nv = ctx.nvars();
    match cur.next().cloned() {
        Some(Tok::Num(q)) => Ok(RationalFunction::constant(nv, q)),
        Some(Tok::Ident(name)) => ctx
            .index_of(&name)
            .map(|i| RationalFunction::var(nv, i))
            .ok_or_else(|| Error::syntax(pos, format!("unknown variable '{name}'"))),
        Some(Tok::LParen) => {
            let v = rf_expr(cur, ctx)?;
            cur.expect(&Tok::RParen, "')'")?;
            Ok(v)
        }
        _ => Err(Error::syntax(pos, "expected a number, variable or '('")),
    }
}

/// Parses `num/den` (or a plain integer) into an exact rational.
pub fn parse_q(text: &str) -> Result<Q> {
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = parse_decimal(n.trim_start_matches('-'))
        .map(|v| if n.starts_with('-') { -v } else { v })
        .ok_or_else(|| Error::syntax(0, format!("bad rational '{text}'")))?;
    let d = parse_decimal(d).ok_or_else(|| Error::syntax(0, format!("bad rational '{text}'")))?;
    if d.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(n / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::q;

    fn ctx() -> VarContext {
        VarContext::new(2, vec!["a".into(), "b".into()])
    }

    #[test]
    fn canonical_text_round_trip() {
        let c = ctx();
        let names = c.names();
        for text in ["-4/(x1*p1)", "(2*p2)/(x1*p1)", "-p1 - 12*p1/x1^2", "1/3*a*x2^2 - 7", "0", "b/2"] {
            let f = parse_rational_function(text, &c).unwrap();
            let printed = f.fmt_with(&names);
            let again = parse_rational_function(&printed, &c).unwrap();
            assert_eq!(f, again, "{text} -> {printed}");
        }
    }

    #[test]
    fn errors_carry_positions() {
        let c = ctx();
        match parse_rational_function("x1 + * 2", &c) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_rational_function("x1 / 0", &c), Err(Error::Syntax { .. })));
        assert!(matches!(parse_rational_function("y7", &c), Err(Error::Syntax { .. })));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_q("-3/6").unwrap(), q(-1, 2));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("5").unwrap(), q(5, 1));
        assert!(parse_q("1/0").is_err());
    }
}
