//! Text form of operators: sums of products of coefficients and
//! derivations `dx1..dxn, dp1..dpn`. Products are taken in the ring, so
//! `dx1*x1` reads as `x1*dx1 + 1`.

use super::DiffOperator;
use crate::error::{Error, Result};
use crate::ring::context::coordinate_index;
use crate::ring::text::{tokenize, Cursor, Tok};
use crate::ring::{Monomial, RationalFunction, VarContext};

pub fn parse_operator(text: &str, ctx: &VarContext) -> Result<DiffOperator> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, text.len());
    let v = expr(&mut cur, ctx)?;
    if !cur.at_end() {
        return Err(Error::syntax(cur.pos(), "unexpected trailing input"));
    }
    Ok(v)
}

fn der_index(name: &str, ctx: &VarContext) -> Option<usize> {
    let rest = name.strip_prefix('d')?;
    if let Some(i) = coordinate_index(rest, 'x') {
        return (i >= 1 && i <= ctx.n).then(|| i - 1);
    }
    coordinate_index(rest, 'p').and_then(|i| (i >= 1 && i <= ctx.n).then(|| ctx.n + i - 1))
}

fn expr(cur: &mut Cursor, ctx: &VarContext) -> Result<DiffOperator> {
    let mut acc = term(cur, ctx)?;
    loop {
        if cur.eat(&Tok::Plus) {
            acc = &acc + &term(cur, ctx)?;
        } else if cur.eat(&Tok::Minus) {
            acc = &acc - &term(cur, ctx)?;
        } else {
            return Ok(acc);
        }
    }
}

fn term(cur: &mut Cursor, ctx: &VarContext) -> Result<DiffOperator> {
    let mut acc = unary(cur, ctx)?;
    loop {
        if cur.eat(&Tok::Star) {
            acc = acc.op_mul(&unary(cur, ctx)?);
        } else if cur.peek() == Some(&Tok::Slash) {
            let pos = cur.pos();
            cur.next();
            let d = unary(cur, ctx)?;
            let c = coefficient_of(&d).ok_or_else(|| Error::syntax(pos, "division by an operator"))?;
            if c.is_zero() {
                return Err(Error::syntax(pos, "division by zero"));
            }
            acc = acc.op_mul(&DiffOperator::from_rf(ctx.nder(), c.inv()?));
        } else {
            return Ok(acc);
        }
    }
}

fn coefficient_of(op: &DiffOperator) -> Option<RationalFunction> {
    if op.is_zero() {
        return Some(RationalFunction::zero(op.nvars()));
    }
    let one = Monomial::one(op.nder());
    (op.len() == 1).then(|| op.coeff(&one).cloned()).flatten()
}

fn unary(cur: &mut Cursor, ctx: &VarContext) -> Result<DiffOperator> {
    if cur.eat(&Tok::Minus) {
        return Ok(-&unary(cur, ctx)?);
    }
    if cur.eat(&Tok::Plus) {
        return unary(cur, ctx);
    }
    power(cur, ctx)
}

fn power(cur: &mut Cursor, ctx: &VarContext) -> Result<DiffOperator> {
    let base = primary(cur, ctx)?;
    if !cur.eat(&Tok::Caret) {
        return Ok(base);
    }
    let pos = cur.pos();
    let e = cur.exponent()?;
    if e >= 0 {
        let mut out = DiffOperator::one(ctx.nvars(), ctx.nder());
        for _ in 0..e {
            out = out.op_mul(&base);
        }
        return Ok(out);
    }
    let c = coefficient_of(&base).ok_or_else(|| Error::syntax(pos, "negative power of an operator"))?;
    if c.is_zero() {
        return Err(Error::syntax(pos, "negative power of zero"));
    }
    let inv = c.inv()?;
    let mut out = RationalFunction::one(ctx.nvars());
    for _ in 0..-e {
        out = &out * &inv;
    }
    Ok(DiffOperator::from_rf(ctx.nder(), out))
}

fn primary(cur: &mut Cursor, ctx: &VarContext) -> Result<DiffOperator> {
    let pos = cur.pos();
    let (nv, nd) = (ctx.nvars(), ctx.nder());
    match cur.next().cloned() {
        Some(Tok::Num(q)) => Ok(DiffOperator::from_rf(nd, RationalFunction::constant(nv, q))),
        Some(Tok::Ident(name)) => {
            if let Some(i) = der_index(&name, ctx) {
                return Ok(DiffOperator::d(nv, nd, i));
            }
            ctx.index_of(&name)
                .map(|i| DiffOperator::from_rf(nd, RationalFunction::var(nv, i)))
                .ok_or_else(|| Error::syntax(pos, format!("unknown symbol '{name}'")))
        }
        Some(Tok::LParen) => {
            let v = expr(cur, ctx)?;
            cur.expect(&Tok::RParen, "')'")?;
            Ok(v)
        }
        _ => Err(Error::syntax(pos, "expected a number, symbol or '('")),
    }
}
