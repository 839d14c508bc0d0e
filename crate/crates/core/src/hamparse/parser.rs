use super::{Atom, AtomKind, HamiltonianAst, Term};
use crate::error::{Error, Result};
use crate::ring::context::coordinate_index;
use crate::ring::text::{tokenize, Cursor, Tok};
use crate::ring::{RationalFunction, VarContext};

/// Parses a Hamiltonian such as `-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4`.
///
/// Numbers are exact rationals; identifiers are coordinates `x1..xn`,
/// `p1..pn` or parameters; `sin`, `cos` and `exp` take a single coordinate.
/// Division is allowed only by numeric or parameter constants.
pub fn parse(text: &str, ctx: &VarContext) -> Result<HamiltonianAst> {
    let toks = tokenize(text)?;
    let mut p = Parser { cur: Cursor::new(&toks, text.len()), text, ctx };
    let v = p.expr()?;
    if !p.cur.at_end() {
        return Err(Error::syntax(p.cur.pos(), "unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    cur: Cursor<'a>,
    text: &'a str,
    ctx: &'a VarContext,
}

impl Parser<'_> {
    fn constant(&self, c: RationalFunction) -> HamiltonianAst {
        HamiltonianAst::from_terms(self.ctx.clone(), vec![Term { coeff: c, atoms: Vec::new() }])
    }

    fn expr(&mut self) -> Result<HamiltonianAst> {
        let mut acc = self.term()?;
        loop {
            if self.cur.eat(&Tok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.cur.eat(&Tok::Minus) {
                let t = self.term()?;
                acc = acc.add(&t.scale(&RationalFunction::from_int(self.ctx.nvars(), -1)));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<HamiltonianAst> {
        let mut acc = self.unary()?;
        loop {
            if self.cur.eat(&Tok::Star) {
                acc = acc.mul(&self.unary()?);
            } else if self.cur.peek() == Some(&Tok::Slash) {
                let pos = self.cur.pos();
                self.cur.next();
                let d = self.unary()?;
                let c = as_constant(&d)
                    .ok_or_else(|| Error::syntax(pos, "division is only allowed by numeric or parameter constants"))?;
                if c.is_zero() {
                    return Err(Error::syntax(pos, "division by zero"));
                }
                acc = acc.scale(&c.inv()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<HamiltonianAst> {
        if self.cur.eat(&Tok::Minus) {
            let v = self.unary()?;
            return Ok(v.scale(&RationalFunction::from_int(self.ctx.nvars(), -1)));
        }
        if self.cur.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<HamiltonianAst> {
        let base = self.primary()?;
        if !self.cur.eat(&Tok::Caret) {
            return Ok(base);
        }
        let pos = self.cur.pos();
        let e = self.cur.exponent()?;
        if e < 0 {
            let c = as_constant(&base)
                .ok_or_else(|| Error::syntax(pos, "negative powers are only allowed for constants"))?;
            if c.is_zero() {
                return Err(Error::syntax(pos, "negative power of zero"));
            }
            let inv = c.inv()?;
            let mut out = RationalFunction::one(self.ctx.nvars());
            for _ in 0..-e {
                out = &out * &inv;
            }
            return Ok(self.constant(out));
        }
        let mut out = self.constant(RationalFunction::one(self.ctx.nvars()));
        for _ in 0..e {
            out = out.mul(&base);
        }
        Ok(out)
    }

    fn primary(&mut self) -> Result<HamiltonianAst> {
        let pos = self.cur.pos();
        let nv = self.ctx.nvars();
        match self.cur.next().cloned() {
            Some(Tok::Num(q)) => Ok(self.constant(RationalFunction::constant(nv, q))),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                self.cur.expect(&Tok::RParen, "')'")?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                if self.cur.peek() == Some(&Tok::LParen) {
                    return self.call(&name, pos);
                }
                let n = self.ctx.n;
                let coord = coordinate_index(&name, 'x')
                    .filter(|&i| i >= 1 && i <= n)
                    .map(|i| i - 1)
                    .or_else(|| coordinate_index(&name, 'p').filter(|&i| i >= 1 && i <= n).map(|i| n + i - 1));
                if let Some(v) = coord {
                    let atoms = vec![Atom { kind: AtomKind::Pow(1), var: v }];
                    return Ok(HamiltonianAst::from_terms(
                        self.ctx.clone(),
                        vec![Term { coeff: RationalFunction::one(nv), atoms }],
                    ));
                }
                match self.ctx.params.iter().position(|p| *p == name) {
                    Some(k) => Ok(self.constant(RationalFunction::var(nv, 2 * n + k))),
                    None => Err(Error::syntax(pos, format!("unknown symbol '{name}'"))),
                }
            }
            _ => Err(Error::syntax(pos, "expected a number, symbol or '('")),
        }
    }

    fn call(&mut self, name: &str, start: usize) -> Result<HamiltonianAst> {
        self.cur.expect(&Tok::LParen, "'('")?;
        let arg = self.expr()?;
        let end = self.cur.pos();
        self.cur.expect(&Tok::RParen, "')'")?;
        let source = || self.text[start..(end + 1).min(self.text.len())].to_string();
        let kind = match name {
            "sin" => AtomKind::Sin,
            "cos" => AtomKind::Cos,
            "exp" => AtomKind::Exp,
            _ => return Err(Error::UnsupportedAtom(source())),
        };
        let var = match arg.terms.as_slice() {
            [Term { coeff, atoms }] if coeff.is_one() => match atoms.as_slice() {
                [Atom { kind: AtomKind::Pow(1), var }] => *var,
                _ => return Err(Error::UnsupportedAtom(source())),
            },
            _ => return Err(Error::UnsupportedAtom(source())),
        };
        Ok(HamiltonianAst::from_terms(
            self.ctx.clone(),
            vec![Term { coeff: RationalFunction::one(self.ctx.nvars()), atoms: vec![Atom { kind, var }] }],
        ))
    }
}

/// The value of an expression without coordinate dependence.
fn as_constant(e: &HamiltonianAst) -> Option<RationalFunction> {
    match e.terms.as_slice() {
        [] => Some(RationalFunction::zero(e.ctx.nvars())),
        [t] if t.atoms.is_empty() => Some(t.coeff.clone()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> VarContext {
        VarContext::new(2, vec!["a".into(), "b".into()])
    }

    #[test]
    fn unsupported_atoms() {
        let c = ctx();
        assert!(matches!(parse("sin(x1*x2)", &c), Err(Error::UnsupportedAtom(s)) if s == "sin(x1*x2)"));
        assert!(matches!(parse("sin(x1+p1)", &c), Err(Error::UnsupportedAtom(_))));
        assert!(matches!(parse("tan(x1)", &c), Err(Error::UnsupportedAtom(_))));
        assert!(matches!(parse("sin(2*x1)", &c), Err(Error::UnsupportedAtom(_))));
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let c = ctx();
        assert!(matches!(parse("x1 + ", &c), Err(Error::Syntax { pos: 5, .. })));
        assert!(matches!(parse("x1 / x2", &c), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("2 $ x1", &c), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("x3", &c), Err(Error::Syntax { pos: 0, .. })));
    }

    #[test]
    fn parameters_and_division_by_constants() {
        let c = ctx();
        let h = parse("(p1^2 + x1^2)/2 - x2/a", &c).unwrap();
        assert_eq!(h.to_string(), "1/2*p1^2 + 1/2*x1^2 - (1/a)*x2");
        assert_eq!(parse(&h.to_string(), &c).unwrap(), h);
        assert_eq!(parse("(x1 + 1)^2", &c).unwrap().to_string(), "x1^2 + 2*x1 + 1");
    }
}
