use crate::error::{Error, Result};
use crate::ring::q_to_f64;
use crate::ring::text::{tokenize, Cursor, Tok};

/// Evaluates a real-valued expression such as `b*(pi/6)^4` or `2/a`.
///
/// Supports `+ - * / ^`, the constants `pi` and `e`, the functions
/// `sin cos tan exp log sqrt`, and the given named values.
pub fn eval_real(text: &str, bindings: &[(String, f64)]) -> Result<f64> {
    let toks = tokenize(text)?;
    let mut cur = Cursor::new(&toks, text.len());
    let v = expr(&mut cur, bindings)?;
    if !cur.at_end() {
        return Err(Error::syntax(cur.pos(), "unexpected trailing input"));
    }
    Ok(v)
}

fn expr(cur: &mut Cursor, b: &[(String, f64)]) -> Result<f64> {
    let mut acc = term(cur, b)?;
    loop {
        if cur.eat(&Tok::Plus) {
            acc += term(cur, b)?;
        } else if cur.eat(&Tok::Minus) {
            acc -= term(cur, b)?;
        } else {
            return Ok(acc);
        }
    }
}

fn term(cur: &mut Cursor, b: &[(String, f64)]) -> Result<f64> {
    let mut acc = unary(cur, b)?;
    loop {
        if cur.eat(&Tok::Star) {
            acc *= unary(cur, b)?;
        } else if cur.eat(&Tok::Slash) {
            acc /= unary(cur, b)?;
        } else {
            return Ok(acc);
        }
    }
}

fn unary(cur: &mut Cursor, b: &[(String, f64)]) -> Result<f64> {
    if cur.eat(&Tok::Minus) {
        return Ok(-unary(cur, b)?);
    }
    if cur.eat(&Tok::Plus) {
        return unary(cur, b);
    }
    let base = primary(cur, b)?;
    if cur.eat(&Tok::Caret) {
        let e = unary(cur, b)?;
        return Ok(if e.fract() == 0.0 && e.abs() < 1e9 { base.powi(e as i32) } else { base.powf(e) });
    }
    Ok(base)
}

fn primary(cur: &mut Cursor, b: &[(String, f64)]) -> Result<f64> {
    let pos = cur.pos();
    match cur.next().cloned() {
        Some(Tok::Num(q)) => Ok(q_to_f64(&q)),
        Some(Tok::LParen) => {
            let v = expr(cur, b)?;
            cur.expect(&Tok::RParen, "')'")?;
            Ok(v)
        }
        Some(Tok::Ident(name)) => {
            if cur.eat(&Tok::LParen) {
                let x = expr(cur, b)?;
                cur.expect(&Tok::RParen, "')'")?;
                return match name.as_str() {
                    "sin" => Ok(x.sin()),
                    "cos" => Ok(x.cos()),
                    "tan" => Ok(x.tan()),
                    "exp" => Ok(x.exp()),
                    "log" => Ok(x.ln()),
                    "sqrt" => Ok(x.sqrt()),
                    _ => Err(Error::syntax(pos, format!("unknown function '{name}'"))),
                };
            }
            if let Some((_, v)) = b.iter().find(|(n, _)| *n == name) {
                return Ok(*v);
            }
            match name.as_str() {
                "pi" => Ok(std::f64::consts::PI),
                "e" => Ok(std::f64::consts::E),
                _ => Err(Error::syntax(pos, format!("unknown symbol '{name}'"))),
            }
        }
        _ => Err(Error::syntax(pos, "expected a number, symbol or '('")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_point_expressions() {
        let b = vec![("a".to_string(), 2.0), ("b".to_string(), 1.0)];
        let pi = std::f64::consts::PI;
        assert_eq!(eval_real("pi/6", &b).unwrap(), pi / 6.0);
        assert_eq!(eval_real("2/a", &b).unwrap(), 1.0);
        assert_eq!(eval_real("b*(pi/6)^4", &b).unwrap(), (pi / 6.0).powi(4));
        assert_eq!(eval_real("-sqrt(4)", &b).unwrap(), -2.0);
        assert!(eval_real("c + 1", &b).is_err());
    }
}
