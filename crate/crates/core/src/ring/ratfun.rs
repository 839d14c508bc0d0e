use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gcd::poly_gcd;
use super::poly::Poly;
use super::Q;
use crate::error::{Error, Result};

/// Element of the rational function field over the rationals.
///
/// Always stored reduced (`gcd(num, den) = 1`) with a monic denominator;
/// zero is `0/1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Poly,
    den: Poly,
}

impl RationalFunction {
    pub fn zero(nvars: usize) -> Self {
        RationalFunction { num: Poly::zero(nvars), den: Poly::one(nvars) }
    }

    pub fn one(nvars: usize) -> Self {
        RationalFunction { num: Poly::one(nvars), den: Poly::one(nvars) }
    }

    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        RationalFunction { num: p, den: Poly::one(n) }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::from_poly(Poly::constant(nvars, c))
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::from_poly(Poly::from_int(nvars, c))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::from_poly(Poly::var(nvars, i))
    }

    /// Canonical reduced form of `num / den`.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly, den: Poly) -> Self {
        let n = num.nvars();
        if num.is_zero() {
            return RationalFunction::zero(n);
        }
        if let Some(c) = den.constant_value() {
            return RationalFunction { num: num.scale(&c.recip()), den: Poly::one(n) };
        }
        let g = poly_gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.exact_div(&g).expect("gcd divides"), den.exact_div(&g).expect("gcd divides"))
        };
        let lc = den.lc();
        if lc.is_one() {
            RationalFunction { num, den }
        } else {
            let inv = lc.recip();
            RationalFunction { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Q> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.num.uses_var(v) || self.den.uses_var(v)
    }

    pub fn inv(&self) -> Result<Self> {
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return RationalFunction::zero(self.nvars());
        }
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Partial derivative by the quotient rule.
    pub fn diff(&self, i: usize) -> Self {
        if !self.uses_var(i) {
            return RationalFunction::zero(self.nvars());
        }
        if self.den.is_one() {
            return RationalFunction::from_poly(self.num.diff(i));
        }
        let dd = self.den.diff(i);
        if dd.is_zero() {
            return RationalFunction::normalize(self.num.diff(i), self.den.clone());
        }
        // (n/d)' = (n' d - n d') / d^2; cancel one factor of gcd(d, d') early.
        let g = poly_gcd(&self.den, &dd);
        let d_g = self.den.exact_div(&g).unwrap();
        let dd_g = dd.exact_div(&g).unwrap();
        let num = &(&self.num.diff(i) * &d_g) - &(&self.num * &dd_g);
        RationalFunction::normalize(num, &self.den * &d_g)
    }

    /// Evaluates with binary64 arithmetic. `tol` is the relative threshold
    /// below which the denominator counts as vanishing.
    pub fn eval_f64(&self, point: &[f64], tol: f64) -> Result<f64> {
        let d = self.den.eval_f64(point);
        let scale = self.den.eval_abs_f64(point);
        if !(d.abs() > tol * scale) || !d.is_finite() {
            return Err(Error::SingularPoint(format!("denominator {:?} ~ {d:e}", self.den)));
        }
        Ok(self.num.eval_f64(point) / d)
    }

    pub fn eval_q(&self, point: &[Q]) -> Option<Q> {
        let d = self.den.eval_q(point);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_q(point) / d)
    }

    pub fn substitute(&self, values: &[Option<Q>]) -> Result<Self> {
        RationalFunction::new(self.num.substitute(values), self.den.substitute(values))
    }

    pub fn extend_vars(&self, nvars: usize) -> Self {
        RationalFunction { num: self.num.extend_vars(nvars), den: self.den.extend_vars(nvars) }
    }

    pub fn truncate_vars(&self, nvars: usize) -> Self {
        RationalFunction { num: self.num.truncate_vars(nvars), den: self.den.truncate_vars(nvars) }
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.den.is_one() {
            return self.num.fmt_with(names);
        }
        let num = self.num.fmt_with(names);
        let num = if self.num.len() > 1 { format!("({num})") } else { num };
        let den = self.den.fmt_with(names);
        let den = if self.den.len() > 1 || !self.den.terms()[0].1.is_one() || self.den.terms()[0].0.degree() > 1 {
            format!("({den})")
        } else {
            den
        };
        format!("{num}/{den}")
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{:?}", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

impl<'a> Add<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RationalFunction::normalize(&self.num + &rhs.num, self.den.clone());
        }
        if self.den.is_one() {
            return RationalFunction { num: &(&self.num * &rhs.den) + &rhs.num, den: rhs.den.clone() };
        }
        if rhs.den.is_one() {
            return RationalFunction { num: &self.num + &(&rhs.num * &self.den), den: self.den.clone() };
        }
        let g = poly_gcd(&self.den, &rhs.den);
        let a = self.den.exact_div(&g).unwrap();
        let b = rhs.den.exact_div(&g).unwrap();
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        RationalFunction::normalize(num, &(&a * &b) * &g)
    }
}

impl<'a> Sub<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        let n = self.nvars();
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero(n);
        }
        if let Some(c) = self.constant_value() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.constant_value() {
            return self.scale(&c);
        }
        // Cross-cancel before multiplying; the product is then already reduced.
        let g1 = poly_gcd(&self.num, &rhs.den);
        let g2 = poly_gcd(&rhs.num, &self.den);
        let n1 = self.num.exact_div(&g1).unwrap();
        let d2 = rhs.den.exact_div(&g1).unwrap();
        let n2 = rhs.num.exact_div(&g2).unwrap();
        let d1 = self.den.exact_div(&g2).unwrap();
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let lc = den.lc();
        let inv = lc.recip();
        RationalFunction { num: num.scale(&inv), den: den.scale(&inv) }
    }
}

impl<'a> Div<&'a RationalFunction> for &'a RationalFunction {
    type Output = RationalFunction;
    fn div(self, rhs: &RationalFunction) -> RationalFunction {
        let inv = rhs.inv().expect("division by zero rational function");
        self * &inv
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        RationalFunction { num: -&self.num, den: self.den.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<RationalFunction> for RationalFunction {
            type Output = RationalFunction;
            fn $f(self, rhs: RationalFunction) -> RationalFunction {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::q;

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }
    fn c(v: i64) -> Poly {
        Poly::from_int(2, v)
    }
    fn rf(n: Poly, d: Poly) -> RationalFunction {
        RationalFunction::new(n, d).unwrap()
    }

    #[test]
    fn cancellation() {
        let f = rf(&x(0).pow(2) - &c(1), &x(0) - &c(1));
        assert_eq!(f, RationalFunction::from_poly(&x(0) + &c(1)));
    }

    #[test]
    fn zero_over_anything() {
        let f = rf(Poly::zero(2), &x(0) + &c(7));
        assert_eq!(f, RationalFunction::zero(2));
        assert!(f.den().is_one());
    }

    #[test]
    fn scalar_cancellation_makes_denominator_monic() {
        let f = rf(&c(2) * &x(0), &c(4) * &x(0).pow(2));
        assert_eq!(f.num(), &Poly::constant(2, q(1, 2)));
        assert_eq!(f.den(), &x(0));
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert_eq!(RationalFunction::new(x(0), Poly::zero(2)), Err(Error::ZeroDenominator));
    }

    #[test]
    fn quotient_rule() {
        let f = rf(c(1), x(0));
        assert_eq!(f.diff(0), rf(c(-1), x(0).pow(2)));
        let g = RationalFunction::from_poly(x(0).pow(2));
        assert_eq!(g.diff(0), RationalFunction::from_poly(&c(2) * &x(0)));
    }

    #[test]
    fn evaluation_and_poles() {
        let f = rf(c(1), x(0));
        assert_eq!(f.eval_f64(&[0.5, 0.0], 1e-12).unwrap(), 2.0);
        assert!(matches!(f.eval_f64(&[0.0, 0.0], 1e-12), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn field_operations() {
        let a = rf(&x(0) + &c(1), x(1));
        let b = rf(x(1), &x(0) - &c(1));
        let s = &a + &b;
        // a + b - b = a
        assert_eq!(&s - &b, a);
        assert_eq!(&(&a * &b) / &b, a);
        assert!((&a - &a).is_zero());
    }
}
