use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::monomial::{Monomial, MonomialOrder};
use super::Q;

const ORDER: MonomialOrder = MonomialOrder::Grevlex;

/// Multivariate polynomial with exact rational coefficients.
///
/// Terms are kept strictly descending in graded reverse lexicographic order
/// with no zero coefficients, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: Vec<(Monomial, Q)>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: Vec::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Q::one())
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        if c.is_zero() {
            return Poly::zero(nvars);
        }
        Poly { nvars, terms: vec![(Monomial::one(nvars), c)] }
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Poly::constant(nvars, Q::from_integer(BigInt::from(c)))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Poly { nvars, terms: vec![(Monomial::var(nvars, i), Q::one())] }
    }

    pub fn monomial(m: Monomial, c: Q) -> Self {
        let nvars = m.nvars();
        if c.is_zero() {
            return Poly::zero(nvars);
        }
        Poly { nvars, terms: vec![(m, c)] }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, possibly zero) terms.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Q)>) -> Self {
        let mut acc: HashMap<Monomial, Q> = HashMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), nvars);
            *acc.entry(m).or_insert_with(Q::zero) += c;
        }
        Self::from_map(nvars, acc)
    }

    fn from_map(nvars: usize, acc: HashMap<Monomial, Q>) -> Self {
        let mut terms: Vec<(Monomial, Q)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| ORDER.cmp(&b.0, &a.0));
        Poly { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Monomial, Q)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn constant_value(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn leading(&self) -> Option<&(Monomial, Q)> {
        self.terms.first()
    }

    pub fn lc(&self) -> Q {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(Q::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.0.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.iter().map(|t| t.0.get(v)).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: usize) -> bool {
        self.terms.iter().any(|t| t.0.get(v) > 0)
    }

    pub fn vars_used(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&v| self.uses_var(v)).collect()
    }

    /// Greatest common divisor of all the monomials of `self`.
    pub fn min_monomial(&self) -> Monomial {
        let mut it = self.terms.iter();
        match it.next() {
            None => Monomial::one(self.nvars),
            Some(first) => it.fold(first.0.clone(), |acc, t| acc.gcd(&t.0)),
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        // Multiplying by a monomial preserves the order.
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect() }
    }

    /// Divides every exponent by `m`; `m` must divide every monomial.
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(t, a)| (t.div(m), a.clone())).collect() }
    }

    /// Scales so that the leading coefficient is 1. Zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.terms.first() {
            None => self.clone(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    pub fn pow(&self, mut k: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one(self.nvars);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> Poly {
        let terms = self.terms.iter().filter(|(m, _)| m.get(i) > 0).map(|(m, c)| {
            let e = m.get(i);
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            (m2, c * Q::from_integer(BigInt::from(e)))
        });
        // Differentiation can reorder terms, so go through normalization.
        Poly::from_terms(self.nvars, terms)
    }

    /// Appends `extra` unused variables at the end.
    pub fn extend_vars(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = m.0.clone();
            e.resize(nvars, 0);
            (Monomial(e), c.clone())
        });
        Poly::from_terms(nvars, terms)
    }

    /// Drops trailing variables, which must be unused.
    pub fn truncate_vars(&self, nvars: usize) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| {
            debug_assert!(m.0[nvars..].iter().all(|&e| e == 0));
            (Monomial(m.0[..nvars].to_vec()), c.clone())
        });
        Poly::from_terms(nvars, terms)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| q_to_f64(c) * monomial_value(m, point)).sum()
    }

    /// Sum of the absolute values of the terms: the natural scale for
    /// deciding whether `eval_f64` is "zero".
    pub fn eval_abs_f64(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| (q_to_f64(c) * monomial_value(m, point)).abs()).sum()
    }

    pub fn eval_q(&self, point: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (e, x) in m.0.iter().zip(point) {
                if *e > 0 {
                    t *= num_traits::pow(x.clone(), *e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes exact values for some variables (`None` keeps the variable).
    pub fn substitute(&self, values: &[Option<Q>]) -> Poly {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut coeff = c.clone();
            let mut e = m.0.clone();
            for (i, v) in values.iter().enumerate() {
                if let Some(v) = v {
                    if e[i] > 0 {
                        coeff *= num_traits::pow(v.clone(), e[i] as usize);
                        e[i] = 0;
                    }
                }
            }
            (Monomial(e), coeff)
        });
        Poly::from_terms(self.nvars, terms)
    }

    /// Multivariate division by a single divisor. Returns `(quotient, remainder)`.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let (dm, dc) = d.leading().unwrap();
        let mut q: Vec<(Monomial, Q)> = Vec::new();
        let mut rem: Vec<(Monomial, Q)> = Vec::new();
        let mut p = self.clone();
        while let Some((m, c)) = p.terms.first().cloned() {
            if dm.divides(&m) {
                let qm = m.div(dm);
                let qc = &c / dc;
                p = &p - &d.mul_term(&qm, &qc);
                q.push((qm, qc));
            } else {
                rem.push((m, c));
                p.terms.remove(0);
            }
        }
        (Poly::from_terms(self.nvars, q), Poly::from_terms(self.nvars, rem))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        if d.is_monomial() {
            let (dm, dc) = d.leading().unwrap();
            if !self.terms.iter().all(|(m, _)| dm.divides(m)) {
                return None;
            }
            return Some(self.div_monomial(dm).scale(&dc.recip()));
        }
        let (dm, dc) = d.leading().unwrap();
        let mut q: Vec<(Monomial, Q)> = Vec::new();
        let mut p = self.clone();
        while let Some((m, c)) = p.terms.first() {
            if !dm.divides(m) {
                return None;
            }
            let qm = m.div(dm);
            let qc = c / dc;
            p = &p - &d.mul_term(&qm, &qc);
            q.push((qm, qc));
        }
        Some(Poly::from_terms(self.nvars, q))
    }

    /// Coefficients with respect to variable `v`: `self = sum_k out[k] * v^k`.
    pub fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        let deg = self.degree_in(v) as usize;
        let mut buckets: Vec<Vec<(Monomial, Q)>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let k = m.get(v) as usize;
            let mut m2 = m.clone();
            m2.0[v] = 0;
            buckets[k].push((m2, c.clone()));
        }
        buckets.into_iter().map(|b| Poly::from_terms(self.nvars, b)).collect()
    }

    pub fn from_coeffs_in(nvars: usize, v: usize, coeffs: &[Poly]) -> Poly {
        let terms = coeffs
            .iter()
            .enumerate()
            .flat_map(|(k, p)| p.terms.iter().map(move |(m, c)| (m.with(v, k as u32), c.clone())));
        Poly::from_terms(nvars, terms)
    }

    /// Integer-content-free representative with positive leading coefficient.
    pub fn primitive_integer(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut den = BigInt::one();
        for (_, c) in &self.terms {
            den = num_integer::Integer::lcm(&den, c.denom());
        }
        let nums: Vec<BigInt> =
            self.terms.iter().map(|(_, c)| (c * Q::from_integer(den.clone())).to_integer()).collect();
        let mut g = BigInt::zero();
        for n in &nums {
            g = num_integer::Integer::gcd(&g, n);
        }
        if self.terms[0].1.is_negative() {
            g = -g;
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().zip(nums).map(|((m, _), n)| (m.clone(), Q::from_integer(n / &g))).collect(),
        }
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(fmt_q(&abs));
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], e)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

fn monomial_value(m: &Monomial, point: &[f64]) -> f64 {
    let mut v = 1.0;
    for (e, x) in m.0.iter().zip(point) {
        if *e > 0 {
            v *= x.powi(*e as i32);
        }
    }
    v
}

pub fn q_to_f64(q: &Q) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    // Huge numerators/denominators: scale down by shifting bits.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb.max(db) - 900;
    let n = (q.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
    n / d
}

/// `num/den` text form (just `num` for integers).
pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars).map(|i| format!("z{i}")).collect();
        f.write_str(&self.fmt_with(&names))
    }
}

fn merge(a: &Poly, b: &Poly, negate_b: bool) -> Poly {
    assert_eq!(a.nvars, b.nvars, "variable count mismatch");
    let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
    let (mut i, mut j) = (0, 0);
    while i < a.terms.len() && j < b.terms.len() {
        let (ma, ca) = &a.terms[i];
        let (mb, cb) = &b.terms[j];
        match ORDER.cmp(ma, mb) {
            Ordering::Greater => {
                out.push((ma.clone(), ca.clone()));
                i += 1;
            }
            Ordering::Less => {
                out.push((mb.clone(), if negate_b { -cb } else { cb.clone() }));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b { ca - cb } else { ca + cb };
                if !c.is_zero() {
                    out.push((ma.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a.terms[i..].iter().cloned());
    out.extend(b.terms[j..].iter().map(|(m, c)| (m.clone(), if negate_b { -c } else { c.clone() })));
    Poly { nvars: a.nvars, terms: out }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        merge(self, rhs, false)
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        merge(self, rhs, true)
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero(self.nvars);
        }
        if rhs.terms.len() == 1 {
            return self.mul_term(&rhs.terms[0].0, &rhs.terms[0].1);
        }
        if self.terms.len() == 1 {
            return rhs.mul_term(&self.terms[0].0, &self.terms[0].1);
        }
        let mut acc: HashMap<Monomial, Q> = HashMap::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Q::zero) += ca * cb;
            }
        }
        Poly::from_map(self.nvars, acc)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Poly {
        Poly::var(3, i)
    }
    fn c(v: i64) -> Poly {
        Poly::from_int(3, v)
    }

    #[test]
    fn arithmetic_cancels_to_canonical_zero() {
        let p = &(&x(0) + &c(1)) * &(&x(0) - &c(1));
        let q = &(&x(0) * &x(0)) - &c(1);
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
    }

    #[test]
    fn division_with_remainder_reconstructs() {
        let f = &(&x(0).pow(3) + &(&x(1) * &x(2))) + &c(5);
        let d = &x(0) + &x(1);
        let (q, r) = f.div_rem(&d);
        assert_eq!(&(&q * &d) + &r, f);
    }

    #[test]
    fn exact_division_detects_non_divisors() {
        let f = &(&x(0) * &x(0)) - &c(1);
        assert_eq!(f.exact_div(&(&x(0) - &c(1))), Some(&x(0) + &c(1)));
        assert_eq!(f.exact_div(&(&x(0) - &c(2))), None);
        assert_eq!(f.exact_div(&x(0)), None);
    }

    #[test]
    fn derivative_and_coefficients() {
        let f = &(&x(0).pow(2) * &x(1)) + &(&c(3) * &x(1));
        assert_eq!(f.diff(0), &c(2) * &(&x(0) * &x(1)));
        let cs = f.coeffs_in(0);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs[2], x(1));
        assert_eq!(Poly::from_coeffs_in(3, 0, &cs), f);
    }

    #[test]
    fn display_is_deterministic() {
        let names: Vec<String> = ["x1", "x2", "a"].iter().map(|s| s.to_string()).collect();
        let f = &(&c(-2) * &x(0).pow(2)) + &(&x(1) * &x(2));
        assert_eq!(f.fmt_with(&names), "-2*x1^2 + x2*a");
        let g = f.scale(&Q::new(1.into(), 3.into()));
        assert_eq!(g.fmt_with(&names), "-2/3*x1^2 + 1/3*x2*a");
    }
}
