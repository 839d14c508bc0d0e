//! The ring of differential operators with rational-function coefficients.
//!
//! An operator is stored in left-normal form `sum_a c_a(z) d^a`; the
//! derivations act on the first `nder` polynomial variables.

mod groebner;
mod parse;

pub use groebner::{buchberger, reduce, standard_monomials, GbLimits, GroebnerBasis, OperatorIdeal};
pub use parse::parse_operator;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::ring::{Monomial, MonomialOrder, RationalFunction, VarContext};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DiffOperator {
    nvars: usize,
    nder: usize,
    terms: BTreeMap<Monomial, RationalFunction>,
}

impl DiffOperator {
    pub fn zero(nvars: usize, nder: usize) -> Self {
        DiffOperator { nvars, nder, terms: BTreeMap::new() }
    }

    pub fn from_rf(nder: usize, c: RationalFunction) -> Self {
        Self::term(nder, Monomial::one(nder), c)
    }

    pub fn one(nvars: usize, nder: usize) -> Self {
        Self::from_rf(nder, RationalFunction::one(nvars))
    }

    /// The monomial `d^a` with coefficient 1.
    pub fn der(nvars: usize, a: Monomial) -> Self {
        let nder = a.nvars();
        Self::term(nder, a, RationalFunction::one(nvars))
    }

    /// The derivation along coordinate `i`.
    pub fn d(nvars: usize, nder: usize, i: usize) -> Self {
        Self::der(nvars, Monomial::var(nder, i))
    }

    pub fn term(nder: usize, a: Monomial, c: RationalFunction) -> Self {
        let mut op = DiffOperator { nvars: c.nvars(), nder, terms: BTreeMap::new() };
        if !c.is_zero() {
            op.terms.insert(a, c);
        }
        op
    }

    pub fn from_terms(
        nvars: usize,
        nder: usize,
        terms: impl IntoIterator<Item = (Monomial, RationalFunction)>,
    ) -> Self {
        let mut op = DiffOperator::zero(nvars, nder);
        for (a, c) in terms {
            op.add_term(a, &c);
        }
        op
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nder(&self) -> usize {
        self.nder
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &RationalFunction)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: &Monomial) -> Option<&RationalFunction> {
        self.terms.get(a)
    }

    /// Maximal total degree in the derivations.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Terms sorted descending by `order`.
    pub fn sorted_terms(&self, order: MonomialOrder) -> Vec<(&Monomial, &RationalFunction)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| order.cmp(b.0, a.0));
        v
    }

    pub fn leading(&self, order: MonomialOrder) -> Option<(&Monomial, &RationalFunction)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    pub fn leading_monomial(&self, order: MonomialOrder) -> Option<&Monomial> {
        self.leading(order).map(|(m, _)| m)
    }

    fn add_term(&mut self, a: Monomial, c: &RationalFunction) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&a) {
            Some(e) => {
                let s = &*e + c;
                if s.is_zero() {
                    self.terms.remove(&a);
                } else {
                    *e = s;
                }
            }
            None => {
                self.terms.insert(a, c.clone());
            }
        }
    }

    /// Left multiplication by a coefficient.
    pub fn scale(&self, c: &RationalFunction) -> Self {
        if c.is_zero() {
            return DiffOperator::zero(self.nvars, self.nder);
        }
        DiffOperator {
            nvars: self.nvars,
            nder: self.nder,
            terms: self.terms.iter().map(|(a, e)| (a.clone(), c * e)).collect(),
        }
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self, order: MonomialOrder) -> Self {
        match self.leading(order) {
            Some((_, c)) if !c.is_one() => self.scale(&c.inv().expect("nonzero leading coefficient")),
            _ => self.clone(),
        }
    }

    /// `d^g * self` in left-normal form.
    pub fn left_mul_der(&self, g: &Monomial) -> Self {
        if g.is_one() {
            return self.clone();
        }
        let mut out = DiffOperator::zero(self.nvars, self.nder);
        for (b, c) in &self.terms {
            for (mu, binom) in sub_multi_indices(g) {
                let dc = diff_multi(c, &mu);
                if dc.is_zero() {
                    continue;
                }
                let shift = g.div(&mu).mul(b);
                out.add_term(shift, &dc.scale(&binom));
            }
        }
        out
    }

    /// Operator product `self * other`, by the Leibniz rule.
    pub fn op_mul(&self, other: &Self) -> Self {
        assert_eq!((self.nvars, self.nder), (other.nvars, other.nder), "operator contexts differ");
        let mut out = DiffOperator::zero(self.nvars, self.nder);
        for (a, c) in &self.terms {
            let moved = other.left_mul_der(a);
            for (m, e) in moved.terms {
                out.add_term(m, &(c * &e));
            }
        }
        out
    }

    /// Action on a rational function: `sum_a c_a d^a f`.
    pub fn apply(&self, f: &RationalFunction) -> RationalFunction {
        let mut acc = RationalFunction::zero(self.nvars);
        for (a, c) in &self.terms {
            let d = diff_multi(f, a);
            if !d.is_zero() {
                acc = &acc + &(c * &d);
            }
        }
        acc
    }

    /// True if every coefficient is free of the variables that `other`
    /// differentiates, and vice versa; then the two operators commute.
    pub fn commutes_syntactically(&self, other: &Self) -> bool {
        let uses = |op: &Self, v: usize| op.terms.values().any(|c| c.uses_var(v));
        let ders = |op: &Self, v: usize| op.terms.keys().any(|a| a.get(v) > 0);
        (0..self.nder).all(|v| !(ders(other, v) && uses(self, v)) && !(ders(self, v) && uses(other, v)))
    }

    pub fn fmt_with(&self, ctx: &VarContext, order: MonomialOrder) -> String {
        let names = ctx.names();
        let mut out = String::new();
        for (k, (a, c)) in self.sorted_terms(order).into_iter().enumerate() {
            let der = fmt_der(a, ctx);
            let neg = c.num().lc() < num_traits::Zero::zero();
            let coef = if neg { -c } else { c.clone() };
            let simple = coef.is_polynomial() && coef.num().len() == 1;
            let coef_s = coef.fmt_with(&names);
            let body = if der.is_empty() {
                if simple {
                    coef_s
                } else {
                    format!("({coef_s})")
                }
            } else if coef.is_one() {
                der
            } else if simple {
                format!("{coef_s}*{der}")
            } else {
                format!("({coef_s})*{der}")
            };
            match (k, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

fn fmt_der(a: &Monomial, ctx: &VarContext) -> String {
    let mut parts = Vec::new();
    for (i, &e) in a.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(ctx.der_name(i)),
            _ => parts.push(format!("{}^{e}", ctx.der_name(i))),
        }
    }
    parts.join("*")
}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = VarContext::new(self.nder / 2, Vec::new());
        let extra: Vec<String> = (ctx.nvars()..self.nvars).map(|i| format!("v{i}")).collect();
        let ctx = VarContext { extra, ..ctx };
        write!(f, "{}", self.fmt_with(&ctx, MonomialOrder::Grevlex))
    }
}

impl Add<&DiffOperator> for &DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: &DiffOperator) -> DiffOperator {
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), c);
        }
        out
    }
}

impl Sub<&DiffOperator> for &DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: &DiffOperator) -> DiffOperator {
        self + &(-rhs)
    }
}

impl Neg for &DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        DiffOperator {
            nvars: self.nvars,
            nder: self.nder,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), -c)).collect(),
        }
    }
}

/// `d^a f` for a rational function.
pub fn diff_multi(f: &RationalFunction, a: &Monomial) -> RationalFunction {
    let mut out = f.clone();
    for (i, &e) in a.0.iter().enumerate() {
        for _ in 0..e {
            if out.is_zero() {
                return out;
            }
            out = out.diff(i);
        }
    }
    out
}

/// All `mu <= g` with the multinomial weight `prod_i C(g_i, mu_i)`.
fn sub_multi_indices(g: &Monomial) -> Vec<(Monomial, crate::ring::Q)> {
    let mut out = vec![(Vec::with_capacity(g.nvars()), 1u64)];
    for &gi in &g.0 {
        let mut next = Vec::with_capacity(out.len() * (gi as usize + 1));
        for (mu, w) in &out {
            let mut binom = 1u64;
            for k in 0..=gi {
                let mut m = mu.clone();
                m.push(k);
                next.push((m, w * binom));
                binom = binom * u64::from(gi - k) / u64::from(k + 1);
            }
        }
        out = next;
    }
    out.into_iter().map(|(m, w)| (Monomial(m), crate::ring::Q::from_integer(w.into()))).collect()
}

/// Compares operators by their leading monomials (used for deterministic sorting).
pub fn cmp_leading(a: &DiffOperator, b: &DiffOperator, order: MonomialOrder) -> Ordering {
    match (a.leading_monomial(order), b.leading_monomial(order)) {
        (Some(x), Some(y)) => order.cmp(x, y),
        (None, None) => Ordering::Equal,
        (None, _) => Ordering::Less,
        (_, None) => Ordering::Greater,
    }
}
