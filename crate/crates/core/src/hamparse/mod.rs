//! Hamiltonian front end: a sum of products of single-variable atoms
//! (monomials, `sin`, `cos`, `exp`), exact symbolic differentiation, and the
//! holonomic representation of each atom.

mod atoms;
mod closed;
mod numeric;
mod parser;

pub use atoms::{atom_annihilator, atom_function, build_h, AtomAnnihilator, BuildOptions, PolynomialForm};
pub use closed::{ClosedForm, GradientOracle};
pub use numeric::eval_real;
pub use parser::parse;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ring::{fmt_q, rf_eval_with, Monomial, NumPoint, Precision, RationalFunction, VarContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "exp")]
pub enum AtomKind {
    /// `v^k` with `k >= 1`.
    Pow(u32),
    Sin,
    Cos,
    Exp,
}

/// A D-finite function of the single coordinate `var`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub kind: AtomKind,
    pub var: usize,
}

impl Atom {
    pub fn fmt_with(&self, ctx: &VarContext) -> String {
        let v = ctx.name(self.var);
        match self.kind {
            AtomKind::Pow(1) => v,
            AtomKind::Pow(k) => format!("{v}^{k}"),
            AtomKind::Sin => format!("sin({v})"),
            AtomKind::Cos => format!("cos({v})"),
            AtomKind::Exp => format!("exp({v})"),
        }
    }

    /// `d/d var` as `(factor, atom)` pairs; an empty atom list means the
    /// derivative is a constant.
    fn derivative(&self) -> (i64, Option<Atom>) {
        let v = self.var;
        match self.kind {
            AtomKind::Pow(1) => (1, None),
            AtomKind::Pow(k) => (i64::from(k), Some(Atom { kind: AtomKind::Pow(k - 1), var: v })),
            AtomKind::Sin => (1, Some(Atom { kind: AtomKind::Cos, var: v })),
            AtomKind::Cos => (-1, Some(Atom { kind: AtomKind::Sin, var: v })),
            AtomKind::Exp => (1, Some(*self)),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            AtomKind::Pow(k) => x.powi(k as i32),
            AtomKind::Sin => x.sin(),
            AtomKind::Cos => x.cos(),
            AtomKind::Exp => x.exp(),
        }
    }

    /// Value in double-double arithmetic, rounded once at the end.
    pub fn eval_extended(&self, x: f64) -> f64 {
        use twofloat::TwoFloat;
        let t = TwoFloat::from(x);
        let r = match self.kind {
            AtomKind::Pow(k) => {
                let mut acc = TwoFloat::from(1.0);
                for _ in 0..k {
                    acc *= t;
                }
                acc
            }
            AtomKind::Sin => t.sin(),
            AtomKind::Cos => t.cos(),
            AtomKind::Exp => t.exp(),
        };
        f64::from(r)
    }
}

/// `coeff * atoms[0] * atoms[1] * ...`; the coefficient depends on the
/// parameters only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: RationalFunction,
    pub atoms: Vec<Atom>,
}

impl Term {
    fn key(&self) -> Vec<Atom> {
        let mut k = self.atoms.clone();
        k.sort();
        k
    }

    /// Multiplies by an atom, merging powers of the same variable.
    fn push_atom(&mut self, a: Atom) {
        if let AtomKind::Pow(k) = a.kind {
            for b in &mut self.atoms {
                if let (AtomKind::Pow(j), true) = (b.kind, b.var == a.var) {
                    b.kind = AtomKind::Pow(j + k);
                    return;
                }
            }
        }
        self.atoms.push(a);
    }

    fn mul(&self, other: &Term) -> Term {
        let mut t = Term { coeff: &self.coeff * &other.coeff, atoms: self.atoms.clone() };
        for a in &other.atoms {
            t.push_atom(*a);
        }
        t
    }
}

/// A Hamiltonian as a flattened sum of terms, in order of first appearance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianAst {
    pub ctx: VarContext,
    pub terms: Vec<Term>,
}

impl HamiltonianAst {
    pub fn zero(ctx: VarContext) -> Self {
        HamiltonianAst { ctx, terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges terms with equal atom multisets and drops zero terms.
    pub(crate) fn from_terms(ctx: VarContext, terms: Vec<Term>) -> Self {
        let mut out: Vec<Term> = Vec::new();
        for t in terms {
            if t.coeff.is_zero() {
                continue;
            }
            let key = t.key();
            match out.iter_mut().find(|u| u.key() == key) {
                Some(u) => u.coeff = &u.coeff + &t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| !t.coeff.is_zero());
        HamiltonianAst { ctx, terms: out }
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        HamiltonianAst::from_terms(self.ctx.clone(), self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub(crate) fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        HamiltonianAst::from_terms(self.ctx.clone(), terms)
    }

    pub(crate) fn scale(&self, c: &RationalFunction) -> Self {
        let terms = self.terms.iter().map(|t| Term { coeff: &t.coeff * c, atoms: t.atoms.clone() }).collect();
        HamiltonianAst::from_terms(self.ctx.clone(), terms)
    }

    /// Exact partial derivative along coordinate `i`.
    pub fn diff(&self, i: usize) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            for (j, a) in t.atoms.iter().enumerate() {
                if a.var != i {
                    continue;
                }
                let (factor, da) = a.derivative();
                let mut atoms: Vec<Atom> = Vec::with_capacity(t.atoms.len());
                atoms.extend_from_slice(&t.atoms[..j]);
                atoms.extend(da);
                atoms.extend_from_slice(&t.atoms[j + 1..]);
                terms.push(Term { coeff: t.coeff.scale(&crate::ring::q(factor, 1)), atoms });
            }
        }
        HamiltonianAst::from_terms(self.ctx.clone(), terms)
    }

    /// Exact `d^alpha` of the expression.
    pub fn oracle_diff(&self, alpha: &Monomial) -> Self {
        let mut out = self.clone();
        for (i, &e) in alpha.0.iter().enumerate() {
            for _ in 0..e {
                out = out.diff(i);
            }
        }
        out
    }

    pub fn eval(&self, z: &NumPoint) -> Result<f64> {
        self.eval_with(z, Precision::Double)
    }

    pub fn eval_with(&self, z: &NumPoint, precision: Precision) -> Result<f64> {
        let mut acc = twofloat::TwoFloat::from(0.0);
        for t in &self.terms {
            let mut v = twofloat::TwoFloat::from(rf_eval_with(&t.coeff, z, precision)?);
            for a in &t.atoms {
                let x = z.coords[a.var];
                v *= match precision {
                    Precision::Double => a.eval(x),
                    Precision::Extended => a.eval_extended(x),
                };
            }
            acc += v;
        }
        Ok(f64::from(acc))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names = self.ctx.names();
        serde_json::json!({
            "n": self.ctx.n,
            "params": self.ctx.params,
            "text": self.to_string(),
            "terms": self.terms.iter().map(|t| serde_json::json!({
                "coeff": t.coeff.fmt_with(&names),
                "atoms": t.atoms,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for HamiltonianAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = self.ctx.names();
        for (k, t) in self.terms.iter().enumerate() {
            let atoms: Vec<String> = t.atoms.iter().map(|a| a.fmt_with(&self.ctx)).collect();
            let (neg, coef) = coefficient_text(&t.coeff, &names);
            let body = match (coef.as_str(), atoms.is_empty()) {
                ("1", true) => "1".to_string(),
                ("1", false) => atoms.join("*"),
                (c, true) => c.to_string(),
                (c, false) => format!("{c}*{}", atoms.join("*")),
            };
            match (k, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

/// Sign and magnitude text of a term coefficient.
fn coefficient_text(c: &RationalFunction, names: &[String]) -> (bool, String) {
    if let Some(q) = c.constant_value() {
        let neg = q < num_traits::Zero::zero();
        return (neg, fmt_q(&if neg { -q } else { q }));
    }
    let neg = c.num().lc() < num_traits::Zero::zero();
    let c = if neg { -c } else { c.clone() };
    if c.is_polynomial() && c.num().len() == 1 {
        return (neg, c.fmt_with(names));
    }
    (neg, format!("({})", c.fmt_with(names)))
}
