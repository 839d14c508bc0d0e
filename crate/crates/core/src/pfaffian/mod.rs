//! Pfaffian systems `d_i q = A_i q`, their construction from Groebner bases,
//! closure operations on holonomic functions, and canonicalization.

mod canonical;
mod holonomic;

pub use canonical::canonicalize;
pub use holonomic::HolonomicFunction;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orealg::{reduce, standard_monomials, DiffOperator, GroebnerBasis};
use crate::ring::{parse_poly, parse_rational_function, poly_lcm, Monomial, Poly, RfMatrix, VarContext};

#[derive(Clone, Debug, PartialEq)]
pub struct PfaffianSystem {
    pub ctx: VarContext,
    pub dim: usize,
    /// Derivative monomials `d^a` whose values form the solution vector;
    /// `None` for intermediate systems built by direct sums and products.
    pub basis: Option<Vec<Monomial>>,
    /// One `dim x dim` matrix per coordinate, `x1..xn` then `p1..pn`.
    pub a: Vec<RfMatrix>,
    pub singular_locus: Poly,
}

impl PfaffianSystem {
    /// Assembles a system and computes its singular locus; integrability is
    /// not checked here.
    pub fn new(ctx: VarContext, basis: Option<Vec<Monomial>>, a: Vec<RfMatrix>) -> Result<Self> {
        let dim = a.first().map_or(0, |m| m.rows());
        if dim == 0 || a.len() != ctx.nder() {
            return Err(Error::Dimension(format!("expected {} nonempty matrices", ctx.nder())));
        }
        if a.iter().any(|m| m.rows() != dim || m.cols() != dim || m.nvars() != ctx.nvars()) {
            return Err(Error::Dimension("matrices must be square of equal size".into()));
        }
        if let Some(b) = &basis {
            if b.len() != dim || b.iter().any(|m| m.nvars() != ctx.nder()) {
                return Err(Error::Dimension("basis does not match the system size".into()));
            }
        }
        let mut locus = Poly::one(ctx.nvars());
        for m in &a {
            let d = m.denominator_lcm();
            if !d.is_one() {
                locus = poly_lcm(&locus, &d);
            }
        }
        Ok(PfaffianSystem { ctx, dim, basis, a, singular_locus: locus })
    }

    pub fn nvars(&self) -> usize {
        self.ctx.nvars()
    }

    pub fn nder(&self) -> usize {
        self.ctx.nder()
    }

    /// The zero system of the given size (all derivatives vanish).
    pub fn constant(ctx: VarContext, dim: usize) -> Self {
        let a = (0..ctx.nder()).map(|_| RfMatrix::zeros(dim, dim, ctx.nvars())).collect();
        PfaffianSystem::new(ctx, None, a).expect("well-formed")
    }

    /// True when the basis is recorded and starts with the monomial 1.
    pub fn is_canonical(&self) -> bool {
        self.basis.as_ref().is_some_and(|b| b[0].is_one())
    }

    /// First integrability violation `(i, j)`, if any.
    pub fn integrability_defect(&self) -> Option<(usize, usize)> {
        for i in 0..self.nder() {
            for j in i + 1..self.nder() {
                let (ai, aj) = (&self.a[i], &self.a[j]);
                if ai.is_zero() && aj.is_zero() {
                    continue;
                }
                let lhs = ai.diff(j).add(&ai.mul(aj));
                let rhs = aj.diff(i).add(&aj.mul(ai));
                if lhs != rhs {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn validate(&self) -> Result<()> {
        match self.integrability_defect() {
            Some((i, j)) => Err(Error::IntegrabilityViolation(i, j)),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> PfaffianJson {
        let names = self.ctx.names();
        PfaffianJson {
            n: self.ctx.n,
            params: self.ctx.params.clone(),
            dim: self.dim,
            basis: self.basis.clone(),
            a: self.a.iter().map(|m| m.to_strings(&names)).collect(),
            singular_locus: self.singular_locus.fmt_with(&names),
        }
    }

    pub fn from_json(j: &PfaffianJson) -> Result<Self> {
        let ctx = VarContext::new(j.n, j.params.clone());
        let nv = ctx.nvars();
        let mut a = Vec::with_capacity(j.a.len());
        for m in &j.a {
            let rows = m
                .iter()
                .map(|r| r.iter().map(|e| parse_rational_function(e, &ctx)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            a.push(RfMatrix::from_rows(rows, nv));
        }
        let s = PfaffianSystem::new(ctx, j.basis.clone(), a)?;
        if s.dim != j.dim || s.singular_locus != parse_poly(&j.singular_locus, &s.ctx)? {
            return Err(Error::Invalid("stored dimension or singular locus is inconsistent".into()));
        }
        s.validate()?;
        Ok(s)
    }
}

/// Serialized form of a Pfaffian system; entries use the canonical text form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfaffianJson {
    pub n: usize,
    pub params: Vec<String>,
    pub dim: usize,
    pub basis: Option<Vec<Monomial>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<String>>>,
    pub singular_locus: String,
}

/// Pfaffian system of the quotient by a zero-dimensional Groebner basis.
///
/// Row `k` of `A_i` holds the coordinates of the normal form of
/// `d_i d^(a_k)` in the standard monomials.
pub fn pfaffian_from_gb(g: &GroebnerBasis, ctx: &VarContext) -> Result<PfaffianSystem> {
    let basis = standard_monomials(g)?;
    if basis.is_empty() {
        return Err(Error::Invalid("the unit ideal has no solutions".into()));
    }
    let nv = ctx.nvars();
    let d = basis.len();
    let index = |m: &Monomial| basis.iter().position(|b| b == m);
    let mut a = Vec::with_capacity(ctx.nder());
    for i in 0..ctx.nder() {
        let mut m = RfMatrix::zeros(d, d, nv);
        for (k, alpha) in basis.iter().enumerate() {
            let nf = reduce(&DiffOperator::der(nv, alpha.with(i, 1)), &g.elements, g.order);
            for (mono, c) in nf.terms() {
                let l =
                    index(mono).ok_or_else(|| Error::Invalid("normal form leaves the standard monomials".into()))?;
                m.set(k, l, c.clone());
            }
        }
        a.push(m);
    }
    let s = PfaffianSystem::new(ctx.clone(), Some(basis), a)?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orealg::{buchberger, parse_operator, GbLimits, OperatorIdeal};
    use crate::ring::{MonomialOrder, RationalFunction};

    fn rf(text: &str, ctx: &VarContext) -> RationalFunction {
        parse_rational_function(text, ctx).unwrap()
    }

    fn system(texts: &[&str], ctx: &VarContext) -> PfaffianSystem {
        let generators = texts.iter().map(|t| parse_operator(t, ctx).unwrap()).collect();
        let g = buchberger(&OperatorIdeal { generators, order: MonomialOrder::Grevlex }, &GbLimits::default()).unwrap();
        pfaffian_from_gb(&g, ctx).unwrap()
    }

    #[test]
    fn exponential_of_product() {
        let c = VarContext::new(1, vec![]);
        let s = system(&["dx1 - p1", "dp1 - x1"], &c);
        assert_eq!(s.dim, 1);
        assert_eq!(s.a[0].get(0, 0), &rf("p1", &c));
        assert_eq!(s.a[1].get(0, 0), &rf("x1", &c));
    }

    #[test]
    fn sine_companion() {
        let c = VarContext::new(1, vec![]);
        let s = system(&["dx1^2 + 1", "dp1"], &c);
        assert_eq!(s.dim, 2);
        assert_eq!(s.basis.as_ref().unwrap()[1].0, vec![1, 0]);
        assert_eq!(s.a[0].to_strings(&c.names()), vec![vec!["0", "1"], vec!["-1", "0"]]);
        assert!(s.a[1].is_zero());
    }

    #[test]
    fn integrability_examples() {
        let c = VarContext::new(1, vec![]);
        let nv = c.nvars();
        let one = |t: &str| RfMatrix::from_rows(vec![vec![rf(t, &c)]], nv);
        let good = PfaffianSystem::new(c.clone(), None, vec![one("p1"), one("x1")]).unwrap();
        assert!(good.validate().is_ok());
        let bad = PfaffianSystem::new(c.clone(), None, vec![one("p1"), one("0")]).unwrap();
        assert_eq!(bad.validate(), Err(Error::IntegrabilityViolation(0, 1)));
        let rot = RfMatrix::from_rows(vec![vec![rf("0", &c), rf("1", &c)], vec![rf("-1", &c), rf("0", &c)]], nv);
        let s = PfaffianSystem::new(c, None, vec![rot, RfMatrix::zeros(2, 2, nv)]).unwrap();
        assert!(s.validate().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let c = VarContext::new(1, vec!["a".into()]);
        let s = system(&["x1*dx1 - 3", "p1*dp1 - a*p1"], &c);
        assert_eq!(s.singular_locus, parse_poly("x1", &c).unwrap());
        let text = serde_json::to_string(&s.to_json()).unwrap();
        let back = PfaffianSystem::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
