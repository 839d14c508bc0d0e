use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{apply_d, SymplecticData};
use crate::error::{Error, Result};
use crate::orealg::{buchberger, standard_monomials, DiffOperator, GbLimits, OperatorIdeal};
use crate::pfaffian::PfaffianSystem;
use crate::ring::matrix::skew_vec;
use crate::ring::span::{Membership, SpanBuilder};
use crate::ring::{parse_poly, parse_rational_function, poly_lcm, Monomial, MonomialOrder, Poly, RfMatrix, VarContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GammaOptions {
    /// Largest derivative level generated before giving up.
    pub l_max: usize,
    pub order: MonomialOrder,
    pub limits: GbLimits,
    pub seed: u64,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions { l_max: 6, order: MonomialOrder::Grevlex, limits: GbLimits::default(), seed: 0 }
    }
}

/// The finite index set `Gamma`, the matrices `D^g Omega`, the coefficient
/// matrices `T_i` with `D_i D^(g_k) Omega = sum_l T_i[k][l] D^(g_l) Omega`,
/// and `E`, the lcm of the denominators of the `T_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaCertificate {
    pub ctx: VarContext,
    pub gamma: Vec<Monomial>,
    pub domega: Vec<RfMatrix>,
    pub t: Vec<RfMatrix>,
    pub e: Poly,
    /// Groebner basis of the relations `Q_j` among the generated `D^a Omega`.
    pub relations: Vec<DiffOperator>,
    /// Derivative level at which the relations became zero-dimensional.
    pub level: usize,
}

impl GammaCertificate {
    pub fn size(&self) -> usize {
        self.gamma.len()
    }

    /// First integrability violation of the `T_i`, if any.
    pub fn integrability_defect(&self) -> Option<(usize, usize)> {
        let nd = self.t.len();
        for i in 0..nd {
            for j in i + 1..nd {
                let (ti, tj) = (&self.t[i], &self.t[j]);
                if ti.diff(j).add(&ti.mul(tj)) != tj.diff(i).add(&tj.mul(ti)) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> GammaJson {
        let names = self.ctx.names();
        GammaJson {
            n: self.ctx.n,
            params: self.ctx.params.clone(),
            t: self.size(),
            gamma: self.gamma.clone(),
            domega: self.domega.iter().map(|m| m.to_strings(&names)).collect(),
            coefficients: self.t.iter().map(|m| m.to_strings(&names)).collect(),
            e: self.e.fmt_with(&names),
            relations: self.relations.iter().map(|r| r.fmt_with(&self.ctx, MonomialOrder::Grevlex)).collect(),
            level: self.level,
        }
    }

    pub fn from_json(j: &GammaJson) -> Result<Self> {
        let ctx = VarContext::new(j.n, j.params.clone());
        let nv = ctx.nvars();
        let matrix = |m: &Vec<Vec<String>>| -> Result<RfMatrix> {
            let rows = m
                .iter()
                .map(|r| r.iter().map(|e| parse_rational_function(e, &ctx)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(RfMatrix::from_rows(rows, nv))
        };
        let domega = j.domega.iter().map(matrix).collect::<Result<Vec<_>>>()?;
        let t = j.coefficients.iter().map(matrix).collect::<Result<Vec<_>>>()?;
        let relations =
            j.relations.iter().map(|r| crate::orealg::parse_operator(r, &ctx)).collect::<Result<Vec<_>>>()?;
        let e = parse_poly(&j.e, &ctx)?;
        if j.gamma.len() != j.t || domega.len() != j.t {
            return Err(Error::Invalid("Gamma certificate sizes disagree".into()));
        }
        Ok(GammaCertificate { ctx, gamma: j.gamma.clone(), domega, t, e, relations, level: j.level })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaJson {
    pub n: usize,
    pub params: Vec<String>,
    pub t: usize,
    pub gamma: Vec<Monomial>,
    pub domega: Vec<Vec<Vec<String>>>,
    #[serde(rename = "T")]
    pub coefficients: Vec<Vec<Vec<String>>>,
    #[serde(rename = "E")]
    pub e: String,
    pub relations: Vec<String>,
    pub level: usize,
}

/// Memoized `D^a Omega`.
struct DerivativeTable<'a> {
    s: &'a PfaffianSystem,
    table: HashMap<Monomial, RfMatrix>,
}

impl DerivativeTable<'_> {
    fn get(&mut self, alpha: &Monomial) -> RfMatrix {
        if let Some(m) = self.table.get(alpha) {
            return m.clone();
        }
        let i = (0..alpha.nvars()).rev().find(|&i| alpha.get(i) > 0).expect("Omega itself is seeded");
        let mut prev = alpha.clone();
        prev.0[i] -= 1;
        let w = self.get(&prev);
        let m = apply_d(i, &w, self.s);
        self.table.insert(alpha.clone(), m.clone());
        m
    }
}

/// All exponents of total degree `l` in `nd` variables.
fn level(nd: usize, l: u32) -> Vec<Monomial> {
    fn rec(nd: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if cur.len() == nd - 1 {
            cur.push(left);
            out.push(Monomial(cur.clone()));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(nd, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(nd, l, &mut Vec::new(), &mut out);
    out
}

/// Derivation of `Gamma`.
///
/// For `L = 1, 2, ...` the matrices `D^a Omega` with `|a| <= L` are scanned
/// in ascending term order; each one dependent on its predecessors gives a
/// relation `Q_a = d^a - sum c_g d^g`. Once the relations generate a
/// zero-dimensional ideal, the standard monomials `b` give the spanning set
/// `{D^b Omega}`, from which the minimal independent subset is kept.
pub fn gamma_basis(s: &PfaffianSystem, sym: &SymplecticData, opts: &GammaOptions) -> Result<GammaCertificate> {
    let (nv, nd, d) = (s.nvars(), s.nder(), s.dim);
    let order = opts.order;
    let zero = Monomial::one(nd);
    if sym.omega.is_zero() {
        let relations = (0..nd).map(|i| DiffOperator::d(nv, nd, i)).collect();
        return Ok(GammaCertificate {
            ctx: s.ctx.clone(),
            gamma: vec![zero],
            domega: vec![sym.omega.clone()],
            t: (0..nd).map(|_| RfMatrix::zeros(1, 1, nv)).collect(),
            e: Poly::one(nv),
            relations,
            level: 0,
        });
    }
    let len = d * (d - 1) / 2;
    let mut table = DerivativeTable { s, table: HashMap::new() };
    table.table.insert(zero.clone(), sym.omega.clone());

    let mut span = SpanBuilder::new(nv, len, opts.seed);
    let mut accepted: Vec<Monomial> = Vec::new();
    let mut relations: Vec<DiffOperator> = Vec::new();
    let scan = |alpha: Monomial,
                table: &mut DerivativeTable,
                span: &mut SpanBuilder,
                accepted: &mut Vec<Monomial>,
                relations: &mut Vec<DiffOperator>| {
        let v = skew_vec(&table.get(&alpha));
        match span.insert(v) {
            Membership::Independent(_) => accepted.push(alpha),
            Membership::Dependent(c) => {
                let mut q = DiffOperator::der(nv, alpha);
                for (g, c) in accepted.iter().zip(c) {
                    q = &q - &DiffOperator::term(nd, g.clone(), c);
                }
                relations.push(q);
            }
        }
    };
    scan(zero, &mut table, &mut span, &mut accepted, &mut relations);

    for l in 1..=opts.l_max {
        let mut lv = level(nd, l as u32);
        lv.sort_by(|a, b| order.cmp(a, b));
        for alpha in lv {
            scan(alpha, &mut table, &mut span, &mut accepted, &mut relations);
        }
        if relations.is_empty() {
            continue;
        }
        let ideal = OperatorIdeal { generators: relations.clone(), order };
        let gb = buchberger(&ideal, &opts.limits)?;
        let beta = match standard_monomials(&gb) {
            Ok(b) => b,
            Err(Error::NotZeroDimensional(_)) => continue,
            Err(e) => return Err(e),
        };
        if beta.is_empty() {
            return Err(Error::Invalid("relations among the D^a Omega generate the unit ideal".into()));
        }
        // Minimal independent subset of {D^b Omega}, smallest exponents first.
        let mut basis_span = SpanBuilder::new(nv, len, opts.seed ^ 0x9e37_79b9);
        let mut gamma = Vec::new();
        let mut domega = Vec::new();
        for b in beta {
            let m = table.get(&b);
            if let Membership::Independent(_) = basis_span.insert(skew_vec(&m)) {
                gamma.push(b);
                domega.push(m);
            }
        }
        let t = gamma.len();
        let mut tm = Vec::with_capacity(nd);
        for i in 0..nd {
            let mut ti = RfMatrix::zeros(t, t, nv);
            for (k, m) in domega.iter().enumerate() {
                let coords = basis_span
                    .express(&skew_vec(&apply_d(i, m, s)))
                    .ok_or_else(|| Error::Invalid(format!("D_{} D^g Omega leaves the span of Gamma", i + 1)))?;
                for (lidx, c) in coords.into_iter().enumerate() {
                    ti.set(k, lidx, c);
                }
            }
            tm.push(ti);
        }
        let mut e = Poly::one(nv);
        for ti in &tm {
            let den = ti.denominator_lcm();
            if !den.is_one() {
                e = poly_lcm(&e, &den);
            }
        }
        return Ok(GammaCertificate { ctx: s.ctx.clone(), gamma, domega, t: tm, e, relations: gb.elements, level: l });
    }
    Err(Error::ResourceLimit(format!("relations among D^a Omega are not zero-dimensional up to level {}", opts.l_max)))
}

/// Exact check that `D^a Omega` lies in the span of the certificate's matrices.
pub fn in_gamma_span(cert: &GammaCertificate, m: &RfMatrix, seed: u64) -> bool {
    let d = m.rows();
    let mut span = SpanBuilder::new(m.nvars(), d * (d.max(1) - 1) / 2, seed);
    for g in &cert.domega {
        span.insert(skew_vec(g));
    }
    span.express(&skew_vec(m)).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hje::extract_symplectic;

    fn m(rows: &[&[&str]], c: &VarContext) -> RfMatrix {
        RfMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|e| parse_rational_function(e, c).unwrap()).collect()).collect(),
            c.nvars(),
        )
    }

    #[test]
    fn zero_omega_gives_trivial_gamma() {
        let c = VarContext::new(2, vec![]);
        let a = (0..4).map(|i| m(&[&[["x2", "1", "p1", "x1"][i]]], &c)).collect();
        let s = PfaffianSystem::new(c, Some(vec![Monomial::one(4)]), a).unwrap();
        let sym = extract_symplectic(&s).unwrap();
        let cert = gamma_basis(&s, &sym, &GammaOptions::default()).unwrap();
        assert_eq!(cert.gamma, vec![Monomial::one(4)]);
        assert_eq!(cert.size(), 1);
        assert_eq!(cert.relations.len(), 4);
    }

    #[test]
    fn rotation_and_identity_give_trivial_gamma() {
        // D_x1 Omega = 0 and D_p1 Omega = 2 Omega.
        let c = VarContext::new(1, vec![]);
        let rot = m(&[&["0", "1"], &["-1", "0"]], &c);
        let basis = vec![Monomial::one(2), Monomial::var(2, 0)];
        let s = PfaffianSystem::new(c, Some(basis), vec![rot, RfMatrix::identity(2, 2)]).unwrap();
        assert!(s.integrability_defect().is_none());
        let sym = extract_symplectic(&s).unwrap();
        assert!(!sym.omega.is_zero());
        let cert = gamma_basis(&s, &sym, &GammaOptions::default()).unwrap();
        assert_eq!(cert.gamma, vec![Monomial::one(2)]);
        assert!(cert.integrability_defect().is_none());
        assert!(in_gamma_span(&cert, &apply_d(1, &sym.omega, &s), 3));
    }

    #[test]
    fn zero_level_budget_is_a_resource_limit() {
        let c = VarContext::new(1, vec![]);
        let rot = m(&[&["0", "1"], &["-1", "0"]], &c);
        let basis = vec![Monomial::one(2), Monomial::var(2, 0)];
        let s = PfaffianSystem::new(c, Some(basis), vec![rot, RfMatrix::identity(2, 2)]).unwrap();
        let sym = extract_symplectic(&s).unwrap();
        let opts = GammaOptions { l_max: 0, ..Default::default() };
        assert!(matches!(gamma_basis(&s, &sym, &opts), Err(Error::ResourceLimit(_))));
    }
}
