use std::collections::{BTreeMap, HashSet};

use super::holonomic::{derive_row, dot_row};
use super::{HolonomicFunction, PfaffianSystem};
use crate::error::{Error, Result};
use crate::orealg::DiffOperator;
use crate::ring::span::{Membership, SpanBuilder};
use crate::ring::{Monomial, MonomialOrder, Precision, RationalFunction, RfMatrix};

/// Rewrites `f` on the basis `{1, d^(a_1), ...}` of its own derivatives.
///
/// Rows `r_a` with `d^a f = r_a . q` are generated by
/// `r_(a + e_i) = d_i r_a + r_a A_i` in increasing term order; a row that is
/// dependent on the accepted ones gives the annihilating operator
/// `d^a - sum_k c_k d^(a_k)` and its multiples are not explored. The
/// operators returned form a Groebner basis of the annihilator of `f`.
pub fn canonicalize(
    f: &HolonomicFunction,
    order: MonomialOrder,
    seed: u64,
    precision: Precision,
) -> Result<(HolonomicFunction, Vec<DiffOperator>)> {
    if f.extract.iter().all(RationalFunction::is_zero) {
        return Err(Error::RankDeficientExtract);
    }
    let sys = &f.system;
    let (nv, nd) = (sys.nvars(), sys.nder());
    let mut span = SpanBuilder::new(nv, sys.dim, seed);
    let mut accepted: Vec<(Monomial, Vec<RationalFunction>)> = Vec::new();
    let mut rejected: Vec<Monomial> = Vec::new();
    let mut relations: Vec<DiffOperator> = Vec::new();
    let mut seen: HashSet<Monomial> = HashSet::new();
    let mut pending: BTreeMap<Monomial, Vec<RationalFunction>> = BTreeMap::new();

    let one = Monomial::one(nd);
    seen.insert(one.clone());
    pending.insert(one, f.extract.clone());

    while let Some(alpha) = pending.keys().min_by(|a, b| order.cmp(a, b)).cloned() {
        let row = pending.remove(&alpha).unwrap();
        if rejected.iter().any(|m| m.divides(&alpha)) {
            continue;
        }
        match span.insert(row.clone()) {
            Membership::Independent(_) => {
                for i in 0..nd {
                    let beta = alpha.with(i, 1);
                    if seen.insert(beta.clone()) {
                        pending.insert(beta, derive_row(&row, &sys.a[i], i));
                    }
                }
                accepted.push((alpha, row));
            }
            Membership::Dependent(coeffs) => {
                let mut op = DiffOperator::der(nv, alpha.clone());
                for ((m, _), c) in accepted.iter().zip(&coeffs) {
                    op = &op - &DiffOperator::term(nd, m.clone(), c.clone());
                }
                relations.push(op);
                rejected.push(alpha);
            }
        }
    }

    let d = accepted.len();
    let index = |m: &Monomial| accepted.iter().position(|(b, _)| b == m);
    let mut a = Vec::with_capacity(nd);
    for i in 0..nd {
        let mut m = RfMatrix::zeros(d, d, nv);
        for (k, (alpha, row)) in accepted.iter().enumerate() {
            let beta = alpha.with(i, 1);
            if let Some(l) = index(&beta) {
                m.set(k, l, RationalFunction::one(nv));
                continue;
            }
            let coords = span
                .express(&derive_row(row, &sys.a[i], i))
                .ok_or_else(|| Error::Invalid("derived row escapes the span of accepted rows".into()))?;
            for (l, c) in coords.into_iter().enumerate() {
                m.set(k, l, c);
            }
        }
        a.push(m);
    }
    let basis: Vec<Monomial> = accepted.iter().map(|(m, _)| m.clone()).collect();
    let system = PfaffianSystem::new(sys.ctx.clone(), Some(basis), a)?;
    system.validate()?;

    let qbar = accepted
        .iter()
        .map(|(_, row)| dot_row(row, &f.base_point, &f.qbar, precision))
        .collect::<Result<Vec<f64>>>()?;
    let mut extract = vec![RationalFunction::zero(nv); d];
    extract[0] = RationalFunction::one(nv);
    let g = HolonomicFunction::new(system, extract, f.base_point.clone(), qbar)?;
    Ok((g, relations))
}
