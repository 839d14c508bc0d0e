//! Normal forms and Buchberger's algorithm for left ideals.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{cmp_leading, DiffOperator};
use crate::error::{Error, Result};
use crate::ring::{Monomial, MonomialOrder, RationalFunction, VarContext};

#[derive(Clone, Debug)]
pub struct OperatorIdeal {
    pub generators: Vec<DiffOperator>,
    pub order: MonomialOrder,
}

/// Budgets for `buchberger`; exceeding one raises `ResourceLimit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbLimits {
    /// Maximal number of pending S-pairs.
    pub max_pairs: usize,
    /// Maximal total derivation degree of an S-pair.
    pub max_degree: u32,
    /// Maximal number of basis elements.
    pub max_basis: usize,
}

impl Default for GbLimits {
    fn default() -> Self {
        GbLimits { max_pairs: 5000, max_degree: 32, max_basis: 500 }
    }
}

/// Reduced Groebner basis, elements monic and sorted by leading monomial.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    pub elements: Vec<DiffOperator>,
    pub order: MonomialOrder,
    pub staircase: Vec<Monomial>,
}

impl GroebnerBasis {
    fn from_elements(mut elements: Vec<DiffOperator>, order: MonomialOrder) -> Self {
        elements.sort_by(|a, b| cmp_leading(a, b, order));
        let staircase = elements.iter().map(|g| g.leading_monomial(order).unwrap().clone()).collect();
        GroebnerBasis { elements, order, staircase }
    }

    pub fn is_unit(&self) -> bool {
        self.staircase.iter().any(Monomial::is_one)
    }

    pub fn contains(&self, p: &DiffOperator) -> bool {
        reduce(p, &self.elements, self.order).is_zero()
    }

    pub fn reduce(&self, p: &DiffOperator) -> DiffOperator {
        reduce(p, &self.elements, self.order)
    }
}

/// Full normal form of `p` with respect to `g`: no monomial of the result is
/// divisible by a leading monomial of `g`.
pub fn reduce(p: &DiffOperator, g: &[DiffOperator], order: MonomialOrder) -> DiffOperator {
    let leads: Vec<(Monomial, RationalFunction)> = g
        .iter()
        .map(|e| {
            let (m, c) = e.leading(order).expect("reducer must be nonzero");
            (m.clone(), c.clone())
        })
        .collect();
    let mut shifted: HashMap<(usize, Monomial), DiffOperator> = HashMap::new();
    let mut p = p.clone();
    let mut rem = DiffOperator::zero(p.nvars(), p.nder());
    while let Some((lm, lc)) = p.leading(order).map(|(m, c)| (m.clone(), c.clone())) {
        match leads.iter().position(|(m, _)| m.divides(&lm)) {
            Some(k) => {
                let delta = lm.div(&leads[k].0);
                let t = shifted.entry((k, delta.clone())).or_insert_with(|| g[k].left_mul_der(&delta));
                let factor = &lc / &leads[k].1;
                p = &p - &t.scale(&factor);
            }
            None => {
                rem = &rem + &DiffOperator::term(p.nder(), lm.clone(), lc.clone());
                p = &p - &DiffOperator::term(p.nder(), lm, lc);
            }
        }
    }
    rem
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    sugar: u32,
}

/// Reduced Groebner basis of a left ideal.
///
/// The coprime-leading-monomial criterion is only applied to pairs that
/// commute; for general operators `S(d1 - a, d2 - b)` does not reduce to zero.
pub fn buchberger(ideal: &OperatorIdeal, limits: &GbLimits) -> Result<GroebnerBasis> {
    let order = ideal.order;
    let gens: Vec<&DiffOperator> = ideal.generators.iter().filter(|g| !g.is_zero()).collect();
    let Some(first) = gens.first() else {
        return Err(Error::Invalid("ideal has no nonzero generators".into()));
    };
    let (nvars, nder) = (first.nvars(), first.nder());

    let mut basis: Vec<DiffOperator> = Vec::new();
    let mut sugar: Vec<u32> = Vec::new();
    let mut lms: Vec<Monomial> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut done: std::collections::HashSet<(usize, usize)> = Default::default();

    let unit = || GroebnerBasis::from_elements(vec![DiffOperator::one(nvars, nder)], order);

    let add = |op: DiffOperator,
               s: u32,
               basis: &mut Vec<DiffOperator>,
               sugar: &mut Vec<u32>,
               lms: &mut Vec<Monomial>,
               pairs: &mut Vec<Pair>|
     -> Result<()> {
        let lm = op.leading_monomial(order).unwrap().clone();
        let k = basis.len();
        for i in 0..k {
            let lcm = lms[i].lcm(&lm);
            let ps = (sugar[i] + lcm.degree() - lms[i].degree()).max(s + lcm.degree() - lm.degree());
            pairs.push(Pair { i, j: k, lcm, sugar: ps });
        }
        // Elements made redundant by the new one stay in use for reduction;
        // they are dropped when the basis is minimized.
        basis.push(op);
        sugar.push(s);
        lms.push(lm);
        if basis.len() > limits.max_basis {
            return Err(Error::ResourceLimit(format!("Groebner basis exceeds {} elements", limits.max_basis)));
        }
        if pairs.len() > limits.max_pairs {
            return Err(Error::ResourceLimit(format!("S-pair queue exceeds {} pairs", limits.max_pairs)));
        }
        Ok(())
    };

    for g in gens {
        let r = reduce(g, &basis, order);
        if r.is_zero() {
            continue;
        }
        let r = r.monic(order);
        if r.leading_monomial(order).unwrap().is_one() {
            return Ok(unit());
        }
        let s = r.order();
        add(r, s, &mut basis, &mut sugar, &mut lms, &mut pairs)?;
    }

    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&a, &b| {
                let (pa, pb) = (&pairs[a], &pairs[b]);
                pa.sugar
                    .cmp(&pb.sugar)
                    .then_with(|| order.cmp(&pa.lcm, &pb.lcm))
                    .then_with(|| (pa.i, pa.j).cmp(&(pb.i, pb.j)))
            })
            .unwrap();
        let Pair { i, j, lcm, sugar: s } = pairs.swap_remove(best);
        done.insert((i, j));
        if lcm.degree() > limits.max_degree {
            return Err(Error::ResourceLimit(format!("S-pair degree {} exceeds {}", lcm.degree(), limits.max_degree)));
        }
        if lms[i].is_coprime(&lms[j]) && basis[i].commutes_syntactically(&basis[j]) {
            continue;
        }
        if chain_criterion(i, j, &lcm, &lms, &done, &pairs) {
            continue;
        }
        let si = basis[i].left_mul_der(&lcm.div(&lms[i]));
        let sj = basis[j].left_mul_der(&lcm.div(&lms[j]));
        let r = reduce(&(&si - &sj), &basis, order);
        if r.is_zero() {
            continue;
        }
        let r = r.monic(order);
        if r.leading_monomial(order).unwrap().is_one() {
            return Ok(unit());
        }
        add(r, s, &mut basis, &mut sugar, &mut lms, &mut pairs)?;
    }

    Ok(GroebnerBasis::from_elements(interreduce(basis, &lms, order), order))
}

/// Skips `(i, j)` when some `k` has a leading monomial dividing the lcm and
/// both pairs `(i, k)`, `(j, k)` are already treated.
fn chain_criterion(
    i: usize,
    j: usize,
    lcm: &Monomial,
    lms: &[Monomial],
    done: &std::collections::HashSet<(usize, usize)>,
    pending: &[Pair],
) -> bool {
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let is_pending = |a: usize, b: usize| {
        let (a, b) = key(a, b);
        pending.iter().any(|p| p.i == a && p.j == b)
    };
    (0..lms.len()).any(|k| {
        k != i
            && k != j
            && lms[k].divides(lcm)
            && done.contains(&key(i, k))
            && done.contains(&key(j, k))
            && !is_pending(i, k)
            && !is_pending(j, k)
    })
}

fn interreduce(basis: Vec<DiffOperator>, lms: &[Monomial], order: MonomialOrder) -> Vec<DiffOperator> {
    // Keep an element only if no other leading monomial divides its own
    // (ties broken by insertion order).
    let keep: Vec<usize> = (0..basis.len())
        .filter(|&a| !(0..basis.len()).any(|b| b != a && lms[b].divides(&lms[a]) && (lms[b] != lms[a] || b < a)))
        .collect();
    let minimal: Vec<DiffOperator> = keep.iter().map(|&k| basis[k].clone()).collect();
    (0..minimal.len())
        .map(|a| {
            let lm = minimal[a].leading_monomial(order).unwrap().clone();
            let lead = DiffOperator::term(minimal[a].nder(), lm.clone(), minimal[a].coeff(&lm).unwrap().clone());
            let tail = &minimal[a] - &lead;
            let others: Vec<DiffOperator> =
                minimal.iter().enumerate().filter(|(b, _)| *b != a).map(|(_, g)| g.clone()).collect();
            let tail = if others.is_empty() { tail } else { reduce(&tail, &others, order) };
            (&lead + &tail).monic(order)
        })
        .collect()
}

/// Monomials outside the staircase, ascending, starting with 1.
pub fn standard_monomials(g: &GroebnerBasis) -> Result<Vec<Monomial>> {
    if g.is_unit() {
        return Ok(Vec::new());
    }
    let nder = g.staircase[0].nvars();
    let ctx = VarContext::new(nder / 2, Vec::new());
    let mut bounds = Vec::with_capacity(nder);
    for v in 0..nder {
        let k = g
            .staircase
            .iter()
            .filter(|m| m.pure_power_var() == Some(v))
            .map(|m| m.get(v))
            .min()
            .ok_or_else(|| Error::NotZeroDimensional(ctx.name(v)))?;
        bounds.push(k);
    }
    let mut out = vec![Monomial::one(nder)];
    for v in 0..nder {
        let mut next = Vec::new();
        for m in &out {
            for e in 0..bounds[v] {
                let mut m = m.clone();
                m.0[v] = e;
                next.push(m);
            }
        }
        out = next;
    }
    out.retain(|m| !g.staircase.iter().any(|s| s.divides(m)));
    out.sort_by(|a, b| g.order.cmp(a, b));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orealg::parse_operator;

    fn ctx(n: usize) -> VarContext {
        VarContext::new(n, vec![])
    }

    fn ops(texts: &[&str], n: usize) -> Vec<DiffOperator> {
        texts.iter().map(|t| parse_operator(t, &ctx(n)).unwrap()).collect()
    }

    fn gb(texts: &[&str], n: usize) -> GroebnerBasis {
        let ideal = OperatorIdeal { generators: ops(texts, n), order: MonomialOrder::Grevlex };
        buchberger(&ideal, &GbLimits::default()).unwrap()
    }

    #[test]
    fn member_reduces_to_zero() {
        let g = ops(&["dx1^2 + 1"], 1);
        let p = parse_operator("dx1^2 + 1", &ctx(1)).unwrap();
        assert!(reduce(&p, &g, MonomialOrder::Grevlex).is_zero());
    }

    #[test]
    fn third_power_reduces_to_minus_first() {
        let g = ops(&["dx1^2 + 1"], 1);
        let p = parse_operator("dx1^3", &ctx(1)).unwrap();
        let r = reduce(&p, &g, MonomialOrder::Grevlex);
        assert_eq!(r, parse_operator("-dx1", &ctx(1)).unwrap());
        // d^3 = d (d^2 + 1) - d
        let q = parse_operator("dx1", &ctx(1)).unwrap();
        assert_eq!(&q.op_mul(&g[0]) + &r, p);
    }

    #[test]
    fn coefficient_is_irreducible() {
        let g = ops(&["dx1^2 + 1", "dp1"], 1);
        let c = parse_operator("x1/(p1 + 2)", &ctx(1)).unwrap();
        assert_eq!(reduce(&c, &g, MonomialOrder::Grevlex), c);
    }

    #[test]
    fn coprime_generators_are_kept() {
        let g = gb(&["dx1^2 + 1", "dx2", "dp1", "p2*dp2 - 1"], 2);
        assert_eq!(g.elements.len(), 4);
        assert!(g.elements.contains(&parse_operator("dp2 - 1/p2", &ctx(2)).unwrap()));
        let std = standard_monomials(&g).unwrap();
        assert_eq!(std, vec![Monomial::one(4), Monomial::var(4, 0)]);
    }

    #[test]
    fn exponential_of_product() {
        let g = gb(&["dx1 - p1", "dp1 - x1"], 1);
        assert_eq!(g.elements.len(), 2);
        assert_eq!(standard_monomials(&g).unwrap(), vec![Monomial::one(2)]);
    }

    #[test]
    fn non_commuting_coprime_pair_is_not_skipped() {
        // S(dx1 - p1, dp1 - 1) leaves d_p1(p1) = 1 after reduction, so the ideal is the unit ideal.
        let g = gb(&["dx1 - p1", "dp1 - 1"], 1);
        assert!(g.is_unit());
    }

    #[test]
    fn inconsistent_system_is_unit() {
        assert!(gb(&["dx1", "dx1 - 1"], 1).is_unit());
    }

    #[test]
    fn missing_pure_power_is_not_zero_dimensional() {
        let g = gb(&["dx1"], 1);
        assert!(matches!(standard_monomials(&g), Err(Error::NotZeroDimensional(v)) if v == "p1"));
    }

    #[test]
    fn degree_budget() {
        let ideal =
            OperatorIdeal { generators: ops(&["dx1^3 + dp1", "dp1^3 + x1*dx1"], 1), order: MonomialOrder::Grevlex };
        let limits = GbLimits { max_degree: 2, ..GbLimits::default() };
        assert!(matches!(buchberger(&ideal, &limits), Err(Error::ResourceLimit(_))));
    }
}
