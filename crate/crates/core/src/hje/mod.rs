//! First-integral conditions: the symplectic data `B_x`, `B_p`, `Omega`, the
//! maps `D_i`, the finite set `Gamma`, and the resulting bilinear conditions
//! on boundary vectors.

mod conditions;
mod gamma;

pub use conditions::{
    check_projectivity, condition_set, solve_qbars, ConditionSet, Projectivity, QbarCandidate, QbarSolution,
};
pub use gamma::{gamma_basis, in_gamma_span, GammaCertificate, GammaJson, GammaOptions};

use crate::error::{Error, Result};
use crate::pfaffian::PfaffianSystem;
use crate::ring::RfMatrix;

/// `B_x`, `B_p` (first rows of the `A_i`) and `Omega = B_p^T B_x - B_x^T B_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticData {
    pub bx: RfMatrix,
    pub bp: RfMatrix,
    pub omega: RfMatrix,
}

pub fn extract_symplectic(s: &PfaffianSystem) -> Result<SymplecticData> {
    if !s.is_canonical() {
        return Err(Error::BasisNotCanonical);
    }
    let n = s.ctx.n;
    let first_rows =
        |r: std::ops::Range<usize>| RfMatrix::from_rows(r.map(|i| s.a[i].row(0).to_vec()).collect(), s.nvars());
    let bx = first_rows(0..n);
    let bp = first_rows(n..2 * n);
    let omega = bp.transpose().mul(&bx).sub(&bx.transpose().mul(&bp));
    debug_assert!(omega.is_skew());
    Ok(SymplecticData { bx, bp, omega })
}

/// `D_i W = A_i^T W + W A_i + d_i W`.
pub fn apply_d(i: usize, w: &RfMatrix, s: &PfaffianSystem) -> RfMatrix {
    let a = &s.a[i];
    let mut out = w.diff(i);
    if !a.is_zero() && !w.is_zero() {
        out = out.add(&a.transpose().mul(w)).add(&w.mul(a));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{parse_rational_function, RationalFunction, VarContext};

    fn m(rows: &[&[&str]], c: &VarContext) -> RfMatrix {
        RfMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|e| parse_rational_function(e, c).unwrap()).collect()).collect(),
            c.nvars(),
        )
    }

    #[test]
    fn rotation_cancels_in_d() {
        let c = VarContext::new(1, vec![]);
        let rot = m(&[&["0", "1"], &["-1", "0"]], &c);
        let s = PfaffianSystem::new(c.clone(), None, vec![rot, RfMatrix::zeros(2, 2, 2)]).unwrap();
        let w = m(&[&["0", "x1^2*p1"], &["-x1^2*p1", "0"]], &c);
        assert_eq!(apply_d(0, &w, &s), m(&[&["0", "2*x1*p1"], &["-2*x1*p1", "0"]], &c));
        assert!(apply_d(1, &RfMatrix::zeros(2, 2, 2), &s).is_zero());
    }

    #[test]
    fn scalar_system_doubles() {
        let c = VarContext::new(1, vec![]);
        let id = RfMatrix::identity(2, 2);
        let s = PfaffianSystem::new(c.clone(), None, vec![id.clone(), id]).unwrap();
        let w = m(&[&["0", "3"], &["-3", "0"]], &c);
        assert_eq!(apply_d(0, &w, &s), w.scale(&RationalFunction::from_int(2, 2)));
    }

    #[test]
    fn one_dimensional_omega_vanishes() {
        let c = VarContext::new(2, vec![]);
        let a = (0..4).map(|i| m(&[&[["x2", "1", "p1", "x1"][i]]], &c)).collect();
        let s = PfaffianSystem::new(c, Some(vec![crate::ring::Monomial::one(4)]), a).unwrap();
        let sym = extract_symplectic(&s).unwrap();
        assert!(sym.omega.is_zero());
        assert_eq!((sym.omega.rows(), sym.omega.cols()), (1, 1));
    }
}
