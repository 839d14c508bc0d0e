use super::PfaffianSystem;
use crate::error::{Error, Result};
use crate::ring::{rf_eval_with, NumPoint, Precision, RationalFunction, RfMatrix, BASE_POINT_TOL};

/// A function `f = extract . q` where `q` solves a Pfaffian system and takes
/// the value `qbar` at the base point.
#[derive(Clone, Debug, PartialEq)]
pub struct HolonomicFunction {
    pub system: PfaffianSystem,
    pub extract: Vec<RationalFunction>,
    pub base_point: NumPoint,
    pub qbar: Vec<f64>,
}

impl HolonomicFunction {
    pub fn new(
        system: PfaffianSystem,
        extract: Vec<RationalFunction>,
        base_point: NumPoint,
        qbar: Vec<f64>,
    ) -> Result<Self> {
        if extract.len() != system.dim || qbar.len() != system.dim {
            return Err(Error::Dimension(format!(
                "system of size {} with extract of length {} and boundary vector of length {}",
                system.dim,
                extract.len(),
                qbar.len()
            )));
        }
        if base_point.coords.len() != system.nder() || base_point.params.len() != system.ctx.params.len() {
            return Err(Error::Dimension("base point does not match the variable context".into()));
        }
        check_regular(&system, &base_point)?;
        Ok(HolonomicFunction { system, extract, base_point, qbar })
    }

    /// The constant function `c` as a one-dimensional system.
    pub fn constant(ctx: crate::ring::VarContext, base_point: NumPoint, c: RationalFunction) -> Result<Self> {
        let system = PfaffianSystem::constant(ctx, 1);
        HolonomicFunction::new(system, vec![c], base_point, vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.system.dim
    }

    /// `f(zbar)`.
    pub fn value_at_base(&self, precision: Precision) -> Result<f64> {
        dot_row(&self.extract, &self.base_point, &self.qbar, precision)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.system.ctx != other.system.ctx || self.base_point != other.base_point {
            return Err(Error::BasePointMismatch);
        }
        Ok(())
    }

    /// `f + g` via the direct sum of the systems.
    pub fn closure_sum(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let a = self.system.a.iter().zip(&other.system.a).map(|(x, y)| x.block_diag(y)).collect();
        let system = PfaffianSystem::new(self.system.ctx.clone(), None, a)?;
        let extract = self.extract.iter().chain(&other.extract).cloned().collect();
        let qbar = self.qbar.iter().chain(&other.qbar).copied().collect();
        Ok(HolonomicFunction { system, extract, base_point: self.base_point.clone(), qbar })
    }

    /// `f g` via the tensor product, with the index of `f` outer.
    pub fn closure_prod(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let nv = self.system.nvars();
        let (df, dg) = (self.dim(), other.dim());
        let (idf, idg) = (RfMatrix::identity(df, nv), RfMatrix::identity(dg, nv));
        let a = self.system.a.iter().zip(&other.system.a).map(|(x, y)| x.kron(&idg).add(&idf.kron(y))).collect();
        let system = PfaffianSystem::new(self.system.ctx.clone(), None, a)?;
        let mut extract = Vec::with_capacity(df * dg);
        let mut qbar = Vec::with_capacity(df * dg);
        for (ef, qf) in self.extract.iter().zip(&self.qbar) {
            for (eg, qg) in other.extract.iter().zip(&other.qbar) {
                extract.push(ef * eg);
                qbar.push(qf * qg);
            }
        }
        Ok(HolonomicFunction { system, extract, base_point: self.base_point.clone(), qbar })
    }

    /// `d_i f`: the same system with extract `d_i e + e A_i`.
    pub fn closure_diff(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.extract = derive_row(&self.extract, &self.system.a[i], i);
        out
    }

    /// `c f` for a coefficient `c`.
    pub fn scale(&self, c: &RationalFunction) -> Self {
        let mut out = self.clone();
        out.extract = self.extract.iter().map(|e| e * c).collect();
        out
    }
}

/// `d_i r + r A_i` for a row `r`.
pub(crate) fn derive_row(row: &[RationalFunction], a: &RfMatrix, i: usize) -> Vec<RationalFunction> {
    let moved = a.left_mul_row(row);
    row.iter().zip(moved).map(|(r, m)| &r.diff(i) + &m).collect()
}

/// `row(z) . q`.
pub(crate) fn dot_row(row: &[RationalFunction], z: &NumPoint, q: &[f64], precision: Precision) -> Result<f64> {
    let mut acc = twofloat::TwoFloat::from(0.0);
    for (r, v) in row.iter().zip(q) {
        if r.is_zero() || *v == 0.0 {
            continue;
        }
        acc += twofloat::TwoFloat::new_mul(rf_eval_with(r, z, precision)?, *v);
    }
    Ok(f64::from(acc))
}

/// Fails with `SingularBasePoint` when the singular locus vanishes at `z`.
pub(crate) fn check_regular(system: &PfaffianSystem, z: &NumPoint) -> Result<()> {
    let vals = z.values();
    let d = system.singular_locus.eval_f64(&vals);
    let scale = system.singular_locus.eval_abs_f64(&vals);
    if !(d.abs() > BASE_POINT_TOL * scale) {
        return Err(Error::SingularBasePoint(format!(
            "{} vanishes at {:?}",
            system.singular_locus.fmt_with(&system.ctx.names()),
            z.coords
        )));
    }
    Ok(())
}
