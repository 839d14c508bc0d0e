use serde::{Deserialize, Serialize};

use super::{Atom, AtomKind, HamiltonianAst};
use crate::error::{Error, Result};
use crate::orealg::DiffOperator;
use crate::pfaffian::{canonicalize, HolonomicFunction, PfaffianSystem};
use crate::ring::{Monomial, MonomialOrder, NumPoint, Poly, Precision, RationalFunction, RfMatrix, VarContext};

/// Representation of a monomial atom `v^k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolynomialForm {
    /// `v d_v - k`: one-dimensional, singular on `v = 0`.
    #[default]
    FirstOrder,
    /// `d_v^(k+1)`: `k+1`-dimensional and regular everywhere.
    Nilpotent,
}

#[derive(Clone, Debug)]
pub struct AtomAnnihilator {
    pub atom: Atom,
    /// Univariate operator in `d_var`, followed by `d_j` for every other coordinate.
    pub operators: Vec<DiffOperator>,
    pub system: PfaffianSystem,
}

/// Annihilating operators and lifted Pfaffian system of an atom.
pub fn atom_annihilator(atom: Atom, ctx: &VarContext, form: PolynomialForm) -> AtomAnnihilator {
    let (nv, nd, v) = (ctx.nvars(), ctx.nder(), atom.var);
    let c = |k: i64| RationalFunction::from_int(nv, k);
    let dv = |k: u32| DiffOperator::der(nv, Monomial::one(nd).with(v, k));
    let xv = RationalFunction::var(nv, v);
    let (main, size, av): (DiffOperator, usize, Vec<Vec<RationalFunction>>) = match (atom.kind, form) {
        (AtomKind::Pow(k), PolynomialForm::FirstOrder) => {
            let op = &dv(1).scale(&xv) - &DiffOperator::from_rf(nd, c(i64::from(k)));
            let entry = RationalFunction::new(Poly::from_int(nv, i64::from(k)), Poly::var(nv, v)).expect("nonzero");
            (op, 1, vec![vec![entry]])
        }
        (AtomKind::Pow(k), PolynomialForm::Nilpotent) => {
            let d = k as usize + 1;
            let rows = (0..d).map(|r| (0..d).map(|l| c(i64::from(l == r + 1))).collect()).collect();
            (dv(k + 1), d, rows)
        }
        (AtomKind::Sin | AtomKind::Cos, _) => {
            let op = &dv(2) + &DiffOperator::one(nv, nd);
            (op, 2, vec![vec![c(0), c(1)], vec![c(-1), c(0)]])
        }
        (AtomKind::Exp, _) => (&dv(1) - &DiffOperator::one(nv, nd), 1, vec![vec![c(1)]]),
    };
    let mut operators = vec![main];
    operators.extend((0..nd).filter(|&j| j != v).map(|j| DiffOperator::d(nv, nd, j)));
    let a = (0..nd)
        .map(|j| if j == v { RfMatrix::from_rows(av.clone(), nv) } else { RfMatrix::zeros(size, size, nv) })
        .collect();
    let basis = (0..size as u32).map(|k| Monomial::one(nd).with(v, k)).collect();
    let system = PfaffianSystem::new(ctx.clone(), Some(basis), a).expect("well-formed atom system");
    AtomAnnihilator { atom, operators, system }
}

/// The atom as a holonomic function with its exact boundary values at `zbar`.
pub fn atom_function(
    atom: Atom,
    ctx: &VarContext,
    form: PolynomialForm,
    zbar: &NumPoint,
    precision: Precision,
) -> Result<HolonomicFunction> {
    let ann = atom_annihilator(atom, ctx, form);
    let d = ann.system.dim;
    let single = HamiltonianAst {
        ctx: ctx.clone(),
        terms: vec![super::Term { coeff: RationalFunction::one(ctx.nvars()), atoms: vec![atom] }],
    };
    let basis = ann.system.basis.clone().expect("atom systems carry a basis");
    let qbar = basis.iter().map(|m| single.oracle_diff(m).eval_with(zbar, precision)).collect::<Result<Vec<f64>>>()?;
    let mut extract = vec![RationalFunction::zero(ctx.nvars()); d];
    extract[0] = RationalFunction::one(ctx.nvars());
    HolonomicFunction::new(ann.system, extract, zbar.clone(), qbar)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub polynomial_form: PolynomialForm,
    pub order: MonomialOrder,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            polynomial_form: PolynomialForm::FirstOrder,
            order: MonomialOrder::Grevlex,
            seed: 0,
            precision: Precision::Extended,
        }
    }
}

/// Holonomic representation of `h`: products of atom systems within terms,
/// direct sums across terms, then canonicalization. Also returns the
/// annihilating operators found by canonicalization.
pub fn build_h(
    ast: &HamiltonianAst,
    zbar: &NumPoint,
    opts: &BuildOptions,
) -> Result<(HolonomicFunction, Vec<DiffOperator>)> {
    if ast.is_zero() {
        return Err(Error::RankDeficientExtract);
    }
    let ctx = &ast.ctx;
    let mut total: Option<HolonomicFunction> = None;
    for t in &ast.terms {
        let mut f: Option<HolonomicFunction> = None;
        for a in &t.atoms {
            let g = atom_function(*a, ctx, opts.polynomial_form, zbar, opts.precision)?;
            f = Some(match f {
                None => g,
                Some(f) => f.closure_prod(&g)?,
            });
        }
        let f = match f {
            Some(f) => f.scale(&t.coeff),
            None => HolonomicFunction::constant(ctx.clone(), zbar.clone(), t.coeff.clone())?,
        };
        total = Some(match total {
            None => f,
            Some(acc) => acc.closure_sum(&f)?,
        });
    }
    canonicalize(&total.expect("nonempty sum"), opts.order, opts.seed, opts.precision)
}
