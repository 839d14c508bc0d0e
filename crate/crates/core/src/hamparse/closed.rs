use super::{AtomKind, HamiltonianAst};
use crate::error::Result;
use crate::orealg::DiffOperator;
use crate::ring::{Monomial, NumPoint, Precision, RationalFunction, VarContext};

/// Closed forms as rational functions in an extended context where
/// `sin(v)`, `cos(v)` and `exp(v)` are the extra symbols `sin_v`, `cos_v`,
/// `exp_v`, differentiated by `d sin_v = cos_v`, `d cos_v = -sin_v`,
/// `d exp_v = exp_v`.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub base: VarContext,
    pub ext: VarContext,
    /// `(coordinate, kind, extra variable index)`.
    symbols: Vec<(usize, AtomKind, usize)>,
}

impl ClosedForm {
    /// Context covering every transcendental atom of `ast` and its derivatives.
    pub fn for_ast(ast: &HamiltonianAst) -> Self {
        let base = ast.ctx.clone();
        let mut trig: Vec<usize> = Vec::new();
        let mut exps: Vec<usize> = Vec::new();
        for t in &ast.terms {
            for a in &t.atoms {
                match a.kind {
                    AtomKind::Sin | AtomKind::Cos if !trig.contains(&a.var) => trig.push(a.var),
                    AtomKind::Exp if !exps.contains(&a.var) => exps.push(a.var),
                    _ => {}
                }
            }
        }
        trig.sort_unstable();
        exps.sort_unstable();
        let off = base.nvars();
        let mut names = Vec::new();
        let mut symbols = Vec::new();
        for &v in &trig {
            symbols.push((v, AtomKind::Sin, off + names.len()));
            names.push(format!("sin_{}", base.name(v)));
            symbols.push((v, AtomKind::Cos, off + names.len()));
            names.push(format!("cos_{}", base.name(v)));
        }
        for &v in &exps {
            symbols.push((v, AtomKind::Exp, off + names.len()));
            names.push(format!("exp_{}", base.name(v)));
        }
        let ext = base.with_extra(names);
        ClosedForm { base, ext, symbols }
    }

    fn symbol(&self, v: usize, kind: AtomKind) -> usize {
        self.symbols.iter().find(|s| s.0 == v && s.1 == kind).expect("atom outside the closed-form context").2
    }

    pub fn to_rf(&self, ast: &HamiltonianAst) -> RationalFunction {
        let nv = self.ext.nvars();
        let mut acc = RationalFunction::zero(nv);
        for t in &ast.terms {
            let mut v = t.coeff.extend_vars(nv);
            for a in &t.atoms {
                let f = match a.kind {
                    AtomKind::Pow(k) => RationalFunction::from_poly(crate::ring::Poly::var(nv, a.var).pow(k)),
                    kind => RationalFunction::var(nv, self.symbol(a.var, kind)),
                };
                v = &v * &f;
            }
            acc = &acc + &v;
        }
        acc
    }

    /// Total derivative along coordinate `i` in the extended context.
    pub fn total_diff(&self, f: &RationalFunction, i: usize) -> RationalFunction {
        let nv = self.ext.nvars();
        let mut out = f.diff(i);
        for &(v, kind, s) in &self.symbols {
            if v != i || !f.uses_var(s) {
                continue;
            }
            let chain = match kind {
                AtomKind::Sin => RationalFunction::var(nv, self.symbol(v, AtomKind::Cos)),
                AtomKind::Cos => -&RationalFunction::var(nv, self.symbol(v, AtomKind::Sin)),
                _ => RationalFunction::var(nv, s),
            };
            out = &out + &(&f.diff(s) * &chain);
        }
        out
    }

    /// `P . f` computed from the exact derivatives of the expression.
    pub fn apply(&self, op: &DiffOperator, ast: &HamiltonianAst) -> RationalFunction {
        let nv = self.ext.nvars();
        let mut acc = RationalFunction::zero(nv);
        for (alpha, c) in op.terms() {
            let d = self.to_rf(&ast.oracle_diff(alpha));
            if !d.is_zero() {
                acc = &acc + &(&c.extend_vars(nv) * &d);
            }
        }
        acc
    }

    /// Values of all extended variables at `z`.
    pub fn point(&self, z: &NumPoint) -> Vec<f64> {
        let mut v = z.values();
        for &(var, kind, _) in &self.symbols {
            let x = z.coords[var];
            v.push(match kind {
                AtomKind::Sin => x.sin(),
                AtomKind::Cos => x.cos(),
                _ => x.exp(),
            });
        }
        v
    }
}

/// Value and gradient of an expression from its exact derivatives.
#[derive(Clone, Debug)]
pub struct GradientOracle {
    pub h: HamiltonianAst,
    pub grads: Vec<HamiltonianAst>,
}

impl GradientOracle {
    pub fn new(h: &HamiltonianAst) -> Self {
        let grads = (0..h.ctx.nder()).map(|i| h.oracle_diff(&Monomial::var(h.ctx.nder(), i))).collect();
        GradientOracle { h: h.clone(), grads }
    }

    pub fn value(&self, z: &NumPoint) -> Result<f64> {
        self.h.eval(z)
    }

    /// Full gradient `(d_x1 h, ..., d_pn h)`.
    pub fn gradient(&self, z: &NumPoint) -> Result<Vec<f64>> {
        self.grads.iter().map(|g| g.eval_with(z, Precision::Double)).collect()
    }
}
