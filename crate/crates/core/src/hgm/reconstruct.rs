use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{transport, FirstIntegral, OdeOptions};
use crate::error::{Error, Result};
use crate::ring::NumPoint;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructOptions {
    pub max_newton: usize,
    /// Convergence threshold on `max_k |f_k|`.
    pub newton_tol: f64,
    /// Threshold on `|f_k|` at the starting point.
    pub start_tol: f64,
    /// Threshold on the column-normalized determinant of the `grad_p` Jacobian.
    pub jacobian_tol: f64,
    pub ode: OdeOptions,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions {
            max_newton: 25,
            newton_tol: 1e-12,
            start_tol: 1e-8,
            jacobian_tol: 1e-12,
            ode: OdeOptions::default(),
        }
    }
}

/// Samples of the Lagrangian manifold `p = grad v(x)` along an x-path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub xs: Vec<Vec<f64>>,
    pub ps: Vec<Vec<f64>>,
    /// `v` with `v(x0) = 0`, by the trapezoidal rule on `p . dx`.
    pub v: Vec<f64>,
    /// `h(x, p(x))`, the value of the first function, at each sample.
    pub residual: Vec<f64>,
    /// `max_k |f_k(x, p(x))|` at each sample.
    pub constraint: Vec<f64>,
    /// `max |S - S^T|` for `S = dp/dx` (implicit-function derivative) at each sample.
    pub symmetry_defect: Vec<f64>,
    pub newton_iterations: Vec<usize>,
}

struct State<'a> {
    fs: &'a [&'a dyn FirstIntegral],
    z: NumPoint,
    aux: Vec<Vec<f64>>,
    ode: OdeOptions,
}

impl State<'_> {
    fn move_to(&mut self, coords: Vec<f64>) -> Result<()> {
        let to = self.z.with_coords(coords);
        for (f, aux) in self.fs.iter().zip(self.aux.iter_mut()) {
            *aux = transport(*f, &self.z, &to, aux, &self.ode)?;
        }
        self.z = to;
        Ok(())
    }

    fn values(&self) -> Result<Vec<f64>> {
        self.fs.iter().zip(&self.aux).map(|(f, a)| f.value(&self.z, a)).collect()
    }

    /// Rows `grad f_k` (x part then p part).
    fn jacobian(&self) -> Result<Vec<Vec<f64>>> {
        self.fs.iter().zip(&self.aux).map(|(f, a)| f.gradient(&self.z, a)).collect()
    }
}

fn normalized_det(m: &DMatrix<f64>) -> f64 {
    let norms: f64 = m.column_iter().map(|c| c.norm()).product();
    if norms == 0.0 {
        0.0
    } else {
        m.determinant() / norms
    }
}

/// Continues `p(x)` along `x_path` by Newton's method on `f_k(x, p) = 0`,
/// starting from `(x_path[0], p0)`, and accumulates `v`.
pub fn reconstruct_v(
    fs: &[&dyn FirstIntegral],
    x_path: &[Vec<f64>],
    p0: &[f64],
    params: &[f64],
    opts: &ReconstructOptions,
) -> Result<Reconstruction> {
    let n = p0.len();
    if fs.len() != n || x_path.is_empty() || x_path.iter().any(|x| x.len() != n) {
        return Err(Error::Dimension(format!("reconstruction needs {n} functions and {n}-dimensional x samples")));
    }
    let coords = |x: &[f64], p: &[f64]| x.iter().chain(p).copied().collect::<Vec<f64>>();
    let z0 = NumPoint::new(coords(&x_path[0], p0), params.to_vec())?;
    let aux = fs.iter().map(|f| f.aux_at(&z0)).collect::<Result<Vec<_>>>()?;
    let mut st = State { fs, z: z0, aux, ode: opts.ode };
    let f0 = st.values()?;
    if f0.iter().any(|v| !(v.abs() < opts.start_tol)) {
        return Err(Error::Invalid(format!("start point is not on the manifold: f = {f0:?}")));
    }
    let mut out = Reconstruction {
        xs: Vec::new(),
        ps: Vec::new(),
        v: Vec::new(),
        residual: Vec::new(),
        constraint: Vec::new(),
        symmetry_defect: Vec::new(),
        newton_iterations: Vec::new(),
    };
    let mut p = p0.to_vec();
    let mut v = 0.0;
    for (k, x) in x_path.iter().enumerate() {
        if k > 0 {
            st.move_to(coords(x, &p))?;
        }
        let mut iterations = 0;
        loop {
            let vals = st.values()?;
            let jac = st.jacobian()?;
            let jp = DMatrix::from_fn(n, n, |r, c| jac[r][n + c]);
            if normalized_det(&jp).abs() <= opts.jacobian_tol {
                return Err(Error::JacobianSingular(x.clone()));
            }
            let err = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if err <= opts.newton_tol {
                break;
            }
            if iterations == opts.max_newton {
                return Err(Error::NewtonDivergence(x.clone()));
            }
            let rhs = DVector::from_iterator(n, vals.iter().map(|v| -v));
            let dp = jp.lu().solve(&rhs).ok_or_else(|| Error::JacobianSingular(x.clone()))?;
            let step_small = dp.norm() <= 1e-15 * (1.0 + p.iter().map(|v| v * v).sum::<f64>().sqrt());
            for (pi, d) in p.iter_mut().zip(dp.iter()) {
                *pi += d;
            }
            st.move_to(coords(x, &p))?;
            iterations += 1;
            if step_small {
                break;
            }
        }
        if k > 0 {
            let (xp, pp) = (&out.xs[k - 1], &out.ps[k - 1]);
            v += (0..n).map(|i| 0.5 * (pp[i] + p[i]) * (x[i] - xp[i])).sum::<f64>();
        }
        let vals = st.values()?;
        let jac = st.jacobian()?;
        out.symmetry_defect.push(symmetry_defect(&jac, n));
        out.residual.push(vals[0]);
        out.constraint.push(vals.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        out.xs.push(x.clone());
        out.ps.push(p.clone());
        out.v.push(v);
        out.newton_iterations.push(iterations);
    }
    Ok(out)
}

/// `dp/dx = -J_p^(-1) J_x`; returns `max |S - S^T|`.
fn symmetry_defect(jac: &[Vec<f64>], n: usize) -> f64 {
    let jx = DMatrix::from_fn(n, n, |r, c| jac[r][c]);
    let jp = DMatrix::from_fn(n, n, |r, c| jac[r][n + c]);
    let Some(s) = jp.lu().solve(&(-jx)) else { return f64::INFINITY };
    (&s - s.transpose()).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamparse::{parse, GradientOracle};
    use crate::ring::VarContext;

    #[test]
    fn hyperbolic_branch_gives_quadratic_v() {
        let c = VarContext::new(1, vec![]);
        let h = GradientOracle::new(&parse("(p1^2 - x1^2)/2", &c).unwrap());
        let xs: Vec<Vec<f64>> = (0..=20).map(|k| vec![0.1 + 0.05 * k as f64]).collect();
        let fs: Vec<&dyn FirstIntegral> = vec![&h];
        let r = reconstruct_v(&fs, &xs, &[0.1], &[], &ReconstructOptions::default()).unwrap();
        for (k, x) in xs.iter().enumerate() {
            assert!((r.ps[k][0] - x[0]).abs() < 1e-10);
            assert!(r.residual[k].abs() < 1e-8);
            // Trapezoid is exact for the linear integrand p = x.
            assert!((r.v[k] - (x[0] * x[0] - 0.01) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_constraints_give_affine_v() {
        let c = VarContext::new(2, vec![]);
        let f1 = GradientOracle::new(&parse("p1 - 2", &c).unwrap());
        let f2 = GradientOracle::new(&parse("p2 + 1", &c).unwrap());
        let fs: Vec<&dyn FirstIntegral> = vec![&f1, &f2];
        let xs: Vec<Vec<f64>> = (0..10).map(|k| vec![0.1 * k as f64, 0.2 * k as f64]).collect();
        let r = reconstruct_v(&fs, &xs, &[2.0, -1.0], &[], &ReconstructOptions::default()).unwrap();
        for w in r.v.windows(3) {
            assert!((w[2] - 2.0 * w[1] + w[0]).abs() < 1e-9);
        }
        assert!(r.symmetry_defect.iter().all(|d| *d < 1e-12));
    }

    #[test]
    fn degenerate_jacobian_is_reported() {
        let c = VarContext::new(1, vec![]);
        let h = GradientOracle::new(&parse("p1^2 - x1^2", &c).unwrap());
        let fs: Vec<&dyn FirstIntegral> = vec![&h];
        let r = reconstruct_v(&fs, &[vec![0.0], vec![0.1]], &[0.0], &[], &ReconstructOptions::default());
        assert!(matches!(r, Err(Error::JacobianSingular(_))));
    }
}
