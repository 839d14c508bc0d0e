//! Numeric layer: integration of Pfaffian systems along paths (the
//! holonomic gradient method), first-integral gradients, Hamiltonian flow
//! and local reconstruction of `v`.

mod compiled;
mod flow;
mod ode;
mod reconstruct;

pub use compiled::{CompiledPoly, CompiledRf, CompiledSystem};
pub use flow::{hamiltonian_flow, transport, FirstIntegral, FlowOptions, FlowResult, HolonomicIntegral};
pub use ode::{dopri45, OdeOptions, OdeSolution};
pub use reconstruct::{reconstruct_v, ReconstructOptions, Reconstruction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hje::SymplecticData;
use crate::pfaffian::PfaffianSystem;
use crate::ring::{rf_eval, NumPoint};

/// Samples per segment when checking a path against the singular locus.
pub const PATH_SAMPLES: usize = 64;
/// Relative locus size below which a path sample counts as singular.
pub const PATH_SINGULAR_TOL: f64 = 1e-8;

/// Piecewise-linear path in coordinate space; parameters stay fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<NumPoint>,
    #[serde(default)]
    pub ode: OdeOptions,
}

impl Path {
    pub fn new(waypoints: Vec<NumPoint>, ode: OdeOptions) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::Invalid("path needs at least one waypoint".into()));
        }
        for w in waypoints.windows(2) {
            if w[0].coords == w[1].coords {
                return Err(Error::Invalid("consecutive waypoints coincide".into()));
            }
            if w[0].coords.len() != w[1].coords.len() || w[0].params != w[1].params {
                return Err(Error::Dimension("waypoints disagree in dimension or parameters".into()));
            }
        }
        Ok(Path { waypoints, ode })
    }

    pub fn straight(from: &NumPoint, to: &NumPoint, ode: OdeOptions) -> Result<Self> {
        if from.coords == to.coords {
            return Path::new(vec![from.clone()], ode);
        }
        Path::new(vec![from.clone(), to.clone()], ode)
    }
}

/// Integrates the system along paths, reusing one compiled form.
#[derive(Clone, Debug)]
pub struct Integrator {
    pub compiled: CompiledSystem,
}

impl Integrator {
    pub fn new(s: &PfaffianSystem) -> Self {
        Integrator { compiled: CompiledSystem::new(s) }
    }

    /// Fails with `SingularPathCrossing` if some segment sample comes within
    /// the relative threshold of the singular locus or the locus changes sign.
    pub fn check_path(&self, path: &Path) -> Result<()> {
        for w in path.waypoints.windows(2) {
            let (a, b) = (w[0].values(), w[1].values());
            self.check_segment(&a, &b)?;
        }
        Ok(())
    }

    fn check_segment(&self, a: &[f64], b: &[f64]) -> Result<()> {
        match self.segment_hit(a, b) {
            None => Ok(()),
            Some(z) => Err(Error::SingularPathCrossing {
                detour: self.detour(a, b, &z),
                point: z[..self.compiled.nder].to_vec(),
            }),
        }
    }

    /// First sample of `a -> b` near or across the singular locus.
    fn segment_hit(&self, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
        let mut prev = self.compiled.locus_margin(a);
        for k in 0..=PATH_SAMPLES {
            let t = k as f64 / PATH_SAMPLES as f64;
            let z: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            let m = self.compiled.locus_margin(&z);
            if m.abs() < PATH_SINGULAR_TOL || m.signum() != prev.signum() {
                return Some(z);
            }
            prev = m;
        }
        None
    }

    /// A waypoint off the segment `a -> b` through which both legs are regular.
    fn detour(&self, a: &[f64], b: &[f64], hit: &[f64]) -> Vec<f64> {
        let nder = self.compiled.nder;
        for scale in [0.25, 0.5, 1.0] {
            for j in 0..nder {
                let delta = scale * (b[j] - a[j]).abs().max(0.1 * a[j].abs().max(1.0));
                let away = if a[j] < 0.0 { -1.0 } else { 1.0 };
                let mut w = hit.to_vec();
                w[j] += away * delta;
                if self.segment_hit(a, &w).is_none() && self.segment_hit(&w, b).is_none() {
                    return w[..nder].to_vec();
                }
            }
        }
        hit[..nder].to_vec()
    }

    /// `q` at the end of `path` given `q = qbar` at its start.
    pub fn integrate(&self, qbar: &[f64], path: &Path) -> Result<Vec<f64>> {
        if qbar.len() != self.compiled.dim {
            return Err(Error::Dimension(format!(
                "boundary vector of length {} for a system of size {}",
                qbar.len(),
                self.compiled.dim
            )));
        }
        self.check_path(path)?;
        let mut q = qbar.to_vec();
        for w in path.waypoints.windows(2) {
            q = self.segment(&q, &w[0].values(), &w[1].values(), &path.ode)?;
        }
        Ok(q)
    }

    /// Unchecked integration along the straight segment `a -> b` (full value vectors).
    pub fn segment(&self, q: &[f64], a: &[f64], b: &[f64], ode: &OdeOptions) -> Result<Vec<f64>> {
        let dz: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
        let mut z = a.to_vec();
        let sol = dopri45(
            |t, y, dy| {
                for (i, zi) in z.iter_mut().enumerate() {
                    *zi = a[i] + t * dz[i];
                }
                self.compiled.rate(&z, &dz, y, dy)
            },
            0.0,
            q,
            1.0,
            ode,
        )?;
        Ok(sol.y)
    }
}

/// Holonomic gradient method: `q` at the end of `path` from `q(zbar) = qbar`.
pub fn hgm_integrate(s: &PfaffianSystem, zbar: &NumPoint, qbar: &[f64], path: &Path) -> Result<Vec<f64>> {
    let start = &path.waypoints[0];
    let close = start.coords.len() == zbar.coords.len()
        && start.coords.iter().zip(&zbar.coords).all(|(a, b)| (a - b).abs() <= 1e-14 * b.abs().max(1.0))
        && start.params == zbar.params;
    if !close {
        return Err(Error::BasePointMismatch);
    }
    Integrator::new(s).integrate(qbar, path)
}

/// `(B_x(z) q, B_p(z) q)`.
pub fn eval_gradients(sym: &SymplecticData, q: &[f64], z: &NumPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let apply = |m: &crate::ring::RfMatrix| -> Result<Vec<f64>> {
        (0..m.rows())
            .map(|i| m.row(i).iter().zip(q).map(|(e, qi)| Ok(rf_eval(e, z)? * qi)).sum::<Result<f64>>())
            .collect()
    };
    Ok((apply(&sym.bx)?, apply(&sym.bp)?))
}

/// `{f, g} = (grad_p f)^T grad_x g - (grad_x f)^T grad_p g`.
pub fn poisson_numeric(fx: &[f64], fp: &[f64], gx: &[f64], gp: &[f64]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    dot(fp, gx) - dot(fx, gp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{parse_rational_function, RfMatrix, VarContext};

    fn system(n: usize, mats: &[&[&[&str]]]) -> PfaffianSystem {
        let c = VarContext::new(n, vec![]);
        let a = mats
            .iter()
            .map(|rows| {
                RfMatrix::from_rows(
                    rows.iter().map(|r| r.iter().map(|e| parse_rational_function(e, &c).unwrap()).collect()).collect(),
                    c.nvars(),
                )
            })
            .collect();
        PfaffianSystem::new(c, None, a).unwrap()
    }

    fn pt(v: &[f64]) -> NumPoint {
        NumPoint::new(v.to_vec(), vec![]).unwrap()
    }

    #[test]
    fn rotation_quarter_turn() {
        let s = system(1, &[&[&["0", "1"], &["-1", "0"]], &[&["0", "0"], &["0", "0"]]]);
        let z0 = pt(&[0.0, 0.0]);
        let path = Path::straight(&z0, &pt(&[std::f64::consts::FRAC_PI_2, 0.0]), OdeOptions::default()).unwrap();
        let q = hgm_integrate(&s, &z0, &[0.0, 1.0], &path).unwrap();
        assert!((q[0] - 1.0).abs() < 1e-9 && q[1].abs() < 1e-9, "{q:?}");
    }

    #[test]
    fn exponential_of_product() {
        let s = system(1, &[&[&["p1"]], &[&["x1"]]]);
        let z0 = pt(&[0.0, 0.0]);
        let path = Path::straight(&z0, &pt(&[1.0, 1.0]), OdeOptions::default()).unwrap();
        let q = hgm_integrate(&s, &z0, &[1.0], &path).unwrap();
        assert!((q[0] / std::f64::consts::E - 1.0).abs() < 1e-9);
    }

    #[test]
    fn crossing_the_locus_suggests_a_detour() {
        let s = system(1, &[&[&["1/x1"]], &[&["0"]]]);
        let z0 = pt(&[1.0, 1.0]);
        let path = Path::straight(&z0, &pt(&[-1.0, 1.0]), OdeOptions::default()).unwrap();
        match hgm_integrate(&s, &z0, &[1.0], &path) {
            Err(Error::SingularPathCrossing { point, detour }) => {
                assert!(point[0].abs() < 0.05);
                assert_eq!(detour.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn poisson_conventions() {
        assert_eq!(poisson_numeric(&[1.0], &[0.0], &[0.0], &[1.0]), -1.0);
        let (fx, fp) = ([0.3, -1.2], [2.0, 0.7]);
        assert_eq!(poisson_numeric(&fx, &fp, &fx, &fp), 0.0);
    }

    #[test]
    fn zero_vector_has_zero_gradients() {
        let s = system(1, &[&[&["0", "1"], &["-1", "0"]], &[&["0", "x1"], &["1", "0"]]]);
        let sym = crate::hje::extract_symplectic(&PfaffianSystem {
            basis: Some(vec![crate::ring::Monomial::one(2), crate::ring::Monomial::var(2, 0)]),
            ..s
        })
        .unwrap();
        let (gx, gp) = eval_gradients(&sym, &[0.0, 0.0], &pt(&[0.5, 0.5])).unwrap();
        assert_eq!((gx, gp), (vec![0.0], vec![0.0]));
    }
}
