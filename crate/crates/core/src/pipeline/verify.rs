use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineConfig;
use crate::error::{Error, Result};
use crate::hamparse::{GradientOracle, HamiltonianAst};
use crate::hgm::{
    hamiltonian_flow, poisson_numeric, reconstruct_v, FirstIntegral, FlowOptions, HolonomicIntegral, ReconstructOptions,
};
use crate::pfaffian::HolonomicFunction;
use crate::ring::{NumPoint, Precision};

/// Smallest relative singular-locus size accepted for a sample point.
const SAMPLE_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    /// `None` when the check could not be carried out.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    /// Whether the overall verdict depends on this metric.
    pub required: bool,
    pub note: Option<String>,
}

impl Metric {
    fn measured(name: &str, value: f64, tolerance: f64, required: bool) -> Self {
        Metric { name: name.into(), value: Some(value), tolerance, passed: value <= tolerance, required, note: None }
    }

    fn failed(name: &str, tolerance: f64, required: bool, note: String) -> Self {
        Metric { name: name.into(), value: None, tolerance, passed: false, required, note: Some(note) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyBody {
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub seed: u64,
    pub sample_points: Vec<Vec<f64>>,
    pub base_values: Vec<f64>,
    pub flow_csv: Option<String>,
    pub reconstruct_csv: Option<String>,
}

impl VerifyBody {
    pub fn failing(&self) -> Vec<&Metric> {
        self.metrics.iter().filter(|m| m.required && !m.passed).collect()
    }
}

/// Numeric checks of the first integrals `f_1 = h, f_2, .., f_n`.
pub fn verify(
    config: &PipelineConfig,
    ast: &HamiltonianAst,
    h: &HolonomicFunction,
    chosen: &[Vec<f64>],
    out_dir: &Path,
) -> Result<VerifyBody> {
    let vc = &config.verify;
    let tol = &vc.tolerances;
    let ode = config.ode;
    let mut fs_owned = vec![HolonomicIntegral::new(h, ode)];
    for q in chosen {
        let f = HolonomicFunction::new(h.system.clone(), h.extract.clone(), h.base_point.clone(), q.clone())?;
        fs_owned.push(HolonomicIntegral::new(&f, ode));
    }
    let fs: Vec<&dyn FirstIntegral> = fs_owned.iter().map(|f| f as &dyn FirstIntegral).collect();
    let oracle = GradientOracle::new(ast);
    let zbar = &h.base_point;
    let n = config.n;
    let mut metrics = Vec::new();

    let base_values = fs_owned.iter().map(|f| f.value(zbar, &f.f.qbar)).collect::<Result<Vec<_>>>()?;
    let on_manifold = base_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    metrics.push(Metric::measured("manifold_at_base", on_manifold, tol.manifold, false));

    // Poisson brackets and agreement with the closed form at random points.
    let points = sample_points(&fs_owned[0], zbar, vc.samples, vc.radius, config.seed)?;
    let mut poisson = 0.0f64;
    let mut agreement = 0.0f64;
    let mut refinement = 0.0f64;
    let tight = ode.tightened();
    for z in &points {
        let qs = fs_owned.iter().map(|f| f.q_at(z)).collect::<Result<Vec<_>>>()?;
        let grads = fs.iter().zip(&qs).map(|(f, q)| f.gradient(z, q)).collect::<Result<Vec<_>>>()?;
        for k in 0..grads.len() {
            for l in k + 1..grads.len() {
                let (gk, gl) = (&grads[k], &grads[l]);
                poisson = poisson.max(poisson_numeric(&gk[..n], &gk[n..], &gl[..n], &gl[n..]).abs());
            }
        }
        let exact = oracle.value(z)?;
        let hv = fs[0].value(z, &qs[0])?;
        agreement = agreement.max((hv - exact).abs() / exact.abs().max(1.0));
        if config.precision == Precision::Extended {
            for (f, q) in fs_owned.iter().zip(&qs) {
                let fine = HolonomicIntegral::new(&f.f, tight);
                let qf = fine.q_at(z)?;
                let (a, b) = (f.value(z, q)?, fine.value(z, &qf)?);
                refinement = refinement.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    if fs.len() > 1 {
        metrics.push(Metric::measured("poisson_max", poisson, tol.poisson, true));
    }
    metrics.push(Metric::measured("hgm_closed_form_agreement", agreement, tol.refinement, true));
    if config.precision == Precision::Extended {
        metrics.push(Metric::measured("hgm_refinement", refinement, tol.refinement, true));
    }

    // Conservation along the Hamiltonian flow of h (closed-form gradient).
    let flow_opts = FlowOptions { duration: vc.flow_duration, samples: vc.flow_samples.max(1), ode };
    let mut flow_csv = None;
    match hamiltonian_flow(&oracle, &fs, zbar, &flow_opts) {
        Ok(flow) => {
            let drift = (0..fs.len()).map(|m| flow.drift(m)).fold(0.0f64, f64::max);
            metrics.push(Metric::measured("conservation", drift, tol.conservation, true));
            metrics.push(Metric::measured("h_drift", flow.h_drift(), tol.conservation, true));
            let path = out_dir.join("flow.csv");
            let names = h.system.ctx.names();
            let file = fs::File::create(&path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
            flow.write_csv(&names[..2 * n], file)?;
            flow_csv = Some("flow.csv".to_string());
        }
        Err(e) => metrics.push(Metric::failed("conservation", tol.conservation, true, e.to_string())),
    }

    // Local reconstruction of v along an x-path from the base point.
    let mut reconstruct_csv = None;
    if on_manifold <= tol.manifold {
        let dir = vc.path_direction.clone().unwrap_or_else(|| vec![1.0; n]);
        let x0 = &zbar.coords[..n];
        let xs: Vec<Vec<f64>> = (0..vc.path_points.max(2))
            .map(|k| x0.iter().zip(&dir).map(|(x, d)| x + k as f64 * vc.path_step * d).collect())
            .collect();
        let ropts = ReconstructOptions { ode, start_tol: tol.manifold, ..ReconstructOptions::default() };
        match reconstruct_v(&fs, &xs, &zbar.coords[n..], &zbar.params, &ropts) {
            Ok(rec) => {
                let mut residual = 0.0f64;
                let mut rows = Vec::new();
                for k in 0..rec.xs.len() {
                    let coords: Vec<f64> = rec.xs[k].iter().chain(&rec.ps[k]).copied().collect();
                    let hv = oracle.value(&zbar.with_coords(coords.clone()))?;
                    residual = residual.max(hv.abs());
                    let mut row = vec![k as f64];
                    row.extend(coords);
                    row.extend([rec.v[k], hv, rec.constraint[k], rec.symmetry_defect[k]]);
                    rows.push(row);
                }
                let symmetry = rec.symmetry_defect.iter().fold(0.0f64, |m, v| m.max(*v));
                metrics.push(Metric::measured("hje_residual", residual, tol.residual, true));
                metrics.push(Metric::measured("symmetry_defect", symmetry, tol.symmetry, true));
                let names = h.system.ctx.names();
                let mut header = vec!["k".to_string()];
                header.extend(names[..2 * n].iter().cloned());
                header.extend(["v", "h", "constraint", "symmetry_defect"].map(String::from));
                write_rows(&out_dir.join("reconstruct.csv"), &header, &rows)?;
                reconstruct_csv = Some("reconstruct.csv".to_string());
            }
            Err(e) => {
                metrics.push(Metric::failed("hje_residual", tol.residual, true, e.to_string()));
            }
        }
    } else {
        let note = "base point is not on the common zero set of the first integrals".to_string();
        metrics.push(Metric::failed("hje_residual", tol.residual, false, note));
    }

    let passed = metrics.iter().all(|m| !m.required || m.passed);
    Ok(VerifyBody {
        passed,
        metrics,
        seed: config.seed,
        sample_points: points.iter().map(|p| p.coords.clone()).collect(),
        base_values,
        flow_csv,
        reconstruct_csv,
    })
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let err = |e: String| Error::Invalid(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(|e| err(e.to_string()))?;
    w.write_record(header).map_err(|e| err(e.to_string()))?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:.16e}"))).map_err(|e| err(e.to_string()))?;
    }
    w.flush().map_err(|e| err(e.to_string()))
}

/// Seeded points within `radius` of `zbar`, in its orthant and away from the
/// singular locus.
fn sample_points(
    f: &HolonomicIntegral,
    zbar: &NumPoint,
    count: usize,
    radius: f64,
    seed: u64,
) -> Result<Vec<NumPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = zbar.coords.len();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(Error::Invalid(format!("found only {} regular sample points near the base point", out.len())));
        }
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if u.iter().map(|x| x * x).sum::<f64>() > 1.0 {
            continue;
        }
        let coords: Vec<f64> = zbar.coords.iter().zip(&u).map(|(z, d)| z + radius * d).collect();
        let same_orthant = coords.iter().zip(&zbar.coords).all(|(c, z)| *z == 0.0 || c * z > 0.0);
        let z = zbar.with_coords(coords);
        if same_orthant && f.integrator.compiled.locus_margin(&z.values()).abs() > SAMPLE_MARGIN {
            out.push(z);
        }
    }
    Ok(out)
}
