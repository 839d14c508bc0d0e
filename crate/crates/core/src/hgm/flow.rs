use serde::{Deserialize, Serialize};

use super::{dopri45, CompiledRf, Integrator, OdeOptions, Path};
use crate::error::{Error, Result};
use crate::hamparse::GradientOracle;
use crate::pfaffian::HolonomicFunction;
use crate::ring::NumPoint;

/// A function of `z = (x, p)` that can be evaluated and differentiated along
/// a trajectory, possibly by carrying auxiliary state (the vector `q` of a
/// holonomic function).
pub trait FirstIntegral {
    fn aux_len(&self) -> usize {
        0
    }

    /// Auxiliary state at an arbitrary regular point.
    fn aux_at(&self, _z: &NumPoint) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    /// Rate of the auxiliary state when `z` moves with velocity `zdot`.
    fn aux_rate(&self, _z: &NumPoint, _zdot: &[f64], _aux: &[f64], _out: &mut [f64]) -> Result<()> {
        Ok(())
    }

    fn value(&self, z: &NumPoint, aux: &[f64]) -> Result<f64>;

    /// `(grad_x f, grad_p f)` concatenated.
    fn gradient(&self, z: &NumPoint, aux: &[f64]) -> Result<Vec<f64>>;
}

impl FirstIntegral for GradientOracle {
    fn value(&self, z: &NumPoint, _aux: &[f64]) -> Result<f64> {
        GradientOracle::value(self, z)
    }

    fn gradient(&self, z: &NumPoint, _aux: &[f64]) -> Result<Vec<f64>> {
        GradientOracle::gradient(self, z)
    }
}

/// `f = e(z) . q(z)` with `q` carried along by the Pfaffian system.
#[derive(Clone, Debug)]
pub struct HolonomicIntegral {
    pub f: HolonomicFunction,
    pub integrator: Integrator,
    extract: Vec<CompiledRf>,
    d_extract: Vec<Vec<CompiledRf>>,
    pub ode: OdeOptions,
}

impl HolonomicIntegral {
    pub fn new(f: &HolonomicFunction, ode: OdeOptions) -> Self {
        let extract = f.extract.iter().map(CompiledRf::new).collect();
        let d_extract =
            (0..f.system.nder()).map(|i| f.extract.iter().map(|e| CompiledRf::new(&e.diff(i))).collect()).collect();
        HolonomicIntegral { f: f.clone(), integrator: Integrator::new(&f.system), extract, d_extract, ode }
    }

    /// `q(z)` along the straight path from the base point, retrying once
    /// through the suggested detour.
    pub fn q_at(&self, z: &NumPoint) -> Result<Vec<f64>> {
        let base = &self.f.base_point;
        let path = Path::straight(base, z, self.ode)?;
        match self.integrator.integrate(&self.f.qbar, &path) {
            Err(Error::SingularPathCrossing { detour, .. }) => {
                let via = z.with_coords(detour);
                let path = Path::new(vec![base.clone(), via, z.clone()], self.ode)?;
                self.integrator.integrate(&self.f.qbar, &path)
            }
            other => other,
        }
    }
}

fn dot_compiled(row: &[CompiledRf], z: &[f64], q: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for (e, qi) in row.iter().zip(q) {
        acc += e.eval(z)? * qi;
    }
    Ok(acc)
}

impl FirstIntegral for HolonomicIntegral {
    fn aux_len(&self) -> usize {
        self.f.dim()
    }

    fn aux_at(&self, z: &NumPoint) -> Result<Vec<f64>> {
        self.q_at(z)
    }

    fn aux_rate(&self, z: &NumPoint, zdot: &[f64], aux: &[f64], out: &mut [f64]) -> Result<()> {
        self.integrator.compiled.rate(&z.values(), zdot, aux, out)
    }

    fn value(&self, z: &NumPoint, aux: &[f64]) -> Result<f64> {
        dot_compiled(&self.extract, &z.values(), aux)
    }

    fn gradient(&self, z: &NumPoint, aux: &[f64]) -> Result<Vec<f64>> {
        let vals = z.values();
        let d = self.f.dim();
        (0..self.f.system.nder())
            .map(|i| {
                let mut aq = vec![0.0; d];
                self.integrator.compiled.add_a_times(i, &vals, 1.0, aux, &mut aq)?;
                Ok(dot_compiled(&self.d_extract[i], &vals, aux)? + dot_compiled(&self.extract, &vals, &aq)?)
            })
            .collect()
    }
}

/// Auxiliary state of `f` moved along the straight segment `from -> to`.
pub fn transport(
    f: &dyn FirstIntegral,
    from: &NumPoint,
    to: &NumPoint,
    aux: &[f64],
    ode: &OdeOptions,
) -> Result<Vec<f64>> {
    if f.aux_len() == 0 || from.coords == to.coords {
        return Ok(aux.to_vec());
    }
    let dz: Vec<f64> = from.coords.iter().zip(&to.coords).map(|(a, b)| b - a).collect();
    let mut z = from.clone();
    let sol = dopri45(
        |t, y, dy| {
            for (i, zi) in z.coords.iter_mut().enumerate() {
                *zi = from.coords[i] + t * dz[i];
            }
            f.aux_rate(&z, &dz, y, dy)
        },
        0.0,
        aux,
        1.0,
        ode,
    )?;
    Ok(sol.y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    pub duration: f64,
    /// Number of recorded intervals; the trajectory is stored at `samples + 1` times.
    pub samples: usize,
    pub ode: OdeOptions,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { duration: 1.0, samples: 100, ode: OdeOptions::default() }
    }
}

/// Trajectory of `xdot = grad_p h, pdot = -grad_x h` with monitored values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `values[k][m]` = monitor `m` at time `k`.
    pub values: Vec<Vec<f64>>,
    pub h_values: Vec<f64>,
}

impl FlowResult {
    /// `max_t |f_m(z(t)) - f_m(z(0))|`.
    pub fn drift(&self, m: usize) -> f64 {
        let v0 = self.values[0][m];
        self.values.iter().map(|v| (v[m] - v0).abs()).fold(0.0, f64::max)
    }

    pub fn h_drift(&self) -> f64 {
        let h0 = self.h_values[0];
        self.h_values.iter().map(|v| (v - h0).abs()).fold(0.0, f64::max)
    }

    /// CSV with columns `t`, the state components, `f1..fm` and `h`.
    pub fn write_csv<W: std::io::Write>(&self, names: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let nm = self.values.first().map_or(0, |v| v.len());
        let mut header = vec!["t".to_string()];
        header.extend(names.iter().cloned());
        header.extend((1..=nm).map(|m| format!("f{m}")));
        header.push("h".into());
        let io = |e: csv::Error| Error::Invalid(format!("csv output failed: {e}"));
        w.write_record(&header).map_err(io)?;
        for k in 0..self.times.len() {
            let mut row = vec![format!("{:.16e}", self.times[k])];
            row.extend(self.states[k].iter().map(|v| format!("{v:.16e}")));
            row.extend(self.values[k].iter().map(|v| format!("{v:.16e}")));
            row.push(format!("{:.16e}", self.h_values[k]));
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Invalid(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// Integrates the Hamiltonian system of `h` from `z0`, carrying the
/// auxiliary state of `h` and of every monitor.
pub fn hamiltonian_flow(
    h: &dyn FirstIntegral,
    monitors: &[&dyn FirstIntegral],
    z0: &NumPoint,
    opts: &FlowOptions,
) -> Result<FlowResult> {
    let nz = z0.coords.len();
    let n = nz / 2;
    let all: Vec<&dyn FirstIntegral> = std::iter::once(h).chain(monitors.iter().copied()).collect();
    let mut offsets = vec![nz];
    let mut state = z0.coords.clone();
    for f in &all {
        let aux = f.aux_at(z0)?;
        if aux.len() != f.aux_len() {
            return Err(Error::Dimension("auxiliary state has the wrong length".into()));
        }
        state.extend(aux);
        offsets.push(state.len());
    }
    let record = |state: &[f64]| -> Result<(Vec<f64>, f64)> {
        let z = z0.with_coords(state[..nz].to_vec());
        let hv = all[0].value(&z, &state[offsets[0]..offsets[1]])?;
        let vals =
            (1..all.len()).map(|m| all[m].value(&z, &state[offsets[m]..offsets[m + 1]])).collect::<Result<Vec<_>>>()?;
        Ok((vals, hv))
    };
    let mut z = z0.clone();
    let mut zdot = vec![0.0; nz];
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        z.coords.copy_from_slice(&y[..nz]);
        let g = all[0].gradient(&z, &y[offsets[0]..offsets[1]])?;
        for i in 0..n {
            zdot[i] = g[n + i];
            zdot[n + i] = -g[i];
        }
        dy[..nz].copy_from_slice(&zdot);
        for (m, f) in all.iter().enumerate() {
            let (a, b) = (offsets[m], offsets[m + 1]);
            f.aux_rate(&z, &zdot, &y[a..b], &mut dy[a..b])?;
        }
        Ok(())
    };
    let samples = opts.samples.max(1);
    let dt = opts.duration / samples as f64;
    let (v0, h0) = record(&state)?;
    let mut out =
        FlowResult { times: vec![0.0], states: vec![z0.coords.clone()], values: vec![v0], h_values: vec![h0] };
    for k in 0..samples {
        let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
        state = dopri45(&mut rhs, t0, &state, t1, &opts.ode)
            .map_err(|e| match e {
                Error::SingularPoint(_) => Error::SingularPathCrossing {
                    point: out.states.last().cloned().unwrap_or_default(),
                    detour: Vec::new(),
                },
                other => other,
            })?
            .y;
        let (v, hv) = record(&state)?;
        out.times.push(t1);
        out.states.push(state[..nz].to_vec());
        out.values.push(v);
        out.h_values.push(hv);
    }
    Ok(out)
}
