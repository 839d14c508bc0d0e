//! Dormand-Prince 5(4) with PI step-size control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_steps: 100_000 }
    }
}

impl OdeOptions {
    /// Tolerances used when re-running a computation for verification.
    pub fn tightened(&self) -> Self {
        OdeOptions {
            rtol: (self.rtol * 1e-3).max(1e-14),
            atol: (self.atol * 1e-3).max(1e-16),
            max_steps: self.max_steps * 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn dopri45<F>(mut f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 || n == 0 {
        return Ok(OdeSolution { y, accepted: 0, rejected: 0 });
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    f(t, &y, &mut k1)?;
    let mut h = initial_step(&mut f, t, &y, &k1, dir, span, opts)?;
    // New step h / fac with fac in [facc2, facc1]: at most tenfold growth, fivefold shrink.
    let (beta, expo1, safe, facc1, facc2) = (0.04, 0.2 - 0.04 * 0.75, 0.9, 5.0, 0.1);
    let mut facold: f64 = 1e-4;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut last_rejected = false;
    loop {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::StepLimitExceeded(opts.max_steps));
        }
        let remaining = (t1 - t) * dir;
        if remaining <= 1e-14 * span.max(t1.abs()) {
            break;
        }
        if h.abs() > remaining {
            h = remaining * dir;
        }
        let stage = |ytmp: &mut [f64], coeffs: &[(f64, &[f64])], y: &[f64]| {
            for i in 0..n {
                ytmp[i] = y[i] + h * coeffs.iter().map(|(c, k)| c * k[i]).sum::<f64>();
            }
        };
        stage(&mut ytmp, &[(A21, &k1)], &y);
        f(t + C2 * h, &ytmp, &mut k2)?;
        stage(&mut ytmp, &[(A31, &k1), (A32, &k2)], &y);
        f(t + C3 * h, &ytmp, &mut k3)?;
        stage(&mut ytmp, &[(A41, &k1), (A42, &k2), (A43, &k3)], &y);
        f(t + C4 * h, &ytmp, &mut k4)?;
        stage(&mut ytmp, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &y);
        f(t + C5 * h, &ytmp, &mut k5)?;
        stage(&mut ytmp, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], &y);
        f(t + h, &ytmp, &mut k6)?;
        stage(&mut ynew, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)], &y);
        f(t + h, &ynew, &mut k7)?;
        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sk) * (e / sk);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            h *= 0.1;
            rejected += 1;
            last_rejected = true;
            continue;
        }
        let fac11 = err.powf(expo1);
        let fac = (fac11 / facold.powf(beta) / safe).clamp(facc2, facc1);
        if err <= 1.0 {
            facold = err.max(1e-4);
            accepted += 1;
            t += h;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            let mut hnew = h / fac;
            if last_rejected {
                hnew = dir * hnew.abs().min(h.abs());
            }
            last_rejected = false;
            h = hnew;
        } else {
            rejected += 1;
            last_rejected = true;
            h /= (fac11 / safe).min(facc1);
        }
        if h.abs() < 1e-15 * t.abs().max(1.0) {
            return Err(Error::StepLimitExceeded(accepted + rejected));
        }
    }
    Ok(OdeSolution { y, accepted, rejected })
}

fn initial_step<F>(f: &mut F, t: f64, y: &[f64], f0: &[f64], dir: f64, span: f64, opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let sk: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[f64]| (v.iter().zip(&sk).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt();
    let (d0, d1) = (norm(y), norm(f0));
    let mut h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + dir * h * b).collect();
    let mut f1 = vec![0.0; n];
    f(t + dir * h, &y1, &mut f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h;
    let h1 = if d1.max(d2) <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok(dir * (100.0 * h).min(h1).min(span))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let sol = dopri45(
            |_, y, dy| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            &[1.0],
            1.0,
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((sol.y[0] - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn rotation_backwards() {
        let rot = |_: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        };
        let t = std::f64::consts::FRAC_PI_2;
        let sol = dopri45(rot, t, &[1.0, 0.0], 0.0, &OdeOptions::default()).unwrap();
        assert!(sol.y[0].abs() < 1e-9 && (sol.y[1] - 1.0).abs() < 1e-9, "{:?}", sol.y);
    }

    #[test]
    fn step_limit_is_reported() {
        let opts = OdeOptions { max_steps: 3, ..OdeOptions::default() };
        let r = dopri45(
            |t, _, dy| {
                dy[0] = (50.0 * t).cos();
                Ok(())
            },
            0.0,
            &[0.0],
            100.0,
            &opts,
        );
        assert!(matches!(r, Err(Error::StepLimitExceeded(3))));
    }
}
