//! Floating-point form of a Pfaffian system for fast repeated evaluation.

use crate::error::{Error, Result};
use crate::pfaffian::PfaffianSystem;
use crate::ring::{q_to_f64, Poly, RationalFunction, SINGULAR_TOL};

#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let powers = m.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(i, e)| (i, *e as i32)).collect();
                (q_to_f64(c), powers)
            })
            .collect();
        CompiledPoly { terms }
    }

    /// Value and the sum of absolute term values.
    pub fn eval(&self, z: &[f64]) -> (f64, f64) {
        let mut v = 0.0;
        let mut a = 0.0;
        for (c, powers) in &self.terms {
            let mut t = *c;
            for &(i, e) in powers {
                t *= z[i].powi(e);
            }
            v += t;
            a += t.abs();
        }
        (v, a)
    }
}

#[derive(Clone, Debug)]
pub struct CompiledRf {
    num: CompiledPoly,
    den: Option<CompiledPoly>,
}

impl CompiledRf {
    pub fn new(f: &RationalFunction) -> Self {
        let den = if f.den().is_one() { None } else { Some(CompiledPoly::new(f.den())) };
        CompiledRf { num: CompiledPoly::new(f.num()), den }
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        let n = self.num.eval(z).0;
        match &self.den {
            None => Ok(n),
            Some(d) => {
                let (v, a) = d.eval(z);
                if !(v.abs() > SINGULAR_TOL * a) || !v.is_finite() {
                    return Err(Error::SingularPoint(format!("denominator ~ {v:e} at {z:?}")));
                }
                Ok(n / v)
            }
        }
    }
}

/// Sparse `A_i` with compiled entries, and the singular locus.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    pub dim: usize,
    pub nder: usize,
    a: Vec<Vec<(usize, usize, CompiledRf)>>,
    pub locus: CompiledPoly,
}

impl CompiledSystem {
    pub fn new(s: &PfaffianSystem) -> Self {
        let a =
            s.a.iter()
                .map(|m| {
                    let mut entries = Vec::new();
                    for i in 0..m.rows() {
                        for j in 0..m.cols() {
                            if !m.get(i, j).is_zero() {
                                entries.push((i, j, CompiledRf::new(m.get(i, j))));
                            }
                        }
                    }
                    entries
                })
                .collect();
        CompiledSystem { dim: s.dim, nder: s.nder(), a, locus: CompiledPoly::new(&s.singular_locus) }
    }

    /// `out += w * A_i(z) q`.
    pub fn add_a_times(&self, i: usize, z: &[f64], w: f64, q: &[f64], out: &mut [f64]) -> Result<()> {
        for (r, c, e) in &self.a[i] {
            out[*r] += w * e.eval(z)? * q[*c];
        }
        Ok(())
    }

    /// `dq = sum_i zdot_i A_i(z) q`.
    pub fn rate(&self, z: &[f64], zdot: &[f64], q: &[f64], dq: &mut [f64]) -> Result<()> {
        dq.iter_mut().for_each(|v| *v = 0.0);
        for (i, &w) in zdot.iter().enumerate().take(self.nder) {
            if w != 0.0 {
                self.add_a_times(i, z, w, q, dq)?;
            }
        }
        Ok(())
    }

    /// Signed size of the singular locus polynomial at `z` relative to
    /// `sum |c_m| prod max(1, |z_i|)^(m_i)`, so that a monomial factor
    /// approaching zero registers as small.
    pub fn locus_margin(&self, z: &[f64]) -> f64 {
        let (v, _) = self.locus.eval(z);
        let scale: f64 = self
            .locus
            .terms
            .iter()
            .map(|(c, powers)| c.abs() * powers.iter().map(|&(i, e)| z[i].abs().max(1.0).powi(e)).product::<f64>())
            .sum();
        if scale == 0.0 {
            1.0
        } else {
            v / scale
        }
    }
}
