use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use super::poly::Poly;
use super::ratfun::RationalFunction;
use super::Q;
use crate::error::{Error, Result};

/// Relative threshold below which a denominator counts as vanishing.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Relative threshold for base points: the singular locus must exceed it there.
pub const BASE_POINT_TOL: f64 = 1e-10;

/// Working precision for numeric evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double arithmetic (about 31 significant digits), rounded to
    /// binary64 at the end.
    Extended,
}

/// A numeric point `z = (x, p)` together with values of the free parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumPoint {
    pub coords: Vec<f64>,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl NumPoint {
    pub fn new(coords: Vec<f64>, params: Vec<f64>) -> Result<Self> {
        if coords.len() % 2 != 0 {
            return Err(Error::Dimension(format!("point has odd dimension {}", coords.len())));
        }
        if coords.iter().chain(&params).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("point has non-finite entries".into()));
        }
        Ok(NumPoint { coords, params })
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    /// All polynomial variable values: coordinates then parameters.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.coords.clone();
        v.extend_from_slice(&self.params);
        v
    }

    pub fn with_coords(&self, coords: Vec<f64>) -> NumPoint {
        NumPoint { coords, params: self.params.clone() }
    }
}

/// Evaluates `f` at `z`; fails with `SingularPoint` when the denominator is
/// below `SINGULAR_TOL` relative to its term magnitudes.
pub fn rf_eval(f: &RationalFunction, z: &NumPoint) -> Result<f64> {
    f.eval_f64(&z.values(), SINGULAR_TOL)
}

pub fn rf_eval_with(f: &RationalFunction, z: &NumPoint, precision: Precision) -> Result<f64> {
    match precision {
        Precision::Double => rf_eval(f, z),
        Precision::Extended => {
            let vals: Vec<TwoFloat> = z.values().into_iter().map(TwoFloat::from).collect();
            let d = poly_eval_dd(f.den(), &vals);
            let scale = f.den().eval_abs_f64(&z.values());
            if !(f64::from(d).abs() > SINGULAR_TOL * scale) {
                return Err(Error::SingularPoint(format!("denominator {:?}", f.den())));
            }
            Ok(f64::from(poly_eval_dd(f.num(), &vals) / d))
        }
    }
}

fn q_to_dd(q: &Q) -> TwoFloat {
    let n = TwoFloat::from(super::poly::q_to_f64(&Q::from_integer(q.numer().clone())));
    let d = TwoFloat::from(super::poly::q_to_f64(&Q::from_integer(q.denom().clone())));
    n / d
}

pub(crate) fn poly_eval_dd(p: &Poly, vals: &[TwoFloat]) -> TwoFloat {
    let mut acc = TwoFloat::from(0.0);
    for (m, c) in p.terms() {
        let mut t = q_to_dd(c);
        for (e, x) in m.0.iter().zip(vals) {
            for _ in 0..*e {
                t *= *x;
            }
        }
        acc += t;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_validation() {
        assert!(NumPoint::new(vec![1.0, 2.0, 3.0], vec![]).is_err());
        assert!(NumPoint::new(vec![1.0, f64::NAN], vec![]).is_err());
        let z = NumPoint::new(vec![1.0, 2.0], vec![3.0]).unwrap();
        assert_eq!(z.values(), vec![1.0, 2.0, 3.0]);
        assert_eq!(z.n(), 1);
    }

    #[test]
    fn extended_agrees_with_double() {
        // (x1 + 1/3) / p1 at (0.25, 0.75)
        let n = &Poly::var(2, 0) + &Poly::constant(2, crate::ring::q(1, 3));
        let f = RationalFunction::new(n, Poly::var(2, 1)).unwrap();
        let z = NumPoint::new(vec![0.25, 0.75], vec![]).unwrap();
        let a = rf_eval(&f, &z).unwrap();
        let b = rf_eval_with(&f, &z, Precision::Extended).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!((b - (0.25 + 1.0 / 3.0) / 0.75).abs() < 1e-15);
    }
}
