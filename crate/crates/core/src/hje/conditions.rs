use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{GammaCertificate, SymplecticData};
use crate::error::{Error, Result};
use crate::pfaffian::{HolonomicFunction, PfaffianSystem};
use crate::ring::{rf_eval_with, Monomial, NumPoint, Poly, Precision, RfMatrix, BASE_POINT_TOL};

/// Threshold on the column-normalized projectivity determinant.
pub const PROJECTIVITY_TOL: f64 = 1e-9;
/// Relative pivot threshold of the numeric nullspace computation.
const RANK_TOL: f64 = 1e-9;
/// Largest denominator tried when recognizing rational entries.
const MAX_DENOMINATOR: i64 = 1000;

/// The numeric data of the finite conditions `qbar_k^T M_g qbar_l = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSet {
    pub zbar: NumPoint,
    pub gamma: Vec<Monomial>,
    /// `M_g = (D^g Omega)(zbar)`, one `d x d` matrix per element of `Gamma`.
    pub m: Vec<Vec<Vec<f64>>>,
    pub qbar1: Vec<f64>,
    /// `B_p(zbar)`, `n x d`.
    pub bp: Vec<Vec<f64>>,
}

impl ConditionSet {
    pub fn dim(&self) -> usize {
        self.qbar1.len()
    }

    /// `max_g |u^T M_g v|`.
    pub fn residual(&self, u: &[f64], v: &[f64]) -> f64 {
        self.m.iter().map(|mg| bilinear(mg, u, v).abs()).fold(0.0, f64::max)
    }
}

fn bilinear(m: &[Vec<f64>], u: &[f64], v: &[f64]) -> f64 {
    m.iter().zip(u).map(|(row, ui)| ui * row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()).sum()
}

fn eval_matrix(m: &RfMatrix, z: &NumPoint, precision: Precision) -> Result<Vec<Vec<f64>>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|e| rf_eval_with(e, z, precision)).collect()).collect()
}

fn check_nonzero(p: &Poly, z: &NumPoint, what: &str, names: &[String]) -> Result<()> {
    let vals = z.values();
    let v = p.eval_f64(&vals);
    if !(v.abs() > BASE_POINT_TOL * p.eval_abs_f64(&vals)) {
        return Err(Error::SingularBasePoint(format!("{what} {} vanishes at {:?}", p.fmt_with(names), z.coords)));
    }
    Ok(())
}

/// Evaluates the matrices `D^g Omega` at `zbar` and takes `qbar1` from `h`.
pub fn condition_set(
    cert: &GammaCertificate,
    sym: &SymplecticData,
    s: &PfaffianSystem,
    h: &HolonomicFunction,
    zbar: &NumPoint,
    precision: Precision,
) -> Result<ConditionSet> {
    if &h.base_point != zbar || h.system.ctx != s.ctx || h.dim() != s.dim {
        return Err(Error::BasePointMismatch);
    }
    let names = s.ctx.names();
    check_nonzero(&s.singular_locus, zbar, "singular locus", &names)?;
    check_nonzero(&cert.e, zbar, "coefficient denominator", &names)?;
    let m = cert.domega.iter().map(|g| eval_matrix(g, zbar, precision)).collect::<Result<Vec<_>>>()?;
    let bp = eval_matrix(&sym.bp, zbar, precision)?;
    Ok(ConditionSet { zbar: zbar.clone(), gamma: cert.gamma.clone(), m, qbar1: h.qbar.clone(), bp })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projectivity {
    pub admissible: bool,
    pub det: f64,
    /// Determinant after scaling every column of `[qbar_1 .. qbar_n]` to unit norm.
    pub det_normalized: f64,
}

/// `det(B_p(zbar) [qbar_1 .. qbar_n])`.
pub fn check_projectivity(bp: &[Vec<f64>], qbars: &[Vec<f64>]) -> Result<Projectivity> {
    let n = bp.len();
    let d = bp.first().map_or(0, |r| r.len());
    if qbars.len() != n || qbars.iter().any(|q| q.len() != d) || bp.iter().any(|r| r.len() != d) {
        return Err(Error::Dimension(format!("projectivity needs {n} vectors of length {d}")));
    }
    if n == 0 {
        return Ok(Projectivity { admissible: true, det: 1.0, det_normalized: 1.0 });
    }
    let b = DMatrix::from_fn(n, d, |i, j| bp[i][j]);
    let q = DMatrix::from_fn(d, n, |i, j| qbars[j][i]);
    let det = (&b * &q).determinant();
    let norms: f64 = qbars.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
    let det_normalized = if norms > 0.0 { det / norms } else { 0.0 };
    Ok(Projectivity { admissible: det_normalized.abs() > PROJECTIVITY_TOL, det, det_normalized })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbarCandidate {
    pub q: Vec<f64>,
    pub admissible: bool,
    pub det: f64,
    pub det_normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QbarSolution {
    pub n: usize,
    /// Basis of `{q : qbar1^T M_g q = 0 for all g}`.
    pub nullspace: Vec<Vec<f64>>,
    /// Nullspace vectors with their projectivity verdict (for `n = 2`).
    pub candidates: Vec<QbarCandidate>,
    /// Admissible tuples `(qbar_2, .., qbar_n)`.
    pub tuples: Vec<Vec<Vec<f64>>>,
}

impl QbarSolution {
    /// True when `q` lies in the span of the nullspace basis (relative 1e-8).
    pub fn spans(&self, q: &[f64]) -> bool {
        let d = q.len();
        let k = self.nullspace.len();
        if k == 0 {
            return q.iter().all(|v| *v == 0.0);
        }
        let a = DMatrix::from_fn(d, k, |i, j| self.nullspace[j][i]);
        let b = nalgebra::DVector::from_column_slice(q);
        let Ok(x) = a.clone().svd(true, true).solve(&b, 1e-12) else { return false };
        (a * x - &b).norm() <= 1e-8 * b.norm().max(1.0)
    }
}

/// Solves the finite conditions for the remaining boundary vectors.
pub fn solve_qbars(cond: &ConditionSet, n: usize) -> Result<QbarSolution> {
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    if cond.bp.len() != n {
        return Err(Error::Dimension(format!("condition set has {} momenta, expected {n}", cond.bp.len())));
    }
    if n == 1 {
        return Ok(QbarSolution { n, nullspace: Vec::new(), candidates: Vec::new(), tuples: vec![Vec::new()] });
    }
    let nullspace = condition_nullspace(cond, &[cond.qbar1.clone()]);
    if n == 2 {
        let mut candidates = Vec::new();
        for q in &nullspace {
            let p = check_projectivity(&cond.bp, &[cond.qbar1.clone(), q.clone()])?;
            candidates.push(QbarCandidate {
                q: q.clone(),
                admissible: p.admissible,
                det: p.det,
                det_normalized: p.det_normalized,
            });
        }
        let tuples: Vec<Vec<Vec<f64>>> =
            candidates.iter().filter(|c| c.admissible).map(|c| vec![c.q.clone()]).collect();
        if tuples.is_empty() {
            return Err(Error::NoSolution(if nullspace.is_empty() {
                "the conditions have only the zero solution".into()
            } else {
                "no nullspace vector satisfies the projectivity condition".into()
            }));
        }
        return Ok(QbarSolution { n, nullspace, candidates, tuples });
    }
    // Greedy: each new vector solves the conditions against all previous
    // ones and must raise the rank of B_p [qbar_1 .. qbar_k].
    let mut chosen = vec![cond.qbar1.clone()];
    for k in 2..=n {
        let basis = condition_nullspace(cond, &chosen);
        let current = bp_rank(&cond.bp, &chosen);
        let next = basis.into_iter().find(|q| {
            let mut trial = chosen.clone();
            trial.push(q.clone());
            bp_rank(&cond.bp, &trial) > current
        });
        match next {
            Some(q) => chosen.push(q),
            None => {
                return Err(Error::NoSolution(format!("greedy choice found no admissible boundary vector {k} of {n}")))
            }
        }
    }
    let p = check_projectivity(&cond.bp, &chosen)?;
    if !p.admissible {
        return Err(Error::NoSolution("greedy tuple violates the projectivity condition".into()));
    }
    Ok(QbarSolution { n, nullspace, candidates: Vec::new(), tuples: vec![chosen[1..].to_vec()] })
}

fn bp_rank(bp: &[Vec<f64>], qs: &[Vec<f64>]) -> usize {
    let n = bp.len();
    let d = bp[0].len();
    let b = DMatrix::from_fn(n, d, |i, j| bp[i][j]);
    let q = DMatrix::from_fn(d, qs.len(), |i, j| {
        qs[j][i] / qs[j].iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE)
    });
    (b * q).rank(PROJECTIVITY_TOL)
}

/// Normalized basis of `{q : u^T M_g q = 0 for all u in us, g in Gamma}`.
fn condition_nullspace(cond: &ConditionSet, us: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = cond.dim();
    let mut rows = Vec::new();
    for u in us {
        for mg in &cond.m {
            rows.push((0..d).map(|j| (0..d).map(|i| u[i] * mg[i][j]).sum::<f64>()).collect::<Vec<f64>>());
        }
    }
    nullspace(rows, d).into_iter().map(|v| normalize_vector(&v)).collect()
}

/// Nullspace basis by reduced row echelon form with partial pivoting; one
/// vector per free column, in column order.
pub(crate) fn nullspace(mut rows: Vec<Vec<f64>>, d: usize) -> Vec<Vec<f64>> {
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = RANK_TOL * scale.max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..d {
        if r == rows.len() {
            break;
        }
        let (p, best) =
            (r..rows.len()).map(|i| (i, rows[i][c].abs())).fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            for row in rows.iter_mut().skip(r) {
                row[c] = 0.0;
            }
            continue;
        }
        rows.swap(r, p);
        let inv = 1.0 / rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0.0 {
                let f = rows[i][c];
                for j in 0..d {
                    let t = f * rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..d)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![0.0; d];
            v[free] = 1.0;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][free];
            }
            v
        })
        .collect()
}

/// Integer-scaled when every entry is recognized as a small rational,
/// otherwise unit norm; the first nonzero entry is made positive.
pub(crate) fn normalize_vector(v: &[f64]) -> Vec<f64> {
    let big = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if big == 0.0 {
        return v.to_vec();
    }
    let first = v.iter().find(|x| x.abs() > 1e-12 * big).copied().unwrap_or(1.0);
    let w: Vec<f64> = v.iter().map(|x| if x.abs() > 1e-12 * big { x / first } else { 0.0 }).collect();
    let fracs: Option<Vec<(i64, i64)>> = w.iter().map(|&x| rationalize(x)).collect();
    if let Some(fracs) = fracs {
        let l = fracs.iter().fold(1i64, |acc, &(_, den)| num_integer::lcm(acc, den));
        let ints: Vec<i64> = fracs.iter().map(|&(num, den)| num * (l / den)).collect();
        let g = ints.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x)).max(1);
        if ints.iter().all(|x| x.abs() / g <= 1_000_000) {
            return ints.iter().map(|&x| (x / g) as f64 + 0.0).collect();
        }
    }
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter().map(|x| x / norm).collect()
}

/// Continued-fraction approximation with denominator at most `MAX_DENOMINATOR`,
/// accepted only if it reproduces `x` to 1e-9 relative.
fn rationalize(x: f64) -> Option<(i64, i64)> {
    if x.abs() < 1e-12 {
        return Some((0, 1));
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e9 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= 1e-9 * x.abs().max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - r.floor();
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard_form() -> Vec<Vec<f64>> {
        // [[0, I], [-I, 0]] on R^4.
        let mut m = vec![vec![0.0; 4]; 4];
        for i in 0..2 {
            m[i][i + 2] = 1.0;
            m[i + 2][i] = -1.0;
        }
        m
    }

    fn brute_rank(rows: &[Vec<f64>]) -> usize {
        let r = rows.len();
        let c = rows[0].len();
        DMatrix::from_fn(r, c, |i, j| rows[i][j]).rank(1e-12)
    }

    #[test]
    fn symplectic_nullspace_has_dimension_three() {
        let cond = ConditionSet {
            zbar: NumPoint::new(vec![0.0, 0.0, 0.0, 0.0], vec![]).unwrap(),
            gamma: vec![Monomial::one(4)],
            m: vec![standard_form()],
            qbar1: vec![1.0, 0.0, 0.0, 0.0],
            bp: vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]],
        };
        let ns = condition_nullspace(&cond, &[cond.qbar1.clone()]);
        assert_eq!(ns.len(), 3);
        for v in &ns {
            assert!(cond.residual(&cond.qbar1, v) < 1e-14);
        }
        // Oracle: the single condition row has rank 1, so the nullspace has dimension 4 - 1.
        let row: Vec<f64> = (0..4).map(|j| standard_form()[0][j]).collect();
        assert_eq!(4 - brute_rank(&[row]), 3);
        assert_eq!(brute_rank(&ns), 3);
    }

    #[test]
    fn repeated_column_is_not_projective() {
        let bp = vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 3.0]];
        let q = vec![1.0, -1.0, 2.0];
        let p = check_projectivity(&bp, &[q.clone(), q]).unwrap();
        assert!(!p.admissible);
        assert!(p.det.abs() < 1e-12);
    }

    #[test]
    fn projectivity_matches_two_by_two_oracle() {
        let bp = vec![vec![0.5, -1.0, 2.0, 0.0, 1.0], vec![1.5, 0.0, -2.0, 1.0, 0.25]];
        let q1 = vec![1.0, 2.0, -1.0, 0.5, 3.0];
        let q2 = vec![-2.0, 0.0, 1.0, 1.0, -1.0];
        let dot = |r: &[f64], q: &[f64]| r.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        let oracle = dot(&bp[0], &q1) * dot(&bp[1], &q2) - dot(&bp[0], &q2) * dot(&bp[1], &q1);
        let p = check_projectivity(&bp, &[q1, q2]).unwrap();
        assert!((p.det - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
        // Scale invariance of the verdict.
        let p2 = check_projectivity(&bp, &[vec![1.0, 2.0, -1.0, 0.5, 3.0], vec![4.0, 0.0, -2.0, -2.0, 2.0]]).unwrap();
        assert!((p2.det_normalized.abs() - p.det_normalized.abs()).abs() < 1e-12);
    }

    #[test]
    fn single_momentum_gives_empty_tuple() {
        let cond = ConditionSet {
            zbar: NumPoint::new(vec![0.0, 0.0], vec![]).unwrap(),
            gamma: vec![Monomial::one(2)],
            m: vec![vec![vec![0.0, 1.0], vec![-1.0, 0.0]]],
            qbar1: vec![1.0, 0.0],
            bp: vec![vec![0.0, 1.0]],
        };
        let s = solve_qbars(&cond, 1).unwrap();
        assert_eq!(s.tuples, vec![Vec::<Vec<f64>>::new()]);
    }

    #[test]
    fn rational_vectors_are_integer_scaled() {
        assert_eq!(normalize_vector(&[0.0, -0.5, 0.0, 1.0, 0.0]), vec![0.0, 1.0, 0.0, -2.0, 0.0]);
        assert_eq!(normalize_vector(&[1.0 / 3.0, 0.25]), vec![4.0, 3.0]);
        let v = normalize_vector(&[1.0, std::f64::consts::PI]);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn full_rank_conditions_have_no_solution() {
        // With qbar1 = e1 the conditions force q2 = q3 = 0, leaving only multiples of qbar1.
        let mut m1 = vec![vec![0.0; 3]; 3];
        m1[0][1] = 1.0;
        m1[1][0] = -1.0;
        let mut m2 = vec![vec![0.0; 3]; 3];
        m2[0][2] = 1.0;
        m2[2][0] = -1.0;
        let cond = ConditionSet {
            zbar: NumPoint::new(vec![1.0, 1.0, 1.0, 1.0], vec![]).unwrap(),
            gamma: vec![Monomial::one(4), Monomial::var(4, 0)],
            m: vec![m1, m2],
            qbar1: vec![1.0, 0.0, 0.0],
            bp: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        };
        assert!(matches!(solve_qbars(&cond, 2), Err(Error::NoSolution(_))));
    }
}
