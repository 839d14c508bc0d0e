//! Incremental linear independence over the rational function field.
//!
//! Independence is first decided at a few random integer points: if the
//! evaluated vectors have full rank at any point, they are independent over
//! the field. Otherwise the candidate dependency is solved exactly and
//! checked on every component before it is accepted.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ratfun::RationalFunction;
use super::Q;

const PROBES: usize = 3;

pub enum Membership {
    /// The vector was added; carries its index among the accepted vectors.
    Independent(usize),
    /// The vector equals `sum_j coeffs[j] * accepted[j]`.
    Dependent(Vec<RationalFunction>),
}

/// Growing set of vectors that are linearly independent over R(z).
pub struct SpanBuilder {
    nvars: usize,
    len: usize,
    vectors: Vec<Vec<RationalFunction>>,
    probes: Vec<Vec<Q>>,
    /// `values[p][j]` = accepted vector `j` at probe `p` (None if undefined there).
    values: Vec<Vec<Option<Vec<Q>>>>,
}

impl SpanBuilder {
    pub fn new(nvars: usize, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probes = (0..PROBES)
            .map(|_| {
                (0..nvars)
                    .map(|_| {
                        let mut v = 0i64;
                        while v == 0 {
                            v = rng.gen_range(-997..=997);
                        }
                        Q::from_integer(v.into())
                    })
                    .collect()
            })
            .collect();
        SpanBuilder { nvars, len, vectors: Vec::new(), probes, values: vec![Vec::new(); PROBES] }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec<RationalFunction>] {
        &self.vectors
    }

    fn eval_at(&self, p: usize, v: &[RationalFunction]) -> Option<Vec<Q>> {
        v.iter().map(|e| e.eval_q(&self.probes[p])).collect()
    }

    /// True when the accepted vectors plus `v` certainly have full rank.
    fn probe_independent(&self, vals: &[Option<Vec<Q>>]) -> bool {
        (0..PROBES).any(|p| {
            let Some(vp) = &vals[p] else { return false };
            let mut rows: Vec<Vec<Q>> = Vec::with_capacity(self.vectors.len() + 1);
            for acc in &self.values[p] {
                match acc {
                    Some(a) => rows.push(a.clone()),
                    None => return false,
                }
            }
            rows.push(vp.clone());
            rank_q(rows) == self.vectors.len() + 1
        })
    }

    /// Adds `v` if it is independent of the accepted vectors, otherwise
    /// returns its exact coordinates.
    pub fn insert(&mut self, v: Vec<RationalFunction>) -> Membership {
        assert_eq!(v.len(), self.len);
        match self.classify(&v) {
            Some(coeffs) => Membership::Dependent(coeffs),
            None => {
                let vals: Vec<Option<Vec<Q>>> = (0..PROBES).map(|p| self.eval_at(p, &v)).collect();
                for (p, val) in vals.into_iter().enumerate() {
                    self.values[p].push(val);
                }
                self.vectors.push(v);
                Membership::Independent(self.vectors.len() - 1)
            }
        }
    }

    /// Coordinates of `v` in the accepted vectors, or `None` if `v` is outside their span.
    pub fn express(&self, v: &[RationalFunction]) -> Option<Vec<RationalFunction>> {
        self.classify(v)
    }

    fn classify(&self, v: &[RationalFunction]) -> Option<Vec<RationalFunction>> {
        if v.iter().all(|e| e.is_zero()) {
            return Some(vec![RationalFunction::zero(self.nvars); self.vectors.len()]);
        }
        if self.vectors.is_empty() {
            return None;
        }
        let vals: Vec<Option<Vec<Q>>> = (0..PROBES).map(|p| self.eval_at(p, v)).collect();
        if self.probe_independent(&vals) {
            return None;
        }
        let coeffs = self.solve_exact(v)?;
        // Confirm on every component.
        for (r, target) in v.iter().enumerate() {
            let mut acc = RationalFunction::zero(self.nvars);
            for (c, b) in coeffs.iter().zip(&self.vectors) {
                if !c.is_zero() && !b[r].is_zero() {
                    acc = &acc + &(c * &b[r]);
                }
            }
            if &acc != target {
                return None;
            }
        }
        Some(coeffs)
    }

    /// Solves `sum_j c_j b_j = v` on a set of rows where the accepted vectors
    /// are independent.
    fn solve_exact(&self, v: &[RationalFunction]) -> Option<Vec<RationalFunction>> {
        let k = self.vectors.len();
        let rows = self.pivot_rows()?;
        // k x k system: M c = rhs with M[r][j] = b_j[rows[r]].
        let mut m: Vec<Vec<RationalFunction>> =
            rows.iter().map(|&r| self.vectors.iter().map(|b| b[r].clone()).collect()).collect();
        let mut rhs: Vec<RationalFunction> = rows.iter().map(|&r| v[r].clone()).collect();
        solve_square(&mut m, &mut rhs)?;
        debug_assert_eq!(rhs.len(), k);
        Some(rhs)
    }

    /// Rows of the accepted vectors forming a nonsingular square minor,
    /// found at a probe point or, failing that, by exact elimination.
    fn pivot_rows(&self) -> Option<Vec<usize>> {
        let k = self.vectors.len();
        for p in 0..PROBES {
            let vals: Option<Vec<&Vec<Q>>> = self.values[p].iter().map(|o| o.as_ref()).collect();
            let Some(vals) = vals else { continue };
            // Columns are accepted vectors; pick pivot rows of the len x k matrix.
            let mut mat: Vec<Vec<Q>> = (0..self.len).map(|r| vals.iter().map(|b| b[r].clone()).collect()).collect();
            let piv = pivot_rows_q(&mut mat, k);
            if piv.len() == k {
                return Some(piv);
            }
        }
        // Exact fallback.
        let mut mat: Vec<Vec<RationalFunction>> =
            (0..self.len).map(|r| self.vectors.iter().map(|b| b[r].clone()).collect()).collect();
        let mut piv = Vec::new();
        let mut used = vec![false; self.len];
        for col in 0..k {
            let Some(r) = (0..self.len).find(|&r| !used[r] && !mat[r][col].is_zero()) else {
                return None;
            };
            used[r] = true;
            piv.push(r);
            let inv = mat[r][col].inv().ok()?;
            for r2 in 0..self.len {
                if r2 != r && !mat[r2][col].is_zero() {
                    let f = &mat[r2][col] * &inv;
                    for c in col..k {
                        let t = &f * &mat[r][c];
                        mat[r2][c] = &mat[r2][c] - &t;
                    }
                }
            }
        }
        Some(piv)
    }
}

/// Gaussian elimination over R(z) on a square system, in place. Returns
/// `None` if the matrix is singular.
pub fn solve_square(m: &mut [Vec<RationalFunction>], rhs: &mut Vec<RationalFunction>) -> Option<()> {
    let k = m.len();
    for col in 0..k {
        // Prefer the simplest nonzero pivot to limit expression growth.
        let piv = (col..k)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].num().len() + m[r][col].den().len())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].inv().ok()?;
        for c in col..k {
            m[col][c] = &m[col][c] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..k {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..k {
                if !m[col][c].is_zero() {
                    let t = &f * &m[col][c];
                    m[r][c] = &m[r][c] - &t;
                }
            }
            let t = &f * &rhs[col];
            rhs[r] = &rhs[r] - &t;
        }
    }
    Some(())
}

fn rank_q(mut rows: Vec<Vec<Q>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = &rows[r][col] * &inv;
            for c in col..ncols {
                let t = &f * &rows[rank][c];
                rows[r][c] -= t;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Row indices of a nonsingular `k x k` minor of a `len x k` matrix (over Q).
fn pivot_rows_q(mat: &mut [Vec<Q>], k: usize) -> Vec<usize> {
    let mut used = vec![false; mat.len()];
    let mut piv = Vec::new();
    for col in 0..k {
        let Some(r) = (0..mat.len()).find(|&r| !used[r] && !mat[r][col].is_zero()) else {
            return piv;
        };
        used[r] = true;
        piv.push(r);
        let inv = mat[r][col].recip();
        for r2 in 0..mat.len() {
            if r2 != r && !mat[r2][col].is_zero() {
                let f = &mat[r2][col] * &inv;
                for c in col..k {
                    let t = &f * &mat[r][c];
                    mat[r2][c] -= t;
                }
            }
        }
    }
    piv
}
