use std::fmt;

use super::gcd::poly_lcm;
use super::point::{rf_eval, NumPoint};
use super::poly::Poly;
use super::ratfun::RationalFunction;
use crate::error::Result;

/// Dense matrix of rational functions, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RfMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    data: Vec<RationalFunction>,
}

impl RfMatrix {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        RfMatrix { rows, cols, nvars, data: vec![RationalFunction::zero(nvars); rows * cols] }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut m = Self::zeros(n, n, nvars);
        for i in 0..n {
            m.set(i, i, RationalFunction::one(nvars));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<RationalFunction>>, nvars: usize) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        RfMatrix { rows: r, cols: c, nvars, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: RationalFunction) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[RationalFunction] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[RationalFunction] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_skew(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| self.get(i, i).is_zero() && (0..i).all(|j| (self.get(i, j) + self.get(j, i)).is_zero()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(&RationalFunction) -> RationalFunction) -> Self {
        RfMatrix { rows: self.rows, cols: self.cols, nvars: self.nvars, data: self.data.iter().map(f).collect() }
    }

    pub fn diff(&self, i: usize) -> Self {
        self.map(|e| e.diff(i))
    }

    pub fn scale(&self, c: &RationalFunction) -> Self {
        self.map(|e| e * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RfMatrix {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RfMatrix {
            rows: self.rows,
            cols: self.cols,
            nvars: self.nvars,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = RationalFunction::zero(self.nvars);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn left_mul_row(&self, row: &[RationalFunction]) -> Vec<RationalFunction> {
        assert_eq!(row.len(), self.rows);
        (0..self.cols)
            .map(|j| {
                let mut acc = RationalFunction::zero(self.nvars);
                for (k, r) in row.iter().enumerate() {
                    let a = self.get(k, j);
                    if !r.is_zero() && !a.is_zero() {
                        acc = &acc + &(r * a);
                    }
                }
                acc
            })
            .collect()
    }

    /// Kronecker product, `self` indexing the outer blocks.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Least common multiple of all entry denominators (monic).
    pub fn denominator_lcm(&self) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for e in &self.data {
            if !e.den().is_one() {
                acc = poly_lcm(&acc, e.den());
            }
        }
        acc
    }

    pub fn eval(&self, z: &NumPoint) -> Result<Vec<f64>> {
        self.data.iter().map(|e| rf_eval(e, z)).collect()
    }

    pub fn to_strings(&self, names: &[String]) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|e| e.fmt_with(names)).collect()).collect()
    }
}

impl fmt::Debug for RfMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Upper-triangular entries of a square matrix, row by row.
pub fn skew_vec(m: &RfMatrix) -> Vec<RationalFunction> {
    let d = m.rows();
    let mut v = Vec::with_capacity(d * (d.saturating_sub(1)) / 2);
    for i in 0..d {
        for j in i + 1..d {
            v.push(m.get(i, j).clone());
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: i64) -> RationalFunction {
        RationalFunction::from_int(1, v)
    }

    #[test]
    fn kron_and_block_shapes() {
        let a = RfMatrix::from_rows(vec![vec![r(0), r(1)], vec![r(-1), r(0)]], 1);
        let i2 = RfMatrix::identity(2, 1);
        let k = a.kron(&i2);
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert_eq!(k.get(0, 2), &r(1));
        assert_eq!(k.get(1, 3), &r(1));
        let b = a.block_diag(&RfMatrix::identity(1, 1));
        assert_eq!(b.get(2, 2), &r(1));
        assert!(a.is_skew());
        assert!(!b.is_skew());
    }

    #[test]
    fn product_and_transpose() {
        let a = RfMatrix::from_rows(vec![vec![r(1), r(2)], vec![r(3), r(4)]], 1);
        let p = a.mul(&a.transpose());
        assert_eq!(p.get(0, 1), &r(11));
        assert_eq!(a.left_mul_row(&[r(1), r(1)]), vec![r(4), r(6)]);
    }
}
