//! Dense linear algebra over a finite field.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gf::{FieldElem, FiniteField};
use crate::poly::Poly;

pub type Vector = Vec<FieldElem>;

/// Row-major matrix over a [`FiniteField`].
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: FiniteField,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl Matrix {
    pub fn zero(field: &FiniteField, rows: usize, cols: usize) -> Self {
        Matrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &FiniteField, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &FiniteField, rows: Vec<Vector>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            field: field.clone(),
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// `columns[j]` becomes column `j`; every column has length `rows`.
    pub fn from_columns(field: &FiniteField, rows: usize, columns: &[Vector]) -> Result<Self> {
        let mut m = Self::zero(field, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::Dimension("column length mismatch".into()));
            }
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElem) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[FieldElem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zero(&self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension("matrix product".into()));
        }
        let mut out = Matrix::zero(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + &(a * b);
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElem]) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::Dimension("matrix-vector product".into()));
        }
        Ok((0..self.rows)
            .map(|i| dot(&self.field, self.row(i), v))
            .collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension("matrix sum".into()));
        }
        Ok(Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: &FieldElem) -> Matrix {
        Matrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn block_diag(field: &FiniteField, blocks: &[Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Matrix::zero(field, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    /// `f(M)` by Horner's rule.
    pub fn poly_eval(&self, f: &Poly) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Dimension("polynomial of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut acc = Matrix::zero(&self.field, n, n);
        for c in f.coeffs().iter().rev() {
            acc = acc.mul(self)?;
            for i in 0..n {
                let v = acc.get(i, i) + c;
                acc.set(i, i, v);
            }
        }
        Ok(acc)
    }

    /// `f(M) v` without forming `f(M)`.
    pub fn poly_apply(&self, f: &Poly, v: &[FieldElem]) -> Result<Vector> {
        let mut acc = vec![self.field.zero(); v.len()];
        for c in f.coeffs().iter().rev() {
            acc = self.mul_vec(&acc)?;
            for (a, x) in acc.iter_mut().zip(v) {
                *a = &*a + &(c * x);
            }
        }
        Ok(acc)
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).inv().unwrap();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = m.get(i, j) - &(&factor * m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : M x = 0}`.
    pub fn nullspace(&self) -> Vec<Vector> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![self.field.zero(); self.cols];
                v[f] = self.field.one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = r.get(i, f).neg();
                }
                v
            })
            .collect()
    }

    /// Some `x` with `M x = b`, if one exists.
    pub fn solve(&self, b: &[FieldElem]) -> Result<Option<Vector>> {
        if b.len() != self.rows {
            return Err(Error::Dimension("right-hand side length".into()));
        }
        let mut aug = Matrix::zero(&self.field, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![self.field.zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = r.get(i, self.cols).clone();
        }
        Ok(Some(x))
    }

    pub fn determinant(&self) -> Result<FieldElem> {
        if !self.is_square() {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let mut m = self.clone();
        let n = m.rows;
        let mut det = self.field.one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Ok(self.field.zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = det.neg();
            }
            let pivot = m.get(c, c).clone();
            det = &det * &pivot;
            let inv = pivot.inv().unwrap();
            for i in c + 1..n {
                let f = m.get(i, c) * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(i, j) - &(&f * m.get(c, j));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Characteristic polynomial `det(x I - M)` via reduction to Hessenberg form.
    pub fn charpoly(&self) -> Result<Poly> {
        if !self.is_square() {
            return Err(Error::Dimension("characteristic polynomial of a non-square matrix".into()));
        }
        let n = self.rows;
        let f = &self.field;
        let mut h = self.clone();
        for m in 1..n.saturating_sub(1) {
            let Some(i) = (m..n).find(|&i| !h.get(i, m - 1).is_zero()) else {
                continue;
            };
            h.swap_rows(i, m);
            h.swap_cols(i, m);
            let inv = h.get(m, m - 1).inv().unwrap();
            for i in m + 1..n {
                let u = h.get(i, m - 1) * &inv;
                if u.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = h.get(i, j) - &(&u * h.get(m, j));
                    h.set(i, j, v);
                }
                for j in 0..n {
                    let v = h.get(j, m) + &(&u * h.get(j, i));
                    h.set(j, m, v);
                }
            }
        }
        let x = Poly::t(f);
        let mut ps: Vec<Poly> = vec![Poly::one(f)];
        for m in 0..n {
            let mut next = &(&x - &Poly::constant(h.get(m, m).clone())) * &ps[m];
            let mut prod = f.one();
            for i in (0..m).rev() {
                prod = &prod * h.get(i + 1, i);
                if prod.is_zero() {
                    break;
                }
                let c = &prod * h.get(i, m);
                next = &next - &ps[i].scale(&c);
            }
            ps.push(next);
        }
        Ok(ps.pop().unwrap())
    }
}

pub(crate) fn dot(field: &FiniteField, a: &[FieldElem], b: &[FieldElem]) -> FieldElem {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(field.zero(), |acc, (x, y)| &acc + &(x * y))
}

pub(crate) fn axpy(y: &mut [FieldElem], a: &FieldElem, x: &[FieldElem]) {
    if a.is_zero() {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = &*yi + &(a * xi);
        }
    }
}

pub(crate) fn is_zero_vec(v: &[FieldElem]) -> bool {
    v.iter().all(FieldElem::is_zero)
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for i in 0..self.rows {
            f.write_str("  [")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]\n")?;
        }
        Ok(())
    }
}

/// Incrementally built echelon basis that remembers how each row was obtained
/// from the vectors inserted so far.
///
/// Vectors are labelled `0, 1, ...` in the order they were accepted as
/// independent. A rejected vector is reported together with its expression in
/// the accepted ones.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: FiniteField,
    dim: usize,
    /// `(pivot, row, combo)` with `row = sum combo[j] * accepted[j]` and `row[pivot] = 1`.
    rows: Vec<(usize, Vector, Vector)>,
}

impl Echelon {
    pub fn new(field: &FiniteField, dim: usize) -> Self {
        Echelon {
            field: field.clone(),
            dim,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(residual, combo)` with `v = residual + sum combo[j] * accepted[j]`.
    fn reduce(&self, v: &[FieldElem]) -> (Vector, Vector) {
        let mut res = v.to_vec();
        let mut combo = vec![self.field.zero(); self.rows.len()];
        for (pivot, row, rc) in &self.rows {
            let c = res[*pivot].clone();
            if c.is_zero() {
                continue;
            }
            axpy(&mut res, &c.neg(), row);
            axpy(&mut combo, &c, rc);
        }
        (res, combo)
    }

    pub fn contains(&self, v: &[FieldElem]) -> bool {
        is_zero_vec(&self.reduce(v).0)
    }

    /// Coefficients of `v` in the accepted vectors, if `v` lies in their span.
    pub fn express(&self, v: &[FieldElem]) -> Option<Vector> {
        let (res, combo) = self.reduce(v);
        is_zero_vec(&res).then_some(combo)
    }

    /// Accepts `v` if it is independent (returning `None`); otherwise returns
    /// its expression in the accepted vectors.
    pub fn insert(&mut self, v: &[FieldElem]) -> Option<Vector> {
        assert_eq!(v.len(), self.dim, "vector length");
        let (mut res, combo) = self.reduce(v);
        let Some(pivot) = res.iter().position(|x| !x.is_zero()) else {
            return Some(combo);
        };
        // res = v - sum combo[j] accepted[j]; the new label is rows.len()
        let inv = res[pivot].inv().unwrap();
        for x in res.iter_mut() {
            *x = &*x * &inv;
        }
        let mut rc: Vector = combo.iter().map(|c| (c * &inv).neg()).collect();
        rc.push(inv);
        for (_, _, other) in self.rows.iter_mut() {
            other.push(self.field.zero());
        }
        self.rows.push((pivot, res, rc));
        None
    }
}
