//! Dense linear algebra over a runtime [`Field`].
//!
//! Everything here is exact over Q and F_p. Over R the same elimination runs
//! with partial pivoting and treats entries below [`REAL_EPS`] as zero.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::{Field, Scalar, REAL_EPS};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|s| s.to_string()).collect())
            .collect();
        write!(f, "Matrix{rows:?}")
    }
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m[(i, i)] = field.one();
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        if rows.iter().flatten().any(|s| s.field() != field) {
            return Err(Error::Mismatch(format!("matrix entries outside {field}")));
        }
        let n = rows.len();
        Ok(Matrix { field, rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::from_rows(field, rows).expect("rectangular literal")
    }

    pub fn field(&self) -> Field {
        self.field
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

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Row-major entries, handy for treating a matrix as a vector.
    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn from_entries(field: Field, rows: usize, cols: usize, data: Vec<Scalar>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Matrix { field, rows, cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_negligible)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] = &out[(i, j)] + &prod;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Matrix, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Shape("elementwise shapes differ".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { field: self.field, rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: &Scalar) -> Matrix {
        let data = self.data.iter().map(|a| a * c).collect();
        Matrix { field: self.field, rows: self.rows, cols: self.cols, data }
    }

    /// Block-diagonal sum.
    pub fn direct_sum(blocks: &[Matrix]) -> Matrix {
        let field = blocks.first().map_or(Field::Rational, |b| b.field);
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(field, n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// The `(r0..r0+n, c0..c0+m)` sub-block.
    pub fn block(&self, r0: usize, c0: usize, n: usize, m: usize) -> Matrix {
        let mut out = Matrix::zeros(self.field, n, m);
        for i in 0..n {
            for j in 0..m {
                out[(i, j)] = self[(r0 + i, c0 + j)].clone();
            }
        }
        out
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = m.pivot_row(r, c) else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].inv().expect("pivot is nonzero");
            for j in c..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for j in c..m.cols {
                    let t = &factor * &m[(r, j)];
                    m[(i, j)] = &m[(i, j)] - &t;
                }
                m[(i, c)] = m.field.zero();
            }
            pivots.push(c);
            r += 1;
        }
        if m.field == Field::Real {
            for s in &mut m.data {
                if s.is_negligible() {
                    *s = Field::Real.zero();
                }
            }
        }
        (m, pivots)
    }

    fn pivot_row(&self, from: usize, c: usize) -> Option<usize> {
        match self.field {
            Field::Real => (from..self.rows)
                .map(|i| (i, self[(i, c)].to_f64().abs()))
                .filter(|&(_, v)| v > REAL_EPS)
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i),
            _ => (from..self.rows).find(|&i| !self[(i, c)].is_zero()),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : self · v = 0}`, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![self.field.zero(); self.cols];
                v[f] = self.field.one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -&r[(i, f)];
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> Result<Scalar> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        let mut m = self.clone();
        let mut det = self.field.one();
        for c in 0..m.cols {
            let Some(p) = m.pivot_row(c, c) else {
                return Ok(self.field.zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            det = &det * &m[(c, c)];
            let inv = m[(c, c)].inv().expect("pivot is nonzero");
            for i in c + 1..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let factor = &m[(i, c)] * &inv;
                for j in c..m.cols {
                    let t = &factor * &m[(c, j)];
                    m[(i, j)] = &m[(i, j)] - &t;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(self.field, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = self.field.one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.block(0, n, n, n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Determinants of the upper-left k×k blocks, k = 1..=n.
    pub fn leading_principal_minors(&self) -> Result<Vec<Scalar>> {
        if !self.is_square() {
            return Err(Error::Shape("minors of a non-square matrix".into()));
        }
        (1..=self.rows).map(|k| self.block(0, 0, k, k).determinant()).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..i).all(|j| {
                    let d = &self[(i, j)] - &self[(j, i)];
                    d.is_negligible()
                })
            })
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }
}

/// Incrementally maintained subspace of `k^dim`, kept in reduced echelon form.
#[derive(Clone, Debug)]
pub struct VectorSpan {
    field: Field,
    dim: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl VectorSpan {
    pub fn new(field: Field, dim: usize) -> Self {
        VectorSpan { field, dim, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim
    }

    /// Echelon basis; rows are in pivot order.
    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    /// Residual of `v` after eliminating against the current basis.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let c = v[p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x = &*x - &(&c * r);
                }
            }
        }
        if self.field == Field::Real {
            for x in &mut v {
                if x.is_negligible() {
                    *x = self.field.zero();
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_negligible)
    }

    /// Adds `v`; returns whether the span grew.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_negligible()) else {
            return false;
        };
        let inv = r[p].inv().expect("nonzero pivot");
        for x in &mut r {
            *x = &*x * &inv;
        }
        for row in &mut self.rows {
            if row[p].is_zero() {
                continue;
            }
            let c = row[p].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                *x = &*x - &(&c * y);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, r);
        true
    }

    /// Coordinates of `v` in the echelon basis, when `v` lies in the span.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    /// Basis of the intersection with another span of the same ambient space.
    pub fn intersect(&self, other: &VectorSpan) -> Vec<Vec<Scalar>> {
        // Solve Σ a_i u_i = Σ b_j w_j via the null space of [U^T | -W^T].
        let (u, w) = (&self.rows, &other.rows);
        if u.is_empty() || w.is_empty() {
            return Vec::new();
        }
        let mut m = Matrix::zeros(self.field, self.dim, u.len() + w.len());
        for k in 0..self.dim {
            for (i, ui) in u.iter().enumerate() {
                m[(k, i)] = ui[k].clone();
            }
            for (j, wj) in w.iter().enumerate() {
                m[(k, u.len() + j)] = -&wj[k];
            }
        }
        let mut out = VectorSpan::new(self.field, self.dim);
        for sol in m.null_space() {
            let mut v = vec![self.field.zero(); self.dim];
            for (i, ui) in u.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(ui) {
                    *x = &*x + &(&sol[i] * y);
                }
            }
            out.insert(&v);
        }
        out.rows
    }
}
