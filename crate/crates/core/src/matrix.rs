//! Dense matrices over an exact field, with the echelon-form kernels that the
//! rest of the library is built on. Everything is deterministic: the reduced
//! row echelon form is unique, so outputs depend on inputs alone.

use crate::error::{Error, Result};
use crate::field::{Field, Scalar};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<Scalar>, // row-major
}

impl Mat {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            field,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Mat {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Mat> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch("ragged rows".into()));
            }
            for s in row {
                if s.field() != field {
                    return Err(Error::FieldMismatch(format!(
                        "{} entry in {} matrix",
                        s.field(),
                        field
                    )));
                }
                data.push(s.clone());
            }
        }
        Ok(Mat {
            rows: r,
            cols: c,
            field,
            data,
        })
    }

    /// Convenience constructor from integers.
    pub fn from_i64(field: Field, rows: usize, cols: usize, entries: &[i64]) -> Mat {
        assert_eq!(entries.len(), rows * cols, "entry count");
        Mat {
            rows,
            cols,
            field,
            data: entries.iter().map(|&n| field.from_i64(n)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        assert!(r < self.rows && c < self.cols, "index out of range");
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        assert_eq!(v.field(), self.field, "field mismatch");
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|s| s.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Mat::identity(self.field, self.rows)
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = a.add(b);
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.neg();
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.mul(s);
        }
        out
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Mat::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j).add(&a.mul(other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn col(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn from_cols(field: Field, rows: usize, cols: Vec<Vec<Scalar>>) -> Mat {
        let n = cols.len();
        let mut out = Mat::zeros(field, rows, n);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, v) in col.iter().enumerate() {
                out.set(i, j, v.clone());
            }
        }
        out
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows, "hstack rows");
        let mut out = Mat::zeros(self.field, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        out
    }

    /// Vertical concatenation [self; other].
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols, "vstack cols");
        let mut out = Mat::zeros(self.field, self.rows + other.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
        }
        for r in 0..other.rows {
            for c in 0..self.cols {
                out.set(self.rows + r, c, other.get(r, c).clone());
            }
        }
        out
    }

    pub fn hstack_all(field: Field, rows: usize, mats: &[Mat]) -> Mat {
        let mut out = Mat::zeros(field, rows, 0);
        for m in mats {
            out = out.hstack(m);
        }
        out
    }

    pub fn vstack_all(field: Field, cols: usize, mats: &[Mat]) -> Mat {
        let mut out = Mat::zeros(field, 0, cols);
        for m in mats {
            out = out.vstack(m);
        }
        out
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Mat {
        let mut out = Mat::zeros(self.field, rows.len(), cols.len());
        for (i, r) in rows.clone().enumerate() {
            for (j, c) in cols.clone().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn select_cols(&self, sel: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.field, self.rows, sel.len());
        for (j, &c) in sel.iter().enumerate() {
            for r in 0..self.rows {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Reduced row echelon form together with the pivot column indices.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // find pivot in this column at or below `row`
            let Some(piv) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, piv);
            let inv = m.get(row, col).inv().expect("nonzero pivot");
            for c in col..m.cols {
                let v = m.get(row, c).mul(&inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !m.get(r, col).is_zero() {
                    let factor = m.get(r, col).clone();
                    for c in col..m.cols {
                        let v = m.get(r, c).sub(&factor.mul(m.get(row, c)));
                        m.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let cols = self.cols;
            self.data.swap(a * cols + c, b * cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical basis of {v : Av = 0}, one column per free variable of the
    /// reduced row echelon form.
    pub fn kernel_basis(&self) -> Mat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Mat::zeros(self.field, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            out.set(fc, j, self.field.one());
            for (i, &pc) in pivots.iter().enumerate() {
                out.set(pc, j, r.get(i, fc).neg());
            }
        }
        out
    }

    /// A deterministic particular solution of Ax = b (free variables zero),
    /// or None if the system is inconsistent. `b` has one column per system.
    pub fn solve(&self, b: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, b.rows, "solve shape");
        let aug = self.hstack(b);
        let (r, pivots) = aug.rref();
        // inconsistent iff some pivot lands in the b-block
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Mat::zeros(self.field, self.cols, b.cols);
        for (i, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(i, self.cols + j).clone());
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let x = self
            .solve(&Mat::identity(self.field, self.rows))
            .ok_or(Error::Singular)?;
        if self.mul(&x).is_identity() {
            Ok(x)
        } else {
            Err(Error::Singular)
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Assembles a block matrix from a grid of blocks; `None` means a zero
    /// block of the shape dictated by its row/column.
    pub fn from_blocks(
        field: Field,
        row_dims: &[usize],
        col_dims: &[usize],
        blocks: &[Vec<Option<&Mat>>],
    ) -> Mat {
        let total_r: usize = row_dims.iter().sum();
        let total_c: usize = col_dims.iter().sum();
        let mut out = Mat::zeros(field, total_r, total_c);
        let mut roff = 0;
        for (bi, rd) in row_dims.iter().enumerate() {
            let mut coff = 0;
            for (bj, cd) in col_dims.iter().enumerate() {
                if let Some(b) = blocks[bi][bj] {
                    assert_eq!((b.rows, b.cols), (*rd, *cd), "block shape ({bi},{bj})");
                    for r in 0..*rd {
                        for c in 0..*cd {
                            out.set(roff + r, coff + c, b.get(r, c).clone());
                        }
                    }
                }
                coff += cd;
            }
            roff += rd;
        }
        out
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).encode()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
