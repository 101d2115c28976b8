//! Dense row-major matrices over a prime field.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>, // row-major, canonical residues
}

/// Reduced row echelon form with zero rows dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rref {
    pub matrix: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn new(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        let data = data.into_iter().map(|v| field.reduce(v as u64)).collect();
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from row slices; entries are reduced mod `p`.
    pub fn from_rows<R: AsRef<[u64]>>(field: PrimeField, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    r.len(),
                    cols
                )));
            }
            data.extend(r.iter().map(|&v| field.reduce(v)));
        }
        Ok(Self {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = self.field.reduce(v as u64);
    }

    pub fn entry(&self, r: usize, c: usize) -> FieldElement {
        self.field.elem(self.get(r, c) as u64)
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.field.modulus() as u64;
        let mut out = Matrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = ((out.data[idx] as u64 + a * other.get(k, j) as u64) % p) as u32;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v · M`.
    pub fn left_mul(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} times {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let f = self.field;
        let mut out = vec![0u32; self.cols];
        for (r, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.row(r)) {
                *o = f.add(*o, f.mul(a, x));
            }
        }
        Ok(out)
    }

    /// Matrix times column vector: `M · v`.
    pub fn right_mul(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|r| self.field.dot(self.row(r), v)).collect())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + j] = self.get(r, c);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.cols != other.cols && self.rows > 0 && other.rows > 0 {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            field: self.field,
            rows: self.rows + other.rows,
            cols,
            data,
        })
    }

    pub fn push_row(&mut self, row: &[u32]) -> Result<()> {
        if self.rows == 0 && self.data.is_empty() {
            self.cols = row.len();
        }
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} for {} columns",
                row.len(),
                self.cols
            )));
        }
        self.data.extend(row.iter().map(|&v| self.field.reduce(v as u64)));
        self.rows += 1;
        Ok(())
    }

    /// Gauss-Jordan elimination. Zero rows are removed from the result.
    pub fn rref(&self) -> Rref {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0usize;
        for c in 0..m.cols {
            if lead == m.rows {
                break;
            }
            let Some(pr) = (lead..m.rows).find(|&r| m.get(r, c) != 0) else {
                continue;
            };
            m.swap_rows(pr, lead);
            let inv = f.inv(m.get(lead, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let v = f.mul(m.get(lead, j), inv);
                m.data[lead * m.cols + j] = v;
            }
            for r in 0..m.rows {
                if r == lead {
                    continue;
                }
                let factor = m.get(r, c);
                if factor == 0 {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(r, j), f.mul(factor, m.get(lead, j)));
                    m.data[r * m.cols + j] = v;
                }
            }
            pivots.push(c);
            lead += 1;
        }
        let rank = pivots.len();
        m.data.truncate(rank * m.cols);
        m.rows = rank;
        Rref {
            matrix: m,
            rank,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Rows spanning the right kernel `{x : M xᵀ = 0}`.
    pub fn nullspace(&self) -> Matrix {
        let f = self.field;
        let Rref { matrix: r, pivots, .. } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, free.len(), self.cols);
        for (b, &fc) in free.iter().enumerate() {
            basis.data[b * self.cols + fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                basis.data[b * self.cols + pc] = f.neg(r.get(i, fc));
            }
        }
        basis
    }

    /// Solves `M x = b`, returning one solution if the system is consistent.
    pub fn solve_right(&self, b: &[u32]) -> Option<Vec<u32>> {
        if b.len() != self.rows {
            return None;
        }
        let mut aug = Matrix::zeros(self.field, self.rows, self.cols + 1);
        for (r, &rhs) in b.iter().enumerate() {
            for c in 0..self.cols {
                aug.data[r * (self.cols + 1) + c] = self.get(r, c);
            }
            aug.data[r * (self.cols + 1) + self.cols] = self.field.reduce(rhs as u64);
        }
        let Rref {
            matrix: red, pivots, ..
        } = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0u32; self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = red.get(i, self.cols);
        }
        Some(x)
    }

    /// Solves `x M = b` (row combination of `M` equal to `b`).
    pub fn solve_left(&self, b: &[u32]) -> Option<Vec<u32>> {
        self.transpose().solve_right(b)
    }

    /// True iff `v` lies in the row space.
    pub fn row_space_contains(&self, v: &[u32]) -> bool {
        v.len() == self.cols && (self.rows == 0 && v.iter().all(|&x| x == 0) || self.solve_left(v).is_some())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn check_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.modulus(),
                right: other.field.modulus(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}]{:?}", self.field, self.to_rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> PrimeField {
        PrimeField::new(5).unwrap()
    }

    #[test]
    fn rref_identity() {
        let id = Matrix::identity(f5(), 2);
        let r = id.rref();
        assert_eq!(r.matrix, id);
        assert_eq!(r.rank, 2);
        assert_eq!(r.pivots, vec![0, 1]);
    }

    #[test]
    fn rref_dependent_rows() {
        let m = Matrix::from_rows(f5(), &[[1u64, 1], [2, 2]]).unwrap();
        let r = m.rref();
        assert_eq!(r.matrix, Matrix::from_rows(f5(), &[[1u64, 1]]).unwrap());
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![0]);
    }

    #[test]
    fn rref_grs_generator() {
        let g = Matrix::from_rows(f5(), &[[1u64, 1, 1, 1, 1], [0, 1, 2, 3, 4]]).unwrap();
        assert_eq!(g.rank(), 2);
        // 1 - x evaluated at 0..4 and x itself
        assert_eq!(
            g.rref().matrix,
            Matrix::from_rows(f5(), &[[1u64, 0, 4, 3, 2], [0, 1, 2, 3, 4]]).unwrap()
        );
    }

    #[test]
    fn nullspace_is_orthogonal() {
        let g = Matrix::from_rows(f5(), &[[1u64, 0, 4, 3, 2], [0, 1, 2, 3, 4]]).unwrap();
        let h = g.nullspace();
        assert_eq!(h.rows(), 3);
        let prod = g.mul(&h.transpose()).unwrap();
        assert!(prod.data().iter().all(|&v| v == 0));
        assert_eq!(h.rank(), 3);
    }

    #[test]
    fn solve_left_and_membership() {
        let g = Matrix::from_rows(f5(), &[[1u64, 1, 1], [0, 1, 2]]).unwrap();
        let x = g.solve_left(&[3, 4, 0]).unwrap();
        assert_eq!(g.left_mul(&x).unwrap(), vec![3, 4, 0]);
        assert!(g.solve_left(&[1, 0, 0]).is_none());
        assert!(!g.row_space_contains(&[1, 0, 0]));
        let empty = Matrix::zeros(f5(), 0, 3);
        assert!(empty.row_space_contains(&[0, 0, 0]));
        assert!(!empty.row_space_contains(&[0, 1, 0]));
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(Matrix::new(f5(), 2, 2, vec![1, 2, 3]).is_err());
        assert!(Matrix::from_rows(f5(), &[vec![1u64, 2], vec![1]]).is_err());
        let a = Matrix::identity(f5(), 2);
        let b = Matrix::identity(f5(), 3);
        assert!(a.mul(&b).is_err());
        let other = Matrix::identity(PrimeField::new(7).unwrap(), 2);
        assert!(matches!(a.mul(&other), Err(Error::FieldMismatch { .. })));
    }
}
