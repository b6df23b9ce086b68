//! Dense linear algebra over GF(2).
//!
//! Rows are packed into `u64` words; bit `j` of a row lives in word `j / 64`.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Builds a matrix from strings of '0'/'1'. Panics on other characters or ragged rows;
    /// meant for literals.
    pub fn from_strs(rows: &[&str]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged bit-matrix literal");
            for (j, c) in r.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => m.set(i, j, true),
                    _ => panic!("bad bit {c:?}"),
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.rows && j < self.cols);
        (self.data[i * self.stride + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        debug_assert!(i < self.rows && j < self.cols);
        let w = &mut self.data[i * self.stride + j / 64];
        let mask = 1u64 << (j % 64);
        if v {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        self.data[i * self.stride + j / 64] ^= 1u64 << (j % 64);
    }

    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    /// row[dst] ^= row[src]
    pub fn add_row(&mut self, src: usize, dst: usize) {
        if src == dst {
            // x + x = 0
            let s = dst * self.stride;
            self.data[s..s + self.stride].fill(0);
            return;
        }
        for w in 0..self.stride {
            let v = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        self.row_words(i).iter().all(|&w| w == 0)
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row_words(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row(&self, i: usize) -> Vec<bool> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows.start + i, cols.start + j))
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |i, j| self.get(rows[i], j))
    }

    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Shape(format!("hstack {} rows vs {} rows", self.rows, other.rows)));
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        }))
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Shape(format!("vstack {} cols vs {} cols", self.cols, other.cols)));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BitMatrix { rows: self.rows + other.rows, cols: self.cols, stride: self.stride, data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!("add {}x{} + {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a ^ b).collect();
        Ok(BitMatrix { data, ..*self })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        matmul_f2(self, other)
    }

    pub fn rank(&self) -> usize {
        rref(self).2.len()
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let (red, r, piv) = rref(self);
        (piv.len() == self.rows && red == Self::identity(self.rows)).then_some(r)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        write!(f, "{self}")
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn matmul_f2(a: &BitMatrix, b: &BitMatrix) -> Result<BitMatrix> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!("matmul {}x{} * {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let mut out = BitMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            if a.get(i, k) {
                for w in 0..out.stride {
                    out.data[i * out.stride + w] ^= b.data[k * b.stride + w];
                }
            }
        }
    }
    Ok(out)
}

/// Reduced row-echelon form. Returns `(rref, r, pivots)` with `r * m == rref`.
/// The pivot row for each column is the lowest-index remaining row with a 1 there.
pub fn rref(m: &BitMatrix) -> (BitMatrix, BitMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut r = BitMatrix::identity(m.rows);
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..m.cols {
        if next == m.rows {
            break;
        }
        let Some(p) = (next..m.rows).find(|&i| a.get(i, col)) else { continue };
        a.swap_rows(p, next);
        r.swap_rows(p, next);
        for i in 0..m.rows {
            if i != next && a.get(i, col) {
                a.add_row(next, i);
                r.add_row(next, i);
            }
        }
        pivots.push(col);
        next += 1;
    }
    (a, r, pivots)
}

/// The symplectic form [[0, I], [I, 0]] of size 2n.
pub fn omega(n: usize) -> BitMatrix {
    BitMatrix::from_fn(2 * n, 2 * n, |i, j| (i + n == j) || (j + n == i))
}

pub fn is_symplectic(c: &BitMatrix) -> Result<bool> {
    if c.rows != c.cols {
        return Err(Error::Shape(format!("{}x{} is not square", c.rows, c.cols)));
    }
    if c.rows % 2 == 1 {
        return Err(Error::OddDimension(c.rows));
    }
    let w = omega(c.rows / 2);
    let lhs = c.mul(&w)?.mul(&c.transpose())?;
    Ok(lhs == w)
}
