//! Dense rectangular matrices, permutations and the fraction-free
//! determinant used as an oracle.
//!
//! All public indices are 0-based. The mathematical notation is 1-based, so
//! row `i` here is row `i + 1` there; block cuts are counts, so
//! `split(a, s, s)` yields the leading `s x s` block.

use std::fmt;
use std::ops::{Index, Range};

use crate::domain::{Domain, Fraction, OpCounter, Ring};
use crate::error::{Error, Result};
use crate::par;

/// A dense row-major matrix. Zero-sized dimensions are allowed; they show up
/// as empty blocks inside the recursive decompositions.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: n,
            cols: m,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// The block on rows `rows` and columns `cols`.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        assert!(
            rows.end <= self.rows && cols.end <= self.cols,
            "block out of range"
        );
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self.get(rows.start + i, cols.start + j).clone()
        })
    }

    /// Rows `rows` and columns `cols` picked in the listed order; indices may
    /// repeat.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Assembles a matrix from a grid of blocks. Every block in a grid row
    /// must have the same height, every block in a grid column the same
    /// width.
    pub fn from_blocks(grid: &[Vec<&Matrix<T>>]) -> Result<Self> {
        let heights: Vec<usize> = grid.iter().map(|r| r.first().map_or(0, |b| b.rows)).collect();
        let ncols = grid.first().map_or(0, Vec::len);
        let widths: Vec<usize> = (0..ncols).map(|j| grid[0][j].cols).collect();
        for (bi, row) in grid.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch("ragged block grid".into()));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.rows != heights[bi] || b.cols != widths[bj] {
                    return Err(Error::DimensionMismatch(format!(
                        "block ({bi},{bj}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, heights[bi], widths[bj]
                    )));
                }
            }
        }
        let rows: usize = heights.iter().sum();
        let cols: usize = widths.iter().sum();
        let mut data = Vec::with_capacity(rows * cols);
        for (bi, grow) in grid.iter().enumerate() {
            for i in 0..heights[bi] {
                for b in grow {
                    data.extend_from_slice(b.row(i));
                }
            }
        }
        Ok(Self { rows, cols, data })
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i].clone() } else { T::zero() })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Ring::is_zero)
    }

    /// Zero strictly above the main diagonal.
    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| ((i + 1)..self.cols).all(|j| self.get(i, j).is_zero()))
    }

    /// Zero strictly below the main diagonal.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|i| (0..i.min(self.cols)).all(|j| self.get(i, j).is_zero()))
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(Ring::neg)
    }

    pub fn scale(&self, factor: &T) -> Self {
        self.map(|x| x.mul(factor))
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// Uncounted classical product. Used for reconstruction and checks.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        let rows = par::map_range_sized(n, n * k * m, |i| {
            let mut out = vec![T::zero(); m];
            for t in 0..k {
                let a = self.get(i, t);
                if a.is_zero() {
                    continue;
                }
                for (j, o) in out.iter_mut().enumerate() {
                    let b = rhs.get(t, j);
                    if !b.is_zero() {
                        *o = o.add(&a.mul(b));
                    }
                }
            }
            out
        });
        Ok(Self {
            rows: n,
            cols: m,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Scales column `j` by `scales[j]`, i.e. `self * diag(scales)`.
    pub fn scale_columns(&self, scales: &[T]) -> Self {
        assert_eq!(scales.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).mul(&scales[j]))
    }

    /// Scales row `i` by `scales[i]`, i.e. `diag(scales) * self`.
    pub fn scale_rows(&self, scales: &[T]) -> Self {
        assert_eq!(scales.len(), self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| scales[i].mul(self.get(i, j)))
    }
}

impl<R: Domain> Matrix<R> {
    /// Embeds into the field of fractions.
    pub fn to_fractions(&self) -> Matrix<Fraction<R>> {
        self.map(|x| Fraction::from_domain(x.clone()))
    }
}

impl<R: Domain> Matrix<Fraction<R>> {
    /// Projects back to the domain; fails if any entry has a non-trivial
    /// denominator.
    pub fn to_domain(&self) -> Result<Matrix<R>> {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(idx, x)| {
                x.to_domain().ok_or_else(|| {
                    Error::NotInDomain(format!(
                        "({}, {}) = {x}",
                        idx / self.cols.max(1),
                        idx % self.cols.max(1)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn is_in_domain(&self) -> bool {
        self.data.iter().all(|x| x.to_domain().is_some())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.data[i * self.cols + j].to_string())
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Counted classical product: one block product and `n*k*m` ring
/// multiplications.
pub fn mat_mul<T: Ring>(a: &Matrix<T>, b: &Matrix<T>, counter: &mut OpCounter) -> Result<Matrix<T>> {
    let out = a.matmul(b)?;
    counter.record_block_product((a.rows * a.cols * b.cols) as u64);
    Ok(out)
}

/// `(top-left, top-right, bottom-left, bottom-right)`.
pub type Quadrants<T> = (Matrix<T>, Matrix<T>, Matrix<T>, Matrix<T>);

/// Splits `a` into `(top-left, top-right, bottom-left, bottom-right)` with
/// the top-left block of size `row_cut x col_cut`.
pub fn split<T: Clone>(a: &Matrix<T>, row_cut: usize, col_cut: usize) -> Result<Quadrants<T>> {
    if row_cut == 0 || row_cut >= a.rows || col_cut == 0 || col_cut >= a.cols {
        return Err(Error::IndexOutOfRange(format!(
            "cut ({row_cut}, {col_cut}) of a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    Ok(split_unchecked(a, row_cut, col_cut))
}

/// Like [`split`] but allows empty blocks.
pub(crate) fn split_unchecked<T: Clone>(
    a: &Matrix<T>,
    row_cut: usize,
    col_cut: usize,
) -> (Matrix<T>, Matrix<T>, Matrix<T>, Matrix<T>) {
    (
        a.submatrix(0..row_cut, 0..col_cut),
        a.submatrix(0..row_cut, col_cut..a.cols),
        a.submatrix(row_cut..a.rows, 0..col_cut),
        a.submatrix(row_cut..a.rows, col_cut..a.cols),
    )
}

pub fn join<T: Clone>(a: &Matrix<T>, b: &Matrix<T>, c: &Matrix<T>, d: &Matrix<T>) -> Result<Matrix<T>> {
    Matrix::from_blocks(&[vec![a, b], vec![c, d]])
}

/// A permutation of `0..n`. As a matrix it has a one at `(i, map[i])`, so
/// multiplying on the left sends row `map[i]` of the operand to row `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// The anti-diagonal permutation `i -> n-1-i`.
    pub fn flip(n: usize) -> Self {
        Self {
            map: (0..n).rev().collect(),
        }
    }

    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(i, j);
        Self { map }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(format!("{map:?}")));
            }
            seen[x] = true;
        }
        Ok(Self { map })
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// The inverse, which is also the transpose of the permutation matrix.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Self { map: inv }
    }

    /// The permutation whose matrix is `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        assert_eq!(self.size(), rhs.size(), "permutation sizes differ");
        Self {
            map: self.map.iter().map(|&x| rhs.map[x]).collect(),
        }
    }

    /// Block-diagonal sum `diag(self, rhs)`.
    pub fn direct_sum(&self, rhs: &Self) -> Self {
        let n = self.size();
        Self {
            map: self
                .map
                .iter()
                .copied()
                .chain(rhs.map.iter().map(|&x| x + n))
                .collect(),
        }
    }

    /// Permutation that lists consecutive blocks of the given sizes in
    /// `order`: as a left factor it moves block `order[0]` to the top.
    pub fn block_shuffle(sizes: &[usize], order: &[usize]) -> Self {
        let starts: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let st = *acc;
                *acc += s;
                Some(st)
            })
            .collect();
        let map = order
            .iter()
            .flat_map(|&b| starts[b]..starts[b] + sizes[b])
            .collect();
        Self { map }
    }

    pub fn to_matrix<T: Ring>(&self) -> Matrix<T> {
        let n = self.size();
        Matrix::from_fn(n, n, |i, j| if self.map[i] == j { T::one() } else { T::zero() })
    }

    /// `P * a`.
    pub fn permute_rows<T: Clone>(&self, a: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.size(), a.rows(), "row permutation size");
        Matrix::from_fn(a.rows(), a.cols(), |i, j| a.get(self.map[i], j).clone())
    }

    /// `a * P`.
    pub fn permute_cols<T: Clone>(&self, a: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.size(), a.cols(), "column permutation size");
        let inv = self.inverse();
        Matrix::from_fn(a.rows(), a.cols(), |i, j| a.get(i, inv.map[j]).clone())
    }

    /// `P * a * P^T`.
    pub fn conjugate<T: Clone>(&self, a: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(a.rows(), a.cols(), |i, j| a.get(self.map[i], self.map[j]).clone())
    }
}

/// Permutes rows (`Side::Left`, `P * a`) or columns (`Side::Right`,
/// `a * P`). No ring multiplications are performed.
pub fn apply_perm<T: Clone>(p: &Permutation, a: &Matrix<T>, side: Side) -> Result<Matrix<T>> {
    let dim = match side {
        Side::Left => a.rows(),
        Side::Right => a.cols(),
    };
    if p.size() != dim {
        return Err(Error::DimensionMismatch(format!(
            "permutation of size {} against dimension {dim}",
            p.size()
        )));
    }
    Ok(match side {
        Side::Left => p.permute_rows(a),
        Side::Right => p.permute_cols(a),
    })
}

/// Single-step fraction-free (Bareiss) elimination on a working copy.
/// Returns the sign-adjusted last pivot for square input, and the number of
/// pivots found.
fn bareiss<R: Domain>(a: &Matrix<R>) -> (R, usize) {
    let (n, m) = a.shape();
    let mut w = a.to_rows();
    let mut prev = R::one();
    let mut negate = false;
    let mut rank = 0;
    let mut col = 0;
    while rank < n && col < m {
        let Some(p) = (rank..n).find(|&i| !w[i][col].is_zero()) else {
            col += 1;
            continue;
        };
        if p != rank {
            w.swap(p, rank);
            negate = !negate;
        }
        let pivot = w[rank][col].clone();
        for i in (rank + 1)..n {
            for j in (col + 1)..m {
                let v = pivot.mul(&w[i][j]).sub(&w[i][col].mul(&w[rank][j]));
                w[i][j] = v.exact_quotient(&prev).expect("Bareiss step divides exactly");
            }
            w[i][col] = R::zero();
        }
        prev = pivot;
        rank += 1;
        col += 1;
    }
    let det = if n == m && rank == n {
        if n == 0 {
            R::one()
        } else if negate {
            w[n - 1][n - 1].neg()
        } else {
            w[n - 1][n - 1].clone()
        }
    } else {
        R::zero()
    };
    (det, rank)
}

/// Exact determinant by fraction-free elimination. Singular input gives 0.
pub fn bareiss_det<R: Domain>(a: &Matrix<R>) -> Result<R> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "determinant of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(bareiss(a).0)
}

/// Exact rank by fraction-free elimination.
pub fn bareiss_rank<R: Domain>(a: &Matrix<R>) -> usize {
    bareiss(a).1
}
