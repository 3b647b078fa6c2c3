//! Brute-force minors and the determinant identities they satisfy.
//!
//! Nothing here is clever on purpose: this module is the ground truth the
//! decompositions are checked against.
//!
//! Index correspondence with the usual notation `alpha^k_{i,j}` (rows
//! `1..k-1, i`, columns `1..k-1, j`): a [`MinorSpec`] with `order = k`,
//! `row = i - 1`, `col = j - 1`.

use crate::domain::{Domain, Ring};
use crate::error::{Error, Result};
use crate::matrix::{bareiss_det, bareiss_rank, Matrix};
use crate::par;

/// Largest size for which determinants use cofactor expansion.
pub const COFACTOR_LIMIT: usize = 6;

/// The minor on rows `0..order-1` plus `row`, and columns `0..order-1` plus
/// `col`, with `row`/`col` placed last.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinorSpec {
    pub order: usize,
    pub row: usize,
    pub col: usize,
}

impl MinorSpec {
    pub fn new(order: usize, row: usize, col: usize) -> Self {
        Self { order, row, col }
    }

    /// The leading minor of the given order.
    pub fn leading(order: usize) -> Self {
        Self {
            order,
            row: order.saturating_sub(1),
            col: order.saturating_sub(1),
        }
    }
}

/// Laplace expansion along the first row.
pub fn cofactor_det<R: Ring>(a: &Matrix<R>) -> R {
    fn rec<R: Ring>(a: &Matrix<R>, rows: &[usize], cols: &mut Vec<usize>) -> R {
        let Some((&r, rest)) = rows.split_first() else {
            return R::one();
        };
        let mut acc = R::zero();
        for idx in 0..cols.len() {
            let c = cols[idx];
            let entry = a.get(r, c);
            if entry.is_zero() {
                continue;
            }
            cols.remove(idx);
            let term = entry.mul(&rec(a, rest, cols));
            cols.insert(idx, c);
            acc = if idx % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        acc
    }
    assert!(a.is_square(), "cofactor expansion needs a square matrix");
    let rows: Vec<usize> = (0..a.rows()).collect();
    let mut cols = rows.clone();
    rec(a, &rows, &mut cols)
}

/// Determinant used by the oracle: cofactor expansion up to
/// [`COFACTOR_LIMIT`], Bareiss beyond.
pub fn oracle_det<R: Domain>(a: &Matrix<R>) -> R {
    if a.rows() <= COFACTOR_LIMIT {
        cofactor_det(a)
    } else {
        bareiss_det(a).expect("square input")
    }
}

pub fn oracle_rank<R: Domain>(a: &Matrix<R>) -> usize {
    bareiss_rank(a)
}

/// `alpha^order_{row,col}`. Order 0 is 1 by convention. A `row` (or `col`)
/// inside the leading `order-1` rows (columns) repeats a line and gives 0.
pub fn alpha_minor<R: Domain>(a: &Matrix<R>, spec: MinorSpec) -> Result<R> {
    let MinorSpec { order, row, col } = spec;
    if order == 0 {
        return Ok(R::one());
    }
    if row >= a.rows() || col >= a.cols() || order - 1 > a.rows() || order - 1 > a.cols() {
        return Err(Error::IndexOutOfRange(format!(
            "minor {spec:?} of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if row < order - 1 || col < order - 1 {
        return Ok(R::zero());
    }
    let rows: Vec<usize> = (0..order - 1).chain([row]).collect();
    let cols: Vec<usize> = (0..order - 1).chain([col]).collect();
    Ok(oracle_det(&a.select(&rows, &cols)))
}

/// `alpha^k`, the leading `k x k` minor.
pub fn leading_minor<R: Domain>(a: &Matrix<R>, k: usize) -> Result<R> {
    alpha_minor(a, MinorSpec::leading(k))
}

/// `alpha^0 .. alpha^n` for `n = min(rows, cols)`.
pub fn leading_minors<R: Domain>(a: &Matrix<R>) -> Vec<R> {
    let n = a.rows().min(a.cols());
    par::map_range(n + 1, |k| leading_minor(a, k).expect("in range"))
}

/// The `(s-k) x (s-k)` matrix of minors `alpha^{k+1}_{i,j}` for rows and
/// columns `k..s` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct MinorsMatrix<R> {
    pub k: usize,
    pub s: usize,
    pub values: Matrix<R>,
}

pub fn minors_matrix<R: Domain>(a: &Matrix<R>, k: usize, s: usize) -> Result<MinorsMatrix<R>> {
    if k >= s || s > a.rows().min(a.cols()) {
        return Err(Error::IndexOutOfRange(format!(
            "minors matrix (k={k}, s={s}) of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let m = s - k;
    let flat = par::map_range(m * m, |idx| {
        alpha_minor(a, MinorSpec::new(k + 1, k + idx / m, k + idx % m)).expect("in range")
    });
    Ok(MinorsMatrix {
        k,
        s,
        values: Matrix::new(m, m, flat)?,
    })
}

/// `delta^k_{i,j}`: determinant of the leading `k x k` block after column
/// `i` is replaced by column `j` (both 0-based, rows `0..k`).
pub fn delta_minor<R: Domain>(a: &Matrix<R>, k: usize, i: usize, j: usize) -> Result<R> {
    if k > a.rows() || k > a.cols() || i >= a.cols() || j >= a.cols() {
        return Err(Error::IndexOutOfRange(format!(
            "delta minor (k={k}, i={i}, j={j}) of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let rows: Vec<usize> = (0..k).collect();
    let cols: Vec<usize> = (0..k).map(|c| if c == i { j } else { c }).collect();
    Ok(oracle_det(&a.select(&rows, &cols)))
}

/// `det(A^k_s) == alpha^s (alpha^k)^(s-k-1)`.
pub fn check_sylvester<R: Domain>(a: &Matrix<R>, k: usize, s: usize) -> Result<bool> {
    let mm = minors_matrix(a, k, s)?;
    let lhs = oracle_det(&mm.values);
    let ak = leading_minor(a, k)?;
    let mut rhs = leading_minor(a, s)?;
    for _ in 0..(s - k - 1) {
        rhs = rhs.mul(&ak);
    }
    Ok(lhs == rhs)
}

/// `alpha^s alpha^{k+1}_{i,j} - alpha^k alpha^{s+1}_{i,j}
///   == sum_{p=k..s-1} alpha^{k+1}_{i,p} delta^s_{p,j}` (0-based `p`).
pub fn check_base_minor_identity<R: Domain>(
    a: &Matrix<R>,
    i: usize,
    j: usize,
    k: usize,
    s: usize,
) -> Result<bool> {
    let n = a.rows();
    if !a.is_square() || k >= s || s > n || i >= n || j >= n {
        return Err(Error::IndexOutOfRange(format!(
            "base identity (i={i}, j={j}, k={k}, s={s}) on a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let alpha_s = leading_minor(a, s)?;
    let alpha_k = leading_minor(a, k)?;
    let lhs = alpha_s
        .mul(&alpha_minor(a, MinorSpec::new(k + 1, i, j))?)
        .sub(&alpha_k.mul(&alpha_minor(a, MinorSpec::new(s + 1, i, j))?));
    let mut rhs = R::zero();
    for p in k..s {
        let term = alpha_minor(a, MinorSpec::new(k + 1, i, p))?.mul(&delta_minor(a, s, p, j)?);
        rhs = rhs.add(&term);
    }
    Ok(lhs == rhs)
}

/// The two-step Sylvester relation behind the LDU factor formula:
/// `a^{k+1}_{i,j} alpha^{k+1} - a^{k+1}_{i,k+1} a^{k+1}_{k+1,j} == a^{k+2}_{i,j} alpha^k`,
/// with 0-based `i`, `j` and the pivot row/column `k`.
pub fn check_adjacent_sylvester<R: Domain>(a: &Matrix<R>, i: usize, j: usize, k: usize) -> Result<bool> {
    let lhs = alpha_minor(a, MinorSpec::new(k + 1, i, j))?
        .mul(&leading_minor(a, k + 1)?)
        .sub(
            &alpha_minor(a, MinorSpec::new(k + 1, i, k))?.mul(&alpha_minor(a, MinorSpec::new(k + 1, k, j))?),
        );
    let rhs = alpha_minor(a, MinorSpec::new(k + 2, i, j))?.mul(&leading_minor(a, k)?);
    Ok(lhs == rhs)
}

/// Every valid `(k, s)` pair for an `n x n` matrix.
pub fn sylvester_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|k| ((k + 1)..=n).map(move |s| (k, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{int, Integer};
    use rand::{Rng, SeedableRng};

    fn imat(rows: &[&[i64]]) -> Matrix<Integer> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    fn golden() -> Matrix<Integer> {
        imat(&[&[1, -4, 0, 1], &[4, 5, 5, 3], &[1, 2, 2, 2], &[3, 0, 0, 1]])
    }

    fn three() -> Matrix<Integer> {
        imat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]])
    }

    fn random(rng: &mut impl Rng, n: usize) -> Matrix<Integer> {
        Matrix::from_fn(n, n, |_, _| int(rng.gen_range(-9..=9)))
    }

    #[test]
    fn alpha_minor_examples() {
        let a = golden();
        assert_eq!(alpha_minor(&a, MinorSpec::new(2, 1, 1)).unwrap(), int(21));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(alpha_minor(&a, MinorSpec::new(1, i, j)).unwrap(), a[(i, j)]);
            }
        }
        let id = Matrix::<Integer>::identity(5);
        for k in 0..=5 {
            assert_eq!(leading_minor(&id, k).unwrap(), int(1));
        }
        assert_eq!(alpha_minor(&a, MinorSpec::new(0, 3, 2)).unwrap(), int(1));
        assert!(alpha_minor(&a, MinorSpec::new(2, 4, 1)).is_err());
        // Row 0 repeated.
        assert_eq!(alpha_minor(&a, MinorSpec::new(2, 0, 3)).unwrap(), int(0));
    }

    #[test]
    fn minors_matrix_examples() {
        let a = golden();
        assert_eq!(minors_matrix(&a, 0, 4).unwrap().values, a);
        assert_eq!(
            minors_matrix(&three(), 1, 3).unwrap().values,
            imat(&[&[-3, -6], &[-6, -11]])
        );
        let m = minors_matrix(&a, 1, 3).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(
                    m.values[(i, j)],
                    alpha_minor(&a, MinorSpec::new(2, 1 + i, 1 + j)).unwrap()
                );
            }
        }
        assert!(minors_matrix(&a, 2, 2).is_err());
        assert!(minors_matrix(&a, 1, 5).is_err());
    }

    #[test]
    fn delta_minor_examples() {
        let a = golden();
        for k in 1..=4 {
            for i in 0..k {
                assert_eq!(delta_minor(&a, k, i, i).unwrap(), leading_minor(&a, k).unwrap());
            }
        }
        let id = Matrix::<Integer>::identity(3);
        assert_eq!(delta_minor(&id, 2, 0, 2).unwrap(), int(0));
        assert!(delta_minor(&id, 2, 0, 3).is_err());
    }

    #[test]
    fn delta_minor_matches_explicit_copy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..=5);
            let a = random(&mut rng, n);
            let k = rng.gen_range(1..=n);
            let i = rng.gen_range(0..k);
            let j = rng.gen_range(0..n);
            let mut block = a.submatrix(0..k, 0..k);
            for r in 0..k {
                block.set(r, i, a[(r, j)].clone());
            }
            assert_eq!(delta_minor(&a, k, i, j).unwrap(), cofactor_det(&block));
        }
    }

    #[test]
    fn sylvester_examples() {
        let a = three();
        assert_eq!(oracle_det(&minors_matrix(&a, 1, 3).unwrap().values), int(-3));
        assert!(check_sylvester(&a, 1, 3).unwrap());
        for s in 1..=3 {
            assert!(check_sylvester(&a, s - 1, s).unwrap());
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for case in 0..40 {
            let a = random(&mut rng, 4 + case % 3);
            for (k, s) in sylvester_pairs(a.rows()) {
                assert!(check_sylvester(&a, k, s).unwrap(), "k={k} s={s}\n{a}");
            }
        }
        assert!(check_sylvester(&a, 2, 2).is_err());
    }

    #[test]
    fn base_minor_identity_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let a = random(&mut rng, 3);
        // k = s-1 with i = j = s (0-based i = j = s-1 is inside the leading
        // block, s is the next row).
        assert!(check_base_minor_identity(&a, 2, 2, 1, 2).unwrap());
        // i < s+1: the order-(s+1) minor repeats a row and vanishes.
        assert_eq!(alpha_minor(&a, MinorSpec::new(3, 1, 2)).unwrap(), int(0));
        assert!(check_base_minor_identity(&a, 1, 2, 0, 2).unwrap());
        for _ in 0..100 {
            let a = random(&mut rng, 4);
            let k = rng.gen_range(0..4);
            let s = rng.gen_range(k + 1..=4);
            let (i, j) = (rng.gen_range(0..4), rng.gen_range(0..4));
            assert!(check_base_minor_identity(&a, i, j, k, s).unwrap());
        }
        assert!(check_base_minor_identity(&a, 0, 0, 2, 1).is_err());
    }

    #[test]
    fn adjacent_sylvester_holds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let n = rng.gen_range(3..=5);
            let a = random(&mut rng, n);
            let k = rng.gen_range(0..n - 1);
            let (i, j) = (rng.gen_range(k..n), rng.gen_range(k..n));
            assert!(check_adjacent_sylvester(&a, i, j, k).unwrap());
        }
    }

    #[test]
    fn cofactor_and_bareiss_agree_beyond_the_limit() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [6, 7] {
            let a = random(&mut rng, n);
            assert_eq!(cofactor_det(&a), bareiss_det(&a).unwrap());
        }
    }
}
