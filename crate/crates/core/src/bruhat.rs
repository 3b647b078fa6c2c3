//! Bruhat decompositions `A = V w U` with `V`, `U` upper triangular over the
//! domain and `w` a scaled partial permutation over the fraction field.
//!
//! [`bruhat_flip`] reverses the rows, takes the LDU of the result and flips
//! `L` back: `A = (S L S)(S D) U` with `S` the anti-diagonal permutation.
//! It needs every leading minor of `S A` to be nonzero. [`bruhat_general`]
//! works for any matrix by regrouping an exact triangular decomposition of
//! `S A`.

use std::fmt;

use crate::domain::{Domain, Fraction, OpCounter, Ring};
use crate::error::{Error, Result};
use crate::etd::{etd, etd_to_ldu_grouping};
use crate::ldu::{ldu_full, LduFactors};
use crate::matrix::{Matrix, Permutation};

/// A `rows x cols` matrix with at most one nonzero entry in every row and
/// column.
#[derive(Clone, Debug)]
pub struct ScaledPerm<R> {
    rows: usize,
    cols: usize,
    entries: Vec<Option<(usize, Fraction<R>)>>,
}

impl<R: Domain> ScaledPerm<R> {
    /// `entries[i] = Some((j, x))` puts `x` at `(i, j)`.
    pub fn new(rows: usize, cols: usize, entries: Vec<Option<(usize, Fraction<R>)>>) -> Result<Self> {
        if entries.len() != rows {
            return Err(Error::DimensionMismatch(format!(
                "{} row entries for {rows} rows",
                entries.len()
            )));
        }
        let mut used = vec![false; cols];
        for (j, x) in entries.iter().flatten() {
            if *j >= cols || used[*j] || x.is_zero() {
                return Err(Error::InvalidPermutation(format!(
                    "entry in column {j} of a {rows}x{cols} scaled permutation"
                )));
            }
            used[*j] = true;
        }
        Ok(Self { rows, cols, entries })
    }

    /// Reads a dense matrix, failing unless it is a scaled partial
    /// permutation.
    pub fn from_dense(m: &Matrix<Fraction<R>>) -> Result<Self> {
        let mut entries = Vec::with_capacity(m.rows());
        for i in 0..m.rows() {
            let mut nz = (0..m.cols()).filter(|&j| !m[(i, j)].is_zero());
            let first = nz.next();
            if nz.next().is_some() {
                return Err(Error::InvalidPermutation(format!(
                    "row {i} has two nonzero entries"
                )));
            }
            entries.push(first.map(|j| (j, m[(i, j)].clone())));
        }
        Self::new(m.rows(), m.cols(), entries)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Option<(usize, Fraction<R>)>] {
        &self.entries
    }

    /// Number of nonzero entries.
    pub fn rank(&self) -> usize {
        self.entries.iter().flatten().count()
    }

    pub fn to_dense(&self) -> Matrix<Fraction<R>> {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (i, e) in self.entries.iter().enumerate() {
            if let Some((j, x)) = e {
                m.set(i, *j, x.clone());
            }
        }
        m
    }
}

impl<R: Domain> PartialEq for ScaledPerm<R> {
    fn eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.entries == other.entries
    }
}

impl<R: Domain> PartialEq for BruhatFactors<R> {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v && self.w == other.w && self.u == other.u && self.rank == other.rank
    }
}

impl<R: Domain> fmt::Display for ScaledPerm<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dense())
    }
}

#[derive(Clone, Debug)]
pub struct BruhatFactors<R> {
    pub v: Matrix<R>,
    pub w: ScaledPerm<R>,
    pub u: Matrix<R>,
    pub rank: usize,
}

impl<R: Domain> BruhatFactors<R> {
    pub fn reconstruct(&self) -> Result<Matrix<Fraction<R>>> {
        self.v
            .to_fractions()
            .matmul(&self.w.to_dense())?
            .matmul(&self.u.to_fractions())
    }
}

/// Bruhat decomposition through the LDU of the row-reversed matrix. The
/// nonzero entry of `w` in row `i` is `1 / (alpha^{t-1} alpha^t)` for
/// `t = n - i` with `alpha` the leading minors of the reversed matrix.
pub fn bruhat_flip<R: Domain>(a: &Matrix<R>, counter: &mut OpCounter) -> Result<BruhatFactors<R>> {
    bruhat_flip_with_ldu(a, counter).map(|(f, _)| f)
}

/// [`bruhat_flip`] together with the LDU factors of the reversed matrix.
pub fn bruhat_flip_with_ldu<R: Domain>(
    a: &Matrix<R>,
    counter: &mut OpCounter,
) -> Result<(BruhatFactors<R>, LduFactors<R>)> {
    let n = a.rows();
    let flip = Permutation::flip(n);
    let f = ldu_full(&flip.permute_rows(a), counter)?;
    let d = f.d_entries();
    let entries = (0..n).map(|i| Some((n - 1 - i, d[n - 1 - i].clone()))).collect();
    let bruhat = BruhatFactors {
        v: flip.conjugate(&f.l),
        w: ScaledPerm::new(n, n, entries)?,
        u: f.u.clone(),
        rank: n,
    };
    Ok((bruhat, f))
}

/// Bruhat decomposition of any matrix: with `S A = P L D U Q` exact
/// triangular, `A = (S P L P^T S)(S P D Q)(Q^T U Q)`.
pub fn bruhat_general<R: Domain>(a: &Matrix<R>, counter: &mut OpCounter) -> Result<BruhatFactors<R>> {
    let flip = Permutation::flip(a.rows());
    let f = etd(&flip.permute_rows(a), counter)?;
    let (lower, middle, upper) = etd_to_ldu_grouping(&f);
    let v = flip.conjugate(&lower);
    debug_assert!(v.is_upper_triangular() && upper.is_upper_triangular());
    let mut out = BruhatFactors {
        v,
        w: ScaledPerm::from_dense(&flip.permute_rows(&middle))?,
        u: upper,
        rank: f.rank,
    };
    out.normalize_units();
    Ok(out)
}

/// The unit `e` with `e * x` the canonical associate of `x`.
fn unit_to_associate<R: Domain>(x: &R) -> R {
    R::normalize_unit(R::one(), x.clone()).0
}

impl<R: Domain> BruhatFactors<R> {
    /// Moves units off the diagonals of `V` and `U` into `w`, so that for
    /// the integers both diagonals are positive.
    fn normalize_units(&mut self) {
        let n = self.v.rows().min(self.v.cols());
        let ev: Vec<R> = (0..self.v.cols())
            .map(|i| {
                if i < n {
                    unit_to_associate(&self.v[(i, i)])
                } else {
                    R::one()
                }
            })
            .collect();
        let m = self.u.rows().min(self.u.cols());
        let eu: Vec<R> = (0..self.u.rows())
            .map(|j| {
                if j < m {
                    unit_to_associate(&self.u[(j, j)])
                } else {
                    R::one()
                }
            })
            .collect();
        self.v = self.v.scale_columns(&ev);
        self.u = self.u.scale_rows(&eu);
        for (i, e) in self.w.entries.iter_mut().enumerate() {
            if let Some((j, x)) = e {
                let unit = ev[i].mul(&eu[*j]);
                *x = x.div(&Fraction::from_domain(unit)).expect("units are invertible");
            }
        }
    }
}

/// True iff `V`, `U` are upper triangular with nonzero diagonal entries in
/// their leading `rank x rank` parts and `V w U = a`.
pub fn verify_bruhat<R: Domain>(a: &Matrix<R>, f: &BruhatFactors<R>) -> Result<bool> {
    let (wr, wc) = f.w.shape();
    if f.v.rows() != a.rows() || f.v.cols() != wr || f.u.rows() != wc || f.u.cols() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "V {}x{}, w {wr}x{wc}, U {}x{} against {}x{}",
            f.v.rows(),
            f.v.cols(),
            f.u.rows(),
            f.u.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let r = f.w.rank();
    let leading_nonzero = |m: &Matrix<R>| (0..r.min(m.rows()).min(m.cols())).all(|i| !m[(i, i)].is_zero());
    Ok(r == f.rank
        && f.v.is_upper_triangular()
        && f.u.is_upper_triangular()
        && leading_nonzero(&f.v)
        && leading_nonzero(&f.u)
        && f.reconstruct()? == a.to_fractions())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{frac, int, Integer};
    use crate::minors::{leading_minor, oracle_rank};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn imat(rows: &[&[i64]]) -> Matrix<Integer> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    fn golden() -> Matrix<Integer> {
        imat(&[&[1, -4, 0, 1], &[4, 5, 5, 3], &[1, 2, 2, 2], &[3, 0, 0, 1]])
    }

    #[test]
    fn flip_example() {
        let a = imat(&[&[0, 1], &[2, 3]]);
        let f = bruhat_flip(&a, &mut OpCounter::new()).unwrap();
        assert_eq!(f.v, imat(&[&[2, 0], &[0, 2]]));
        let w = Matrix::from_rows(vec![vec![frac(0, 1), frac(1, 4)], vec![frac(1, 2), frac(0, 1)]]).unwrap();
        assert_eq!(f.w.to_dense(), w);
        assert_eq!(f.u, imat(&[&[2, 3], &[0, 2]]));
        assert!(verify_bruhat(&a, &f).unwrap());
    }

    #[test]
    fn flip_needs_generic_reversal() {
        assert_eq!(
            bruhat_flip(&golden(), &mut OpCounter::new()),
            Err(Error::ZeroPivotMinor(3))
        );
    }

    #[test]
    fn flip_of_reversed_upper_triangular() {
        let t = imat(&[&[2, 1, 5], &[0, 3, -1], &[0, 0, 4]]);
        let a = Permutation::flip(3).permute_rows(&t);
        let f = bruhat_flip(&a, &mut OpCounter::new()).unwrap();
        assert!(verify_bruhat(&a, &f).unwrap());
        let anti = |i: usize| f.w.entries()[i].as_ref().map(|(j, _)| *j);
        assert_eq!((anti(0), anti(1), anti(2)), (Some(2), Some(1), Some(0)));
    }

    #[test]
    fn flip_scales_are_minor_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let mut done = 0;
        while done < 15 {
            let n = rng.gen_range(2..7);
            let a = Matrix::from_fn(n, n, |_, _| int(rng.gen_range(-9..=9)));
            let Ok(f) = bruhat_flip(&a, &mut OpCounter::new()) else {
                continue;
            };
            done += 1;
            assert!(verify_bruhat(&a, &f).unwrap());
            let b = Permutation::flip(n).permute_rows(&a);
            for i in 0..n {
                let t = n - i;
                let expect = Fraction::new(
                    int(1),
                    leading_minor(&b, t - 1).unwrap() * leading_minor(&b, t).unwrap(),
                )
                .unwrap();
                assert_eq!(f.w.entries()[i], Some((t - 1, expect)));
            }
        }
    }

    #[test]
    fn general_on_golden_and_printed_factors() {
        let a = golden();
        let f = bruhat_general(&a, &mut OpCounter::new()).unwrap();
        assert!(verify_bruhat(&a, &f).unwrap());
        assert_eq!(f.rank, 4);
    }

    #[test]
    fn general_trivial_inputs() {
        let id = Matrix::<Integer>::identity(4);
        let f = bruhat_general(&id, &mut OpCounter::new()).unwrap();
        assert_eq!((f.v.clone(), f.u.clone()), (id.clone(), id.clone()));
        assert_eq!(f.w.to_dense(), id.to_fractions());
        for (n, m) in [(3, 3), (2, 5), (0, 0)] {
            let z = Matrix::<Integer>::zeros(n, m);
            let f = bruhat_general(&z, &mut OpCounter::new()).unwrap();
            assert_eq!(f.rank, 0);
            assert!(verify_bruhat(&z, &f).unwrap());
        }
    }

    #[test]
    fn general_random_any_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..60 {
            let (n, m) = (rng.gen_range(1..8), rng.gen_range(1..8));
            let dense = rng.gen_bool(0.5);
            let a = Matrix::from_fn(n, m, |_, _| {
                if dense || rng.gen_bool(0.3) {
                    int(rng.gen_range(-9..=9))
                } else {
                    int(0)
                }
            });
            let f = bruhat_general(&a, &mut OpCounter::new()).unwrap();
            assert!(verify_bruhat(&a, &f).unwrap(), "{a}");
            assert_eq!(f.rank, oracle_rank(&a));
            if n == m {
                if let Ok(g) = bruhat_flip(&a, &mut OpCounter::new()) {
                    assert_eq!(g.reconstruct().unwrap(), f.reconstruct().unwrap());
                }
            }
        }
    }

    #[test]
    fn tampered_scale_is_rejected() {
        let a = imat(&[&[0, 1], &[2, 3]]);
        let mut f = bruhat_flip(&a, &mut OpCounter::new()).unwrap();
        f.w.entries[0] = Some((1, frac(1, 5)));
        assert!(!verify_bruhat(&a, &f).unwrap());
        let bad = BruhatFactors {
            v: Matrix::identity(3),
            ..f
        };
        assert!(matches!(
            verify_bruhat(&a, &bad),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn scaled_perm_validation() {
        let two = |a, b| ScaledPerm::<Integer>::new(2, 2, vec![a, b]);
        assert!(two(Some((0, frac(1, 2))), Some((0, frac(1, 3)))).is_err());
        assert!(two(Some((0, frac(0, 1))), None).is_err());
        assert!(two(Some((2, frac(1, 1))), None).is_err());
        let w = two(None, Some((0, frac(-1, 3)))).unwrap();
        assert_eq!(w.rank(), 1);
        assert_eq!(ScaledPerm::from_dense(&w.to_dense()).unwrap(), w);
        let dense =
            Matrix::from_rows(vec![vec![frac(1, 1), frac(2, 1)], vec![frac(0, 1), frac(0, 1)]]).unwrap();
        assert!(ScaledPerm::from_dense(&dense).is_err());
    }
}
