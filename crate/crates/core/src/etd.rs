//! Exact triangular decomposition `A = P L D U Q` of an arbitrary
//! rectangular matrix over a domain.
//!
//! `P`, `Q` are permutations, `L` (`N x N`) and `U` (`M x M`) are
//! nonsingular triangular matrices over the domain such that `P L P^T` stays
//! lower and `Q^T U Q` stays upper triangular, and
//! `D = diag(1/d_1, ..., 1/d_r, 0, ...)` is `N x M` with every `d_i` a
//! nonzero domain element. The factors also have the block shape
//!
//! ```text
//! L = [[L1, 0], [L2, I]],   U = [[U1, U2], [0, I]]
//! ```
//!
//! and the triangularity of `P L P^T`, `Q^T U Q` survives replacing the
//! identity blocks by arbitrary triangular blocks.
//!
//! Small shapes (zero, thin, `2 x 2`) have closed forms. Larger matrices are
//! split as `[[A, B], [C, D]]` with a square leading block; the recursion
//! depends on whether the decomposition of `A` has full rank. Intermediate
//! blocks built from inverses live in the fraction field; each recursive call
//! on such a block first clears denominators, and the assembled factors are
//! brought back into the domain by rescaling rank columns of `L` and rank
//! rows of `U` against the matching `d_i`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};

use crate::domain::{Domain, Fraction, OpCounter, Ring};
use crate::error::{Error, Result};
use crate::matrix::{bareiss_rank, mat_mul, split_unchecked, Matrix, Permutation};
use crate::par;

type F<R> = Fraction<R>;

/// Factors of `A = P L D U Q`; `D = diag(1/d_1, ..., 1/d_r, 0, ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtdFactors<R> {
    pub p: Permutation,
    pub l: Matrix<R>,
    pub d: Vec<R>,
    pub u: Matrix<R>,
    pub q: Permutation,
    pub rank: usize,
}

impl<R: Domain> EtdFactors<R> {
    /// Shape `(N, M)` of the decomposed matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.l.rows(), self.u.rows())
    }

    /// The `N x M` matrix `D`.
    pub fn d_matrix(&self) -> Matrix<F<R>> {
        let (n, m) = self.shape();
        let mut out = Matrix::zeros(n, m);
        for (i, di) in self.d.iter().enumerate() {
            out.set(i, i, F::new(R::one(), di.clone()).expect("nonzero d"));
        }
        out
    }

    /// `P L D U Q` over the fraction field.
    pub fn reconstruct(&self) -> Matrix<F<R>> {
        let ld = self.l.to_fractions().matmul(&self.d_matrix()).expect("shapes");
        let ldu = ld.matmul(&self.u.to_fractions()).expect("shapes");
        self.q.permute_cols(&self.p.permute_rows(&ldu))
    }

    /// Factors of `A^T`, read off `A^T = Q^T U^T D^T L^T P^T`.
    pub fn transposed(&self) -> Self {
        Self {
            p: self.q.inverse(),
            l: self.u.transpose(),
            d: self.d.clone(),
            u: self.l.transpose(),
            q: self.p.inverse(),
            rank: self.rank,
        }
    }
}

/// How much work [`etd_with_stats`] needed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EtdStats {
    /// Recursive block steps performed.
    pub block_steps: usize,
    /// Block steps whose assembled `L`/`U` had entries outside the domain
    /// before rescaling.
    pub rescaled_steps: usize,
}

pub fn etd<R: Domain>(a: &Matrix<R>, counter: &mut OpCounter) -> Result<EtdFactors<R>> {
    etd_with_stats(a, counter).map(|(f, _)| f)
}

pub fn etd_with_stats<R: Domain>(
    a: &Matrix<R>,
    counter: &mut OpCounter,
) -> Result<(EtdFactors<R>, EtdStats)> {
    let mut stats = EtdStats::default();
    let f = etd_inner(a, counter, &mut stats)?;
    Ok((f, stats))
}

fn debug_checks() -> bool {
    static ON: OnceLock<bool> = OnceLock::new();
    *ON.get_or_init(|| std::env::var("BRUHAT_DEBUG_ASSERTS").is_ok_and(|v| v == "1"))
}

fn etd_inner<R: Domain>(
    a: &Matrix<R>,
    counter: &mut OpCounter,
    stats: &mut EtdStats,
) -> Result<EtdFactors<R>> {
    let (n, m) = a.shape();
    let f = if a.is_zero() {
        zero_etd(n, m)
    } else if n == 1 {
        thin_row(a)
    } else if m == 1 {
        thin_row(&a.transpose()).transposed()
    } else if n == 2 && m == 2 {
        two_by_two(a)
    } else {
        stats.block_steps += 1;
        sort_identity_tails(block_step(a, counter, stats)?)
    };
    if debug_checks() {
        assert_eq!(f.reconstruct(), a.to_fractions(), "ETD reconstruction at {n}x{m}");
        assert!(f.p.conjugate(&f.l).is_lower_triangular(), "P L P^T at {n}x{m}");
        assert!(
            f.q.inverse().conjugate(&f.u).is_upper_triangular(),
            "Q^T U Q at {n}x{m}"
        );
    }
    Ok(f)
}

/// Orders the identity tails of `L` and `U` by where their rows land in
/// `P L P^T` and `Q^T U Q`. The assembled tails mix null rows of the leading
/// block with the tail of a trailing decomposition in the wrong relative
/// order, which breaks triangularity once the tail is replaced. Conjugating a
/// tail changes neither `P L P^T`, `Q^T U Q` nor the product, since the
/// matching rows and columns of `D` are zero.
fn sort_identity_tails<R: Domain>(mut f: EtdFactors<R>) -> EtdFactors<R> {
    let r = f.rank;
    let (n, m) = f.shape();
    let p_inv = f.p.inverse();
    let mut rows: Vec<usize> = (r..n).collect();
    rows.sort_by_key(|&k| p_inv.image(k));
    let t = Permutation::from_map((0..r).chain(rows).collect()).expect("tail order");
    f.l = t.conjugate(&f.l);
    f.p = f.p.compose(&t.inverse());
    let mut cols: Vec<usize> = (r..m).collect();
    cols.sort_by_key(|&k| f.q.image(k));
    let s = Permutation::from_map((0..r).chain(cols).collect()).expect("tail order");
    f.u = s.conjugate(&f.u);
    f.q = s.compose(&f.q);
    f
}

fn zero_etd<R: Domain>(n: usize, m: usize) -> EtdFactors<R> {
    EtdFactors {
        p: Permutation::identity(n),
        l: Matrix::identity(n),
        d: Vec::new(),
        u: Matrix::identity(m),
        q: Permutation::identity(m),
        rank: 0,
    }
}

/// Nonzero `1 x m`: the first nonzero entry is moved to the front and
/// `U = [[a_j, rest], [0, I]]`.
fn thin_row<R: Domain>(a: &Matrix<R>) -> EtdFactors<R> {
    let m = a.cols();
    let j0 = (0..m).find(|&j| !a[(0, j)].is_zero()).expect("nonzero row");
    let order: Vec<usize> = std::iter::once(j0).chain((0..m).filter(|&j| j != j0)).collect();
    let pivot = a[(0, j0)].clone();
    let u = Matrix::from_fn(m, m, |i, j| match i {
        0 => a[(0, order[j])].clone(),
        _ if i == j => R::one(),
        _ => R::zero(),
    });
    EtdFactors {
        p: Permutation::identity(1),
        l: Matrix::new(1, 1, vec![pivot.clone()]).expect("1x1"),
        d: vec![pivot],
        u,
        q: Permutation::from_map(order).expect("valid order"),
        rank: 1,
    }
}

/// The four nonzero `2 x 2` patterns, tried in the order `alpha != 0`,
/// `beta != 0`, `gamma != 0`, then `delta` alone.
fn two_by_two<R: Domain>(a: &Matrix<R>) -> EtdFactors<R> {
    let (al, be, ga, de) = (&a[(0, 0)], &a[(0, 1)], &a[(1, 0)], &a[(1, 1)]);
    let det = al.mul(de).sub(&be.mul(ga));
    let eps = if det.is_zero() { R::one() } else { det.clone() };
    let z = R::zero;
    let m2 = |x: [[R; 2]; 2]| Matrix::from_rows(x.map(Vec::from).to_vec()).expect("2x2");
    let id = Permutation::identity(2);
    let swap = Permutation::transposition(2, 0, 1);
    let rank = if det.is_zero() { 1 } else { 2 };
    let with_second = |first: &R, second: R| {
        let mut d = vec![first.clone()];
        if rank == 2 {
            d.push(second);
        }
        d
    };
    if !al.is_zero() {
        EtdFactors {
            p: id.clone(),
            l: m2([[al.clone(), z()], [ga.clone(), eps.clone()]]),
            d: with_second(al, det.mul(al)),
            u: m2([[al.clone(), be.clone()], [z(), eps]]),
            q: id,
            rank,
        }
    } else if !be.is_zero() {
        EtdFactors {
            p: id,
            l: m2([[be.clone(), z()], [de.clone(), eps.clone()]]),
            d: with_second(be, det.mul(be).neg()),
            u: m2([[be.clone(), z()], [z(), eps]]),
            q: swap,
            rank,
        }
    } else if !ga.is_zero() {
        EtdFactors {
            p: swap,
            l: m2([[ga.clone(), z()], [z(), eps.clone()]]),
            d: with_second(ga, det.mul(ga).neg()),
            u: m2([[ga.clone(), de.clone()], [z(), eps]]),
            q: id,
            rank,
        }
    } else {
        EtdFactors {
            p: swap.clone(),
            l: m2([[de.clone(), z()], [z(), R::one()]]),
            d: vec![de.clone()],
            u: m2([[de.clone(), z()], [z(), R::one()]]),
            q: swap,
            rank: 1,
        }
    }
}

fn lcm<R: Domain>(a: &R, b: &R) -> R {
    match a.gcd(b) {
        Some(g) if !g.is_zero() => a.exact_quotient(&g).expect("gcd divides").mul(b),
        _ => a.mul(b),
    }
}

fn common_denominator<'a, R: Domain + 'a>(entries: impl IntoIterator<Item = &'a F<R>>) -> R {
    entries.into_iter().fold(R::one(), |acc, x| {
        if x.denom().is_one() {
            acc
        } else {
            lcm(&acc, x.denom())
        }
    })
}

fn scale_into_domain<R: Domain>(x: &F<R>, c: &R) -> R {
    x.mul(&F::from_domain(c.clone()))
        .to_domain()
        .expect("common denominator clears")
}

/// ETD of a block over the fraction field: decompose `c * m` with `c` a
/// common denominator, then fold `c` into `d`.
fn etd_fraction_block<R: Domain>(
    m: &Matrix<F<R>>,
    counter: &mut OpCounter,
    stats: &mut EtdStats,
) -> Result<EtdFactors<R>> {
    let c = common_denominator(m.entries());
    let scaled = m.map(|x| scale_into_domain(x, &c));
    let mut f = etd_inner(&scaled, counter, stats)?;
    for d in &mut f.d {
        *d = d.mul(&c);
    }
    Ok(f)
}

/// Inverse of a lower triangular matrix with nonzero diagonal.
fn lower_inverse<R: Domain>(l: &Matrix<F<R>>) -> Result<Matrix<F<R>>> {
    let n = l.rows();
    let mut inv = Matrix::<F<R>>::zeros(n, n);
    for j in 0..n {
        inv.set(j, j, l[(j, j)].inv()?);
        for i in j + 1..n {
            let mut acc = F::<R>::zero();
            for k in j..i {
                acc = acc.add(&l[(i, k)].mul(&inv[(k, j)]));
            }
            inv.set(i, j, acc.neg().div(&l[(i, i)])?);
        }
    }
    Ok(inv)
}

fn upper_inverse<R: Domain>(u: &Matrix<F<R>>) -> Result<Matrix<F<R>>> {
    Ok(lower_inverse(&u.transpose())?.transpose())
}

fn fractions_of<R: Domain>(d: &[R]) -> Vec<F<R>> {
    d.iter().cloned().map(F::from_domain).collect()
}

fn reciprocals<R: Domain>(d: &[R]) -> Vec<F<R>> {
    d.iter()
        .map(|x| F::new(R::one(), x.clone()).expect("nonzero d"))
        .collect()
}

fn rows_of<T: Clone>(m: &Matrix<T>, r: std::ops::Range<usize>) -> Matrix<T> {
    m.submatrix(r, 0..m.cols())
}

fn cols_of<T: Clone>(m: &Matrix<T>, c: std::ops::Range<usize>) -> Matrix<T> {
    m.submatrix(0..m.rows(), c)
}

/// Brings assembled factors into the domain: column `j < rank` of `L` is
/// scaled by the lcm `lambda_j` of its denominators, row `j` of `U` by
/// `mu_j`, and `d_j` by `lambda_j mu_j`, which leaves `L D U` unchanged.
fn into_domain<R: Domain>(
    l: Matrix<F<R>>,
    u: Matrix<F<R>>,
    mut d: Vec<R>,
    stats: &mut EtdStats,
) -> Result<(Matrix<R>, Matrix<R>, Vec<R>)> {
    let rank = d.len();
    if l.is_in_domain() && u.is_in_domain() {
        return Ok((l.to_domain()?, u.to_domain()?, d));
    }
    stats.rescaled_steps += 1;
    let lambda: Vec<R> = (0..rank)
        .map(|j| common_denominator((0..l.rows()).map(|i| &l[(i, j)])))
        .collect();
    let mu: Vec<R> = (0..rank)
        .map(|i| common_denominator((0..u.cols()).map(|j| &u[(i, j)])))
        .collect();
    let pad = |v: &[R], n: usize| {
        let mut s = fractions_of(v);
        s.resize(n, F::one());
        s
    };
    let l = l.scale_columns(&pad(&lambda, l.cols())).to_domain()?;
    let u = u.scale_rows(&pad(&mu, u.rows())).to_domain()?;
    for j in 0..rank {
        d[j] = d[j].mul(&lambda[j]).mul(&mu[j]);
    }
    Ok((l, u, d))
}

fn block_step<R: Domain>(
    a: &Matrix<R>,
    counter: &mut OpCounter,
    stats: &mut EtdStats,
) -> Result<EtdFactors<R>> {
    let (nn, mm) = a.shape();
    let n = nn.div_ceil(2).min(nn - 1).min(mm - 1);
    let (a11, b, c, dd) = split_unchecked(a, n, n);
    let f1 = etd_inner(&a11, counter, stats)?;
    let r = f1.rank;

    // C Q1^T U1^{-1} and L1^{-1} P1^T B, both over the fraction field.
    let u1_inv = upper_inverse(&f1.u.to_fractions())?;
    let l1_inv = lower_inverse(&f1.l.to_fractions())?;
    let cq = f1.q.inverse().permute_cols(&c).to_fractions();
    let cu = mat_mul(&cq, &u1_inv, counter)?;
    let pb = f1.p.inverse().permute_rows(&b).to_fractions();
    let lb = mat_mul(&l1_inv, &pb, counter)?;

    let delta1 = fractions_of(&f1.d);
    // X = C0 diag(d1), Y = diag(d1) B0; the trailing block is
    // D - C0 diag(d1) B0 = D - X diag(1/d1) Y.
    let x = cols_of(&cu, 0..r).scale_columns(&delta1);
    let y = rows_of(&lb, 0..r).scale_rows(&delta1);
    let correction = mat_mul(&x.scale_columns(&reciprocals(&f1.d)), &y, counter)?;
    let schur = dd.to_fractions().sub(&correction)?;

    if r == n {
        return full_rank_step(f1, x, y, &schur, counter, stats);
    }
    let c1 = cols_of(&cu, r..n);
    let b1 = rows_of(&lb, r..n);
    if c1.is_zero() && b1.is_zero() {
        split_off_step(f1, x, y, &schur, (nn, mm, n), counter, stats)
    } else {
        coupled_step(f1, x, y, &schur, &c1, &b1, (nn, mm, n), counter, stats)
    }
}

/// The leading block has full rank:
/// `L = [[L1, 0], [P2^T X, L2]]`, `U = [[U1, Y Q2^T], [0, U2]]`.
fn full_rank_step<R: Domain>(
    f1: EtdFactors<R>,
    x: Matrix<F<R>>,
    y: Matrix<F<R>>,
    schur: &Matrix<F<R>>,
    counter: &mut OpCounter,
    stats: &mut EtdStats,
) -> Result<EtdFactors<R>> {
    let f2 = etd_fraction_block(schur, counter, stats)?;
    let (n, n2, m2) = (f1.l.rows(), f2.l.rows(), f2.u.rows());
    let l = Matrix::from_blocks(&[
        vec![&f1.l.to_fractions(), &Matrix::zeros(n, n2)],
        vec![&f2.p.inverse().permute_rows(&x), &f2.l.to_fractions()],
    ])?;
    let u = Matrix::from_blocks(&[
        vec![&f1.u.to_fractions(), &f2.q.inverse().permute_cols(&y)],
        vec![&Matrix::zeros(m2, n), &f2.u.to_fractions()],
    ])?;
    let mut d = f1.d;
    d.extend(f2.d);
    let (l, u, d) = into_domain(l, u, d, stats)?;
    Ok(EtdFactors {
        p: f1.p.direct_sum(&f2.p),
        q: f1.q.direct_sum(&f2.q),
        rank: d.len(),
        l,
        d,
        u,
    })
}

/// Rank-deficient leading block with nothing coupling its null part to the
/// rest: the trailing Schur block is decomposed alone and its rows and
/// columns are moved ahead of the identity part of `L1`, `U1`.
#[allow(clippy::too_many_arguments)]
fn split_off_step<R: Domain>(
    f1: EtdFactors<R>,
    x: Matrix<F<R>>,
    y: Matrix<F<R>>,
    schur: &Matrix<F<R>>,
    (nn, mm, n): (usize, usize, usize),
    counter: &mut OpCounter,
    stats: &mut EtdStats,
) -> Result<EtdFactors<R>> {
    let r = f1.rank;
    let (nr, nb, mb) = (n - r, nn - n, mm - n);
    let f2 = etd_fraction_block(schur, counter, stats)?;
    let l1 = f1.l.to_fractions();
    let u1 = f1.u.to_fractions();
    let (l0, m0) = (l1.submatrix(0..r, 0..r), l1.submatrix(r..n, 0..r));
    let (u0, v0) = (u1.submatrix(0..r, 0..r), u1.submatrix(0..r, r..n));
    let z = Matrix::<F<R>>::zeros;
    let l = Matrix::from_blocks(&[
        vec![&l0, &z(r, nb), &z(r, nr)],
        vec![&f2.p.inverse().permute_rows(&x), &f2.l.to_fractions(), &z(nb, nr)],
        vec![&m0, &z(nr, nb), &Matrix::identity(nr)],
    ])?;
    let u = Matrix::from_blocks(&[
        vec![&u0, &f2.q.inverse().permute_cols(&y), &v0],
        vec![&z(mb, r), &f2.u.to_fractions(), &z(mb, nr)],
        vec![&z(nr, r), &z(nr, mb), &Matrix::identity(nr)],
    ])?;
    let mut d = f1.d;
    d.extend(f2.d);
    let (l, u, d) = into_domain(l, u, d, stats)?;

    let rows = Permutation::block_shuffle(&[r, nr, nb], &[0, 2, 1]);
    let cols = Permutation::block_shuffle(&[r, nr, mb], &[0, 2, 1]);
    let p =
        f1.p.direct_sum(&Permutation::identity(nb))
            .compose(&Permutation::identity(n).direct_sum(&f2.p))
            .compose(&rows.inverse());
    let q = cols
        .compose(&Permutation::identity(n).direct_sum(&f2.q))
        .compose(&f1.q.direct_sum(&Permutation::identity(mb)));
    Ok(EtdFactors {
        p,
        q,
        rank: d.len(),
        l,
        d,
        u,
    })
}

/// Rank-deficient leading block whose null part couples to `B` or `C`:
/// `C1` and `B1` are decomposed, the trailing block is reduced against both
/// to `D'`, the part of `D'` outside their pivots is decomposed, and the
/// five row/column groups are reordered so that `D` is diagonal.
#[allow(clippy::too_many_arguments)]
fn coupled_step<R: Domain>(
    f1: EtdFactors<R>,
    x: Matrix<F<R>>,
    y: Matrix<F<R>>,
    schur: &Matrix<F<R>>,
    c1: &Matrix<F<R>>,
    b1: &Matrix<F<R>>,
    (nn, mm, n): (usize, usize, usize),
    counter: &mut OpCounter,
    stats: &mut EtdStats,
) -> Result<EtdFactors<R>> {
    let r = f1.rank;
    let (nr, nb, mb) = (n - r, nn - n, mm - n);

    let ((f2, c2, s2), (f3, c3, s3)) = par::join(
        || {
            let (mut c, mut s) = (OpCounter::new(), EtdStats::default());
            (etd_fraction_block(c1, &mut c, &mut s), c, s)
        },
        || {
            let (mut c, mut s) = (OpCounter::new(), EtdStats::default());
            (etd_fraction_block(b1, &mut c, &mut s), c, s)
        },
    );
    counter.merge(&c2);
    counter.merge(&c3);
    stats.block_steps += s2.block_steps + s3.block_steps;
    stats.rescaled_steps += s2.rescaled_steps + s3.rescaled_steps;
    let (f2, f3) = (f2?, f3?);
    let (r2, r3) = (f2.rank, f3.rank);

    // D' = L2^{-1} P2^T S Q3^T U3^{-1}.
    let l2_inv = lower_inverse(&f2.l.to_fractions())?;
    let u3_inv = upper_inverse(&f3.u.to_fractions())?;
    let ps = f2.p.inverse().permute_rows(schur);
    let psq = f3.q.inverse().permute_cols(&ps);
    let dp = mat_mul(&mat_mul(&l2_inv, &psq, counter)?, &u3_inv, counter)?;
    let (dp1, dp3, dp2, dp4) = split_unchecked(&dp, r2, r3);

    let l1 = f1.l.to_fractions();
    let u1 = f1.u.to_fractions();
    let l2 = f2.l.to_fractions();
    let l3 = f3.l.to_fractions();
    let u2 = f2.u.to_fractions();
    let u3 = f3.u.to_fractions();
    let l0 = l1.submatrix(0..r, 0..r);
    let u0 = u1.submatrix(0..r, 0..r);
    let m0 = f3.p.inverse().permute_rows(&l1.submatrix(r..n, 0..r));
    let (m1, m4) = (rows_of(&m0, 0..r3), rows_of(&m0, r3..nr));
    let m56 = f2.p.inverse().permute_rows(&x);
    let (m5, m6) = (rows_of(&m56, 0..r2), rows_of(&m56, r2..nb));
    let v0 = f2.q.inverse().permute_cols(&u1.submatrix(0..r, r..n));
    let (v1, v4) = (cols_of(&v0, 0..r2), cols_of(&v0, r2..nr));
    let v56 = f3.q.inverse().permute_cols(&y);
    let (v5, v6) = (cols_of(&v56, 0..r3), cols_of(&v56, r3..mb));
    let (l2p, m2) = (l2.submatrix(0..r2, 0..r2), l2.submatrix(r2..nb, 0..r2));
    let (l3p, m3) = (l3.submatrix(0..r3, 0..r3), l3.submatrix(r3..nr, 0..r3));
    let (u2p, v2) = (u2.submatrix(0..r2, 0..r2), u2.submatrix(0..r2, r2..nr));
    let (u3p, v3) = (u3.submatrix(0..r3, 0..r3), u3.submatrix(0..r3, r3..mb));

    // Clear D'_2 against the pivots of B1 and D'_1, D'_3 against those of C1.
    let delta2 = fractions_of(&f2.d);
    let delta3 = fractions_of(&f3.d);
    let m7 = dp2.scale_columns(&delta3);
    let v7 = mat_mul(&dp1.scale_rows(&delta2), &u3p, counter)?;
    let v8 = mat_mul(&dp1, &v3, counter)?.add(&dp3)?.scale_rows(&delta2);

    let f4 = etd_fraction_block(&dp4, counter, stats)?;
    let (n4, m4c) = (nb - r2, mb - r3);
    let p4t = f4.p.inverse();
    let q4t = f4.q.inverse();
    let (m6, m7, m2) = (
        p4t.permute_rows(&m6),
        p4t.permute_rows(&m7),
        p4t.permute_rows(&m2),
    );
    let (v6, v8, v3) = (
        q4t.permute_cols(&v6),
        q4t.permute_cols(&v8),
        q4t.permute_cols(&v3),
    );

    let z = Matrix::<F<R>>::zeros;
    let (k3, k4) = (nr - r3, nr - r2);
    let l4 = f4.l.to_fractions();
    let l = Matrix::from_blocks(&[
        vec![&l0, &z(r, r2), &z(r, r3), &z(r, n4), &z(r, k3)],
        vec![&m5, &l2p, &z(r2, r3), &z(r2, n4), &z(r2, k3)],
        vec![&m1, &z(r3, r2), &l3p, &z(r3, n4), &z(r3, k3)],
        vec![&m6, &m2, &m7, &l4, &z(n4, k3)],
        vec![&m4, &z(k3, r2), &m3, &z(k3, n4), &Matrix::identity(k3)],
    ])?;
    let u4 = f4.u.to_fractions();
    let u = Matrix::from_blocks(&[
        vec![&u0, &v1, &v5, &v6, &v4],
        vec![&z(r2, r), &u2p, &v7, &v8, &v2],
        vec![&z(r3, r), &z(r3, r2), &u3p, &v3, &z(r3, k4)],
        vec![&z(m4c, r), &z(m4c, r2), &z(m4c, r3), &u4, &z(m4c, k4)],
        vec![
            &z(k4, r),
            &z(k4, r2),
            &z(k4, r3),
            &z(k4, m4c),
            &Matrix::identity(k4),
        ],
    ])?;
    let mut d = f1.d;
    d.extend(f2.d);
    d.extend(f3.d);
    d.extend(f4.d);
    let (l, u, d) = into_domain(l, u, d, stats)?;

    let id = Permutation::identity;
    let p5 =
        f1.p.direct_sum(&id(nb))
            .compose(&id(r).direct_sum(&f3.p).direct_sum(&f2.p))
            .compose(&id(nn - n4).direct_sum(&f4.p));
    let rows = Permutation::block_shuffle(&[r, r3, k3, r2, n4], &[0, 3, 1, 4, 2]);
    let q5 = id(mm - m4c)
        .direct_sum(&f4.q)
        .compose(&id(r).direct_sum(&f2.q).direct_sum(&f3.q))
        .compose(&f1.q.direct_sum(&id(mb)));
    let cols = Permutation::block_shuffle(&[r, r2, k4, r3, m4c], &[0, 1, 3, 4, 2]);
    Ok(EtdFactors {
        p: p5.compose(&rows.inverse()),
        q: cols.compose(&q5),
        rank: d.len(),
        l,
        d,
        u,
    })
}

/// Outcome of every clause checked by [`check_etd`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EtdCheck {
    pub reconstructs: bool,
    pub l_lower: bool,
    pub u_upper: bool,
    pub plp_lower: bool,
    pub quq_upper: bool,
    pub d_nonzero: bool,
    pub rank_matches: bool,
    /// `L = [[L1, 0], [L2, I]]`, `U = [[U1, U2], [0, I]]`.
    pub identity_blocks: bool,
    /// Triangularity of `P L P^T`, `Q^T U Q` after substituting random
    /// triangular blocks for the identity blocks.
    pub substitution_stable: bool,
}

impl EtdCheck {
    pub fn all(&self) -> bool {
        self.reconstructs
            && self.l_lower
            && self.u_upper
            && self.plp_lower
            && self.quq_upper
            && self.d_nonzero
            && self.rank_matches
            && self.identity_blocks
            && self.substitution_stable
    }
}

/// Checks every clause of the definition against `a`; the substitution test
/// uses `trials` random blocks per factor.
pub fn check_etd<R: Domain, G: Rng>(
    a: &Matrix<R>,
    f: &EtdFactors<R>,
    rng: &mut G,
    trials: usize,
) -> Result<EtdCheck> {
    let (n, m) = a.shape();
    let shapes_ok = f.l.shape() == (n, n)
        && f.u.shape() == (m, m)
        && f.p.size() == n
        && f.q.size() == m
        && f.d.len() == f.rank
        && f.rank <= n.min(m);
    if !shapes_ok {
        return Err(Error::DimensionMismatch(format!(
            "factors do not fit a {n}x{m} matrix"
        )));
    }
    let r = f.rank;
    let diag_nonzero = |x: &Matrix<R>| (0..x.rows()).all(|i| !x[(i, i)].is_zero());
    let qt = f.q.inverse();
    let identity_tail = |x: &Matrix<R>, lower: bool| {
        let k = x.rows();
        let tail = x.submatrix(r..k, r..k) == Matrix::identity(k - r);
        let off = if lower {
            x.submatrix(0..r, r..k)
        } else {
            x.submatrix(r..k, 0..r)
        };
        tail && off.is_zero()
    };
    let identity_blocks = identity_tail(&f.l, true) && identity_tail(&f.u, false);
    let mut substitution_stable = identity_blocks;
    for _ in 0..trials {
        if !substitution_stable {
            break;
        }
        let l = with_random_tail(&f.l, r, true, rng);
        let u = with_random_tail(&f.u, r, false, rng);
        substitution_stable =
            f.p.conjugate(&l).is_lower_triangular() && qt.conjugate(&u).is_upper_triangular();
    }
    Ok(EtdCheck {
        reconstructs: f.reconstruct() == a.to_fractions(),
        l_lower: f.l.is_lower_triangular() && diag_nonzero(&f.l),
        u_upper: f.u.is_upper_triangular() && diag_nonzero(&f.u),
        plp_lower: f.p.conjugate(&f.l).is_lower_triangular(),
        quq_upper: qt.conjugate(&f.u).is_upper_triangular(),
        d_nonzero: f.d.iter().all(|x| !x.is_zero()),
        rank_matches: bareiss_rank(a) == r,
        identity_blocks,
        substitution_stable,
    })
}

/// Copy of `x` whose trailing block from `r` on is a random triangular
/// matrix with nonzero diagonal.
fn with_random_tail<R: Domain, G: Rng>(x: &Matrix<R>, r: usize, lower: bool, rng: &mut G) -> Matrix<R> {
    let small = |rng: &mut G, nonzero: bool| loop {
        let v: i64 = rng.gen_range(-5..=5);
        if !nonzero || v != 0 {
            return (0..v.unsigned_abs()).fold(R::zero(), |acc, _| {
                if v > 0 {
                    acc.add(&R::one())
                } else {
                    acc.sub(&R::one())
                }
            });
        }
    };
    let mut out = x.clone();
    let k = x.rows();
    for i in r..k {
        for j in r..k {
            let keep = if lower { j <= i } else { j >= i };
            if keep {
                let v = small(rng, i == j);
                out.set(i, j, v);
            }
        }
    }
    out
}

/// [`check_etd`] with a fixed seed and two substitutions, collapsed to a
/// single verdict.
pub fn verify_etd<R: Domain>(a: &Matrix<R>, f: &EtdFactors<R>) -> Result<bool> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    Ok(check_etd(a, f, &mut rng, 2)?.all())
}

/// `A = (P L P^T)(P D Q)(Q^T U Q)`: a lower triangular matrix, a scaled
/// partial permutation, an upper triangular matrix.
pub fn etd_to_ldu_grouping<R: Domain>(f: &EtdFactors<R>) -> (Matrix<R>, Matrix<F<R>>, Matrix<R>) {
    let lower = f.p.conjugate(&f.l);
    let middle = f.q.permute_cols(&f.p.permute_rows(&f.d_matrix()));
    let upper = f.q.inverse().conjugate(&f.u);
    (lower, middle, upper)
}
