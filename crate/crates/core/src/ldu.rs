//! Recursive block LDU decomposition over a commutative domain.
//!
//! Input is a matrix of minors `A^k_n` (rows/columns `k..n` of the minors
//! `alpha^{k+1}_{i,j}`) together with `alpha^k`; for a plain matrix `A` this
//! is `A^0_n = A` with `alpha^0 = 1`. The output satisfies
//!
//! ```text
//! A^k_n = L D U,   D = alpha^k diag(alpha^k alpha^{k+1}, ..., alpha^{n-1} alpha^n)^{-1}
//! M = alpha^k (L D)^{-1},   W = alpha^k (D U)^{-1}
//! ```
//!
//! with `L`, `U`, `M`, `W` all over the domain. `D` is never stored; it is
//! implied by `alpha^k` and the minor sequence.
//!
//! The recursion splits `A^k_n = [[A^k_s, B], [C, D]]`, decomposes the
//! leading block, forms `U~ = M^k_s B / alpha^k`, `L~ = C W^k_s / alpha^k`
//! and the trailing minors matrix `A^s_n = alpha^s (D - L~ D^k_s U~) / alpha^k`,
//! then decomposes that. Each internal node does exactly seven block
//! products and two recursive calls.

use crate::domain::{exact_div, mul, Domain, Fraction, OpCounter, Ring};
use crate::error::{Error, Result};
use crate::matrix::{mat_mul, split_unchecked, Matrix};

/// Result of [`ldu_rec`] / [`ldu_full`].
#[derive(Clone, Debug, PartialEq)]
pub struct LduFactors<R> {
    pub l: Matrix<R>,
    pub u: Matrix<R>,
    /// `alpha^{k+1} .. alpha^n`.
    pub alphas: Vec<R>,
    pub m: Matrix<R>,
    pub w: Matrix<R>,
    /// Base order: the input was `A^k_n`.
    pub k: usize,
    pub alpha_k: R,
}

impl<R: Domain> LduFactors<R> {
    /// The extent `n` of `A^k_n`.
    pub fn n(&self) -> usize {
        self.k + self.alphas.len()
    }

    /// Diagonal of `D^k_n`: `alpha^k / (alpha^{t-1} alpha^t)`.
    pub fn d_entries(&self) -> Vec<Fraction<R>> {
        diag_entries(&self.alpha_k, &self.alpha_k, &self.alphas)
    }

    pub fn d_matrix(&self) -> Matrix<Fraction<R>> {
        Matrix::diagonal(&self.d_entries())
    }
}

/// `numer / (alpha^{t-1} alpha^t)` for consecutive minors, starting from
/// `alpha_k`.
fn diag_entries<R: Domain>(numer: &R, alpha_k: &R, alphas: &[R]) -> Vec<Fraction<R>> {
    let mut prev = alpha_k.clone();
    alphas
        .iter()
        .map(|a| {
            let e = Fraction::new(numer.clone(), prev.mul(a)).expect("nonzero minors");
            prev = a.clone();
            e
        })
        .collect()
}

/// The seven block products of an internal node, tagged by role.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductSite {
    /// `M^k_s B` in `U~`.
    UpperBorder,
    /// `C W^k_s` in `L~`.
    LowerBorder,
    /// `(L~ D^k_s) U~` in the trailing minors matrix.
    Trailing,
    /// `M^s_n L~` in the lower-left block of `M`.
    MLowerFirst,
    /// `(M^s_n L~ D^k_s) M^k_s`.
    MLowerSecond,
    /// `(W^k_s D^k_s) U~` in the upper-right block of `W`.
    WUpperFirst,
    /// `(W^k_s D^k_s U~) W^s_n`.
    WUpperSecond,
}

impl ProductSite {
    pub const ALL: [ProductSite; 7] = [
        ProductSite::UpperBorder,
        ProductSite::LowerBorder,
        ProductSite::Trailing,
        ProductSite::MLowerFirst,
        ProductSite::MLowerSecond,
        ProductSite::WUpperFirst,
        ProductSite::WUpperSecond,
    ];
}

/// What one call of the recursion did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub depth: usize,
    pub size: usize,
    pub leaf: bool,
    pub products: Vec<ProductSite>,
    pub recursive_calls: usize,
    /// Multiplications plus exact divisions, filled in for leaves only.
    pub base_case_ops: u64,
}

/// Leading-block size for a block of size `m > 2`; must be in `1..m`.
pub type SplitRule = fn(usize) -> usize;

/// `ceil(m / 2)`.
pub fn midpoint_split(m: usize) -> usize {
    m.div_ceil(2)
}

struct Ctx<'a> {
    counter: &'a mut OpCounter,
    trace: Option<&'a mut Vec<NodeRecord>>,
    split: SplitRule,
}

impl Ctx<'_> {
    fn push(&mut self, rec: NodeRecord) -> usize {
        match self.trace.as_deref_mut() {
            Some(t) => {
                t.push(rec);
                t.len() - 1
            }
            None => usize::MAX,
        }
    }

    fn with_node(&mut self, idx: usize, f: impl FnOnce(&mut NodeRecord)) {
        if let Some(t) = self.trace.as_deref_mut() {
            f(&mut t[idx]);
        }
    }

    fn product<T: Ring>(
        &mut self,
        node: usize,
        site: ProductSite,
        a: &Matrix<T>,
        b: &Matrix<T>,
    ) -> Result<Matrix<T>> {
        let p = mat_mul(a, b, self.counter)?;
        self.with_node(node, |n| n.products.push(site));
        Ok(p)
    }
}

/// Decomposes `A^k_n` given `alpha^k`. `k` is only used to report which
/// minor vanished.
pub fn ldu_rec<R: Domain>(
    a: &Matrix<R>,
    k: usize,
    alpha_k: &R,
    counter: &mut OpCounter,
) -> Result<LduFactors<R>> {
    ldu_rec_with(a, k, alpha_k, midpoint_split, counter, None)
}

/// [`ldu_rec`] with an explicit split rule and an optional per-node trace.
pub fn ldu_rec_with<R: Domain>(
    a: &Matrix<R>,
    k: usize,
    alpha_k: &R,
    split: SplitRule,
    counter: &mut OpCounter,
    trace: Option<&mut Vec<NodeRecord>>,
) -> Result<LduFactors<R>> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "LDU needs a nonempty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if alpha_k.is_zero() {
        return Err(if k == 0 {
            Error::DivisionByZero
        } else {
            Error::ZeroPivotMinor(k)
        });
    }
    let mut ctx = Ctx {
        counter,
        trace,
        split,
    };
    node(&mut ctx, a, k, alpha_k, 0)
}

/// LDU of a square matrix with all leading minors nonzero:
/// `A = L diag((alpha^{i-1} alpha^i)^{-1}) U`.
pub fn ldu_full<R: Domain>(a: &Matrix<R>, counter: &mut OpCounter) -> Result<LduFactors<R>> {
    ldu_rec(a, 0, &R::one(), counter)
}

/// `L D U` over the field of fractions.
pub fn reconstruct_ldu<R: Domain>(f: &LduFactors<R>) -> Matrix<Fraction<R>> {
    f.l.to_fractions()
        .scale_columns(&f.d_entries())
        .matmul(&f.u.to_fractions())
        .expect("factor shapes agree")
}

/// `M (L D) = alpha^k I` and `(D U) W = alpha^k I`, exactly.
pub fn check_inverse_factors<R: Domain>(f: &LduFactors<R>) -> bool {
    let d = f.d_entries();
    let scaled_id =
        Matrix::<Fraction<R>>::identity(f.alphas.len()).scale(&Fraction::from_domain(f.alpha_k.clone()));
    let ld = f.l.to_fractions().scale_columns(&d);
    let du = f.u.to_fractions().scale_rows(&d);
    let left = f.m.to_fractions().matmul(&ld);
    let right = du.matmul(&f.w.to_fractions());
    matches!((left, right), (Ok(l), Ok(r)) if l == scaled_id && r == scaled_id)
}

fn project<R: Domain>(m: &Matrix<Fraction<R>>) -> Result<Matrix<R>> {
    m.to_domain().map_err(|e| match e {
        Error::NotInDomain(what) => Error::InexactDivision {
            dividend: what,
            divisor: "denominator".into(),
        },
        other => other,
    })
}

fn node<R: Domain>(
    ctx: &mut Ctx<'_>,
    a: &Matrix<R>,
    k: usize,
    alpha_k: &R,
    depth: usize,
) -> Result<LduFactors<R>> {
    let size = a.rows();
    let idx = ctx.push(NodeRecord {
        depth,
        size,
        leaf: size <= 2,
        products: Vec::new(),
        recursive_calls: 0,
        base_case_ops: 0,
    });
    if size <= 2 {
        let before = ctx.counter.multiplicative_ops();
        let f = if size == 1 {
            leaf_1x1(a, k, alpha_k)
        } else {
            leaf_2x2(ctx.counter, a, k, alpha_k)
        }?;
        let ops = ctx.counter.multiplicative_ops() - before;
        ctx.with_node(idx, |n| n.base_case_ops = ops);
        return Ok(f);
    }

    let h = (ctx.split)(size);
    if h == 0 || h >= size {
        return Err(Error::StructureViolation(format!(
            "split {h} of a block of size {size}"
        )));
    }
    let w = size - h;
    let (a11, b, c, d) = split_unchecked(a, h, h);

    let first = node(ctx, &a11, k, alpha_k, depth + 1)?;
    ctx.with_node(idx, |n| n.recursive_calls += 1);
    let alpha_s = first.alphas.last().expect("nonempty").clone();

    let mb = ctx.product(idx, ProductSite::UpperBorder, &first.m, &b)?;
    let u_tilde = div_all(ctx.counter, &mb, alpha_k)?;
    let cw = ctx.product(idx, ProductSite::LowerBorder, &c, &first.w)?;
    let l_tilde = div_all(ctx.counter, &cw, alpha_k)?;

    // alpha^s / alpha^k * D^k_s, entry t: alpha^s / (alpha^{t-1} alpha^t).
    let trailing_scale = diag_entries(&alpha_s, alpha_k, &first.alphas);
    ctx.counter.mul_count += (w * h) as u64;
    let l_scaled = l_tilde.to_fractions().scale_columns(&trailing_scale);
    let correction = ctx.product(idx, ProductSite::Trailing, &l_scaled, &u_tilde.to_fractions())?;
    let trailing = Matrix::from_fn(w, w, |i, j| {
        Fraction::new(alpha_s.mul(d.get(i, j)), alpha_k.clone())
            .expect("alpha^k is nonzero")
            .sub(correction.get(i, j))
    });
    ctx.counter.mul_count += (w * w) as u64;
    ctx.counter.div_count += (w * w) as u64;
    let trailing = project(&trailing)?;

    let second = node(ctx, &trailing, k + h, &alpha_s, depth + 1)?;
    ctx.with_node(idx, |n| n.recursive_calls += 1);

    let d_first = first.d_entries();
    let neg_inv_alpha_k = Fraction::new(R::one().neg(), alpha_k.clone()).expect("nonzero");

    // Lower-left block of M: -M^s_n L~ D^k_s M^k_s / alpha^k.
    let ml = ctx.product(idx, ProductSite::MLowerFirst, &second.m, &l_tilde)?;
    let ml = ml.to_fractions().scale_columns(&d_first);
    let ml = ctx.product(idx, ProductSite::MLowerSecond, &ml, &first.m.to_fractions())?;
    let m_lower = project(&ml.scale(&neg_inv_alpha_k))?;

    // Upper-right block of W: -W^k_s D^k_s U~ W^s_n / alpha^k.
    let wd = first.w.to_fractions().scale_columns(&d_first);
    let wu = ctx.product(idx, ProductSite::WUpperFirst, &wd, &u_tilde.to_fractions())?;
    let wu = ctx.product(idx, ProductSite::WUpperSecond, &wu, &second.w.to_fractions())?;
    let w_upper = project(&wu.scale(&neg_inv_alpha_k))?;
    ctx.counter.mul_count += (3 * h * w + h * h) as u64;

    let zero_hw = Matrix::zeros(h, w);
    let zero_wh = Matrix::zeros(w, h);
    let l = Matrix::from_blocks(&[vec![&first.l, &zero_hw], vec![&l_tilde, &second.l]])?;
    let u = Matrix::from_blocks(&[vec![&first.u, &u_tilde], vec![&zero_wh, &second.u]])?;
    let m = Matrix::from_blocks(&[vec![&first.m, &zero_hw], vec![&m_lower, &second.m]])?;
    let w_mat = Matrix::from_blocks(&[vec![&first.w, &w_upper], vec![&zero_wh, &second.w]])?;
    let mut alphas = first.alphas;
    alphas.extend(second.alphas);
    Ok(LduFactors {
        l,
        u,
        alphas,
        m,
        w: w_mat,
        k,
        alpha_k: alpha_k.clone(),
    })
}

fn div_all<R: Domain>(counter: &mut OpCounter, m: &Matrix<R>, by: &R) -> Result<Matrix<R>> {
    let data = m
        .entries()
        .iter()
        .map(|x| exact_div(x, by, counter))
        .collect::<Result<Vec<_>>>()?;
    Matrix::new(m.rows(), m.cols(), data)
}

fn leaf_1x1<R: Domain>(a: &Matrix<R>, k: usize, alpha_k: &R) -> Result<LduFactors<R>> {
    let x = a[(0, 0)].clone();
    if x.is_zero() {
        return Err(Error::ZeroPivotMinor(k + 1));
    }
    let one = |v: &R| Matrix::new(1, 1, vec![v.clone()]).expect("1x1");
    Ok(LduFactors {
        l: one(&x),
        u: one(&x),
        alphas: vec![x],
        m: one(alpha_k),
        w: one(alpha_k),
        k,
        alpha_k: alpha_k.clone(),
    })
}

/// The 2x2 step is the block step with 1x1 blocks, where `M^k_{k+1} =
/// W^k_{k+1} = alpha^k`: seven multiplicative operations in total.
fn leaf_2x2<R: Domain>(
    counter: &mut OpCounter,
    a: &Matrix<R>,
    k: usize,
    alpha_k: &R,
) -> Result<LduFactors<R>> {
    let (p, beta, gamma, delta) = (&a[(0, 0)], &a[(0, 1)], &a[(1, 0)], &a[(1, 1)]);
    if p.is_zero() {
        return Err(Error::ZeroPivotMinor(k + 1));
    }
    let u_tilde = exact_div(&mul(alpha_k, beta, counter), alpha_k, counter)?;
    let l_tilde = exact_div(&mul(gamma, alpha_k, counter), alpha_k, counter)?;
    let det = mul(p, delta, counter).sub(&mul(&l_tilde, &u_tilde, counter));
    let next = exact_div(&det, alpha_k, counter)?;
    if next.is_zero() {
        return Err(Error::ZeroPivotMinor(k + 2));
    }
    let z = R::zero();
    let m2 = |rows: [[R; 2]; 2]| Matrix::from_rows(rows.map(Vec::from).to_vec()).expect("2x2");
    Ok(LduFactors {
        l: m2([[p.clone(), z.clone()], [l_tilde.clone(), next.clone()]]),
        u: m2([[p.clone(), u_tilde.clone()], [z.clone(), next.clone()]]),
        m: m2([[alpha_k.clone(), z.clone()], [l_tilde.neg(), p.clone()]]),
        w: m2([[alpha_k.clone(), u_tilde.neg()], [z, p.clone()]]),
        alphas: vec![p.clone(), next],
        k,
        alpha_k: alpha_k.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{frac, int, Integer};
    use crate::minors::{alpha_minor, delta_minor, leading_minor, minors_matrix, MinorSpec};
    use rand::{Rng, SeedableRng};

    fn imat(rows: &[&[i64]]) -> Matrix<Integer> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    fn generic(rng: &mut impl Rng, n: usize) -> Matrix<Integer> {
        loop {
            let a = Matrix::from_fn(n, n, |_, _| int(rng.gen_range(-9..=9)));
            if (1..=n).all(|k| !leading_minor(&a, k).unwrap().is_zero()) {
                return a;
            }
        }
    }

    #[test]
    fn two_by_two_example() {
        let mut c = OpCounter::new();
        let f = ldu_rec(&imat(&[&[2, 1], &[4, 3]]), 0, &int(1), &mut c).unwrap();
        assert_eq!(f.l, imat(&[&[2, 0], &[4, 2]]));
        assert_eq!(f.alphas, vec![int(2), int(2)]);
        assert_eq!(f.u, imat(&[&[2, 1], &[0, 2]]));
        assert_eq!(f.m, imat(&[&[1, 0], &[-4, 2]]));
        assert_eq!(f.w, imat(&[&[1, -1], &[0, 2]]));
        assert!(check_inverse_factors(&f));
        assert_eq!(c.multiplicative_ops(), 7);
    }

    #[test]
    fn one_by_one_example() {
        let mut c = OpCounter::new();
        let f = ldu_rec(&imat(&[&[6]]), 3, &int(4), &mut c).unwrap();
        assert_eq!((f.l[(0, 0)].clone(), f.u[(0, 0)].clone()), (int(6), int(6)));
        assert_eq!(f.alphas, vec![int(6)]);
        assert_eq!((f.m[(0, 0)].clone(), f.w[(0, 0)].clone()), (int(4), int(4)));
        assert_eq!(f.n(), 4);
        assert!(check_inverse_factors(&f));
    }

    #[test]
    fn vanishing_third_minor() {
        let a = imat(&[&[3, 0, 0, 1], &[1, 2, 2, 2], &[4, 5, 5, 3], &[1, -4, 0, 1]]);
        let mut c = OpCounter::new();
        assert_eq!(ldu_full(&a, &mut c), Err(Error::ZeroPivotMinor(3)));
        assert_eq!(
            ldu_full(&imat(&[&[0, 1], &[1, 0]]), &mut c),
            Err(Error::ZeroPivotMinor(1))
        );
        assert_eq!(
            ldu_full(&imat(&[&[1, 2], &[2, 4]]), &mut c),
            Err(Error::ZeroPivotMinor(2))
        );
        assert!(matches!(
            ldu_full(&imat(&[&[1, 2]]), &mut c),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn full_examples() {
        let mut c = OpCounter::new();
        let a = imat(&[&[2, 1], &[4, 3]]);
        let f = ldu_full(&a, &mut c).unwrap();
        assert_eq!(f.d_entries(), vec![frac(1, 2), frac(1, 4)]);
        assert_eq!(reconstruct_ldu(&f), a.to_fractions());

        let id = Matrix::<Integer>::identity(5);
        let f = ldu_full(&id, &mut c).unwrap();
        assert_eq!((f.l.clone(), f.u.clone()), (id.clone(), id.clone()));
        assert!(f.alphas.iter().all(|x| *x == int(1)));
        assert_eq!(f.d_matrix(), Matrix::identity(5));

        let b = imat(&[&[2, 3], &[0, 1]]);
        let f = ldu_full(&b, &mut c).unwrap();
        assert_eq!(f.l, imat(&[&[2, 0], &[0, 2]]));
        assert_eq!(f.u, imat(&[&[2, 3], &[0, 2]]));
        assert_eq!(f.d_entries(), vec![frac(1, 2), frac(1, 4)]);
        assert_eq!(reconstruct_ldu(&f), b.to_fractions());
    }

    #[test]
    fn tampered_alpha_breaks_reconstruction() {
        let a = imat(&[&[2, 1], &[4, 3]]);
        let mut f = ldu_full(&a, &mut OpCounter::new()).unwrap();
        f.alphas[1] = int(3);
        assert_ne!(reconstruct_ldu(&f), a.to_fractions());
    }

    #[test]
    fn factors_match_minors_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for case in 0..40 {
            let n = 2 + case % 7;
            let a = generic(&mut rng, n);
            let f = ldu_full(&a, &mut OpCounter::new()).unwrap();
            assert_eq!(reconstruct_ldu(&f), a.to_fractions());
            assert!(f.l.is_lower_triangular() && f.u.is_upper_triangular());
            for i in 0..n {
                assert_eq!(f.alphas[i], leading_minor(&a, i + 1).unwrap());
                for j in 0..=i {
                    assert_eq!(f.l[(i, j)], alpha_minor(&a, MinorSpec::new(j + 1, i, j)).unwrap());
                    assert_eq!(f.u[(j, i)], alpha_minor(&a, MinorSpec::new(j + 1, j, i)).unwrap());
                }
            }
            assert!(check_inverse_factors(&f));
        }
    }

    #[test]
    fn minors_matrix_input_with_base() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let a = generic(&mut rng, 6);
            let k = rng.gen_range(1..5);
            let mm = minors_matrix(&a, k, 6).unwrap();
            let ak = leading_minor(&a, k).unwrap();
            let f = ldu_rec(&mm.values, k, &ak, &mut OpCounter::new()).unwrap();
            assert_eq!(reconstruct_ldu(&f), mm.values.to_fractions());
            assert!(check_inverse_factors(&f));
            for (t, alpha) in f.alphas.iter().enumerate() {
                assert_eq!(*alpha, leading_minor(&a, k + t + 1).unwrap());
            }
        }
    }

    #[test]
    fn split_point_does_not_change_factors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let rules: [SplitRule; 3] = [midpoint_split, |_| 1, |m| m - 1];
        for n in 3..=8 {
            let a = generic(&mut rng, n);
            let reference = ldu_full(&a, &mut OpCounter::new()).unwrap();
            for rule in rules {
                let f = ldu_rec_with(&a, 0, &int(1), rule, &mut OpCounter::new(), None).unwrap();
                assert_eq!(f, reference);
            }
        }
    }

    #[test]
    fn bad_split_rule_is_reported() {
        let a = Matrix::<Integer>::identity(4);
        let r = ldu_rec_with(&a, 0, &int(1), |m| m, &mut OpCounter::new(), None);
        assert!(matches!(r, Err(Error::StructureViolation(_))));
    }

    #[test]
    fn border_blocks_are_blocks_of_the_full_factors() {
        // U~ = U^{k; k+1..s}_{n; s+1..n}: alpha^s U~ = U^k_s G with G the
        // delta minors, and L~ is the matching block of L.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(24);
        for n in [4, 5, 6] {
            let a = generic(&mut rng, n);
            let f = ldu_full(&a, &mut OpCounter::new()).unwrap();
            let s = midpoint_split(n);
            let alpha_s = leading_minor(&a, s).unwrap();
            let u_block = f.u.submatrix(0..s, s..n);
            let g = Matrix::from_fn(s, n - s, |p, j| delta_minor(&a, s, p, s + j).unwrap());
            let u_s = f.u.submatrix(0..s, 0..s);
            assert_eq!(u_block.scale(&alpha_s), u_s.matmul(&g).unwrap());
            // alpha^s B = A_s G as well.
            let a_s = a.submatrix(0..s, 0..s);
            assert_eq!(a.submatrix(0..s, s..n).scale(&alpha_s), a_s.matmul(&g).unwrap());
        }
    }

    #[test]
    fn trace_has_seven_products_per_internal_node() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(25);
        let a = generic(&mut rng, 8);
        let mut trace = Vec::new();
        let mut c = OpCounter::new();
        ldu_rec_with(&a, 0, &int(1), midpoint_split, &mut c, Some(&mut trace)).unwrap();
        let internal: Vec<_> = trace.iter().filter(|n| !n.leaf).collect();
        assert_eq!(internal.len(), 3);
        for n in internal {
            assert_eq!(n.products, ProductSite::ALL.to_vec());
            assert_eq!(n.recursive_calls, 2);
        }
        assert_eq!(c.block_product_count, 21);
        assert!(trace.iter().filter(|n| n.leaf).all(|n| n.base_case_ops == 7));
    }
}
