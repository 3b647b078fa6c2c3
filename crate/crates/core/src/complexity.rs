//! Multiplication counts of the recursive LDU.
//!
//! Counted: ring multiplications inside the block products of internal
//! nodes, plus multiplications and exact divisions of the 1x1/2x2 leaves.
//! Scalings by `alpha^k`, `alpha^s` and diagonal applications are left out.
//! Under that contract a generic `n x n` matrix with `n = 2^k` costs exactly
//! `t(n) = 2 t(n/2) + 7 (n/2)^3`, `t(2) = 7`.

use crate::domain::{Domain, OpCounter};
use crate::error::{Error, Result};
use crate::ldu::{ldu_rec_with, midpoint_split, NodeRecord, ProductSite};
use crate::matrix::Matrix;

/// Measured counts for one run of [`measure_ldu`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub n: usize,
    pub block_products: u64,
    pub ring_muls_in_blocks: u64,
    pub base_case_muls: u64,
    /// `recurrence_t(n)`, or `None` when `n` is not a power of two.
    pub expected_t: Option<u64>,
    pub internal_nodes: usize,
    pub leaves: usize,
}

impl CountReport {
    pub fn measured_total(&self) -> u64 {
        self.ring_muls_in_blocks + self.base_case_muls
    }

    pub fn matches_recurrence(&self) -> bool {
        self.expected_t == Some(self.measured_total())
    }
}

fn power_of_two_exponent(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidSize(n));
    }
    Ok(n.trailing_zeros())
}

/// `t(2) = 7`, `t(n) = 2 t(n/2) + 7 (n/2)^3`.
pub fn recurrence_t(n: usize) -> Result<u64> {
    power_of_two_exponent(n)?;
    let mut t = 7u64;
    let mut m = 2u64;
    while m < n as u64 {
        t = 2 * t + 7 * m * m * m;
        m *= 2;
    }
    Ok(t)
}

/// The summed closed form `7 gamma (n^beta - n 2^{beta-1}) / (2^beta - 2) +
/// 2^{k-2} 7` with `gamma = 1`, `beta = 3`. It disagrees with
/// [`recurrence_t`] (63 against 70 at `n = 4`), so it is informational only.
pub fn closed_form(n: usize) -> Result<f64> {
    let k = power_of_two_exponent(n)?;
    let (nf, beta) = (n as f64, 3.0f64);
    let main = 7.0 * (nf.powf(beta) - nf * 2f64.powf(beta - 1.0)) / (2f64.powf(beta) - 2.0);
    Ok(main + 2f64.powi(k as i32 - 2) * 7.0)
}

/// Runs the LDU with a fresh counter and checks the node structure: every
/// internal node must do the seven tagged products and two recursive calls.
pub fn measure_ldu<R: Domain>(a: &Matrix<R>) -> Result<CountReport> {
    let (report, _) = measure_ldu_traced(a)?;
    Ok(report)
}

/// [`measure_ldu`] together with the per-node trace.
pub fn measure_ldu_traced<R: Domain>(a: &Matrix<R>) -> Result<(CountReport, Vec<NodeRecord>)> {
    let mut counter = OpCounter::new();
    let mut trace = Vec::new();
    ldu_rec_with(a, 0, &R::one(), midpoint_split, &mut counter, Some(&mut trace))?;
    for node in trace.iter().filter(|n| !n.leaf) {
        if node.products != ProductSite::ALL || node.recursive_calls != 2 {
            return Err(Error::StructureViolation(format!(
                "node of size {} at depth {}: {} products, {} calls",
                node.size,
                node.depth,
                node.products.len(),
                node.recursive_calls
            )));
        }
    }
    let report = CountReport {
        n: a.rows(),
        block_products: counter.block_product_count,
        ring_muls_in_blocks: counter.block_product_muls,
        base_case_muls: trace.iter().filter(|n| n.leaf).map(|n| n.base_case_ops).sum(),
        expected_t: recurrence_t(a.rows()).ok(),
        internal_nodes: trace.iter().filter(|n| !n.leaf).count(),
        leaves: trace.iter().filter(|n| n.leaf).count(),
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{int, Integer, Ring};
    use crate::minors::leading_minor;
    use rand::{Rng, SeedableRng};

    fn generic(rng: &mut impl Rng, n: usize) -> Matrix<Integer> {
        loop {
            let a = Matrix::from_fn(n, n, |_, _| int(rng.gen_range(-9..=9)));
            if (1..=n).all(|k| !leading_minor(&a, k).unwrap().is_zero()) {
                return a;
            }
        }
    }

    #[test]
    fn recurrence_values() {
        assert_eq!(recurrence_t(2), Ok(7));
        assert_eq!(recurrence_t(4), Ok(70));
        assert_eq!(recurrence_t(8), Ok(588));
        assert_eq!(recurrence_t(16), Ok(4760));
        assert_eq!(recurrence_t(3), Err(Error::InvalidSize(3)));
        assert_eq!(recurrence_t(1), Err(Error::InvalidSize(1)));
        assert_eq!(recurrence_t(0), Err(Error::InvalidSize(0)));
    }

    #[test]
    fn closed_form_differs_from_recurrence() {
        assert_eq!(closed_form(4).unwrap(), 63.0);
        assert_ne!(closed_form(4).unwrap(), recurrence_t(4).unwrap() as f64);
    }

    #[test]
    fn two_by_two_costs_seven() {
        let r = measure_ldu(&Matrix::from_rows(vec![vec![int(2), int(1)], vec![int(4), int(3)]]).unwrap())
            .unwrap();
        assert_eq!(
            (r.block_products, r.base_case_muls, r.measured_total()),
            (0, 7, 7)
        );
        assert!(r.matches_recurrence());
    }

    #[test]
    fn measured_counts_follow_recurrence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for n in [4, 8, 16] {
            for _ in 0..3 {
                let r = measure_ldu(&generic(&mut rng, n)).unwrap();
                assert_eq!(r.measured_total(), recurrence_t(n).unwrap());
                assert_eq!(r.block_products, 7 * r.internal_nodes as u64);
                assert_eq!(r.leaves, n / 2);
            }
        }
    }

    #[test]
    fn odd_sizes_report_no_expectation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(32);
        let r = measure_ldu(&generic(&mut rng, 5)).unwrap();
        assert_eq!(r.expected_t, None);
        assert!(!r.matches_recurrence());
        assert_eq!(r.internal_nodes, 2);
    }

    #[test]
    fn zero_pivot_propagates() {
        let a = Matrix::from_rows(vec![vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        assert_eq!(measure_ldu(&a), Err(Error::ZeroPivotMinor(1)));
    }
}
