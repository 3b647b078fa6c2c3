//! Fraction-free matrix decompositions over commutative domains.
//!
//! * [`ldu`]: recursive block LDU of matrices with generic rank profile,
//!   with every factor and auxiliary inverse kept in the domain.
//! * [`bruhat`]: Bruhat decompositions `A = V w U`.
//! * [`etd`]: exact triangular decompositions `A = P L D U Q` of arbitrary
//!   rectangular matrices.
//! * [`minors`]: brute-force minors and determinant identities, used as the
//!   oracle for everything above.
//! * [`complexity`]: multiplication counts of the LDU recursion.
//!
//! ```
//! use bruhat_core::*;
//!
//! # fn main() -> Result<()> {
//! let a = Matrix::from_rows(vec![
//!     vec![int(1), int(-4), int(0), int(1)],
//!     vec![int(4), int(5), int(5), int(3)],
//!     vec![int(1), int(2), int(2), int(2)],
//!     vec![int(3), int(0), int(0), int(1)],
//! ])?;
//! let mut ops = OpCounter::new();
//! let f = etd(&a, &mut ops)?;
//! assert!(verify_etd(&a, &f)?);
//! let b = bruhat_general(&a, &mut ops)?;
//! assert_eq!(b.reconstruct()?, a.to_fractions());
//! # Ok(())
//! # }
//! ```

pub mod bruhat;
pub mod complexity;
pub mod domain;
pub mod error;
pub mod etd;
pub mod ldu;
pub mod matrix;
pub mod minors;
pub mod par;

pub use bruhat::{bruhat_flip, bruhat_general, verify_bruhat, BruhatFactors, ScaledPerm};
pub use complexity::{measure_ldu, recurrence_t, CountReport};
pub use domain::{exact_div, frac, frac_normalize, int, mul, Domain, Fraction, Integer, OpCounter, Ring};
pub use error::{Error, Result};
pub use etd::{etd, etd_to_ldu_grouping, verify_etd, EtdFactors};
pub use ldu::{ldu_full, ldu_rec, reconstruct_ldu, LduFactors};
pub use matrix::{apply_perm, bareiss_det, bareiss_rank, join, mat_mul, split, Matrix, Permutation, Side};
pub use minors::{
    alpha_minor, check_base_minor_identity, check_sylvester, minors_matrix, MinorSpec, MinorsMatrix,
};
