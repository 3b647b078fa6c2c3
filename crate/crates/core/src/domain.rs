//! Commutative domains, their fraction fields, and operation counting.
//!
//! The algorithms are written against [`Domain`]; the shipped instantiation
//! is [`Integer`] (arbitrary-precision `BigInt`). [`Fraction`] builds the
//! field of fractions of any domain and is itself a [`Ring`], so the matrix
//! layer works uniformly over both.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision integer, the shipped domain.
pub type Integer = BigInt;

/// A commutative ring with identity. Arithmetic is exact.
pub trait Ring: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// A commutative ring without zero divisors.
pub trait Domain: Ring {
    /// The unique `q` with `self = q * divisor`, or `None` when `divisor`
    /// does not divide `self`. `divisor` must be nonzero.
    fn exact_quotient(&self, divisor: &Self) -> Option<Self>;

    /// A greatest common divisor, when the domain supplies one. Without it
    /// fractions stay unreduced.
    fn gcd(&self, _other: &Self) -> Option<Self> {
        None
    }

    /// Rewrites `num/den` with a canonical associate of `den` (for the
    /// integers: a positive denominator).
    fn normalize_unit(num: Self, den: Self) -> (Self, Self) {
        (num, den)
    }
}

impl Ring for Integer {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn is_one(&self) -> bool {
        One::is_one(self)
    }
}

impl Domain for Integer {
    fn exact_quotient(&self, divisor: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(divisor);
        Zero::is_zero(&r).then_some(q)
    }

    fn gcd(&self, other: &Self) -> Option<Self> {
        Some(num_integer::Integer::gcd(self, other))
    }

    fn normalize_unit(num: Self, den: Self) -> (Self, Self) {
        if den.is_negative() {
            (-num, -den)
        } else {
            (num, den)
        }
    }
}

/// Multiplicative work done by one decomposition call.
///
/// `mul_count` and `div_count` see every ring multiplication and exact
/// division. `block_product_count` and `block_product_muls` only see full
/// matrix-by-matrix products, which is what the complexity recurrence
/// measures; scalar scalings and diagonal applications are left out there.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub mul_count: u64,
    pub div_count: u64,
    pub block_product_count: u64,
    pub block_product_muls: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Multiplications plus exact divisions.
    pub fn multiplicative_ops(&self) -> u64 {
        self.mul_count + self.div_count
    }

    /// Adds the counts of `other`, e.g. from a branch run on another thread.
    pub fn merge(&mut self, other: &OpCounter) {
        self.mul_count += other.mul_count;
        self.div_count += other.div_count;
        self.block_product_count += other.block_product_count;
        self.block_product_muls += other.block_product_muls;
    }

    pub(crate) fn record_block_product(&mut self, muls: u64) {
        self.block_product_count += 1;
        self.block_product_muls += muls;
        self.mul_count += muls;
    }
}

pub fn add<R: Ring>(a: &R, b: &R) -> R {
    a.add(b)
}

pub fn mul<R: Ring>(a: &R, b: &R, counter: &mut OpCounter) -> R {
    counter.mul_count += 1;
    a.mul(b)
}

/// Exact division in the domain. Never truncates: a non-dividing `b` is an
/// error.
pub fn exact_div<R: Domain>(a: &R, b: &R, counter: &mut OpCounter) -> Result<R> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    counter.div_count += 1;
    a.exact_quotient(b).ok_or_else(|| Error::InexactDivision {
        dividend: a.to_string(),
        divisor: b.to_string(),
    })
}

/// Builds the canonical fraction `num/den`.
pub fn frac_normalize<R: Domain>(num: R, den: R) -> Result<Fraction<R>> {
    Fraction::new(num, den)
}

/// An element `num/den` of the field of fractions of `R`.
///
/// Over domains with a gcd the pair is kept reduced with a canonical
/// denominator; otherwise it is stored as given. Equality always compares
/// by cross-multiplication.
#[derive(Clone, Debug)]
pub struct Fraction<R> {
    num: R,
    den: R,
}

impl<R: Domain> Fraction<R> {
    pub fn new(num: R, den: R) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: R, den: R) -> Self {
        if num.is_zero() {
            return Self { num, den: R::one() };
        }
        let (num, den) = match num.gcd(&den) {
            Some(g) if !g.is_zero() && !g.is_one() => (
                num.exact_quotient(&g).expect("gcd divides numerator"),
                den.exact_quotient(&g).expect("gcd divides denominator"),
            ),
            _ => (num, den),
        };
        let (num, den) = R::normalize_unit(num, den);
        Self { num, den }
    }

    pub fn from_domain(value: R) -> Self {
        Self {
            num: value,
            den: R::one(),
        }
    }

    pub fn numer(&self) -> &R {
        &self.num
    }

    pub fn denom(&self) -> &R {
        &self.den
    }

    /// `1 / self`.
    pub fn inv(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduced(self.num.mul(&rhs.den), self.den.mul(&rhs.num)))
    }

    /// The domain element equal to `self`, if there is one.
    pub fn to_domain(&self) -> Option<R> {
        self.num.exact_quotient(&self.den)
    }
}

impl<R: Domain> From<R> for Fraction<R> {
    fn from(value: R) -> Self {
        Self::from_domain(value)
    }
}

impl<R: Domain> PartialEq for Fraction<R> {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl<R: Domain> fmt::Display for Fraction<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl<R: Domain> Ring for Fraction<R> {
    fn zero() -> Self {
        Self::from_domain(R::zero())
    }
    fn one() -> Self {
        Self::from_domain(R::one())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, rhs: &Self) -> Self {
        if self.den == rhs.den {
            return Self::reduced(self.num.add(&rhs.num), self.den.clone());
        }
        Self::reduced(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }
    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }
    fn neg(&self) -> Self {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        Self::reduced(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

/// Integer shorthand used throughout tests and examples.
pub fn int(value: i64) -> Integer {
    Integer::from(value)
}

/// Integer fraction shorthand. Panics on a zero denominator.
pub fn frac(num: i64, den: i64) -> Fraction<Integer> {
    Fraction::new(int(num), int(den)).expect("nonzero denominator")
}
