//! Prime-field arithmetic.
//!
//! Elements are always kept as canonical residues in `[0, p)`. The modulus is
//! restricted to 62 bits so a product of two residues fits in a `u128`
//! intermediate before reduction.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::rng::RngStream;

/// 2^31 - 1.
pub const MERSENNE_31: u64 = 2_147_483_647;

const MAX_MODULUS_BITS: u32 = 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds {MAX_MODULUS_BITS} bits")]
    ModulusTooLarge(u64),
    #[error("operands belong to different fields (p = {left} vs p = {right})")]
    FieldMismatch { left: u64, right: u64 },
    #[error("division by zero")]
    DivisionByZero,
}

/// The prime modulus defining `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
}

impl FieldSpec {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >> MAX_MODULUS_BITS != 0 {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p })
    }

    /// The production default, `p = 2^31 - 1`.
    pub fn mersenne31() -> Self {
        Self { p: MERSENNE_31 }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Bits needed to encode one canonical residue, `ceil(log2 p)`.
    pub fn element_bits(&self) -> u32 {
        64 - (self.p - 1).leading_zeros()
    }

    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            p: self.p,
        }
    }

    pub fn from_i64(&self, value: i64) -> FieldElement {
        self.element(self.reduce_i64(value))
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    /// Draws a uniform element by rejection sampling over `[0, 2^bits)`.
    pub fn sample_uniform(&self, rng: &mut RngStream) -> FieldElement {
        let mask = sample_mask(self.p);
        loop {
            if let Some(v) = accept_sample(self.p, rng.next_u64() & mask) {
                return FieldElement { value: v, p: self.p };
            }
        }
    }

    // Raw residue arithmetic used by the matrix kernels. Inputs must already
    // be canonical.

    #[inline]
    pub(crate) fn reduce_i64(&self, value: i64) -> u64 {
        (value as i128).rem_euclid(self.p as i128) as u64
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub(crate) fn pow_raw(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, b);
            }
            b = self.mul_raw(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Inverse via Fermat's little theorem.
    pub(crate) fn inv_raw(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow_raw(a, self.p - 2))
        }
    }
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self::mersenne31()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// Mask covering `[0, p)` with the smallest power-of-two range.
pub(crate) fn sample_mask(p: u64) -> u64 {
    let bits = 64 - (p - 1).leading_zeros();
    if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Acceptance rule of the rejection sampler: a masked draw is kept iff it is
/// already a canonical residue.
#[inline]
pub(crate) fn accept_sample(p: u64, masked: u64) -> Option<u64> {
    (masked < p).then_some(masked)
}

/// A canonical residue tagged with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u64,
    p: u64,
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn field(&self) -> FieldSpec {
        FieldSpec { p: self.p }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &Self) -> Result<FieldSpec, FieldError> {
        if self.p != other.p {
            return Err(FieldError::FieldMismatch {
                left: self.p,
                right: other.p,
            });
        }
        Ok(self.field())
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(&rhs)?;
        Ok(f.element(f.add_raw(self.value, rhs.value)))
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(&rhs)?;
        Ok(f.element(f.sub_raw(self.value, rhs.value)))
    }

    pub fn checked_mul(self, rhs: Self) -> Result<Self, FieldError> {
        let f = self.same_field(&rhs)?;
        Ok(f.element(f.mul_raw(self.value, rhs.value)))
    }

    pub fn inv(self) -> Result<Self, FieldError> {
        let f = self.field();
        f.inv_raw(self.value)
            .map(|v| f.element(v))
            .ok_or(FieldError::DivisionByZero)
    }

    /// `self^exp`, with `0^0 = 1`.
    pub fn pow(self, exp: u64) -> Self {
        let f = self.field();
        f.element(f.pow_raw(self.value, exp))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// The operator impls panic on mixed moduli; use the `checked_*` forms when the
// operands come from untrusted sources.

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field mismatch in addition")
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("field mismatch in subtraction")
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field mismatch in multiplication")
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        let f = self.field();
        f.element(f.neg_raw(self.value))
    }
}

/// Deterministic Miller-Rabin; the witness set is exact for all `n < 3.3e24`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &WITNESSES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn rejects_composites_and_oversized() {
        assert_eq!(FieldSpec::new(1), Err(FieldError::NotPrime(1)));
        assert_eq!(FieldSpec::new(91), Err(FieldError::NotPrime(91)));
        assert_eq!(FieldSpec::new(1 << 62), Err(FieldError::ModulusTooLarge(1 << 62)));
        assert!(FieldSpec::new(2).is_ok());
        // largest prime below 2^62
        assert!(FieldSpec::new((1u64 << 62) - 57).is_ok());
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(MERSENNE_31));
        // Carmichael number
        assert!(!is_prime(561));
    }

    #[test]
    fn add_examples() {
        let f7 = f(7);
        assert_eq!((f7.element(3) + f7.element(5)).value(), 1);
        for x in 0..7 {
            assert_eq!(f7.zero() + f7.element(x), f7.element(x));
        }
        let big = FieldSpec::mersenne31();
        assert_eq!((big.element(MERSENNE_31 - 1) + big.one()).value(), 0);
    }

    #[test]
    fn mul_examples() {
        let f7 = f(7);
        assert_eq!((f7.element(3) * f7.element(5)).value(), 1);
        for x in 0..7 {
            assert_eq!(f7.one() * f7.element(x), f7.element(x));
        }
        let big = FieldSpec::mersenne31();
        let m1 = big.element(MERSENNE_31 - 1);
        assert_eq!((m1 * m1).value(), 1);
    }

    #[test]
    fn inv_examples() {
        assert_eq!(f(7).element(3).inv().unwrap().value(), 5);
        assert_eq!(f(7).element(1).inv().unwrap().value(), 1);
        assert_eq!(f(5).element(4).inv().unwrap().value(), 4);
        assert_eq!(f(7).zero().inv(), Err(FieldError::DivisionByZero));
    }

    #[test]
    fn pow_examples() {
        assert_eq!(f(7).element(3).pow(2).value(), 2);
        assert_eq!(f(5).element(2).pow(4).value(), 1);
        for p in [2, 5, 7, 101] {
            for a in 0..p {
                assert_eq!(f(p).element(a).pow(0).value(), 1);
            }
        }
    }

    #[test]
    fn mismatched_fields_are_rejected() {
        let a = f(5).element(1);
        let b = f(7).element(1);
        let err = FieldError::FieldMismatch { left: 5, right: 7 };
        assert_eq!(a.checked_add(b), Err(err.clone()));
        assert_eq!(a.checked_sub(b), Err(err.clone()));
        assert_eq!(a.checked_mul(b), Err(err));
    }

    #[test]
    fn inverses_exhaustive_small_primes() {
        for p in [2, 3, 5, 7, 11, 31, 101] {
            let fp = f(p);
            for a in 1..p {
                let x = fp.element(a);
                assert_eq!(x * x.inv().unwrap(), fp.one(), "p = {p}, a = {a}");
            }
        }
    }

    #[test]
    fn rejection_region_covers_residues_equally() {
        for p in [2, 3, 5, 7, 31, 101, 257] {
            let mask = sample_mask(p);
            let mut hits = vec![0u32; p as usize];
            for raw in 0..=mask {
                if let Some(v) = accept_sample(p, raw) {
                    hits[v as usize] += 1;
                }
            }
            assert!(hits.iter().all(|&h| h == 1), "p = {p}");
            // the range never wastes more than half the draws
            assert!(mask < 2 * p);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_stream_separated() {
        let fp = f(5);
        let draw = |label: &str| {
            let mut rng = RngStream::derive(7, label, 0);
            (0..64).map(|_| fp.sample_uniform(&mut rng).value()).collect::<Vec<_>>()
        };
        assert_eq!(draw("a"), draw("a"));
        assert_ne!(draw("a"), draw("b"));
    }

    #[test]
    fn sampling_frequencies_within_five_sigma() {
        // Binomial(n, 1/5): sigma = sqrt(n * 0.2 * 0.8)
        let fp = f(5);
        let n = 1_000_000u64;
        let mut rng = RngStream::derive(2024, "histogram", 0);
        let mut counts = [0u64; 5];
        for _ in 0..n {
            counts[fp.sample_uniform(&mut rng).value() as usize] += 1;
        }
        let mean = n as f64 * 0.2;
        let sigma = (n as f64 * 0.2 * 0.8).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 5.0 * sigma, "{counts:?}");
        }
    }

    fn field_strategy() -> impl Strategy<Value = FieldSpec> {
        prop_oneof![Just(5u64), Just(7), Just(101), Just(MERSENNE_31)].prop_map(f)
    }

    proptest! {
        #[test]
        fn field_axioms(fp in field_strategy(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let (a, b, c) = (fp.element(a), fp.element(b), fp.element(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a + (-a), fp.zero());
            prop_assert_eq!(a - b + b, a);
            if !a.is_zero() {
                prop_assert_eq!(a * a.inv().unwrap(), fp.one());
            }
            prop_assert!(a.value() < fp.modulus());
        }
    }
}
