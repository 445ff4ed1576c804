//! Coefficient rings for the plane-cubic arithmetic. The chord-tangent
//! construction only needs ring operations plus a way to pick a canonical
//! projective representative, so the same code runs over `Z` and `F_p`.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::arith::{mod_u64, mul_mod, pow_mod};

pub trait Arith {
    type El: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::El;
    fn from_i64(&self, v: i64) -> Self::El;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn sub(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    /// Canonical representative of the projective point with these
    /// homogeneous coordinates. The input is never the zero vector.
    fn normalize(&self, v: [Self::El; 3]) -> [Self::El; 3];
}

/// The integers, with primitive sign-normalised projective representatives.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integers;

impl Arith for Integers {
    type El = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn normalize(&self, v: [BigInt; 3]) -> [BigInt; 3] {
        normalize_triple(v)
    }
}

/// Divides out the content and makes the first nonzero coordinate positive.
pub fn normalize_triple(v: [BigInt; 3]) -> [BigInt; 3] {
    let g = v[0].gcd(&v[1]).gcd(&v[2]);
    assert!(!g.is_zero(), "zero vector is not a projective point");
    let neg = v.iter().find(|x| !x.is_zero()).map(|x| x.is_negative()).unwrap();
    let g = if neg { -g } else { g };
    v.map(|x| x / &g)
}

/// The prime field `F_p`, representatives scaled so the first nonzero
/// coordinate is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        PrimeField { p }
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero mod {}", self.p);
        pow_mod(a, self.p - 2, self.p)
    }

    pub fn reduce(&self, x: &BigInt) -> u64 {
        mod_u64(x, self.p)
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.p - a % self.p) % self.p
    }
}

impl Arith for PrimeField {
    type El = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn from_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.p as i128) as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + self.p as u128 - *b as u128) % self.p as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }
    fn is_zero(&self, a: &u64) -> bool {
        (*a).is_multiple_of(self.p)
    }
    fn normalize(&self, v: [u64; 3]) -> [u64; 3] {
        let lead = *v.iter().find(|&&x| x != 0).expect("zero vector is not a projective point");
        let inv = self.inv(lead);
        v.map(|x| mul_mod(x, inv, self.p))
    }
}
