//! Modular-ring and finite-field arithmetic.
//!
//! [`Zmod`] carries values of the ring of integers modulo `d`, which is the
//! alphabet of every additive-channel use. [`FieldSpec`] builds `GF(p^r)`
//! together with a full discrete-log table, so that products of nonzero field
//! elements can be turned into sums modulo `d - 1`.

mod field;

pub use field::{
    build_field, build_field_with_limit, dlog, dlog_inverse, field_add, field_inv, field_mul,
    field_neg, indicator, FieldElement, FieldSpec, DEFAULT_FIELD_LIMIT,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u32),
    #[error("value {value} is out of range for modulus {modulus}")]
    OutOfRange { value: u64, modulus: u32 },
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{r} exceeds the configured limit {limit}")]
    OrderLimit { p: u32, r: u32, limit: u32 },
    #[error("operands belong to different fields (GF({lhs}) vs GF({rhs}))")]
    FieldMismatch { lhs: u32, rhs: u32 },
    #[error("zero has no multiplicative inverse or discrete logarithm")]
    ZeroElement,
    #[error("modulus mismatch: {lhs} vs {rhs}")]
    ModulusMismatch { lhs: u32, rhs: u32 },
}

/// An element of the ring `Z_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Zmod {
    value: u32,
    modulus: u32,
}

impl Zmod {
    pub fn new(value: u32, modulus: u32) -> Result<Self, AlgebraError> {
        if modulus < 2 {
            return Err(AlgebraError::BadModulus(modulus));
        }
        if value >= modulus {
            return Err(AlgebraError::OutOfRange {
                value: value as u64,
                modulus,
            });
        }
        Ok(Self { value, modulus })
    }

    /// Reduces an arbitrary integer into `Z_d`.
    pub fn reduce(value: i64, modulus: u32) -> Result<Self, AlgebraError> {
        if modulus < 2 {
            return Err(AlgebraError::BadModulus(modulus));
        }
        Ok(Self {
            value: value.rem_euclid(modulus as i64) as u32,
            modulus,
        })
    }

    pub fn zero(modulus: u32) -> Result<Self, AlgebraError> {
        Self::new(0, modulus)
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn try_add(self, rhs: Self) -> Result<Self, AlgebraError> {
        self.same_ring(rhs)?;
        Ok(Self {
            value: add_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        })
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self, AlgebraError> {
        self.try_add(-rhs)
    }

    pub fn try_mul(self, rhs: Self) -> Result<Self, AlgebraError> {
        self.same_ring(rhs)?;
        Ok(Self {
            value: mul_mod(self.value, rhs.value, self.modulus),
            modulus: self.modulus,
        })
    }

    fn same_ring(self, rhs: Self) -> Result<(), AlgebraError> {
        if self.modulus != rhs.modulus {
            return Err(AlgebraError::ModulusMismatch {
                lhs: self.modulus,
                rhs: rhs.modulus,
            });
        }
        Ok(())
    }
}

impl std::ops::Neg for Zmod {
    type Output = Zmod;

    fn neg(self) -> Zmod {
        Zmod {
            value: neg_mod(self.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Add for Zmod {
    type Output = Zmod;

    /// Panics on a modulus mismatch; use [`Zmod::try_add`] to get an error instead.
    fn add(self, rhs: Zmod) -> Zmod {
        self.try_add(rhs).expect("Zmod addition across rings")
    }
}

impl std::ops::Sub for Zmod {
    type Output = Zmod;

    fn sub(self, rhs: Zmod) -> Zmod {
        self.try_sub(rhs).expect("Zmod subtraction across rings")
    }
}

impl fmt::Display for Zmod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

#[inline]
pub fn add_mod(a: u32, b: u32, m: u32) -> u32 {
    let s = a as u64 + b as u64;
    (s % m as u64) as u32
}

#[inline]
pub fn sub_mod(a: u32, b: u32, m: u32) -> u32 {
    add_mod(a, neg_mod(b % m, m), m)
}

#[inline]
pub fn neg_mod(a: u32, m: u32) -> u32 {
    let a = a % m;
    if a == 0 {
        0
    } else {
        m - a
    }
}

#[inline]
pub fn mul_mod(a: u32, b: u32, m: u32) -> u32 {
    ((a as u64 * b as u64) % m as u64) as u32
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut f = 3u32;
    while (f as u64) * (f as u64) <= n as u64 {
        if n % f == 0 {
            return false;
        }
        f += 2;
    }
    true
}

/// Splits `n` into `(p, r)` with `n = p^r`, if `n` is a prime power.
pub fn prime_power(n: u32) -> Option<(u32, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|f| n % f == 0)?;
    let mut rest = n;
    let mut r = 0;
    while rest % p == 0 {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p, r))
}

/// Smallest prime strictly between `k` and `2k`.
///
/// Existence for every `k >= 2` is the Bertrand–Chebyshev theorem. Values of
/// `k` below 2 are clamped to 2, whose answer is 3.
pub fn bertrand_prime(k: u32) -> u32 {
    let k = k.max(2);
    (k + 1..2 * k)
        .find(|&n| is_prime(n))
        .expect("Bertrand–Chebyshev guarantees a prime in (k, 2k)")
}
