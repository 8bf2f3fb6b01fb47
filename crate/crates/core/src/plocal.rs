//! Exact rationals with a p-locality predicate, used as the coefficient ring Z_(p).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::field::is_prime_u64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("denominator {den} is divisible by p = {p}")]
    NotPLocal { den: String, p: u64 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
}

/// A validated prime used as the localizing prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct LocalPrime(u64);

impl LocalPrime {
    pub fn new(p: u64) -> Result<Self, RingError> {
        if is_prime_u64(p) {
            Ok(Self(p))
        } else {
            Err(RingError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for LocalPrime {
    type Error = RingError;
    fn try_from(p: u64) -> Result<Self, RingError> {
        Self::new(p)
    }
}

impl From<LocalPrime> for u64 {
    fn from(p: LocalPrime) -> u64 {
        p.0
    }
}

impl fmt::Display for LocalPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An exact rational in lowest terms with positive denominator.
///
/// p-locality is a predicate checked against a [`LocalRing`], not part of the value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PLocalRational(BigRational);

impl PLocalRational {
    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_integer(n)
    }

    /// Canonical reduction without a locality check.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, RingError> {
        let den = den.into();
        if den.is_zero() {
            return Err(RingError::ZeroDenominator);
        }
        Ok(Self(BigRational::new(num.into(), den)))
    }

    pub fn from_big(q: BigRational) -> Self {
        Self(q)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, RingError> {
        if self.is_zero() {
            Err(RingError::DivisionByZero)
        } else {
            Ok(Self(self.0.recip()))
        }
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, RingError> {
        Ok(Self(&self.0 * other.recip()?.0))
    }

    pub fn is_p_local(&self, p: u64) -> bool {
        !self.denom().is_multiple_of(&BigInt::from(p))
    }

    /// p-adic valuation; `None` for zero.
    pub fn valuation(&self, p: u64) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let p = BigInt::from(p);
        let count = |n: &BigInt| {
            let mut n = n.abs();
            let mut k = 0i64;
            while n.is_multiple_of(&p) {
                n /= &p;
                k += 1;
            }
            k
        };
        Some(count(self.numer()) - count(self.denom()))
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }
}

impl fmt::Debug for PLocalRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PLocalRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for PLocalRational {
    type Err = RingError;
    fn from_str(s: &str) -> Result<Self, RingError> {
        let bad = || RingError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                Self::new(n, d)
            }
            None => Ok(Self::from_integer(s.parse::<BigInt>().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for PLocalRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PLocalRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for PLocalRational {
    fn from(n: i64) -> Self {
        Self::from_i64(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for PLocalRational {
            type Output = PLocalRational;
            fn $m(self, o: PLocalRational) -> PLocalRational {
                PLocalRational(self.0.$m(o.0))
            }
        }
        impl<'a> $tr<&'a PLocalRational> for &'a PLocalRational {
            type Output = PLocalRational;
            fn $m(self, o: &'a PLocalRational) -> PLocalRational {
                PLocalRational((&self.0).$m(&o.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl AddAssign<&PLocalRational> for PLocalRational {
    fn add_assign(&mut self, o: &PLocalRational) {
        self.0 += &o.0;
    }
}

impl SubAssign<&PLocalRational> for PLocalRational {
    fn sub_assign(&mut self, o: &PLocalRational) {
        self.0 -= &o.0;
    }
}

impl Neg for PLocalRational {
    type Output = PLocalRational;
    fn neg(self) -> PLocalRational {
        PLocalRational(-self.0)
    }
}

impl Neg for &PLocalRational {
    type Output = PLocalRational;
    fn neg(self) -> PLocalRational {
        PLocalRational(-&self.0)
    }
}

/// The ring Z_(p) as a predicate on rationals, optionally enforced strictly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalRing {
    prime: LocalPrime,
    strict: bool,
}

impl LocalRing {
    pub fn new(prime: LocalPrime) -> Self {
        Self { prime, strict: false }
    }

    pub fn strict(prime: LocalPrime) -> Self {
        Self { prime, strict: true }
    }

    pub fn prime(&self) -> LocalPrime {
        self.prime
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn contains(&self, q: &PLocalRational) -> bool {
        q.is_p_local(self.prime.get())
    }

    /// Reduce `num/den` to canonical form; in strict mode a non-local result is an error.
    pub fn reduce(
        &self,
        num: impl Into<BigInt>,
        den: impl Into<BigInt>,
    ) -> Result<PLocalRational, RingError> {
        let q = PLocalRational::new(num, den)?;
        if self.strict && !self.contains(&q) {
            return Err(RingError::NotPLocal {
                den: q.denom().to_string(),
                p: self.prime.get(),
            });
        }
        Ok(q)
    }

    /// 1/k! as an element of the ring, or an error when p divides k!.
    pub fn inverse_factorial(&self, k: u32) -> Result<PLocalRational, RingError> {
        let mut f = BigInt::one();
        for i in 2..=k {
            f *= i;
        }
        LocalRing::strict(self.prime).reduce(1, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> LocalRing {
        LocalRing::strict(LocalPrime::new(1117).unwrap())
    }

    #[test]
    fn reduce_normalizes() {
        let r = ring();
        let q = r.reduce(2, 4).unwrap();
        assert_eq!(q.to_string(), "1/2");
        assert!(r.contains(&q));
        assert_eq!(r.reduce(6, -3).unwrap().to_string(), "-2");
        assert_eq!(r.reduce(1, 0), Err(RingError::ZeroDenominator));
    }

    #[test]
    fn strict_rejects_p_in_denominator() {
        assert!(matches!(ring().reduce(1, 1117), Err(RingError::NotPLocal { .. })));
        let lax = LocalRing::new(LocalPrime::new(1117).unwrap());
        assert!(!lax.contains(&lax.reduce(1, 1117).unwrap()));
    }

    #[test]
    fn valuation_counts_both_sides() {
        let q = PLocalRational::new(9 * 5, 7 * 3).unwrap();
        assert_eq!(q.valuation(3), Some(1));
        assert_eq!(q.valuation(7), Some(-1));
        assert_eq!(PLocalRational::zero().valuation(3), None);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0", "-3", "7/12", "-1/1117"] {
            let q: PLocalRational = s.parse().unwrap();
            assert_eq!(q.to_string(), s);
        }
        assert!("1/0".parse::<PLocalRational>().is_err());
        assert!("x".parse::<PLocalRational>().is_err());
    }

    #[test]
    fn factorials() {
        let r = LocalRing::new(LocalPrime::new(7).unwrap());
        assert_eq!(r.inverse_factorial(3).unwrap().to_string(), "1/6");
        assert!(r.inverse_factorial(7).is_err());
        assert!(LocalPrime::new(1115).is_err());
    }
}
