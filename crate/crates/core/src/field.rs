//! Scalar fields used by the linear algebra and the coefficient types used by expansions.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::plocal::PLocalRational;

/// Field operations with an explicit context, so a modulus can be chosen at run time.
pub trait Field: Sync + Send {
    type Elem: Clone + PartialEq + Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Inverse of a nonzero element.
    fn inv(&self, a: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
}

/// The rational numbers with exact arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = PLocalRational;

    fn zero(&self) -> PLocalRational {
        PLocalRational::zero()
    }
    fn one(&self) -> PLocalRational {
        PLocalRational::one()
    }
    fn is_zero(&self, a: &PLocalRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &PLocalRational, b: &PLocalRational) -> PLocalRational {
        a + b
    }
    fn sub(&self, a: &PLocalRational, b: &PLocalRational) -> PLocalRational {
        a - b
    }
    fn mul(&self, a: &PLocalRational, b: &PLocalRational) -> PLocalRational {
        a * b
    }
    fn neg(&self, a: &PLocalRational) -> PLocalRational {
        -a
    }
    fn inv(&self, a: &PLocalRational) -> PLocalRational {
        a.recip().expect("inverse of zero")
    }
}

/// Integers modulo a prime below 2^63.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    q: u64,
}

pub const MERSENNE_61: u64 = (1 << 61) - 1;

impl PrimeField {
    pub fn new(q: u64) -> Self {
        assert!(q < 1 << 63 && is_prime_u64(q), "{q} is not a usable prime");
        Self { q }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn reduce_int(&self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.q)).to_u64().expect("residue fits")
    }

    /// Image of a rational, or `None` when q divides its denominator.
    pub fn reduce_rational(&self, r: &PLocalRational) -> Option<u64> {
        let d = self.reduce_int(r.denom());
        if d == 0 {
            return None;
        }
        Some(mul_mod(self.reduce_int(r.numer()), pow_mod(d, self.q - 2, self.q), self.q))
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.q as i128) as u64
    }

    /// Centered lift into (-q/2, q/2].
    pub fn lift(&self, a: u64) -> i128 {
        if a > self.q / 2 {
            a as i128 - self.q as i128
        } else {
            a as i128
        }
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.q)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.q - a
        }
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "inverse of zero");
        pow_mod(*a, self.q - 2, self.q)
    }
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// A uniformly drawn prime in [2^61, 2^62).
pub fn random_word_prime<R: Rng>(rng: &mut R) -> u64 {
    loop {
        let c = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime_u64(c) {
            return c;
        }
    }
}

/// Coefficients with context-free arithmetic, used for tensor expansions.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync + 'static {
    type F: Field<Elem = Self>;

    fn field() -> Self::F;
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(v: i64) -> Self;
    /// `None` when the denominator is not invertible.
    fn from_rational(q: &PLocalRational) -> Option<Self>;
    fn add_assign(&mut self, o: &Self);
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Coeff for PLocalRational {
    type F = Rationals;

    fn field() -> Rationals {
        Rationals
    }
    fn zero() -> Self {
        PLocalRational::zero()
    }
    fn one() -> Self {
        PLocalRational::one()
    }
    fn is_zero(&self) -> bool {
        PLocalRational::is_zero(self)
    }
    fn from_i64(v: i64) -> Self {
        PLocalRational::from_i64(v)
    }
    fn from_rational(q: &PLocalRational) -> Option<Self> {
        Some(q.clone())
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Residues modulo the Mersenne prime 2^61 - 1, for fast heuristic-free rank lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Mod61(pub u64);

/// Field context for [`Mod61`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Mod61Field;

#[inline]
fn m61_reduce(x: u128) -> u64 {
    let lo = (x as u64) & MERSENNE_61;
    let hi = (x >> 61) as u64;
    let s = lo + (hi & MERSENNE_61) + (hi >> 61);
    let s = (s & MERSENNE_61) + (s >> 61);
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

impl Field for Mod61Field {
    type Elem = Mod61;

    fn zero(&self) -> Mod61 {
        Mod61(0)
    }
    fn one(&self) -> Mod61 {
        Mod61(1)
    }
    fn is_zero(&self, a: &Mod61) -> bool {
        a.0 == 0
    }
    fn add(&self, a: &Mod61, b: &Mod61) -> Mod61 {
        let s = a.0 + b.0;
        Mod61(if s >= MERSENNE_61 { s - MERSENNE_61 } else { s })
    }
    fn mul(&self, a: &Mod61, b: &Mod61) -> Mod61 {
        Mod61(m61_reduce(a.0 as u128 * b.0 as u128))
    }
    fn neg(&self, a: &Mod61) -> Mod61 {
        Mod61(if a.0 == 0 { 0 } else { MERSENNE_61 - a.0 })
    }
    fn inv(&self, a: &Mod61) -> Mod61 {
        assert!(a.0 != 0, "inverse of zero");
        Mod61(pow_mod(a.0, MERSENNE_61 - 2, MERSENNE_61))
    }
}

impl Coeff for Mod61 {
    type F = Mod61Field;

    fn field() -> Mod61Field {
        Mod61Field
    }
    fn zero() -> Self {
        Mod61(0)
    }
    fn one() -> Self {
        Mod61(1)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn from_i64(v: i64) -> Self {
        Mod61((v as i128).rem_euclid(MERSENNE_61 as i128) as u64)
    }
    fn from_rational(q: &PLocalRational) -> Option<Self> {
        PrimeField { q: MERSENNE_61 }.reduce_rational(q).map(Mod61)
    }
    fn add_assign(&mut self, o: &Self) {
        *self = Mod61Field.add(self, o);
    }
    fn mul(&self, o: &Self) -> Self {
        Mod61Field.mul(self, o)
    }
    fn neg(&self) -> Self {
        Mod61Field.neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn primality() {
        let primes = [2u64, 3, 5, 1117, 1_000_000_007, MERSENNE_61];
        for p in primes {
            assert!(is_prime_u64(p), "{p}");
        }
        for c in [0u64, 1, 4, 1115, 561, 3_215_031_751, (1 << 61) + 1] {
            assert!(!is_prime_u64(c), "{c}");
        }
    }

    #[test]
    fn mersenne_arithmetic_matches_generic() {
        let g = PrimeField::new(MERSENNE_61);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = rng.gen_range(0..MERSENNE_61);
            let b = rng.gen_range(0..MERSENNE_61);
            assert_eq!(Mod61Field.mul(&Mod61(a), &Mod61(b)).0, g.mul(&a, &b));
            assert_eq!(Mod61Field.add(&Mod61(a), &Mod61(b)).0, g.add(&a, &b));
        }
        let x = Mod61(12345);
        assert_eq!(Mod61Field.mul(&x, &Mod61Field.inv(&x)), Mod61(1));
    }

    #[test]
    fn rational_reduction() {
        let f = PrimeField::new(7);
        let half = PLocalRational::new(1, 2).unwrap();
        assert_eq!(f.reduce_rational(&half), Some(4));
        assert_eq!(f.reduce_rational(&PLocalRational::new(1, 14).unwrap()), None);
        assert_eq!(f.lift(6), -1);
    }

    #[test]
    fn random_primes_are_word_sized() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let q = random_word_prime(&mut rng);
        assert!(is_prime_u64(q) && q >= 1 << 61);
    }
}
