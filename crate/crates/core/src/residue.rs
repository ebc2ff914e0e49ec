//! Exact arithmetic in `Z/p^k Z`.
//!
//! A [`ResidueRing`] carries `(p, k, p^k)`; a [`Residue`] is a canonical
//! representative in `[0, p^k)` tagged with its ring. Matrices store raw
//! `u64` representatives and call the `*_raw` helpers directly so the hot
//! paths avoid re-tagging every entry.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigUint;

use crate::error::{Error, Result};

/// The ring `Z/p^exp Z` for a prime `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueRing {
    p: u64,
    exp: u32,
    modulus: u64,
}

impl ResidueRing {
    /// Builds `Z/p^exp Z`. Fails when `p^exp` does not fit in a `u64`.
    pub fn new(p: u64, exp: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidGroupSpec(format!("p = {p} is not a prime")));
        }
        let modulus = p
            .checked_pow(exp)
            .ok_or(Error::ModulusOverflow { p, exp })?;
        Ok(ResidueRing { p, exp, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// The same prime at a different exponent.
    pub fn with_exp(&self, exp: u32) -> Result<Self> {
        ResidueRing::new(self.p, exp)
    }

    pub fn zero(&self) -> Residue {
        Residue { value: 0, ring: *self }
    }

    pub fn one(&self) -> Residue {
        Residue {
            value: 1 % self.modulus,
            ring: *self,
        }
    }

    /// Reduces an arbitrary signed integer into the ring.
    pub fn elem(&self, x: i64) -> Residue {
        Residue {
            value: self.reduce_i128(x as i128),
            ring: *self,
        }
    }

    pub fn from_u64(&self, x: u64) -> Residue {
        Residue {
            value: x % self.modulus,
            ring: *self,
        }
    }

    /// `p^e` as an element (zero once `e >= exp`).
    pub fn p_pow(&self, e: u32) -> Residue {
        if e >= self.exp {
            return self.zero();
        }
        Residue {
            value: self.p.pow(e),
            ring: *self,
        }
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    #[inline]
    pub fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            ((a as u128 + self.modulus as u128) - b as u128) as u64
        }
    }

    #[inline]
    pub fn neg_raw(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    /// Number of factors of `p` in `a`, capped at `exp` (so `valuation(0) = exp`).
    pub fn valuation_raw(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.exp;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) && v < self.exp {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse_raw(&self, a: u64) -> Result<u64> {
        if self.modulus == 1 {
            return Ok(0);
        }
        if a.is_multiple_of(self.p) {
            return Err(Error::NotAUnit(a, self.modulus));
        }
        // Extended Euclid on (a, modulus).
        let (mut r0, mut r1) = (self.modulus as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_i128(t0))
    }

    pub fn pow_raw(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }
}

/// An element of `Z/p^k Z`, stored as its canonical representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    ring: ResidueRing,
}

impl Residue {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> ResidueRing {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_unit(&self) -> bool {
        self.ring.modulus == 1 || !self.value.is_multiple_of(self.ring.p)
    }

    /// p-adic valuation; the zero residue has valuation `exp`.
    pub fn valuation(&self) -> u32 {
        self.ring.valuation_raw(self.value)
    }

    pub fn invert(&self) -> Result<Residue> {
        Ok(Residue {
            value: self.ring.inverse_raw(self.value)?,
            ring: self.ring,
        })
    }

    pub fn pow(&self, e: u64) -> Residue {
        Residue {
            value: self.ring.pow_raw(self.value, e),
            ring: self.ring,
        }
    }

    /// Exact division by `p^e`, landing in `Z/p^(exp-e) Z`.
    pub fn div_p_pow(&self, e: u32) -> Result<Residue> {
        if e > self.ring.exp || self.valuation() < e {
            return Err(Error::NotDivisible(e));
        }
        let ring = self.ring.with_exp(self.ring.exp - e)?;
        Ok(ring.from_u64(self.value / self.ring.p.pow(e)))
    }

    /// Reduction to a smaller exponent.
    pub fn project(&self, exp: u32) -> Result<Residue> {
        if exp > self.ring.exp {
            return Err(Error::PrecisionExhausted {
                needed: exp,
                available: self.ring.exp,
            });
        }
        Ok(self.ring.with_exp(exp)?.from_u64(self.value))
    }

    /// Reinterprets the canonical representative at a larger exponent.
    pub fn lift(&self, exp: u32) -> Result<Residue> {
        let ring = self.ring.with_exp(exp)?;
        Ok(ring.from_u64(self.value))
    }

    /// Symmetric representative in `(-p^k/2, p^k/2]`.
    pub fn signed(&self) -> i128 {
        let m = self.ring.modulus as i128;
        let v = self.value as i128;
        if 2 * v > m {
            v - m
        } else {
            v
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.ring, rhs.ring);
        Residue {
            value: self.ring.add_raw(self.value, rhs.value),
            ring: self.ring,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.ring, rhs.ring);
        Residue {
            value: self.ring.sub_raw(self.value, rhs.value),
            ring: self.ring,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        debug_assert_eq!(self.ring, rhs.ring);
        Residue {
            value: self.ring.mul_raw(self.value, rhs.value),
            ring: self.ring,
        }
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue {
            value: self.ring.neg_raw(self.value),
            ring: self.ring,
        }
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Parameters of `G_n = SL_m(Z/p^n Z)` together with a working exponent `W >= n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    p: u64,
    m: usize,
    n: u32,
    working: u32,
}

impl GroupSpec {
    pub fn new(p: u64, m: usize, n: u32) -> Result<Self> {
        GroupSpec::with_working(p, m, n, n)
    }

    pub fn with_working(p: u64, m: usize, n: u32, working: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidGroupSpec(format!("p = {p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidGroupSpec("p = 2 is not supported (2 must be a unit)".into()));
        }
        if m < 2 {
            return Err(Error::InvalidGroupSpec(format!("m = {m} must be at least 2")));
        }
        let ok = if m == 2 { p > 2 } else { p >= m as u64 };
        if !ok {
            return Err(Error::InvalidGroupSpec(format!(
                "need p > m = 2 or p >= m > 2, got p = {p}, m = {m}"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidGroupSpec("level n must be at least 1".into()));
        }
        if working < n {
            return Err(Error::InvalidGroupSpec(format!(
                "working exponent {working} below level {n}"
            )));
        }
        ResidueRing::new(p, working)?;
        Ok(GroupSpec { p, m, n, working })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn working(&self) -> u32 {
        self.working
    }

    /// `Z/p^n Z`, the coefficient ring of `G_n`.
    pub fn ring(&self) -> ResidueRing {
        ResidueRing::new(self.p, self.n).expect("validated at construction")
    }

    /// `Z/p^W Z`.
    pub fn working_ring(&self) -> ResidueRing {
        ResidueRing::new(self.p, self.working).expect("validated at construction")
    }

    /// Same prime and dimension at another level.
    pub fn at_level(&self, n: u32) -> Result<GroupSpec> {
        GroupSpec::new(self.p, self.m, n)
    }

    /// `|SL_m(Z/p^n Z)| = p^((n-1)(m^2-1)) * p^(m(m-1)/2) * prod_{i=2..m} (p^i - 1)`.
    pub fn group_order(&self) -> BigUint {
        let p = BigUint::from(self.p);
        let m = self.m as u32;
        let mut order = p.pow((self.n - 1) * (m * m - 1) + m * (m - 1) / 2);
        for i in 2..=m {
            order *= p.pow(i) - 1u32;
        }
        order
    }

    /// `log2 |G_n|`.
    pub fn log2_order(&self) -> f64 {
        let m = self.m as f64;
        let lp = (self.p as f64).log2();
        let mut acc = ((self.n as f64 - 1.0) * (m * m - 1.0) + m * (m - 1.0) / 2.0) * lp;
        for i in 2..=self.m as i32 {
            acc += ((self.p as f64).powi(i) - 1.0).log2();
        }
        acc
    }

    /// `|G_n|` when it fits in a `u64`.
    pub fn group_order_u64(&self) -> Option<u64> {
        u64::try_from(self.group_order()).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: u64, k: u32) -> ResidueRing {
        ResidueRing::new(p, k).unwrap()
    }

    #[test]
    fn invert_examples() {
        assert_eq!(r(3, 2).elem(2).invert().unwrap().value(), 5);
        assert_eq!(r(3, 2).elem(3).invert(), Err(Error::NotAUnit(3, 9)));
        // Oracle: scan every residue mod 27.
        let ring = r(3, 3);
        let scanned: Vec<u64> = (0..27).filter(|y| (7 * y) % 27 == 1).collect();
        assert_eq!(scanned, vec![4]);
        assert_eq!(ring.elem(7).invert().unwrap().value(), 4);
    }

    #[test]
    fn valuation_examples() {
        let ring = r(3, 4);
        assert_eq!(ring.elem(18).valuation(), 2);
        assert_eq!(ring.zero().valuation(), 4);
        assert_eq!(ring.elem(5).valuation(), 0);
        assert_eq!(ring.elem(81).valuation(), 4);
    }

    #[test]
    fn group_order_matches_enumeration() {
        for n in 1..=2u32 {
            let spec = GroupSpec::new(3, 2, n).unwrap();
            let q = 3u64.pow(n);
            let mut count = 0u64;
            for a in 0..q {
                for b in 0..q {
                    for c in 0..q {
                        for d in 0..q {
                            if (a * d + q * q - b * c) % q == 1 % q {
                                count += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(spec.group_order(), BigUint::from(count));
        }
        assert_eq!(GroupSpec::new(3, 2, 1).unwrap().group_order(), BigUint::from(24u32));
        assert_eq!(GroupSpec::new(3, 2, 2).unwrap().group_order(), BigUint::from(648u32));
        for n in 1..10 {
            let o = GroupSpec::new(3, 2, n).unwrap().group_order();
            assert_eq!(o, BigUint::from(24u32) * BigUint::from(27u32).pow(n - 1));
        }
    }

    #[test]
    fn log_order_is_linear_in_n() {
        let a = GroupSpec::new(3, 3, 5).unwrap().log2_order();
        let b = GroupSpec::new(3, 3, 6).unwrap().log2_order();
        assert!(((b - a) - 8.0 * 3f64.log2()).abs() < 1e-9);
        let exact = GroupSpec::new(3, 3, 6).unwrap().group_order().bits() as f64;
        assert!((exact - b).abs() <= 1.0);
    }

    #[test]
    fn spec_validation() {
        assert!(GroupSpec::new(2, 2, 3).is_err());
        assert!(GroupSpec::new(9, 2, 3).is_err());
        assert!(GroupSpec::new(3, 4, 3).is_err());
        assert!(GroupSpec::new(3, 3, 3).is_ok());
        assert!(GroupSpec::new(3, 2, 0).is_err());
        assert!(GroupSpec::with_working(3, 2, 5, 4).is_err());
        assert!(GroupSpec::new(3, 2, 41).is_err());
        assert!(GroupSpec::new(3, 2, 40).is_ok());
    }

    proptest! {
        #[test]
        fn ring_laws(a in any::<i64>(), b in any::<i64>(), c in any::<i64>(), k in 1u32..40) {
            let ring = r(3, k);
            let (a, b, c) = (ring.elem(a), ring.elem(b), ring.elem(c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a - b + b, a);
            prop_assert!((a * b).value() < ring.modulus());
            prop_assert_eq!(a + (-a), ring.zero());
        }

        #[test]
        fn inverse_involution(a in any::<i64>(), k in 1u32..27) {
            let ring = r(5, k);
            let x = ring.elem(a);
            if x.is_unit() {
                let y = x.invert().unwrap();
                prop_assert_eq!(x * y, ring.one());
                prop_assert_eq!(y.invert().unwrap(), x);
            } else {
                prop_assert!(x.invert().is_err());
            }
        }

        #[test]
        fn valuation_min_law(a in any::<i64>(), b in any::<i64>(), k in 1u32..20) {
            let ring = r(3, k);
            let (x, y) = (ring.elem(a), ring.elem(b));
            prop_assert_eq!((x * y).valuation(), (x.valuation() + y.valuation()).min(k));
        }
    }
}
