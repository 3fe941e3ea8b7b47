//! Residue rings `Z/mZ` for the hot loops.
//!
//! Kernels are written once against [`ResidueRing`]. [`Mont128`] is a
//! Montgomery representation on `u128` for odd moduli below 2^126; [`BigRing`]
//! handles everything else. Both produce identical residues.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::Result;
use crate::padic::inv_mod;

pub trait ResidueRing {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn modulus(&self) -> &BigUint;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_u64(&self, x: u64) -> Self::Elem;
    fn from_big(&self, x: &BigUint) -> Self::Elem;
    fn to_big(&self, x: &Self::Elem) -> BigUint;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem> {
        let x = self.to_big(a);
        Ok(self.from_big(&inv_mod(&x, self.modulus())?))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

/// Full 256-bit product of two `u128`s as `(hi, lo)`.
#[inline]
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a0, a1) = (a & MASK, a >> 64);
    let (b0, b1) = (b & MASK, b >> 64);
    let lo0 = a0 * b0;
    let mid1 = a0 * b1;
    let mid2 = a1 * b0;
    let hi0 = a1 * b1;
    let t = (lo0 >> 64) + (mid1 & MASK) + (mid2 & MASK);
    let lo = (lo0 & MASK) | (t << 64);
    let hi = hi0 + (mid1 >> 64) + (mid2 >> 64) + (t >> 64);
    (hi, lo)
}

/// Montgomery arithmetic modulo an odd `m < 2^126` with `R = 2^128`.
#[derive(Clone, Debug)]
pub struct Mont128 {
    m: u128,
    /// `-m^{-1} mod 2^128`
    m_neg_inv: u128,
    r2: u128,
    r1: u128,
    modulus: BigUint,
}

impl Mont128 {
    pub const MAX_BITS: u64 = 126;

    pub fn fits(modulus: &BigUint) -> bool {
        modulus.bits() <= Self::MAX_BITS && modulus.bit(0) && *modulus > BigUint::one()
    }

    pub fn new(modulus: &BigUint) -> Option<Self> {
        if !Self::fits(modulus) {
            return None;
        }
        let m = modulus.to_u128()?;
        // Newton iteration doubles the number of correct low bits each round.
        let mut inv: u128 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u128.wrapping_sub(m.wrapping_mul(inv)));
        }
        let r = BigUint::one() << 128u32;
        let r1 = (&r % modulus).to_u128()?;
        let r2 = ((&r * &r) % modulus).to_u128()?;
        Some(Mont128 {
            m,
            m_neg_inv: inv.wrapping_neg(),
            r2,
            r1,
            modulus: modulus.clone(),
        })
    }

    #[inline]
    fn redc(&self, hi: u128, lo: u128) -> u128 {
        let t = lo.wrapping_mul(self.m_neg_inv);
        let (uh, _ul) = mul_wide(t, self.m);
        // lo + ul == 0 mod 2^128, so the carry out of the low half is lo != 0.
        let carry = u128::from(lo != 0);
        let mut r = hi + uh + carry;
        if r >= self.m {
            r -= self.m;
        }
        r
    }

    #[inline]
    fn to_mont(&self, x: u128) -> u128 {
        let (hi, lo) = mul_wide(x % self.m, self.r2);
        self.redc(hi, lo)
    }

    #[inline]
    fn from_mont(&self, x: u128) -> u128 {
        self.redc(0, x)
    }

    pub fn modulus_u128(&self) -> u128 {
        self.m
    }
}

impl ResidueRing for Mont128 {
    type Elem = u128;

    fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    fn zero(&self) -> u128 {
        0
    }

    fn one(&self) -> u128 {
        self.r1
    }

    fn from_u64(&self, x: u64) -> u128 {
        self.to_mont(u128::from(x))
    }

    fn from_big(&self, x: &BigUint) -> u128 {
        let r = (x % &self.modulus).to_u128().expect("reduced below modulus");
        self.to_mont(r)
    }

    fn to_big(&self, x: &u128) -> BigUint {
        BigUint::from(self.from_mont(*x))
    }

    #[inline]
    fn add(&self, a: &u128, b: &u128) -> u128 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u128, b: &u128) -> u128 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    fn mul(&self, a: &u128, b: &u128) -> u128 {
        let (hi, lo) = mul_wide(*a, *b);
        self.redc(hi, lo)
    }
}

/// Arbitrary-precision fallback.
#[derive(Clone, Debug)]
pub struct BigRing {
    modulus: BigUint,
}

impl BigRing {
    pub fn new(modulus: &BigUint) -> Self {
        BigRing {
            modulus: modulus.clone(),
        }
    }
}

impl ResidueRing for BigRing {
    type Elem = BigUint;

    fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }

    fn one(&self) -> BigUint {
        BigUint::one() % &self.modulus
    }

    fn from_u64(&self, x: u64) -> BigUint {
        BigUint::from(x) % &self.modulus
    }

    fn from_big(&self, x: &BigUint) -> BigUint {
        x % &self.modulus
    }

    fn to_big(&self, x: &BigUint) -> BigUint {
        x.clone()
    }

    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.modulus {
            s - &self.modulus
        } else {
            s
        }
    }

    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            a + &self.modulus - b
        }
    }

    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.modulus
    }
}

/// Run `$body` with `$ring` bound to the fastest ring available for `$modulus`.
macro_rules! with_ring {
    ($modulus:expr, |$ring:ident| $body:expr) => {{
        let modulus: &num_bigint::BigUint = $modulus;
        match $crate::residue::Mont128::new(modulus) {
            Some(ring) => {
                let $ring = &ring;
                $body
            }
            None => {
                let ring = $crate::residue::BigRing::new(modulus);
                let $ring = &ring;
                $body
            }
        }
    }};
}
pub(crate) use with_ring;
