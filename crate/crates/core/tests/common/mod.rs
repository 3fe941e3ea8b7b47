//! Exact-rational Bernoulli numbers, independent of the modular kernels.
#![allow(dead_code)]

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Largest index kept in the shared table.
pub const ORACLE_MAX: usize = 500;

/// `B_0 ... B_n` by the Akiyama–Tanigawa transform (`B_1 = +1/2` there, so the
/// sign of index 1 is flipped to the usual convention).
pub fn akiyama_tanigawa(n: usize) -> Vec<BigRational> {
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let d = &a[j - 1] - &a[j];
            a[j - 1] = d * BigInt::from(j);
        }
        out.push(a[0].clone());
    }
    if n >= 1 {
        out[1] = -out[1].clone();
    }
    out
}

pub fn bernoulli_table() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| akiyama_tanigawa(ORACLE_MAX))
}

/// Even indices `2 <= e <= p-3` with `p` dividing the numerator of `B_e`.
pub fn irregular_indices(p: u64) -> Vec<u64> {
    let t = bernoulli_table();
    assert!((p as usize) <= ORACLE_MAX + 3, "oracle table too short for {p}");
    (2..=p.saturating_sub(3))
        .step_by(2)
        .filter(|&e| {
            let num = t[e as usize].numer();
            (num % BigInt::from(p)).is_zero()
        })
        .collect()
}

/// `x mod p^k` for a rational with denominator prime to `p`.
pub fn rational_mod(x: &BigRational, p: u64, k: u32) -> BigUint {
    let m = BigInt::from(p).pow(k);
    let num = x.numer().mod_floor(&m).to_biguint().unwrap();
    let den = x.denom().mod_floor(&m).to_biguint().unwrap();
    let m = m.to_biguint().unwrap();
    let inv = den.modinv(&m).expect("denominator prime to p");
    (num * inv) % m
}
