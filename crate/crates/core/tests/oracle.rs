//! Library results against exact rational arithmetic.

mod common;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;

use pclass_core::bernoulli::{
    bernoulli_bank, gen_bernoulli_b1, irregular_pairs_for, primes_in, BernoulliContext, IrregularPair,
};
use pclass_core::padic::PadicScalar;
use pclass_core::series::l_value;

fn exact(p: u64, x: &BigRational) -> PadicScalar {
    PadicScalar::from_ratio(p, x.numer().clone(), x.denom().clone(), 40).unwrap()
}

#[test]
fn bank_matches_exact_bernoulli_numbers() {
    let table = common::bernoulli_table();
    for p in [5u64, 7, 11, 37, 59, 101, 157, 251] {
        let bank = bernoulli_bank(p, 4).unwrap();
        assert_eq!(bank.len() as u64, 2 * p - 3);
        for (j, b) in bank.values().iter().enumerate() {
            let want = exact(p, &table[j]);
            assert!(b.eq_at_precision(&want), "p = {p} B_{j}: {b} vs {want}");
            assert!(b.abs_precision() >= 3, "p = {p} B_{j} known only to {}", b.abs_precision());
        }
    }
}

#[test]
fn irregular_indices_below_500() {
    let mut irregular = Vec::new();
    for p in primes_in(5, 500) {
        let (pairs, r) = irregular_pairs_for(p).unwrap();
        let got: Vec<u64> = pairs.iter().map(|x| x.even_index).collect();
        assert_eq!(got, common::irregular_indices(p), "p = {p}");
        assert_eq!(r, got.len());
        if r > 0 {
            irregular.push(p);
        }
    }
    assert_eq!(&irregular[..6], &[37, 59, 67, 101, 103, 131]);
    assert_eq!(irregular.len(), 28);
}

#[test]
fn von_staudt_clausen_in_the_bank() {
    for p in primes_in(5, 252) {
        let bank = bernoulli_bank(p, 2).unwrap();
        let pb = bank.values()[(p - 1) as usize].shift(1);
        assert_eq!(pb.residue(1).unwrap(), BigUint::from(p - 1), "p = {p}");
    }
}

#[test]
fn kummer_congruence_against_exact_values() {
    let table = common::bernoulli_table();
    for p in primes_in(5, 500) {
        let ctx = BernoulliContext::new(p, 2).unwrap();
        for e in (2..=p - 3).step_by(2) {
            let b1 = ctx.b1(e as i64 - 1).unwrap();
            let be_over_e = &table[e as usize] / BigRational::from_integer(e.into());
            let want = common::rational_mod(&be_over_e, p, 1);
            assert_eq!(b1.residue(1).unwrap(), want, "({p}, {e})");
        }
    }
}

/// `omega(a) = lim a^{p^k}`, so `a^{p^k}` is exact mod `p^{k+1}`.
fn teichmuller_power(a: u64, p: u64, k: u32) -> BigUint {
    let m = BigUint::from(p).pow(k + 1);
    BigUint::from(a).modpow(&BigUint::from(p).pow(k), &m)
}

#[test]
fn twisted_b1_from_first_principles() {
    for p in [5u64, 7, 37, 59, 157] {
        let k = 4;
        let m = BigUint::from(p).pow(k + 1);
        for t in (1..p as i64 - 1).step_by(2) {
            let mut sum = BigUint::from(0u32);
            for a in 1..p {
                let w = teichmuller_power(a, p, k).modpow(&BigUint::from(t as u64), &m);
                sum += w * BigUint::from(a);
            }
            let want = PadicScalar::from_residue_shifted(p, &(sum % &m), k + 1, -1);
            let got = gen_bernoulli_b1(t, p, k).unwrap();
            assert!(got.eq_at_precision(&want), "p = {p} t = {t}: {got} vs {want}");
            assert!(got.abs_precision() >= i64::from(k));
        }
    }
}

/// With the trivial twist the L-value is `-(1 - p^{m-1}) B_m / m`.
#[test]
fn l_values_at_untwisted_points() {
    let table = common::bernoulli_table();
    for (p, e) in [(37u64, 32u64), (59, 44), (67, 58), (101, 68), (103, 24), (131, 22), (157, 62), (157, 110)] {
        let pair = IrregularPair::new(p, e).unwrap();
        let ctx = BernoulliContext::new(p, 4).unwrap();
        for m in [e, e + p - 1] {
            if m as usize > common::ORACLE_MAX {
                continue;
            }
            let euler = BigRational::one() - BigRational::from_integer(num_bigint::BigInt::from(p).pow((m - 1) as u32));
            let want = -(euler * &table[m as usize]) / BigRational::from_integer(m.into());
            let got = l_value(&ctx, m, pair.even_index).unwrap();
            assert!(got.abs_precision() >= 3, "({p}, {e}) m = {m}: {got}");
            assert!(got.eq_at_precision(&exact(p, &want)), "({p}, {e}) m = {m}: {got}");
        }
    }
}
