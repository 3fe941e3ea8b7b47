//! Bernoulli numbers modulo prime powers, irregular pairs and generalized
//! Bernoulli numbers twisted by powers of the Teichmüller character.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{pow_p, PadicScalar, TeichTable};
use crate::residue::{with_ring, ResidueRing};

/// Extra absolute digits carried by the bank above the requested precision.
pub const BANK_GUARD: u32 = 4;

/// An index pair `(p, e)` with `p | B_e`.
///
/// `e` is the canonical key. `twist = e - 1` is the odd exponent of the
/// character in `B_{1, omega^{e-1}}`, and `component_index = 1 - e mod (p-1)`
/// is the label `i` of the eigencomponent with `a_0 = -B_{1, omega^{-i}}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrregularPair {
    pub prime: u64,
    pub even_index: u64,
    pub twist: u64,
    pub component_index: u64,
}

impl IrregularPair {
    /// Builds the index bookkeeping for `(p, e)`. Irregularity itself is not
    /// checked here; [`irregular_pairs`] only returns genuine pairs.
    pub fn new(prime: u64, even_index: u64) -> Result<Self> {
        if prime < 5 || !even_index.is_multiple_of(2) || even_index < 2 || even_index + 3 > prime {
            return Err(Error::precondition(format!(
                "({prime}, {even_index}) is not an admissible index pair"
            )));
        }
        Ok(IrregularPair {
            prime,
            even_index,
            twist: even_index - 1,
            component_index: prime - even_index,
        })
    }
}

/// `B_0 ... B_{2p-4}` as p-adic scalars.
#[derive(Clone, Debug)]
pub struct BernoulliBank {
    prime: u64,
    precision: u32,
    values: Vec<PadicScalar>,
}

impl BernoulliBank {
    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn values(&self) -> &[PadicScalar] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, j: usize) -> Result<&PadicScalar> {
        self.values.get(j).ok_or_else(|| {
            Error::precondition(format!(
                "B_{j} is outside the bank (max index {})",
                self.values.len().saturating_sub(1)
            ))
        })
    }

    /// `B_j / j` for `j >= 1`.
    pub fn over_index(&self, j: usize) -> Result<PadicScalar> {
        let b = self.get(j)?;
        b.try_div(&PadicScalar::from_integer(
            self.prime,
            j as u64,
            self.precision + 2 * BANK_GUARD,
        ))
    }
}

fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `c_j = p * B_j mod p^W` by the recurrence `sum_{j<=n} C(n+1, j) B_j = 0`.
/// The second component is true for entries that lost the top digit to the
/// division by `p` at `n = p - 1`.
fn scaled_bank<R: ResidueRing>(
    ring: &R,
    p: u64,
    top: usize,
    drop_linear_term: bool,
) -> Result<Vec<(R::Elem, bool)>> {
    let mut c: Vec<R::Elem> = Vec::with_capacity(top + 1);
    let mut lost: Vec<bool> = Vec::with_capacity(top + 1);
    c.push(ring.from_u64(p));
    lost.push(false);
    // Row n+1 of Pascal's triangle, advanced in place.
    let mut row: Vec<R::Elem> = vec![ring.one(), ring.one()];
    let pb = BigUint::from(p);
    for n in 1..=top {
        row.push(ring.one());
        for j in (1..=n).rev() {
            let prev = row[j - 1].clone();
            row[j] = ring.add(&row[j], &prev);
        }
        if n >= 3 && n % 2 == 1 {
            c.push(ring.zero());
            lost.push(lost[n - 1]);
            continue;
        }
        let mut sum = ring.zero();
        let mut any_lost = false;
        for j in 0..n {
            if j >= 3 && j % 2 == 1 {
                continue;
            }
            if j == 1 && drop_linear_term {
                continue;
            }
            sum = ring.add(&sum, &ring.mul(&row[j], &c[j]));
            any_lost |= lost[j];
        }
        let d = (n + 1) as u64;
        let (value, dropped) = if d.is_multiple_of(p) {
            let s = ring.to_big(&sum);
            if !(&s % &pb).is_zero() {
                return Err(Error::internal(format!(
                    "Bernoulli recurrence: sum at n = {n} is not divisible by p = {p}"
                )));
            }
            let q = ring.from_big(&(s / &pb));
            let inv = ring.inv(&ring.from_u64(d / p))?;
            (ring.mul(&q, &inv), true)
        } else {
            (ring.mul(&sum, &ring.inv(&ring.from_u64(d))?), false)
        };
        c.push(ring.neg(&value));
        lost.push(any_lost || dropped);
    }
    Ok(c.into_iter().zip(lost).collect())
}

fn build_bank(p: u64, precision: u32, drop_linear_term: bool, force_big: bool) -> Result<BernoulliBank> {
    if !is_odd_prime(p) {
        return Err(Error::precondition(format!("{p} is not an odd prime")));
    }
    if precision < 2 {
        return Err(Error::precondition("bank precision must be at least 2"));
    }
    let top = (2 * p - 4) as usize;
    // absolute digits on p*B_j; B_j keeps at least precision + BANK_GUARD
    let w = precision + BANK_GUARD + 2;
    let modulus = pow_p(p, w);
    let residues: Vec<(BigUint, bool)> = if force_big {
        let ring = crate::residue::BigRing::new(&modulus);
        scaled_bank(&ring, p, top, drop_linear_term)?
    } else {
        with_ring!(&modulus, |ring| {
            scaled_bank(ring, p, top, drop_linear_term)?
                .into_iter()
                .map(|(x, l)| (ring.to_big(&x), l))
                .collect()
        })
    };
    let mut values = Vec::with_capacity(residues.len());
    for (j, (r, lost)) in residues.iter().enumerate() {
        let prec = if *lost { w - 1 } else { w };
        if j >= 3 && j % 2 == 1 {
            values.push(PadicScalar::zero(p, i64::from(prec) - 1));
            continue;
        }
        let b = PadicScalar::from_residue_shifted(p, r, prec, -1);
        if b.is_zero() {
            return Err(Error::PrecisionExhausted(format!(
                "B_{j} mod {p}^{} vanished; raise the precision",
                prec - 1
            )));
        }
        values.push(b);
    }
    Ok(BernoulliBank {
        prime: p,
        precision,
        values,
    })
}

/// The bank `B_0 ... B_{2p-4}` for an odd prime `p`, at absolute precision at
/// least `K + 4` (one digit less from index `p - 1` onward).
pub fn bernoulli_bank(p: u64, precision: u32) -> Result<BernoulliBank> {
    build_bank(p, precision, false, false)
}

/// Same as [`bernoulli_bank`] but always on the arbitrary-precision ring.
pub fn bernoulli_bank_reference(p: u64, precision: u32) -> Result<BernoulliBank> {
    build_bank(p, precision, false, true)
}

/// Fault injection: the recurrence with its `j = 1` term dropped.
#[doc(hidden)]
pub fn bernoulli_bank_mutated(p: u64, precision: u32) -> Result<BernoulliBank> {
    build_bank(p, precision, true, false)
}

/// Even `e` in `[2, p-3]` with `p | B_e`, ascending.
pub fn irregular_pairs(bank: &BernoulliBank) -> Vec<IrregularPair> {
    let p = bank.prime();
    (2..=p.saturating_sub(3))
        .step_by(2)
        .filter(|&e| {
            bank.values[e as usize]
                .valuation()
                .map(|v| v >= 1)
                .unwrap_or(true)
        })
        .map(|e| IrregularPair::new(p, e).expect("index within range"))
        .collect()
}

/// Irregular pairs of `p` and the index of regularity `r(p)`.
pub fn irregular_pairs_for(p: u64) -> Result<(Vec<IrregularPair>, usize)> {
    if p < 5 {
        return Err(Error::precondition("irregular pairs need p >= 5"));
    }
    let bank = bernoulli_bank(p, 2)?;
    let pairs = irregular_pairs(&bank);
    let r = pairs.len();
    Ok((pairs, r))
}

/// Outcome of the two incongruence tests for one pair.
#[derive(Clone, Debug)]
pub struct KummerChecks {
    pub check1: bool,
    pub check2: bool,
    /// `B_{1, omega^{e-1}}`
    pub b1: PadicScalar,
    /// `B_e/e - B_{e+p-1}/(e+p-1)`
    pub diff: PadicScalar,
}

fn valuation_is_one(x: &PadicScalar, what: &str) -> Result<bool> {
    match x.valuation() {
        Some(v) => Ok(v == 1),
        None if x.abs_precision() >= 2 => Ok(false),
        None => Err(Error::PrecisionExhausted(format!(
            "{what} known only mod p^{}",
            x.abs_precision()
        ))),
    }
}

/// Bank plus Teichmüller table: everything needed for twisted Bernoulli numbers.
#[derive(Clone, Debug)]
pub struct BernoulliContext {
    bank: BernoulliBank,
    teich: TeichTable,
    precision: u32,
}

impl BernoulliContext {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        Ok(Self::from_bank(bernoulli_bank(p, precision)?))
    }

    pub fn from_bank(bank: BernoulliBank) -> Self {
        let precision = bank.precision();
        let teich = TeichTable::new(bank.prime(), precision + 1);
        BernoulliContext {
            bank,
            teich,
            precision,
        }
    }

    pub fn bank(&self) -> &BernoulliBank {
        &self.bank
    }

    pub fn teichmuller(&self) -> &TeichTable {
        &self.teich
    }

    pub fn prime(&self) -> u64 {
        self.bank.prime()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// `B_{1, omega^t} = (1/p) sum_{a=1}^{p-1} omega^t(a) a`, known mod `p^K`.
    pub fn b1(&self, t: i64) -> Result<PadicScalar> {
        let p = self.prime();
        if t.rem_euclid(p as i64 - 1) == 0 {
            return Err(Error::precondition(
                "B_{1,chi} needs a nontrivial character (t = 0 mod p-1)",
            ));
        }
        let k = self.teich.modulus_exponent();
        if t.rem_euclid(2) == 0 {
            return Ok(PadicScalar::zero(p, i64::from(k) - 1));
        }
        let modulus = self.teich.modulus();
        let mut sum = BigUint::zero();
        for a in 1..p {
            sum += self.teich.power(a, t) * BigUint::from(a);
        }
        sum %= modulus;
        Ok(PadicScalar::from_residue_shifted(p, &sum, k, -1))
    }

    /// `B_{m, omega^t} = p^{m-1} sum_{a=1}^{p} omega^t(a) B_m(a/p)`, with
    /// `omega^0` the principal character mod p (so it vanishes at `a = p`).
    pub fn bm(&self, m: u64, t: i64) -> Result<PadicScalar> {
        let p = self.prime();
        if m == 0 {
            return Err(Error::precondition("B_{m,chi} needs m >= 1"));
        }
        if m as usize >= self.bank.len() {
            return Err(Error::precondition(format!(
                "B_{{{m},chi}} needs B_{m}, bank stops at B_{}",
                self.bank.len() - 1
            )));
        }
        let k = self.teich.modulus_exponent();
        let modulus = self.teich.modulus();
        let chi = self.teich.powers(t);
        // power sums S_j = sum_a chi(a) a^j for j = 0..m
        let mut sums = vec![BigUint::zero(); m as usize + 1];
        for a in 1..p {
            let ab = BigUint::from(a);
            let mut pw = chi[(a - 1) as usize].clone();
            for s in sums.iter_mut() {
                *s += &pw;
                pw = (pw * &ab) % modulus;
            }
        }
        let wide = self.precision + 3 * BANK_GUARD + 4;
        let mut binom = BigUint::from(1u32);
        let mut total = PadicScalar::zero(p, i64::from(wide) + 64);
        for r in 0..=m {
            if r > 0 {
                binom = binom * BigUint::from(m - r + 1) / BigUint::from(r);
            }
            let b = self.bank.get(r as usize)?;
            if b.is_zero() && r >= 3 {
                continue;
            }
            let s = PadicScalar::from_residue(p, &(&sums[(m - r) as usize] % modulus), k);
            let c = PadicScalar::from_integer(p, binom.clone(), wide);
            let term = (&(&c * b) * &s).shift(r as i64 - 1);
            total = &total + &term;
        }
        Ok(total)
    }

    /// The two incongruences for an irregular pair, as valuation-equals-one tests.
    pub fn kummer_checks(&self, pair: &IrregularPair) -> Result<KummerChecks> {
        let p = self.prime();
        if pair.prime != p {
            return Err(Error::PrimeMismatch(pair.prime, p));
        }
        let e = pair.even_index as usize;
        let be = self.bank.get(e)?;
        if be.valuation().map(|v| v < 1).unwrap_or(false) {
            return Err(Error::precondition(format!(
                "({p}, {e}) is regular: p does not divide B_{e}"
            )));
        }
        let b1 = self.b1(pair.twist as i64)?;
        let be_over_e = self.bank.over_index(e)?;
        let diff = be_over_e.try_sub(&self.bank.over_index(e + p as usize - 1)?)?;
        for (name, x) in [("B_{1,omega^(e-1)}", &b1), ("B_e/e - B_{e+p-1}/(e+p-1)", &diff)] {
            if x.valuation().map(|v| v < 1).unwrap_or(false) {
                return Err(Error::internal(format!(
                    "Kummer congruence mod p fails for {name} at ({p}, {e}): {x}"
                )));
            }
        }
        if !b1.try_sub(&be_over_e)?.cap_abs(1).is_zero() {
            return Err(Error::internal(format!(
                "B_{{1,omega^{}}} and B_{e}/{e} disagree mod {p}",
                e - 1
            )));
        }
        Ok(KummerChecks {
            check1: valuation_is_one(&b1, "B_{1,omega^(e-1)}")?,
            check2: valuation_is_one(&diff, "B_e/e - B_{e+p-1}/(e+p-1)")?,
            b1,
            diff,
        })
    }
}

/// `B_{1, omega^t}` at precision `K`.
pub fn gen_bernoulli_b1(t: i64, p: u64, precision: u32) -> Result<PadicScalar> {
    if !is_odd_prime(p) {
        return Err(Error::precondition(format!("{p} is not an odd prime")));
    }
    if t.rem_euclid(p as i64 - 1) == 0 {
        return Err(Error::precondition(
            "B_{1,chi} needs a nontrivial character (t = 0 mod p-1)",
        ));
    }
    let teich = TeichTable::new(p, precision + 1);
    if t.rem_euclid(2) == 0 {
        return Ok(PadicScalar::zero(p, i64::from(precision)));
    }
    let mut sum = BigUint::zero();
    for a in 1..p {
        sum += teich.power(a, t) * BigUint::from(a);
    }
    sum %= teich.modulus();
    Ok(PadicScalar::from_residue_shifted(p, &sum, precision + 1, -1))
}

/// `B_{m, omega^t}` at precision `K`.
pub fn gen_bernoulli_bm(m: u64, t: i64, p: u64, precision: u32) -> Result<PadicScalar> {
    BernoulliContext::new(p, precision)?.bm(m, t)
}

/// Incongruence checks at precision `K = 2`.
pub fn kummer_checks(pair: &IrregularPair) -> Result<KummerChecks> {
    BernoulliContext::new(pair.prime, 2)?.kummer_checks(pair)
}

/// Small deterministic list of odd primes in `[lo, hi)`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..hi).filter(|&n| is_odd_prime(n)).collect()
}

pub fn is_prime(n: u64) -> bool {
    n == 2 || is_odd_prime(n)
}

/// Residue of a scalar modulo `p^k`, as `u64` when it fits.
pub fn residue_u64(x: &PadicScalar, k: u32) -> Result<u64> {
    x.residue(k)?
        .to_u64()
        .ok_or_else(|| Error::precondition("residue does not fit in u64"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b2_for_p5() {
        let bank = bernoulli_bank(5, 3).unwrap();
        let b2 = bank.get(2).unwrap();
        assert_eq!(b2.valuation(), Some(0));
        // 6 * 21 = 126 = 1 mod 125
        assert_eq!(b2.residue(3).unwrap(), BigUint::from(21u32));
    }

    #[test]
    fn b1_is_minus_half() {
        let bank = bernoulli_bank(7, 3).unwrap();
        let half = PadicScalar::from_ratio(7, -1, 2, 3).unwrap();
        assert!(bank.get(1).unwrap().eq_at_precision(&half));
    }

    #[test]
    fn von_staudt_denominator() {
        for p in [5u64, 7, 11, 13, 37, 101] {
            let bank = bernoulli_bank(p, 2).unwrap();
            let b = bank.get((p - 1) as usize).unwrap();
            assert_eq!(b.valuation(), Some(-1));
            let pb = b.shift(1);
            assert_eq!(pb.residue(1).unwrap(), BigUint::from(p - 1));
        }
    }

    #[test]
    fn irregular_examples() {
        assert_eq!(irregular_pairs_for(5).unwrap().1, 0);
        let (pairs, r) = irregular_pairs_for(37).unwrap();
        assert_eq!(r, 1);
        assert_eq!(pairs[0].even_index, 32);
        assert_eq!(pairs[0].twist, 31);
        assert_eq!(pairs[0].component_index, 5);
        let (pairs, r) = irregular_pairs_for(157).unwrap();
        assert_eq!(r, 2);
        assert_eq!(
            pairs.iter().map(|x| x.even_index).collect::<Vec<_>>(),
            vec![62, 110]
        );
    }

    #[test]
    fn fast_and_reference_banks_agree() {
        for p in [5u64, 37, 59] {
            let a = bernoulli_bank(p, 3).unwrap();
            let b = bernoulli_bank_reference(p, 3).unwrap();
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn b1_even_twist_vanishes_and_trivial_rejected() {
        assert!(gen_bernoulli_b1(2, 7, 3).unwrap().is_zero());
        assert!(gen_bernoulli_b1(6, 7, 3).is_err());
    }

    #[test]
    fn b1_valuation_at_37() {
        let b = gen_bernoulli_b1(31, 37, 3).unwrap();
        assert_eq!(b.valuation(), Some(1));
        // regular prime, t = 1: B_{1,omega} is a unit
        assert_eq!(gen_bernoulli_b1(1, 11, 3).unwrap().valuation(), Some(0));
    }

    #[test]
    fn bm_trivial_character_identity() {
        let ctx = BernoulliContext::new(11, 3).unwrap();
        for m in [2u64, 4, 6, 12] {
            let got = ctx.bm(m, 0).unwrap();
            let bm = ctx.bank().get(m as usize).unwrap();
            let euler = &PadicScalar::one(11, 12) - &PadicScalar::one(11, 12).shift(m as i64 - 1);
            assert!(got.eq_at_precision(&(&euler * bm)), "m = {m}");
        }
    }

    #[test]
    fn bm_with_m1_matches_b1() {
        let ctx = BernoulliContext::new(13, 3).unwrap();
        for t in [1i64, 3, 5, 7, 9] {
            let a = ctx.bm(1, t).unwrap();
            let b = ctx.b1(t).unwrap();
            assert!(a.eq_at_precision(&b), "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn bm_at_irregular_pair_is_divisible() {
        let ctx = BernoulliContext::new(37, 3).unwrap();
        let x = ctx.bm(32, 0).unwrap();
        let y = x
            .try_div(&PadicScalar::from_integer(37, 32, 8))
            .unwrap();
        assert!(y.valuation_lower_bound() >= 1);
    }

    #[test]
    fn kummer_examples() {
        let pair = IrregularPair::new(37, 32).unwrap();
        let k = kummer_checks(&pair).unwrap();
        assert!(k.check1 && k.check2);
        for e in [62u64, 110] {
            let k = kummer_checks(&IrregularPair::new(157, e).unwrap()).unwrap();
            assert!(k.check1 && k.check2, "e = {e}");
        }
        let regular = IrregularPair::new(37, 10).unwrap();
        assert!(matches!(
            kummer_checks(&regular),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn pair_bookkeeping_rejects_bad_indices() {
        assert!(IrregularPair::new(37, 33).is_err());
        assert!(IrregularPair::new(37, 36).is_err());
        assert!(IrregularPair::new(37, 0).is_err());
    }
}
