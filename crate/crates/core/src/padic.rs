//! Finite-precision p-adic scalars.
//!
//! A [`PadicScalar`] stores `p^val * unit` where `unit` is a residue modulo
//! `p^relprec` coprime to `p`. The represented value is therefore known modulo
//! `p^(val + relprec)`, its absolute precision. A value whose known digits are
//! all zero collapses to a canonical zero that only remembers its absolute
//! precision.
//!
//! Precision rules:
//! - `x + y`, `x - y`: absolute precision is the minimum of the operands';
//!   cancellation shows up as a smaller relative precision of the result.
//! - `x * y`, `x / y`: relative precision is the minimum of the operands'.
//! - Exact integers are built with an explicit relative precision, so pick one
//!   at least as large as the computation needs.

use std::cmp::{max, min};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default relative precision (in p-adic digits) for internal computation.
pub const DEFAULT_RELPREC: u32 = 8;

/// `p^k` as a big integer.
pub fn pow_p(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation_u(p: u64, x: &BigUint) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pb = BigUint::from(p);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

pub fn valuation_u64(p: u64, mut x: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// Inverse of a unit modulo `m`.
pub fn inv_mod(x: &BigUint, m: &BigUint) -> Result<BigUint> {
    if m.is_one() {
        return Ok(BigUint::zero());
    }
    x.modinv(m).ok_or(Error::DivisionByZero)
}

/// Reduce a signed integer into `[0, m)`.
pub fn mod_signed(x: &BigInt, m: &BigUint) -> BigUint {
    let mi = BigInt::from(m.clone());
    let r = x.mod_floor(&mi);
    r.to_biguint().expect("mod_floor is non-negative")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    prime: u64,
    /// Valuation; for a zero this is the absolute precision.
    val: i64,
    unit: BigUint,
    relprec: u32,
    is_zero: bool,
}

impl PadicScalar {
    /// Zero known modulo `p^absprec`.
    pub fn zero(prime: u64, absprec: i64) -> Self {
        PadicScalar {
            prime,
            val: absprec,
            unit: BigUint::zero(),
            relprec: 0,
            is_zero: true,
        }
    }

    pub fn one(prime: u64, relprec: u32) -> Self {
        Self::from_integer(prime, 1, relprec)
    }

    /// An exact integer, kept to `relprec` relative digits.
    pub fn from_integer(prime: u64, n: impl Into<BigInt>, relprec: u32) -> Self {
        let n: BigInt = n.into();
        if n.is_zero() {
            return Self::zero(prime, i64::from(relprec));
        }
        let mag = n.magnitude();
        let v = valuation_u(prime, mag).expect("nonzero");
        let unit_abs = mag / pow_p(prime, v);
        let unit = if n.sign() == Sign::Minus {
            mod_signed(&-BigInt::from(unit_abs), &pow_p(prime, relprec))
        } else {
            unit_abs % pow_p(prime, relprec)
        };
        PadicScalar {
            prime,
            val: i64::from(v),
            unit,
            relprec,
            is_zero: false,
        }
    }

    /// The rational `num/den`, kept to `relprec` relative digits.
    pub fn from_ratio(
        prime: u64,
        num: impl Into<BigInt>,
        den: impl Into<BigInt>,
        relprec: u32,
    ) -> Result<Self> {
        let den: BigInt = den.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = Self::from_integer(prime, num, relprec);
        let d = Self::from_integer(prime, den, relprec);
        n.try_div(&d)
    }

    /// The value `p^shift * r` where the residue `r` is known modulo `p^prec`.
    pub fn from_residue_shifted(prime: u64, r: &BigUint, prec: u32, shift: i64) -> Self {
        let m = pow_p(prime, prec);
        let r = r % &m;
        match valuation_u(prime, &r) {
            None => Self::zero(prime, shift + i64::from(prec)),
            Some(v) => {
                let relprec = prec - v;
                let unit = r / pow_p(prime, v);
                PadicScalar {
                    prime,
                    val: shift + i64::from(v),
                    unit,
                    relprec,
                    is_zero: false,
                }
            }
        }
    }

    /// A residue modulo `p^prec`.
    pub fn from_residue(prime: u64, r: &BigUint, prec: u32) -> Self {
        Self::from_residue_shifted(prime, r, prec, 0)
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero
    }

    /// Valuation, `None` for a zero.
    pub fn valuation(&self) -> Option<i64> {
        (!self.is_zero).then_some(self.val)
    }

    /// Largest `v` such that the value is certainly divisible by `p^v`.
    pub fn valuation_lower_bound(&self) -> i64 {
        self.val
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    pub fn relprec(&self) -> u32 {
        self.relprec
    }

    /// The value is known modulo `p^abs_precision()`.
    pub fn abs_precision(&self) -> i64 {
        if self.is_zero {
            self.val
        } else {
            self.val + i64::from(self.relprec)
        }
    }

    fn check_prime(&self, other: &Self) -> Result<()> {
        if self.prime != other.prime {
            return Err(Error::PrimeMismatch(self.prime, other.prime));
        }
        Ok(())
    }

    /// Forget digits at or beyond `p^absprec`.
    pub fn cap_abs(&self, absprec: i64) -> Self {
        if self.is_zero {
            return Self::zero(self.prime, min(self.val, absprec));
        }
        if self.val >= absprec {
            return Self::zero(self.prime, absprec);
        }
        let keep = min(i64::from(self.relprec), absprec - self.val) as u32;
        if keep == self.relprec {
            return self.clone();
        }
        PadicScalar {
            prime: self.prime,
            val: self.val,
            unit: &self.unit % pow_p(self.prime, keep),
            relprec: keep,
            is_zero: false,
        }
    }

    /// Multiply by `p^k` (exact).
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.val += k;
        out
    }

    /// Representative in `[0, p^abs_precision())` of a value with non-negative valuation.
    pub fn lift(&self) -> Result<BigUint> {
        if self.val < 0 && !self.is_zero {
            return Err(Error::precondition(format!(
                "cannot lift a value of negative valuation {}",
                self.val
            )));
        }
        if self.is_zero {
            return Ok(BigUint::zero());
        }
        Ok(&self.unit * pow_p(self.prime, self.val as u32))
    }

    /// The value modulo `p^k`, which must not exceed the known precision.
    pub fn residue(&self, k: u32) -> Result<BigUint> {
        if i64::from(k) > self.abs_precision() {
            return Err(Error::PrecisionExhausted(format!(
                "residue mod p^{k} requested, value known mod p^{}",
                self.abs_precision()
            )));
        }
        if self.is_zero || self.val >= i64::from(k) {
            return Ok(BigUint::zero());
        }
        Ok(self.lift()? % pow_p(self.prime, k))
    }

    /// Signed representative with smallest absolute value, for display.
    pub fn to_rational_string(&self) -> String {
        if self.is_zero {
            return format!("O({}^{})", self.prime, self.val);
        }
        format!(
            "{}^{} * {} + O({}^{})",
            self.prime,
            self.val,
            self.unit,
            self.prime,
            self.abs_precision()
        )
    }

    pub fn try_neg(&self) -> Self {
        if self.is_zero {
            return self.clone();
        }
        let m = pow_p(self.prime, self.relprec);
        PadicScalar {
            prime: self.prime,
            val: self.val,
            unit: &m - &self.unit,
            relprec: self.relprec,
            is_zero: false,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        let abs = min(self.abs_precision(), other.abs_precision());
        if self.is_zero {
            return Ok(other.cap_abs(abs));
        }
        if other.is_zero {
            return Ok(self.cap_abs(abs));
        }
        let vmin = min(self.val, other.val);
        if vmin >= abs {
            return Ok(Self::zero(self.prime, abs));
        }
        let prec = (abs - vmin) as u32;
        let x = &self.unit * pow_p(self.prime, (self.val - vmin) as u32);
        let y = &other.unit * pow_p(self.prime, (other.val - vmin) as u32);
        Ok(Self::from_residue_shifted(self.prime, &(x + y), prec, vmin))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.try_neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        match (self.is_zero, other.is_zero) {
            (true, true) => return Ok(Self::zero(self.prime, self.val + other.val)),
            (true, false) => return Ok(Self::zero(self.prime, self.val + other.val)),
            (false, true) => return Ok(Self::zero(self.prime, self.val + other.val)),
            (false, false) => {}
        }
        let k = min(self.relprec, other.relprec);
        let m = pow_p(self.prime, k);
        Ok(PadicScalar {
            prime: self.prime,
            val: self.val + other.val,
            unit: (&self.unit * &other.unit) % m,
            relprec: k,
            is_zero: false,
        })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check_prime(other)?;
        if other.is_zero {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero {
            return Ok(Self::zero(self.prime, self.val - other.val));
        }
        let k = min(self.relprec, other.relprec);
        let m = pow_p(self.prime, k);
        let inv = inv_mod(&(&other.unit % &m), &m)?;
        Ok(PadicScalar {
            prime: self.prime,
            val: self.val - other.val,
            unit: (&self.unit * inv) % m,
            relprec: k,
            is_zero: false,
        })
    }

    pub fn inv(&self) -> Result<Self> {
        Self::one(self.prime, max(self.relprec, 1)).try_div(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::one(self.prime, max(self.relprec, 1));
        }
        if self.is_zero {
            return Self::zero(self.prime, self.val.saturating_mul(i64::from(e)));
        }
        PadicScalar {
            prime: self.prime,
            val: self.val * i64::from(e),
            unit: self.unit.modpow(&BigUint::from(e), &pow_p(self.prime, self.relprec)),
            relprec: self.relprec,
            is_zero: false,
        }
    }

    /// Equality at the coarser of the two precisions.
    pub fn eq_at_precision(&self, other: &Self) -> bool {
        self.prime == other.prime
            && self.try_sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }

    /// Signed integer representative (for small values in diagnostics).
    pub fn to_i128_lift(&self) -> Option<i128> {
        if self.is_zero {
            return Some(0);
        }
        if self.val < 0 {
            return None;
        }
        let m = pow_p(self.prime, (self.val + i64::from(self.relprec)) as u32);
        let x = self.lift().ok()?;
        let half = &m >> 1u32;
        if x > half {
            (BigInt::from(x) - BigInt::from(m)).to_i128()
        } else {
            x.to_i128()
        }
    }
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational_string())
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational_string())
    }
}

// Operator sugar for code that only ever mixes scalars of one prime. Mixing
// primes here is a logic error and panics; use the `try_*` methods otherwise.
impl Add for &PadicScalar {
    type Output = PadicScalar;
    fn add(self, rhs: &PadicScalar) -> PadicScalar {
        self.try_add(rhs).expect("p-adic add")
    }
}

impl Sub for &PadicScalar {
    type Output = PadicScalar;
    fn sub(self, rhs: &PadicScalar) -> PadicScalar {
        self.try_sub(rhs).expect("p-adic sub")
    }
}

impl Mul for &PadicScalar {
    type Output = PadicScalar;
    fn mul(self, rhs: &PadicScalar) -> PadicScalar {
        self.try_mul(rhs).expect("p-adic mul")
    }
}

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        self.try_neg()
    }
}

/// Four-function arithmetic with error reporting.
pub fn arith(op: ArithOp, x: &PadicScalar, y: &PadicScalar) -> Result<PadicScalar> {
    match op {
        ArithOp::Add => x.try_add(y),
        ArithOp::Sub => x.try_sub(y),
        ArithOp::Mul => x.try_mul(y),
        ArithOp::Div => x.try_div(y),
    }
}

/// Teichmüller representatives `b -> omega(b) mod p^m` for `b` in `1..p`.
#[derive(Clone, Debug)]
pub struct TeichTable {
    prime: u64,
    modulus_exponent: u32,
    modulus: BigUint,
    table: Vec<BigUint>,
}

impl TeichTable {
    pub fn new(prime: u64, modulus_exponent: u32) -> Self {
        assert!(modulus_exponent >= 1, "modulus exponent must be positive");
        let modulus = pow_p(prime, modulus_exponent);
        let e = pow_p(prime, modulus_exponent - 1);
        let table = (1..prime)
            .map(|b| BigUint::from(b).modpow(&e, &modulus))
            .collect();
        TeichTable {
            prime,
            modulus_exponent,
            modulus,
            table,
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn modulus_exponent(&self) -> u32 {
        self.modulus_exponent
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// `omega(b) mod p^m`; `b` is reduced mod p and must be a unit.
    pub fn get(&self, b: u64) -> &BigUint {
        let r = b % self.prime;
        assert!(r != 0, "Teichmüller character undefined at multiples of p");
        &self.table[(r - 1) as usize]
    }

    /// `omega(b)^t mod p^m` for any integer exponent `t` (taken mod p-1).
    pub fn power(&self, b: u64, t: i64) -> BigUint {
        let e = t.rem_euclid(self.prime as i64 - 1) as u64;
        self.get(b).modpow(&BigUint::from(e), &self.modulus)
    }

    /// All values `omega(b)^t` for `b = 1..p-1`.
    pub fn powers(&self, t: i64) -> Vec<BigUint> {
        (1..self.prime).map(|b| self.power(b, t)).collect()
    }
}

/// Teichmüller lift of `b` at precision `p^m` as a scalar.
pub fn teichmuller(prime: u64, b: u64, m: u32) -> Result<PadicScalar> {
    if b.is_multiple_of(prime) {
        return Err(Error::precondition(format!(
            "Teichmüller lift of {b}: divisible by p = {prime}"
        )));
    }
    if m == 0 {
        return Err(Error::precondition("modulus exponent must be positive"));
    }
    let modulus = pow_p(prime, m);
    let e = pow_p(prime, m - 1);
    let w = BigUint::from(b % prime).modpow(&e, &modulus);
    Ok(PadicScalar::from_residue(prime, &w, m))
}

fn floor_log(p: u64, m: u64) -> u32 {
    let mut k = 0;
    let mut q = p;
    while q <= m {
        k += 1;
        match q.checked_mul(p) {
            Some(n) => q = n,
            None => break,
        }
    }
    k
}

/// p-adic logarithm of a principal unit, known modulo `p^min(outprec, abs(x))`.
pub fn padic_log(x: &PadicScalar, outprec: i64) -> Result<PadicScalar> {
    let p = x.prime();
    let one = PadicScalar::one(p, max(x.relprec(), 1));
    let principal = !x.is_zero()
        && x.val == 0
        && x.relprec >= 1
        && (&x.unit % BigUint::from(p)).is_one();
    if !principal {
        return Err(Error::NotPrincipalUnit(format!("{x}")));
    }
    let target = min(outprec, x.abs_precision());
    let y = x.try_sub(&one)?;
    let Some(vy) = y.valuation() else {
        return Ok(PadicScalar::zero(p, target));
    };
    let mut sum = PadicScalar::zero(p, target);
    let mut power = y.clone();
    let mut m: u64 = 1;
    // m*v(y) - floor(log_p m) is increasing in m, so stop at the first term
    // that lies entirely below the target precision.
    while (m as i64) * vy - i64::from(floor_log(p, m)) < target {
        let term = power.try_div(&PadicScalar::from_integer(p, m, x.relprec() + 8))?;
        sum = if m % 2 == 1 {
            sum.try_add(&term)?
        } else {
            sum.try_sub(&term)?
        };
        power = power.try_mul(&y)?;
        m += 1;
    }
    Ok(sum.cap_abs(target))
}

/// Discrete logarithm to base `1 + p`: the residue `s mod p^n` with
/// `(1 + p)^s = a mod p^(n+1)`.
pub fn dlog_gamma(prime: u64, a: &BigUint, n: u32) -> Result<BigUint> {
    let modulus = pow_p(prime, n + 1);
    let a = a % &modulus;
    if (&a % BigUint::from(prime)) != BigUint::one() {
        return Err(Error::NotPrincipalUnit(format!("{a} (p = {prime})")));
    }
    if n == 0 {
        return Ok(BigUint::zero());
    }
    let x = PadicScalar::from_residue(prime, &a, n + 1);
    let gamma = PadicScalar::from_integer(prime, prime + 1, n + 2);
    let la = padic_log(&x, i64::from(n) + 1)?;
    let lg = padic_log(&gamma, i64::from(n) + 2)?;
    let ratio = la.try_div(&lg)?;
    let s = ratio.residue(n)?;
    let check = BigUint::from(prime + 1).modpow(&s, &modulus);
    if check != a {
        return Err(Error::internal(format!(
            "dlog round trip failed: (1+p)^{s} = {check} != {a} mod {prime}^{}",
            n + 1
        )));
    }
    Ok(s)
}

/// Signed integer helper used by callers holding `i64` data.
pub fn scalar_from_i64(prime: u64, n: i64, relprec: u32) -> PadicScalar {
    PadicScalar::from_integer(prime, BigInt::from(n), relprec)
}

/// Absolute value of a `BigInt` as `BigUint`.
pub fn abs_big(x: &BigInt) -> BigUint {
    x.abs().to_biguint().expect("abs is non-negative")
}
