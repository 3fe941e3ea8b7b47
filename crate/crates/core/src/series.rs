//! Iwasawa power series of an eigencomponent, built from finite-level
//! Stickelberger sums, and the lambda invariant read off its coefficients.
//!
//! At level `n` the series is
//!
//! ```text
//! F_n(T) = -(1/p^{n+1}) * sum_{j mod p^n} c_j (1+T)^j,
//! c_j    = sum_{b=1}^{p-1} rep(omega(b) (1+p)^{-j} mod p^{n+1}) * omega^{e-1}(b)
//! ```
//!
//! so the group-algebra exponent of `a` is `-sigma(a)` where
//! `a = omega(a) (1+p)^{sigma(a)}`. Coefficients `a_j` with `1 <= j < p` agree
//! with the limit series modulo `p^n`; `a_0` equals `-B_{1, omega^{e-1}}`
//! exactly.

use std::cmp::min;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::bernoulli::{gen_bernoulli_b1, BernoulliContext, IrregularPair};
use crate::error::{AnomalyKind, Error, Result};
use crate::padic::{pow_p, valuation_u64, PadicScalar, TeichTable};
use crate::residue::{with_ring, ResidueRing};

/// Largest `p^{n+1}` a build may touch by default.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Truncated power series attached to an irregular pair at a given level.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesApprox {
    pub prime: u64,
    pub pair: IrregularPair,
    pub level: u32,
    /// `a_0 ... a_{N-1}`
    pub coeffs: Vec<PadicScalar>,
    /// `a_j` is known modulo `p^{determined_mod[j]}`.
    pub determined_mod: Vec<u32>,
}

impl SeriesApprox {
    pub fn cap(&self) -> usize {
        self.coeffs.len()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub level: u32,
    pub cap: usize,
    pub precision: u32,
    pub budget: u64,
}

impl BuildOptions {
    pub fn new(level: u32, cap: usize, precision: u32) -> Self {
        BuildOptions {
            level,
            cap,
            precision,
            budget: DEFAULT_BUDGET,
        }
    }
}

fn floor_log(p: u64, j: u64) -> u32 {
    let mut k = 0;
    let mut q = p;
    while q <= j {
        k += 1;
        q = q.saturating_mul(p);
    }
    k
}

/// Precision to which coefficient `j` of a level-`n` build agrees with the
/// limit series: the generator `(1+T)^{p^n} - 1` has `v(C(p^n, k)) = n - v(k)`.
pub fn determined_precision(p: u64, level: u32, precision: u32, j: usize) -> u32 {
    if j == 0 {
        return precision;
    }
    min(precision, level.saturating_sub(floor_log(p, j as u64)))
}

/// Coefficients of `-sum_j d_j (1+T)^j` truncated below `T^cap`, where
/// `d_j = c_j / p^{n+1} mod p^K`.
fn stickelberger_kernel<R: ResidueRing>(
    ring_w: &R,
    p: u64,
    level: u32,
    weights: &[BigUint],
    flip_sign: bool,
) -> Result<Vec<BigUint>> {
    let f = p.pow(level + 1);
    let pn = p.pow(level) as usize;
    let gamma_inv = {
        let g = BigUint::from(p + 1);
        let fb = BigUint::from(f);
        g.modinv(&fb).and_then(|x| x.to_u64()).expect("1+p is a unit")
    };
    let step = if flip_sign { (p + 1) % f } else { gamma_inv };
    let teich_low = TeichTable::new(p, level + 1);
    let w_ring: Vec<R::Elem> = weights.iter().map(|w| ring_w.from_big(w)).collect();
    let mut c: Vec<R::Elem> = vec![ring_w.zero(); pn];
    for b in 1..p {
        let mut a = teich_low.get(b).to_u64().expect("below p^{n+1}");
        let w = &w_ring[(b - 1) as usize];
        for cj in c.iter_mut() {
            let term = ring_w.mul(&ring_w.from_u64(a), w);
            *cj = ring_w.add(cj, &term);
            a = ((u128::from(a) * u128::from(step)) % u128::from(f)) as u64;
        }
    }
    let fb = BigUint::from(f);
    let mut d: Vec<BigUint> = Vec::with_capacity(pn);
    for (j, cj) in c.iter().enumerate() {
        let x = ring_w.to_big(cj);
        if !(&x % &fb).is_zero() {
            return Err(Error::internal(format!(
                "Stickelberger coefficient c_{j} is not divisible by p^{}",
                level + 1
            )));
        }
        d.push(x / &fb);
    }
    Ok(d)
}

fn horner_binomial<R: ResidueRing>(ring: &R, d: &[BigUint], cap: usize) -> Vec<BigUint> {
    let mut poly: Vec<R::Elem> = vec![ring.zero(); cap];
    for dj in d.iter().rev() {
        // poly <- poly * (1 + T) + d_j
        for k in (1..cap).rev() {
            let prev = poly[k - 1].clone();
            poly[k] = ring.add(&poly[k], &prev);
        }
        poly[0] = ring.add(&poly[0], &ring.from_big(dj));
    }
    poly.iter().map(|x| ring.to_big(&ring.neg(x))).collect()
}

fn build(pair: &IrregularPair, opts: &BuildOptions, flip_sign: bool) -> Result<SeriesApprox> {
    let p = pair.prime;
    let n = opts.level;
    if n < 1 {
        return Err(Error::precondition("series level must be at least 1"));
    }
    if opts.precision < 1 {
        return Err(Error::precondition("series precision must be at least 1"));
    }
    let top = p
        .checked_pow(n + 1)
        .filter(|&x| x <= opts.budget)
        .ok_or_else(|| {
            Error::BudgetExceeded(format!(
                "level {n} for p = {p} needs p^{} > budget {}",
                n + 1,
                opts.budget
            ))
        })?;
    let pn = (top / p) as usize;
    if opts.cap < 1 || opts.cap > pn {
        return Err(Error::precondition(format!(
            "cap {} must lie in 1..={pn} (= p^n)",
            opts.cap
        )));
    }
    let k = opts.precision;
    let w = n + 1 + k;
    let teich = TeichTable::new(p, w);
    let weights = teich.powers(pair.twist as i64);
    let d = with_ring!(&pow_p(p, w), |ring| {
        stickelberger_kernel(ring, p, n, &weights, flip_sign)?
    });
    let raw = with_ring!(&pow_p(p, k), |ring| horner_binomial(ring, &d, opts.cap));
    let determined_mod: Vec<u32> = (0..opts.cap)
        .map(|j| determined_precision(p, n, k, j))
        .collect();
    let coeffs: Vec<PadicScalar> = raw
        .iter()
        .zip(&determined_mod)
        .map(|(r, &dj)| PadicScalar::from_residue(p, r, dj))
        .collect();
    let series = SeriesApprox {
        prime: p,
        pair: *pair,
        level: n,
        coeffs,
        determined_mod,
    };
    // constant-term gate against the independent character sum
    let b1 = gen_bernoulli_b1(pair.twist as i64, p, k)?;
    let gate = min(k, n + 1);
    let diff = series.coeffs[0].try_add(&b1)?.cap_abs(i64::from(gate));
    if !diff.is_zero() {
        return Err(Error::internal(format!(
            "a_0 = {} but -B_1 = {} at ({p}, {})",
            series.coeffs[0],
            b1.try_neg(),
            pair.even_index
        )));
    }
    Ok(series)
}

/// The level-`n` Stickelberger series of `pair`, truncated to `cap` terms.
pub fn build_series(pair: &IrregularPair, level: u32, cap: usize, precision: u32) -> Result<SeriesApprox> {
    build(pair, &BuildOptions::new(level, cap, precision), false)
}

pub fn build_series_with(pair: &IrregularPair, opts: &BuildOptions) -> Result<SeriesApprox> {
    build(pair, opts, false)
}

/// Fault injection: the build with the exponent sign flipped to `+sigma(a)`.
#[doc(hidden)]
pub fn build_series_flipped_sign(pair: &IrregularPair, opts: &BuildOptions) -> Result<SeriesApprox> {
    build(pair, opts, true)
}

/// `L_p(1-m, omega^e) = -(1/m) (1 - delta p^{m-1}) B_{m, omega^{e-m}}`.
///
/// The Euler factor appears exactly when `e = m mod (p-1)`, and
/// [`BernoulliContext::bm`] with the trivial twist already includes it.
pub fn l_value(ctx: &BernoulliContext, m: u64, e: u64) -> Result<PadicScalar> {
    let p = ctx.prime();
    if m == 0 {
        return Err(Error::precondition("l_value needs m >= 1"));
    }
    let b = ctx.bm(m, e as i64 - m as i64)?;
    let mm = PadicScalar::from_integer(p, m, ctx.precision() + 16);
    Ok(b.try_div(&mm)?.try_neg())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpolationCheck {
    pub m: u64,
    /// `v_p(F(T_s) - L_p(s))`, or the certified precision when the difference vanishes.
    pub residual: i64,
    /// Precision to which the difference is known.
    pub certified: i64,
}

impl InterpolationCheck {
    pub fn passed(&self) -> bool {
        self.residual >= self.certified
    }
}

/// Evaluate the series at `T = (1+p)^{1-m} - 1` and compare with `L_p(1-m, omega^e)`.
///
/// The certified bound is `min_j (d_j + j v(T))`, capped by `N v(T)` for the
/// dropped tail and by the precision of the L-value.
pub fn interpolation_check(
    series: &SeriesApprox,
    ctx: &BernoulliContext,
    m: u64,
) -> Result<InterpolationCheck> {
    let p = series.prime;
    let work = ctx.precision() + 16;
    let gamma = PadicScalar::from_integer(p, p + 1, work);
    let gs = gamma.pow((m - 1) as u32).inv()?;
    let t = gs.try_sub(&PadicScalar::one(p, work))?;
    let vt = if m == 1 {
        None
    } else {
        Some(1 + i64::from(valuation_u64(p, m - 1).unwrap_or(0)))
    };
    let mut value = PadicScalar::zero(p, i64::from(work) + 64);
    let mut tp = PadicScalar::one(p, work);
    for (j, a) in series.coeffs.iter().enumerate() {
        if j > 0 {
            if vt.is_none() {
                break;
            }
            tp = &tp * &t;
        }
        value = &value + &(a * &tp);
    }
    if let Some(vt) = vt {
        value = value.cap_abs(series.cap() as i64 * vt);
    }
    let l = l_value(ctx, m, series.pair.even_index)?;
    let diff = value.try_sub(&l)?;
    let certified = diff.abs_precision();
    if certified <= 0 {
        return Err(Error::PrecisionExhausted(format!(
            "interpolation at m = {m}: nothing certified"
        )));
    }
    Ok(InterpolationCheck {
        m,
        residual: diff.valuation().unwrap_or(certified),
        certified,
    })
}

/// First index `j` with `a_j` a p-adic unit.
pub fn lambda_invariant(series: &SeriesApprox) -> Result<u32> {
    let p = series.prime;
    let a0 = &series.coeffs[0];
    if a0.valuation() == Some(0) {
        return Err(Error::precondition(format!(
            "a_0 is a unit at ({p}, {}): regular index, lambda = 0",
            series.pair.even_index
        )));
    }
    let upto = min(series.cap(), p as usize);
    let mut all_zero = a0.is_zero();
    for j in 1..upto {
        if series.determined_mod[j] < 1 {
            return Err(Error::PrecisionExhausted(format!(
                "a_{j} is not determined mod p at level {}",
                series.level
            )));
        }
        let a = &series.coeffs[j];
        if a.valuation() == Some(0) {
            return Ok(j as u32);
        }
        all_zero &= a.is_zero();
    }
    let pe = (p, series.pair.even_index);
    if all_zero {
        Err(Error::anomaly(
            AnomalyKind::MuPositive,
            format!("{pe:?}: a_0..a_{} all vanish at precision", upto - 1),
        ))
    } else {
        Err(Error::anomaly(
            AnomalyKind::LambdaAtCap,
            format!("{pe:?}: no unit coefficient below index {upto}"),
        ))
    }
}
