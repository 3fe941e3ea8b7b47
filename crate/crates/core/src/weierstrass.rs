//! Weierstrass preparation `f = g * u` at finite precision, and the
//! Eisenstein certificate for `g`.
//!
//! Write `f = P + T^lambda U` with `deg P < lambda` and `U(0)` a unit. The
//! inverse cofactor `q = u^{-1}` is the fixed point of
//! `q = U^{-1} (1 - tau(q P))`, where `tau` drops the terms below `T^lambda`
//! and divides by `T^lambda`. Because `P = 0 mod p` the map contracts by `p`.
//! Coefficients beyond the truncation are carried as integral unknowns, so the
//! tracked precision of every output coefficient is honest.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::bernoulli::IrregularPair;
use crate::error::{AnomalyKind, Error, Result};
use crate::series::SeriesApprox;
use crate::padic::PadicScalar;

/// Monic `g = T^lambda + a'_{lambda-1} T^{lambda-1} + ... + a'_0` with the
/// unit cofactor `u` such that `f = g u`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistinguishedPoly {
    pub prime: u64,
    pub degree: u32,
    /// `a'_0 ... a'_{lambda-1}`; the leading 1 is implicit.
    pub coeffs: Vec<PadicScalar>,
    pub eisenstein: bool,
    pub unit_cofactor: SeriesApprox,
    /// `f - g u = 0 mod (p^K', T^N')`
    pub residual_precision: i64,
    pub residual_terms: usize,
}

impl DistinguishedPoly {
    /// A polynomial given directly by its lower coefficients, with `u = 1`.
    pub fn from_coeffs(pair: IrregularPair, coeffs: Vec<PadicScalar>) -> Result<Self> {
        let p = pair.prime;
        for (j, a) in coeffs.iter().enumerate() {
            if a.prime() != p {
                return Err(Error::PrimeMismatch(a.prime(), p));
            }
            if a.valuation_lower_bound() < 1 {
                return Err(Error::precondition(format!(
                    "coefficient a'_{j} = {a} is not in pZ_p"
                )));
            }
        }
        let prec = coeffs.iter().map(|a| a.abs_precision()).min().unwrap_or(64);
        let one = PadicScalar::one(p, prec.max(1) as u32);
        Ok(DistinguishedPoly {
            prime: p,
            degree: coeffs.len() as u32,
            eisenstein: coeffs.first().map(|a| a.valuation() == Some(1)).unwrap_or(false),
            unit_cofactor: series_from(pair, vec![one]),
            coeffs,
            residual_precision: prec,
            residual_terms: usize::MAX,
        })
    }

    /// Lifted integer coefficients `a'_0 .. a'_{lambda-1}, 1`.
    pub fn lifted(&self) -> Result<Vec<BigUint>> {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        for a in &self.coeffs {
            out.push(a.lift()?);
        }
        out.push(BigUint::from(1u32));
        Ok(out)
    }

    /// Smallest absolute precision among the lower coefficients.
    pub fn coefficient_precision(&self) -> i64 {
        self.coeffs.iter().map(|a| a.abs_precision()).min().unwrap_or(i64::MAX)
    }
}

fn series_from(pair: IrregularPair, coeffs: Vec<PadicScalar>) -> SeriesApprox {
    let determined_mod = coeffs
        .iter()
        .map(|c| c.abs_precision().clamp(0, i64::from(u32::MAX)) as u32)
        .collect();
    SeriesApprox {
        prime: pair.prime,
        pair,
        level: 0,
        coeffs,
        determined_mod,
    }
}

fn unknown(p: u64) -> PadicScalar {
    PadicScalar::zero(p, 0)
}

fn at(v: &[PadicScalar], k: usize, p: u64) -> PadicScalar {
    v.get(k).cloned().unwrap_or_else(|| unknown(p))
}

/// Product truncated below `T^len`. Missing coefficients of the series `a`
/// are unknown; `b` may be a polynomial, whose missing coefficients are zero.
fn mul_trunc(a: &[PadicScalar], b: &[PadicScalar], len: usize, p: u64) -> Vec<PadicScalar> {
    (0..len)
        .map(|k| {
            let mut s = PadicScalar::zero(p, i64::MAX / 4);
            for (j, bj) in b.iter().enumerate().take(k + 1) {
                s = &s + &(&at(a, k - j, p) * bj);
            }
            s
        })
        .collect()
}

fn inverse_trunc(u: &[PadicScalar], len: usize, p: u64) -> Result<Vec<PadicScalar>> {
    let v0 = u[0].inv()?;
    let mut v = vec![v0.clone()];
    for k in 1..len {
        let mut s = PadicScalar::zero(p, i64::MAX / 4);
        for i in 1..=k {
            s = &s + &(&at(u, i, p) * &v[k - i]);
        }
        v.push(-&(&v0 * &s));
    }
    Ok(v)
}

/// Number of series terms used for preparation at precision `K`.
pub fn preparation_window(lambda: u32, precision: u32, cap: usize) -> usize {
    let l = lambda.max(1) as usize;
    cap.min(lambda as usize + l * (precision as usize + 3)).max(lambda as usize + 1)
}

/// Factor `f = g u` with `g` distinguished of degree `lambda`.
pub fn weierstrass_prep(series: &SeriesApprox, lambda: u32) -> Result<DistinguishedPoly> {
    let p = series.prime;
    let lam = lambda as usize;
    let f = &series.coeffs;
    if lam >= f.len() {
        return Err(Error::precondition(format!(
            "lambda = {lambda} needs more than {} terms",
            f.len()
        )));
    }
    for (j, a) in f[..lam].iter().enumerate() {
        if a.valuation_lower_bound() < 1 {
            return Err(Error::precondition(format!(
                "a_{j} = {a} is not divisible by p below lambda"
            )));
        }
    }
    if f[lam].valuation() != Some(0) {
        return Err(Error::precondition(format!(
            "a_{lam} = {} is not a unit",
            f[lam]
        )));
    }
    if lam == 0 {
        let prec = f.iter().map(|a| a.abs_precision()).min().unwrap_or(0);
        return Ok(DistinguishedPoly {
            prime: p,
            degree: 0,
            coeffs: Vec::new(),
            eisenstein: false,
            unit_cofactor: series.clone(),
            residual_precision: prec,
            residual_terms: f.len(),
        });
    }

    let max_prec = f.iter().map(|a| a.abs_precision()).max().unwrap_or(1) as u32;
    let window = preparation_window(lambda, max_prec, f.len());
    let f = &f[..window];
    let big_p = &f[..lam];
    let big_u = &f[lam..];
    let len = big_u.len();
    let u_inv = inverse_trunc(big_u, len, p)?;

    let one = PadicScalar::one(p, max_prec + 8);
    let mut q = u_inv.clone();
    let max_iter = 4 * (max_prec as usize + len) + 8;
    let mut converged = false;
    for _ in 0..max_iter {
        let h = mul_trunc(&q, big_p, len + lam, p);
        let mut rhs: Vec<PadicScalar> = h[lam..].iter().map(|x| -x).collect();
        rhs[0] = &rhs[0] + &one;
        let next = mul_trunc(&u_inv, &rhs, len, p);
        if next == q {
            converged = true;
            break;
        }
        q = next;
    }
    if !converged {
        return Err(Error::internal("Weierstrass iteration did not stabilize"));
    }

    let qf = mul_trunc(&q, f, window, p);
    let g: Vec<PadicScalar> = qf[..lam].to_vec();
    let u = inverse_trunc(&q, len, p)?;

    // residual f - g u, with g monic of degree lambda
    let mut g_full = g.clone();
    g_full.push(PadicScalar::one(p, max_prec + 8));
    let gu = mul_trunc(&u, &g_full, window, p);
    let mut terms = 0usize;
    let mut kprime = i64::MAX;
    for k in 0..window {
        let r = f[k].try_sub(&gu[k])?;
        if !r.is_zero() {
            return Err(Error::internal(format!(
                "Weierstrass residual at T^{k} is {r}"
            )));
        }
        if r.abs_precision() < 1 {
            break;
        }
        kprime = kprime.min(r.abs_precision());
        terms = k + 1;
    }
    if terms <= lam {
        return Err(Error::PrecisionExhausted(format!(
            "Weierstrass residual certified only below T^{terms}"
        )));
    }
    for (j, a) in g.iter().enumerate() {
        if a.valuation_lower_bound() < 1 {
            return Err(Error::PrecisionExhausted(format!(
                "a'_{j} = {a} not certified divisible by p"
            )));
        }
    }
    let eisenstein = g[0].valuation() == Some(1);
    let mut unit_cofactor = series_from(series.pair, u);
    unit_cofactor.level = series.level;
    Ok(DistinguishedPoly {
        prime: p,
        degree: lambda,
        coeffs: g,
        eisenstein,
        unit_cofactor,
        residual_precision: kprime,
        residual_terms: terms,
    })
}

/// Machine-readable evidence that `g` is Eisenstein of degree below `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EisensteinCertificate {
    pub prime: u64,
    pub degree: u32,
    pub a0_val: i64,
    /// `a'_0 mod p^2`
    pub a0_mod_p2: String,
    /// Certified lower bounds on `v(a'_j)`.
    pub coefficient_valuations: Vec<i64>,
    /// `a'_j` is known modulo `p^{coefficient_precisions[j]}`.
    pub coefficient_precisions: Vec<i64>,
    /// Eisenstein, hence irreducible.
    pub irreducible: bool,
}

pub fn eisenstein_certificate(g: &DistinguishedPoly) -> Result<EisensteinCertificate> {
    let p = g.prime;
    let fail = |detail: String| Err(Error::anomaly(AnomalyKind::EisensteinFailure, detail));
    if g.degree == 0 || g.coeffs.is_empty() {
        return Err(Error::precondition("constant g has no Eisenstein certificate"));
    }
    if u64::from(g.degree) > p - 1 {
        return fail(format!("degree {} exceeds p - 1 = {}", g.degree, p - 1));
    }
    for (j, a) in g.coeffs.iter().enumerate() {
        if a.valuation_lower_bound() < 1 {
            return fail(format!("a'_{j} = {a} has valuation 0"));
        }
    }
    let a0 = &g.coeffs[0];
    let a0_val = match a0.valuation() {
        Some(v) => v,
        None if a0.abs_precision() >= 2 => {
            return fail(format!(
                "val(a'_0) >= {} (a'_0 vanishes mod p^{})",
                a0.abs_precision(),
                a0.abs_precision()
            ))
        }
        None => {
            return Err(Error::PrecisionExhausted(format!(
                "a'_0 known only mod p^{}",
                a0.abs_precision()
            )))
        }
    };
    if a0_val != 1 {
        return fail(format!("val(a'_0) = {a0_val}"));
    }
    Ok(EisensteinCertificate {
        prime: p,
        degree: g.degree,
        a0_val,
        a0_mod_p2: a0.residue(2)?.to_string(),
        coefficient_valuations: g.coeffs.iter().map(|a| a.valuation_lower_bound()).collect(),
        coefficient_precisions: g.coeffs.iter().map(|a| a.abs_precision()).collect(),
        irreducible: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::build_series;

    fn int(p: u64, n: i64, prec: u32) -> PadicScalar {
        PadicScalar::from_integer(p, n, prec)
    }

    fn synthetic(p: u64, coeffs: &[i64], prec: u32) -> SeriesApprox {
        let pair = IrregularPair::new(p, 2).unwrap();
        let c: Vec<PadicScalar> = coeffs
            .iter()
            .map(|&x| PadicScalar::from_residue(p, &BigUint::from(x.rem_euclid(p.pow(prec) as i64) as u64), prec))
            .collect();
        series_from(pair, c)
    }

    #[test]
    fn already_distinguished() {
        let s = synthetic(5, &[5, 1, 0, 0, 0, 0, 0, 0], 6);
        let g = weierstrass_prep(&s, 1).unwrap();
        assert_eq!(g.degree, 1);
        assert!(g.coeffs[0].eq_at_precision(&int(5, 5, 6)));
        assert!(g.unit_cofactor.coeffs[0].eq_at_precision(&int(5, 1, 6)));
        for c in &g.unit_cofactor.coeffs[1..] {
            assert!(c.is_zero());
        }
        assert!(g.eisenstein);
        assert!(eisenstein_certificate(&g).unwrap().irreducible);
    }

    #[test]
    fn unit_series_has_trivial_g() {
        let s = synthetic(7, &[3, 1, 4], 4);
        let g = weierstrass_prep(&s, 0).unwrap();
        assert_eq!(g.degree, 0);
        assert!(g.coeffs.is_empty());
        assert_eq!(g.unit_cofactor.coeffs, s.coeffs);
    }

    #[test]
    fn two_factor_product_recovered() {
        // (T^2 + 7T + 14) * (3 + T + 2T^2) with p = 7
        let p = 7;
        let g = [14i64, 7, 1];
        let u = [3i64, 1, 2];
        let mut f = vec![0i64; 10];
        for (i, a) in g.iter().enumerate() {
            for (j, b) in u.iter().enumerate() {
                f[i + j] += a * b;
            }
        }
        let s = synthetic(p, &f, 6);
        let d = weierstrass_prep(&s, 2).unwrap();
        assert!(d.coeffs[0].eq_at_precision(&int(p, 14, 6)));
        assert!(d.coeffs[1].eq_at_precision(&int(p, 7, 6)));
        assert!(d.residual_precision >= 1);
        assert!(d.residual_terms > 2);
        assert!(d.eisenstein);
    }

    #[test]
    fn p37_constant_term_closed_form() {
        let pair = IrregularPair::new(37, 32).unwrap();
        let s = build_series(&pair, 1, 37, 4).unwrap();
        let g = weierstrass_prep(&s, 1).unwrap();
        let a1 = s.coeffs[1].residue(1).unwrap();
        let inv = a1.modinv(&BigUint::from(37u32)).unwrap();
        let expect = (s.coeffs[0].residue(2).unwrap() * inv) % BigUint::from(37u32 * 37);
        assert_eq!(g.coeffs[0].residue(2).unwrap(), expect);
        let cert = eisenstein_certificate(&g).unwrap();
        assert_eq!(cert.a0_val, 1);
        assert_eq!(cert.degree, 1);
    }

    #[test]
    fn deterministic() {
        let pair = IrregularPair::new(157, 62).unwrap();
        let s = build_series(&pair, 1, 64, 4).unwrap();
        assert_eq!(weierstrass_prep(&s, 1).unwrap(), weierstrass_prep(&s, 1).unwrap());
    }

    #[test]
    fn non_eisenstein_synthetic_fails() {
        let pair = IrregularPair::new(5, 2).unwrap();
        let g = DistinguishedPoly::from_coeffs(pair, vec![int(5, 25, 6), int(5, 5, 6)]).unwrap();
        assert!(!g.eisenstein);
        match eisenstein_certificate(&g) {
            Err(Error::Anomaly { kind, detail }) => {
                assert_eq!(kind, AnomalyKind::EisensteinFailure);
                assert!(detail.contains("= 2"), "{detail}");
            }
            other => panic!("{other:?}"),
        }
        let h = DistinguishedPoly::from_coeffs(pair, vec![int(5, 5, 6)]).unwrap();
        assert!(eisenstein_certificate(&h).is_ok());
    }

    #[test]
    fn preconditions() {
        let s = synthetic(5, &[1, 1, 0], 4);
        assert!(matches!(weierstrass_prep(&s, 1), Err(Error::Precondition(_))));
        let s = synthetic(5, &[5, 5, 0], 4);
        assert!(matches!(weierstrass_prep(&s, 1), Err(Error::Precondition(_))));
    }
}
