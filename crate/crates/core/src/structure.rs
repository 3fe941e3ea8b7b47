//! Group structure of the eigencomponents `Z_p[T]/(g, (1+T)^{p^n} - 1)` and
//! the structure predictions they are compared against.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bernoulli::IrregularPair;
use crate::error::{AnomalyKind, Error, Result};
use crate::padic::pow_p;
use crate::snf::{det_valuation, smith_valuations, Matrix};
use crate::weierstrass::DistinguishedPoly;

/// `⊕_j Z/p^{e_j}` with exponents in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupStructure {
    pub prime: u64,
    pub exponents: Vec<u32>,
}

impl GroupStructure {
    /// Sorts descending and drops trivial factors.
    pub fn new(prime: u64, mut exponents: Vec<u32>) -> Self {
        exponents.retain(|&e| e > 0);
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        GroupStructure { prime, exponents }
    }

    pub fn trivial(prime: u64) -> Self {
        GroupStructure {
            prime,
            exponents: Vec::new(),
        }
    }

    pub fn order_exponent(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn max_exponent(&self) -> u32 {
        self.exponents.first().copied().unwrap_or(0)
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.is_empty()
    }

    /// `self` embeds in `other` factor by factor (there are at most as many
    /// factors, each no larger).
    pub fn embeds_in(&self, other: &GroupStructure) -> bool {
        self.exponents.len() <= other.exponents.len()
            && self
                .exponents
                .iter()
                .zip(&other.exponents)
                .all(|(a, b)| a <= b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentResult {
    pub pair: IrregularPair,
    pub level: u32,
    pub lambda: u32,
    pub structure: GroupStructure,
    pub order_via_resultant: u32,
}

/// Working exponent for the multiplication matrix.
pub fn default_working_exponent(lambda: u32, level: u32) -> u32 {
    lambda * (level + 1) + 4
}

/// Polynomials modulo a monic `g` and `p^M`, coefficients stored low to high.
struct QuotientRing {
    g: Vec<BigUint>,
    m: BigUint,
}

impl QuotientRing {
    fn degree(&self) -> usize {
        self.g.len() - 1
    }

    fn reduce(&self, mut a: Vec<BigUint>) -> Vec<BigUint> {
        let d = self.degree();
        while a.len() > d {
            let top = a.pop().expect("nonempty") % &self.m;
            if top.is_zero() {
                continue;
            }
            let shift = a.len() - d;
            for (i, gi) in self.g[..d].iter().enumerate() {
                let t = (&top * gi) % &self.m;
                let x = &a[shift + i] % &self.m;
                a[shift + i] = if x >= t { x - t } else { x + &self.m - t };
            }
        }
        a.resize(d, BigUint::zero());
        a.iter().map(|x| x % &self.m).collect()
    }

    fn mul(&self, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); a.len() + b.len()];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        self.reduce(out)
    }

    fn one_plus_t(&self) -> Vec<BigUint> {
        self.reduce(vec![BigUint::one(), BigUint::one()])
    }

    fn minus_one(&self, mut a: Vec<BigUint>) -> Vec<BigUint> {
        let m = &self.m;
        a[0] = (&a[0] + m - BigUint::one()) % m;
        a
    }

    fn pow(&self, a: &[BigUint], e: &BigUint) -> Vec<BigUint> {
        let mut acc = self.reduce(vec![BigUint::one()]);
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }
}

fn lifted_g(g: &DistinguishedPoly, m: &BigUint) -> Result<Vec<BigUint>> {
    Ok(g.lifted()?.into_iter().map(|x| x % m).collect())
}

fn multiplication_matrix(q: &QuotientRing, h: &[BigUint]) -> Matrix {
    let d = q.degree();
    let mut cols = Vec::with_capacity(d);
    let mut cur = h.to_vec();
    for _ in 0..d {
        cols.push(cur.clone());
        let mut shifted = vec![BigUint::zero()];
        shifted.extend(cur.iter().cloned());
        cur = q.reduce(shifted);
    }
    (0..d)
        .map(|i| (0..d).map(|k| cols[k][i].clone()).collect())
        .collect()
}

/// `v_p(Res(g, (1+T)^{p^n} - 1))` through `n` successive p-th powers and the
/// Sylvester determinant over `Z/p^{M'}`.
pub fn resultant_valuation(g: &DistinguishedPoly, level: u32) -> Result<u32> {
    let p = g.prime;
    let lam = g.degree as usize;
    if lam == 0 {
        return Err(Error::precondition("resultant needs lambda >= 1"));
    }
    let m_exp = g.degree * (level + 1) + 8;
    let m = pow_p(p, m_exp);
    let gl = lifted_g(g, &m)?;
    let q = QuotientRing { g: gl.clone(), m: m.clone() };
    let mut x = q.one_plus_t();
    for _ in 0..level {
        let base = x.clone();
        for _ in 1..p {
            x = q.mul(&x, &base);
        }
    }
    let r = q.minus_one(x);
    // Sylvester matrix of g (degree lam) and r (formal degree lam - 1)
    let rd = lam - 1;
    let size = lam + rd;
    let mut s: Matrix = vec![vec![BigUint::zero(); size]; size];
    for i in 0..rd {
        for (k, c) in gl.iter().rev().enumerate() {
            s[i][i + k] = c.clone();
        }
    }
    for i in 0..lam {
        for (k, c) in r.iter().rev().enumerate() {
            s[rd + i][i + k] = c.clone();
        }
    }
    det_valuation(p, m_exp, &s)
}

/// Structure of `Z_p[T]/(g, (1+T)^{p^n} - 1)` from the Smith form of
/// multiplication by `(1+beta)^{p^n} - 1` on `1, beta, ..., beta^{lambda-1}`.
pub fn component_structure(
    pair: &IrregularPair,
    level: u32,
    g: &DistinguishedPoly,
    working_exponent: u32,
) -> Result<ComponentResult> {
    let p = g.prime;
    if pair.prime != p {
        return Err(Error::PrimeMismatch(pair.prime, p));
    }
    if g.degree == 0 {
        return Err(Error::precondition("component_structure needs lambda >= 1"));
    }
    if !g.eisenstein {
        return Err(Error::precondition("component_structure needs an Eisenstein g"));
    }
    let need = default_working_exponent(g.degree, level);
    if working_exponent < need {
        return Err(Error::precondition(format!(
            "working exponent {working_exponent} below lambda(n+1)+4 = {need}"
        )));
    }
    let m = pow_p(p, working_exponent);
    let q = QuotientRing { g: lifted_g(g, &m)?, m };
    let h = q.minus_one(q.pow(&q.one_plus_t(), &pow_p(p, level)));
    let matrix = multiplication_matrix(&q, &h);
    let diag = smith_valuations(p, working_exponent, &matrix);
    let mut exps = Vec::with_capacity(diag.len());
    for d in diag {
        match d {
            Some(v) => exps.push(v),
            None => {
                return Err(Error::PrecisionExhausted(format!(
                    "elementary divisor vanishes mod p^{working_exponent}"
                )))
            }
        }
    }
    let structure = GroupStructure::new(p, exps);
    let order_via_resultant = resultant_valuation(g, level)?;
    if structure.order_exponent() != order_via_resultant {
        return Err(Error::internal(format!(
            "({p}, {}) level {level}: SNF order p^{} but resultant p^{order_via_resultant}",
            pair.even_index,
            structure.order_exponent()
        )));
    }
    Ok(ComponentResult {
        pair: *pair,
        level,
        lambda: g.degree,
        structure,
        order_via_resultant,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sanity {
    Skipped,
    Passed,
    Failed,
}

/// For `lambda >= p` the level-1 quotient must be killed by `p`.
pub fn valuation_sanity(pair: &IrregularPair, g: &DistinguishedPoly) -> Result<Sanity> {
    if u64::from(g.degree) < g.prime {
        return Ok(Sanity::Skipped);
    }
    let c = component_structure(pair, 1, g, default_working_exponent(g.degree, 1))?;
    Ok(if c.structure.max_exponent() <= 1 {
        Sanity::Passed
    } else {
        Sanity::Failed
    })
}

/// Direct sum of the component structures at level `n`.
pub fn assemble_sn(
    p: u64,
    level: u32,
    pairs: &[IrregularPair],
    components: &[ComponentResult],
) -> Result<GroupStructure> {
    let mut exps = Vec::new();
    for pair in pairs {
        let c = components
            .iter()
            .find(|c| c.pair == *pair && c.level == level)
            .ok_or_else(|| {
                Error::precondition(format!(
                    "no component for ({p}, {}) at level {level}",
                    pair.even_index
                ))
            })?;
        exps.extend_from_slice(&c.structure.exponents);
    }
    Ok(GroupStructure::new(p, exps))
}

/// `⊕_{k=0}^{n-1} (Z/p^{n-k})^{r_k - r_{k-1}}` with `r_{-1} = 0`.
pub fn rank_formula_shape(p: u64, level: u32, ranks: &[u32]) -> Result<GroupStructure> {
    let mut exps = Vec::new();
    let mut prev = 0u32;
    for k in 0..level {
        let rk = ranks.get(k as usize).or(ranks.last()).copied().unwrap_or(0);
        if rk < prev {
            return Err(Error::precondition("ranks r_k must be non-decreasing"));
        }
        exps.extend(std::iter::repeat_n(level - k, (rk - prev) as usize));
        prev = rk;
    }
    Ok(GroupStructure::new(p, exps))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predictions {
    /// `S_{n-1}`, the group whose character group is predicted to be `V_n^+`
    pub s_prev: GroupStructure,
    pub v: GroupStructure,
    pub rank_formula: GroupStructure,
    /// `S_n = (Z/p^{n+1})^r ⊕ (Z/p^n)^{lambda-r}`
    pub s: GroupStructure,
}

fn two_block(p: u64, hi: u32, r: u32, lambda: u32) -> GroupStructure {
    let mut exps = vec![hi; r as usize];
    exps.extend(std::iter::repeat_n(hi.saturating_sub(1), (lambda - r) as usize));
    GroupStructure::new(p, exps)
}

pub fn predict_structures(p: u64, level: u32, r: u32, lambda: u32) -> Result<Predictions> {
    if lambda < r {
        return Err(Error::precondition(format!("lambda = {lambda} < r = {r}")));
    }
    let v = two_block(p, level, r, lambda);
    let mut ranks = vec![r];
    ranks.extend(std::iter::repeat_n(lambda, level.saturating_sub(1) as usize));
    let rank_formula = rank_formula_shape(p, level, &ranks)?;
    if rank_formula != v {
        return Err(Error::internal(format!(
            "rank formula gives {:?}, closed form {:?}",
            rank_formula.exponents, v.exponents
        )));
    }
    Ok(Predictions {
        s_prev: v.clone(),
        v,
        rank_formula,
        s: two_block(p, level + 1, r, lambda),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentGrowth {
    pub pair: IrregularPair,
    pub lambda_fit: u32,
    pub nu_fit: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub components: Vec<ComponentGrowth>,
    pub lambda_fit: u32,
    pub nu_fit: u32,
}

/// Fit `order(n) = lambda n + nu` on consecutive levels `0..=n_max`.
pub fn fit_orders(orders: &[u32]) -> Result<(u32, u32)> {
    if orders.len() < 3 {
        return Err(Error::precondition("growth fit needs levels 0..=n_max with n_max >= 2"));
    }
    let diffs: Vec<i64> = orders
        .windows(2)
        .map(|w| i64::from(w[1]) - i64::from(w[0]))
        .collect();
    if diffs.iter().any(|&d| d != diffs[0]) || diffs[0] < 0 {
        return Err(Error::anomaly(
            AnomalyKind::GrowthMismatch,
            format!("order exponents {orders:?} do not grow linearly"),
        ));
    }
    Ok((diffs[0] as u32, orders[0]))
}

/// Growth fit per component and in total; `levels[n]` holds the level-`n` components.
pub fn growth_fit(p: u64, pairs: &[IrregularPair], levels: &[Vec<ComponentResult>]) -> Result<GrowthFit> {
    let mut totals = vec![0u32; levels.len()];
    let mut per_pair: BTreeMap<IrregularPair, Vec<u32>> = BTreeMap::new();
    for (n, comps) in levels.iter().enumerate() {
        let s = assemble_sn(p, n as u32, pairs, comps)?;
        totals[n] = s.order_exponent();
        for c in comps {
            per_pair.entry(c.pair).or_default().push(c.structure.order_exponent());
        }
    }
    let mut components = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let (l, nu) = fit_orders(&per_pair[pair])?;
        components.push(ComponentGrowth {
            pair: *pair,
            lambda_fit: l,
            nu_fit: nu,
        });
    }
    let (lambda_fit, nu_fit) = fit_orders(&totals)?;
    Ok(GrowthFit {
        components,
        lambda_fit,
        nu_fit,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormKernelReport {
    /// `log_p(|S_1| / |S_0|)`
    pub order_ratio_exponent: i64,
    pub expected: u32,
    /// Every nontrivial component of `S_1` has an element of order `p^2`.
    pub components_have_order_p2: bool,
}

pub fn norm_kernel_checks(
    s0: &GroupStructure,
    s1: &GroupStructure,
    s1_components: &[GroupStructure],
    r1: u32,
) -> Result<NormKernelReport> {
    let ratio = i64::from(s1.order_exponent()) - i64::from(s0.order_exponent());
    let p2 = s1_components
        .iter()
        .filter(|c| !c.is_trivial())
        .all(|c| c.max_exponent() >= 2);
    let report = NormKernelReport {
        order_ratio_exponent: ratio,
        expected: r1,
        components_have_order_p2: p2,
    };
    if ratio != i64::from(r1) || !p2 {
        return Err(Error::anomaly(
            AnomalyKind::NormKernel,
            format!("{report:?}"),
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicScalar;

    fn poly(p: u64, lower: &[u64]) -> DistinguishedPoly {
        let pair = IrregularPair::new(p, 2).unwrap();
        let c = lower
            .iter()
            .map(|&x| PadicScalar::from_integer(p, x, 12))
            .collect();
        DistinguishedPoly::from_coeffs(pair, c).unwrap()
    }

    fn structure(g: &DistinguishedPoly, n: u32) -> Vec<u32> {
        let pair = IrregularPair::new(g.prime, 2).unwrap();
        component_structure(&pair, n, g, default_working_exponent(g.degree, n))
            .unwrap()
            .structure
            .exponents
    }

    #[test]
    fn linear_eisenstein_is_cyclic() {
        for p in [5u64, 7, 37] {
            let g = poly(p, &[3 * p]);
            for n in 0..4 {
                assert_eq!(structure(&g, n), vec![n + 1]);
            }
        }
    }

    #[test]
    fn quadratic_eisenstein_orders() {
        let g = poly(5, &[10, 5]);
        assert_eq!(structure(&g, 0), vec![1]);
        let s1 = structure(&g, 1);
        assert_eq!(s1.iter().sum::<u32>(), 3);
        assert_eq!(s1, vec![2, 1]);
        assert_eq!(resultant_valuation(&g, 1).unwrap(), 3);
    }

    #[test]
    fn degree_p_is_elementary() {
        let p = 5u64;
        let lower = vec![p; p as usize];
        let g = poly(p, &lower);
        let pair = IrregularPair::new(p, 2).unwrap();
        assert_eq!(valuation_sanity(&pair, &g).unwrap(), Sanity::Passed);
        assert!(structure(&g, 1).iter().all(|&e| e == 1));
        assert_eq!(valuation_sanity(&pair, &poly(p, &[p])).unwrap(), Sanity::Skipped);
        assert_eq!(valuation_sanity(&pair, &poly(p, &[p, p])).unwrap(), Sanity::Skipped);
    }

    #[test]
    fn rejects_small_working_exponent() {
        let g = poly(5, &[5]);
        let pair = IrregularPair::new(5, 2).unwrap();
        assert!(component_structure(&pair, 2, &g, 6).is_err());
    }

    #[test]
    fn predictions() {
        let pr = predict_structures(7, 2, 1, 2).unwrap();
        assert_eq!(pr.v.exponents, vec![2, 1]);
        assert_eq!(pr.s.exponents, vec![3, 2]);
        let pr = predict_structures(7, 1, 2, 3).unwrap();
        assert_eq!(pr.v.exponents, vec![1, 1]);
        let pr = predict_structures(7, 2, 2, 2).unwrap();
        assert_eq!(pr.v.exponents, vec![2, 2]);
        assert_eq!(pr.s.exponents, vec![3, 3]);
        assert!(predict_structures(7, 1, 3, 2).is_err());
        assert!(predict_structures(5, 1, 0, 0).unwrap().v.is_trivial());
    }

    #[test]
    fn growth_and_norm() {
        assert_eq!(fit_orders(&[1, 2, 3]).unwrap(), (1, 1));
        assert_eq!(fit_orders(&[0, 0, 0]).unwrap(), (0, 0));
        assert!(matches!(
            fit_orders(&[1, 2, 4]),
            Err(Error::Anomaly { kind: AnomalyKind::GrowthMismatch, .. })
        ));
        let s0 = GroupStructure::new(37, vec![1]);
        let s1 = GroupStructure::new(37, vec![2]);
        assert!(norm_kernel_checks(&s0, &s1, std::slice::from_ref(&s1), 1).is_ok());
        assert!(norm_kernel_checks(&s0, &s0, std::slice::from_ref(&s0), 1).is_err());
    }

    #[test]
    fn group_structure_normalizes() {
        let g = GroupStructure::new(5, vec![1, 0, 3, 2]);
        assert_eq!(g.exponents, vec![3, 2, 1]);
        assert_eq!(g.order_exponent(), 6);
        assert!(GroupStructure::new(5, vec![1]).embeds_in(&g));
        assert!(!g.embeds_in(&GroupStructure::new(5, vec![3, 3])));
    }
}
