//! Elementary divisors and determinant valuations over `Z/p^M`.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::padic::{inv_mod, pow_p, valuation_u};

pub type Matrix = Vec<Vec<BigUint>>;

fn val_mod(p: u64, x: &BigUint) -> Option<u32> {
    if x.is_zero() {
        None
    } else {
        valuation_u(p, x)
    }
}

fn sub_mod(a: &BigUint, b: &BigUint, m: &BigUint) -> BigUint {
    let b = b % m;
    if *a >= b {
        a - b
    } else {
        a + m - b
    }
}

/// Valuations of the Smith diagonal of `a` over `Z/p^M`, in pivot order.
/// `None` marks a diagonal entry that vanishes modulo `p^M`.
///
/// Pivots are chosen by minimal valuation over the remaining block, ties
/// broken by lowest row and then lowest column. Since every remaining entry is
/// divisible by the pivot's power of `p`, elimination loses no precision.
pub fn smith_valuations(p: u64, m_exp: u32, a: &Matrix) -> Vec<Option<u32>> {
    let m = pow_p(p, m_exp);
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut a: Matrix = a
        .iter()
        .map(|r| r.iter().map(|x| x % &m).collect())
        .collect();
    let mut out = Vec::with_capacity(rows.min(cols));
    for k in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if let Some(v) = val_mod(p, x) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            out.extend(std::iter::repeat_n(None, rows.min(cols) - k));
            break;
        };
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        let pv = pow_p(p, v);
        let unit = &a[k][k] / &pv;
        let unit_inv = inv_mod(&unit, &m).expect("pivot unit is invertible");
        for i in k + 1..rows {
            if a[i][k].is_zero() {
                continue;
            }
            let factor = (&a[i][k] / &pv * &unit_inv) % &m;
            for j in k..cols {
                let t = &factor * &a[k][j];
                a[i][j] = sub_mod(&a[i][j], &t, &m);
            }
        }
        for j in k + 1..cols {
            a[k][j] = BigUint::zero();
        }
        out.push(Some(v));
    }
    out
}

/// `v_p(det a)` by Gaussian elimination with partial (column) pivoting.
///
/// Dividing by a pivot of valuation `v` only determines the multiplier modulo
/// `p^{M-v}`, so the working modulus shrinks by `v` after every step. An
/// error is returned when a column vanishes at the remaining precision.
pub fn det_valuation(p: u64, m_exp: u32, a: &Matrix) -> Result<u32> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::precondition("determinant of a non-square matrix"));
    }
    let mut prec = m_exp;
    let mut m = pow_p(p, prec);
    let mut a: Matrix = a
        .iter()
        .map(|r| r.iter().map(|x| x % &m).collect())
        .collect();
    let mut total = 0u32;
    for k in 0..n {
        let mut best: Option<(u32, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            if let Some(v) = val_mod(p, &row[k]) {
                if best.is_none_or(|(bv, _)| v < bv) {
                    best = Some((v, i));
                }
            }
        }
        let Some((v, pi)) = best else {
            return Err(Error::PrecisionExhausted(format!(
                "column {k} vanishes mod p^{prec}; determinant not resolved"
            )));
        };
        a.swap(k, pi);
        total += v;
        let pv = pow_p(p, v);
        prec -= v;
        m = pow_p(p, prec);
        let unit = &a[k][k] / &pv;
        let unit_inv = inv_mod(&unit, &m)?;
        let pivot_row = a[k].clone();
        for row in a.iter_mut().skip(k + 1) {
            let factor = (&row[k] / &pv * &unit_inv) % &m;
            for j in k..n {
                let t = &factor * &pivot_row[j];
                row[j] = sub_mod(&(&row[j] % &m), &t, &m);
            }
        }
        for row in a.iter_mut() {
            for x in row.iter_mut() {
                *x = &*x % &m;
            }
        }
    }
    Ok(total)
}
