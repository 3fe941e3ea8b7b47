//! Invariant suites runnable from the command line.

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bernoulli::{
    bernoulli_bank, bernoulli_bank_mutated, irregular_pairs, primes_in, BernoulliBank,
    BernoulliContext,
};
use crate::error::{Error, Result};
use crate::padic::{dlog_gamma, padic_log, pow_p, teichmuller, PadicScalar, TeichTable};
use crate::report::{analyze, AnalyzeOptions};
use crate::scan::{scan, ScanConfig};
use crate::series::{
    build_series, build_series_flipped_sign, build_series_with, interpolation_check,
    lambda_invariant, BuildOptions,
};
use crate::snf::{det_valuation, smith_valuations};
use crate::structure::{component_structure, default_working_exponent, resultant_valuation};
use crate::weierstrass::{weierstrass_prep, DistinguishedPoly};

pub const SUITES: [&str; 10] = [
    "padic",
    "teichmuller",
    "dlog",
    "kummer",
    "von_staudt",
    "weierstrass",
    "interpolation",
    "snf",
    "determinism",
    "resume",
];

/// Deliberate faults for checking that the suites can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    /// Drop a term of the Bernoulli recurrence.
    pub bernoulli: bool,
    /// Flip the exponent sign of the Stickelberger sum.
    pub stickelberger_sign: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: u64,
    pub failed: u64,
    /// The first few failures.
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    fn check(&mut self, cond: bool, what: impl FnOnce() -> String) {
        if cond {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failures.len() < 8 {
                self.failures.push(what());
            }
        }
    }

    fn check_result<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(x) => {
                self.passed += 1;
                Some(x)
            }
            Err(e) => {
                self.failed += 1;
                if self.failures.len() < 8 {
                    self.failures.push(format!("{}: {e}", what()));
                }
                None
            }
        }
    }
}

fn bank_for(p: u64, k: u32, faults: Faults) -> Result<BernoulliBank> {
    if faults.bernoulli {
        bernoulli_bank_mutated(p, k)
    } else {
        bernoulli_bank(p, k)
    }
}

pub fn run_suite(name: &str, faults: Faults) -> Result<SuiteResult> {
    let mut s = SuiteResult::new(name);
    match name {
        "padic" => padic_suite(&mut s),
        "teichmuller" => teichmuller_suite(&mut s),
        "dlog" => dlog_suite(&mut s),
        "kummer" => kummer_suite(&mut s, faults),
        "von_staudt" => von_staudt_suite(&mut s, faults),
        "weierstrass" => weierstrass_suite(&mut s),
        "interpolation" => interpolation_suite(&mut s, faults),
        "snf" => snf_suite(&mut s),
        "determinism" => determinism_suite(&mut s),
        "resume" => resume_suite(&mut s),
        _ => {
            return Err(Error::precondition(format!(
                "unknown suite {name:?}; available: {}",
                SUITES.join(", ")
            )))
        }
    }
    Ok(s)
}

pub fn run_all(faults: Faults) -> Vec<SuiteResult> {
    SUITES
        .iter()
        .map(|n| run_suite(n, faults).expect("known suite"))
        .collect()
}

fn padic_suite(s: &mut SuiteResult) {
    let half = PadicScalar::from_ratio(5, 1, 2, 3).unwrap();
    s.check(half.residue(3).ok() == Some(BigUint::from(63u32)), || "1/2 mod 125".into());
    let x = PadicScalar::from_integer(3, 2, 2);
    let y = PadicScalar::from_integer(3, 1, 2);
    let z = &x + &y;
    s.check(
        z.valuation() == Some(1) && z.relprec() == 1,
        || format!("2 + 3 in Q_3: {z}"),
    );
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..200 {
        let p = [5u64, 7, 37][rng.gen_range(0..3)];
        let a: i64 = rng.gen_range(-10_000..10_000);
        let b: i64 = rng.gen_range(-10_000..10_000);
        let c: i64 = rng.gen_range(1..10_000);
        let (sa, sb, sc) = (
            PadicScalar::from_integer(p, a, 12),
            PadicScalar::from_integer(p, b, 12),
            PadicScalar::from_integer(p, c, 12),
        );
        let lhs = &(&sa + &sb) * &sc;
        let rhs = &(&sa * &sc) + &(&sb * &sc);
        s.check(lhs.eq_at_precision(&rhs), || format!("distributivity {a} {b} {c} mod {p}"));
        let exact = PadicScalar::from_integer(p, (a + b) * c, 12);
        s.check(lhs.eq_at_precision(&exact), || format!("({a}+{b})*{c} mod {p}"));
        if let Ok(q) = sa.try_div(&sc) {
            s.check((&q * &sc).eq_at_precision(&sa), || format!("{a}/{c} * {c} mod {p}"));
        }
    }
}

fn teichmuller_suite(s: &mut SuiteResult) {
    for p in [5u64, 7, 11, 37, 157] {
        let m = 6;
        let t = TeichTable::new(p, m);
        let modulus = pow_p(p, m);
        for a in 1..p.min(40) {
            let w = t.get(a);
            s.check(w % p == BigUint::from(a), || format!("omega({a}) = {a} mod {p}"));
            s.check(
                w.modpow(&BigUint::from(p - 1), &modulus) == BigUint::from(1u32),
                || format!("omega({a})^(p-1) = 1 mod {p}^{m}"),
            );
            for b in 1..p.min(12) {
                let ab = (a * b) % p;
                s.check(
                    (w * t.get(b)) % &modulus == *t.get(ab),
                    || format!("omega({a}*{b}) mod {p}^{m}"),
                );
            }
            let sc = teichmuller(p, a, m).unwrap();
            s.check(sc.residue(m).ok().as_ref() == Some(w), || format!("scalar omega({a}) mod {p}"));
        }
    }
}

fn dlog_suite(s: &mut SuiteResult) {
    for p in [5u64, 7, 37, 157] {
        for n in 1..4u32 {
            let modulus = pow_p(p, n + 1);
            let pn = pow_p(p, n);
            for k in [0u64, 1, 2, 5, 17, 123, 4567] {
                let kk = BigUint::from(k) % &pn;
                let a = BigUint::from(p + 1).modpow(&kk, &modulus);
                let got = s.check_result(dlog_gamma(p, &a, n), || format!("dlog (1+p)^{k} mod {p}^{}", n + 1));
                if let Some(got) = got {
                    s.check(got == kk, || format!("dlog (1+p)^{k} = {got} mod {p}^{n}"));
                }
            }
            // additivity on principal units 1 + p x
            for (x, y) in [(1u64, 2u64), (3, 4), (10, 11)] {
                let a = BigUint::from(1 + p * x) % &modulus;
                let b = BigUint::from(1 + p * y) % &modulus;
                let ab = (&a * &b) % &modulus;
                if let (Ok(la), Ok(lb), Ok(lab)) =
                    (dlog_gamma(p, &a, n), dlog_gamma(p, &b, n), dlog_gamma(p, &ab, n))
                {
                    s.check((la + lb) % &pn == lab, || format!("dlog additivity mod {p}^{n}"));
                } else {
                    s.check(false, || format!("dlog failed on principal units mod {p}"));
                }
            }
        }
        let x = PadicScalar::from_integer(p, 1 + p, 8);
        let lx = padic_log(&x, 8).unwrap();
        let l2 = padic_log(&(&x * &x), 8).unwrap();
        s.check(l2.eq_at_precision(&(&lx + &lx)), || format!("log(x^2) = 2 log x mod {p}"));
    }
}

/// `B_e/e = B_{e+p-1}/(e+p-1) mod p` for every even `2 <= e <= p-3`.
fn kummer_suite(s: &mut SuiteResult, faults: Faults) {
    for p in primes_in(5, 501) {
        let Some(bank) = s.check_result(bank_for(p, 2, faults), || format!("bank for {p}")) else {
            continue;
        };
        for e in (2..=p as usize - 3).step_by(2) {
            let lhs = bank.over_index(e);
            let rhs = bank.over_index(e + p as usize - 1);
            let ok = match (lhs, rhs) {
                (Ok(a), Ok(b)) => a
                    .try_sub(&b)
                    .map(|d| d.valuation_lower_bound() >= 1)
                    .unwrap_or(false),
                _ => false,
            };
            s.check(ok, || format!("Kummer congruence fails at ({p}, {e})"));
        }
        let ctx = BernoulliContext::from_bank(bank.clone());
        for pair in irregular_pairs(&bank) {
            s.check_result(ctx.kummer_checks(&pair), || format!("Kummer checks at ({p}, {})", pair.even_index));
        }
    }
}

/// `p B_{p-1} = -1 mod p`.
fn von_staudt_suite(s: &mut SuiteResult, faults: Faults) {
    for p in primes_in(5, 501) {
        let Some(bank) = s.check_result(bank_for(p, 2, faults), || format!("bank for {p}")) else {
            continue;
        };
        let ok = bank
            .get(p as usize - 1)
            .ok()
            .map(|b| b.shift(1))
            .and_then(|x| x.residue(1).ok())
            == Some(BigUint::from(p - 1));
        s.check(ok, || format!("p B_(p-1) != -1 mod {p}"));
    }
}

fn weierstrass_suite(s: &mut SuiteResult) {
    for p in primes_in(5, 301) {
        let Ok(bank) = bernoulli_bank(p, 2) else {
            s.check(false, || format!("bank for {p}"));
            continue;
        };
        for pair in irregular_pairs(&bank) {
            let label = || format!("({p}, {})", pair.even_index);
            let Some(series) = s.check_result(build_series(&pair, 1, p.min(64) as usize, 4), label) else {
                continue;
            };
            let Some(lam) = s.check_result(lambda_invariant(&series), label) else {
                continue;
            };
            let Some(g) = s.check_result(weierstrass_prep(&series, lam), label) else {
                continue;
            };
            s.check(
                g.residual_precision >= 1 && g.residual_terms > lam as usize,
                || format!("{}: residual window K' = {}, N' = {}", label(), g.residual_precision, g.residual_terms),
            );
            s.check(
                g.coeffs.iter().all(|a| a.valuation_lower_bound() >= 1),
                || format!("{}: g not distinguished", label()),
            );
            s.check(weierstrass_prep(&series, lam).ok() == Some(g), || format!("{}: nondeterministic", label()));
        }
    }
}

fn interpolation_suite(s: &mut SuiteResult, faults: Faults) {
    for p in primes_in(5, 301) {
        let Ok(ctx) = BernoulliContext::new(p, 4) else {
            s.check(false, || format!("context for {p}"));
            continue;
        };
        for pair in irregular_pairs(ctx.bank()) {
            let e = pair.even_index;
            let opts = BuildOptions::new(2, p as usize, 4);
            let built = if faults.stickelberger_sign {
                build_series_flipped_sign(&pair, &opts)
            } else {
                build_series_with(&pair, &opts)
            };
            let Some(level2) = s.check_result(built, || format!("level 2 build ({p}, {e})")) else {
                continue;
            };
            for m in [1, e, e + p - 1] {
                if let Some(c) = s.check_result(interpolation_check(&level2, &ctx, m), || format!("({p}, {e}) m = {m}")) {
                    s.check(
                        c.passed() && c.residual >= 2,
                        || format!("({p}, {e}) m = {m}: residual {} certified {}", c.residual, c.certified),
                    );
                }
            }
            if let Ok(level1) = build_series(&pair, 1, p as usize, 4) {
                let coherent = (0..p as usize).all(|j| {
                    level1.coeffs[j].residue(1).ok() == level2.coeffs[j].residue(1).ok()
                });
                s.check(coherent, || format!("({p}, {e}) levels 1 and 2 disagree mod p"));
            }
        }
    }
}

fn snf_suite(s: &mut SuiteResult) {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..500 {
        let p = [3u64, 5, 7][rng.gen_range(0..3)];
        let n = rng.gen_range(1..4usize);
        let m_exp = 10;
        let modulus = p.pow(m_exp);
        let a: Vec<Vec<BigUint>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| BigUint::from(rng.gen_range(0..modulus) * p.pow(rng.gen_range(0..3)) % modulus))
                    .collect()
            })
            .collect();
        let diag = smith_valuations(p, m_exp, &a);
        let Ok(d) = det_valuation(p, m_exp, &a) else {
            continue;
        };
        if let Some(sum) = diag.iter().copied().sum::<Option<u32>>() {
            if sum < m_exp / 2 {
                s.check(sum == d, || format!("elementary divisors {diag:?} vs det valuation {d}"));
            }
        }
    }
    for p in [5u64, 7, 11] {
        let pair = crate::bernoulli::IrregularPair::new(p, 2).unwrap();
        for (c0, c1) in [(p, 0), (p, p), (2 * p, p), (p * (p - 1), 3 * p)] {
            let coeffs = vec![PadicScalar::from_integer(p, c0, 12), PadicScalar::from_integer(p, c1, 12)];
            let g = DistinguishedPoly::from_coeffs(pair, coeffs).unwrap();
            for n in 0..3 {
                let c = component_structure(&pair, n, &g, default_working_exponent(2, n));
                let r = resultant_valuation(&g, n);
                match (c, r) {
                    (Ok(c), Ok(r)) => s.check(
                        c.structure.order_exponent() == r && r == 2 * n + 1,
                        || format!("T^2 + {c1}T + {c0} over {p}, level {n}: {:?} vs {r}", c.structure.exponents),
                    ),
                    _ => s.check(false, || format!("T^2 + {c1}T + {c0} over {p}, level {n} failed")),
                }
            }
        }
    }
}

fn determinism_suite(s: &mut SuiteResult) {
    for p in [5u64, 37, 59, 157] {
        let a = analyze(p, &AnalyzeOptions::default()).map(|a| a.report.to_json());
        let b = analyze(p, &AnalyzeOptions::default()).map(|a| a.report.to_json());
        s.check(a.is_ok() && a == b, || format!("analyze({p}) differs between runs"));
    }
}

fn resume_suite(s: &mut SuiteResult) {
    let Ok(dir) = tempfile::tempdir() else {
        s.check(false, || "no temporary directory".into());
        return;
    };
    let full = dir.path().join("full.jsonl");
    let part = dir.path().join("part.jsonl");
    let a = scan(&ScanConfig::new(5, 160, &full));
    let mut cfg = ScanConfig::new(5, 160, &part);
    cfg.batch_size = 5;
    cfg.max_batches = Some(3);
    let first = scan(&cfg);
    cfg.max_batches = None;
    cfg.resume = true;
    let b = scan(&cfg);
    match (a, first, b) {
        (Ok(a), Ok(first), Ok(b)) => {
            s.check(!first.complete, || "interrupted scan reported complete".into());
            s.check(a.tallies == b.tallies, || "tallies differ after resume".into());
            let same = std::fs::read(&full).ok() == std::fs::read(&part).ok();
            s.check(same, || "resumed results file differs".into());
        }
        _ => s.check(false, || "scan failed".into()),
    }
}
