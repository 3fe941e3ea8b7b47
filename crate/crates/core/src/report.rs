//! Per-prime pipeline and its report.
//!
//! [`analyze`] never stops at the first failure: every stage that can run does,
//! and each failure becomes a flag. The exit class is derived from the flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bernoulli::{gen_bernoulli_b1, irregular_pairs, is_prime, BernoulliContext};
use crate::error::{AnomalyKind, Error, Result};
use crate::series::{build_series_with, interpolation_check, lambda_invariant, BuildOptions};
use crate::structure::{
    assemble_sn, component_structure, default_working_exponent, growth_fit, norm_kernel_checks,
    predict_structures, ComponentResult, GroupStructure,
};
use crate::weierstrass::{eisenstein_certificate, weierstrass_prep};

/// Level 2 is used automatically up to this prime.
pub const AUTO_LEVEL2_MAX_PRIME: u64 = 300;
pub const DEFAULT_PRECISION: u32 = 4;
pub const DEFAULT_DEPTH: u32 = 2;
pub const DEFAULT_CAP: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    /// Series level; `None` picks 2 for `p <= 300` and 1 otherwise.
    pub level: Option<u32>,
    /// Coefficient cap; `None` means `min(p, 64)`.
    pub cap: Option<usize>,
    pub precision: Option<u32>,
    pub depth: Option<u32>,
}

impl AnalyzeOptions {
    pub fn level_for(&self, p: u64) -> u32 {
        self.level
            .unwrap_or(if p <= AUTO_LEVEL2_MAX_PRIME { 2 } else { 1 })
    }

    pub fn cap_for(&self, p: u64) -> usize {
        self.cap.unwrap_or(DEFAULT_CAP.min(p as usize))
    }

    pub fn precision(&self) -> u32 {
        self.precision.unwrap_or(DEFAULT_PRECISION)
    }

    pub fn depth(&self) -> u32 {
        self.depth.unwrap_or(DEFAULT_DEPTH)
    }
}

/// A residue written as a decimal string with its modulus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residue {
    pub value: String,
    #[serde(rename = "mod")]
    pub modulus: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub e: u64,
    pub component_index: u64,
    pub lambda_e: Option<u32>,
    pub a0_val: Option<i64>,
    pub a0_mod_p2: Option<Residue>,
    pub eisenstein: bool,
    pub check1: bool,
    pub check2: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeReport {
    pub p: u64,
    pub regular: bool,
    pub r: u32,
    pub pairs: Vec<PairRecord>,
    pub lambda_total: u32,
    pub nu: Option<u32>,
    /// `n -> exponents of S_n`
    pub structures: BTreeMap<u32, Vec<u32>>,
    /// `n -> predicted exponents of V_n^+`
    pub predictions: BTreeMap<u32, Vec<u32>>,
    pub flags: Vec<String>,
    pub semi_regular_assumed: bool,
}

/// Process exit classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExitClass {
    Ok = 0,
    Anomaly = 1,
    Usage = 2,
    Internal = 3,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Internal inconsistencies dominate anomalies, which dominate
    /// configuration problems.
    fn rank(self) -> u8 {
        match self {
            ExitClass::Ok => 0,
            ExitClass::Usage => 1,
            ExitClass::Anomaly => 2,
            ExitClass::Internal => 3,
        }
    }

    pub fn worst(self, other: ExitClass) -> ExitClass {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
}

pub const FLAG_PRECISION: &str = "PRECISION_EXHAUSTED";
pub const FLAG_BUDGET: &str = "BUDGET_EXCEEDED";
pub const FLAG_PRECONDITION: &str = "PRECONDITION";
pub const FLAG_INTERNAL: &str = "INTERNAL_INCONSISTENCY";

pub fn flag_for(err: &Error) -> &'static str {
    match err {
        Error::Anomaly { kind, .. } => kind.code(),
        Error::PrecisionExhausted(_) => FLAG_PRECISION,
        Error::BudgetExceeded(_) => FLAG_BUDGET,
        Error::Precondition(_) => FLAG_PRECONDITION,
        Error::Internal(_)
        | Error::PrimeMismatch(..)
        | Error::DivisionByZero
        | Error::NotPrincipalUnit(_) => FLAG_INTERNAL,
    }
}

pub fn exit_class_of_flag(flag: &str) -> ExitClass {
    match flag {
        FLAG_PRECISION | FLAG_BUDGET | FLAG_PRECONDITION => ExitClass::Usage,
        FLAG_INTERNAL => ExitClass::Internal,
        _ => ExitClass::Anomaly,
    }
}

impl PrimeReport {
    pub fn exit_class(&self) -> ExitClass {
        self.flags
            .iter()
            .map(|f| exit_class_of_flag(f))
            .fold(ExitClass::Ok, ExitClass::worst)
    }

    pub fn has_anomaly(&self) -> bool {
        self.exit_class() != ExitClass::Ok
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::precondition(format!("bad report JSON: {e}")))
    }
}

/// Report plus human-readable evidence for every flag.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub report: PrimeReport,
    pub diagnostics: Vec<String>,
}

struct Collector {
    p: u64,
    flags: Vec<String>,
    diagnostics: Vec<String>,
}

impl Collector {
    fn push(&mut self, context: &str, err: &Error) {
        self.flags.push(flag_for(err).to_string());
        self.diagnostics
            .push(format!("p = {}: {context}: {err}", self.p));
    }

    fn anomaly(&mut self, kind: AnomalyKind, detail: String) {
        self.push("check", &Error::anomaly(kind, detail));
    }

    fn ok<T>(&mut self, context: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(x) => Some(x),
            Err(e) => {
                self.push(context, &e);
                None
            }
        }
    }
}

fn structure_list(s: &GroupStructure) -> Vec<u32> {
    s.exponents.clone()
}

/// Run the whole pipeline for one prime.
pub fn analyze(p: u64, opts: &AnalyzeOptions) -> Result<Analysis> {
    if p < 5 || !is_prime(p) {
        return Err(Error::precondition(format!("{p} is not a prime >= 5")));
    }
    let precision = opts.precision();
    if precision < 2 {
        return Err(Error::precondition("precision must be at least 2"));
    }
    let level = opts.level_for(p);
    let cap = opts.cap_for(p);
    let depth = opts.depth();
    let mut col = Collector {
        p,
        flags: Vec::new(),
        diagnostics: Vec::new(),
    };

    let ctx = BernoulliContext::new(p, precision)?;
    let pairs = irregular_pairs(ctx.bank());
    let r = pairs.len() as u32;

    let mut records = Vec::with_capacity(pairs.len());
    let mut polys = Vec::with_capacity(pairs.len());
    let mut lambda_total = 0u32;
    let mut lambdas_complete = true;
    for pair in &pairs {
        let e = pair.even_index;
        let label = format!("(p, e) = ({p}, {e})");
        let mut rec = PairRecord {
            e,
            component_index: pair.component_index,
            lambda_e: None,
            a0_val: None,
            a0_mod_p2: None,
            eisenstein: false,
            check1: false,
            check2: false,
        };
        if let Some(b1) = col.ok(&label, gen_bernoulli_b1(pair.twist as i64, p, 2)) {
            let a0 = b1.try_neg();
            rec.a0_mod_p2 = col.ok(&label, a0.residue(2)).map(|v| Residue {
                value: v.to_string(),
                modulus: "p^2".into(),
            });
        }
        if let Some(k) = col.ok(&label, ctx.kummer_checks(pair)) {
            rec.check1 = k.check1;
            rec.check2 = k.check2;
            if !k.check1 {
                col.anomaly(AnomalyKind::Check1False, format!("{label}: B_1 = {}", k.b1));
            }
            if !k.check2 {
                col.anomaly(AnomalyKind::Check2False, format!("{label}: difference = {}", k.diff));
            }
        }
        let bo = BuildOptions::new(level, cap, precision);
        let series = col.ok(&label, build_series_with(pair, &bo));
        let mut g = None;
        if let Some(series) = series {
            rec.a0_val = series.coeffs[0].valuation();
            if level >= 2 {
                for m in [1, e, e + p - 1] {
                    if let Some(c) = col.ok(&label, interpolation_check(&series, &ctx, m)) {
                        if !c.passed() {
                            col.push(
                                &label,
                                &Error::internal(format!("interpolation gate at m = {m}: {c:?}")),
                            );
                        }
                    }
                }
            }
            if let Some(lam) = col.ok(&label, lambda_invariant(&series)) {
                rec.lambda_e = Some(lam);
                lambda_total += lam;
                if lam < 1 || u64::from(lam) > p - 1 {
                    col.anomaly(AnomalyKind::LambdaBound, format!("{label}: lambda = {lam}"));
                }
                if let Some(poly) = col.ok(&label, weierstrass_prep(&series, lam)) {
                    match eisenstein_certificate(&poly) {
                        Ok(_) => {
                            rec.eisenstein = true;
                            g = Some(poly);
                        }
                        Err(err) => col.push(&label, &err),
                    }
                }
            }
        }
        if rec.lambda_e.is_none() {
            lambdas_complete = false;
        }
        polys.push(g);
        records.push(rec);
    }

    // components for n = 0..=depth
    let mut levels: Vec<Vec<ComponentResult>> = vec![Vec::new(); depth as usize + 1];
    for (pair, g) in pairs.iter().zip(&polys) {
        let Some(g) = g else { continue };
        let label = format!("component ({p}, {})", pair.even_index);
        let mut prev: Option<GroupStructure> = None;
        for n in 0..=depth {
            let m = default_working_exponent(g.degree, n);
            let Some(c) = col.ok(&label, component_structure(pair, n, g, m)) else {
                break;
            };
            if let Some(pr) = &prev {
                if !pr.embeds_in(&c.structure) {
                    col.anomaly(
                        AnomalyKind::StructureMismatch,
                        format!("{label}: level {} {:?} does not embed in level {n} {:?}", n - 1, pr.exponents, c.structure.exponents),
                    );
                }
            }
            prev = Some(c.structure.clone());
            levels[n as usize].push(c);
        }
    }

    let mut structures = BTreeMap::new();
    let mut assembled: Vec<Option<GroupStructure>> = Vec::new();
    for n in 0..=depth {
        let s = assemble_sn(p, n, &pairs, &levels[n as usize]).ok();
        if let Some(s) = &s {
            structures.insert(n, structure_list(s));
        }
        assembled.push(s);
    }
    if let Some(s0) = &assembled[0] {
        if s0.exponents.len() != r as usize || s0.exponents.iter().any(|&x| x != 1) {
            col.anomaly(
                AnomalyKind::StructureMismatch,
                format!("S_0 = {:?} but r = {r}", s0.exponents),
            );
        }
    }

    let mut predictions = BTreeMap::new();
    if lambdas_complete {
        for n in 1..=depth.max(2) {
            let Some(pr) = col.ok("predictions", predict_structures(p, n, r, lambda_total)) else {
                break;
            };
            predictions.insert(n, pr.v.exponents.clone());
            // V_n^+ is compared through S_{n-1}
            if let Some(Some(prev)) = assembled.get(n as usize - 1) {
                if *prev != pr.s_prev {
                    col.anomaly(
                        AnomalyKind::StructureMismatch,
                        format!(
                            "S_{} = {:?}, predicted {:?}",
                            n - 1,
                            prev.exponents,
                            pr.s_prev.exponents
                        ),
                    );
                }
            }
        }
        let all_checks = records.iter().all(|x| x.check1 && x.check2);
        if all_checks {
            for n in 0..=depth {
                if let Some(Some(s)) = assembled.get(n as usize) {
                    let cyclic = GroupStructure::new(p, vec![n + 1; r as usize]);
                    if *s != cyclic {
                        col.anomaly(
                            AnomalyKind::StructureMismatch,
                            format!("S_{n} = {:?} but both checks hold, expected {:?}", s.exponents, cyclic.exponents),
                        );
                    }
                }
            }
        }
    }

    let mut nu = None;
    let complete_levels = assembled.iter().all(|s| s.is_some());
    if depth >= 2 && complete_levels {
        if let Some(fit) = col.ok("growth", growth_fit(p, &pairs, &levels)) {
            nu = Some(fit.nu_fit);
            if fit.lambda_fit != lambda_total || fit.nu_fit != r {
                col.anomaly(
                    AnomalyKind::GrowthMismatch,
                    format!(
                        "fit lambda = {}, nu = {}; expected lambda = {lambda_total}, nu = r = {r}",
                        fit.lambda_fit, fit.nu_fit
                    ),
                );
            }
        }
    }
    if depth >= 1 {
        if let (Some(s0), Some(s1)) = (&assembled[0], &assembled[1]) {
            let comps: Vec<GroupStructure> =
                levels[1].iter().map(|c| c.structure.clone()).collect();
            col.ok("norm kernel", norm_kernel_checks(s0, s1, &comps, lambda_total));
        }
    }

    let mut flags = col.flags;
    flags.sort();
    flags.dedup();
    Ok(Analysis {
        report: PrimeReport {
            p,
            regular: r == 0,
            r,
            pairs: records,
            lambda_total,
            nu,
            structures,
            predictions,
            flags,
            semi_regular_assumed: true,
        },
        diagnostics: col.diagnostics,
    })
}

/// Column set of the CSV projection, in order.
pub const CSV_COLUMNS: [&str; 17] = [
    "p",
    "regular",
    "r",
    "indices",
    "lambdas",
    "a0_vals",
    "a0_mod_p2",
    "eisenstein",
    "check1",
    "check2",
    "lambda_total",
    "nu",
    "S0",
    "S1",
    "S2",
    "V1_pred",
    "V2_pred",
];

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for (i, x) in xs.into_iter().enumerate() {
        if i > 0 {
            out.push(';');
        }
        let _ = write!(out, "{}", x.to_string());
    }
    out
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

impl PrimeReport {
    /// One CSV row matching [`CSV_COLUMNS`]. Lists are `;`-separated; the
    /// flag list is appended as a final `flags` column.
    pub fn csv_record(&self) -> Vec<String> {
        let s = |n: u32| self.structures.get(&n).map(|v| join(v.iter())).unwrap_or_default();
        let v = |n: u32| self.predictions.get(&n).map(|v| join(v.iter())).unwrap_or_default();
        vec![
            self.p.to_string(),
            self.regular.to_string(),
            self.r.to_string(),
            join(self.pairs.iter().map(|x| x.e)),
            join(self.pairs.iter().map(|x| opt(&x.lambda_e))),
            join(self.pairs.iter().map(|x| opt(&x.a0_val))),
            join(self.pairs.iter().map(|x| {
                x.a0_mod_p2.as_ref().map(|r| r.value.clone()).unwrap_or_default()
            })),
            join(self.pairs.iter().map(|x| x.eisenstein)),
            join(self.pairs.iter().map(|x| x.check1)),
            join(self.pairs.iter().map(|x| x.check2)),
            self.lambda_total.to_string(),
            opt(&self.nu),
            s(0),
            s(1),
            s(2),
            v(1),
            v(2),
            join(self.flags.iter()),
        ]
    }
}

/// CSV text with a header row for the given reports.
pub fn to_csv(reports: &[PrimeReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    header.push("flags");
    let io = |e: csv::Error| Error::internal(format!("csv: {e}"));
    w.write_record(&header).map_err(io)?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::internal(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::internal(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_prime() {
        let a = analyze(5, &AnalyzeOptions::default()).unwrap();
        let r = &a.report;
        assert!(r.regular);
        assert_eq!(r.r, 0);
        assert!(r.pairs.is_empty());
        assert!(r.flags.is_empty(), "{:?}", a.diagnostics);
        assert_eq!(r.structures[&1], Vec::<u32>::new());
        assert_eq!(r.nu, Some(0));
        assert_eq!(r.exit_class(), ExitClass::Ok);
    }

    #[test]
    fn p37() {
        let a = analyze(37, &AnalyzeOptions::default()).unwrap();
        let r = &a.report;
        assert!(r.flags.is_empty(), "{:?}", a.diagnostics);
        assert_eq!(r.r, 1);
        assert_eq!(r.lambda_total, 1);
        assert_eq!(r.nu, Some(1));
        assert_eq!(r.structures[&0], vec![1]);
        assert_eq!(r.structures[&1], vec![2]);
        assert_eq!(r.structures[&2], vec![3]);
        assert_eq!(r.predictions[&1], vec![1]);
        let pr = &r.pairs[0];
        assert_eq!(pr.e, 32);
        assert_eq!(pr.component_index, 5);
        assert_eq!(pr.a0_val, Some(1));
        assert!(pr.eisenstein && pr.check1 && pr.check2);
        assert_eq!(pr.a0_mod_p2.as_ref().unwrap().modulus, "p^2");
    }

    #[test]
    fn p157() {
        let a = analyze(157, &AnalyzeOptions::default()).unwrap();
        let r = &a.report;
        assert!(r.flags.is_empty(), "{:?}", a.diagnostics);
        assert_eq!(r.r, 2);
        assert_eq!(r.lambda_total, 2);
        assert_eq!(r.structures[&1], vec![2, 2]);
        assert_eq!(r.predictions[&2], vec![2, 2]);
        assert_eq!(r.pairs.iter().map(|x| x.e).collect::<Vec<_>>(), vec![62, 110]);
    }

    #[test]
    fn json_round_trip_and_csv() {
        let r = analyze(59, &AnalyzeOptions::default()).unwrap().report;
        let back = PrimeReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let text = to_csv(&[r]).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("p,regular,r,indices"));
        assert!(lines.next().unwrap().starts_with("59,false,1,44,1"));
    }

    #[test]
    fn exit_classes() {
        assert_eq!(exit_class_of_flag("EISENSTEIN_FAILURE"), ExitClass::Anomaly);
        assert_eq!(exit_class_of_flag(FLAG_INTERNAL), ExitClass::Internal);
        assert_eq!(exit_class_of_flag(FLAG_BUDGET), ExitClass::Usage);
        assert_eq!(ExitClass::Anomaly.worst(ExitClass::Usage), ExitClass::Anomaly);
        assert_eq!(ExitClass::Anomaly.worst(ExitClass::Internal), ExitClass::Internal);
        assert!(analyze(9, &AnalyzeOptions::default()).is_err());
    }

    #[test]
    fn budget_overflow_is_flagged() {
        let opts = AnalyzeOptions {
            level: Some(3),
            ..Default::default()
        };
        let r = analyze(691, &opts).unwrap().report;
        assert!(r.flags.contains(&FLAG_BUDGET.to_string()), "{:?}", r.flags);
        assert_eq!(r.exit_class(), ExitClass::Usage);
    }
}
