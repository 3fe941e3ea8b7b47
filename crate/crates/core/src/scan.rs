//! Range scans with a worker pool, an append-only results file and an
//! atomically replaced checkpoint.
//!
//! The results file (one [`PrimeReport`] per line, ordered by `p`) is the
//! source of truth. The checkpoint is written after every batch and only
//! records the range, options and running tallies; on resume, the completed
//! set is recomputed from the results file and a partial trailing line left
//! by a crash is dropped.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernoulli::primes_in;
use crate::error::{Error, Result};
use crate::report::{analyze, AnalyzeOptions, ExitClass, PrimeReport};

pub const CHECKPOINT_VERSION: u32 = 1;
pub const DEFAULT_BATCH: usize = 16;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub primes: u64,
    pub irregular: u64,
    pub anomalies: u64,
}

impl Tallies {
    fn add(&mut self, r: &PrimeReport) {
        self.primes += 1;
        self.irregular += u64::from(!r.regular);
        self.anomalies += u64::from(r.has_anomaly());
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCheckpoint {
    pub version: u32,
    /// `[from, to)`
    pub range: (u64, u64),
    pub options: AnalyzeOptions,
    pub completed: Vec<u64>,
    pub tallies: Tallies,
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub from: u64,
    pub to: u64,
    pub jobs: usize,
    pub results: PathBuf,
    pub checkpoint: PathBuf,
    pub resume: bool,
    /// Resume even when the checkpoint cannot be read.
    pub force: bool,
    pub options: AnalyzeOptions,
    pub batch_size: usize,
    /// Stop after this many batches (simulated interruption).
    pub max_batches: Option<usize>,
}

impl ScanConfig {
    pub fn new(from: u64, to: u64, results: impl Into<PathBuf>) -> Self {
        let results = results.into();
        let checkpoint = default_checkpoint_path(&results);
        ScanConfig {
            from,
            to,
            jobs: 1,
            results,
            checkpoint,
            resume: false,
            force: false,
            options: AnalyzeOptions::default(),
            batch_size: DEFAULT_BATCH,
            max_batches: None,
        }
    }
}

pub fn default_checkpoint_path(results: &Path) -> PathBuf {
    let mut s = results.as_os_str().to_owned();
    s.push(".checkpoint.json");
    PathBuf::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub range: (u64, u64),
    pub tallies: Tallies,
    pub irregular_primes: Vec<u64>,
    pub anomalous_primes: Vec<u64>,
    pub complete: bool,
    pub exit_code: i32,
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> Error {
    Error::precondition(format!("{what} {}: {e}", path.display()))
}

pub fn read_checkpoint(path: &Path) -> Result<ScanCheckpoint> {
    let text = fs::read_to_string(path).map_err(|e| io_err("cannot read checkpoint", path, e))?;
    let cp: ScanCheckpoint = serde_json::from_str(&text).map_err(|e| {
        Error::precondition(format!(
            "corrupt checkpoint {} ({e}); rerun with --force to rebuild it from the results file",
            path.display()
        ))
    })?;
    if cp.version != CHECKPOINT_VERSION {
        return Err(Error::precondition(format!(
            "checkpoint version {} is not {CHECKPOINT_VERSION}",
            cp.version
        )));
    }
    Ok(cp)
}

fn write_checkpoint(path: &Path, cp: &ScanCheckpoint) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| io_err("cannot create temporary checkpoint in", dir, e))?;
    let body = serde_json::to_string_pretty(cp).expect("checkpoint serializes");
    tmp.write_all(body.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| io_err("cannot write checkpoint", path, e))?;
    tmp.persist(path)
        .map_err(|e| io_err("cannot replace checkpoint", path, e.error))?;
    Ok(())
}

/// Complete reports in the results file. A trailing line without a newline
/// is cut off; a complete line that does not parse is an error.
pub fn read_results(path: &Path) -> Result<Vec<PrimeReport>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err("cannot open results", path, e)),
    };
    let mut reader = BufReader::new(file);
    let mut out = Vec::new();
    let mut good_len = 0u64;
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| io_err("cannot read results", path, e))?;
        if n == 0 {
            break;
        }
        if !line.ends_with('\n') {
            break;
        }
        out.push(PrimeReport::from_json(line.trim_end())?);
        good_len += n as u64;
    }
    let actual = fs::metadata(path)
        .map_err(|e| io_err("cannot stat results", path, e))?
        .len();
    if actual != good_len {
        OpenOptions::new()
            .write(true)
            .open(path)
            .and_then(|f| f.set_len(good_len))
            .map_err(|e| io_err("cannot truncate results", path, e))?;
    }
    Ok(out)
}

fn analyze_report(p: u64, opts: &AnalyzeOptions) -> Result<PrimeReport> {
    analyze(p, opts).map(|a| a.report)
}

pub fn scan(cfg: &ScanConfig) -> Result<ScanSummary> {
    if cfg.from < 5 || cfg.from >= cfg.to {
        return Err(Error::precondition(format!(
            "scan range [{}, {}) must satisfy 5 <= from < to",
            cfg.from, cfg.to
        )));
    }
    let mut done: Vec<PrimeReport> = Vec::new();
    if cfg.resume {
        match read_checkpoint(&cfg.checkpoint) {
            Ok(cp) => {
                if cp.range != (cfg.from, cfg.to) || cp.options != cfg.options {
                    return Err(Error::precondition(format!(
                        "checkpoint is for range {:?} with {:?}, not [{}, {}) with {:?}",
                        cp.range, cp.options, cfg.from, cfg.to, cfg.options
                    )));
                }
            }
            Err(e) if cfg.force => {
                log_line(&format!("ignoring checkpoint: {e}"));
            }
            Err(e) => return Err(e),
        }
        done = read_results(&cfg.results)?;
        if done.iter().any(|r| r.p < cfg.from || r.p >= cfg.to)
            || done.windows(2).any(|w| w[0].p >= w[1].p)
        {
            return Err(Error::precondition(format!(
                "results file {} does not belong to this range",
                cfg.results.display()
            )));
        }
    } else {
        File::create(&cfg.results).map_err(|e| io_err("cannot create results", &cfg.results, e))?;
    }

    let last = done.last().map(|r| r.p);
    let todo: Vec<u64> = primes_in(cfg.from.max(5), cfg.to)
        .into_iter()
        .filter(|&p| last.is_none_or(|l| p > l))
        .collect();
    let mut tallies = Tallies::default();
    let mut completed: Vec<u64> = Vec::new();
    let mut irregular = Vec::new();
    let mut anomalous = Vec::new();
    let mut worst = ExitClass::Ok;
    let mut record = |r: &PrimeReport,
                      tallies: &mut Tallies,
                      completed: &mut Vec<u64>,
                      worst: &mut ExitClass| {
        tallies.add(r);
        completed.push(r.p);
        if !r.regular {
            irregular.push(r.p);
        }
        if r.has_anomaly() {
            anomalous.push(r.p);
        }
        *worst = worst.worst(r.exit_class());
    };
    for r in &done {
        record(r, &mut tallies, &mut completed, &mut worst);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::internal(format!("thread pool: {e}")))?;
    let mut results = OpenOptions::new()
        .append(true)
        .create(true)
        .open(&cfg.results)
        .map_err(|e| io_err("cannot open results", &cfg.results, e))?;
    let mut batches = 0usize;
    let mut complete = true;
    for chunk in todo.chunks(cfg.batch_size.max(1)) {
        if cfg.max_batches.is_some_and(|m| batches >= m) {
            complete = false;
            break;
        }
        let reports: Vec<Result<PrimeReport>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&p| analyze_report(p, &cfg.options))
                .collect()
        });
        let mut text = String::new();
        for r in reports {
            let r = r?;
            text.push_str(&r.to_json());
            text.push('\n');
            record(&r, &mut tallies, &mut completed, &mut worst);
        }
        results
            .write_all(text.as_bytes())
            .and_then(|_| results.sync_data())
            .map_err(|e| io_err("cannot append results", &cfg.results, e))?;
        write_checkpoint(
            &cfg.checkpoint,
            &ScanCheckpoint {
                version: CHECKPOINT_VERSION,
                range: (cfg.from, cfg.to),
                options: cfg.options,
                completed: completed.clone(),
                tallies: tallies.clone(),
            },
        )?;
        batches += 1;
    }
    if todo.is_empty() {
        write_checkpoint(
            &cfg.checkpoint,
            &ScanCheckpoint {
                version: CHECKPOINT_VERSION,
                range: (cfg.from, cfg.to),
                options: cfg.options,
                completed: completed.clone(),
                tallies: tallies.clone(),
            },
        )?;
    }
    Ok(ScanSummary {
        range: (cfg.from, cfg.to),
        tallies,
        irregular_primes: irregular,
        anomalous_primes: anomalous,
        complete,
        exit_code: worst.code(),
    })
}

fn log_line(msg: &str) {
    eprintln!("pclass: {msg}");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_range_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let full = dir.path().join("full.jsonl");
        let s = scan(&ScanConfig::new(5, 100, &full)).unwrap();
        assert_eq!(s.irregular_primes, vec![37, 59, 67]);
        assert_eq!(s.exit_code, 0);
        assert!(s.complete);

        let part = dir.path().join("part.jsonl");
        let mut cfg = ScanConfig::new(5, 100, &part);
        cfg.batch_size = 4;
        cfg.max_batches = Some(2);
        assert!(!scan(&cfg).unwrap().complete);
        // simulate a crash in the middle of an append
        let mut f = OpenOptions::new().append(true).open(&part).unwrap();
        f.write_all(b"{\"p\":43,\"regu").unwrap();
        drop(f);
        cfg.max_batches = None;
        cfg.resume = true;
        cfg.jobs = 2;
        let s2 = scan(&cfg).unwrap();
        assert!(s2.complete);
        assert_eq!(s2.tallies, s.tallies);
        assert_eq!(fs::read(&full).unwrap(), fs::read(&part).unwrap());
    }

    #[test]
    fn corrupt_checkpoint_needs_force() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("r.jsonl");
        let mut cfg = ScanConfig::new(5, 40, &out);
        scan(&cfg).unwrap();
        fs::write(&cfg.checkpoint, "{not json").unwrap();
        cfg.resume = true;
        assert!(matches!(scan(&cfg), Err(Error::Precondition(_))));
        cfg.force = true;
        let s = scan(&cfg).unwrap();
        assert_eq!(s.irregular_primes, vec![37]);
        assert!(read_checkpoint(&cfg.checkpoint).is_ok());
    }

    #[test]
    fn rejects_bad_range() {
        let dir = tempfile::tempdir().unwrap();
        assert!(scan(&ScanConfig::new(100, 100, dir.path().join("x"))).is_err());
        assert!(scan(&ScanConfig::new(3, 100, dir.path().join("x"))).is_err());
    }
}
