use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pclass_core::report::{analyze, to_csv, AnalyzeOptions, ExitClass};
use pclass_core::scan::{default_checkpoint_path, scan, ScanConfig};
use pclass_core::selftest::{run_all, run_suite, Faults, SuiteResult};
use pclass_core::Error;

#[derive(Parser, Debug)]
#[command(name = "pclass", version, about = "Iwasawa invariants and class-group structure for irregular primes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args, Debug, Clone)]
struct PipelineArgs {
    /// Series level n (default: 2 for p <= 300, else 1)
    #[arg(long, env = "PCLASS_LEVEL")]
    level: Option<u32>,
    /// Number of series coefficients (default: min(p, 64))
    #[arg(long, env = "PCLASS_CAP")]
    cap: Option<usize>,
    /// p-adic working precision K
    #[arg(long, env = "PCLASS_PRECISION")]
    precision: Option<u32>,
    /// Largest level n_max for the component structures
    #[arg(long, env = "PCLASS_DEPTH")]
    depth: Option<u32>,
}

impl PipelineArgs {
    fn options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            level: self.level,
            cap: self.cap,
            precision: self.precision,
            depth: self.depth,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze one prime end to end
    Analyze {
        #[arg(long)]
        prime: u64,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, value_enum, default_value = "json", env = "PCLASS_FORMAT")]
        format: Format,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan the primes in [from, to)
    Scan {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, default_value_t = 1, env = "PCLASS_JOBS")]
        jobs: usize,
        /// Results file, one JSON report per line
        #[arg(long, default_value = "pclass-results.jsonl", env = "PCLASS_OUT")]
        out: PathBuf,
        /// Checkpoint file (default: <out>.checkpoint.json)
        #[arg(long, env = "PCLASS_CHECKPOINT")]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        resume: bool,
        /// Resume even if the checkpoint is unreadable
        #[arg(long)]
        force: bool,
        #[arg(long, default_value_t = pclass_core::scan::DEFAULT_BATCH, env = "PCLASS_BATCH")]
        batch: usize,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Run the invariant suites
    Selftest {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fault {
    Bernoulli,
    Sign,
}

fn usage_or_internal(e: &Error) -> u8 {
    match e {
        Error::Internal(_) => 3,
        Error::Anomaly { .. } => 1,
        _ => 2,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::precondition(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::precondition(format!("stdout: {e}")))
        }
    }
}

fn print_suite(r: &SuiteResult) {
    let verdict = if r.ok() { "PASS" } else { "FAIL" };
    println!("{verdict} {:<14} passed {:>6} failed {:>4}", r.name, r.passed, r.failed);
    for f in &r.failures {
        println!("    {f}");
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Analyze {
            prime,
            pipeline,
            format,
            out,
        } => {
            let a = analyze(prime, &pipeline.options())?;
            for d in &a.diagnostics {
                eprintln!("pclass: {d}");
            }
            let text = match format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&a.report).expect("report serializes");
                    s.push('\n');
                    s
                }
                Format::Csv => to_csv(std::slice::from_ref(&a.report))?,
            };
            emit(&out, &text)?;
            Ok(a.report.exit_class().code() as u8)
        }
        Command::Scan {
            from,
            to,
            jobs,
            out,
            checkpoint,
            resume,
            force,
            batch,
            pipeline,
        } => {
            let mut cfg = ScanConfig::new(from, to, &out);
            cfg.checkpoint = checkpoint.unwrap_or_else(|| default_checkpoint_path(&out));
            cfg.jobs = jobs;
            cfg.resume = resume;
            cfg.force = force;
            cfg.batch_size = batch;
            cfg.options = pipeline.options();
            let summary = scan(&cfg)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("summary serializes")
            );
            if !summary.anomalous_primes.is_empty() {
                eprintln!(
                    "pclass: flags raised for p in {:?}; see {}",
                    summary.anomalous_primes,
                    out.display()
                );
            }
            Ok(summary.exit_code as u8)
        }
        Command::Selftest {
            suite,
            inject_fault,
        } => {
            let faults = Faults {
                bernoulli: matches!(inject_fault, Some(Fault::Bernoulli)),
                stickelberger_sign: matches!(inject_fault, Some(Fault::Sign)),
            };
            let results = match suite {
                Some(name) => vec![run_suite(&name, faults)?],
                None => run_all(faults),
            };
            for r in &results {
                print_suite(r);
            }
            let failed = results.iter().filter(|r| !r.ok()).count();
            println!("{} suites, {failed} failed", results.len());
            Ok(if failed == 0 {
                ExitClass::Ok.code() as u8
            } else {
                ExitClass::Internal.code() as u8
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pclass: {e}");
            ExitCode::from(usage_or_internal(&e))
        }
    }
}
