//! Command-line driver. Exit codes: 0 success, 1 a stage or verification
//! failed, 2 unreadable or schema-invalid input.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainProduct};
use crate::multiindex::Enumeration;
use crate::poly::{CoefficientStream, Poly, TermList};
use crate::scenario::Scenario;
use crate::universal::{run_construction, CenterMode, Construction};
use crate::verify::{check_batch, verify_certificate, Context, PredicateRecord, PredicateSpec, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Environment variable holding the log filter (`error`, `warn`, `info`, ...).
pub const LOG_ENV: &str = "UNITAYLOR_LOG";

/// Scenarios compiled into the binary, runnable with `demo <name>`.
pub const DEMOS: &[(&str, &str)] = &[
    ("one-stage", include_str!("../scenarios/one-stage.json")),
    ("two-stage", include_str!("../scenarios/two-stage.json")),
    ("alternating", include_str!("../scenarios/alternating.json")),
    ("parameterized", include_str!("../scenarios/parameterized.json")),
    ("strong", include_str!("../scenarios/strong.json")),
];

#[derive(Parser, Debug)]
#[command(name = "unitaylor", version, about = "Build and check finite-stage universal Taylor series certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Boundary sample spacing.
    #[arg(long, global = true)]
    density: Option<f64>,
    /// Seed of the fit-grid phase offset.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// plain, strong[:l] or infty[:l].
    #[arg(long, global = true)]
    variant: Option<Variant>,
    /// Fixed expansion center as re,im pairs, one per coordinate.
    #[arg(long, global = true, allow_hyphen_values = true)]
    fixed_center: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario and write stream, certificate and error tables.
    Construct {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Directory for stream.json, certificate.json and the CSV tables.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Recompute a certificate against a stream.
    Verify { stream: PathBuf, certificate: PathBuf },
    /// Evaluate E/F predicates for a candidate polynomial; prints a JSON report.
    Predicates { candidate: PathBuf, specs: PathBuf },
    /// Run a built-in scenario, or list them when no name is given.
    Demo {
        name: Option<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

/// Predicate specs, either bare (unit-disk domains sized from the candidate)
/// or with explicit domains.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SpecFile {
    Bare(Vec<PredicateSpec>),
    WithContext(SpecBatch),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecBatch {
    #[serde(default)]
    parameter_domains: Vec<Domain>,
    domains: Vec<Domain>,
    #[serde(default)]
    enumeration: Option<String>,
    specs: Vec<PredicateSpec>,
}

#[derive(Debug, Serialize)]
struct PredicateReport {
    all_pass: bool,
    records: Vec<PredicateRecord>,
}

/// Input error tagged with the file it came from.
struct InputError {
    path: PathBuf,
    err: Error,
}

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.err {
            Error::Json(e) if e.line() > 0 => {
                write!(f, "{}:{}:{}: {}", self.path.display(), e.line(), e.column(), self.err)
            }
            e => write!(f, "{}: {e}", self.path.display()),
        }
    }
}

fn read_input<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T>) -> std::result::Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError { path: path.into(), err: e.into() })?;
    parse(&text).map_err(|err| InputError { path: path.into(), err })
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn parse_fixed_center(s: &str) -> Result<Vec<[f64; 2]>> {
    let nums = s
        .split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad number {t:?} in --fixed-center")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if nums.is_empty() || nums.len() % 2 != 0 {
        return Err(Error::InvalidArgument("--fixed-center takes re,im pairs".into()));
    }
    Ok(nums.chunks(2).map(|p| [p[0], p[1]]).collect())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let fixed = match cli.overrides.fixed_center.as_deref().map(parse_fixed_center).transpose() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match cli.command {
        Command::Construct { scenario, out_dir } => match read_input(&scenario, Scenario::from_json) {
            Ok(sc) => construct(sc, &cli.overrides, fixed, &out_dir),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
        Command::Demo { name: None, .. } => {
            for (name, _) in DEMOS {
                emit(name);
            }
            EXIT_OK
        }
        Command::Demo { name: Some(name), out_dir } => match DEMOS.iter().find(|(n, _)| *n == name) {
            Some((_, text)) => match Scenario::from_json(text) {
                Ok(sc) => construct(sc, &cli.overrides, fixed, &out_dir),
                Err(e) => {
                    eprintln!("error: built-in scenario {name}: {e}");
                    EXIT_INPUT
                }
            },
            None => {
                eprintln!("error: no built-in scenario named {name:?}");
                EXIT_INPUT
            }
        },
        Command::Verify { stream, certificate } => verify(&stream, &certificate),
        Command::Predicates { candidate, specs } => predicates(&candidate, &specs, &cli.overrides, fixed),
    }
}

fn construct(mut sc: Scenario, ov: &Overrides, fixed: Option<Vec<[f64; 2]>>, out_dir: &Path) -> i32 {
    if let Some(h) = ov.density {
        sc.options.density = h;
    }
    if let Some(seed) = ov.seed {
        sc.options.seed = seed;
    }
    if let Some(v) = ov.variant {
        sc.variant = v;
    }
    if let Some(z) = fixed {
        sc.center = CenterMode::Fixed(z);
    }
    let plan = match sc.plan() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: invalid scenario: {e}");
            return EXIT_INPUT;
        }
    };
    let built = match run_construction(&plan) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: construction aborted: {e}");
            return EXIT_INPUT;
        }
    };
    if let Err(e) = write_artifacts(&built, out_dir) {
        eprintln!("error: writing to {}: {e}", out_dir.display());
        return EXIT_INPUT;
    }
    let body = &built.certificate.body;
    for st in &body.stages {
        emit(&format!(
            "stage {} lambda {} e_side {:.3e} f_side {:.3e} tolerance {:e} {}",
            st.stage,
            st.lambda,
            st.e_side_error,
            st.f_side_error,
            st.tolerance,
            if st.passed { "pass" } else { "FAIL" }
        ));
    }
    emit(&format!("certificate {} written to {}", built.certificate.body_sha256, out_dir.display()));
    if body.passed {
        EXIT_OK
    } else {
        if let Some(st) = body.stages.iter().find(|s| !s.passed) {
            eprintln!("stage {} failed: {}", st.stage, st.failure.as_deref().unwrap_or("tolerance not met"));
        }
        EXIT_FAILED
    }
}

/// Writes `stream.json`, `certificate.json`, `errors.csv` and per-stage fit
/// reports `fit_stage<t>.json` / `fit_stage<t>.csv`.
pub fn write_artifacts(built: &Construction, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("stream.json"), built.stream.to_json())?;
    fs::write(out_dir.join("certificate.json"), built.certificate.to_json())?;
    fs::write(out_dir.join("errors.csv"), built.certificate.body.errors_csv())?;
    for (st, fit) in built.certificate.body.stages.iter().zip(&built.fits) {
        fs::write(out_dir.join(format!("fit_stage{}.json", st.stage)), serde_json::to_string_pretty(&fit.to_doc())?)?;
        fs::write(out_dir.join(format!("fit_stage{}.csv", st.stage)), fit.history_csv())?;
    }
    Ok(())
}

fn verify(stream_path: &Path, cert_path: &Path) -> i32 {
    let inputs = read_input(stream_path, CoefficientStream::from_json)
        .and_then(|s| read_input(cert_path, crate::universal::Certificate::from_json).map(|c| (s, c)));
    let (stream, cert) = match inputs {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    match verify_certificate(&stream, &cert) {
        Ok(report) => {
            emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
            if report.ok {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e @ Error::Refused(_)) => {
            eprintln!("verification refused: {e}");
            EXIT_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn predicates(cand_path: &Path, specs_path: &Path, ov: &Overrides, fixed: Option<Vec<[f64; 2]>>) -> i32 {
    let inputs = read_input(specs_path, |s| Ok(serde_json::from_str::<SpecFile>(s)?))
        .and_then(|f| read_input(cand_path, |s| Ok(serde_json::from_str::<TermList>(s)?)).map(|t| (f, t)));
    let (file, terms) = match inputs {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let result = (|| -> Result<PredicateReport> {
        let (g, omega, enumeration, mut specs) = match file {
            SpecFile::WithContext(b) => (b.parameter_domains, b.domains, b.enumeration, b.specs),
            SpecFile::Bare(specs) => {
                let p = Poly::from_term_list(&terms, None, None)?;
                (vec![Domain::unit_disk(); p.r()], vec![Domain::unit_disk(); p.d()], None, specs)
            }
        };
        let candidate = Poly::from_term_list(&terms, Some(g.len()), Some(omega.len()))?;
        let enumeration = Enumeration::from_tag(enumeration.as_deref().unwrap_or("graded-lex"), omega.len())?;
        let mut ctx = Context::new(DomainProduct::new(g), DomainProduct::new(omega), enumeration)?;
        if let Some(h) = ov.density {
            ctx.density = h;
        }
        for spec in &mut specs {
            if let Some(v) = ov.variant {
                spec.variant = v;
            }
            if fixed.is_some() {
                spec.fixed_center.clone_from(&fixed);
            }
        }
        let records = check_batch(&candidate, &specs, &ctx)?;
        Ok(PredicateReport { all_pass: records.iter().all(|r| r.e.pass && r.f.pass), records })
    })();
    match result {
        Ok(report) => {
            emit(&serde_json::to_string_pretty(&report).expect("report serializes"));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

/// Entry point of the binary: sets up logging and exits with the command's code.
pub fn main() -> ! {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    std::process::exit(run(std::env::args_os()))
}
