//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ffpos_core::matpos::{self, MatrixJson, SymMatrix};
use ffpos_core::preserver::{self, ClassificationResult, ClassifyOptions, Form, Mode};
use ffpos_core::{paley, Elem, Error, Field};
use serde::Serialize;

use crate::suites::{self, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ffpos",
    version,
    about = "Positivity preservers over finite fields"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field inspection.
    Field {
        #[command(subcommand)]
        action: FieldAction,
    },
    /// Matrix checks.
    Matrix {
        #[command(subcommand)]
        action: MatrixAction,
    },
    /// Export the Paley graph P(q).
    Paley(PaleyArgs),
    /// Classify the entrywise preservers of n × n matrices.
    Classify(ClassifyArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// List the verification suites.
    Suites,
}

#[derive(Debug, Subcommand)]
pub enum FieldAction {
    /// Print the field parameters as JSON.
    Info(FieldArgs),
}

#[derive(Debug, Subcommand)]
pub enum MatrixAction {
    /// Leading minors, positive definiteness and a Cholesky factor.
    PdCheck {
        #[command(flatten)]
        field: FieldArgs,
        /// `{"n": N, "entries": [...]}` or nested rows `[[a, b], [b, c]]`, as element codes.
        #[arg(long)]
        matrix: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
}

impl FieldArgs {
    fn field(&self) -> Result<Field> {
        let p = u32::try_from(self.p).map_err(|_| Error::NotPrime(self.p))?;
        Ok(Field::new(p, self.k)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Args)]
pub struct PaleyArgs {
    /// Field order; alternatively give --p and --k.
    #[arg(long, conflicts_with_all = ["p", "k"])]
    pub q: Option<u32>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Preserver,
    Sign,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Preserver)]
    pub mode: ModeArg,
    /// Use the pruned search (default).
    #[arg(long, overrides_with = "no_prune")]
    pub prune: bool,
    /// Enumerate every table instead.
    #[arg(long = "no-prune")]
    pub no_prune: bool,
    /// Worker threads; 0 picks automatically.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Wall-clock budget in seconds; an interrupted run is reported as non-exhaustive.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    /// Restrict the suite to one field.
    #[arg(long, requires = "k")]
    pub p: Option<u64>,
    #[arg(long, requires = "p")]
    pub k: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}

/// Errors that mean a computation contradicted itself exit with 1, everything else with 2.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::RouteDisagreement(_)) | Some(Error::NotStronglyRegular(_)) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

pub fn run(config: &RunConfig) -> Result<i32> {
    match &config.command {
        Command::Field {
            action: FieldAction::Info(args),
        } => {
            let f = args.field()?;
            emit(None, &to_json(&f.info()))?;
            Ok(EXIT_OK)
        }
        Command::Matrix {
            action: MatrixAction::PdCheck { field, matrix },
        } => pd_check(&field.field()?, matrix),
        Command::Paley(args) => paley_cmd(args),
        Command::Classify(args) => classify_cmd(args),
        Command::Verify(args) => verify_cmd(args),
        Command::Suites => {
            let list: Vec<SuiteListing> = suites::suite_registry()
                .iter()
                .map(|s| SuiteListing {
                    id: s.id,
                    anchor: s.anchor,
                    orders: s.default_orders,
                })
                .collect();
            emit(None, &to_json(&list))?;
            Ok(EXIT_OK)
        }
    }
}

#[derive(Serialize)]
struct SuiteListing {
    id: &'static str,
    anchor: &'static str,
    orders: &'static [u32],
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

/// Writes to `out` atomically, or to standard output.
fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Temp file in the destination directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Timing goes to `<out>.meta.json` so the main artifact stays byte-stable.
fn write_meta(out: &Path, elapsed: Duration) -> Result<()> {
    #[derive(Serialize)]
    struct Meta {
        elapsed_ms: u128,
    }
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    write_atomic(
        Path::new(&name),
        to_json(&Meta {
            elapsed_ms: elapsed.as_millis(),
        })
        .as_bytes(),
    )
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum MatrixInput {
    Json(MatrixJson),
    Rows(Vec<Vec<u32>>),
}

fn parse_matrix(field: &Field, text: &str) -> Result<SymMatrix> {
    let input: MatrixInput =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("matrix: {e}")))?;
    let json = match input {
        MatrixInput::Json(j) => j,
        MatrixInput::Rows(rows) => {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput("matrix rows must form a square".into()).into());
            }
            MatrixJson {
                n,
                entries: rows.concat(),
            }
        }
    };
    Ok(json.to_matrix(field)?)
}

#[derive(Serialize)]
struct PdReport {
    field: ffpos_core::FieldInfo,
    matrix: MatrixJson,
    leading_minors: Vec<Elem>,
    minor_signs: Vec<i8>,
    positive_definite: bool,
    cholesky: Option<Vec<Vec<Elem>>>,
}

fn pd_check(field: &Field, text: &str) -> Result<i32> {
    let a = parse_matrix(field, text)?;
    if a.n() == 0 || a.n() > matpos::MAX_DIM {
        bail!(Error::InvalidInput(format!(
            "dimension must lie in [1, {}]",
            matpos::MAX_DIM
        )));
    }
    let minors = matpos::leading_minors(field, &a);
    let report = PdReport {
        field: field.info(),
        matrix: a.to_json(),
        minor_signs: minors.iter().map(|&m| field.eta(m).as_i8()).collect(),
        leading_minors: minors,
        positive_definite: matpos::is_positive_definite(field, &a),
        cholesky: matpos::cholesky(field, &a).map(|l| l.rows()),
    };
    emit(None, &to_json(&report))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PaleyReport {
    field: ffpos_core::FieldInfo,
    directed: bool,
    vertices: usize,
    srg: Option<paley::SrgParams>,
    edges: Vec<(usize, usize)>,
}

fn paley_cmd(args: &PaleyArgs) -> Result<i32> {
    let field = match (args.q, args.p) {
        (Some(q), _) => Field::from_order(q)?,
        (None, Some(p)) => FieldArgs {
            p,
            k: args.k.unwrap_or(1),
        }
        .field()?,
        (None, None) => bail!(Error::InvalidInput("give --q or --p".into())),
    };
    let g = paley::paley_graph(&field)?;
    let text = match args.emit {
        Emit::Dot => paley::to_dot(&g),
        Emit::Json => {
            let srg = if g.directed() {
                None
            } else {
                Some(paley::srg_params(&g.graph)?)
            };
            to_json(&PaleyReport {
                field: field.info(),
                directed: g.directed(),
                vertices: g.graph.n(),
                srg,
                edges: g.graph.edges(),
            })
        }
        Emit::Csv => bail!(Error::InvalidInput("graphs export as json or dot".into())),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn classification_csv(r: &ClassificationResult) -> String {
    let mut s = String::from("index,kind,c,exponent");
    for x in 0..r.q {
        s.push_str(&format!(",f({x})"));
    }
    s.push('\n');
    for (i, c) in r.preservers.iter().enumerate() {
        let (kind, coeff, exponent) = match &c.form {
            Form::AutomorphismMultiple { c, exponent, .. } => (
                "automorphism_multiple",
                c.code().to_string(),
                exponent.to_string(),
            ),
            Form::BijectiveMonomial { c, exponent, .. } => (
                "bijective_monomial",
                c.code().to_string(),
                exponent.to_string(),
            ),
            Form::Other => ("other", String::new(), String::new()),
        };
        s.push_str(&format!("{i},{kind},{coeff},{exponent}"));
        for v in c.table.codes() {
            s.push_str(&format!(",{v}"));
        }
        s.push('\n');
    }
    s
}

fn classify_cmd(args: &ClassifyArgs) -> Result<i32> {
    let field = args.field.field()?;
    let mode = match args.mode {
        ModeArg::Preserver => Mode::Preserver,
        ModeArg::Sign => Mode::SignPreserver,
    };
    let timeout = match args.timeout {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            bail!(Error::InvalidInput(
                "timeout must be a positive number of seconds".into()
            ))
        }
        t => t.map(Duration::from_secs_f64),
    };
    let options = ClassifyOptions {
        prune: !args.no_prune,
        jobs: args.jobs,
        timeout,
    };
    let r = preserver::classify(&field, args.n, mode, &options)?;
    let text = match args.emit {
        Emit::Json => to_json(&r),
        Emit::Csv => classification_csv(&r),
        Emit::Dot => bail!(Error::InvalidInput(
            "classifications export as json or csv".into()
        )),
    };
    emit(args.out.as_deref(), &text)?;
    if let Some(out) = &args.out {
        write_meta(out, r.elapsed)?;
    }
    if !r.exhaustive {
        eprintln!("search interrupted before completion; result is partial");
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

fn verify_cmd(args: &VerifyArgs) -> Result<i32> {
    let suite = suites::find_suite(&args.suite)
        .ok_or_else(|| anyhow!(Error::InvalidInput(format!("unknown suite {}", args.suite))))?;
    let field = match (args.p, args.k) {
        (Some(p), Some(k)) => Some(FieldArgs { p, k }.field()?),
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()?;
    let opts = SuiteOptions { jobs: args.jobs };
    let start = Instant::now();
    let report = pool.install(|| suites::run_suite(suite, field.as_ref(), &opts))?;
    let elapsed = start.elapsed();
    emit(args.out.as_deref(), &report.to_canonical_json())?;
    if let Some(out) = &args.out {
        write_meta(out, elapsed)?;
    }
    for flag in &report.flags {
        eprintln!("flag: {flag}");
    }
    for c in report.failures() {
        eprintln!(
            "FAIL {}: expected {} observed {}",
            c.name, c.expected, c.observed
        );
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_FAILURE })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_matrix_forms() {
        let f = Field::new(7, 1).unwrap();
        let a = parse_matrix(&f, r#"{"n": 2, "entries": [1, 2, 2, 6]}"#).unwrap();
        let b = parse_matrix(&f, "[[1, 2], [2, 6]]").unwrap();
        assert_eq!(a, b);
        assert!(parse_matrix(&f, "[[1, 2], [3, 6]]").is_err());
        assert!(parse_matrix(&f, "[[1, 9], [9, 6]]").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            exit_code_for(&Error::RouteDisagreement("x".into()).into()),
            EXIT_FAILURE
        );
        assert_eq!(exit_code_for(&Error::NotPrime(4).into()), EXIT_USAGE);
        assert_eq!(
            main_with_args(["ffpos", "field", "info", "--p", "4", "--k", "1"]),
            EXIT_USAGE
        );
        assert_eq!(
            main_with_args(["ffpos", "verify", "--suite", "nope"]),
            EXIT_USAGE
        );
        assert_eq!(main_with_args(["ffpos", "bogus"]), EXIT_USAGE);
    }
}
