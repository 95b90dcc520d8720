//! Command-line front end: parses system documents, runs one analysis and
//! emits a JSON report plus a short human summary.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use pfaffian::error::{Error, Result};
use pfaffian::io::SystemDocument;
use pfaffian::linalg::QMatrix;
use pfaffian::rational::format_rational;
use pfaffian::series::{SeriesMatrix, Window};
use pfaffian::system::{GaugeTransform, PfaffianSystem};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

mod commands;

#[derive(Parser, Debug, Clone)]
#[command(name = "pfaffian", version, about = "Formal reduction of bivariate Pfaffian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Override the x truncation order of the document.
    #[arg(long, global = true)]
    pub trunc_x: Option<u32>,

    /// Override the y truncation order of the document.
    #[arg(long, global = true)]
    pub trunc_y: Option<u32>,

    /// Write the JSON report to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Treat zero verdicts certified on fewer orders than the truncation as
    /// errors.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Check the integrability condition.
    Check { input: PathBuf },
    /// Reduce both Poincaré ranks and write `<stem>.reduced.json`.
    Reduce { input: PathBuf },
    /// Exponential parts in x and y.
    Expparts { input: PathBuf },
    /// Katz invariants and true Poincaré rank.
    Katz { input: PathBuf },
    /// Data of a formal fundamental matrix.
    Solve { input: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Reduce { .. } => "reduce",
            Command::Expparts { .. } => "expparts",
            Command::Katz { .. } => "katz",
            Command::Solve { .. } => "solve",
        }
    }

    pub fn input(&self) -> &Path {
        match self {
            Command::Check { input }
            | Command::Reduce { input }
            | Command::Expparts { input }
            | Command::Katz { input }
            | Command::Solve { input } => input,
        }
    }
}

/// A zero verdict with the window it holds in. `depth` counts the verified
/// orders from the leading exponent of the checked quantity.
#[derive(Clone, Debug)]
pub struct Claim {
    pub claim: String,
    pub window: Window,
    pub depth: (Option<i64>, Option<i64>),
}

impl Claim {
    pub fn new(claim: impl Into<String>, window: Window, origin: (i64, i64)) -> Claim {
        Claim {
            claim: claim.into(),
            window,
            depth: (window.x.map(|w| w - origin.0), window.y.map(|w| w - origin.1)),
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "claim": self.claim,
            "window": {"x": self.window.x, "y": self.window.y},
            "depth": {"x": self.depth.0, "y": self.depth.1},
        })
    }
}

/// Outcome of one command.
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
    pub summary: String,
}

/// What a command hands back on success.
pub struct Success {
    pub results: Value,
    pub claims: Vec<Claim>,
    pub summary: String,
}

/// Failure with whatever partial results were gathered.
pub struct Failure {
    pub error: Error,
    pub step: Option<String>,
    pub partial: Option<Value>,
    pub claims: Vec<Claim>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure {
            error,
            step: None,
            partial: None,
            claims: Vec::new(),
        }
    }
}

pub struct Input {
    pub path: PathBuf,
    pub digest: String,
    pub trunc: (u32, u32),
    pub system: PfaffianSystem,
}

fn load(path: &Path, tx: Option<u32>, ty: Option<u32>) -> std::result::Result<Input, (Option<String>, Error)> {
    let bytes = std::fs::read(path).map_err(|e| (None, Error::Io(format!("{}: {e}", path.display()))))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let fail = |e| (Some(digest.clone()), e);
    let text = String::from_utf8(bytes).map_err(|_| {
        fail(Error::Parse {
            location: "document".into(),
            message: "not valid UTF-8".into(),
        })
    })?;
    let doc = SystemDocument::from_json(&text).map_err(fail)?;
    let trunc = (tx.unwrap_or(doc.trunc_x), ty.unwrap_or(doc.trunc_y));
    let system = doc.to_system(Some(trunc)).map_err(fail)?;
    Ok(Input {
        path: path.to_path_buf(),
        digest: digest.clone(),
        trunc,
        system,
    })
}

pub(crate) fn qmatrix_json(m: &QMatrix) -> Value {
    json!(m
        .to_rows()
        .iter()
        .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

pub(crate) fn series_json(m: &SeriesMatrix) -> Value {
    let w = |t: u32| (t != pfaffian::series::EXACT).then_some(t);
    json!({
        "trunc_x": w(m.trunc_x()),
        "trunc_y": w(m.trunc_y()),
        "terms": pfaffian::io::series_terms(m),
    })
}

pub(crate) fn gauge_json(g: &GaugeTransform) -> Value {
    json!({
        "provenance": g.provenance,
        "matrix": series_json(&g.mat),
    })
}

/// Rational eigenvalues with multiplicity, then the remaining irreducible
/// factors of the characteristic polynomial.
pub(crate) fn spectrum_json(m: &QMatrix) -> Value {
    let mut eig = Vec::new();
    let mut other = Vec::new();
    for f in m.charpoly().coprime_factors() {
        match &f.root {
            Some(r) => eig.extend(std::iter::repeat_n(format_rational(r), f.multiplicity as usize)),
            None => other.push(format!("({})^{}", f.base, f.multiplicity)),
        }
    }
    json!({"eigenvalues": eig, "other_factors": other})
}

pub(crate) fn spectrum_text(m: &QMatrix) -> String {
    let mut roots = Vec::new();
    let mut other = Vec::new();
    for f in m.charpoly().coprime_factors() {
        match &f.root {
            Some(r) => roots.extend(std::iter::repeat_n(r.clone(), f.multiplicity as usize)),
            None => other.push(format!("roots of {}", f.base)),
        }
    }
    roots.sort();
    let mut out: Vec<String> = roots.iter().map(format_rational).collect();
    out.extend(other);
    format!("{{{}}}", out.join(", "))
}

fn strict_violation(claims: &[Claim], trunc: (u32, u32)) -> Option<Error> {
    for c in claims {
        let short = |d: Option<i64>, t: u32| d.is_some_and(|d| d < t as i64);
        if short(c.depth.0, trunc.0) || short(c.depth.1, trunc.1) {
            return Some(Error::TruncationExhausted {
                context: format!("strict mode: '{}' certified on fewer orders than requested", c.claim),
                window: c.window,
            });
        }
    }
    None
}

fn error_json(error: &Error, step: Option<&str>) -> Value {
    let mut v = json!({
        "kind": error.kind(),
        "code": error.exit_code(),
        "message": error.to_string(),
        "step": step,
    });
    match error {
        Error::AlgebraicExtensionRequired { factor } => v["factor"] = json!(factor),
        Error::JointResonance { monomials } => v["monomials"] = json!(monomials),
        Error::RamificationRequired { axis, index } => {
            v["axis"] = json!(axis);
            v["index"] = json!(index);
        }
        Error::TruncationExhausted { window, .. } | Error::IntegrabilityViolation { window, .. } => {
            v["window"] = json!({"x": window.x, "y": window.y})
        }
        _ => {}
    }
    v
}

/// Runs one command. Never panics on bad input; every failure maps to an
/// exit code and an error record in the report.
pub fn run(cli: &Cli) -> Outcome {
    let cmd = &cli.command;
    let mut report = json!({
        "command": {
            "name": cmd.name(),
            "input": cmd.input().display().to_string(),
            "trunc_x": cli.trunc_x,
            "trunc_y": cli.trunc_y,
            "strict": cli.strict,
        },
        "input_digest": Value::Null,
        "status": "error",
        "results": Value::Null,
        "windows": [],
        "error": Value::Null,
    });
    let input = match load(cmd.input(), cli.trunc_x, cli.trunc_y) {
        Ok(i) => i,
        Err((digest, e)) => {
            report["input_digest"] = json!(digest);
            report["error"] = error_json(&e, Some("input"));
            return Outcome {
                exit_code: e.exit_code(),
                summary: format!("error: {e}"),
                report,
            };
        }
    };
    report["input_digest"] = json!({"sha256": input.digest});
    report["truncation"] = json!({"x": input.trunc.0, "y": input.trunc.1});
    let result = match cmd {
        Command::Check { .. } => commands::check(&input),
        Command::Reduce { .. } => commands::reduce(&input),
        Command::Expparts { .. } => commands::expparts(&input),
        Command::Katz { .. } => commands::katz(&input),
        Command::Solve { .. } => commands::solve(&input),
    };
    match result {
        Ok(ok) => {
            report["results"] = ok.results;
            report["windows"] = json!(ok.claims.iter().map(Claim::to_json).collect::<Vec<_>>());
            if cli.strict {
                if let Some(e) = strict_violation(&ok.claims, input.trunc) {
                    report["error"] = error_json(&e, Some("strict"));
                    return Outcome {
                        exit_code: e.exit_code(),
                        summary: format!("{}\nerror: {e}", ok.summary),
                        report,
                    };
                }
            }
            report["status"] = json!("ok");
            Outcome {
                exit_code: 0,
                summary: ok.summary,
                report,
            }
        }
        Err(f) => {
            report["results"] = f.partial.unwrap_or(Value::Null);
            report["windows"] = json!(f.claims.iter().map(Claim::to_json).collect::<Vec<_>>());
            report["error"] = error_json(&f.error, f.step.as_deref());
            let step = f.step.map(|s| format!(" (at {s})")).unwrap_or_default();
            Outcome {
                exit_code: f.error.exit_code(),
                summary: format!("error{step}: {}", f.error),
                report,
            }
        }
    }
}

/// Writes the report when requested; a failed write becomes exit code 2.
pub fn finish(cli: &Cli, outcome: &Outcome) -> i32 {
    if let Some(path) = &cli.report {
        let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize") + "\n";
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write report {}: {e}", path.display());
            return 2;
        }
    }
    outcome.exit_code
}

pub(crate) fn result_of<T>(r: Result<T>) -> std::result::Result<T, Box<Failure>> {
    r.map_err(|e| Box::new(Failure::from(e)))
}
