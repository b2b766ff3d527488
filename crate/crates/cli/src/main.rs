//! `symext`: scenario runner over the extension library.
//!
//! Exit codes: 0 success, 1 I/O, parse or invalid input, 2 infeasible
//! instance spec, 3 non-admissible parameter (witness JSON on stderr),
//! 4 the three invertibility tests disagree.

mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use symext::identities::{verify_suite, SuiteOptions};
use symext::invertibility::{ChainOptions, Doubling};
use symext::io::{complex_to_pair, SCHEMA_VERSION};
use symext::resolvents::{
    compressed_resolvent, default_grid, shtraus_resolvent, ParameterFunction,
};
use symext::{
    build_invertible_selfadjoint, check_invertibility, extend, gen_symmetric, Complex64,
    ContractionParameter, DomainOperator, EmbeddedExtension, Error, InstanceSpec, Tolerances,
};

use files::{ExtensionInput, OperatorFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invertibility tests disagree")]
    Disagreement,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::SpecInfeasible(_)) => 2,
            CliError::Core(Error::NotAdmissible { .. }) => 3,
            CliError::Disagreement => 4,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Usage(_) => "usage",
            CliError::Core(Error::SpecInfeasible(_)) => "spec-infeasible",
            CliError::Core(Error::NotAdmissible { .. }) => "not-admissible",
            CliError::Core(_) => "invalid-input",
            CliError::Disagreement => "disagreement",
        }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Core(Error::NotAdmissible { witness, margin }) = self {
            let w: Vec<[f64; 2]> = witness.iter().map(|&c| complex_to_pair(c)).collect();
            v["witness"] = json!(w);
            v["margin"] = json!(margin);
        }
        v
    }
}

/// Parses `"re,im"`; a lone number is taken as real.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number {t:?}: {e}"))
    };
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let z = parse_complex(s)?;
    Ok((z.re, z.im))
}

#[derive(Parser)]
#[command(
    name = "symext",
    version,
    about = "Extensions of symmetric operators with non-dense domains"
)]
struct Cli {
    #[command(flatten)]
    tols: TolArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolArgs {
    /// Rank and kernel threshold applied to loaded operators.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Graph-inclusion slack for extension hypotheses.
    #[arg(long, global = true)]
    tol_inclusion: Option<f64>,
    /// Rate bound of the I-admissibility test.
    #[arg(long, global = true)]
    tol_rate_bound: Option<f64>,
    /// Kernel threshold on the extrapolated boundary limit.
    #[arg(long, global = true)]
    tol_limit: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, CliError> {
        let mut t = Tolerances::default();
        for (slot, value) in [
            (&mut t.rank, self.tol_rank),
            (&mut t.inclusion, self.tol_inclusion),
            (&mut t.rate_bound, self.tol_rate_bound),
            (&mut t.limit, self.tol_limit),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!(
                        "tolerances must be positive, got {v}"
                    )));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random closed symmetric operator.
    Gen(GenArgs),
    /// Build the extension B of A from a contraction parameter.
    Extend(ParamArgs),
    /// Decide invertibility of B three ways.
    CheckInvert(ParamArgs),
    /// Build an invertible self-adjoint extension, possibly with exit space.
    BuildSa(BuildArgs),
    /// Evaluate the generalized resolvent on a grid and compare both routes.
    Resolvent(ResolventArgs),
    /// Run the identity suite on an extension.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    defect: usize,
    /// Ask for D(X) = {0}; only feasible with defect 0.
    #[arg(long, conflicts_with = "no_dense_range")]
    dense_range: bool,
    /// The default.
    #[arg(long)]
    no_dense_range: bool,
    /// Magnitude window "lo,hi" for the spectrum of the compressed form.
    #[arg(long, value_parser = parse_window, default_value = "0.5,4")]
    window: (f64, f64),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ParamArgs {
    operator: PathBuf,
    /// Base point "re,im" off the real axis.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Complex64,
    /// Parameter file; omitted means the empty parameter.
    #[arg(long)]
    param: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    operator: PathBuf,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    z: Complex64,
    /// Seed of the tie-break stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Work in H ⊕ H with A ⊕ (-A), producing an exit-space extension.
    #[arg(long)]
    double: bool,
    /// Chain JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Extension file for `resolvent` and `verify`.
    #[arg(long)]
    ext_out: Option<PathBuf>,
}

#[derive(Args)]
struct ResolventArgs {
    operator: PathBuf,
    extension: PathBuf,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    lambda0: Complex64,
    /// "default" for the two-circle grid around lambda0, or "re,im;re,im;...".
    #[arg(long, default_value = "default", allow_hyphen_values = true)]
    grid: String,
    /// CSV of resolvent values.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Comparison JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    operator: PathBuf,
    extension: PathBuf,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    lambda0: Complex64,
    #[arg(long, default_value = "all", value_parser = ["all"])]
    suite: String,
    #[arg(long, default_value = "default", allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_grid(spec: &str, lambda0: Complex64) -> Result<Vec<Complex64>, CliError> {
    if spec == "default" {
        return Ok(default_grid(lambda0));
    }
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_complex(s).map_err(CliError::Usage))
        .collect()
}

fn pair(z: Complex64) -> [f64; 2] {
    complex_to_pair(z)
}

fn header(command: &str, tols: &Tolerances) -> Value {
    json!({ "schema": SCHEMA_VERSION, "command": command, "tolerances": tols })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn cmd_gen(args: &GenArgs) -> Result<(), CliError> {
    let spec = InstanceSpec {
        ambient_dim: args.dim,
        defect: args.defect,
        dense_range: args.dense_range,
        spectrum_window: args.window,
        seed: args.seed,
    };
    let operator = gen_symmetric(&spec)?;
    let file = OperatorFile {
        schema: SCHEMA_VERSION,
        operator,
        spec: Some(spec),
        note: None,
    };
    files::write_json(args.output.as_deref(), &file)
}

fn load_parameter(
    args: &ParamArgs,
    a: &DomainOperator,
    tols: &Tolerances,
) -> Result<DomainOperator, CliError> {
    match &args.param {
        Some(p) => files::read_operator(p, tols),
        None => Ok(ContractionParameter::empty(a, args.z).t),
    }
}

fn cmd_extend(args: &ParamArgs, tols: &Tolerances) -> Result<(), CliError> {
    let a = files::read_operator(&args.operator, tols)?;
    let t = load_parameter(args, &a, tols)?;
    let param = ContractionParameter::new(&a, args.z, t)?;
    let report = extend(&a, args.z, &param)?;
    let out = merge(
        header("extend", tols),
        json!({ "z": pair(args.z), "report": report }),
    );
    files::write_json(args.output.as_deref(), &out)
}

fn cmd_check_invert(args: &ParamArgs, tols: &Tolerances) -> Result<(), CliError> {
    let a = files::read_operator(&args.operator, tols)?;
    let t = load_parameter(args, &a, tols)?;
    let verdict = check_invertibility(&a, args.z, &t)?;
    let out = merge(
        header("check-invert", tols),
        json!({ "z": pair(args.z), "verdict": verdict }),
    );
    files::write_json(args.output.as_deref(), &out)?;
    if verdict.agree {
        Ok(())
    } else {
        Err(CliError::Disagreement)
    }
}

fn cmd_build_sa(args: &BuildArgs, tols: &Tolerances) -> Result<(), CliError> {
    let a = files::read_operator(&args.operator, tols)?;
    let opts = ChainOptions {
        seed: args.seed,
        doubling: if args.double {
            Doubling::Always
        } else {
            Doubling::Auto
        },
        ..Default::default()
    };
    let chain = build_invertible_selfadjoint(&a, args.z, &opts)?;
    let ext = EmbeddedExtension::from_chain(&a, &chain, tols)?;
    if let Some(path) = &args.ext_out {
        let file = files::ExtensionFile {
            schema: SCHEMA_VERSION,
            extension: ext,
        };
        files::write_json(Some(path), &file)?;
    }
    let out = merge(
        header("build-sa", tols),
        json!({ "options": opts, "chain": chain }),
    );
    files::write_json(args.output.as_deref(), &out)
}

/// The extension over the base operator from `a.json`; the hypothesis is
/// checked only when `strict`.
fn load_extension(
    a: &DomainOperator,
    path: &Path,
    tols: &Tolerances,
    strict: bool,
) -> Result<EmbeddedExtension, CliError> {
    let (atilde, embed) = match files::read_extension(path, tols)? {
        ExtensionInput::Embedded(f) => (f.extension.atilde.with_tol(tols.rank), f.extension.embed),
        ExtensionInput::Canonical(f) => (f.operator, symext::linalg::identity(a.ambient_dim())),
    };
    let ext = if strict {
        EmbeddedExtension::new(a.clone(), atilde, embed, tols)?
    } else {
        EmbeddedExtension::new_unchecked(a.clone(), atilde, embed)?
    };
    Ok(ext)
}

fn cmd_resolvent(args: &ResolventArgs, tols: &Tolerances) -> Result<(), CliError> {
    let a = files::read_operator(&args.operator, tols)?;
    let ext = load_extension(&a, &args.extension, tols, true)?;
    let grid = parse_grid(&args.grid, args.lambda0)?;
    let f = ParameterFunction::from_extension(&ext, args.lambda0)?;
    let d = ext.dim();

    let mut csv = String::from("lambda_re,lambda_im");
    for i in 0..d {
        for j in 0..d {
            csv.push_str(&format!(",r{i}_{j}_re,r{i}_{j}_im"));
        }
    }
    csv.push('\n');

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    let mut max_error: f64 = 0.0;
    for lam in grid {
        let r = match compressed_resolvent(&ext, lam) {
            Ok(r) => r,
            Err(e) => {
                skipped.push(json!({ "lambda": pair(lam), "note": e.to_string() }));
                continue;
            }
        };
        csv.push_str(&format!("{:e},{:e}", lam.re, lam.im));
        for i in 0..d {
            for j in 0..d {
                csv.push_str(&format!(",{:e},{:e}", r[(i, j)].re, r[(i, j)].im));
            }
        }
        csv.push('\n');
        match shtraus_resolvent(&a, &f, lam) {
            Ok(s) => {
                let err = symext::linalg::op_norm(&(&r - s));
                max_error = max_error.max(err);
                points.push(json!({ "lambda": pair(lam), "error": err }));
            }
            Err(e) => {
                skipped.push(json!({ "lambda": pair(lam), "note": format!("no comparison: {e}") }))
            }
        }
    }
    files::write_text(args.csv.as_deref(), &csv)?;
    if args.csv.is_some() || args.output.is_some() {
        let out = merge(
            header("resolvent", tols),
            json!({
                "lambda0": pair(args.lambda0),
                "exit_dim": ext.exit_dim,
                "max_error": max_error,
                "points": points,
                "skipped": skipped,
            }),
        );
        files::write_json(args.output.as_deref(), &out)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, tols: &Tolerances) -> Result<(), CliError> {
    let a = files::read_operator(&args.operator, tols)?;
    let ext = load_extension(&a, &args.extension, tols, false)?;
    let opts = SuiteOptions {
        lambda0: args.lambda0,
        grid: parse_grid(&args.grid, args.lambda0)?,
        seed: args.seed,
        tolerances: *tols,
    };
    let report = verify_suite(&ext, &opts);
    let out = merge(
        header("verify", tols),
        json!({ "suite": args.suite, "lambda0": pair(args.lambda0), "report": report }),
    );
    files::write_json(args.output.as_deref(), &out)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let tols = cli.tols.resolve()?;
    match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Extend(args) => cmd_extend(args, &tols),
        Command::CheckInvert(args) => cmd_check_invert(args, &tols),
        Command::BuildSa(args) => cmd_build_sa(args, &tols),
        Command::Resolvent(args) => cmd_resolvent(args, &tols),
        Command::Verify(args) => cmd_verify(args, &tols),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
