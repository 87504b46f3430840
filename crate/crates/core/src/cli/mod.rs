//! Command-line front end. Data goes to `--out` or stdout; diagnostics go to stderr.
//! Exit codes: 0 success, 1 check or certification failure, 2 usage error.

mod input;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::angles::{angles_adaptive, certified_angles, AngleError, AngleInput, ExactTarget, PrecisionContext};
use crate::construction::{
    build_bn, build_generators_a, burn_in_index, certify_instance, CertifyOptions, ConstructionError,
    ConstructionParams,
};
use crate::enumeration::{unit_candidates, EnumSpec, EnumerationError, Strategy};
use crate::estimation::{
    constructed_records, estimate_exponent, exclusivity_check, scan_records, ApproximationRecord, EstimationError,
    ExponentEstimate, RecordSource, ScanOptions, Target,
};
use crate::exact::{
    gcd_all, generalized_determinant_squared, is_primitive_basis, pluecker_decode, raw_minors, ExactError,
    PlueckerVector, RationalSubspace,
};
use crate::exec::{self, Execution};
use crate::morphisms::{embedding_harness, HarnessSetup, MorphismError};
use crate::real::{sci_rounded, sci_string, Rounding};
use crate::report::{Emitter, Format, Header, Record, ReportError};
use crate::suites::{run_suite, Suite};

pub use input::{read_basis, read_instance, BasisFile, InstanceFile};

/// Significant digits for decimal renderings of interval endpoints.
const DIGITS: usize = 20;

#[derive(Debug, Parser)]
#[command(
    name = "subdioph",
    version,
    about = "Heights, principal angles and approximation exponents of rational subspaces"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub precision: PrecisionArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "jsonl", global = true)]
    pub format: FormatArg,
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Omit the timestamped header line.
    #[arg(long, global = true)]
    pub no_header: bool,
    /// Run on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct PrecisionArgs {
    #[arg(long, default_value_t = crate::angles::DEFAULT_BITS, global = true)]
    pub precision_bits: usize,
    #[arg(long, default_value_t = (-48f64).exp2(), global = true)]
    pub target_rel_err: f64,
}

#[derive(Debug, Args, Clone)]
pub struct InstanceArgs {
    /// Instance descriptor {ell, beta, theta?, seed?, variant?}.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub ell: Option<usize>,
    /// p/q, an integer, or inf.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub theta: Option<String>,
    /// Digit seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct TargetArgs {
    /// Target generators as basis.json; an optional "delta" bounds the perturbation.
    #[arg(long, conflicts_with_all = ["golden", "ell", "instance"])]
    pub target: Option<PathBuf>,
    /// The golden line through (1, F_{k+1}/F_k) with δ = 1/F_k².
    #[arg(long, value_name = "K", conflicts_with_all = ["ell", "instance"])]
    pub golden: Option<usize>,
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Convergent count; the construction target is truncated at depth nmax + 2.
    #[arg(long, default_value_t = 4)]
    pub nmax: usize,
}

#[derive(Debug, Args, Clone)]
pub struct ScanArgs {
    #[command(flatten)]
    pub target: TargetArgs,
    #[arg(long)]
    pub e: usize,
    #[arg(long)]
    pub j: usize,
    #[arg(long)]
    pub hmax_squared: u64,
    #[arg(long)]
    pub strategy: Option<Strategy>,
    #[arg(long, default_value_t = 1)]
    pub box_bound: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceArg {
    Enumerated,
    Constructed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Height, generalized determinant and primitivity of a basis.
    Height {
        #[arg(long)]
        basis: PathBuf,
    },
    /// Plücker coordinates of a basis.
    Pluecker {
        #[arg(long)]
        basis: PathBuf,
    },
    /// A basis from Plücker coordinates.
    Decode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        e: usize,
        /// Comma-separated integers in lexicographic order.
        #[arg(long, allow_hyphen_values = true)]
        pluecker: String,
    },
    /// Principal angle sines between two bases.
    Angles {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// Rational subspaces up to a height bound.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        e: usize,
        #[arg(long)]
        hmax_squared: u64,
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long, default_value_t = 1)]
        box_bound: u32,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        #[arg(long, default_value_t = 0)]
        shard_index: usize,
        /// Units of this shard to skip (from a checkpoint).
        #[arg(long, default_value_t = 0)]
        cursor: usize,
        /// File receiving {shardIndex, cursor} after each completed batch.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Convergent matrices of a construction, optionally certified.
    Construct {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        certify: bool,
    },
    /// Best-approximation records of a target.
    Records {
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Approximation exponent estimate from records.
    Estimate {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, value_enum, default_value = "enumerated")]
        source: SourceArg,
    },
    /// Whether the records of a construction beyond burn-in are its convergents.
    Exclusivity {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        nmax: usize,
        #[arg(long)]
        hmax_squared: u64,
    },
    /// Paired record scans of a target and its coordinate embedding.
    Harness {
        #[command(flatten)]
        target: TargetArgs,
        /// Ambient dimension of the embedding.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        e: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        hmax_squared: u64,
    },
    /// Named property suites.
    Verify {
        /// Suite name, or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Height { .. } => "height",
            Command::Pluecker { .. } => "pluecker",
            Command::Decode { .. } => "decode",
            Command::Angles { .. } => "angles",
            Command::Enumerate { .. } => "enumerate",
            Command::Construct { .. } => "construct",
            Command::Records { .. } => "records",
            Command::Estimate { .. } => "estimate",
            Command::Exclusivity { .. } => "exclusivity",
            Command::Harness { .. } => "harness",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    /// A check failed; its records were already written.
    #[error("{0}")]
    CheckFailed(String),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Report(e.into())
    }
}

impl From<ConstructionError> for CliError {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::InvalidEll
            | ConstructionError::BetaBelowThreshold { .. }
            | ConstructionError::InvalidBeta(_)
            | ConstructionError::InvalidTheta { .. }
            | ConstructionError::InvalidDigit { .. }
            | ConstructionError::InvalidIndex(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<EnumerationError> for CliError {
    fn from(e: EnumerationError) -> Self {
        match e {
            EnumerationError::StrategyMismatch { .. } | EnumerationError::InvalidSpec(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        match e {
            EstimationError::Construction(c) => c.into(),
            EstimationError::Enumeration(c) => c.into(),
            EstimationError::InvalidIndex { .. } | EstimationError::ShapeMismatch(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<MorphismError> for CliError {
    fn from(e: MorphismError) -> Self {
        match e {
            MorphismError::Estimation(inner) => inner.into(),
            MorphismError::HeuristicEnumeration { .. }
            | MorphismError::ShapeMismatch(_)
            | MorphismError::NotInvertible => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<AngleError> for CliError {
    fn from(e: AngleError) -> Self {
        match e {
            AngleError::InvalidContext(_) | AngleError::DimensionMismatch(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the command. Data goes to `--out` or
/// `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{e}");
            if !e.use_stderr() {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    match execute(&config, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let prefix = if matches!(e, CliError::Usage(_)) { "usage error" } else { "error" };
            let _ = writeln!(stderr, "{prefix}: {e}");
            e.exit_code()
        }
    }
}

struct Context {
    format: Format,
    header: Option<Header>,
    ctx: PrecisionContext,
    exec: Execution,
}

impl Context {
    fn scan(&self) -> ScanOptions {
        ScanOptions { ctx: self.ctx, exec: self.exec }
    }
}

pub fn execute(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let ctx = PrecisionContext::new(
        config.precision.precision_bits,
        config.precision.target_rel_err,
        crate::angles::max_bits_from_env(),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let c = Context {
        format: match config.output.format {
            FormatArg::Jsonl => Format::Jsonl,
            FormatArg::Csv => Format::Csv,
        },
        header: (!config.output.no_header).then(|| Header { command: config.command.name().to_string() }),
        ctx,
        exec: if config.output.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    match &config.output.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            let r = dispatch(&config.command, &c, &mut w);
            w.flush()?;
            r
        }
        None => dispatch(&config.command, &c, stdout),
    }
}

fn emitter<'a>(c: &Context, out: &'a mut dyn Write) -> Result<Emitter<&'a mut dyn Write>, CliError> {
    Ok(Emitter::new(c.format, out, c.header.as_ref())?)
}

fn emit_one<T: Serialize>(c: &Context, out: &mut dyn Write, kind: &'static str, value: &T) -> Result<(), CliError> {
    let mut e = emitter(c, out)?;
    e.emit(&Record::new(kind, value)?)?;
    e.flush()?;
    Ok(())
}

fn dispatch(cmd: &Command, c: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Height { basis } => height(c, out, basis),
        Command::Pluecker { basis } => pluecker(c, out, basis),
        Command::Decode { n, e, pluecker } => decode(c, out, *n, *e, pluecker),
        Command::Angles { basis, other } => angles(c, out, basis, other),
        Command::Enumerate { n, e, hmax_squared, strategy, box_bound, shards, shard_index, cursor, checkpoint } => {
            let spec = enum_spec(*n, *e, *hmax_squared, *strategy, *box_bound)?
                .with_shard(*shards, *shard_index)?
                .with_cursor(*cursor);
            enumerate(c, out, &spec, checkpoint.as_deref())
        }
        Command::Construct { instance, nmax, certify } => construct(c, out, instance, *nmax, *certify),
        Command::Records { scan } => records(c, out, scan),
        Command::Estimate { scan, source } => estimate(c, out, scan, *source),
        Command::Exclusivity { instance, nmax, hmax_squared } => exclusivity(c, out, instance, *nmax, *hmax_squared),
        Command::Harness { target, n, e, j, hmax_squared } => harness(c, out, target, *n, *e, *j, *hmax_squared),
        Command::Verify { suite, cases, seed } => verify(c, out, suite, *cases, *seed),
    }
}

fn enum_spec(n: usize, e: usize, h: u64, strategy: Option<Strategy>, box_bound: u32) -> Result<EnumSpec, CliError> {
    let spec = match strategy {
        Some(s) => EnumSpec::new(n, e, h, s)?,
        None => EnumSpec::exact(n, e, h).map_err(|_| {
            CliError::Usage(format!("no exact strategy for n={n}, e={e}; pass --strategy basis-box explicitly"))
        })?,
    };
    Ok(spec.with_box_bound(box_bound))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct HeightRow {
    n: usize,
    e: usize,
    pluecker: Vec<String>,
    height_squared: String,
    determinant_squared: String,
    /// Only for integer bases.
    minor_gcd: Option<String>,
    primitive: Option<bool>,
}

fn rational_string(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn height(c: &Context, out: &mut dyn Write, path: &Path) -> Result<(), CliError> {
    let file = read_basis(path)?;
    let m = &file.matrix;
    let sub = RationalSubspace::from_rational_basis(m)?;
    let (minor_gcd, primitive) = if file.is_integral() {
        (Some(gcd_all(&raw_minors(m)?).to_string()), Some(is_primitive_basis(m)?))
    } else {
        (None, None)
    };
    let row = HeightRow {
        n: m.rows(),
        e: m.cols(),
        pluecker: sub.pluecker().to_strings(),
        height_squared: sub.height_squared().to_string(),
        determinant_squared: rational_string(&generalized_determinant_squared(m)),
        minor_gcd,
        primitive,
    };
    emit_one(c, out, "height", &row)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SubspaceRow {
    n: usize,
    e: usize,
    pluecker: Vec<String>,
    height_squared: String,
    basis: Vec<Vec<String>>,
}

impl SubspaceRow {
    fn new(s: &RationalSubspace) -> Self {
        Self {
            n: s.n(),
            e: s.e(),
            pluecker: s.pluecker().to_strings(),
            height_squared: s.height_squared().to_string(),
            basis: s.basis().columns().iter().map(|col| col.iter().map(ToString::to_string).collect()).collect(),
        }
    }
}

fn pluecker(c: &Context, out: &mut dyn Write, path: &Path) -> Result<(), CliError> {
    let sub = RationalSubspace::from_rational_basis(&read_basis(path)?.matrix)?;
    emit_one(c, out, "subspace", &SubspaceRow::new(&sub))
}

fn decode(c: &Context, out: &mut dyn Write, n: usize, e: usize, text: &str) -> Result<(), CliError> {
    let coords: Vec<BigInt> = text
        .split(',')
        .map(|t| t.trim().parse::<BigInt>().map_err(|_| CliError::Usage(format!("not an integer: '{t}'"))))
        .collect::<Result<_, _>>()?;
    let xi = PlueckerVector::new(n, e, coords).map_err(|e| CliError::Usage(e.to_string()))?;
    let sub = pluecker_decode(&xi).map_err(|e| CliError::Usage(e.to_string()))?;
    emit_one(c, out, "subspace", &SubspaceRow::new(&sub))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AngleRow {
    t: usize,
    psi: Vec<String>,
    psi_lo: Vec<String>,
    psi_hi: Vec<String>,
    exact_zeros: usize,
    #[serde(serialize_with = "crate::report::finite::serialize")]
    rel_err_bound: f64,
    bits_used: usize,
}

fn angles(c: &Context, out: &mut dyn Write, a: &Path, b: &Path) -> Result<(), CliError> {
    let a = read_basis(a)?.matrix;
    let b = read_basis(b)?.matrix;
    let profile = angles_adaptive(AngleInput::Exact(&a), AngleInput::Exact(&b), &c.ctx)?;
    let cert = certified_angles(&a, &b, &c.ctx)?;
    let row = AngleRow {
        t: profile.t(),
        psi: profile
            .psi()
            .iter()
            .map(|p| if p.is_resolved() { sci_string(&p.value().to_rational(), DIGITS) } else { "0".into() })
            .collect(),
        psi_lo: cert.psi.iter().map(|iv| sci_rounded(&iv.lo, DIGITS, Rounding::Down)).collect(),
        psi_hi: cert.psi.iter().map(|iv| sci_rounded(&iv.hi, DIGITS, Rounding::Up)).collect(),
        exact_zeros: cert.exact_zeros,
        rel_err_bound: profile.rel_err_bound(),
        bits_used: profile.bits_used(),
    };
    emit_one(c, out, "angles", &row)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PlueckerRow {
    pluecker: Vec<String>,
    height_squared: String,
}

/// Units per output batch; the checkpoint advances after each batch.
const BATCH: usize = 64;

fn enumerate(c: &Context, out: &mut dyn Write, spec: &EnumSpec, checkpoint: Option<&Path>) -> Result<(), CliError> {
    spec.validate()?;
    if let Some(msg) = spec.disclaimer() {
        eprintln!("note: {msg}");
    }
    let units = spec.units();
    let mut e = emitter(c, out)?;
    let mut seen = std::collections::HashSet::new();
    let mut done = spec.cursor;
    for batch in units.chunks(BATCH) {
        let found = exec::map(c.exec, batch, |&u| unit_candidates(spec, u));
        for cand in found.into_iter().flatten() {
            // BASIS_BOX repeats subspaces across units.
            if spec.strategy == Strategy::BasisBox {
                let sub = cand.to_subspace()?;
                if !seen.insert(sub.pluecker().clone()) {
                    continue;
                }
                e.emit(&Record::new(
                    "pluecker",
                    &PlueckerRow {
                        pluecker: sub.pluecker().to_strings(),
                        height_squared: sub.height_squared().to_string(),
                    },
                )?)?;
            } else {
                let row = PlueckerRow {
                    pluecker: cand.coords.iter().map(ToString::to_string).collect(),
                    height_squared: cand.height_squared.to_string(),
                };
                e.emit(&Record::new("pluecker", &row)?)?;
            }
        }
        done += batch.len();
        e.flush()?;
        if let Some(path) = checkpoint {
            let state = json!({"shardIndex": spec.shard_index, "shardCount": spec.shard_count, "cursor": done});
            std::fs::write(path, format!("{state}\n"))?;
        }
    }
    Ok(())
}

fn params(args: &InstanceArgs) -> Result<ConstructionParams, CliError> {
    let file = match &args.instance {
        Some(path) => Some(read_instance(path)?),
        None => None,
    };
    input::instance_params(file.as_ref(), args)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ConvergentRow {
    n: usize,
    exponent: String,
    height_squared: String,
    primitive: bool,
    pluecker: Vec<String>,
}

fn construct(
    c: &Context,
    out: &mut dyn Write,
    args: &InstanceArgs,
    nmax: usize,
    certify: bool,
) -> Result<(), CliError> {
    let p = params(args)?;
    if certify {
        let report = certify_instance(&p, nmax, &CertifyOptions { ctx: c.ctx, exec: c.exec })?;
        let mut e = emitter(c, out)?;
        for r in &report.records {
            e.emit(&Record::new("check", r)?)?;
        }
        e.flush()?;
        return match report.first_failure() {
            Some(err) => Err(CliError::CheckFailed(err.to_string())),
            None => Ok(()),
        };
    }
    let indices: Vec<usize> = (p.first_index()..=nmax).collect();
    let built = exec::map(c.exec, &indices, |&n| build_bn(&p, n));
    let mut e = emitter(c, out)?;
    for b in built {
        let b = b?;
        e.emit(&Record::new(
            "convergent",
            &ConvergentRow {
                n: b.index,
                exponent: b.exponent.to_string(),
                height_squared: b.subspace.height_squared().to_string(),
                primitive: b.primitive,
                pluecker: b.subspace.pluecker().to_strings(),
            },
        )?)?;
    }
    e.flush()?;
    Ok(())
}

fn target(c: &Context, args: &TargetArgs) -> Result<Target, CliError> {
    if let Some(path) = &args.target {
        let file = read_basis(path)?;
        let delta = file.delta.clone().unwrap_or_else(BigRational::zero);
        return Ok(Target::new(ExactTarget::new(file.matrix, delta)?, &c.ctx)?);
    }
    if let Some(k) = args.golden {
        if k < 2 {
            return Err(CliError::Usage("--golden needs K >= 2".into()));
        }
        return Ok(Target::golden_line(k, &c.ctx)?);
    }
    let p = params(&args.instance)?;
    let gens = build_generators_a(&p, args.nmax + 2)?;
    Ok(Target::new(gens.target()?, &c.ctx)?)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ApproximationRow {
    pluecker: Vec<String>,
    height_squared: String,
    j: usize,
    psi_lo: String,
    psi_hi: String,
    #[serde(serialize_with = "crate::report::finite::option")]
    exponent: Option<f64>,
    source: String,
}

impl ApproximationRow {
    fn new(r: &ApproximationRecord) -> Self {
        Self {
            pluecker: r.subspace.pluecker().to_strings(),
            height_squared: r.height_squared().to_string(),
            j: r.j,
            psi_lo: sci_rounded(&r.psi.lo, DIGITS, Rounding::Down),
            psi_hi: sci_rounded(&r.psi.hi, DIGITS, Rounding::Up),
            exponent: r.exponent().filter(|x| x.is_finite()),
            source: match r.source {
                RecordSource::Enumerated => "ENUMERATED".into(),
                RecordSource::Constructed(n) => format!("B_{n}"),
            },
        }
    }
}

fn scan(c: &Context, args: &ScanArgs) -> Result<Vec<ApproximationRecord>, CliError> {
    let t = target(c, &args.target)?;
    let spec = enum_spec(t.n(), args.e, args.hmax_squared, args.strategy, args.box_bound)?;
    if let Some(msg) = spec.disclaimer() {
        eprintln!("note: {msg}");
    }
    Ok(scan_records(&t, &spec, args.j, &c.scan())?.records)
}

fn records(c: &Context, out: &mut dyn Write, args: &ScanArgs) -> Result<(), CliError> {
    let recs = scan(c, args)?;
    let mut e = emitter(c, out)?;
    for r in &recs {
        e.emit(&Record::new("approximation", &ApproximationRow::new(r))?)?;
    }
    e.flush()?;
    Ok(())
}

fn estimate(c: &Context, out: &mut dyn Write, args: &ScanArgs, source: SourceArg) -> Result<(), CliError> {
    let (recs, burn_in) = match source {
        SourceArg::Enumerated => (scan(c, args)?, None),
        SourceArg::Constructed => {
            let p = params(&args.target.instance)?;
            let recs = constructed_records(&p, args.target.nmax, &c.scan())?;
            (recs, burn_in_index(&p, args.target.nmax)?)
        }
    };
    let summary = EstimateRow { estimate: estimate_exponent(&recs)?, burn_in };
    emit_one(c, out, "estimate", &summary)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct EstimateRow {
    #[serde(flatten)]
    estimate: ExponentEstimate,
    burn_in: Option<usize>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ExclusivityRow {
    passed: bool,
    burn_in: Option<usize>,
    window_start: Option<String>,
    window_end: String,
    convergents: Vec<serde_json::Value>,
    interlopers: Vec<ApproximationRow>,
    below_burn_in: Vec<ApproximationRow>,
    records: Vec<serde_json::Value>,
}

fn exclusivity(c: &Context, out: &mut dyn Write, args: &InstanceArgs, nmax: usize, h: u64) -> Result<(), CliError> {
    let p = params(args)?;
    let spec = EnumSpec::exact(2 * p.ell(), p.ell(), h)
        .map_err(|_| CliError::Usage(format!("no exact strategy for ({}, {})", 2 * p.ell(), p.ell())))?;
    let report = exclusivity_check(&p, nmax, &spec, &c.scan())?;
    let row = ExclusivityRow {
        passed: report.passed(),
        burn_in: report.burn_in,
        window_start: report.window_start.as_ref().map(ToString::to_string),
        window_end: report.window_end.to_string(),
        convergents: report
            .convergents
            .iter()
            .map(|(n, h2)| json!({"n": n, "heightSquared": h2.to_string()}))
            .collect(),
        interlopers: report.interlopers().map(|e| ApproximationRow::new(&e.record)).collect(),
        below_burn_in: report.below_burn_in().map(|e| ApproximationRow::new(&e.record)).collect(),
        records: report
            .entries
            .iter()
            .map(|e| json!({"heightSquared": e.record.height_squared().to_string(), "convergent": e.convergent}))
            .collect(),
    };
    emit_one(c, out, "exclusivity", &row)?;
    if row.passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("{} records beyond burn-in are not convergents", row.interlopers.len())))
    }
}

fn harness(
    c: &Context,
    out: &mut dyn Write,
    args: &TargetArgs,
    n: usize,
    e: usize,
    j: usize,
    h: u64,
) -> Result<(), CliError> {
    let t = target(c, args)?;
    let setup = HarnessSetup::coordinate(t.exact().clone(), n, e, j, h)?;
    let report = embedding_harness(&setup, &c.scan())?;
    emit_one(c, out, "harness", &report)?;
    if report.record_pairs.iter().all(|p| p.distortion_holds) {
        Ok(())
    } else {
        Err(CliError::CheckFailed("height distortion bound violated".into()))
    }
}

fn verify(c: &Context, out: &mut dyn Write, name: &str, cases: usize, seed: u64) -> Result<(), CliError> {
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![name.parse().map_err(|e: crate::suites::SuiteError| CliError::Usage(e.to_string()))?]
    };
    let mut e = emitter(c, out)?;
    let mut failed = Vec::new();
    for s in suites {
        let outcome = run_suite(s, cases, seed, &c.ctx, c.exec);
        if !outcome.passed() {
            failed.push(outcome.suite);
        }
        e.emit(&Record::new("suite", &outcome)?)?;
    }
    e.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("failing suites: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests;
