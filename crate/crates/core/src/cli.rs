//! Command-line front end. `run` parses arguments, executes one subcommand
//! and returns the process exit code:
//! 0 success, 2 usage or precondition, 3 verification mismatch,
//! 4 certificate family violation, 5 budget exceeded.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{
    displayed_corner_sum, domination_identity_check, monomials_binomial_report, monomials_chernoff_report,
    monomials_exact_report, precise_corner_bound, right_angle_bound, simplified_corner_bound, BoundError, BoundReport,
};
use crate::constructions::{
    build_corner_tensor, build_hk, build_hk_grouped, build_jk_partition_decomposition, build_thm1_slice_decomposition,
    hk_case_value, BuiltDecomposition, ConstructionError, CornerTensorSpec, HkRepresentation,
};
use crate::corners::{find_corner, max_corner_free, CornerError, PointSet, SearchConfig, SearchMode};
use crate::field::{FieldError, GaloisField};
use crate::mpoly::{PolyError, DEFAULT_MONOMIAL_BUDGET};
use crate::oracle::{exact_rank_oracle, OracleConfig, OracleResult};
use crate::partition::SetPartition;
use crate::tensor::{
    delta_p, diagonal_lower_bound, diagonal_tensor, verify_decomposition, Decomposition, DenseTensor, DiagonalBound,
    PartitionFamily, TensorError, TensorJson, Verification,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_FAMILY: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "prank",
    version,
    about = "Partition-rank certificates, corner bounds and corner search over finite fields"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized modes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Monomial budget for polynomial expansions.
    #[arg(long, global = true, default_value_t = DEFAULT_MONOMIAL_BUDGET)]
    pub max_monomials: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form and counting bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Build a certificate, verify it, and write it with a sidecar report.
    #[command(subcommand)]
    Decompose(DecomposeCmd),
    /// Check a certificate against a built-in tensor or a tensor file.
    Verify(VerifyArgs),
    /// Exact family rank of a small tensor by exhaustive search.
    Rank(RankArgs),
    /// Corner detection and corner-free subset search.
    #[command(subcommand)]
    Search(SearchCmd),
    /// The distinctness indicator H_k.
    Hk(HkArgs),
    /// Dump a built-in tensor as JSON.
    Tensor(TensorArgs),
}

#[derive(Subcommand, Debug)]
pub enum BoundsCmd {
    /// Number of reduced monomials of degree at most d.
    Monomials {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: f64,
        #[arg(long, value_enum, default_value_t = MonomialMethod::Exact)]
        method: MonomialMethod,
    },
    /// Slice-rank bound for right angles (odd q).
    RightAngle {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
    },
    /// Partition-rank bounds for k-right corners.
    Corner {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = CornerMode::All)]
        mode: CornerMode,
    },
    /// Binomial identity and dominance behind the simplified corner bound.
    CheckIdentity {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n_max: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MonomialMethod {
    Exact,
    Binomial,
    Chernoff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CornerMode {
    Simplified,
    Precise,
    Displayed,
    All,
}

#[derive(Subcommand, Debug)]
pub enum DecomposeCmd {
    /// Slice-rank certificate for the right-angle tensor.
    RightAngleF {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition-rank certificate for J_k.
    Jk {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Certificate JSON file.
    #[arg(long)]
    pub cert: PathBuf,
    /// Built-in target; defaults to the certificate's recorded target.
    #[arg(long, conflicts_with = "tensor")]
    pub builtin: Option<String>,
    /// Tensor JSON file as target.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    All,
    Slice,
    Tensor,
    /// The partitions given by `--partitions`.
    Explicit,
}

impl FamilyArg {
    fn family(self, partitions: Option<&str>) -> Result<PartitionFamily, Failure> {
        Ok(match self {
            FamilyArg::All => PartitionFamily::All,
            FamilyArg::Slice => PartitionFamily::Slice,
            FamilyArg::Tensor => PartitionFamily::Tensor,
            FamilyArg::Explicit => {
                let text = partitions.ok_or_else(|| Failure::usage("--family explicit needs --partitions"))?;
                let list: Vec<SetPartition> = serde_json::from_str(text)?;
                PartitionFamily::Explicit(list)
            }
        })
    }
}

#[derive(Args, Debug)]
pub struct RankArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::All)]
    pub family: FamilyArg,
    /// JSON list of partitions as block lists, e.g. '[[[0,1],[2,3]],[[0,2],[1,3]]]'.
    #[arg(long)]
    pub partitions: Option<String>,
    /// dxy-dzw, dxw-dyz, diag, hk, right-angle-f, fk or jk.
    #[arg(long, conflicts_with = "tensor")]
    pub builtin: Option<String>,
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    /// |X| (for corner tensors, q^n).
    #[arg(long, default_value_t = 2)]
    pub axis: usize,
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    /// Arity for diag/hk; corner dimension k for fk/jk.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub r_max: usize,
}

#[derive(Subcommand, Debug)]
pub enum SearchCmd {
    /// Find the first k-right corner in a point set.
    Detect {
        /// CSV file, one point per row.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: u64,
    },
    /// Largest corner-free subset of F_q^n.
    MaxFree {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SearchModeArg::Exhaustive)]
        mode: SearchModeArg,
        /// Wall-clock budget; a run cut by time is not reproducible.
        #[arg(long)]
        budget_ms: Option<u64>,
        /// Branch-and-bound node budget.
        #[arg(long)]
        budget_nodes: Option<u64>,
        /// Largest space searched exhaustively.
        #[arg(long, default_value_t = crate::corners::DEFAULT_EXHAUSTIVE_LIMIT)]
        exhaustive_limit: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SearchModeArg {
    Exhaustive,
    Greedy,
    RandomRestart,
}

#[derive(Args, Debug)]
pub struct HkArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = HkShow::PartitionSum)]
    pub show: HkShow,
    #[arg(long, default_value_t = 5)]
    pub q: u64,
    #[arg(long, default_value_t = 3)]
    pub axis: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HkShow {
    PartitionSum,
    PermutationSum,
    Tensor,
    Check,
}

#[derive(Args, Debug)]
pub struct TensorArgs {
    #[arg(long)]
    pub builtin: String,
    #[arg(long)]
    pub q: u64,
    /// |X|, or q^n for corner tensors when `--n` is given.
    #[arg(long, default_value_t = 2)]
    pub axis: usize,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed command: exit code and message for the error stream.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<BoundError> for Failure {
    fn from(e: BoundError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<PolyError> for Failure {
    fn from(e: PolyError) -> Self {
        let code = if matches!(e, PolyError::BudgetExceeded(_)) { EXIT_BUDGET } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

impl From<TensorError> for Failure {
    fn from(e: TensorError) -> Self {
        let code = match &e {
            TensorError::BudgetExceeded { .. } => EXIT_BUDGET,
            TensorError::Inadmissible { .. } => EXIT_FAMILY,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<ConstructionError> for Failure {
    fn from(e: ConstructionError) -> Self {
        match e {
            ConstructionError::Poly(p) => p.into(),
            ConstructionError::Tensor(t) => t.into(),
            ConstructionError::Field(f) => f.into(),
            ConstructionError::Bound(b) => b.into(),
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<CornerError> for Failure {
    fn from(e: CornerError) -> Self {
        match e {
            CornerError::Construction(c) => c.into(),
            CornerError::Field(f) => f.into(),
            CornerError::TooLarge { .. } => Failure::usage(format!("{e}; raise --exhaustive-limit to force it")),
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::usage(format!("malformed JSON: {e}"))
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| dispatch(&cli, &mut o, &mut e));
                let _ = out.write_all(&o);
                let _ = err.write_all(&e);
                r
            }
            Err(e) => Err(Failure::usage(e.to_string())),
        },
        None => dispatch(&cli, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match &cli.command {
        Command::Bounds(b) => cmd_bounds(cli, b, out, err),
        Command::Decompose(d) => cmd_decompose(cli, d, out),
        Command::Verify(v) => cmd_verify(cli, v, out),
        Command::Rank(r) => cmd_rank(cli, r, out),
        Command::Search(s) => cmd_search(cli, s, out),
        Command::Hk(h) => cmd_hk(cli, h, out),
        Command::Tensor(t) => cmd_tensor(t, out),
    }
}

fn field_of(q: u64) -> Result<GaloisField, Failure> {
    Ok(GaloisField::with_order(q)?)
}

fn emit_json(out: &mut dyn Write, v: &impl Serialize) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

/// `key: value` lines for the top level of a JSON object.
fn emit_text(out: &mut dyn Write, v: &Value) -> Result<(), Failure> {
    match v {
        Value::Object(map) => {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (k, val) in map {
                let shown = match val {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                writeln!(out, "{k:<width$}  {shown}")?;
            }
        }
        other => writeln!(out, "{other}")?,
    }
    Ok(())
}

fn emit(cli: &Cli, out: &mut dyn Write, v: &Value) -> Result<(), Failure> {
    match cli.format {
        Format::Json => emit_json(out, v),
        Format::Text => emit_text(out, v),
        Format::Csv => Err(Failure::usage("csv output is not available for this command")),
    }
}

// ---------------------------------------------------------------- bounds

fn params_cell(r: &BoundReport) -> String {
    let mut parts = Vec::new();
    if let Some(k) = r.params.k {
        parts.push(format!("k={k}"));
    }
    parts.push(format!("q={}", r.params.q));
    parts.push(format!("n={}", r.params.n));
    if let Some(d) = &r.params.d {
        parts.push(format!("d={d}"));
    }
    parts.join(" ")
}

fn method_name(r: &BoundReport) -> String {
    serde_json::to_value(r.method).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn emit_reports(cli: &Cli, out: &mut dyn Write, reports: &[BoundReport]) -> Result<(), Failure> {
    match cli.format {
        Format::Json => {
            if reports.len() == 1 {
                emit_json(out, &reports[0])
            } else {
                emit_json(out, &reports)
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let fail = |e: csv::Error| Failure::usage(e.to_string());
            w.write_record(["name", "k", "q", "n", "d", "value", "method"]).map_err(fail)?;
            for r in reports {
                let k = r.params.k.map(|k| k.to_string()).unwrap_or_default();
                w.write_record([
                    r.name.to_string(),
                    k,
                    r.params.q.to_string(),
                    r.params.n.to_string(),
                    r.params.d.clone().unwrap_or_default(),
                    r.value.to_string(),
                    method_name(r),
                ])
                .map_err(fail)?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::usage(e.to_string()))?;
            out.write_all(&bytes)?;
            Ok(())
        }
        Format::Text => {
            let rows: Vec<[String; 4]> = reports
                .iter()
                .map(|r| [r.name.to_string(), params_cell(r), r.value.to_string(), method_name(r)])
                .collect();
            let header = ["name".to_string(), "params".into(), "value".into(), "method".into()];
            let widths: Vec<usize> =
                (0..4).map(|c| rows.iter().chain([&header]).map(|r| r[c].len()).max().unwrap_or(0)).collect();
            for row in [&header].into_iter().chain(&rows) {
                let line: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
                writeln!(out, "{}", line.join("  ").trim_end())?;
            }
            Ok(())
        }
    }
}

fn cmd_bounds(cli: &Cli, cmd: &BoundsCmd, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let reports = match *cmd {
        BoundsCmd::Monomials { q, n, d, method } => {
            if !d.is_finite() || d < 0.0 {
                return Err(Failure::usage("d must be a non-negative number"));
            }
            vec![match method {
                MonomialMethod::Exact => monomials_exact_report(q, n, d.floor() as u64)?,
                MonomialMethod::Binomial => {
                    if q < 2 {
                        return Err(BoundError::OrderTooSmall(q).into());
                    }
                    monomials_binomial_report(q, n, d.floor() as u64)
                }
                MonomialMethod::Chernoff => monomials_chernoff_report(q, n, d)?,
            }]
        }
        BoundsCmd::RightAngle { q, n } => vec![right_angle_bound(q, n)?],
        BoundsCmd::Corner { k, q, n, mode } => {
            field_of(q)?;
            let mut v = Vec::new();
            if matches!(mode, CornerMode::Precise | CornerMode::All) {
                v.push(precise_corner_bound(k, q, n)?);
            }
            if matches!(mode, CornerMode::Displayed | CornerMode::All) {
                v.push(displayed_corner_sum(k, q, n)?);
            }
            if matches!(mode, CornerMode::Simplified | CornerMode::All) {
                v.push(simplified_corner_bound(k, q, n)?);
            }
            v
        }
        BoundsCmd::CheckIdentity { k, q, n_max } => {
            let rows = (0..=n_max).map(|n| domination_identity_check(k, q, n)).collect::<Result<Vec<_>, _>>()?;
            let doc = json!({
                "k": k,
                "q": q,
                "n_max": n_max,
                "identity_holds": rows.iter().all(|r| r.identity_holds),
                "dominance_holds": rows.iter().all(|r| r.dominance_holds),
                "rows": rows,
            });
            match cli.format {
                Format::Csv => {
                    writeln!(out, "n,identity_holds,dominance_holds,dominance_holds_floor,lhs,rhs")?;
                    for r in &rows {
                        writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            r.n, r.identity_holds, r.dominance_holds, r.dominance_holds_floor, r.lhs, r.rhs
                        )?;
                    }
                }
                Format::Text => {
                    writeln!(out, "{:>4}  {:<8}  {:<9}  {:<15}", "n", "identity", "dominance", "dominance_floor")?;
                    for r in &rows {
                        writeln!(
                            out,
                            "{:>4}  {:<8}  {:<9}  {}",
                            r.n, r.identity_holds, r.dominance_holds, r.dominance_holds_floor
                        )?;
                    }
                }
                Format::Json => emit_json(out, &doc)?,
            }
            return Ok(EXIT_OK);
        }
    };
    for r in &reports {
        for w in &r.warnings {
            writeln!(err, "warning: {w}")?;
        }
    }
    emit_reports(cli, out, &reports)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- decompose / verify

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// `c.json` gets its report at `c.report.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    match out.extension() {
        Some(ext) if ext == "json" => out.with_extension("report.json"),
        _ => with_suffix(out, ".report.json"),
    }
}

fn verification_json(v: &Verification) -> Value {
    match v {
        Verification::Verified { terms } => json!({ "verified": true, "terms": terms }),
        Verification::Mismatch { tuple, expected, found } => json!({
            "verified": false,
            "mismatch": { "tuple": tuple, "expected": expected, "found": found },
        }),
    }
}

fn write_built(cli: &Cli, built: &BuiltDecomposition, out_path: &Path, extra: Value, out: &mut dyn Write) -> CmdResult {
    let cert = serde_json::to_string(&built.decomposition.to_json())?;
    let mut report = serde_json::to_value(&built.report)?;
    if let (Value::Object(r), Value::Object(e)) = (&mut report, extra) {
        r.extend(e);
    }
    report["verification"] = verification_json(&built.verification);
    let code = if built.verification.is_verified() {
        fs::write(out_path, cert + "\n")?;
        fs::write(sidecar_path(out_path), serde_json::to_string_pretty(&report)? + "\n")?;
        EXIT_OK
    } else {
        fs::write(with_suffix(out_path, ".failed"), cert + "\n")?;
        EXIT_MISMATCH
    };
    emit(cli, out, &report)?;
    Ok(code)
}

fn cmd_decompose(cli: &Cli, cmd: &DecomposeCmd, out: &mut dyn Write) -> CmdResult {
    match cmd {
        DecomposeCmd::RightAngleF { q, n, out: path } => {
            let field = field_of(*q)?;
            let built = build_thm1_slice_decomposition(&field, *n, cli.max_monomials)?;
            write_built(cli, &built, path, json!({}), out)
        }
        DecomposeCmd::Jk { k, q, n, out: path } => {
            let field = field_of(*q)?;
            let built = build_jk_partition_decomposition(&field, *k, *n, cli.max_monomials)?;
            // for k = 2 the same tensor also has the slice certificate; report both counts
            let extra = if *k == 2 && q % 2 == 1 {
                let slice = build_thm1_slice_decomposition(&field, *n, cli.max_monomials)?;
                json!({ "slice_certificate_terms": slice.decomposition.terms.len() })
            } else {
                json!({})
            };
            write_built(cli, &built, path, extra, out)
        }
    }
}

fn log_base(q: usize, axis: usize) -> Option<usize> {
    let mut n = 0;
    let mut v = 1usize;
    while v < axis {
        v = v.checked_mul(q)?;
        n += 1;
    }
    (v == axis).then_some(n)
}

/// Built-in tensors by name. `k` is the arity for diag/hk/dxy-dzw and the
/// corner dimension for fk/jk.
pub fn builtin_tensor(name: &str, field: &GaloisField, k: Option<usize>, axis: usize) -> Result<DenseTensor, Failure> {
    let corner_n = || {
        log_base(field.order() as usize, axis)
            .ok_or_else(|| Failure::usage(format!("axis size {axis} is not a power of q = {}", field.order())))
    };
    let t = match name {
        "dxy-dzw" | "dxw-dyz" => {
            let blocks = if name == "dxy-dzw" { vec![vec![0, 1], vec![2, 3]] } else { vec![vec![0, 3], vec![1, 2]] };
            let p = SetPartition::of_size(4, blocks).map_err(|e| Failure::usage(e.to_string()))?;
            delta_p(field, axis, &p)?
        }
        "diag" => diagonal_tensor(field, k.unwrap_or(3), &vec![crate::field::Fe::ONE; axis])?,
        "hk" => build_hk(field, k.unwrap_or(3), axis)?.tensor,
        "right-angle-f" => build_corner_tensor(field, &CornerTensorSpec::right_angle(corner_n()?))?,
        "fk" => build_corner_tensor(field, &CornerTensorSpec::fk(k.unwrap_or(2), corner_n()?))?,
        "jk" => build_corner_tensor(field, &CornerTensorSpec::jk(k.unwrap_or(2), corner_n()?))?,
        other => {
            return Err(Failure::usage(format!(
                "unknown built-in tensor {other:?} (expected dxy-dzw, dxw-dyz, diag, hk, right-angle-f, fk, jk)"
            )))
        }
    };
    Ok(t)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let text = fs::read_to_string(&args.cert)?;
    let dec = Decomposition::from_json_str(&text).map_err(|e| match e {
        TensorError::Parse(m) => Failure::usage(format!("malformed JSON: {m}")),
        other => Failure::usage(other.to_string()),
    })?;
    let target = if let Some(path) = &args.tensor {
        let json: TensorJson = serde_json::from_str(&fs::read_to_string(path)?)?;
        DenseTensor::from_json(&json)?
    } else {
        let name = match (&args.builtin, &dec.target) {
            (Some(b), _) => b.clone(),
            (None, Some(t)) => t.split(':').next().unwrap_or_default().to_string(),
            (None, None) => return Err(Failure::usage("certificate names no target; pass --builtin or --tensor")),
        };
        let k = match name.as_str() {
            "fk" | "jk" => dec.k.checked_sub(1),
            _ => Some(dec.k),
        };
        builtin_tensor(&name, &dec.field, k, dec.axis_size)?
    };
    let v = verify_decomposition(&dec, &target)?;
    emit(cli, out, &verification_json(&v))?;
    Ok(if v.is_verified() { EXIT_OK } else { EXIT_MISMATCH })
}

// ---------------------------------------------------------------- rank

fn cmd_rank(cli: &Cli, args: &RankArgs, out: &mut dyn Write) -> CmdResult {
    let field = field_of(args.q)?;
    let (t, label) = match (&args.tensor, &args.builtin) {
        (Some(path), _) => {
            let json: TensorJson = serde_json::from_str(&fs::read_to_string(path)?)?;
            (DenseTensor::from_json(&json)?, path.display().to_string())
        }
        (None, Some(name)) => (builtin_tensor(name, &field, args.k, args.axis)?, name.clone()),
        (None, None) => return Err(Failure::usage("pass --builtin or --tensor")),
    };
    let family = args.family.family(args.partitions.as_deref())?;
    if let PartitionFamily::Explicit(list) = &family {
        if let Some(p) = list.iter().find(|p| p.ground_size() != t.arity()) {
            return Err(Failure::usage(format!("partition {p} is not over {} axes", t.arity())));
        }
    }
    let cfg = OracleConfig { shuffle_seed: None, ..OracleConfig::default() };
    let result = exact_rank_oracle(&t, &family, args.r_max, &cfg)?;
    let diag = match diagonal_lower_bound(&t) {
        DiagonalBound::Diagonal(c) => json!({ "diagonal": true, "nonzero_entries": c }),
        DiagonalBound::NotDiagonal { witness } => json!({ "diagonal": false, "witness": witness }),
    };
    let mut doc = json!({
        "tensor": label,
        "k": t.arity(),
        "axis_size": t.axis_size(),
        "field": t.field().spec(),
        "family": family,
        "r_max": args.r_max,
        "diagonal_bound": diag,
    });
    match result {
        OracleResult::Rank(r) => doc["rank"] = json!(r),
        OracleResult::Exceeds(r) => doc["exceeds"] = json!(r),
    }
    emit(cli, out, &doc)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------- search

fn cmd_search(cli: &Cli, cmd: &SearchCmd, out: &mut dyn Write) -> CmdResult {
    match cmd {
        SearchCmd::Detect { points, k, q } => {
            let field = field_of(*q)?;
            let set = PointSet::read_csv(&field, None, fs::File::open(points)?)?;
            let witness = find_corner(&set, *k)?;
            if cli.format == Format::Csv {
                // the witness vertices then the apex, one point per row
                if let Some(w) = &witness {
                    let pts: Vec<_> = w.vertices.iter().chain([&w.apex]).cloned().collect();
                    PointSet::new(&field, set.dim(), pts)?.write_csv(out)?;
                }
                return Ok(EXIT_OK);
            }
            let doc = json!({
                "size": set.len(),
                "k": k,
                "corner_free": witness.is_none(),
                "points": set.codes(),
                "witness": witness.as_ref().map(|w| w.to_json()),
            });
            emit(cli, out, &doc)?;
            Ok(EXIT_OK)
        }
        SearchCmd::MaxFree { q, n, k, mode, budget_ms, budget_nodes, exhaustive_limit, restarts } => {
            let field = field_of(*q)?;
            let mode = match mode {
                SearchModeArg::Exhaustive => SearchMode::Exhaustive,
                SearchModeArg::Greedy => SearchMode::Greedy,
                SearchModeArg::RandomRestart => SearchMode::RandomRestart,
            };
            let cfg = SearchConfig {
                node_budget: *budget_nodes,
                time_budget: budget_ms.map(Duration::from_millis),
                exhaustive_limit: *exhaustive_limit,
                restarts: *restarts,
                seed: cli.seed,
            };
            let r = max_corner_free(&field, *n, *k, mode, &cfg)?;
            if cli.format == Format::Csv {
                r.set.write_csv(&mut *out)?;
            } else {
                emit(cli, out, &r.to_json())?;
            }
            let cut = mode == SearchMode::Exhaustive && !r.optimal;
            Ok(if cut { EXIT_BUDGET } else { EXIT_OK })
        }
    }
}

// ---------------------------------------------------------------- hk / tensor

fn cmd_hk(cli: &Cli, args: &HkArgs, out: &mut dyn Write) -> CmdResult {
    let field = field_of(args.q)?;
    let axis = if args.show == HkShow::PartitionSum || args.show == HkShow::PermutationSum { 1 } else { args.axis };
    let built = build_hk(&field, args.k, axis)?;
    let spec = &built.spec;
    match args.show {
        HkShow::PartitionSum => {
            if cli.format == Format::Csv {
                writeln!(out, "partition,coefficient")?;
                for (p, c) in &spec.partitions {
                    writeln!(out, "\"{p}\",{c}")?;
                }
                return Ok(EXIT_OK);
            }
            let terms: Vec<Value> =
                spec.partitions.iter().map(|(p, c)| json!({ "partition": p, "coefficient": c })).collect();
            let doc = json!({
                "k": args.k,
                "representation": HkRepresentation::PartitionSum,
                "term_count": terms.len(),
                "terms": terms,
            });
            if cli.format == Format::Text {
                writeln!(out, "H_{} = sum of {} partition terms", args.k, spec.partitions.len())?;
                for (p, c) in &spec.partitions {
                    writeln!(out, "{c:>+6}  {p}")?;
                }
                return Ok(EXIT_OK);
            }
            emit(cli, out, &doc)?;
        }
        HkShow::PermutationSum => {
            let terms: Vec<Value> =
                spec.permutations.iter().map(|(s, sign)| json!({ "permutation": s.image(), "sign": sign })).collect();
            let doc = json!({
                "k": args.k,
                "representation": HkRepresentation::SignedPermutationSum,
                "term_count": terms.len(),
                "terms": terms,
            });
            emit(cli, out, &doc)?;
        }
        HkShow::Tensor => emit(cli, out, &serde_json::to_value(built.tensor.to_json())?)?,
        HkShow::Check => {
            let t = &built.tensor;
            let mut case_ok = true;
            let mut reps_ok = true;
            for i in 0..t.entries().len() {
                let tuple = t.tuple_of(i);
                case_ok &= t.entries()[i] == hk_case_value(&field, &tuple);
                reps_ok &= spec.eval(&field, HkRepresentation::SignedPermutationSum, &tuple) == t.entries()[i];
            }
            let doc = json!({
                "k": args.k,
                "q": args.q,
                "axis": axis,
                "partition_terms": spec.partitions.len(),
                "grouped_terms": build_hk_grouped(&field, args.k, axis)?.terms.len(),
                "matches_case_formula": case_ok,
                "representations_agree": reps_ok,
            });
            emit(cli, out, &doc)?;
            if !(case_ok && reps_ok) {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_tensor(args: &TensorArgs, out: &mut dyn Write) -> CmdResult {
    let field = field_of(args.q)?;
    let axis = match args.n {
        Some(n) => crate::constructions::space_size(&field, n)?,
        None => args.axis,
    };
    let t = builtin_tensor(&args.builtin, &field, args.k, axis)?;
    let text = serde_json::to_string(&t.to_json())?;
    match &args.out {
        Some(path) => fs::write(path, text + "\n")?,
        None => writeln!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("prank").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bounds_examples() {
        let (code, out, _) = run_capture(&["bounds", "right-angle", "--q", "3", "--n", "4"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["value"], json!(42));
        let (code, out, _) =
            run_capture(&["bounds", "corner", "--k", "3", "--q", "5", "--n", "2", "--mode", "simplified"]);
        assert_eq!(code, 0);
        assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["value"], json!(1980));
        let (code, out, err) = run_capture(&["bounds", "corner", "--k", "3", "--q", "3", "--n", "2"]);
        assert_eq!(code, 0);
        assert!(err.contains("p <= k"), "{err}");
        assert!(out.contains("\"value\""));
        let (code, _, err) = run_capture(&["bounds", "right-angle", "--q", "4", "--n", "1"]);
        assert_eq!(code, 2);
        assert!(err.contains("q must be odd"));
        let (code, _, _) = run_capture(&["bounds", "right-angle", "--q", "x"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn text_and_csv_bounds() {
        let (code, out, _) = run_capture(&["--format", "text", "bounds", "corner", "--k", "3", "--q", "5", "--n", "1"]);
        assert_eq!(code, 0);
        assert!(out.lines().next().unwrap().starts_with("name"));
        assert_eq!(out.lines().count(), 4);
        let (_, out, _) = run_capture(&["--format", "csv", "bounds", "monomials", "--q", "3", "--n", "2", "--d", "2"]);
        assert_eq!(out.lines().nth(1).unwrap(), "monomial_count,,3,2,2,6,EXACT_DP");
    }

    #[test]
    fn hk_and_rank() {
        let (code, out, _) = run_capture(&["hk", "--k", "4", "--show", "partition-sum"]);
        assert_eq!(code, 0);
        assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["term_count"], json!(14));
        let (code, out, _) = run_capture(&["rank", "--family", "all", "--builtin", "dxy-dzw", "--axis", "2"]);
        assert_eq!(code, 0);
        assert_eq!(serde_json::from_str::<Value>(&out).unwrap()["rank"], json!(1));
    }

    #[test]
    fn decompose_and_verify_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cert = dir.path().join("c.json");
        let c = cert.to_str().unwrap();
        let (code, _, err) = run_capture(&["decompose", "right-angle-f", "--q", "3", "--n", "1", "--out", c]);
        assert_eq!(code, 0, "{err}");
        assert!(dir.path().join("c.report.json").exists());
        let (code, _, _) = run_capture(&["verify", "--cert", c]);
        assert_eq!(code, 0);
        let (code, _, err) = run_capture(&["decompose", "jk", "--k", "3", "--q", "3", "--n", "1", "--out", c]);
        assert_eq!(code, 2);
        assert!(err.contains("p > k required"));
    }
}
