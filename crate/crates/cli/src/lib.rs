//! Command-line front end for `witnesslab`.
//!
//! Exit codes: `0` the command ran (verdicts are data, not status), `1` a
//! probe found a violation, `2` invalid input or I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use witnesslab::algebra::BipartiteAlgebra;
use witnesslab::linalg::HermitianOperator;
use witnesslab::scan::{self, ScanTable};
use witnesslab::verify::{
    check_entanglement_witness, check_quantumness_witness_with, classical_lemma_test, theorem1_probe, EwOptions,
    DEFAULT_TOLERANCE,
};
use witnesslab::witnesses::{
    avr_asymmetric, avr_symmetric, bell_chsh, qubit_qw, sector_basis_order, shifted_swap_factors,
    standard_bell_settings, swap_operator, QubitQWParams, ShiftedSwapParams, Sign,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROBE_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Default points for one-dimensional scans.
pub const DEFAULT_STEPS: usize = 1000;
/// Default points per axis for the two-dimensional fig1 scan.
pub const DEFAULT_FIG1_STEPS: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "witnesslab", version, about = "Quantumness and entanglement witness toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a witness operator and write it as JSON.
    Construct(ConstructArgs),
    /// Certify an operator as a quantumness and/or entanglement witness.
    Verify(VerifyArgs),
    /// Emit a CSV parameter sweep.
    Scan(ScanArgs),
    /// Run a randomized probe on an algebra.
    Probe(ProbeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstructKind {
    Swap,
    Bell,
    AvrAsym,
    AvrSym,
    QubitQw,
    ShiftedSwap,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Sign {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Basis {
    Lexicographic,
    Sector,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    kind: ConstructKind,
    /// Local dimension (swap, shifted-swap).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Shift ξ ∈ (0, 1) (shifted-swap).
    #[arg(long)]
    xi: Option<f64>,
    /// Phase φ (shifted-swap).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    sign: SignArg,
    /// Weight of X (qubit-qw).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Weight of Y (qubit-qw).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Bloch vector of X as "x,y,z" (qubit-qw).
    #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
    u: String,
    /// Bloch vector of Y as "x,y,z" (qubit-qw).
    #[arg(long, default_value = "1,0,0", allow_hyphen_values = true)]
    v: String,
    /// Basis ordering of the written matrices; `sector` groups each
    /// exchange pair {|ij⟩, |ji⟩} together.
    #[arg(long, value_enum, default_value_t = Basis::Lexicographic)]
    basis: Basis,
    /// Operator file; factors go to `<stem>.X.json`, `<stem>.Y.json` and
    /// provenance to `<stem>.provenance.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Qw,
    Ew,
    Both,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    mode: VerifyMode,
    /// Operator JSON, either a bare matrix or a construct bundle.
    #[arg(long = "in")]
    input: PathBuf,
    /// Algebra as "n1,n2,...;m1,m2,...".
    #[arg(long)]
    alg: Option<String>,
    /// Local dimensions d_A d_B.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    dims: Option<Vec<usize>>,
    /// Shorthand for `--dims D D`.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, env = "WITNESSLAB_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScanKind {
    ChiThreshold,
    Fig1,
    RatioTheta,
    XiSweep,
}

#[derive(Debug, Args)]
struct ScanArgs {
    kind: ScanKind,
    /// Grid points (per axis for fig1).
    #[arg(long)]
    steps: Option<usize>,
    /// Local dimension (xi-sweep).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Phase φ (xi-sweep).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProbeKind {
    Theorem1,
    Lemma,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    kind: ProbeKind,
    #[arg(long)]
    alg: String,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, env = "WITNESSLAB_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Construct(a) => construct(&a),
        Command::Verify(a) => verify(&a),
        Command::Scan(a) => run_scan(&a),
        Command::Probe(a) => probe(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INVALID
        }
    }
}

/// A closed stdout (e.g. piping into `head`) is not an error.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<csv::Error>()
                .is_some_and(|ce| matches!(ce.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe))
    })
}

fn parse_vec3(s: &str) -> anyhow::Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad vector {s:?}"))?;
    parts.try_into().map_err(|_| anyhow!("vector {s:?} must have 3 components"))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

/// `q.json` → `q.<suffix>.json`
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(format!("{suffix}.json"))
}

struct Constructed {
    op: HermitianOperator,
    factors: Option<(HermitianOperator, HermitianOperator)>,
    /// `(d_A, d_B)`; `None` for single-system operators.
    dims: Option<(usize, usize)>,
    params: Value,
    extra: Value,
}

fn build(a: &ConstructArgs) -> anyhow::Result<Constructed> {
    let sign: Sign = a.sign.into();
    let c = match a.kind {
        ConstructKind::Swap => Constructed {
            op: swap_operator(a.d)?,
            factors: None,
            dims: Some((a.d, a.d)),
            params: json!({ "d": a.d }),
            extra: json!({}),
        },
        ConstructKind::Bell => Constructed {
            op: bell_chsh(&standard_bell_settings(sign)),
            factors: None,
            dims: Some((2, 2)),
            params: json!({ "sign": a.sign, "settings": "standard" }),
            extra: json!({}),
        },
        ConstructKind::AvrAsym | ConstructKind::AvrSym => {
            let s = standard_bell_settings(sign);
            let w = if matches!(a.kind, ConstructKind::AvrAsym) { avr_asymmetric(&s)? } else { avr_symmetric(&s)? };
            Constructed {
                op: w.q,
                factors: Some((w.x, w.y)),
                dims: Some((2, 2)),
                params: json!({ "sign": a.sign, "settings": "standard" }),
                extra: json!({ "residual": w.residual }),
            }
        }
        ConstructKind::QubitQw => {
            let p = QubitQWParams::new(a.alpha, a.beta, parse_vec3(&a.u)?, parse_vec3(&a.v)?)?;
            let w = qubit_qw(&p);
            Constructed {
                op: w.q,
                factors: Some((w.x, w.y)),
                dims: None,
                params: serde_json::to_value(p)?,
                extra: json!({
                    "theta": p.theta(),
                    "lambda_plus": w.lambda_plus,
                    "lambda_minus": w.lambda_minus,
                }),
            }
        }
        ConstructKind::ShiftedSwap => {
            let xi = a.xi.ok_or_else(|| anyhow!("shifted-swap needs --xi"))?;
            let p = ShiftedSwapParams::new(xi, a.phi, a.d)?;
            let f = shifted_swap_factors(&p)?;
            let q = HermitianOperator::new(witnesslab::linalg::anticommutator(f.x.matrix(), f.y.matrix())?)?;
            Constructed {
                op: q,
                factors: Some((f.x, f.y)),
                dims: Some((a.d, a.d)),
                params: serde_json::to_value(p)?,
                extra: json!({ "residual": f.residual, "theta": p.theta() }),
            }
        }
    };
    if a.basis == Basis::Sector {
        return to_sector_basis(c);
    }
    Ok(c)
}

fn to_sector_basis(mut c: Constructed) -> anyhow::Result<Constructed> {
    let d = match c.dims {
        Some((da, db)) if da == db => da,
        _ => bail!("--basis sector needs a d⊗d operator"),
    };
    let order = sector_basis_order(d);
    let permute = |h: &HermitianOperator| -> anyhow::Result<HermitianOperator> {
        Ok(HermitianOperator::new(h.matrix().permute_basis(&order)?)?)
    };
    c.op = permute(&c.op)?;
    if let Some((x, y)) = &c.factors {
        c.factors = Some((permute(x)?, permute(y)?));
    }
    Ok(c)
}

fn construct(a: &ConstructArgs) -> anyhow::Result<i32> {
    let c = build(a)?;
    let kind = a.kind.to_possible_value().expect("no skipped variants").get_name().to_string();
    let mut provenance = json!({
        "tool": "witnesslab",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": kind,
        "params": c.params,
        "basis": a.basis,
        "dims": c.dims.map(|(x, y)| vec![x, y]),
        "min_eigenvalue": c.op.min_eigenvalue(),
    });
    if let (Value::Object(p), Value::Object(extra)) = (&mut provenance, c.extra) {
        p.extend(extra);
    }

    match &a.out {
        Some(path) => {
            write_json(Some(path), &c.op)?;
            let mut files = json!({ "operator": path });
            if let Some((x, y)) = &c.factors {
                let (px, py) = (sibling(path, "X"), sibling(path, "Y"));
                write_json(Some(&px), x)?;
                write_json(Some(&py), y)?;
                files["x"] = json!(px);
                files["y"] = json!(py);
            }
            provenance["files"] = files;
            write_json(Some(&sibling(path, "provenance")), &provenance)?;
        }
        None => {
            let mut bundle = json!({ "operator": c.op, "provenance": provenance });
            if let Some((x, y)) = &c.factors {
                bundle["x"] = serde_json::to_value(x)?;
                bundle["y"] = serde_json::to_value(y)?;
            }
            write_json(None, &bundle)?;
        }
    }
    Ok(EXIT_OK)
}

/// Reads a bare matrix or a bundle with an `"operator"` field.
fn read_operator(path: &Path) -> anyhow::Result<HermitianOperator> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let inner = match value.get("operator") {
        Some(op) => op.clone(),
        None => value,
    };
    serde_json::from_value(inner).with_context(|| format!("{} is not a Hermitian matrix", path.display()))
}

fn resolve_dims(a: &VerifyArgs, alg: Option<&BipartiteAlgebra>) -> anyhow::Result<(usize, usize)> {
    if let Some(d) = &a.dims {
        return Ok((d[0], d[1]));
    }
    if let Some(d) = a.d {
        return Ok((d, d));
    }
    if let Some(alg) = alg {
        return Ok((alg.dim_a(), alg.dim_b()));
    }
    bail!("give --dims A B, --d or --alg")
}

fn verify(a: &VerifyArgs) -> anyhow::Result<i32> {
    let op = read_operator(&a.input)?;
    let alg = a.alg.as_deref().map(BipartiteAlgebra::parse).transpose()?;
    let opts = EwOptions { restarts: a.restarts, seed: a.seed, tolerance: DEFAULT_TOLERANCE };

    let qw = |dims: Option<(usize, usize)>| -> anyhow::Result<_> {
        let alg = match (&alg, dims) {
            (Some(alg), _) => alg.clone(),
            (None, Some((da, db))) => BipartiteAlgebra::full(da, db)?,
            (None, None) => bail!("qw needs --alg or --dims"),
        };
        if alg.total_dim() != op.dim() {
            bail!("algebra acts on dimension {}, operator has dimension {}", alg.total_dim(), op.dim());
        }
        Ok(check_quantumness_witness_with(&op, &alg, DEFAULT_TOLERANCE)?)
    };
    let explicit_dims = a.dims.is_some() || a.d.is_some();
    let dims = if explicit_dims || alg.is_some() { Some(resolve_dims(a, alg.as_ref())?) } else { None };

    let report = match a.mode {
        VerifyMode::Qw => serde_json::to_value(qw(dims)?)?,
        VerifyMode::Ew => {
            let (da, db) = dims.ok_or_else(|| anyhow!("ew needs --dims, --d or --alg"))?;
            serde_json::to_value(check_entanglement_witness(&op, da, db, &opts)?)?
        }
        VerifyMode::Both => {
            let (da, db) = dims.ok_or_else(|| anyhow!("both needs --dims, --d or --alg"))?;
            let ew = check_entanglement_witness(&op, da, db, &opts)?;
            let qw = qw(Some((da, db)))?;
            let holds = !ew.is_confirmed() || qw.is_confirmed();
            json!({ "ew": ew, "qw": qw, "implication_holds": holds })
        }
    };
    write_json(a.out.as_deref(), &report)?;
    Ok(EXIT_OK)
}

fn write_csv(table: &ScanTable, out: Option<&Path>) -> anyhow::Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()))?;
    }
    w.flush()?;
    Ok(())
}

fn run_scan(a: &ScanArgs) -> anyhow::Result<i32> {
    let table = match a.kind {
        ScanKind::ChiThreshold => {
            let t = scan::chi_threshold_scan(a.steps.unwrap_or(DEFAULT_STEPS))?;
            for col in ["exp_S", "exp_EBell"] {
                for x in scan::sign_crossings(&t, "re_ab", col).unwrap_or_default() {
                    eprintln!("crossing {col} re_ab={x}");
                }
            }
            t
        }
        ScanKind::Fig1 => scan::fig1_scan(a.steps.unwrap_or(DEFAULT_FIG1_STEPS))?,
        ScanKind::RatioTheta => scan::ratio_theta_scan(a.steps.unwrap_or(DEFAULT_STEPS))?,
        ScanKind::XiSweep => scan::xi_sweep_scan(a.steps.unwrap_or(DEFAULT_STEPS), a.d, a.phi)?,
    };
    write_csv(&table, a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn probe(a: &ProbeArgs) -> anyhow::Result<i32> {
    let alg = BipartiteAlgebra::parse(&a.alg)?;
    let report = match a.kind {
        ProbeKind::Theorem1 => theorem1_probe(&alg, a.trials, a.seed)?,
        ProbeKind::Lemma => classical_lemma_test(&alg, a.trials, a.seed)?,
    };
    write_json(a.out.as_deref(), &report)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_PROBE_FAILED })
}
