use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use uq_core::bases::{highest_weight_set, tensor_crystal, BasesError};
use uq_core::cartan::{CartanDatum, CartanError, Weight};
use uq_core::exec::Exec;
use uq_core::rmatrix::{
    check_hexagon, check_method_agreement, check_operator_identities, check_pair_identities, check_scaling_independence,
    check_ybe, compare, CheckReport, Fault, Method, RError, Session, Triple,
};
use uq_core::uqmod::ModError;

#[derive(Parser)]
#[command(name = "uqr", version, about = "Exact R-matrices, crystals and global bases for quantum groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the R-matrix on V_λ ⊗ V_μ
    ComputeR(ComputeArgs),
    /// Run verification suites
    Verify(VerifyArgs),
    /// Emit crystal graphs and highest-weight sets
    Crystal(CrystalArgs),
    /// Emit the global basis of an irreducible module
    CanonicalBasis(BasisArgs),
}

#[derive(Args)]
struct Common {
    /// Cartan type, e.g. A1, A2, B2, G2
    #[arg(long = "type")]
    cartan: String,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare output with this golden file, creating it if absent
    #[arg(long)]
    golden: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Theta,
    Krls,
    Oracle,
    All,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    common: Common,
    /// Highest weights λ and μ as fundamental-weight coordinates, e.g. 1,0
    #[arg(long = "hw", num_args = 1, allow_hyphen_values = true, required = true)]
    hw: Vec<String>,
    #[arg(long, value_enum, default_value = "theta")]
    method: MethodArg,
    /// Also print an aligned table of nonzero entries to stderr-free stdout
    #[arg(long)]
    table: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    MethodAgreement,
    Hexagon,
    Ybe,
    LemmaIdentities,
    GammaLemma,
    Scaling,
    CrystalCrossval,
    ModuleRelations,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    None,
    ScaleBlock,
    WrongFlip,
    ThetaSign,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Fault {
        match f {
            FaultArg::None => Fault::None,
            FaultArg::ScaleBlock => Fault::ScaleBlock,
            FaultArg::WrongFlip => Fault::WrongFlip,
            FaultArg::ThetaSign => Fault::ThetaSign,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "type")]
    cartan: String,
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Weights to test; pairs and triples are drawn from these
    #[arg(long = "hw", allow_hyphen_values = true)]
    hw: Vec<String>,
    /// Use every nonzero dominant weight with coordinate sum at most this
    #[arg(long)]
    max_hw: Option<i64>,
    /// One explicit hexagon triple
    #[arg(long, num_args = 3, allow_hyphen_values = true)]
    triple: Option<Vec<String>>,
    #[arg(long, value_enum, default_value = "none")]
    inject_fault: FaultArg,
    /// Directory for one CheckReport JSON per check
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CrystalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "hw", allow_hyphen_values = true)]
    hw: Option<String>,
    /// Two weights: emit the tensor-product crystal
    #[arg(long, num_args = 2, allow_hyphen_values = true)]
    tensor: Option<Vec<String>>,
    /// With --tensor, list the sets S^ν instead of the graph
    #[arg(long)]
    list_hw: bool,
    /// JSON instead of DOT
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BasisArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "hw", allow_hyphen_values = true)]
    hw: String,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Internal(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<RError> for CliError {
    fn from(e: RError) -> Self {
        match e {
            RError::Module(ModError::NotDominant(_)) | RError::Cartan(_) => CliError::Config(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<BasesError> for CliError {
    fn from(e: BasesError) -> Self {
        CliError::from(RError::Bases(e))
    }
}

impl From<CartanError> for CliError {
    fn from(e: CartanError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("io: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn session(label: &str) -> Result<Session> {
    Ok(Session::new(CartanDatum::from_type(label)?))
}

fn parse_weight(s: &str, rank: usize) -> Result<Weight> {
    let coords: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| CliError::Config(format!("bad weight `{s}`"))))
        .collect::<Result<_>>()?;
    if coords.len() != rank {
        return Err(CliError::Config(format!("weight `{s}` needs {rank} coordinates")));
    }
    let w = Weight(coords);
    if !w.is_dominant() {
        return Err(CliError::Config(ModError::NotDominant(w).to_string()));
    }
    Ok(w)
}

/// Writes via a temporary file and rename so readers never see partial output.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some(g) = &common.golden {
        if g.exists() {
            if fs::read_to_string(g)? != text {
                return Err(CliError::Failed(format!("output differs from golden file {}", g.display())));
            }
        } else {
            write_atomic(g, text.as_bytes())?;
        }
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn compute_r(a: ComputeArgs) -> Result<()> {
    let s = session(&a.common.cartan)?;
    if a.hw.len() != 2 {
        return Err(CliError::Config("compute-r needs exactly two --hw weights".into()));
    }
    let rank = s.cartan.rank();
    let (l, m) = (parse_weight(&a.hw[0], rank)?, parse_weight(&a.hw[1], rank)?);
    let pair = s.pair(&l, &m)?;
    let methods = match a.method {
        MethodArg::Theta => vec![Method::Theta],
        MethodArg::Krls => vec![Method::Krls],
        MethodArg::Oracle => vec![Method::Oracle],
        MethodArg::All => vec![Method::Theta, Method::Krls, Method::Oracle],
    };
    let results = Exec::default().map(&methods, |m| pair.r(*m)).into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
    let agree = results.windows(2).all(|w| w[0].matrix == w[1].matrix);
    let body = if results.len() == 1 {
        results[0].to_json()
    } else {
        json!({ "agree": agree, "results": results.iter().map(|r| r.to_json()).collect::<Vec<_>>() })
    };
    let mut text = pretty(&body);
    if a.table {
        for (r, c, v) in results[0].matrix.triplets() {
            text.push_str(&format!("# {r:>4} {c:>4}  {v}\n"));
        }
    }
    emit(&a.common, &text)?;
    if !agree {
        let rep = compare("method agreement", &results[0].matrix, &results[1].matrix);
        return Err(CliError::Failed(format!("methods disagree: {}", rep.counterexamples[0].input)));
    }
    Ok(())
}

fn dominant_up_to(rank: usize, max: i64) -> Vec<Weight> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; rank];
    loop {
        let total: i64 = cur.iter().sum();
        if total > 0 && total <= max {
            out.push(Weight(cur.clone()));
        }
        let mut k = 0;
        loop {
            if k == rank {
                out.sort_by_key(|w| (w.0.iter().sum::<i64>(), std::cmp::Reverse(w.0.clone())));
                return out;
            }
            cur[k] += 1;
            if cur.iter().sum::<i64>() <= max {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

fn verify(a: VerifyArgs) -> Result<()> {
    let s = session(&a.cartan)?;
    let rank = s.cartan.rank();
    let mut weights: Vec<Weight> = a.hw.iter().map(|x| parse_weight(x, rank)).collect::<Result<_>>()?;
    if let Some(n) = a.max_hw {
        weights.extend(dominant_up_to(rank, n));
    }
    let triple = a
        .triple
        .as_ref()
        .map(|t| t.iter().map(|x| parse_weight(x, rank)).collect::<Result<Vec<_>>>())
        .transpose()?;
    if weights.is_empty() {
        if let Some(t) = &triple {
            weights = t.clone();
            weights.dedup();
        } else {
            return Err(CliError::Config("no weights given (use --hw, --max-hw or --triple)".into()));
        }
    }
    let fault: Fault = a.inject_fault.into();
    let conv = s.convention()?;
    let pairs: Vec<(Weight, Weight)> =
        weights.iter().flat_map(|x| weights.iter().map(move |y| (x.clone(), y.clone()))).collect();
    let mut triples: Vec<[Weight; 3]> = Vec::new();
    match &triple {
        Some(t) => triples.push([t[0].clone(), t[1].clone(), t[2].clone()]),
        None => {
            for x in &weights {
                for y in &weights {
                    for z in &weights {
                        triples.push([x.clone(), y.clone(), z.clone()]);
                    }
                }
            }
        }
    }
    let on = |x: Suite| a.suite == Suite::All || a.suite == x;
    let mut reports: Vec<CheckReport> = Vec::new();
    let tag = |r: CheckReport, what: String| {
        let mut r = r;
        r.name = format!("{} {what}", r.name);
        r
    };

    if on(Suite::MethodAgreement) {
        let reps = Exec::default().map(&pairs, |(x, y)| -> Result<CheckReport> {
            let p = s.pair(x, y)?;
            let rep = if fault == Fault::ThetaSign {
                let bad = p
                    .v
                    .based()
                    .theta_flipped()?
                    .inverse()
                    .map_err(RError::from)?
                    .kron(&p.w.based().theta_flipped()?.inverse().map_err(RError::from)?)
                    .map_err(RError::from)?
                    .compose(&p.product.theta_flipped()?);
                compare("theta (flipped sign) = oracle", &bad.matrix, &p.r_oracle()?.matrix)
            } else {
                check_method_agreement(&p)?
            };
            Ok(tag(rep, format!("{x}⊗{y}")))
        });
        for r in reps {
            reports.push(r?);
        }
    }
    if on(Suite::Hexagon) {
        let reps = Exec::default().map(&triples, |[u, v, w]| -> Result<CheckReport> {
            let t = Triple::new(&*s.irrep(u)?, &*s.irrep(v)?, &*s.irrep(w)?, conv)?;
            Ok(tag(check_hexagon(&t, fault)?, format!("({u},{v},{w})")))
        });
        for r in reps {
            reports.push(r?);
        }
    }
    if on(Suite::Ybe) {
        let reps = Exec::default().map(&weights, |v| -> Result<CheckReport> {
            let p = s.pair(v, v)?;
            Ok(tag(check_ybe(&p.v, &p.product, fault)?, format!("{v}")))
        });
        for r in reps {
            reports.push(r?);
        }
    }
    if on(Suite::LemmaIdentities) {
        for v in &weights {
            reports.push(check_operator_identities(&*s.irrep(v)?)?);
        }
    }
    if on(Suite::GammaLemma) {
        for (x, y) in &pairs {
            reports.push(tag(check_pair_identities(&*s.pair(x, y)?)?, format!("{x}⊗{y}")));
        }
    }
    if on(Suite::Scaling) {
        for (x, y) in &pairs {
            reports.push(tag(check_scaling_independence(&*s.pair(x, y)?, conv)?, format!("{x}⊗{y}")));
        }
    }
    if on(Suite::CrystalCrossval) {
        for (x, y) in &pairs {
            let p = s.pair(x, y)?;
            let mut fails = Vec::new();
            if let Err(e) =
                uq_core::bases::verify_tensor_crystal(&p.v.module, &p.v.basis, &p.w.module, &p.w.basis, &p.product.module, conv)
            {
                fails.push(e.to_string());
            }
            let dec = p.product.module.decomposition().map_err(RError::from)?;
            for (nu, mult) in dec.multiplicities() {
                let set = highest_weight_set(x, &p.w.basis.crystal, &nu, conv);
                if set.len() != mult {
                    fails.push(format!("|S^{nu}| = {} but multiplicity {mult}", set.len()));
                }
            }
            reports.push(simple_report(&format!("crystal cross-validation {x}⊗{y}"), fails));
        }
    }
    if on(Suite::ModuleRelations) {
        for v in &weights {
            let fails = s.irrep(v)?.module.check_relations().err().map(|e| e.to_string()).into_iter().collect();
            reports.push(simple_report(&format!("module relations V{v}"), fails));
        }
        for (x, y) in &pairs {
            let fails = s.pair(x, y)?.product.module.check_relations().err().map(|e| e.to_string()).into_iter().collect();
            reports.push(simple_report(&format!("module relations V{x}⊗V{y}"), fails));
        }
    }

    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
        for (k, r) in reports.iter().enumerate() {
            write_atomic(&dir.join(format!("check_{k:03}.json")), pretty(&r.to_json()).as_bytes())?;
        }
    }
    let mut failed = 0;
    for r in &reports {
        println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
        for c in r.counterexamples.iter().take(3) {
            println!("    counterexample: {}", c.input);
            println!("      lhs = {}", c.lhs.to_json());
            println!("      rhs = {}", c.rhs.to_json());
        }
        failed += usize::from(!r.pass);
    }
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", reports.len())));
    }
    Ok(())
}

fn simple_report(name: &str, fails: Vec<String>) -> CheckReport {
    use uq_core::linalg::SparseVector;
    let counterexamples = fails
        .into_iter()
        .map(|input| uq_core::rmatrix::Counterexample { input, lhs: SparseVector::new(), rhs: SparseVector::new() })
        .collect::<Vec<_>>();
    CheckReport { name: name.into(), pass: counterexamples.is_empty(), counterexamples, elapsed: Default::default() }
}

fn crystal(a: CrystalArgs) -> Result<()> {
    let s = session(&a.common.cartan)?;
    let rank = s.cartan.rank();
    let text = match (&a.hw, &a.tensor) {
        (Some(h), None) => {
            let g = &s.irrep(&parse_weight(h, rank)?)?.basis.crystal;
            if a.json {
                pretty(&g.to_json())
            } else {
                g.to_dot()
            }
        }
        (None, Some(t)) => {
            let (l, m) = (parse_weight(&t[0], rank)?, parse_weight(&t[1], rank)?);
            let conv = s.convention()?;
            let p = s.pair(&l, &m)?;
            if a.list_hw {
                let dec = p.product.module.decomposition().map_err(RError::from)?;
                let mut out = String::new();
                for nu in dec.multiplicities().keys().rev() {
                    let set = highest_weight_set(&l, &p.w.basis.crystal, nu, conv);
                    let labels: Vec<&str> = set.iter().map(|&b| p.w.basis.crystal.vertices[b].label.as_str()).collect();
                    out.push_str(&format!("S^{nu} = [{}]\n", labels.join(", ")));
                }
                out
            } else {
                let g = tensor_crystal(&p.v.basis.crystal, &p.w.basis.crystal, conv)?;
                if a.json {
                    pretty(&g.to_json())
                } else {
                    g.to_dot()
                }
            }
        }
        _ => return Err(CliError::Config("give exactly one of --hw or --tensor".into())),
    };
    emit(&a.common, &text)
}

fn canonical_basis(a: BasisArgs) -> Result<()> {
    let s = session(&a.common.cartan)?;
    let v = s.irrep(&parse_weight(&a.hw, s.cartan.rank())?)?;
    emit(&a.common, &pretty(&v.basis.to_json()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::ComputeR(a) => compute_r(a),
        Command::Verify(a) => verify(a),
        Command::Crystal(a) => crystal(a),
        Command::CanonicalBasis(a) => canonical_basis(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
