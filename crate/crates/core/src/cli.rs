//! Command-line surface: `solve`, `scan`, `verify` and `sample`.
//!
//! Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::boundary_law::{self, BoundaryLaw, SolutionSet, DEFAULT_TOL};
use crate::error::{Result, ZipperError};
use crate::gibbs;
use crate::model::{Coupling, ModelParams, TransferParams};
use crate::oracle::{self, OracleReport, VerifyOptions};
use crate::thermo::{self, scan, PhasePoint, ScanAxis, ScanSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "kittel-zipper", version, about = "Zipper model on rooted Cayley trees")]
pub struct Cli {
    /// TOML or JSON file with default values for the flags below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Constant boundary laws at one parameter point.
    Solve(SolveArgs),
    /// Phase table over temperature or η.
    Scan(ScanArgs),
    /// Run the oracle battery.
    Verify(VerifyArgs),
    /// Exact samples from μ_n.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig3,
    Fig4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    Minus,
    Plus,
}

/// Model parameters, given either physically (ε, J, β or T) or through the
/// transfer parameters θ and η.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub q: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Coupling J; "inf" for the hard constraint.
    #[arg(long = "J", allow_negative_numbers = true)]
    pub j: Option<String>,
    #[arg(long, conflicts_with = "t")]
    pub beta: Option<f64>,
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long, conflicts_with_all = ["epsilon", "beta", "t"])]
    pub theta: Option<f64>,
    #[arg(long, conflicts_with = "j")]
    pub eta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// First value of the k = 1, J = +∞ family.
    #[arg(long)]
    pub z1: Option<f64>,
    /// Seed exponent of the k ≥ 2, J = +∞ level family.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: Option<f64>,
    /// Depth to which families are listed.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub figure: Option<Figure>,
    /// Start of the scanned range (T, or η when --theta is given).
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// JSON array of battery cases; the default battery when absent.
    #[arg(long)]
    pub battery: Option<PathBuf>,
    /// Relative perturbation of the deepest generation of every law.
    #[arg(long)]
    pub perturb: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Constant law value; defaults to a root of the constant equation.
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long, value_enum)]
    pub root: Option<Branch>,
    #[arg(long)]
    pub z1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Defaults read from `--config`; command-line flags take precedence.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub k: Option<usize>,
    pub q: Option<u32>,
    pub epsilon: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<Coupling>,
    pub beta: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub theta: Option<f64>,
    pub eta: Option<f64>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            toml::from_str(&text).map_err(|e| ZipperError::Parse(e.to_string()))
        }
    }
}

const DEFAULT_K: usize = 2;
const DEFAULT_Q: u32 = 2;
const DEFAULT_EPSILON: f64 = 1.0;
const DEFAULT_J: Coupling = Coupling::Finite(1.0);
const DEFAULT_BETA: f64 = 1.0;

/// Resolved parameters: always the transfer form, plus the physical form
/// when it was given.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    pub transfer: TransferParams,
    pub physical: Option<ModelParams>,
}

pub fn resolve_params(a: &ParamArgs, cfg: &RunConfig) -> Result<Resolved> {
    let k = a.k.or(cfg.k).unwrap_or(DEFAULT_K);
    let q = a.q.or(cfg.q).unwrap_or(DEFAULT_Q);
    let coupling = match &a.j {
        Some(s) => Some(s.parse::<Coupling>()?),
        None => cfg.j,
    };
    if let Some(theta) = a.theta.or(cfg.theta) {
        let eta = match (a.eta.or(cfg.eta), coupling) {
            (Some(eta), _) => eta,
            (None, Some(Coupling::Infinite)) => 0.0,
            (None, _) => return Err(ZipperError::Domain("--theta needs --eta or --J inf".into())),
        };
        return Ok(Resolved { transfer: TransferParams::new(k, q, theta, eta)?, physical: None });
    }
    if a.eta.is_some() {
        return Err(ZipperError::Domain("--eta needs --theta".into()));
    }
    let epsilon = a.epsilon.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON);
    let coupling = coupling.unwrap_or(DEFAULT_J);
    let p = match (a.beta, a.t, cfg.beta, cfg.t) {
        (Some(b), _, _, _) => ModelParams::new(k, q, epsilon, coupling, b)?,
        (None, Some(t), _, _) => ModelParams::from_temperature(k, q, epsilon, coupling, t)?,
        (None, None, Some(_), Some(_)) => return Err(ZipperError::Parse("config gives both beta and T".into())),
        (None, None, Some(b), None) => ModelParams::new(k, q, epsilon, coupling, b)?,
        (None, None, None, Some(t)) => ModelParams::from_temperature(k, q, epsilon, coupling, t)?,
        (None, None, None, None) => ModelParams::new(k, q, epsilon, coupling, DEFAULT_BETA)?,
    };
    Ok(Resolved { transfer: p.transfer(), physical: Some(p) })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => scan::write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EtaCriticalForms {
    root_k_minus_1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k2_example: Option<f64>,
    numeric: f64,
}

#[derive(Serialize)]
struct SolveReport {
    k: usize,
    q: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ModelParams>,
    theta: f64,
    eta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    solutions: Option<SolutionSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_c: Option<EtaCriticalForms>,
    b_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_cr: Option<thermo::CriticalTemperature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<serde_json::Value>,
}

fn solve_report(args: &SolveArgs, cfg: &RunConfig) -> Result<SolveReport> {
    let r = resolve_params(&args.params, cfg)?;
    let w = r.transfer;
    let tol = args.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL);
    let depth = args.n.or(cfg.n).unwrap_or(5);
    let eta_c = if w.k >= 2 {
        Some(EtaCriticalForms {
            root_k_minus_1: boundary_law::eta_critical(w.k, w.theta)?,
            k2_example: (w.k == 2).then(|| 1.0 / (4.0 * w.theta)),
            numeric: boundary_law::eta_critical_numeric(w.k, w.theta)?,
        })
    } else {
        None
    };
    let t_cr = r.physical.map(|p| thermo::critical_temperature(p.k(), p.q(), p.epsilon(), p.coupling())).transpose()?;
    let mut report = SolveReport {
        k: w.k,
        q: w.q,
        params: r.physical,
        theta: w.theta,
        eta: w.eta,
        solutions: None,
        eta_c,
        b_values: vec![],
        t_cr,
        family: None,
    };
    if w.eta == 0.0 {
        let b = thermo::b_of(1.0, w.theta, 0.0);
        if w.k == 1 {
            let z1 = args.z1.unwrap_or(1.0);
            let law = boundary_law::j_infinite_1d_family(w.theta, z1, depth)?;
            let levels: Vec<f64> = (1..=depth).map(|d| law.level_value(d)).collect::<Result<_>>()?;
            report.family = Some(json!({ "kind": "geometric", "z1": z1, "ratio": 1.0 / w.theta, "levels": levels, "b": b }));
        } else {
            let seed = args.alpha1.unwrap_or(0.0);
            let z_star = boundary_law::j_infinite_fixed_point(w.k, w.theta)?;
            let exponents = boundary_law::level_exponents(w.k, seed, depth);
            let levels: Vec<f64> = exponents.iter().map(|a| w.theta.powf(*a)).collect();
            report.family = Some(json!({
                "kind": "level", "seed": seed, "exponents": exponents, "levels": levels,
                "fixed_point": z_star, "limit_exponent": -(w.k as f64) / (w.k - 1) as f64, "b": b,
            }));
        }
        report.b_values = vec![b];
        return Ok(report);
    }
    let s = boundary_law::solve_constant(&w, tol)?;
    report.b_values = s.roots.iter().map(|&z| thermo::b_of(z, w.theta, w.eta)).collect();
    report.solutions = Some(s);
    Ok(report)
}

fn solve_text(r: &SolveReport) -> String {
    let mut s = format!("k = {}, q = {}, theta = {}, eta = {}\n", r.k, r.q, r.theta, r.eta);
    if let Some(e) = &r.eta_c {
        s += &format!("eta_c = {} (numeric {})\n", e.root_k_minus_1, e.numeric);
    }
    if let Some(sol) = &r.solutions {
        s += &format!("{} positive constant solution(s), {:?}\n", sol.count, sol.regime);
        for (z, b) in sol.roots.iter().zip(&r.b_values) {
            s += &format!("  z = {z}  f = {b}\n");
        }
    }
    if let Some(f) = &r.family {
        s += &format!("family: {f}\n");
    }
    if let Some(t) = &r.t_cr {
        s += &format!("T_cr: {:?} ({:?})\n", t.value, t.reason);
    }
    s
}

fn cmd_solve(args: &SolveArgs, cfg: &RunConfig) -> Result<i32> {
    let report = solve_report(args, cfg)?;
    let text = match args.format.or(cfg.format).unwrap_or(Format::Json) {
        Format::Text => solve_text(&report),
        _ => serde_json::to_string_pretty(&report)?,
    };
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub fn scan_spec(args: &ScanArgs, cfg: &RunConfig) -> Result<ScanSpec> {
    let mut spec = match args.figure {
        Some(Figure::Fig4) => scan::fig4_scan(),
        Some(Figure::Fig3) => scan::fig3_scan(),
        None => {
            let r = resolve_params(&args.params, cfg)?;
            let (lo, hi) = match (args.from, args.to) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(ZipperError::Domain("scan needs --from and --to, or --figure".into())),
            };
            let axis = match r.physical {
                Some(p) => {
                    let j = p
                        .coupling()
                        .finite()
                        .ok_or_else(|| ZipperError::Domain("temperature scans need finite J".into()))?;
                    ScanAxis::Temperature { q: p.q(), epsilon: p.epsilon(), j, lo, hi }
                }
                None => ScanAxis::Eta { theta: r.transfer.theta, lo, hi },
            };
            ScanSpec { k: r.transfer.k, axis, points: 201 }
        }
    };
    if let Some(points) = args.points {
        spec.points = points;
    }
    Ok(spec)
}

fn scan_comments(spec: &ScanSpec, points: &[PhasePoint]) -> Vec<String> {
    let mut c = vec![format!("k={} points={}", spec.k, spec.points)];
    match spec.axis {
        ScanAxis::Temperature { q, epsilon, j, lo, hi } => {
            c.push(format!("q={q} epsilon={epsilon} J={j} T=[{lo},{hi}]"));
            if let Ok(t) = thermo::critical_temperature(spec.k, q, epsilon, Coupling::Finite(j)) {
                c.push(format!("T_cr={:?} reason={:?}", t.value, t.reason));
            }
        }
        ScanAxis::Eta { theta, lo, hi } => c.push(format!("theta={theta} eta=[{lo},{hi}]")),
    }
    let curve = thermo::FreeEnergyCurve::from_scan(points);
    c.push(format!("branch ordering: {:?}", curve.ordering()));
    c
}

fn cmd_scan(args: &ScanArgs, cfg: &RunConfig) -> Result<i32> {
    let spec = scan_spec(args, cfg)?;
    let points = thermo::phase_scan(&spec)?;
    let text = match args.format.or(cfg.format).unwrap_or(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&points)?,
        _ => scan::to_csv(&points, &scan_comments(&spec, &points)),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

pub fn verify_table(reports: &[OracleReport]) -> String {
    let mut s = format!("{:<24} {:>4} {:>11} {:>11} {:>11} {:>11}  result\n", "case", "n", "dp-vs-ex", "residual", "compat", "Z-rec");
    for r in reports {
        let ex = r.dp_rel_error.map_or_else(|| "skipped".to_string(), |e| format!("{e:.2e}"));
        s += &format!(
            "{:<24} {:>4} {:>11} {:>11.2e} {:>11.2e} {:>11.2e}  {}\n",
            r.id,
            r.n,
            ex,
            r.max_residual,
            r.compatibility_error,
            r.z_recursion_error,
            if r.passed { "pass".to_string() } else { format!("FAIL {}", r.failures.join("; ")) }
        );
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    s += &format!("{passed}/{} cases passed\n", reports.len());
    s
}

fn cmd_verify(args: &VerifyArgs, cfg: &RunConfig) -> Result<i32> {
    let cases = match &args.battery {
        Some(path) => oracle::battery_from_json(&std::fs::read_to_string(path)?)?,
        None => oracle::default_battery(),
    };
    let opts = VerifyOptions {
        perturb: args.perturb,
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        samples: args.samples.or(cfg.samples).unwrap_or(oracle::BATTERY_SAMPLES),
        ..VerifyOptions::default()
    };
    let reports = oracle::verify_all(&cases, &opts);
    let text = match args.format.or(cfg.format).unwrap_or(Format::Json) {
        Format::Text => verify_table(&reports),
        _ => {
            eprint!("{}", verify_table(&reports));
            serde_json::to_string_pretty(&reports)?
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(if reports.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_FAILED })
}

fn sample_law(args: &SampleArgs, w: &TransferParams, n: usize) -> Result<BoundaryLaw> {
    if let Some(z) = args.z {
        return BoundaryLaw::constant(z);
    }
    match (w.eta == 0.0, w.k) {
        (true, 1) => boundary_law::j_infinite_1d_family(w.theta, args.z1.unwrap_or(1.0), n + 1),
        (true, _) => match args.alpha1 {
            Some(seed) => boundary_law::j_infinite_level_family(w, seed, n + 1),
            None => BoundaryLaw::constant(boundary_law::j_infinite_fixed_point(w.k, w.theta)?),
        },
        (false, _) => {
            let s = boundary_law::solve_constant(w, DEFAULT_TOL)?;
            let z = match args.root.unwrap_or(Branch::Plus) {
                Branch::Plus => s.roots.last(),
                Branch::Minus => s.roots.first(),
            };
            BoundaryLaw::constant(*z.ok_or_else(|| ZipperError::Domain("no constant root at these parameters".into()))?)
        }
    }
}

#[derive(Serialize)]
struct SampleReport {
    k: usize,
    q: u32,
    theta: f64,
    eta: f64,
    n: usize,
    seed: u64,
    law: BoundaryLaw,
    /// Fraction of open vertices at depths 1..=n.
    open_fraction: Vec<f64>,
    level_one_open_exact: f64,
    samples: Vec<BTreeMap<String, u32>>,
}

fn cmd_sample(args: &SampleArgs, cfg: &RunConfig) -> Result<i32> {
    let w = resolve_params(&args.params, cfg)?.transfer;
    let n = args.n.or(cfg.n).unwrap_or(3);
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let count = args.samples.or(cfg.samples).unwrap_or(10);
    let law = sample_law(args, &w, n)?;
    let sampler = gibbs::Sampler::new(&w, &law, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut open = vec![0u64; n];
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let c = sampler.sample(&mut rng);
        for (d, o) in c.open_counts().iter().enumerate().skip(1) {
            open[d - 1] += o;
        }
        records.push(c.to_map().into_iter().map(|(x, s)| (x.to_string(), s)).collect());
    }
    let open_fraction = open
        .iter()
        .enumerate()
        .map(|(i, &o)| o as f64 / (count.max(1) as f64 * crate::tree::generation_size(w.k, i + 1) as f64))
        .collect();
    let report = SampleReport {
        k: w.k,
        q: w.q,
        theta: w.theta,
        eta: w.eta,
        n,
        seed,
        level_one_open_exact: gibbs::level_one_open_probability(&w, &law, n)?,
        law,
        open_fraction,
        samples: records,
    };
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(EXIT_OK)
}

fn exit_code_for(e: &ZipperError) -> i32 {
    match e {
        ZipperError::Domain(_) | ZipperError::Parse(_) => EXIT_USAGE,
        _ => EXIT_FAILED,
    }
}

/// Runs one command line and returns the process exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match cli.config.as_deref().map(RunConfig::load).transpose() {
        Ok(cfg) => cfg.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, &cfg),
        Command::Scan(a) => cmd_scan(a, &cfg),
        Command::Verify(a) => cmd_verify(a, &cfg),
        Command::Sample(a) => cmd_sample(a, &cfg),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code_for(&e)
    })
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(list: &[&str]) -> ParamArgs {
        let mut argv = vec!["kittel-zipper", "solve"];
        argv.extend_from_slice(list);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Solve(a) => a.params,
            _ => unreachable!(),
        }
    }

    #[test]
    fn resolves_physical_and_transfer_forms() {
        let r = resolve_params(&params(&["--k", "2", "--q", "8", "--epsilon", "1.386294", "--J", "0.693147", "--T", "2"]), &RunConfig::default()).unwrap();
        assert!(r.physical.is_some());
        assert!((r.transfer.theta - (0.5f64 * 1.386294).exp() / 8.0).abs() < 1e-15);
        let r = resolve_params(&params(&["--k", "2", "--theta", "2", "--eta", "0.5"]), &RunConfig::default()).unwrap();
        assert_eq!((r.transfer.theta, r.transfer.eta), (2.0, 0.5));
        let r = resolve_params(&params(&["--k", "1", "--J", "inf"]), &RunConfig::default()).unwrap();
        assert_eq!(r.transfer.eta, 0.0);
    }

    #[test]
    fn conflicting_temperature_flags_are_usage_errors() {
        assert_eq!(run_with(["kittel-zipper", "solve", "--beta", "1", "--T", "1"]), EXIT_USAGE);
        assert_eq!(run_with(["kittel-zipper", "solve", "--k", "0"]), EXIT_USAGE);
    }

    #[test]
    fn config_supplies_defaults() {
        let cfg: RunConfig = toml::from_str("k = 3\nq = 2\nepsilon = 0.5\nJ = \"inf\"\nT = 2.0\n").unwrap();
        let r = resolve_params(&ParamArgs::default(), &cfg).unwrap();
        assert_eq!(r.transfer.k, 3);
        assert_eq!(r.transfer.eta, 0.0);
        assert_eq!(r.physical.unwrap().beta(), 0.5);
        let overridden = resolve_params(&ParamArgs { k: Some(2), ..ParamArgs::default() }, &cfg).unwrap();
        assert_eq!(overridden.transfer.k, 2);
    }
}
