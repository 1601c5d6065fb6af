//! Command-line front end. Every subcommand writes CSV tables or JSON and
//! reports failures through the exit status: 2 for usage errors, 3 for
//! domain and singularity errors, 4 for eigensolver non-convergence.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::basis::{eval_basis, Kind, Params};
use crate::calculus::symmetric_grid;
use crate::error::Error;
use crate::io::{write_json, Table};
use crate::oscillation::{scan, ScanOptions, Statistic};
use crate::perturbed::{
    derive_f2_h, eigenfunction, solve_c1c2, F1Spec, LogFactor, OperatorDescriptor,
    PerturbedOperator,
};
use crate::quadrature::build_rule;
use crate::spectral::{analyze, apply_d, apply_t, apply_x, xi_map, CoeffSeq, SeqParity};
use crate::stats::log_spaced;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "dunkl",
    version,
    about = "Generalized Hermite functions, quadrature, eigenfunction estimates and perturbed oscillators"
)]
pub struct Cli {
    /// Worker threads for parallel scans.
    #[arg(long, global = true, env = "DUNKL_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate p_k, φ_k and ξ_k at one point (JSON) or on a grid (CSV).
    ///
    /// CSV columns: x,p_k,phi_k,xi_k (or x and the single column selected by --kind).
    #[command(allow_negative_numbers = true)]
    Basis(BasisArgs),
    /// Gaussian quadrature rule with k nodes.
    ///
    /// CSV columns: i,x,lambda.
    #[command(allow_negative_numbers = true)]
    Quad(QuadArgs),
    /// First n eigenvalues (2k+1+2σ)s as a JSON array.
    #[command(allow_negative_numbers = true)]
    Spectrum(SpectrumArgs),
    /// Scan an eigenfunction estimate over k and fit its log-log slope.
    ///
    /// Prints a JSON summary (slope, intercept, min, max, median).
    /// CSV columns: k,value,raw.
    #[command(allow_negative_numbers = true)]
    Estimates(EstimatesArgs),
    /// Expansion coefficients of a test function in the basis φ_k.
    ///
    /// JSON: {sigma, s, parity, coeffs}. CSV columns: k,c_k.
    #[command(allow_negative_numbers = true)]
    Transform(TransformArgs),
    /// Perturbed half-line operators H - 2f₁ d/dx + f₂ and their eigenfunctions.
    ///
    /// Prints JSON operator descriptors. CSV columns: x,u_k.
    #[command(allow_negative_numbers = true)]
    Perturb(PerturbArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Poly,
    Phi,
    Xi,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Poly => Kind::Poly,
            KindArg::Phi => Kind::Phi,
            KindArg::Xi => Kind::Xi,
        }
    }
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long)]
    pub k: usize,
    /// Single evaluation point.
    #[arg(long, conflicts_with = "points", required_unless_present = "points")]
    pub x: Option<f64>,
    /// Number of points of a symmetric grid on [-extent, extent].
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid half-width; defaults to a little past the outer turning point.
    #[arg(long)]
    pub extent: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuadArgs {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KParity {
    Auto,
    All,
    Even,
    Odd,
}

#[derive(Debug, Args)]
pub struct EstimatesArgs {
    /// One of thm11_i, thm11_ii, thm11_iii, thm12, thm13_i, thm13_ii,
    /// root_spacing, lemmaF, lemmaG.
    #[arg(long, value_parser = parse_statistic)]
    pub statistic: Statistic,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    #[arg(long, default_value_t = 100)]
    pub kmin: usize,
    #[arg(long, default_value_t = 2000)]
    pub kmax: usize,
    /// Number of log-spaced degrees.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    /// Degree parity; `auto` picks the one the statistic is defined for.
    #[arg(long, value_enum, default_value_t = KParity::Auto)]
    pub parity: KParity,
    /// Grid points per local wavelength.
    #[arg(long, default_value_t = 40.0)]
    pub density: f64,
    /// Window factor for lemmaG.
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    /// Smallest degree entering the slope fit.
    #[arg(long, default_value_t = 50)]
    pub fit_kmin: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    Statistic::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Statistic::ALL.iter().map(|st| st.name()).collect();
        format!("unknown statistic {s:?}; expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestFunction {
    /// exp(-w x²)
    Gauss,
    /// x exp(-w x²)
    XGauss,
    /// sech(w x) exp(-x²/2)
    Sech,
    /// x sech(w x) exp(-x²/2)
    XSech,
}

impl TestFunction {
    fn eval(self, w: f64, x: f64) -> f64 {
        match self {
            TestFunction::Gauss => (-w * x * x).exp(),
            TestFunction::XGauss => x * (-w * x * x).exp(),
            TestFunction::Sech => (-0.5 * x * x).exp() / (w * x).cosh(),
            TestFunction::XSech => x * (-0.5 * x * x).exp() / (w * x).cosh(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoeffOp {
    None,
    /// Division by x (odd input only).
    Xi,
    /// The Dunkl operator.
    T,
    /// Multiplication by x.
    X,
    /// Ordinary derivative.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Highest coefficient index.
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = TestFunction::Gauss)]
    pub function: TestFunction,
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// Coefficient-space operator applied after the analysis.
    #[arg(long, value_enum, default_value_t = CoeffOp::None)]
    pub apply: CoeffOp,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    InverseMultiple,
    Power,
    X,
    Cos,
    Exp,
    ExpXn,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    /// Coefficient of -2x⁻¹ d/dx; solves for both admissible conjugations.
    #[arg(long, requires = "c2", conflicts_with = "family")]
    pub c1: Option<f64>,
    /// Coefficient of x⁻².
    #[arg(long, requires = "c1")]
    pub c2: Option<f64>,
    #[arg(long, value_enum, required_unless_present = "c1")]
    pub family: Option<FamilyArg>,
    /// Multiplier of the first-order coefficient.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Exponent for the power family.
    #[arg(long)]
    pub r: Option<f64>,
    /// Exponent n of g = exp(x^n).
    #[arg(long)]
    pub n: Option<i32>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,
    /// Report eigen residuals for k = 0..=K.
    #[arg(long)]
    pub check: Option<usize>,
    /// Eigenfunction index for the CSV table.
    #[arg(long)]
    pub k: Option<usize>,
    /// Operator index when several conjugations exist.
    #[arg(long, default_value_t = 0)]
    pub branch: usize,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, default_value_t = 0.1)]
    pub xmin: f64,
    #[arg(long)]
    pub xmax: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Io(_) => EXIT_IO,
        CliError::Compute(Error::Convergence { .. }) => EXIT_CONVERGENCE,
        CliError::Compute(_) => EXIT_DOMAIN,
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult {
    if cli.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Basis(a) => cmd_basis(a, out),
        Command::Quad(a) => cmd_quad(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Estimates(a) => cmd_estimates(a, cli.jobs, out),
        Command::Transform(a) => cmd_transform(a, out),
        Command::Perturb(a) => cmd_perturb(a, cli.jobs, out),
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}"))),
        None => Ok(f()),
    }
}

fn kinds(sel: Option<KindArg>) -> Vec<(Kind, &'static str)> {
    let all = [
        (Kind::Poly, "p_k"),
        (Kind::Phi, "phi_k"),
        (Kind::Xi, "xi_k"),
    ];
    match sel {
        None => all.to_vec(),
        Some(k) => all.into_iter().filter(|(kk, _)| *kk == Kind::from(k)).collect(),
    }
}

pub fn cmd_basis(a: &BasisArgs, out: &mut dyn Write) -> CliResult {
    let p = Params::new(a.sigma, a.s)?;
    let cols = kinds(a.kind);
    if let Some(x) = a.x {
        let mut obj = serde_json::Map::new();
        obj.insert("k".into(), a.k.into());
        obj.insert("x".into(), x.into());
        for (kind, name) in &cols {
            let v = eval_basis(&p, a.k, x, *kind)?.value();
            obj.insert((*name).into(), v.into());
        }
        write_json(&obj, a.output.as_deref(), out)?;
        return Ok(());
    }
    let points = a.points.unwrap_or(0);
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let extent = match a.extent {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(_) => return Err(CliError::Usage("--extent must be positive".into())),
        None => 1.25 * (p.eigenvalue(a.k) / a.s).sqrt() / a.s.sqrt() + 2.0 / a.s.sqrt(),
    };
    let mut header = vec!["x"];
    header.extend(cols.iter().map(|(_, n)| *n));
    let mut table = Table::new(&header);
    for x in symmetric_grid(extent, points) {
        let mut row = vec![x];
        for (kind, _) in &cols {
            row.push(eval_basis(&p, a.k, x, *kind)?.value());
        }
        table.push(&row);
    }
    table.write_to(a.output.as_deref(), out)?;
    Ok(())
}

pub fn cmd_quad(a: &QuadArgs, out: &mut dyn Write) -> CliResult {
    let p = Params::new(a.sigma, a.s)?;
    if a.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let rule = build_rule(&p, a.k)?;
    let mut table = Table::new(&["i", "x", "lambda"]);
    for (i, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        table.push_indexed(i + 1, &[x, w]);
    }
    table.write_to(a.output.as_deref(), out)?;
    Ok(())
}

pub fn cmd_spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> CliResult {
    let p = Params::new(a.sigma, a.s)?;
    let values: Vec<f64> = (0..a.n).map(|k| p.eigenvalue(k)).collect();
    write_json(&values, None, out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct EstimatesSummary {
    statistic: &'static str,
    sigma: f64,
    s: f64,
    k_list: Vec<usize>,
    slope: Option<f64>,
    intercept: Option<f64>,
    min: f64,
    max: f64,
    median: f64,
    argmax_k: Option<usize>,
}

fn degree_list(a: &EstimatesArgs) -> Result<Vec<usize>, CliError> {
    if a.kmin < 1 || a.kmax < a.kmin {
        return Err(CliError::Usage("need 1 <= kmin <= kmax".into()));
    }
    if a.count == 0 {
        return Err(CliError::Usage("--count must be positive".into()));
    }
    let parity = match a.parity {
        KParity::Auto => match a.statistic {
            Statistic::Thm11Iii | Statistic::Thm12 | Statistic::Thm13Ii => KParity::Even,
            Statistic::Thm11Ii | Statistic::Thm13I if a.sigma < 0.0 => KParity::Odd,
            _ => KParity::All,
        },
        p => p,
    };
    let ks = match parity {
        KParity::Even => log_spaced(a.kmin, a.kmax, a.count, true),
        KParity::Odd => {
            let mut v: Vec<usize> = log_spaced(a.kmin, a.kmax, a.count, true)
                .into_iter()
                .map(|k| if k + 1 <= a.kmax { k + 1 } else { k - 1 })
                .collect();
            v.dedup();
            v
        }
        _ => log_spaced(a.kmin, a.kmax, a.count, false),
    };
    if ks.is_empty() || ks[0] == 0 {
        return Err(CliError::Usage("degree range is empty".into()));
    }
    Ok(ks)
}

pub fn cmd_estimates(a: &EstimatesArgs, jobs: Option<usize>, out: &mut dyn Write) -> CliResult {
    let p = Params::new(a.sigma, a.s)?;
    if !(a.density > 0.0) || !(a.epsilon > 0.0) {
        return Err(CliError::Usage("--density and --epsilon must be positive".into()));
    }
    let ks = degree_list(a)?;
    let opts = ScanOptions {
        density: a.density,
        epsilon: a.epsilon,
        jobs,
        fit_kmin: a.fit_kmin,
    };
    let result = scan(&p, a.statistic, &ks, &opts)?;
    if let Some(path) = &a.output {
        let mut table = Table::new(&["k", "value", "raw"]);
        for (i, &k) in result.k_list.iter().enumerate() {
            table.push_indexed(k, &[result.per_k_values[i], result.raw_values[i]]);
        }
        table.write_to(Some(path), out)?;
    }
    let sum = result.summary();
    let summary = EstimatesSummary {
        statistic: a.statistic.name(),
        sigma: a.sigma,
        s: a.s,
        k_list: result.k_list.clone(),
        slope: sum.slope,
        intercept: sum.intercept,
        min: sum.min,
        max: sum.max,
        median: sum.median,
        argmax_k: sum.argmax_k,
    };
    write_json(&summary, None, out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct TransformOut {
    sigma: f64,
    s: f64,
    parity: SeqParity,
    coeffs: Vec<f64>,
}

pub fn cmd_transform(a: &TransformArgs, out: &mut dyn Write) -> CliResult {
    let p = Params::new(a.sigma, a.s)?;
    if !(a.width > 0.0) {
        return Err(CliError::Usage("--width must be positive".into()));
    }
    let (f, w) = (a.function, a.width);
    let c = analyze(&p, |x| f.eval(w, x), a.n)?;
    let c = match a.apply {
        CoeffOp::None => c,
        CoeffOp::Xi => xi_map(&p, &c)?,
        CoeffOp::T => CoeffSeq::new(apply_t(&p, &c.coeffs)),
        CoeffOp::X => CoeffSeq::new(apply_x(&p, &c.coeffs)),
        CoeffOp::D => CoeffSeq::new(apply_d(&p, &c.coeffs)),
    };
    match a.format {
        Format::Json => {
            let doc = TransformOut {
                sigma: a.sigma,
                s: a.s,
                parity: c.parity,
                coeffs: c.coeffs,
            };
            write_json(&doc, a.output.as_deref(), out)?;
        }
        Format::Csv => {
            let mut table = Table::new(&["k", "c_k"]);
            for (k, &v) in c.coeffs.iter().enumerate() {
                table.push_indexed(k, &[v]);
            }
            table.write_to(a.output.as_deref(), out)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct PerturbEntry {
    #[serde(flatten)]
    descriptor: OperatorDescriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<Vec<f64>>,
}

fn family_spec(a: &PerturbArgs, family: FamilyArg) -> Result<F1Spec, CliError> {
    let c = a.c;
    Ok(match family {
        FamilyArg::InverseMultiple => F1Spec::InverseMultiple { c1: c },
        FamilyArg::Power => F1Spec::Power {
            c,
            r: a
                .r
                .ok_or_else(|| CliError::Usage("the power family needs --r".into()))?,
        },
        FamilyArg::X => F1Spec::LogDerivative { c, g: LogFactor::X },
        FamilyArg::Cos => F1Spec::LogDerivative { c, g: LogFactor::Cos },
        FamilyArg::Exp => F1Spec::LogDerivative { c, g: LogFactor::Exp },
        FamilyArg::ExpXn => F1Spec::LogDerivative {
            c,
            g: LogFactor::ExpPow(
                a.n
                    .ok_or_else(|| CliError::Usage("the exp_xn family needs --n".into()))?,
            ),
        },
    })
}

/// Default right end of eigenfunction grids: past the turning point of `u_k`.
fn default_xmax(op: &PerturbedOperator, k: usize) -> f64 {
    let s = op.s();
    (op.eigenvalue(k) / (s * s)).sqrt() + 3.0 / s.sqrt()
}

fn check_grid(op: &PerturbedOperator, a: &PerturbArgs, k: usize) -> Result<Vec<f64>, CliError> {
    let xmax = a.xmax.unwrap_or_else(|| default_xmax(op, k));
    if !(a.xmin > 0.0) || !(xmax > a.xmin) || a.points < 2 {
        return Err(CliError::Usage(
            "need 0 < xmin < xmax and at least two points".into(),
        ));
    }
    Ok(op.f1.grid(a.xmin, xmax, a.points))
}

pub fn cmd_perturb(a: &PerturbArgs, jobs: Option<usize>, out: &mut dyn Write) -> CliResult {
    let ops = match (a.c1, a.c2, a.family) {
        (Some(c1), Some(c2), None) => {
            Params::new(0.0, a.s)?;
            solve_c1c2(c1, c2, a.s)
        }
        (None, None, Some(family)) => {
            let sigma = a
                .sigma
                .ok_or_else(|| CliError::Usage("--family needs --sigma".into()))?;
            vec![derive_f2_h(family_spec(a, family)?, sigma, a.s)?]
        }
        _ => {
            return Err(CliError::Usage(
                "give either --c1 and --c2, or --family".into(),
            ))
        }
    };
    let mut entries = Vec::with_capacity(ops.len());
    for op in &ops {
        let residuals = match a.check {
            Some(kmax) => {
                let grid = check_grid(op, a, kmax)?;
                let ks: Vec<usize> = (0..=kmax).collect();
                Some(with_pool(jobs, || {
                    crate::perturbed::residual_scan(op, &ks, &grid)
                })??)
            }
            None => None,
        };
        entries.push(PerturbEntry {
            descriptor: op.descriptor(),
            residuals,
        });
    }
    if let Some(k) = a.k {
        let op = ops.get(a.branch).ok_or_else(|| {
            CliError::Usage(format!(
                "branch {} requested but {} operator(s) exist",
                a.branch,
                ops.len()
            ))
        })?;
        let grid = check_grid(op, a, k)?;
        let u = eigenfunction(op, k, &grid)?;
        let mut table = Table::new(&["x", "u_k"]);
        for (x, v) in u.grid.iter().zip(&u.values) {
            table.push(&[*x, *v]);
        }
        match &a.output {
            Some(path) => table.write_to(Some(path.as_path()), out)?,
            None => {
                return Err(CliError::Usage(
                    "--k writes an eigenfunction table and needs --output".into(),
                ))
            }
        }
    }
    write_json(&entries, None, out)?;
    Ok(())
}
