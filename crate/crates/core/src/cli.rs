//! Command-line front end. `parse_args` turns argv plus an optional flat
//! config file into a [`RunSpec`]; `execute` runs it and returns the exit code.
//!
//! Exit codes: 0 success, 1 assertion failure, 2 usage, 3 config, 4 numeric failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::function::{Growth, PointFunction, Regularity};
use crate::geometry::{make_disconnected_config, mesh_over, parse_point, DisconnectedConfig, Interval, KeyValueConfig, Mesh1D};
use crate::harnack::{
    barrier_combination_check, disconnected_harnack_experiment, localized_mp_check, s_sweep, DataFamily,
    HarnackReport,
};
use crate::kernel::{check_ellipticity, sample_pairs, Kernel, Normalization};
use crate::operator::{barrier_w1, barrier_w2, eval_l, near_radius_for, FAR_TRUNCATION_FACTOR};
use crate::poisson::{bounds_sample_grid, check_poisson_bounds, poisson_eval, poisson_extend, PoissonKernelBall};
use crate::quadrature::Quadrature;
use crate::report::{emit, fmt17, harnack_csv, matrix_dump, poisson_csv, solution_csv, to_json};
use crate::selftest::{run_suite, Outcome};
use crate::solver1d::Discretization;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

pub const DEFAULT_CELLS: usize = 256;
pub const THREADS_ENV: &str = "NONLOCAL_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "nonlocal-lab", version, about = "Numerical lab for nonlocal operators of order 2s")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Kernel family: frac, ti or general.
    #[arg(long, global = true)]
    kernel: Option<String>,
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Multiply the kernel by 1 - s.
    #[arg(long = "normalize-1ms", global = true)]
    normalize_1ms: bool,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    x2: Option<String>,
    #[arg(long, global = true)]
    r: Option<f64>,
    #[arg(long = "R", global = true)]
    big_r: Option<f64>,
    /// Cells per interval.
    #[arg(long = "N", global = true)]
    cells: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// json or csv.
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Evaluate L on a barrier or on data at the given points.
    #[command(name = "evalL")]
    EvalL {
        #[arg(long)]
        barrier: Option<String>,
        #[arg(long)]
        data: Option<String>,
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        x: Vec<f64>,
    },
    /// Fractional Poisson kernel of a ball.
    Poisson {
        #[command(subcommand)]
        action: PoissonSub,
    },
    /// Solve the exterior Dirichlet problem in one dimension.
    Solve1d {
        #[arg(long)]
        data: Option<String>,
        /// Single interval `a,b`; otherwise the two-ball geometry is used.
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
        #[arg(long = "dump-matrix")]
        dump_matrix: Option<PathBuf>,
    },
    /// Disconnected Harnack experiments.
    Harnack {
        #[command(subcommand)]
        action: HarnackSub,
    },
    /// Run the acceptance suite and write its report files.
    Selftest {
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum PoissonSub {
    Eval(PoissonArgs),
    Extend(PoissonArgs),
    Bounds(PoissonArgs),
}

#[derive(Args, Debug, Clone)]
struct PoissonArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Interior point, coordinates separated by commas; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    x: Vec<String>,
    /// Exterior point; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    z: Vec<String>,
    #[arg(long)]
    data: Option<String>,
    /// Samples per side for `bounds` when no points are given.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum HarnackSub {
    /// Harnack reports for one order over a data family.
    Run(FamilyArgs),
    /// C_max and c0_max over a grid of orders.
    Sweep {
        #[arg(long = "s-grid", value_delimiter = ',')]
        s_grid: Vec<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Localized maximum principle with negative data far away.
    Mp {
        /// Data value outside B_R.
        #[arg(long, allow_hyphen_values = true)]
        far: Option<f64>,
    },
    /// L applied to the two barriers on B_r(x1).
    Barrier {
        #[arg(long)]
        points: Option<usize>,
    },
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// random, mass or far-negative.
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    masses: Vec<f64>,
    #[arg(long)]
    baseline: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub tag: String,
    pub s: f64,
    pub lambda: Option<f64>,
    pub normalization: Normalization,
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        let k = Kernel::from_tag(&self.tag, 1, self.s)?.with_normalization(self.normalization);
        match self.lambda {
            Some(l) => k.with_lambda(l),
            None => Ok(k),
        }
    }
}

/// Exterior data given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Const(f64),
    Indicator(f64, f64),
    /// `M` on `|y| >= R`, zero inside.
    MassFar { mass: f64, big_r: f64 },
    /// Piecewise constant `(a, b, value)` pieces.
    Custom(Vec<(f64, f64, f64)>),
}

impl DataSpec {
    pub fn to_function(&self) -> PointFunction {
        match *self {
            DataSpec::Const(c) => PointFunction::constant(c),
            DataSpec::Indicator(a, b) => PointFunction::indicator(a, b, 1.0),
            DataSpec::MassFar { mass, big_r } => {
                PointFunction::new1(move |y| if y.abs() >= big_r { mass } else { 0.0 }, Growth::Bounded(mass.abs()))
                    .with_breaks(vec![-big_r, big_r], Regularity::Discontinuous)
            }
            DataSpec::Custom(ref pieces) => {
                let pieces = pieces.clone();
                let bound: f64 = pieces.iter().map(|p| p.2.abs()).sum();
                let breaks = pieces.iter().flat_map(|p| [p.0, p.1]).collect();
                PointFunction::new1(
                    move |y| pieces.iter().filter(|p| y > p.0 && y < p.1).map(|p| p.2).sum(),
                    Growth::Bounded(bound),
                )
                .with_breaks(breaks, Regularity::Discontinuous)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    W1,
    W2,
    Data(DataSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonAction {
    Eval,
    Extend,
    Bounds,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    TwoBalls(DisconnectedConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub enum HarnackAction {
    Run { family: DataFamily },
    Sweep { family: DataFamily, s_grid: Vec<f64>, points: usize },
    Mp { far: f64 },
    Barrier { points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    EvalL {
        kernel: KernelSpec,
        config: DisconnectedConfig,
        target: Target,
        xs: Vec<f64>,
    },
    Poisson {
        action: PoissonAction,
        n: usize,
        s: f64,
        r: f64,
        xs: Vec<Vec<f64>>,
        zs: Vec<Vec<f64>>,
        data: DataSpec,
        samples: usize,
    },
    Solve1d {
        kernel: KernelSpec,
        domain: Domain,
        data: DataSpec,
        dump_matrix: Option<PathBuf>,
    },
    Harnack {
        kernel: KernelSpec,
        config: DisconnectedConfig,
        action: HarnackAction,
    },
    Selftest {
        out_dir: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub seed: u64,
    pub cells: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// `--help` or `--version`: printed text, exit 0.
    Info(String),
    Usage(String),
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Config(format!("{}: {e}", e.code()))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Flag value, else config-file value, else `None`.
struct Merge<'a> {
    file: &'a KeyValueConfig,
}

impl Merge<'_> {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> std::result::Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("key `{key}`: cannot parse {v:?}"))),
        }
    }

    fn text(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.file.get(key).map(str::to_string))
    }

    fn list(&self, flag: Vec<f64>, key: &str) -> std::result::Result<Vec<f64>, CliError> {
        if !flag.is_empty() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(Vec::new()),
            Some(v) => parse_list(v).map_err(|e| CliError::Config(format!("key `{key}`: {e}"))),
        }
    }
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

pub fn parse_data(text: &str, big_r: Option<f64>, file: &KeyValueConfig) -> std::result::Result<DataSpec, CliError> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let nums = || parse_list(arg).map_err(|e| usage(format!("--data {text}: {e}")));
    match kind {
        "const" => match nums()?.as_slice() {
            [c] => Ok(DataSpec::Const(*c)),
            _ => Err(usage("--data const:c takes one value")),
        },
        "indicator" => match nums()?.as_slice() {
            [a, b] if a < b => Ok(DataSpec::Indicator(*a, *b)),
            _ => Err(usage("--data indicator:a,b needs a < b")),
        },
        "mfar" => match (nums()?.as_slice(), big_r) {
            ([m], Some(big_r)) => Ok(DataSpec::MassFar { mass: *m, big_r }),
            ([_], None) => Err(usage("--data mfar:M needs --R")),
            _ => Err(usage("--data mfar:M takes one value")),
        },
        "custom" => {
            let raw = file
                .get("pieces")
                .ok_or_else(|| CliError::Config("--data custom reads `pieces = a b v; ...` from --config".into()))?;
            let mut pieces = Vec::new();
            for piece in raw.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                let v: Vec<f64> = piece
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| CliError::Config(format!("key `pieces`: bad piece {piece:?}")))?;
                match v.as_slice() {
                    [a, b, c] if a < b => pieces.push((*a, *b, *c)),
                    _ => return Err(CliError::Config(format!("key `pieces`: expected `a b value`, got {piece:?}"))),
                }
            }
            Ok(DataSpec::Custom(pieces))
        }
        other => Err(usage(format!("unknown data kind {other:?}"))),
    }
}

fn parse_family(
    kind: Option<String>,
    samples: Option<usize>,
    masses: Vec<f64>,
    baseline: Option<f64>,
) -> std::result::Result<DataFamily, CliError> {
    let samples = samples.unwrap_or(20);
    match kind.as_deref().unwrap_or("random") {
        "random" | "random-nonneg" => Ok(DataFamily::RandomNonneg { samples }),
        "far-negative" | "far" => Ok(DataFamily::FarNegative { samples }),
        "mass" | "mass-near-x2" => Ok(DataFamily::MassNearX2 {
            masses: if masses.is_empty() { DataFamily::default_masses() } else { masses },
            baseline: baseline.unwrap_or(1.0),
        }),
        other => Err(usage(format!("unknown data family {other:?}"))),
    }
}

fn parse_points(raw: &[String], n: usize) -> std::result::Result<Vec<Vec<f64>>, CliError> {
    raw.iter()
        .map(|t| {
            let p = parse_point(t).map_err(|e| usage(format!("point {t:?}: {e}")))?;
            if p.len() != n {
                return Err(usage(format!("point {t:?} has {} coordinates, expected {n}", p.len())));
            }
            Ok(p)
        })
        .collect()
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let file = match &cli.common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            KeyValueConfig::parse(&text)?
        }
        None => KeyValueConfig::default(),
    };
    let m = Merge { file: &file };
    let c = cli.common;

    let seed = m.get(c.seed, "seed")?.unwrap_or(0);
    let cells = m.get(c.cells, "N")?.unwrap_or(DEFAULT_CELLS);
    let output = c.output.or_else(|| file.get("output").map(PathBuf::from));
    let format_text = m.text(c.format, "format");
    let normalize = c.normalize_1ms
        || matches!(file.get("normalize-1ms"), Some("true" | "1" | "yes"))
        || matches!(file.get("normalization"), Some("OneMinusS" | "1ms" | "one-minus-s"));
    let normalization = if normalize { Normalization::OneMinusS } else { Normalization::Plain };
    let tag = m.text(c.kernel, "kernel").unwrap_or_else(|| "frac".into());
    let lambda = m.get(c.lambda, "lambda")?;
    let s = m.get(c.s, "s")?;
    let kernel_with = |s: f64| KernelSpec {
        tag: tag.clone(),
        s,
        lambda,
        normalization,
    };
    let need_s = || s.ok_or_else(|| usage("missing --s (or `s` in the config file)"));

    let x1 = m.text(c.x1, "x1");
    let x2 = m.text(c.x2, "x2");
    let r = m.get(c.r, "r")?;
    let big_r = m.get(c.big_r, "R")?;
    let geometry_given = x1.is_some() || x2.is_some() || r.is_some() || big_r.is_some();
    let config = || -> std::result::Result<DisconnectedConfig, CliError> {
        let point = |t: &Option<String>, default: f64| match t {
            Some(t) => parse_point(t).map_err(|e| usage(format!("bad point {t:?}: {e}"))),
            None => Ok(vec![default]),
        };
        let (p1, p2) = (point(&x1, -2.0)?, point(&x2, 2.0)?);
        let n = p1.len();
        Ok(make_disconnected_config(n, p1, p2, r.unwrap_or(1.0), big_r.unwrap_or(16.0))?)
    };

    let (command, default_format) = match cli.command {
        Sub::EvalL { barrier, data, x } => {
            let target = match (m.text(barrier, "barrier").as_deref(), m.text(data, "data")) {
                (Some("w1"), None) => Target::W1,
                (Some("w2"), None) => Target::W2,
                (None, Some(d)) => Target::Data(parse_data(&d, big_r, &file)?),
                (Some(b), None) => return Err(usage(format!("unknown barrier {b:?}; use w1 or w2"))),
                _ => return Err(usage("evalL needs exactly one of --barrier or --data")),
            };
            let xs = m.list(x, "x")?;
            if xs.is_empty() {
                return Err(usage("evalL needs --x"));
            }
            let cmd = Command::EvalL {
                kernel: kernel_with(need_s()?),
                config: config()?,
                target,
                xs,
            };
            (cmd, Format::Json)
        }
        Sub::Poisson { action } => {
            let (action, args) = match action {
                PoissonSub::Eval(a) => (PoissonAction::Eval, a),
                PoissonSub::Extend(a) => (PoissonAction::Extend, a),
                PoissonSub::Bounds(a) => (PoissonAction::Bounds, a),
            };
            let n = m.get(args.n, "n")?.unwrap_or(1);
            let data = match m.text(args.data, "data") {
                Some(d) => parse_data(&d, big_r, &file)?,
                None => DataSpec::Const(1.0),
            };
            let xs = parse_points(&args.x, n)?;
            let zs = parse_points(&args.z, n)?;
            match action {
                PoissonAction::Eval if xs.is_empty() || zs.is_empty() => {
                    return Err(usage("poisson eval needs --x and --z"))
                }
                PoissonAction::Extend if xs.is_empty() => return Err(usage("poisson extend needs --x")),
                _ => {}
            }
            let cmd = Command::Poisson {
                action,
                n,
                s: need_s()?,
                r: r.unwrap_or(1.0),
                xs,
                zs,
                data,
                samples: m.get(args.samples, "samples")?.unwrap_or(16),
            };
            (cmd, if action == PoissonAction::Bounds { Format::Json } else { Format::Csv })
        }
        Sub::Solve1d { data, domain, dump_matrix } => {
            let domain = match m.text(domain, "domain") {
                Some(d) => match parse_list(&d).map_err(|e| usage(format!("--domain: {e}")))?.as_slice() {
                    [a, b] if a < b => Domain::Interval(*a, *b),
                    _ => return Err(usage("--domain takes a,b with a < b")),
                },
                None if geometry_given => Domain::TwoBalls(config()?),
                None => Domain::Interval(-1.0, 1.0),
            };
            let data = match m.text(data, "data") {
                Some(d) => parse_data(&d, big_r, &file)?,
                None => return Err(usage("solve1d needs --data")),
            };
            let cmd = Command::Solve1d {
                kernel: kernel_with(need_s()?),
                domain,
                data,
                dump_matrix,
            };
            (cmd, Format::Csv)
        }
        Sub::Harnack { action } => {
            let action_spec = match action {
                HarnackSub::Run(f) => HarnackAction::Run {
                    family: parse_family(
                        m.text(f.data, "data"),
                        m.get(f.samples, "samples")?,
                        m.list(f.masses, "masses")?,
                        m.get(f.baseline, "baseline")?,
                    )?,
                },
                HarnackSub::Sweep { s_grid, points, family: f } => {
                    let s_grid = m.list(s_grid, "s-grid")?;
                    if s_grid.is_empty() {
                        return Err(usage("sweep needs --s-grid"));
                    }
                    HarnackAction::Sweep {
                        family: parse_family(
                            m.text(f.data, "data"),
                            m.get(f.samples, "samples")?,
                            m.list(f.masses, "masses")?,
                            m.get(f.baseline, "baseline")?,
                        )?,
                        s_grid,
                        points: m.get(points, "points")?.unwrap_or(101),
                    }
                }
                HarnackSub::Mp { far } => HarnackAction::Mp {
                    far: m.get(far, "far")?.unwrap_or(-1.0),
                },
                HarnackSub::Barrier { points } => HarnackAction::Barrier {
                    points: m.get(points, "points")?.unwrap_or(101),
                },
            };
            let s = match &action_spec {
                HarnackAction::Sweep { s_grid, .. } => s.unwrap_or(s_grid[0]),
                _ => need_s()?,
            };
            let cmd = Command::Harnack {
                kernel: kernel_with(s),
                config: config()?,
                action: action_spec,
            };
            (cmd, Format::Json)
        }
        Sub::Selftest { out_dir } => {
            let out_dir = out_dir
                .or_else(|| file.get("out-dir").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("selftest-report"));
            (Command::Selftest { out_dir }, Format::Json)
        }
    };
    let format = match format_text.as_deref() {
        None => default_format,
        Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        Some(other) => return Err(usage(format!("unknown format {other:?}; use json or csv"))),
    };
    Ok(RunSpec {
        command,
        seed,
        cells,
        output,
        format,
    })
}

/// Text to write plus an optional assertion failure message.
struct Produced {
    text: String,
    failure: Option<String>,
}

impl Produced {
    fn ok(text: String) -> Self {
        Produced { text, failure: None }
    }
}

fn ellipticity_failure(kernel: &Kernel) -> Result<Option<String>> {
    let report = check_ellipticity(kernel, &sample_pairs(1, 256, 8.0, 0))?;
    Ok((!report.pass).then(|| {
        format!(
            "ellipticity check failed: ratios in [{}, {}], Λ = {}",
            report.min_ratio, report.max_ratio, kernel.lambda
        )
    }))
}

#[derive(Serialize)]
struct PointValue {
    x: f64,
    value: f64,
    error: f64,
    remainder_bound: f64,
}

#[derive(Serialize)]
struct ExtensionRow {
    x: f64,
    value: f64,
    quadrature_error: f64,
    remainder_bound: f64,
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    x: Vec<f64>,
    u: &'a [f64],
}

/// Assertion failures among nonnegative-data reports: `inf >= 0` and `sup >= avg`.
/// `avg` and `inf` live on different balls, so they are not compared.
fn report_invariant_failures(reports: &[HarnackReport], family: &DataFamily) -> Option<String> {
    if matches!(family, DataFamily::FarNegative { .. }) {
        return None;
    }
    let bad: Vec<usize> = reports
        .iter()
        .filter(|r| !(r.inf >= 0.0 && r.sup >= r.avg))
        .map(|r| r.sample_id)
        .collect();
    (!bad.is_empty()).then(|| format!("report invariants violated for samples {bad:?}"))
}

fn run_command(spec: &RunSpec) -> Result<Produced> {
    let json = spec.format == Format::Json;
    match &spec.command {
        Command::EvalL { kernel, config, target, xs } => {
            let kernel = kernel.build()?;
            if let Some(msg) = ellipticity_failure(&kernel)? {
                return Ok(Produced { text: String::new(), failure: Some(msg) });
            }
            let u = match target {
                Target::W1 => barrier_w1(config),
                Target::W2 => barrier_w2(config),
                Target::Data(d) => d.to_function(),
            };
            let quad = Quadrature::new(1e-11);
            let mut rows = Vec::with_capacity(xs.len());
            for &x in xs {
                let rho = near_radius_for(&u, x, 0.25 * config.r);
                let v = eval_l(&kernel, &u, &[x], rho, FAR_TRUNCATION_FACTOR * config.r, &quad)?;
                rows.push(PointValue {
                    x,
                    value: v.value,
                    error: v.error,
                    remainder_bound: v.remainder_bound,
                });
            }
            if json {
                return Ok(Produced::ok(to_json(&rows)?));
            }
            let mut text = String::from("x,value,error,remainder_bound\n");
            for p in &rows {
                text.push_str(&format!("{},{},{},{}\n", fmt17(p.x), fmt17(p.value), fmt17(p.error), fmt17(p.remainder_bound)));
            }
            Ok(Produced::ok(text))
        }
        Command::Poisson { action, n, s, r, xs, zs, data, samples } => {
            let pk = PoissonKernelBall::new(*n, *s, *r, vec![0.0; *n])?;
            let scale = r.powf(2.0 * s);
            let order = *n as f64 + 2.0 * s;
            let row = |x: &[f64], z: &[f64]| -> Result<(f64, f64, f64, f64)> {
                let p = poisson_eval(&pk, x, z)?;
                let d: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                Ok((x[0], z[0], p, p * d.powf(order) / scale))
            };
            match action {
                PoissonAction::Eval => {
                    let mut rows = Vec::new();
                    for x in xs {
                        for z in zs {
                            rows.push(row(x, z)?);
                        }
                    }
                    Ok(Produced::ok(if json { to_json(&rows)? } else { poisson_csv(&rows) }))
                }
                PoissonAction::Extend => {
                    let g = data.to_function();
                    let quad = Quadrature::new(1e-12);
                    let mut rows = Vec::new();
                    for x in xs {
                        let e = poisson_extend(&pk, &g, x[0], &quad)?;
                        rows.push(ExtensionRow {
                            x: x[0],
                            value: e.value,
                            quadrature_error: e.quadrature_error,
                            remainder_bound: e.remainder_bound,
                        });
                    }
                    if json {
                        return Ok(Produced::ok(to_json(&rows)?));
                    }
                    let mut text = String::from("x,value,quadrature_error,remainder_bound\n");
                    for e in &rows {
                        text.push_str(&format!(
                            "{},{},{},{}\n",
                            fmt17(e.x),
                            fmt17(e.value),
                            fmt17(e.quadrature_error),
                            fmt17(e.remainder_bound)
                        ));
                    }
                    Ok(Produced::ok(text))
                }
                PoissonAction::Bounds => {
                    let (gx, gz) = bounds_sample_grid(&pk, *samples, 8.0)?;
                    let xs = if xs.is_empty() { gx } else { xs.clone() };
                    let zs = if zs.is_empty() { gz } else { zs.clone() };
                    let bounds = check_poisson_bounds(&pk, &xs, &zs)?;
                    let failure = (!bounds.pass).then(|| "Poisson kernel ratio not bounded away from 0 and infinity".to_string());
                    let text = if json {
                        to_json(&bounds)?
                    } else {
                        let mut rows = Vec::new();
                        for x in &xs {
                            for z in &zs {
                                rows.push(row(x, z)?);
                            }
                        }
                        poisson_csv(&rows)
                    };
                    Ok(Produced { text, failure })
                }
            }
        }
        Command::Solve1d { kernel, domain, data, dump_matrix } => {
            let kernel = kernel.build()?;
            if let Some(msg) = ellipticity_failure(&kernel)? {
                return Ok(Produced { text: String::new(), failure: Some(msg) });
            }
            let mesh = match domain {
                Domain::Interval(a, b) => Mesh1D::uniform(vec![Interval::new(*a, *b)], spec.cells)?,
                Domain::TwoBalls(cfg) => mesh_over(cfg, spec.cells)?,
            };
            let g = data.to_function();
            let disc = Discretization::new(&kernel, &mesh)?;
            if let Some(path) = dump_matrix {
                emit(Some(path), &matrix_dump(&disc.system(&g, None)?))?;
            }
            let u = crate::solver1d::DirichletSolver::from_discretization(disc)?.solve(&g, None)?;
            if json {
                let body = SolutionJson {
                    x: u.mesh.centers(),
                    u: &u.values,
                };
                return Ok(Produced::ok(to_json(&body)?));
            }
            Ok(Produced::ok(solution_csv(&u)))
        }
        Command::Harnack { kernel, config, action } => {
            let kernel = kernel.build()?;
            if let Some(msg) = ellipticity_failure(&kernel)? {
                return Ok(Produced { text: String::new(), failure: Some(msg) });
            }
            match action {
                HarnackAction::Run { family } => {
                    let exp = disconnected_harnack_experiment(&kernel, config, family, spec.seed, spec.cells)?;
                    let failure = report_invariant_failures(&exp.reports, family);
                    let text = if json { to_json(&exp)? } else { harnack_csv(&exp.reports) };
                    Ok(Produced { text, failure })
                }
                HarnackAction::Sweep { family, s_grid, points } => {
                    let sweep = s_sweep(&kernel, config, s_grid, family, spec.seed, spec.cells, *points)?;
                    let all: Vec<HarnackReport> = sweep.rows.iter().flat_map(|r| r.reports.iter().cloned()).collect();
                    let failure = report_invariant_failures(&all, family);
                    let text = if json { to_json(&sweep)? } else { harnack_csv(&all) };
                    Ok(Produced { text, failure })
                }
                HarnackAction::Mp { far } => {
                    let mp = localized_mp_check(&kernel, config, *far, spec.cells)?;
                    if json {
                        return Ok(Produced::ok(to_json(&mp)?));
                    }
                    Ok(Produced::ok(format!(
                        "min_u,tail_term,C_empirical\n{},{},{}\n",
                        fmt17(mp.min_u),
                        fmt17(mp.tail_term),
                        fmt17(mp.c_empirical)
                    )))
                }
                HarnackAction::Barrier { points } => {
                    let comb = barrier_combination_check(&kernel, config, *points)?;
                    if json {
                        return Ok(Produced::ok(to_json(&comb)?));
                    }
                    let mut text = String::from("x,Lw1,Lw2,Lv\n");
                    let p = &comb.profile;
                    for i in 0..p.xs.len() {
                        text.push_str(&format!(
                            "{},{},{},{}\n",
                            fmt17(p.xs[i]),
                            fmt17(p.lw1[i]),
                            fmt17(p.lw2[i]),
                            fmt17(comb.v_profile[i])
                        ));
                    }
                    Ok(Produced::ok(text))
                }
            }
        }
        Command::Selftest { out_dir } => run_selftest(spec.seed, out_dir),
    }
}

pub fn outcome_line(o: &Outcome) -> String {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    format!("criterion {} [{tag}] {}: {}", o.id, o.title, o.detail)
}

/// Runs the suite twice; the second run only feeds the reproducibility check.
fn run_selftest(seed: u64, out_dir: &Path) -> Result<Produced> {
    let first = run_suite(seed)?;
    let second = run_suite(seed)?;
    let json = to_json(&first)?;
    let same = json == to_json(&second)?;
    let mut lines: Vec<String> = first.iter().map(outcome_line).collect();
    lines.push(format!(
        "criterion 9 [{}] reproducible reports: two runs with seed {seed} serialize {}",
        if same { "PASS" } else { "FAIL" },
        if same { "identically" } else { "differently" }
    ));
    let mut csv = String::from("id,pass,title\n");
    for o in &first {
        csv.push_str(&format!("{},{},{}\n", o.id, o.pass, o.title));
    }
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("selftest.json"), &json)?;
    fs::write(out_dir.join("selftest.csv"), &csv)?;
    let failed: Vec<u32> = first.iter().filter(|o| !o.pass).map(|o| o.id).chain((!same).then_some(9)).collect();
    let failure = (!failed.is_empty()).then(|| format!("criteria {failed:?} failed"));
    Ok(Produced {
        text: lines.join("\n") + "\n",
        failure,
    })
}

/// Applies `NONLOCAL_LAB_THREADS` to the global thread pool.
fn configure_threads() -> std::result::Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool built earlier in the process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn execute(spec: &RunSpec) -> i32 {
    match run_command(spec) {
        Ok(produced) => {
            // Selftest prints its lines and keeps the files in its directory.
            let target = match spec.command {
                Command::Selftest { .. } => None,
                _ => spec.output.as_deref(),
            };
            if let Err(e) = emit(target, &produced.text) {
                eprintln!("error[{}]: {e}", e.code());
                return e.exit_code();
            }
            match produced.failure {
                Some(msg) => {
                    eprintln!("assertion failed: {msg}");
                    EXIT_ASSERTION
                }
                None => EXIT_OK,
            }
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = configure_threads().and_then(|()| parse_args(argv));
    match spec {
        Ok(spec) => execute(&spec),
        Err(CliError::Info(text)) => {
            print!("{text}");
            EXIT_OK
        }
        Err(e) => {
            match &e {
                CliError::Usage(msg) => eprintln!("{msg}"),
                CliError::Config(msg) => eprintln!("error[ConfigParseError]: {msg}"),
                CliError::Info(_) => {}
            }
            e.exit_code()
        }
    }
}
