use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsl::catalog::{self, Expected};
use rsl::estimates::{estimate_report, EstimateReport};
use rsl::gelfand::{geometric_grid, lambda_star, minimal_branch};
use rsl::radial::{integrate_inward, integrate_regular_ivp, DEFAULT_GRID_N, DEFAULT_R_MIN};
use rsl::radial::nonlinearity::Table;
use rsl::stability::{semistability_verdict, StabilityVerdict};
use rsl::verify::verify_catalog;
use rsl::weak::{classify_weak_solution, verify_integral_representation};
use rsl::{Grid64, GridKind, LabError, Nonlinearity64, Profile64};
use serde_json::Value;

const GRID_ENV: &str = "RSL_DEFAULT_GRID_N";
const REPRESENTATION_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "rsl", version, about = "Semi-stable radial solutions of -Δu = f(u) on the punctured unit ball")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size; defaults to $RSL_DEFAULT_GRID_N or 4096.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_R_MIN)]
    r_min: f64,
    /// Free-form label added as "stamp" to JSON output.
    #[arg(long, global = true)]
    stamp: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a profile from the center (--m) or inward from r = 1 (--u1, --ur1).
    Solve(SolveArgs),
    /// Stability report; exits 1 unless the verdict is semi-stable.
    Stability(ProfileArgs),
    /// Energy classification and sharp-estimate checks; exits 1 if an applicable check fails.
    Estimates(EstimatesArgs),
    /// Weak-solution classification.
    Classify(ClassifyArgs),
    /// Minimal branch of -Δu = λ g(u) by shooting.
    Branch(BranchArgs),
    /// List catalog entries or emit one profile.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Run every catalog entry through every module; exits 1 on any mismatch.
    VerifyAll(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    g: String,
    #[arg(long = "N")]
    n: usize,
    /// Multiplies the source.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, conflicts_with_all = ["u1", "ur1"])]
    m: Option<f64>,
    #[arg(long, requires = "ur1")]
    u1: Option<f64>,
    #[arg(long, requires = "u1")]
    ur1: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct ProfileArgs {
    /// Catalog id, e.g. alpha:N=10,a=-6.
    #[arg(long, conflicts_with = "profile")]
    catalog: Option<String>,
    /// Profile JSON file.
    #[arg(long, requires = "g")]
    profile: Option<PathBuf>,
    /// Nonlinearity for --profile: exp | power:p | alpha:a | zero | file:path.
    #[arg(long)]
    g: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Table,
    Json,
}

#[derive(Args)]
struct EstimatesArgs {
    #[command(flatten)]
    source: ProfileArgs,
    #[arg(long, value_enum, default_value = "table")]
    format: Report,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: ProfileArgs,
    /// Also rebuild u from its integral representation; exits 1 above 1e-6 deviation.
    #[arg(long)]
    representation: bool,
}

#[derive(Args)]
struct BranchArgs {
    #[arg(long)]
    g: String,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 1e-2)]
    m_min: f64,
    #[arg(long, default_value_t = 1e3)]
    m_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Emit {
        id: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Keep only ids starting with this prefix (e.g. alpha, bv, exp).
    #[arg(long)]
    only: Option<String>,
    /// JSON map id -> expected outcome replacing the stored expectations.
    #[arg(long)]
    expectations: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Report,
}

enum Failure {
    Usage(String),
    Analysis(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::InvalidArgument(_) | LabError::InvalidNonlinearity(_) | LabError::Io(_) => Failure::Usage(e.to_string()),
            other => Failure::Analysis(other.to_string()),
        }
    }
}

type CliResult = Result<bool, Failure>;

struct Output {
    out: Option<PathBuf>,
    stamp: Option<String>,
}

impl Output {
    fn text(&self, s: &str) -> Result<(), Failure> {
        match &self.out {
            Some(p) => std::fs::write(p, s).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{s}");
                Ok(())
            }
        }
    }

    fn json<S: serde::Serialize>(&self, v: &S) -> Result<(), Failure> {
        let mut value = serde_json::to_value(v).map_err(|e| Failure::Analysis(e.to_string()))?;
        if let (Some(stamp), Value::Object(map)) = (&self.stamp, &mut value) {
            map.insert("stamp".into(), Value::String(stamp.clone()));
        }
        let mut s = serde_json::to_string_pretty(&value).map_err(|e| Failure::Analysis(e.to_string()))?;
        s.push('\n');
        self.text(&s)
    }
}

fn grid(cli: &Cli) -> Result<Grid64, Failure> {
    let n = match cli.grid_n {
        Some(n) => n,
        None => match std::env::var(GRID_ENV) {
            Ok(v) => v.parse().map_err(|_| Failure::Usage(format!("{GRID_ENV}={v:?} is not a node count")))?,
            Err(_) => DEFAULT_GRID_N,
        },
    };
    Ok(Grid64::build(GridKind::Logarithmic, n, cli.r_min)?)
}

fn read(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// `exp | power:p | alpha:a | zero | file:path`, the last holding either a serialized
/// nonlinearity or a CSV table with header `s,f,df`.
fn parse_g(spec: &str, dimension: usize, lambda: f64) -> Result<Nonlinearity64, Failure> {
    let number = |s: &str| s.parse::<f64>().map_err(|_| Failure::Usage(format!("bad number {s:?} in --g {spec}")));
    let base = match spec.split_once(':') {
        None if spec == "exp" => Nonlinearity64::Exponential { lambda: 1.0 },
        None if spec == "zero" => Nonlinearity64::Zero,
        Some(("power", p)) => Nonlinearity64::Power { p: number(p)?, lambda: 1.0 },
        Some(("alpha", a)) => return Ok(Nonlinearity64::alpha_family(number(a)?, dimension)?),
        Some(("file", path)) => {
            let text = read(path.as_ref())?;
            if text.trim_start().starts_with('{') {
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?
            } else {
                let mut cols = (Vec::new(), Vec::new(), Vec::new());
                for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
                    let v: Vec<&str> = line.split(',').map(str::trim).collect();
                    if v.len() != 3 {
                        return Err(Failure::Usage(format!("{path}: expected s,f,df rows, got {line:?}")));
                    }
                    cols.0.push(number(v[0])?);
                    cols.1.push(number(v[1])?);
                    cols.2.push(number(v[2])?);
                }
                Nonlinearity64::Tabulated(Table::new(cols.0, cols.1, cols.2)?)
            }
        }
        _ => return Err(Failure::Usage(format!("unknown nonlinearity {spec:?}; use exp | power:p | alpha:a | zero | file:path"))),
    };
    if lambda == 1.0 {
        Ok(base)
    } else {
        Ok(base.scaled(lambda)?)
    }
}

fn load(cli: &Cli, args: &ProfileArgs) -> Result<(Profile64, Nonlinearity64), Failure> {
    match (&args.catalog, &args.profile) {
        (Some(id), None) => {
            let e = catalog::find(id, &grid(cli)?)?;
            Ok((e.profile, e.nl))
        }
        (None, Some(path)) => {
            let profile = Profile64::from_json(&read(path)?)?;
            let g = args.g.as_deref().ok_or_else(|| Failure::Usage("--profile needs --g".into()))?;
            let nl = parse_g(g, profile.dimension(), args.lambda)?;
            Ok((profile, nl))
        }
        _ => Err(Failure::Usage("give exactly one of --catalog ID or --profile PATH".into())),
    }
}

fn estimates_table(r: &EstimateReport<f64>) -> String {
    let verdict = |pass: bool| if pass { "pass" } else { "fail" };
    let mut rows: Vec<(String, String, String)> = vec![(
        "energy".into(),
        format!("tail slope {:.4}", r.energy.tail_slope),
        serde_json::to_value(r.energy.classification).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
    )];
    if let Some(c) = &r.lemma24 {
        rows.push(("inverse-square".into(), format!("K {:.4e}", c.k_fit), verdict(c.pass).into()));
    }
    if let Some(c) = &r.lemma25 {
        rows.push(("doubling-gap".into(), format!("M' {:.4e}", c.m_prime_fit), verdict(c.pass).into()));
    }
    rows.push((
        "pointwise".into(),
        format!("M {:.4e} (r0 {:.3})", r.thm11.m_fit, r.thm11.r0_used),
        verdict(r.thm11.pass).into(),
    ));
    if let Some(c) = &r.thm12 {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
        let constant = match c.alpha_2d {
            Some(a) => format!("alpha {a:.4e}"),
            None => format!("M1 {} M2 {}", fmt(c.m1_fit), fmt(c.m2_fit)),
        };
        rows.push(("gradient".into(), constant, verdict(c.pass).into()));
    }
    if let Some(g) = r.growth_exponent {
        rows.push(("growth exponent".into(), format!("{g:.6e}"), "-".into()));
    }
    if let Some(g) = r.log_coefficient {
        rows.push(("log coefficient".into(), format!("{g:.6e}"), "-".into()));
    }
    for (name, why) in &r.skipped {
        rows.push((name.clone(), why.clone(), "skipped".into()));
    }
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(5).max(5);
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(8).max(8);
    let mut s = format!("{:<w0$}  {:<w1$}  pass\n", "check", "constant");
    for (a, b, c) in rows {
        s.push_str(&format!("{a:<w0$}  {b:<w1$}  {c}\n"));
    }
    s.push_str(&format!("consistent: {}\n", if r.consistent() { "yes" } else { "no" }));
    s
}

fn run(cli: &Cli) -> CliResult {
    let out = Output { out: cli.out.clone(), stamp: cli.stamp.clone() };
    match &cli.command {
        Command::Solve(a) => {
            let nl = parse_g(&a.g, a.n, a.lambda)?;
            let grid = grid(cli)?;
            let profile = match (a.m, a.u1, a.ur1) {
                (Some(m), None, None) => integrate_regular_ivp(&nl, m, a.n, &grid)?,
                (None, Some(u1), Some(ur1)) => integrate_inward(&nl, u1, ur1, a.n, &grid)?,
                _ => return Err(Failure::Usage("give --m, or both --u1 and --ur1".into())),
            };
            match a.format {
                Format::Json => out.json(&profile)?,
                Format::Csv => out.text(&profile.to_csv())?,
            }
            Ok(true)
        }
        Command::Stability(a) => {
            let (profile, nl) = load(cli, a)?;
            let report = semistability_verdict(&profile, &nl)?;
            out.json(&report)?;
            Ok(report.verdict == StabilityVerdict::SemiStable)
        }
        Command::Estimates(a) => {
            let (profile, nl) = load(cli, &a.source)?;
            let stable = semistability_verdict(&profile, &nl)?.verdict == StabilityVerdict::SemiStable;
            let report = estimate_report(&profile, &nl, stable)?;
            match a.format {
                Report::Json => out.json(&report)?,
                Report::Table => out.text(&estimates_table(&report))?,
            }
            Ok(report.consistent())
        }
        Command::Classify(a) => {
            let (profile, nl) = load(cli, &a.source)?;
            let class = classify_weak_solution(&profile, &nl)?;
            if !a.representation {
                out.json(&class)?;
                return Ok(true);
            }
            let rep = verify_integral_representation(&profile, &nl)?;
            let ok = rep.deviation <= REPRESENTATION_TOL;
            out.json(&serde_json::json!({ "classification": class, "representation": rep }))?;
            Ok(ok)
        }
        Command::Branch(a) => {
            let g = parse_g(&a.g, a.n, 1.0)?;
            let ms = geometric_grid(a.m_min, a.m_max, a.points)?;
            let diagram = minimal_branch(&g, a.n, &ms, &grid(cli)?)?;
            if diagram.points.is_empty() {
                return Err(Failure::Analysis(format!("every shot failed: {:?}", diagram.failed.first())));
            }
            let ls = lambda_star(&diagram)?;
            eprintln!(
                "lambda_star ~ {:.6} at m = {:.4} ({}), {} failed shots",
                ls.estimate,
                ls.maximizer_m,
                if ls.fold { "fold" } else if ls.monotone { "monotone: lower bound" } else { "no clear fold" },
                diagram.failed.len()
            );
            match a.format {
                Format::Csv => out.text(&diagram.to_csv())?,
                Format::Json => out.json(&serde_json::json!({ "diagram": diagram, "lambda_star": ls }))?,
            }
            Ok(true)
        }
        Command::Catalog { action: CatalogAction::List } => {
            let entries = catalog::standard_catalog(&grid(cli)?)?;
            let w = entries.iter().map(|e| e.id.len()).max().unwrap_or(2);
            let mut s = format!("{:<w$}  {:<11}  {:<10}  {:<13}  description\n", "id", "stability", "energy", "weak");
            for e in &entries {
                s.push_str(&format!(
                    "{:<w$}  {:<11}  {:<10}  {:<13}  {}\n",
                    e.id,
                    e.expected.stability.as_str(),
                    if e.expected.non_energy { "non-energy" } else { "energy" },
                    e.expected.weak.as_str(),
                    e.description
                ));
            }
            out.text(&s)?;
            Ok(true)
        }
        Command::Catalog { action: CatalogAction::Emit { id, format } } => {
            let e = catalog::find(id, &grid(cli)?)?;
            match format {
                Format::Json => out.json(&e.profile)?,
                Format::Csv => out.text(&e.profile.to_csv())?,
            }
            Ok(true)
        }
        Command::VerifyAll(a) => {
            let overrides: BTreeMap<String, Expected> = match &a.expectations {
                Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
                None => BTreeMap::new(),
            };
            let m = verify_catalog(&grid(cli)?, a.only.as_deref(), &overrides)?;
            if m.rows.is_empty() {
                return Err(Failure::Usage(format!("no catalog entries match {:?}", a.only)));
            }
            match a.format {
                Report::Json => out.json(&m)?,
                Report::Table => out.text(&m.to_table())?,
            }
            Ok(m.all_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Analysis(msg)) => {
            eprintln!("rsl: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("rsl: {msg}");
            ExitCode::from(2)
        }
    }
}
