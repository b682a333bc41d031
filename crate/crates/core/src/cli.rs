//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verified condition fails, 2 invalid input,
//! 3 numerical failure. Output goes to `--out`, else to
//! `$BECKER_QC_OUT_DIR/<command>.<ext>` when that variable is set, else to
//! standard output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::criteria::{
    check_aw_becker, check_pde_conditions, check_pre_schwarzian, AnalyticSample, CheckReport, DiskGrid,
    PdeExtensionSpec, PdeGrids,
};
use crate::drivers::{normalize_driver, HerglotzDriver};
use crate::error::Error;
use crate::expr::Expr;
use crate::extension::{becker_extend, wirtinger, AnnulusGrid, BeltramiField, FD_STEP};
use crate::extremal::{bounds_csv, bounds_table, hk_lambda, l1_norm};
use crate::loewner::coefficient_flow;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BECKER_QC_OUT_DIR";

/// Horizon used when renormalizing a driver for `coeffs --normalize`.
const NORMALIZE_T_MAX: f64 = 240.0;

#[derive(Debug, Parser)]
#[command(name = "becker-qc", version, about = "Becker extensions, coefficient bounds and extendibility checks")]
pub struct Cli {
    /// Output file; overrides the environment default.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of upper bounds for |a_3| over k_min..=k_max.
    Bounds { k_min: f64, k_max: f64, steps: usize },
    /// Taylor coefficients a_2..a_N of the map generated by a driver.
    Coeffs {
        #[command(flatten)]
        driver: DriverArgs,
        #[arg(long = "N")]
        order: usize,
        /// Renormalize the driver so that p(0, t) = 1 first.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Becker extension sampled on an annulus.
    Extend {
        #[command(flatten)]
        driver: DriverArgs,
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Beltrami coefficient of the Becker extension sampled on an annulus.
    Beltrami {
        #[command(flatten)]
        driver: DriverArgs,
        #[command(flatten)]
        annulus: AnnulusArgs,
        /// Differentiate the extension numerically instead of using the
        /// analytic coefficient.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Check a sufficient condition for Becker extendibility.
    Verify {
        #[arg(value_enum)]
        criterion: Criterion,
        /// The map, an expression in z with f(0) = 0 and f'(0) = 1.
        #[arg(long)]
        f: String,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long, default_value_t = 64)]
        n_r: usize,
        #[arg(long, default_value_t = 64)]
        n_theta: usize,
    },
    /// The extremality functional for a quadratic differential, normalized
    /// to unit L¹ norm on |z| > 1.
    Lambda {
        #[arg(long)]
        k: f64,
        /// Laurent polynomial in z with powers at most -3.
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    ConstantPower,
    ExtremalA3,
    Blaschke,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    AwBecker,
    PreSchwarzian,
    PdeExample1,
    PdeExample2,
    PdeAwBecker,
}

#[derive(Debug, Clone, Args)]
pub struct DriverArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub k: f64,
    /// Power n of the constant-power family.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Rotation θ of the constant-power family.
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Rotation α of the Blaschke family.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Comma-separated zeros of the Blaschke family, e.g. "0.3,-0.2i".
    #[arg(long, default_value = "0")]
    pub zeros: String,
}

#[derive(Debug, Clone, Args)]
pub struct AnnulusArgs {
    /// r_min r_max n: an n × n polar grid.
    #[arg(long, num_args = 3, value_names = ["R_MIN", "R_MAX", "N"], default_values = ["1.05", "4", "40"])]
    pub annulus: Vec<String>,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Condition(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Condition(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Condition(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Range(_) | Error::Parse(_) | Error::Domain { .. } | Error::Branch { .. } => {
                Failure::Input(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub command: &'static str,
    pub format: Format,
    pub body: String,
}

fn parse_constant(src: &str) -> Result<Complex64, Failure> {
    let e = Expr::parse(src)?;
    match e.to_laurent()?.as_monomial() {
        Some((c, 0)) => Ok(c),
        _ if e.to_laurent()?.is_zero() => Ok(Complex64::default()),
        _ => Err(Failure::Input(format!("'{src}' is not a constant"))),
    }
}

impl DriverArgs {
    pub fn build(&self) -> Result<HerglotzDriver, Failure> {
        Ok(match self.family {
            Family::ConstantPower => HerglotzDriver::constant_power(self.k, self.theta, self.n)?,
            Family::ExtremalA3 => HerglotzDriver::extremal_a3(self.k)?,
            Family::Blaschke => HerglotzDriver::blaschke(self.k, self.alpha, self.zero_list()?)?,
        })
    }

    fn zero_list(&self) -> Result<Vec<Complex64>, Failure> {
        self.zeros.split(',').map(|s| parse_constant(s.trim())).collect()
    }

    fn beltrami_field(&self) -> Result<BeltramiField, Failure> {
        Ok(match self.family {
            Family::ExtremalA3 => BeltramiField::extremal(self.k)?,
            Family::Blaschke => BeltramiField::blaschke(self.k, self.alpha, self.zero_list()?)?,
            Family::ConstantPower => BeltramiField::from_driver(self.build()?),
        })
    }
}

impl AnnulusArgs {
    pub fn grid(&self) -> Result<AnnulusGrid, Failure> {
        let bad = || Failure::Input(format!("--annulus expects R_MIN R_MAX N, got {:?}", self.annulus));
        let [a, b, n] = self.annulus.as_slice() else { return Err(bad()) };
        let r_min: f64 = a.parse().map_err(|_| bad())?;
        let r_max: f64 = b.parse().map_err(|_| bad())?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if !(r_min >= 1.0) {
            return Err(Failure::Input(format!("the annulus must lie in |z| >= 1, got r_min = {r_min}")));
        }
        Ok(AnnulusGrid::new(r_min, r_max, n, n)?)
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Input(format!("tolerance {tol} must be positive")))
    }
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cmd_bounds(k_min: f64, k_max: f64, steps: usize, format: Format) -> Result<String, Failure> {
    let valid = k_min > 0.0 && k_max < 1.0 && steps >= 1 && (k_min < k_max || (k_min == k_max && steps == 1));
    if !valid {
        return Err(Failure::Input(format!(
            "need 0 < k_min < k_max < 1 and steps >= 1 (or k_min = k_max with one step), got {k_min} {k_max} {steps}"
        )));
    }
    let grid: Vec<f64> = if steps == 1 {
        vec![k_min]
    } else {
        (0..steps).map(|i| k_min + (k_max - k_min) * i as f64 / (steps - 1) as f64).collect()
    };
    let rows = bounds_table(&grid)?;
    Ok(match format {
        Format::Csv => bounds_csv(&rows),
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| json!({"k": r.k, "becker_sharp": r.becker_sharp, "fekete_szego": r.fekete_szego, "krushkal": r.krushkal}))
                .collect();
            serde_json::to_string_pretty(&v).expect("plain data serializes")
        }
    })
}

fn cmd_coeffs(driver: &DriverArgs, order: usize, normalize: bool, tol: f64, format: Format) -> Result<String, Failure> {
    check_tol(tol)?;
    if order < 2 {
        return Err(Failure::Input("--N must be at least 2".into()));
    }
    let mut d = driver.build()?;
    if normalize && !d.is_normalized() {
        d = normalize_driver(&d, NORMALIZE_T_MAX, 1e-12)?;
    }
    let a = coefficient_flow(&d, order, tol).map_err(|e| match e {
        Error::Series(m) if !d.is_normalized() => Failure::Numerical(format!("{m}; rerun with --normalize")),
        e => e.into(),
    })?;
    Ok(match format {
        Format::Json => {
            let mut m = Map::new();
            for (j, c) in (2..).zip(&a) {
                m.insert(format!("a_{j}"), pair(*c));
            }
            serde_json::to_string_pretty(&Value::Object(m)).expect("plain data serializes")
        }
        Format::Csv => {
            let mut out = String::from("n,re,im\n");
            for (j, c) in (2..).zip(&a) {
                let _ = writeln!(out, "{j},{},{}", c.re, c.im);
            }
            out
        }
    })
}

type Samples = (Vec<(Complex64, Complex64)>, Vec<(Complex64, Error)>);

/// Sweep `g` over the grid, separating values from failures.
fn sample_grid<G>(grid: &AnnulusGrid, g: G) -> Samples
where
    G: Fn(Complex64) -> crate::Result<Complex64> + Sync,
{
    use rayon::prelude::*;
    let results: Vec<_> = grid.points().into_par_iter().map(|z| (z, g(z))).collect();
    let mut ok = Vec::with_capacity(results.len());
    let mut bad = Vec::new();
    for (z, r) in results {
        match r {
            Ok(v) => ok.push((z, v)),
            Err(e) => bad.push((z, e)),
        }
    }
    (ok, bad)
}

fn grid_table(header: &str, rows: &[(Complex64, Complex64)], with_abs: bool, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = format!("{header}\n");
            for (z, v) in rows {
                let _ = write!(out, "{},{},{},{}", z.re, z.im, v.re, v.im);
                if with_abs {
                    let _ = write!(out, ",{}", v.norm());
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let names: Vec<&str> = header.split(',').collect();
            let v: Vec<Value> = rows
                .iter()
                .map(|(z, v)| {
                    let mut vals = vec![z.re, z.im, v.re, v.im];
                    if with_abs {
                        vals.push(v.norm());
                    }
                    Value::Object(names.iter().zip(vals).map(|(n, x)| (n.to_string(), json!(x))).collect())
                })
                .collect();
            serde_json::to_string_pretty(&v).expect("plain data serializes")
        }
    }
}

fn finish_grid(body: String, bad: &[(Complex64, Error)]) -> Result<String, (String, Failure)> {
    if bad.is_empty() {
        return Ok(body);
    }
    let mut msg = format!("{} grid points failed", bad.len());
    for (z, e) in bad.iter().take(5) {
        let _ = write!(msg, "\n  {z}: {e}");
    }
    Err((body, Failure::Numerical(msg)))
}

type GridResult = Result<Result<String, (String, Failure)>, Failure>;

fn cmd_extend(driver: &DriverArgs, annulus: &AnnulusArgs, tol: f64, format: Format) -> GridResult {
    check_tol(tol)?;
    let d = driver.build()?;
    let grid = annulus.grid()?;
    let (rows, bad) = sample_grid(&grid, |z| becker_extend(&d, z, tol));
    Ok(finish_grid(grid_table("re_z,im_z,re_F,im_F", &rows, false, format), &bad))
}

fn cmd_beltrami(driver: &DriverArgs, annulus: &AnnulusArgs, numeric: bool, tol: f64, format: Format) -> GridResult {
    check_tol(tol)?;
    let grid = annulus.grid()?;
    let (rows, bad) = if numeric {
        let d = driver.build()?;
        let f = |z| becker_extend(&d, z, tol);
        sample_grid(&grid, |z| {
            let (fz, fzb) = wirtinger(&f, z, FD_STEP)?;
            Ok(fzb / fz)
        })
    } else {
        let field = driver.beltrami_field()?;
        sample_grid(&grid, |z| field.eval(z))
    };
    Ok(finish_grid(grid_table("re_z,im_z,re_mu,im_mu,abs_mu", &rows, true, format), &bad))
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    criterion: Criterion,
    f: &str,
    k: f64,
    eps: f64,
    m: f64,
    n_r: usize,
    n_theta: usize,
    format: Format,
) -> Result<(String, bool), Failure> {
    let f = AnalyticSample::parse(f)?;
    let disk = DiskGrid { n_r, n_theta, ..DiskGrid::default() };
    let report = match criterion {
        Criterion::AwBecker => check_aw_becker(&f, k, &disk)?,
        Criterion::PreSchwarzian => check_pre_schwarzian(&f, k, &disk)?,
        Criterion::PdeExample1 | Criterion::PdeExample2 | Criterion::PdeAwBecker => {
            let spec = match criterion {
                Criterion::PdeExample1 => PdeExtensionSpec::example1(f, k, eps, m)?,
                Criterion::PdeExample2 => PdeExtensionSpec::example2(f, k, eps, m)?,
                _ => PdeExtensionSpec::aw_becker(f, k, eps, m)?,
            };
            let r = check_pde_conditions(&spec, &PdeGrids { disk, ..PdeGrids::default() })?;
            for (z, w, e) in r.skipped.iter().take(5) {
                eprintln!("skipped (z, w) = ({z}, {w}): {e}");
            }
            if !r.cond_i {
                eprintln!("condition (i) fails: |φ(0,0)| = {:e}", r.phi_at_origin);
            }
            if !r.growth_ok {
                eprintln!("growth condition fails: max |Φ|/|z| = {} > M = {}", r.growth_max, spec.m);
            }
            let w = r.cond_ii_worst.0;
            CheckReport {
                condition: spec.name.clone(),
                ok: r.passes(k),
                margin: k - r.cond_ii_max,
                worst_point: [w.re, w.im],
            }
        }
    };
    let body = match format {
        Format::Json => report.to_json(),
        Format::Csv => format!(
            "condition,ok,margin,re_worst,im_worst\n{},{},{},{},{}\n",
            report.condition, report.ok, report.margin, report.worst_point[0], report.worst_point[1]
        ),
    };
    Ok((body, report.ok))
}

fn cmd_lambda(k: f64, phi: &str, tol: f64, format: Format) -> Result<String, Failure> {
    check_tol(tol)?;
    let laurent = Expr::parse(phi)?.to_laurent()?;
    let norm = l1_norm(&laurent, tol)?;
    let lambda = hk_lambda(k, &laurent)? / norm;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "k": k,
            "phi": phi,
            "l1_norm": norm,
            "lambda": pair(lambda),
            "abs_lambda": lambda.norm(),
        }))
        .expect("plain data serializes"),
        Format::Csv => format!("k,l1_norm,re_lambda,im_lambda,abs_lambda\n{k},{norm},{},{},{}\n", lambda.re, lambda.im, lambda.norm()),
    })
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bounds { .. } => "bounds",
            Command::Coeffs { .. } => "coeffs",
            Command::Extend { .. } => "extend",
            Command::Beltrami { .. } => "beltrami",
            Command::Verify { .. } => "verify",
            Command::Lambda { .. } => "lambda",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Bounds { .. } | Command::Extend { .. } | Command::Beltrami { .. } => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Run a parsed command. On failure the output produced so far (if any) is
/// returned alongside the reason.
pub fn run(cli: &Cli) -> Result<Output, (Option<Output>, Failure)> {
    let command = cli.command.name();
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    let wrap = |body: String| Output { command, format, body };
    let simple = |r: Result<String, Failure>| r.map(wrap).map_err(|e| (None, e));
    let grid = |r: GridResult| match r {
        Ok(Ok(body)) => Ok(wrap(body)),
        Ok(Err((body, e))) => Err((Some(wrap(body)), e)),
        Err(e) => Err((None, e)),
    };
    match &cli.command {
        Command::Bounds { k_min, k_max, steps } => simple(cmd_bounds(*k_min, *k_max, *steps, format)),
        Command::Coeffs { driver, order, normalize, tol } => simple(cmd_coeffs(driver, *order, *normalize, *tol, format)),
        Command::Extend { driver, annulus, tol } => grid(cmd_extend(driver, annulus, *tol, format)),
        Command::Beltrami { driver, annulus, numeric, tol } => {
            grid(cmd_beltrami(driver, annulus, *numeric, *tol, format))
        }
        Command::Verify { criterion, f, k, eps, m, n_r, n_theta } => {
            match cmd_verify(*criterion, f, *k, *eps, *m, *n_r, *n_theta, format) {
                Ok((body, true)) => Ok(wrap(body)),
                Ok((body, false)) => Err((Some(wrap(body)), Failure::Condition("condition not satisfied".into()))),
                Err(e) => Err((None, e)),
            }
        }
        Command::Lambda { k, phi, tol } => simple(cmd_lambda(*k, phi, *tol, format)),
    }
}

fn destination(cli: &Cli, out: &Output) -> Option<PathBuf> {
    if let Some(p) = &cli.out {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty())?;
    let ext = match out.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    Some(PathBuf::from(dir).join(format!("{}.{ext}", out.command)))
}

fn emit(cli: &Cli, out: &Output) -> std::io::Result<()> {
    let mut body = out.body.clone();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match destination(cli, out) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, body)
        }
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (output, failure) = match run(&cli) {
        Ok(out) => (Some(out), None),
        Err((out, f)) => (out, Some(f)),
    };
    if let Some(out) = &output {
        if let Err(e) = emit(&cli, out) {
            eprintln!("becker-qc: cannot write output: {e}");
            return ExitCode::from(2);
        }
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("becker-qc: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("becker-qc").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn constants_parse() {
        assert_eq!(parse_constant("-0.2i").unwrap(), Complex64::new(0.0, -0.2));
        assert_eq!(parse_constant("0").unwrap(), Complex64::default());
        assert!(matches!(parse_constant("z"), Err(Failure::Input(_))));
    }

    #[test]
    fn single_row_bounds() {
        let out = run(&parse(&["bounds", "0.5", "0.5", "1"])).unwrap();
        let mut lines = out.body.lines();
        assert_eq!(lines.next(), Some("k,becker_sharp,fekete_szego,krushkal"));
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
        assert!((row[1] - 0.775_909_58).abs() < 1e-8);
        assert!(lines.next().is_none());
    }

    #[test]
    fn exit_codes() {
        let Err((None, f)) = run(&parse(&["bounds", "0.9", "0.1", "5"])) else { panic!() };
        assert_eq!(f.exit_code(), 2);
        let Err((Some(_), f)) = run(&parse(&["verify", "pre-schwarzian", "--f", "z/(1-z)^2", "--k", "0.5"])) else {
            panic!()
        };
        assert_eq!(f.exit_code(), 1);
        let Err((None, f)) = run(&parse(&["verify", "aw-becker", "--f", "z+", "--k", "0.5"])) else { panic!() };
        assert_eq!(f.exit_code(), 2);
    }

    #[test]
    fn blaschke_coeffs_need_normalization() {
        let args = ["coeffs", "--family", "blaschke", "--k", "0.5", "--zeros", "0.4", "--N", "3"];
        let Err((None, f)) = run(&parse(&args)) else { panic!() };
        assert_eq!(f.exit_code(), 3);
        assert!(f.message().contains("--normalize"));
    }
}
