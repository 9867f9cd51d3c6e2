//! Command-line front end. Every command prints machine-readable records;
//! failures go to stderr as a single JSON object.
//!
//! Exit codes: 0 success, 1 verification failed, 2 domain or pole error,
//! 3 I/O error, 4 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::Error;
use crate::legendre::{p_general, q_asymptotic, q_general, q_via_whipple, rho_from_cosh, EvalPoint};
use crate::norms::{norm_quadrature, norm_regularized_k0, norm_residue_series, DEFAULT_TOLERANCE};
use crate::polescan::{
    confirm_poles, ep_table, predict_poles, scan_grid, KParam, Window, DEFAULT_COSH_RHO,
};
use crate::records::{self, Field, Record};
use crate::verify::{check_names, run_suite, summary_table, CHECKS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Default output directory for `polescan` and `verify --out`.
pub const OUT_DIR_ENV: &str = "LEGENDRE_EP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "legendre-ep", version, about = "Associated Legendre functions of complex degree and their exceptional points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate P, Q, Q through the Whipple relation, or the large-argument form of Q.
    Eval(EvalArgs),
    /// Sample log10|Q| on a grid in the nu plane and list the poles inside it.
    Polescan(PolescanArgs),
    /// Classify the pole structure for a range of K.
    Eptable(EptableArgs),
    /// Normalization integral over the conical line.
    Norm(NormArgs),
    /// Run the identity checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalKind {
    #[value(name = "P")]
    P,
    #[value(name = "Q")]
    Q,
    #[value(name = "Q_whipple")]
    QWhipple,
    #[value(name = "Q_asymptotic")]
    QAsymptotic,
}

impl EvalKind {
    fn as_str(self) -> &'static str {
        match self {
            EvalKind::P => "P",
            EvalKind::Q => "Q",
            EvalKind::QWhipple => "Q_whipple",
            EvalKind::QAsymptotic => "Q_asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Quadrature,
    Series,
    Regularized,
}

#[derive(Debug, Args)]
struct RhoArgs {
    /// Radial coordinate rho > 0.
    #[arg(long, conflicts_with = "cosh_rho", allow_negative_numbers = true)]
    rho: Option<f64>,
    /// cosh rho > 1 (default 2).
    #[arg(long = "cosh-rho", allow_negative_numbers = true)]
    cosh_rho: Option<f64>,
}

impl RhoArgs {
    fn resolve(&self) -> Result<f64, Error> {
        match (self.rho, self.cosh_rho) {
            (Some(r), _) => {
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::Domain(format!("rho = {r} must be > 0")));
                }
                Ok(r)
            }
            (None, Some(c)) => rho_from_cosh(c),
            (None, None) => rho_from_cosh(DEFAULT_COSH_RHO),
        }
    }
}

#[derive(Debug, Args)]
struct WindowArgs {
    #[arg(long = "re-min", default_value_t = -6.0, allow_negative_numbers = true)]
    re_min: f64,
    #[arg(long = "re-max", default_value_t = 1.0, allow_negative_numbers = true)]
    re_max: f64,
    #[arg(long = "im-min", default_value_t = -1.0, allow_negative_numbers = true)]
    im_min: f64,
    #[arg(long = "im-max", default_value_t = 1.0, allow_negative_numbers = true)]
    im_max: f64,
}

impl WindowArgs {
    fn resolve(&self) -> Result<Window, Error> {
        Window::new(self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    kind: EvalKind,
    /// Order mu (real part).
    #[arg(long, conflicts_with = "k", allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long = "mu-im", default_value_t = 0.0, allow_negative_numbers = true)]
    mu_im: f64,
    /// Order through mu = -1/2 - K.
    #[arg(long = "K", visible_alias = "k", id = "k", allow_negative_numbers = true)]
    k: Option<f64>,
    /// Degree nu (real part).
    #[arg(long, conflicts_with = "tau", allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long = "nu-im", default_value_t = 0.0, allow_negative_numbers = true)]
    nu_im: f64,
    /// Degree through nu = -1/2 + i tau.
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[command(flatten)]
    rho: RhoArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct PolescanArgs {
    #[arg(long = "K", visible_alias = "k", id = "k", allow_negative_numbers = true)]
    k: f64,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value_t = 141)]
    nx: usize,
    #[arg(long, default_value_t = 41)]
    ny: usize,
    #[command(flatten)]
    rho: RhoArgs,
    /// Output directory (default: $LEGENDRE_EP_OUT_DIR, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the predicted residues by contour-integral ones.
    #[arg(long)]
    confirm: bool,
}

#[derive(Debug, Args)]
struct EptableArgs {
    #[arg(long = "k-min", default_value_t = -2.0, allow_negative_numbers = true)]
    k_min: f64,
    #[arg(long = "k-max", default_value_t = 2.0, allow_negative_numbers = true)]
    k_max: f64,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, value_enum, default_value_t = TableFormat::Json)]
    format: TableFormat,
}

#[derive(Debug, Args)]
struct NormArgs {
    #[arg(long = "K", visible_alias = "k", id = "k", default_value_t = 0.0, allow_negative_numbers = true)]
    k: f64,
    #[command(flatten)]
    rho: RhoArgs,
    /// May be repeated; one record per method.
    #[arg(long, value_enum, default_values_t = [Method::Quadrature])]
    method: Vec<Method>,
    /// Absolute tolerance for quadrature, relative for the series.
    #[arg(long)]
    tol: Option<f64>,
    /// Regulator for the K = 0 integral.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Allow the residue series outside -1/2 < K < 0.
    #[arg(long)]
    extended: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Run only checks whose name contains this string.
    #[arg(long)]
    filter: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write verify_report.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report array instead of the table.
    #[arg(long)]
    json: bool,
    /// List the checks and exit.
    #[arg(long)]
    list: bool,
}

enum Failure {
    Numeric(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Numeric(_) => EXIT_DOMAIN,
            Failure::Io(..) => EXIT_IO,
            Failure::Usage(_) => EXIT_USAGE,
        }
    }

    fn record(&self) -> Record {
        match self {
            Failure::Numeric(e) => {
                let kind = match e {
                    Error::Pole { .. } => "pole",
                    Error::NonConvergence { .. } => "nonconvergence",
                    Error::Domain(_) => "domain",
                    Error::Divergent(_) => "divergent",
                    Error::Tolerance { .. } => "tolerance",
                };
                let mut r = Record::new().with("error", kind).with("message", e.to_string());
                if let Error::Pole { variable, location } = e {
                    r = r.with("variable", *variable).with("location_re", location.re).with("location_im", location.im);
                }
                r
            }
            Failure::Io(path, e) => Record::new()
                .with("error", "io")
                .with("message", e.to_string())
                .with("path", path.display().to_string()),
            Failure::Usage(msg) => Record::new().with("error", "usage").with("message", msg.as_str()),
        }
    }
}

type CmdResult = Result<i32, Failure>;

fn finite(name: &str, v: f64) -> Result<f64, Error> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("--{name} = {v} must be finite")))
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e))
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let rho = a.rho.resolve()?;
    let mu = match (a.mu, a.k) {
        (Some(m), _) => Complex64::new(finite("mu", m)?, finite("mu-im", a.mu_im)?),
        (None, Some(k)) => Complex64::new(-0.5 - finite("K", k)?, 0.0),
        (None, None) => return Err(Failure::Usage("one of --mu or --K is required".into())),
    };
    let nu = match (a.nu, a.tau) {
        (Some(n), _) => Complex64::new(finite("nu", n)?, finite("nu-im", a.nu_im)?),
        (None, Some(t)) => Complex64::new(-0.5, finite("tau", t)?),
        (None, None) => return Err(Failure::Usage("one of --nu or --tau is required".into())),
    };
    let pt = EvalPoint::new(mu, nu, rho)?;
    let k_of = || -> Result<f64, Error> {
        if mu.im != 0.0 {
            return Err(Error::Domain(format!("{} needs a real order, got mu = {mu}", a.kind.as_str())));
        }
        Ok(-0.5 - mu.re)
    };
    let value = match a.kind {
        EvalKind::P => p_general(&pt)?,
        EvalKind::Q => q_general(&pt)?,
        EvalKind::QWhipple => q_via_whipple(k_of()?, nu, rho)?,
        EvalKind::QAsymptotic => q_asymptotic(k_of()?, nu, rho)?,
    };
    let record = Record::new()
        .with("kind", a.kind.as_str())
        .with("mu_re", mu.re)
        .with("mu_im", mu.im)
        .with("nu_re", nu.re)
        .with("nu_im", nu.im)
        .with("rho", rho)
        .with("cosh_rho", pt.cosh_rho)
        .with("re", value.re)
        .with("im", value.im);
    let text = match a.format {
        Format::Json => record.to_json() + "\n",
        Format::Csv => {
            let header = record.keys().join(",");
            let row: Vec<String> = record
                .0
                .iter()
                .map(|(_, f)| match f {
                    Field::Num(v) => records::fmt_float(*v),
                    Field::Str(s) => s.clone(),
                    _ => String::new(),
                })
                .collect();
            format!("{header}\n{}\n", row.join(","))
        }
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn file_stem(k: f64) -> String {
    format!("polescan_K{k}")
}

fn cmd_polescan(a: &PolescanArgs, out: &mut dyn Write) -> CmdResult {
    let k = finite("K", a.k)?;
    let rho = a.rho.resolve()?;
    let window = a.window.resolve()?;
    if a.nx < 2 || a.ny < 2 {
        return Err(Error::Domain(format!("grid {}x{} needs at least 2 points per axis", a.nx, a.ny)).into());
    }
    let kp = KParam::detect(k);
    let poles = if a.confirm { confirm_poles(kp, &window, rho)? } else { predict_poles(kp, &window, rho)? };
    let grid = scan_grid(k, &window, a.nx, a.ny, rho)?;
    let dir = out_dir(&a.out);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(dir.clone(), e))?;
    let stem = file_stem(k);
    let csv = dir.join(format!("{stem}.csv"));
    let jsonl = dir.join(format!("{stem}.jsonl"));
    let meta = dir.join(format!("{stem}.meta.json"));
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    write_file(&csv, &records::grid_csv(&grid))?;
    let pole_records: Vec<Record> = poles.iter().map(records::pole_record).collect();
    write_file(&jsonl, &records::to_jsonl(&pole_records))?;
    write_file(&meta, &(records::grid_metadata(&grid, timestamp).to_json() + "\n"))?;
    let summary = Record::new()
        .with("k", k)
        .with("rho", rho)
        .with("pole_count", poles.len())
        .with("failed_cells", grid.failed_cells())
        .with("grid", csv.display().to_string())
        .with("poles", jsonl.display().to_string())
        .with("meta", meta.display().to_string());
    emit(out, &(summary.to_json() + "\n"))?;
    Ok(EXIT_OK)
}

fn cmd_eptable(a: &EptableArgs, out: &mut dyn Write) -> CmdResult {
    let window = a.window.resolve()?;
    let rows = ep_table(finite("k-min", a.k_min)?, finite("k-max", a.k_max)?, finite("step", a.step)?, &window)?;
    let text = match a.format {
        TableFormat::Json => records::to_json_array(&rows.iter().map(records::ep_record).collect::<Vec<_>>()),
        TableFormat::Table => {
            let mut s = format!("{:>8} {:<9} {:>6} {:>6}\n", "K", "kind", "window", "total");
            for r in &rows {
                let total = r.total_poles.map_or("inf".to_string(), |n| n.to_string());
                s.push_str(&format!("{:>8} {:<9} {:>6} {:>6}\n", r.k, r.kind.as_str(), r.pole_count_in_window, total));
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_norm(a: &NormArgs, out: &mut dyn Write) -> CmdResult {
    let k = finite("K", a.k)?;
    let rho = a.rho.resolve()?;
    if let Some(t) = a.tol {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("--tol = {t} must be > 0")).into());
        }
    }
    let mut lines = String::new();
    for m in &a.method {
        let record = match m {
            Method::Quadrature => {
                let r = norm_quadrature(k, rho, a.tol.unwrap_or(DEFAULT_TOLERANCE))?;
                records::quadrature_record(k, rho, &r)
            }
            Method::Series => {
                let r = norm_residue_series(k, rho, a.tol.unwrap_or(1e-8), a.extended)?;
                records::series_record(k, rho, &r)
            }
            Method::Regularized => {
                let r = norm_regularized_k0(rho, finite("epsilon", a.epsilon)?)?;
                records::regularized_record(rho, &r).with("epsilon", r.epsilon).with("analytic", r.analytic)
            }
        };
        lines.push_str(&(record.to_json() + "\n"));
    }
    emit(out, &lines)?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    if a.list {
        let mut s = String::new();
        for c in &CHECKS {
            s.push_str(&format!("{:<20} tol {:.0e}, {} samples: {}\n", c.name, c.tolerance, c.sample_count, c.sampler));
        }
        emit(out, &s)?;
        return Ok(EXIT_OK);
    }
    if let Some(f) = &a.filter {
        if !check_names().iter().any(|n| n.contains(f.as_str())) {
            return Err(Failure::Usage(format!("no check matches '{f}'; available: {}", check_names().join(", "))));
        }
    }
    let reports = run_suite(a.filter.as_deref(), a.seed)?;
    let json = records::to_json_array(&reports.iter().map(|r| r.to_record()).collect::<Vec<_>>());
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.clone(), e))?;
        write_file(&dir.join("verify_report.json"), &json)?;
    }
    emit(out, &if a.json { json } else { summary_table(&reports) })?;
    Ok(if reports.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Polescan(a) => cmd_polescan(a, out),
        Command::Eptable(a) => cmd_eptable(a, out),
        Command::Norm(a) => cmd_norm(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", f.record().to_json());
            f.code()
        }
    }
}
