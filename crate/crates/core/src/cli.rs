//! Command-line front end: configuration parsing, scan execution and CSV
//! output.
//!
//! Flags override values from a `--config` file. The file holds one
//! `key = value` per line, `#` starts a comment, and keys are the flag names
//! without the leading dashes (`l-margin` and `l_margin` are equivalent).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use crate::correlator::{scan, CorrelationCurve, MonteCarloCheck, Policies, QuadraturePolicy};
use crate::kernel::TruncationPolicy;
use crate::sources::{RadialSource, SourceKind};
use crate::wavefunction::AnyonParameter;

const DEFAULT_ALPHAS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    /// `--help` / `--version` output; not a failure.
    #[error("{0}")]
    Info(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) | CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

/// Two-particle correlation scans for 2D anyons.
#[derive(Parser, Debug, Default, Clone)]
#[command(name = "anyon-hbt", version, about)]
struct Args {
    /// Comma-separated anyon parameters in [0, 1]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<f64>>,
    /// gaussian | step | tabulated
    #[arg(long)]
    source: Option<String>,
    /// Profile file for the tabulated source
    #[arg(long)]
    table: Option<PathBuf>,
    /// Source width
    #[arg(long, allow_hyphen_values = true)]
    r0: Option<f64>,
    /// Lowest q·r0 of the grid
    #[arg(long, allow_hyphen_values = true)]
    qmin: Option<f64>,
    /// Highest q·r0 of the grid
    #[arg(long, allow_hyphen_values = true)]
    qmax: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    npoints: Option<usize>,
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Monte Carlo samples per point for the cross-check columns
    #[arg(long)]
    mc: Option<usize>,
    /// Monte Carlo seed
    #[arg(long)]
    seed: Option<u64>,
    /// Partial waves kept beyond |l| ≈ qr
    #[arg(long = "l-margin")]
    l_margin: Option<usize>,
    /// Size below which the outermost partial wave counts as converged
    #[arg(long = "term-tol")]
    term_tol: Option<f64>,
    /// Gaussian integration range in units of r0
    #[arg(long = "rmax-mult")]
    rmax_mult: Option<f64>,
    /// Absolute tolerance of the radial quadrature
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
}

impl Args {
    /// Fills every field not set here from `other`.
    fn or(self, other: Args) -> Args {
        Args {
            alphas: self.alphas.or(other.alphas),
            source: self.source.or(other.source),
            table: self.table.or(other.table),
            r0: self.r0.or(other.r0),
            qmin: self.qmin.or(other.qmin),
            qmax: self.qmax.or(other.qmax),
            npoints: self.npoints.or(other.npoints),
            out: self.out.or(other.out),
            config: self.config,
            mc: self.mc.or(other.mc),
            seed: self.seed.or(other.seed),
            l_margin: self.l_margin.or(other.l_margin),
            term_tol: self.term_tol.or(other.term_tol),
            rmax_mult: self.rmax_mult.or(other.rmax_mult),
            quad_tol: self.quad_tol.or(other.quad_tol),
        }
    }
}

/// A validated scan request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alphas: Vec<AnyonParameter>,
    pub source: RadialSource,
    pub table_path: Option<PathBuf>,
    pub q_r0_min: f64,
    pub q_r0_max: f64,
    pub n_points: usize,
    pub policies: Policies,
    pub mc_check: Option<MonteCarloCheck>,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    /// Evenly spaced `q·r0` values from `q_r0_min` to `q_r0_max` inclusive.
    pub fn q_grid(&self) -> Vec<f64> {
        let span = self.q_r0_max - self.q_r0_min;
        let last = self.n_points - 1;
        (0..self.n_points)
            .map(|i| {
                if i == last {
                    self.q_r0_max
                } else {
                    self.q_r0_min + span * i as f64 / last as f64
                }
            })
            .collect()
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value '{value}' for key '{key}'")))
}

fn parse_config_text(text: &str) -> Result<Args, CliError> {
    let mut args = Args::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected 'key = value', got '{line}'",
                n + 1
            )));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "alphas" => {
                args.alphas = Some(
                    value
                        .split(',')
                        .map(|v| parse_value(&key, v))
                        .collect::<Result<_, _>>()?,
                )
            }
            "source" => args.source = Some(value.to_string()),
            "table" => args.table = Some(PathBuf::from(value)),
            "r0" => args.r0 = Some(parse_value(&key, value)?),
            "qmin" => args.qmin = Some(parse_value(&key, value)?),
            "qmax" => args.qmax = Some(parse_value(&key, value)?),
            "npoints" => args.npoints = Some(parse_value(&key, value)?),
            "out" => args.out = Some(PathBuf::from(value)),
            "mc" => args.mc = Some(parse_value(&key, value)?),
            "seed" => args.seed = Some(parse_value(&key, value)?),
            "l-margin" => args.l_margin = Some(parse_value(&key, value)?),
            "term-tol" => args.term_tol = Some(parse_value(&key, value)?),
            "rmax-mult" => args.rmax_mult = Some(parse_value(&key, value)?),
            "quad-tol" => args.quad_tol = Some(parse_value(&key, value)?),
            _ => {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key '{key}'",
                    n + 1
                )))
            }
        }
    }
    Ok(args)
}

/// Builds a [`RunConfig`] from command-line arguments (including the program
/// name) and the optional `--config` file they name.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.to_string())
        }
        _ => CliError::Usage(e.to_string()),
    })?;
    let merged = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            args.clone().or(parse_config_text(&text)?)
        }
        None => args,
    };
    validate(merged)
}

fn validate(args: Args) -> Result<RunConfig, CliError> {
    let invalid = |msg: String| CliError::Validation(msg);

    let alphas = args
        .alphas
        .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec())
        .into_iter()
        .map(|a| AnyonParameter::new(a).map_err(|_| invalid(format!("alpha out of [0,1]: {a}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if alphas.is_empty() {
        return Err(invalid("alphas must not be empty".into()));
    }

    let n_points = args.npoints.unwrap_or(200);
    let q_r0_min = args.qmin.unwrap_or(0.0);
    let q_r0_max = args.qmax.unwrap_or(2.5);
    if n_points < 2 {
        return Err(invalid(format!(
            "npoints must be at least 2, got {n_points}"
        )));
    }
    if !(q_r0_min >= 0.0 && q_r0_min.is_finite()) {
        return Err(invalid(format!(
            "qmin must be non-negative, got {q_r0_min}"
        )));
    }
    if !(q_r0_max > q_r0_min && q_r0_max.is_finite()) {
        return Err(invalid(format!(
            "qmax ({q_r0_max}) must exceed qmin ({q_r0_min})"
        )));
    }

    let r0 = args.r0.unwrap_or(1.0);
    let kind: SourceKind = args
        .source
        .as_deref()
        .unwrap_or("gaussian")
        .parse()
        .map_err(|e: crate::Error| invalid(e.to_string()))?;
    let source = match (kind, &args.table) {
        (SourceKind::Tabulated, Some(path)) => RadialSource::from_table_file(path, r0),
        (SourceKind::Tabulated, None) => {
            return Err(invalid("the tabulated source needs --table <path>".into()))
        }
        (_, Some(_)) => return Err(invalid("--table only applies to --source tabulated".into())),
        (SourceKind::Gaussian, None) => RadialSource::gaussian(r0),
        (SourceKind::Step, None) => RadialSource::step(r0),
    }
    .map_err(|e| invalid(e.to_string()))?;

    let base = Policies::default();
    let trunc = TruncationPolicy::new(
        args.l_margin.unwrap_or(base.truncation.l_margin()),
        args.term_tol.unwrap_or(base.truncation.term_tolerance()),
        base.truncation.l_hard_cap(),
    )
    .map_err(|e| invalid(e.to_string()))?;
    let q = base.quadrature;
    let quadrature = QuadraturePolicy::new(
        args.rmax_mult.unwrap_or(q.r_max_multiplier()),
        args.quad_tol.unwrap_or(q.abs_tol()),
        q.rel_tol(),
        q.max_subdivisions(),
        q.panels_per_oscillation(),
    )
    .map_err(|e| invalid(e.to_string()))?;

    let mc_check = match args.mc {
        Some(n) if n < 1000 => {
            return Err(invalid(format!("mc needs at least 1000 samples, got {n}")))
        }
        Some(n_samples) => Some(MonteCarloCheck {
            n_samples,
            seed: args.seed.unwrap_or(DEFAULT_SEED),
        }),
        None => None,
    };

    Ok(RunConfig {
        alphas,
        source,
        table_path: args.table,
        q_r0_min,
        q_r0_max,
        n_points,
        policies: Policies {
            quadrature,
            truncation: trunc,
            bessel: base.bessel,
        },
        mc_check,
        output_path: args.out,
    })
}

fn number(v: f64) -> String {
    format!("{v:.11e}")
}

fn alpha_label(alpha: AnyonParameter) -> String {
    format!("alpha_{}", alpha.value())
}

/// Wide-format CSV: one row per grid point, one column per α, plus paired
/// Monte Carlo columns when present.
pub fn render_csv(curves: &[CorrelationCurve]) -> String {
    let mut out = String::new();
    let Some(first) = curves.first() else {
        return out;
    };
    let with_mc = first.points.first().is_some_and(|p| p.mc.is_some());
    let _ = writeln!(
        out,
        "# anyon-hbt scan: source={} r0={}",
        first.source.kind, first.source.r0
    );
    let mut header = vec!["q_r0".to_string()];
    header.extend(curves.iter().map(|c| alpha_label(c.alpha)));
    if with_mc {
        for c in curves {
            let label = alpha_label(c.alpha);
            header.push(format!("{label}_mc"));
            header.push(format!("{label}_mcerr"));
        }
    }
    let _ = writeln!(out, "{}", header.join(","));
    for (i, p) in first.points.iter().enumerate() {
        let mut row = vec![number(p.q_r0)];
        row.extend(curves.iter().map(|c| number(c.points[i].c2)));
        if with_mc {
            for c in curves {
                let mc = c.points[i].mc.expect("every point carries an MC estimate");
                row.push(number(mc.estimate));
                row.push(number(mc.std_error));
            }
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Parsed form of a scan CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub comment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScanTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<ScanTable, CliError> {
    let bad = |msg: String| CliError::Validation(format!("malformed scan CSV: {msg}"));
    let mut lines = text.lines();
    let comment = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| bad("missing '# anyon-hbt scan' header".into()))?
        .to_string();
    let columns: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("missing column names".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .enumerate()
        .map(|(n, line)| {
            let row = line
                .split(',')
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| bad(format!("row {}: '{v}'", n + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != columns.len() {
                return Err(bad(format!("row {} has {} fields", n + 1, row.len())));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScanTable {
        comment,
        columns,
        rows,
    })
}

/// What a completed run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub curves: Vec<CorrelationCurve>,
    pub csv: String,
    pub summary: String,
}

/// Executes the scan, writes the CSV to `output_path` (if any) and returns
/// the curves with a human-readable summary.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let grid = cfg.q_grid();
    let curves = scan(&cfg.alphas, &cfg.source, &grid, &cfg.policies, cfg.mc_check)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let csv = render_csv(&curves);
    if let Some(path) = &cfg.output_path {
        write_file(path, &csv)?;
    }
    let elapsed = started.elapsed().as_secs_f64();

    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "anyon-hbt: source={} r0={} grid={} points in q·r0 ∈ [{}, {}]",
        cfg.source.kind(),
        cfg.source.r0(),
        cfg.n_points,
        cfg.q_r0_min,
        cfg.q_r0_max
    );
    let _ = writeln!(
        summary,
        "{:>8}  {:>14}  {:>9}",
        "alpha", "max_quad_err", "max_terms"
    );
    for c in &curves {
        let _ = writeln!(
            summary,
            "{:>8}  {:>14.3e}  {:>9}",
            c.alpha.value(),
            c.max_err_est(),
            c.max_terms_used()
        );
    }
    let _ = writeln!(summary, "wall time: {elapsed:.3} s");
    Ok(RunReport {
        curves,
        csv,
        summary,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let outcome = parse_config(argv).and_then(|cfg| {
        let report = run(&cfg)?;
        if cfg.output_path.is_none() {
            print!("{}", report.csv);
        }
        eprint!("{}", report.summary);
        Ok(())
    });
    match outcome {
        Ok(()) => 0,
        Err(CliError::Info(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("anyon-hbt: {e}");
            e.exit_code()
        }
    }
}
