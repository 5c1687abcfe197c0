//! Command-line front end: analytic curves, Monte Carlo runs and
//! analytic-vs-empirical comparisons written as CSV plus a JSON manifest.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite_n::{linspace, log_then_linear, FiniteN, GapMethod, SpectralParams};
use crate::hard_edge::{limit_gap, limit_pdf, limit_pdf_closed_form, micro_density};
use crate::montecarlo::{
    empirical_density, empirical_gap, sample_smallest, write_samples_csv, CorrelationSpec,
    DensitySource, MCConfig, MicroScaling,
};

pub const WORKERS_ENV: &str = "WISHART_EDGE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "wishart-edge", version, about = "Smallest-eigenvalue distributions of real Wishart matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Finite-N gap probability E(t); columns t,E
    Gap(CurveArgs),
    /// Finite-N smallest-eigenvalue density P(t) = -dE/dt; columns t,P
    Pdf(CurveArgs),
    /// Hard-edge gap probability; columns u,E
    LimitGap(LimitArgs),
    /// Hard-edge smallest-eigenvalue density; columns u,P (and P_closed for nu in {0,2})
    LimitPdf(LimitArgs),
    /// Microscopic spectral density; columns u,rho
    Density(DensityArgs),
    /// Monte Carlo run; survival columns t,E_empirical,stderr or with --micro u,density,stderr
    Mc(McArgs),
    /// Analytic vs Monte Carlo gap probability; columns t,E_analytic,E_empirical,stderr
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Auto,
    Pfaffian,
}

#[derive(Debug, Args, Serialize)]
struct CurveArgs {
    /// Number of rows of W
    #[arg(long = "N")]
    n: usize,
    /// Rectangularity (columns minus rows), even
    #[arg(long)]
    nu: usize,
    #[arg(long, default_value_t = 1e-4)]
    t_min: f64,
    /// Upper end of the grid; defaults to where E drops below 1e-8
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct LimitArgs {
    #[arg(long)]
    nu: usize,
    #[arg(long, default_value_t = 1e-3)]
    u_min: f64,
    #[arg(long, default_value_t = 40.0)]
    u_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct DensityArgs {
    /// Any integer nu >= 0
    #[arg(long)]
    nu: usize,
    #[arg(long, default_value_t = 1e-3)]
    u_min: f64,
    #[arg(long, default_value_t = 40.0)]
    u_max: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct McArgs {
    #[arg(long = "N")]
    n: usize,
    /// Any integer nu >= 0
    #[arg(long)]
    nu: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// identity | linspace:<lo>:<hi> | list:v1,v2,...
    #[arg(long, default_value = "identity")]
    corr: String,
    /// Worker threads; defaults to the environment variable, then the CPU count
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Histogram on the microscopic scale instead of the survival curve
    #[arg(long)]
    micro: bool,
    /// With --micro: histogram all eigenvalues below --u-max (spectral density)
    #[arg(long, requires = "micro")]
    near_edge: bool,
    /// Use u = 4Nt instead of u = 4Nt mean(1/c_i)
    #[arg(long)]
    bare_scaling: bool,
    #[arg(long, default_value_t = 20.0)]
    u_max: f64,
    #[arg(long, default_value_t = 40)]
    bins: usize,
    /// Survival grid upper end; defaults to the largest sample
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Also dump the raw smallest eigenvalues to this CSV
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct CompareArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    nu: usize,
    #[arg(long, default_value_t = 40_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "identity")]
    corr: String,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Grid upper end; defaults to where E drops below 1e-8
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Provenance written next to every output as `<out>.manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

/// Path of the manifest accompanying `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest(out: &Path, command: &Command, seed: Option<u64>) -> Result<()> {
    let value = serde_json::to_value(command)?;
    let (name, params) = match value {
        serde_json::Value::Object(map) if map.len() == 1 => {
            let (k, v) = map.into_iter().next().expect("one entry");
            (k, v)
        }
        other => ("unknown".to_string(), other),
    };
    let manifest = RunManifest {
        command: name,
        params,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let mut file = File::create(manifest_path(out))?;
    serde_json::to_writer_pretty(&mut file, &manifest)?;
    writeln!(file)?;
    Ok(())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_table(out: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record(header)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        writer.write_record(columns.iter().map(|c| fmt(c[i])))?;
    }
    writer.flush()?;
    Ok(())
}

fn workers(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
}

fn grid(start: f64, end: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > start) || points == 0 {
        return Err(Error::Domain(format!(
            "need 0 < min < max and points >= 1, got [{start}, {end}] with {points} points"
        )));
    }
    Ok(log_then_linear(start, end, points))
}

fn finite_model(n: usize, nu: usize, method: MethodArg) -> Result<FiniteN> {
    let method = match method {
        MethodArg::Auto => GapMethod::Auto,
        MethodArg::Pfaffian => GapMethod::Pfaffian,
    };
    FiniteN::with_method(SpectralParams::new(n, nu)?, method)
}

fn curve_grid(model: &FiniteN, args: &CurveArgs) -> Result<Vec<f64>> {
    let end = match args.t_max {
        Some(t) => t,
        None => model.tail_point(1e-8)?,
    };
    grid(args.t_min, end, args.points)
}

fn mc_config(n: usize, nu: usize, samples: usize, seed: u64, corr: &str, w: Option<usize>) -> Result<MCConfig> {
    let params = SpectralParams::new(n, nu)?;
    Ok(MCConfig {
        workers: workers(w),
        correlation: CorrelationSpec::parse(corr, n)?,
        ..MCConfig::new(params, samples, seed)
    })
}

fn execute(command: &Command) -> Result<Option<u64>> {
    match command {
        Command::Gap(a) => {
            let model = finite_model(a.n, a.nu, a.method)?;
            let g = curve_grid(&model, a)?;
            let c = model.gap_curve(&g)?;
            write_table(&a.out, &["t", "E"], &[&c.abscissae, &c.values])?;
            Ok(None)
        }
        Command::Pdf(a) => {
            let model = finite_model(a.n, a.nu, a.method)?;
            let g = curve_grid(&model, a)?;
            let c = model.pdf_curve(&g)?;
            write_table(&a.out, &["t", "P"], &[&c.abscissae, &c.values])?;
            Ok(None)
        }
        Command::LimitGap(a) => {
            let g = grid(a.u_min, a.u_max, a.points)?;
            let e = parallel(&g, |u| limit_gap(a.nu, u))?;
            write_table(&a.out, &["u", "E"], &[&g, &e])?;
            Ok(None)
        }
        Command::LimitPdf(a) => {
            let g = grid(a.u_min, a.u_max, a.points)?;
            let p = parallel(&g, |u| limit_pdf(a.nu, u))?;
            if a.nu <= 2 {
                let closed = parallel(&g, |u| limit_pdf_closed_form(a.nu, u))?;
                write_table(&a.out, &["u", "P", "P_closed"], &[&g, &p, &closed])?;
            } else {
                write_table(&a.out, &["u", "P"], &[&g, &p])?;
            }
            Ok(None)
        }
        Command::Density(a) => {
            let g = grid(a.u_min, a.u_max, a.points)?;
            let rho = parallel(&g, |u| micro_density(a.nu, u))?;
            write_table(&a.out, &["u", "rho"], &[&g, &rho])?;
            Ok(None)
        }
        Command::Mc(a) => {
            let mut cfg = mc_config(a.n, a.nu, a.samples, a.seed, &a.corr, a.workers)?;
            if a.near_edge {
                cfg.near_edge_cutoff = Some(a.u_max);
            }
            let spec = sample_smallest(&cfg)?;
            if let Some(path) = &a.dump {
                write_samples_csv(&spec, path)?;
            }
            if a.micro {
                let scaling = if a.bare_scaling { MicroScaling::Bare } else { MicroScaling::Harmonic };
                let source = if a.near_edge { DensitySource::NearEdge } else { DensitySource::Smallest };
                let edges = linspace(0.0, a.u_max, a.bins.max(1) + 1);
                let (curve, hist) = empirical_density(&spec, &edges, source, scaling)?;
                if hist.empty_bins() > 0 {
                    eprintln!("warning: {} of {} bins are empty", hist.empty_bins(), hist.counts.len());
                }
                let stderr = curve.stderr.clone().unwrap_or_default();
                write_table(&a.out, &["u", "density", "stderr"], &[&curve.abscissae, &curve.values, &stderr])?;
            } else {
                let top = a
                    .t_max
                    .unwrap_or_else(|| spec.smallest.iter().copied().fold(0.0, f64::max));
                let g = linspace(0.0, top, a.points.max(2));
                let curve = empirical_gap(&spec, &g)?;
                let stderr = curve.stderr.clone().unwrap_or_default();
                write_table(&a.out, &["t", "E_empirical", "stderr"], &[&g, &curve.values, &stderr])?;
            }
            Ok(Some(a.seed))
        }
        Command::Compare(a) => {
            let model = FiniteN::new(SpectralParams::new(a.n, a.nu)?)?;
            let cfg = mc_config(a.n, a.nu, a.samples, a.seed, &a.corr, a.workers)?;
            let top = match a.t_max {
                Some(t) => t,
                None => model.tail_point(1e-8)?,
            };
            let g = linspace(0.0, top, a.points.max(2));
            let analytic = model.gap_curve(&g)?;
            let spec = sample_smallest(&cfg)?;
            let empirical = empirical_gap(&spec, &g)?;
            let stderr = empirical.stderr.clone().unwrap_or_default();
            let sup = sup_distance(&analytic.values, &empirical.values);
            write_table(
                &a.out,
                &["t", "E_analytic", "E_empirical", "stderr"],
                &[&g, &analytic.values, &empirical.values, &stderr],
            )?;
            println!("sup-norm distance: {}", fmt(sup));
            Ok(Some(a.seed))
        }
    }
}

/// `max_i |a_i - b_i|`.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn parallel<F: Fn(f64) -> Result<f64> + Sync>(grid: &[f64], f: F) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    grid.par_iter().map(|&x| f(x)).collect()
}

fn out_path(command: &Command) -> &Path {
    match command {
        Command::Gap(a) | Command::Pdf(a) => &a.out,
        Command::LimitGap(a) | Command::LimitPdf(a) => &a.out,
        Command::Density(a) => &a.out,
        Command::Mc(a) => &a.out,
        Command::Compare(a) => &a.out,
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code: 0 success, 2 parameter errors, 3 numerical or I/O
/// failures.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli.command)
        .and_then(|seed| write_manifest(out_path(&cli.command), &cli.command, seed));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_parameter_error() {
                2
            } else {
                3
            }
        }
    }
}
