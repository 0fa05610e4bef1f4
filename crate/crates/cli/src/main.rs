//! `foliate`: leaf families of bounded minimal graphs over exterior domains.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exterior_foliation::catenoid::sigma;
use exterior_foliation::continuation::{maximal_outer_value, solve_family, FamilySummary, FoliationFamily};
use exterior_foliation::geometry::geometry_radii;
use exterior_foliation::solver::{interior_gradient_max, outer_gradient_max, SolveStats};
use exterior_foliation::verify::{calibrate, verify_family, verify_summary, Calibration, VerificationReport};
use exterior_foliation::SCHEMA_VERSION;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::Outputs;

const CSV_HELP: &str = "\
CSV files hold one row per grid node of the largest truncated domain.
  radial1d grids:        r,u,grad
  axisymmetric2d grids:  rho,z,u,grad
r is the distance from the domain center; rho the distance from the axis and z
the axial coordinate relative to the center of the truncation sphere; u the
nodal value; grad the centred-difference gradient norm.";

#[derive(Parser, Debug)]
#[command(name = "foliate", version, about = "Leaf families of bounded minimal graphs over exterior domains", after_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print sigma_n by quadrature and by the Beta-function closed form.
    Sigma {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Solve one leaf on one truncated domain: leaf.csv and solve.json.
    #[command(after_help = CSV_HELP)]
    Solve(RunArgs),
    /// Solve a leaf family: family.json and leaves/leaf_NNN.csv.
    #[command(after_help = CSV_HELP)]
    Family(RunArgs),
    /// Verify a family from a configuration or a family.json; writes report.json.
    /// Exit status 0: all checks pass, 2: a check failed, 1: error.
    Verify(VerifyArgs),
    /// Print a family.json or report.json as a table.
    Report { file: PathBuf },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// TOML run configuration with a `[slopes]` grid.
    #[arg(required_unless_present = "family", conflicts_with = "family")]
    config: Option<PathBuf>,
    /// Verify a previously written family.json instead.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Output directory; defaults to `[output] dir` or the family file's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solve(#[from] exterior_foliation::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a family summary or verification report: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("cannot write outputs: {0}")]
    Write(#[from] std::io::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Sigma { n } => cmd_sigma(n),
        Command::Solve(args) => cmd_solve(&args),
        Command::Family(args) => cmd_family(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Report { file } => cmd_report(&file),
    }
}

fn load(args: &RunArgs) -> Result<(RunConfig, PathBuf), CliError> {
    let cfg = RunConfig::load(&args.config)?;
    init_threads(cfg.threads);
    let dir = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, dir))
}

fn init_threads(threads: usize) {
    // Fails only if a pool already exists, which leaves the same behaviour.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable output");
    v.push(b'\n');
    v
}

fn cmd_sigma(n: usize) -> Result<ExitCode, CliError> {
    let s = sigma(n)?;
    println!("n = {n}");
    println!("quadrature  = {:.16}", s.quadrature);
    println!("closed form = {:.16}", s.closed_form);
    println!("difference  = {:e}", (s.quadrature - s.closed_form).abs());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SolveRecord {
    schema_version: u32,
    s: f64,
    gamma: f64,
    r_out: f64,
    t: f64,
    slope: f64,
    flux: f64,
    interior_gradient: f64,
    outer_gradient: f64,
    evaluations: usize,
    newton: Option<SolveStats>,
}

fn cmd_solve(args: &RunArgs) -> Result<ExitCode, CliError> {
    let (cfg, dir) = load(args)?;
    let (s, r_out) = cfg.solve_slope()?.ok_or_else(|| CliError::Usage("configuration has no [solve] section".into()))?;
    let domain = cfg.domain()?;
    let v = maximal_outer_value(&domain, r_out, s, &cfg.continuation)?;
    let record = SolveRecord {
        schema_version: SCHEMA_VERSION,
        s,
        gamma: s.atan().to_degrees(),
        r_out,
        t: v.t,
        slope: v.slope,
        flux: v.flux,
        interior_gradient: interior_gradient_max(&v.field)?,
        outer_gradient: outer_gradient_max(&v.field)?,
        evaluations: v.evaluations,
        newton: v.field.stats(),
    };
    let mut csv = Vec::new();
    v.field.write_csv(&mut csv)?;
    let mut out = Outputs::new();
    out.add("leaf.csv", csv);
    out.add("solve.json", json(&record));
    out.add("config.toml", cfg.to_toml().into_bytes());
    out.commit(&dir)?;
    println!("s = {s}  t = {:.12}  boundary slope = {:.6}  evaluations = {}", v.t, v.slope, v.evaluations);
    Ok(ExitCode::SUCCESS)
}

fn family_from(cfg: &RunConfig) -> Result<FoliationFamily, CliError> {
    let s = cfg.slope_grid()?.ok_or_else(|| CliError::Usage("configuration has no [slopes] grid".into()))?;
    Ok(solve_family(&cfg.domain()?, &s, &cfg.continuation)?)
}

fn family_outputs(family: &FoliationFamily, out: &mut Outputs) -> Result<(), CliError> {
    out.add("family.json", json(&family.summary()));
    for (i, leaf) in family.leaves().iter().enumerate() {
        let mut csv = Vec::new();
        leaf.field.write_csv(&mut csv)?;
        out.add(&format!("leaves/leaf_{i:03}.csv"), csv);
    }
    Ok(())
}

fn cmd_family(args: &RunArgs) -> Result<ExitCode, CliError> {
    let (cfg, dir) = load(args)?;
    let family = family_from(&cfg)?;
    let mut out = Outputs::new();
    family_outputs(&family, &mut out)?;
    out.add("config.toml", cfg.to_toml().into_bytes());
    out.commit(&dir)?;
    print_summary(&family.summary());
    Ok(ExitCode::SUCCESS)
}

fn calibration_for(
    s: &[f64],
    h: f64,
    run: impl FnOnce(f64) -> Result<Calibration, CliError>,
) -> Result<Calibration, CliError> {
    let s_max = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if s_max == 0.0 {
        // Only the zero leaf: nothing to calibrate.
        return Ok(Calibration { h, s_max, eps_lower: 0.0, eps_upper: 0.0, gradient_rel: h });
    }
    run(s_max)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let (report, dir, extra) = match (&args.config, &args.family) {
        (Some(path), None) => {
            let cfg = RunConfig::load(path)?;
            init_threads(cfg.threads);
            let dir = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
            let family = family_from(&cfg)?;
            let domain = family.domain().clone();
            let radii = geometry_radii(&domain)?;
            let n = domain.dimension();
            let cal = calibration_for(&family.s_values(), cfg.continuation.grid.h, |s_max| {
                Ok(calibrate(n, radii, s_max, &cfg.continuation)?)
            })?;
            let report = verify_family(&family, radii, &cal)?;
            let mut extra = Outputs::new();
            family_outputs(&family, &mut extra)?;
            extra.add("config.toml", cfg.to_toml().into_bytes());
            (report, dir, extra)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            let summary: FamilySummary =
                serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.clone(), source })?;
            let dir = args
                .out
                .clone()
                .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(".")));
            let n = summary.domain.n;
            let s: Vec<f64> = summary.leaves.iter().map(|l| l.s).collect();
            let cal = calibration_for(&s, summary.options.grid.h, |s_max| {
                Ok(calibrate(n, summary.radii, s_max, &summary.options)?)
            })?;
            (verify_summary(&summary, &cal)?, dir, Outputs::new())
        }
        _ => return Err(CliError::Usage("give either a configuration or --family".into())),
    };
    let mut out = extra;
    out.add("report.json", json(&report));
    out.commit(&dir)?;
    print_report(&report);
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_report(path: &Path) -> Result<ExitCode, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    if let Ok(summary) = serde_json::from_str::<FamilySummary>(&text) {
        print_summary(&summary);
        return Ok(ExitCode::SUCCESS);
    }
    let report: VerificationReport =
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })?;
    print_report(&report);
    Ok(ExitCode::SUCCESS)
}

fn print_summary(summary: &FamilySummary) {
    println!(
        "n = {}  rho = {:.6}  varrho = {:.6}  sigma = {:.10}  R_out = {:?}",
        summary.domain.n, summary.radii.rho, summary.radii.varrho, summary.sigma, summary.r_out
    );
    println!("{:>10} {:>16} {:>14} {:>14} {:>10} {:>10}", "gamma", "s", "c", "a", "exponent", "residual");
    for l in &summary.leaves {
        let e = l.exponent.map_or_else(|| "-".to_string(), |e| format!("{e:.4}"));
        println!("{:>10.4} {:>16.8} {:>14.8} {:>14.8} {:>10} {:>10.2e}", l.gamma, l.s, l.c, l.a, e, l.fit_residual);
    }
}

fn print_report(report: &VerificationReport) {
    if let Some(cal) = &report.calibration {
        println!(
            "calibration: h = {}  eps_lower = {:.3e}  eps_upper = {:.3e}  gradient_rel = {:.3e}",
            cal.h, cal.eps_lower, cal.eps_upper, cal.gradient_rel
        );
    }
    for c in &report.checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let note = c.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
        println!(
            "{status} {:<28} measured {:>12.5e}  threshold {:>12.5e}  margin {:>12.5e}{note}",
            c.name, c.measured, c.threshold, c.margin
        );
    }
    println!("overall: {}", if report.passed() { "PASS" } else { "FAIL" });
}
