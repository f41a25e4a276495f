//! Command-line front end: `solve`, `gap`, `asymptotics`, and `verify`
//! subcommands over the airygap library.
//!
//! Configuration precedence: command-line flags override config-file values
//! override built-in defaults. Exit codes: 0 success, 2 invalid input
//! (including config parse errors), 3 numerical failure. All numeric JSON
//! output goes through serde_json's shortest-round-trip float formatting,
//! so printed doubles re-parse bit-exactly; CSV uses 17 significant digits.

use airygap::asympt::{
    is_admissible, nu_vector, predicted_logf_with, solve_system, IntervalConfig, SurfaceData,
};
use airygap::fredholm::gap_probability_scaled;
use airygap::verify::{run_verification_with, safe_r_window};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "airygap",
    version,
    about = "Gap probabilities of the Airy point process on unions of bulk intervals"
)]
struct Cli {
    /// JSON config file with RunConfig fields; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the endpoint system and print the surface data as JSON
    Solve(CommonArgs),
    /// Evaluate log F(r·x) by Nystrom quadrature at one r
    Gap {
        #[command(flatten)]
        common: CommonArgs,
        /// scaling factor r > 0
        #[arg(long, allow_hyphen_values = true)]
        r: Option<f64>,
    },
    /// Print the expansion terms c r^3 - (3g/8) ln r + ln theta(nu) + C at one r
    Asymptotics {
        #[command(flatten)]
        common: CommonArgs,
        /// scaling factor r > 0
        #[arg(long, allow_hyphen_values = true)]
        r: Option<f64>,
        /// the r-independent constant C (the expansion leaves it free)
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c_const: f64,
    },
    /// Full verification sweep: fit C, residual decay, theta oscillation
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true)]
        r_min: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        r_max: Option<f64>,
        #[arg(long)]
        r_points: Option<usize>,
        /// report file path ("-" for stdout)
        #[arg(long)]
        output: Option<String>,
        /// report format: json or csv
        #[arg(long)]
        format: Option<String>,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// genus: the number of gap intervals (>= 1)
    #[arg(long)]
    g: Option<usize>,
    /// comma-separated endpoints x1,x2,...,x2g, strictly decreasing
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1..)]
    x: Option<Vec<f64>>,
    /// Gauss-Legendre order per interval
    #[arg(long)]
    order: Option<usize>,
    /// truncation tolerance of the theta lattice sum
    #[arg(long)]
    theta_tol: Option<f64>,
}

/// Config-file schema; every field optional, flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    g: Option<usize>,
    x: Option<Vec<f64>>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    r_points: Option<usize>,
    order: Option<usize>,
    theta_tol: Option<f64>,
    output_path: Option<String>,
    format: Option<String>,
}

/// Fully resolved run configuration.
struct RunConfig {
    cfg: IntervalConfig,
    order: usize,
    theta_tol: f64,
    r_min: Option<f64>,
    r_max: Option<f64>,
    r_points: usize,
    output_path: Option<String>,
    format: String,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<airygap::Error> for Failure {
    fn from(e: airygap::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file_cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Input(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str::<FileConfig>(&text).map_err(|e| {
                Failure::Input(format!("malformed config {}: {e}", path.display()))
            })?
        }
        None => FileConfig::default(),
    };
    match cli.cmd {
        Cmd::Solve(common) => {
            let rc = resolve(&common, &file_cfg, None, None, None, None, None)?;
            cmd_solve(&rc)
        }
        Cmd::Gap { common, r } => {
            let rc = resolve(&common, &file_cfg, None, None, None, None, None)?;
            let r = r.or(file_cfg.r_min).ok_or_else(|| {
                Failure::Input("gap requires --r (or r_min in the config file)".into())
            })?;
            cmd_gap(&rc, r)
        }
        Cmd::Asymptotics { common, r, c_const } => {
            let rc = resolve(&common, &file_cfg, None, None, None, None, None)?;
            let r = r.or(file_cfg.r_min).ok_or_else(|| {
                Failure::Input("asymptotics requires --r (or r_min in the config file)".into())
            })?;
            cmd_asymptotics(&rc, r, c_const)
        }
        Cmd::Verify {
            common,
            r_min,
            r_max,
            r_points,
            output,
            format,
        } => {
            let rc = resolve(&common, &file_cfg, r_min, r_max, r_points, output, format)?;
            cmd_verify(&rc)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve(
    common: &CommonArgs,
    file: &FileConfig,
    r_min: Option<f64>,
    r_max: Option<f64>,
    r_points: Option<usize>,
    output: Option<String>,
    format: Option<String>,
) -> Result<RunConfig, Failure> {
    let x = common
        .x
        .clone()
        .or_else(|| file.x.clone())
        .unwrap_or_else(|| vec![-1.0, -2.0]);
    if x.is_empty() {
        return Err(Failure::Input("endpoint list --x must not be empty".into()));
    }
    let g = common.g.or(file.g).unwrap_or(x.len() / 2);
    if g == 0 {
        return Err(Failure::Input(
            "g must be >= 1 (the g = 0 gap set is empty and F = 1 identically)".into(),
        ));
    }
    if x.len() != 2 * g {
        return Err(Failure::Input(format!(
            "expected 2g = {} endpoints, got {}",
            2 * g,
            x.len()
        )));
    }
    let cfg = IntervalConfig::new(x).map_err(Failure::from)?;
    let order = common.order.or(file.order).unwrap_or(64);
    let theta_tol = common.theta_tol.or(file.theta_tol).unwrap_or(1e-12);
    if theta_tol.is_nan() || theta_tol <= 0.0 {
        return Err(Failure::Input(format!(
            "theta_tol must be positive, got {theta_tol}"
        )));
    }
    let r_points = r_points.or(file.r_points).unwrap_or(8);
    if r_points < 4 {
        return Err(Failure::Input(format!(
            "r_points must be >= 4, got {r_points}"
        )));
    }
    let format = format
        .or_else(|| file.format.clone())
        .unwrap_or_else(|| "json".into());
    if format != "json" && format != "csv" {
        return Err(Failure::Input(format!(
            "format must be json or csv, got {format}"
        )));
    }
    Ok(RunConfig {
        cfg,
        order,
        theta_tol,
        r_min: r_min.or(file.r_min),
        r_max: r_max.or(file.r_max),
        r_points,
        output_path: output.or_else(|| file.output_path.clone()),
        format,
    })
}

fn solve_checked(cfg: &IntervalConfig) -> Result<SurfaceData, Failure> {
    let adm = is_admissible(cfg);
    if cfg.genus() == 1 && !adm.admissible {
        return Err(Failure::Input(format!(
            "inadmissible configuration: {}",
            adm.detail
        )));
    }
    solve_system(cfg).map_err(Failure::from)
}

fn surface_json(sd: &SurfaceData) -> serde_json::Value {
    let g = sd.genus();
    let tau_im: Vec<Vec<f64>> = (0..g)
        .map(|j| (0..g).map(|k| sd.tau[(j, k)].im).collect())
        .collect();
    serde_json::json!({
        "genus": g,
        "x": sd.bp.gap_endpoints(),
        "x0": sd.bp.x0(),
        "q": sd.q,
        "a_matrix": (0..g).map(|j| (0..g).map(|k| sd.a_matrix[(j, k)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "cond_a": sd.cond_a,
        "tau_im": tau_im,
        "omega": sd.omega,
        "c0": sd.c0,
        "c": sd.c,
    })
}

fn cmd_solve(rc: &RunConfig) -> Result<(), Failure> {
    let sd = solve_checked(&rc.cfg)?;
    println!("{}", serde_json::to_string_pretty(&surface_json(&sd)).unwrap());
    Ok(())
}

fn cmd_gap(rc: &RunConfig, r: f64) -> Result<(), Failure> {
    let res = gap_probability_scaled(&rc.cfg, r, rc.order).map_err(Failure::from)?;
    let out = serde_json::json!({
        "r": r,
        "order": res.order_per_interval,
        "logF": res.log_det,
        "err_estimate": res.err_estimate,
        "spectral_radius_proxy": res.spectral_radius_proxy,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(())
}

fn cmd_asymptotics(rc: &RunConfig, r: f64, c_const: f64) -> Result<(), Failure> {
    let sd = solve_checked(&rc.cfg)?;
    let ev = sd.theta_evaluator(rc.theta_tol).map_err(Failure::from)?;
    let nu = nu_vector(&sd, r).map_err(Failure::from)?;
    let theta = ev.theta_real(&nu).map_err(Failure::from)?;
    let total = predicted_logf_with(&sd, &ev, r, c_const).map_err(Failure::from)?;
    let g = sd.genus() as f64;
    let out = serde_json::json!({
        "r": r,
        "c": sd.c,
        "omega": sd.omega,
        "nu": nu,
        "terms": {
            "cubic": sd.c * r.powi(3),
            "log": -3.0 * g / 8.0 * r.ln(),
            "theta": theta.ln(),
            "constant": c_const,
        },
        "predicted_logF": total,
    });
    println!("{}", serde_json::to_string_pretty(&out).unwrap());
    Ok(())
}

fn cmd_verify(rc: &RunConfig) -> Result<(), Failure> {
    let sd = solve_checked(&rc.cfg)?;
    let (auto_min, auto_max) = safe_r_window(sd.c, rc.cfg.scale());
    let r_min = rc.r_min.unwrap_or(auto_min);
    let r_max = rc.r_max.unwrap_or(auto_max);
    if r_min.is_nan() || r_max.is_nan() || r_min <= 0.0 || r_min >= r_max {
        return Err(Failure::Input(format!(
            "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    let grid: Vec<f64> = (0..rc.r_points)
        .map(|i| r_min + (r_max - r_min) * i as f64 / (rc.r_points - 1) as f64)
        .collect();
    let report = run_verification_with(&rc.cfg, &grid, rc.order, rc.theta_tol)
        .map_err(Failure::from)?;
    let body = match rc.format.as_str() {
        "csv" => report.to_csv_string(),
        _ => {
            let mut s = report.to_json_string();
            s.push('\n');
            s
        }
    };
    let default_path = format!("verification_report.{}", rc.format);
    let path = rc.output_path.clone().unwrap_or(default_path);
    if path == "-" {
        print!("{body}");
    } else {
        std::fs::write(&path, &body)
            .map_err(|e| Failure::Input(format!("cannot write {path}: {e}")))?;
    }
    println!("{}", report.summary_line());
    if path != "-" {
        println!("report written to {path}");
    }
    if report.partial {
        return Err(Failure::Numerical(
            "sweep truncated before the end of the grid (see report notes; partial: true)".into(),
        ));
    }
    Ok(())
}
