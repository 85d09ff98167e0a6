//! `goldfish`: command-line front end for the goldfish workbench.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! errors and malformed input.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use goldfish_core::checks::{self, sample_points, CheckOptions};
use goldfish_core::dynamics::{integrate_with_stops, track_algebraic, DynamicsError, InitialData, Trajectory};
use goldfish_core::quantize::{
    elementary_symmetric_map, omega_catalog, pde_residual, plane_wave, quantize, quantize_symbolic, scaling_symmetry,
    verify_pde_symmetry,
};
use goldfish_core::symmetry::{
    catalog_from_json, catalog_to_json, generator_catalog, goldfish_system, noether_adapted_basis, two_body_vars,
    verify_point_symmetry, FieldJson, VectorField,
};
use goldfish_core::variational::{first_integral, goldfish_lagrangian, noether_condition};
use goldfish_core::{parse, Expr, Status, VariableSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use report::{CheckLine, RunReport};

#[derive(Parser, Debug)]
#[command(name = "goldfish", version, about = "Symmetries, quantization and dynamics of the goldfish many-body system")]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for all random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Pass threshold for numeric checks (each command has its own default).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Verify point symmetries of the goldfish equations.
    Symmetries(SymmetriesArgs),
    /// Test the Noether condition for the two-body Lagrangian.
    Noether(NoetherArgs),
    /// Build the Schrödinger equation for N particles.
    Quantize(QuantizeArgs),
    /// Solve the classical dynamics.
    Solve(SolveArgs),
    /// Run the acceptance suite.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["catalog", "field", "catalog_path"]))]
struct SymmetriesArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// The built-in two-body catalog.
    #[arg(long)]
    catalog: bool,
    /// A field as JSON: {"xi": "...", "etas": ["...", ...]}.
    #[arg(long)]
    field: Option<String>,
    /// A catalog file (JSON array of fields).
    #[arg(long)]
    catalog_path: Option<PathBuf>,
    /// Write the verified fields as JSON.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("which").required(true).args(["all", "index"]))]
struct NoetherArgs {
    #[arg(long)]
    all: bool,
    /// Member of the adapted basis (1..15; 14 is Gamma5+3*Gamma14).
    #[arg(long)]
    index: Option<usize>,
}

#[derive(Args, Debug)]
struct QuantizeArgs {
    #[arg(long)]
    n: usize,
    /// Numeric or rational value of E0, or `symbolic`.
    #[arg(long, default_value = "symbolic")]
    e0: String,
    /// Check Omega1..Omega9 (N = 2 only).
    #[arg(long)]
    verify_symmetries: bool,
    /// Write the equation as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Algebraic,
    Rk,
    Both,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("times").args(["t", "grid"]))]
struct SolveArgs {
    /// InitialData JSON file: {"positions": [...], "velocities": [...]}.
    #[arg(long)]
    init: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// `a:b:k`, k equally spaced times from a to b.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Integrator tolerance.
    #[arg(long, default_value_t = 1e-9)]
    rk_tol: f64,
    /// Write the integrated trajectory as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Include N = 4 in the symbolic checks.
    #[arg(long)]
    full: bool,
    /// Use this generator catalog instead of the built-in one.
    #[arg(long)]
    catalog_path: Option<PathBuf>,
}

/// Malformed input or I/O failure; exits with status 2.
#[derive(Debug)]
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, InputError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = RunReport::new(std::env::args().collect());
    let outcome = match &cli.command {
        Command::Symmetries(a) => symmetries(a, &mut report),
        Command::Noether(a) => noether(a, &mut report),
        Command::Quantize(a) => quantize_cmd(a, &cli, &mut report),
        Command::Solve(a) => solve(a, &cli, &mut report),
        Command::Check(a) => check(a, &cli, &mut report),
    };
    if let Err(InputError(msg)) = outcome {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    report.finish();
    report.emit(cli.json);
    if report.status == Status::Fail {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_catalog(path: &Path) -> Result<Vec<VectorField>> {
    Ok(catalog_from_json(&read(path)?, &two_body_vars())?)
}

fn symmetries(a: &SymmetriesArgs, report: &mut RunReport) -> Result<()> {
    if a.n == 0 {
        return Err(InputError("--n must be at least 1".into()));
    }
    let fields = if a.catalog || a.catalog_path.is_some() {
        if a.n != 2 {
            return Err(InputError("the generator catalog is for --n 2".into()));
        }
        match &a.catalog_path {
            Some(p) => load_catalog(p)?,
            None => generator_catalog(),
        }
    } else {
        let text = a.field.as_deref().unwrap_or_default();
        let json: FieldJson = serde_json::from_str(text)?;
        vec![VectorField::from_json(&json, &VariableSet::new(a.n)?)?]
    };
    let sys = goldfish_system(a.n)?;
    let vars = sys.vars();
    for f in &fields {
        let r = verify_point_symmetry(f, &sys)?;
        let residuals: Vec<String> = r.residuals.iter().map(|e| e.print(vars)).collect();
        report.push(CheckLine {
            name: f.name.clone(),
            status: r.status,
            detail: if r.passed() {
                "point symmetry".into()
            } else {
                format!("residuals [{}]", residuals.join(", "))
            },
            residual: Some(residuals),
            max_value: None,
        });
    }
    if let Some(path) = &a.export {
        write(path, &serde_json::to_string_pretty(&catalog_to_json(&fields, vars))?)?;
    }
    Ok(())
}

fn noether(a: &NoetherArgs, report: &mut RunReport) -> Result<()> {
    let basis = noether_adapted_basis();
    let chosen: Vec<&VectorField> = match a.index {
        Some(k) if (1..=basis.len()).contains(&k) => vec![&basis[k - 1]],
        Some(k) => return Err(InputError(format!("--index must be in 1..={}, got {k}", basis.len()))),
        None => basis.iter().collect(),
    };
    let lag = goldfish_lagrangian();
    let vars = lag.vars();
    let mut data = Vec::new();
    for f in chosen {
        let r = noether_condition(f, &lag)?;
        let mut entry = json!({ "field": f.name, "status": r.status });
        let detail = match &r.gauge {
            Some(g) => {
                let i = first_integral(f, &lag, g)?;
                entry["gauge"] = json!(g.print(vars));
                entry["integral"] = json!(i.print(vars));
                format!("gauge {}; first integral {}", g.print(vars), i.print(vars))
            }
            None => {
                entry["obstruction"] = json!(r.obstruction.print(vars));
                format!("obstruction {}", r.obstruction.print(vars))
            }
        };
        data.push(entry);
        report.push(CheckLine {
            name: f.name.clone(),
            status: r.status,
            detail,
            residual: None,
            max_value: None,
        });
    }
    report.data = Some(json!(data));
    Ok(())
}

fn quantize_cmd(a: &QuantizeArgs, cli: &Cli, report: &mut RunReport) -> Result<()> {
    if a.n == 0 {
        return Err(InputError("--n must be at least 1".into()));
    }
    if a.verify_symmetries && a.n != 2 {
        return Err(InputError("--verify-symmetries requires --n 2".into()));
    }
    let symbolic = quantize_symbolic(a.n)?;
    let (pde, e0_value) = if a.e0 == "symbolic" {
        (symbolic.clone(), 1.0)
    } else {
        let e0 = parse(&a.e0, symbolic.vars())?;
        let value = e0
            .as_f64()
            .ok_or_else(|| InputError(format!("--e0 must be a real constant, got `{}`", a.e0)))?;
        (quantize(a.n, &e0)?, value)
    };
    let json = serde_json::to_value(pde.to_json())?;
    if let Some(path) = &a.out {
        write(path, &serde_json::to_string_pretty(&json)?)?;
    }
    report.data = Some(json);

    if a.verify_symmetries {
        for s in omega_catalog().iter().chain([&scaling_symmetry(2)]) {
            let r = verify_pde_symmetry(s, &symbolic)?;
            report.push(CheckLine {
                name: s.name.clone(),
                status: r.status,
                detail: format!("Lie symmetry with mu = {}", s.mu.print(symbolic.vars())),
                residual: Some(r.residuals.iter().map(|e| e.print(symbolic.vars())).collect()),
                max_value: None,
            });
        }
    }

    let tol = cli.tol.unwrap_or(1e-8);
    let bound = pde.bind_e0(&Expr::from_f64(e0_value))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let points = sample_points(a.n, 20, 0.2, &mut rng);
    let k: Vec<f64> = (0..a.n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let wave = plane_wave(&k, e0_value, &elementary_symmetric_map(a.n)?);
    let worst = pde_residual(&bound, &wave, &points)?;
    report.push(CheckLine {
        name: "plane-wave residual".into(),
        status: Status::from_bool(worst < tol),
        detail: format!("max |residual| {worst:.3e} over 20 points (E0 = {e0_value}, tol {tol:e})"),
        residual: None,
        max_value: Some(worst),
    });
    Ok(())
}

/// `a:b:k`, inclusive of both ends.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || InputError(format!("grid must be a:b:k, got `{spec}`"));
    let [a, b, k] = parts[..] else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    match k {
        0 => Err(bad()),
        1 => Ok(vec![a]),
        _ => Ok((0..k)
            .map(|j| (a * (k - 1 - j) as f64 + b * j as f64) / (k - 1) as f64)
            .collect()),
    }
}

/// Integrates forward for positive times and, by time reversal, backward
/// for negative ones.
fn integrate_both_ways(
    init: &InitialData,
    times: &[f64],
    tol: f64,
) -> std::result::Result<(Vec<Vec<f64>>, Trajectory), DynamicsError> {
    let forward: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    let backward: Vec<f64> = times.iter().filter(|&&t| t < 0.0).map(|t| -t).collect();
    let traj = integrate_with_stops(init, &forward, tol)?;
    let reversed = if backward.is_empty() {
        None
    } else {
        let mirrored = InitialData {
            positions: init.positions.clone(),
            velocities: init.velocities.iter().map(|v| -v).collect(),
        };
        Some(integrate_with_stops(&mirrored, &backward, tol)?)
    };
    let positions = times
        .iter()
        .map(|&t| {
            let state = if t < 0.0 {
                reversed.as_ref().and_then(|r| r.at(-t))
            } else {
                traj.at(t)
            };
            state.map_or_else(|| init.positions.clone(), |s| s.positions.clone())
        })
        .collect();
    Ok((positions, traj))
}

fn solve(a: &SolveArgs, cli: &Cli, report: &mut RunReport) -> Result<()> {
    let init: InitialData = serde_json::from_str(&read(&a.init)?)?;
    init.validate()?;
    let times = match (&a.t, &a.grid) {
        (Some(t), _) => vec![*t],
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => vec![1.0],
    };
    if a.rk_tol <= 0.0 {
        return Err(InputError("--rk-tol must be positive".into()));
    }
    let mut rows: Vec<serde_json::Value> = times.iter().map(|t| json!({ "t": t })).collect();

    let algebraic = if a.method != Method::Rk {
        match track_algebraic(&init, &times) {
            Ok(xs) => {
                for (row, x) in rows.iter_mut().zip(&xs) {
                    row["algebraic"] = json!(x);
                }
                report.push(CheckLine::pass("algebraic solution", format!("{} times", times.len())));
                Some(xs)
            }
            Err(e) => {
                report.push(CheckLine::fail("algebraic solution", e.to_string()));
                None
            }
        }
    } else {
        None
    };

    let rk = if a.method != Method::Algebraic {
        match integrate_both_ways(&init, &times, a.rk_tol) {
            Ok((xs, traj)) => {
                for (row, x) in rows.iter_mut().zip(&xs) {
                    row["rk"] = json!(x);
                }
                if let Some(path) = &a.csv {
                    write(path, &traj.to_csv())?;
                }
                let detail = match traj.events.first() {
                    Some(ev) => format!(
                        "near collision of particles {} and {} at t = {} (gap {:e})",
                        ev.pair.0 + 1,
                        ev.pair.1 + 1,
                        ev.time,
                        ev.gap
                    ),
                    None => format!("{} accepted steps", traj.times.len() - 1),
                };
                report.push(CheckLine::pass("runge-kutta integration", detail));
                Some(xs)
            }
            Err(e) => {
                if let DynamicsError::Collision { trajectory, .. } | DynamicsError::StepUnderflow { trajectory, .. } = &e {
                    if let Some(path) = &a.csv {
                        write(path, &trajectory.to_csv())?;
                    }
                    report.data = Some(json!({ "events": trajectory.events, "last": trajectory.last().map(|(t, s)| json!({"t": t, "state": s})) }));
                }
                let mut detail = e.to_string();
                if let DynamicsError::Collision { trajectory, .. } | DynamicsError::StepUnderflow { trajectory, .. } = &e {
                    for ev in &trajectory.events {
                        detail += &format!(
                            "; near collision of particles {} and {} at t = {} (gap {:e})",
                            ev.pair.0 + 1,
                            ev.pair.1 + 1,
                            ev.time,
                            ev.gap
                        );
                    }
                }
                report.push(CheckLine::fail("runge-kutta integration", detail));
                None
            }
        }
    } else {
        None
    };

    if let (Some(xa), Some(xr)) = (&algebraic, &rk) {
        let tol = cli.tol.unwrap_or(1e-6);
        let mut worst = 0.0f64;
        for (row, (p, q)) in rows.iter_mut().zip(xa.iter().zip(xr)) {
            let d = p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            row["discrepancy"] = json!(d);
            worst = worst.max(d);
        }
        report.push(CheckLine {
            name: "cross-solver agreement".into(),
            status: Status::from_bool(worst <= tol),
            detail: format!("max discrepancy {worst:.3e} (tol {tol:e})"),
            residual: None,
            max_value: Some(worst),
        });
    }
    report.table = rows;
    if report.data.is_none() {
        report.data = Some(json!({ "n": init.n() }));
    }
    Ok(())
}

fn check(a: &CheckArgs, cli: &Cli, report: &mut RunReport) -> Result<()> {
    let catalog = a.catalog_path.as_deref().map(load_catalog).transpose()?;
    let injected = catalog.is_some();
    let opts = CheckOptions {
        seed: cli.seed,
        full: a.full,
        catalog,
    };
    for id in 1..=checks::CRITERIA.len() {
        let c = checks::run_criterion(id, &opts);
        // a rejected user catalog invalidates everything built on it
        let stop = injected && id == 1 && c.status == Status::Fail;
        report.push(CheckLine {
            name: format!("{}. {}", c.id, c.name),
            status: c.status,
            detail: c.detail,
            residual: None,
            max_value: c.max_value,
        });
        if stop {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1:1.0:10").unwrap().len(), 10);
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:5:1").unwrap(), vec![2.0]);
        for bad in ["0:1", "a:1:2", "0:1:0", "0:1:2:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
