//! Command-line front end: spectra, Wigner-function grids, verification
//! suites and time evolution of two coupled oscillators on a deformed
//! phase space.
//!
//! Exit codes: 0 on success, 1 when a verification suite reports a
//! failure, 2 on configuration or validation errors.

mod config;
mod output;

use anyhow::{Context, Result, anyhow, bail};
use clap::{Args, Parser, Subcommand};
use config::{Axis, Backend, Coords, Format, JobConfig, axis_slot};
use ncphase::coupled::{CoupledOscillatorSpec, OscillatorSolution};
use ncphase::params::DeformationParams;
use ncphase::poly::{GaussLagFn, PhasePoint};
use ncphase::report;
use ncphase::scalar::{C64, Coeff, ExactC};
use output::{Cell, Table, emit};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ncphase",
    version,
    about = "Star products, Wigner functions and coupled oscillators on a noncommutative phase space",
    allow_negative_numbers = true
)]
struct Cli {
    /// INI-style config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    hbar: Option<f64>,

    #[arg(long, global = true)]
    mu: Option<f64>,

    #[arg(long, global = true)]
    nu: Option<f64>,

    /// Coefficient arithmetic for suites that support both
    #[arg(long, global = true, value_enum)]
    backend: Option<Backend>,

    /// Residual tolerance for float-backend checks
    #[arg(long, global = true)]
    tolerance: Option<f64>,

    /// Output path; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct OscArgs {
    #[arg(long)]
    m1: Option<f64>,
    #[arg(long)]
    m2: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    c3: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct GridArgs {
    #[arg(long)]
    axis1: Option<String>,
    #[arg(long)]
    axis1_min: Option<f64>,
    #[arg(long)]
    axis1_max: Option<f64>,
    #[arg(long)]
    axis1_count: Option<usize>,
    #[arg(long)]
    axis2: Option<String>,
    #[arg(long)]
    axis2_min: Option<f64>,
    #[arg(long)]
    axis2_max: Option<f64>,
    #[arg(long)]
    axis2_count: Option<usize>,
    /// Fixed values for unplotted coordinates, e.g. --fix y2=0.5,q2=0
    #[arg(long)]
    fix: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels with the commutative-limit values and the shift
    #[command(allow_negative_numbers = true)]
    Spectrum {
        #[command(flatten)]
        osc: OscArgs,
        #[arg(long)]
        n1_max: Option<u32>,
        #[arg(long)]
        n2_max: Option<u32>,
    },
    /// Tabulate one Wigner state on a 2D grid slice
    #[command(allow_negative_numbers = true)]
    WignerGrid {
        #[command(flatten)]
        osc: OscArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        n1: Option<u32>,
        #[arg(long)]
        n2: Option<u32>,
        /// Coordinates of the grid: normal (y, q) or original (X, P)
        #[arg(long, value_enum)]
        coords: Option<Coords>,
        /// Divide values by (grid sum x cell area)
        #[arg(long)]
        normalize: bool,
    },
    /// Run a verification suite and emit a JSON report
    #[command(allow_negative_numbers = true)]
    Verify {
        #[command(flatten)]
        osc: OscArgs,
        /// algebra | genvalue | oscillator | evolution
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        /// Random cases (algebra triples or genvalue Hamiltonians)
        #[arg(long)]
        cases: Option<usize>,
    },
    /// Evaluate the time-evolution function on a 2D grid slice
    #[command(allow_negative_numbers = true)]
    Evolve {
        #[command(flatten)]
        osc: OscArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Wick-rotated time (t = -i tau)
        #[arg(long)]
        tau: Option<f64>,
        /// Real time
        #[arg(long)]
        t: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Suite {
    Algebra,
    Genvalue,
    Oscillator,
    Evolution,
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn merged_config(cli: &Cli) -> Result<JobConfig> {
    let mut cfg = JobConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    if let Some(v) = cli.hbar {
        cfg.hbar = v;
    }
    if let Some(v) = cli.mu {
        cfg.mu = v;
    }
    if let Some(v) = cli.nu {
        cfg.nu = v;
    }
    if let Some(v) = cli.backend {
        cfg.backend = v;
    }
    if let Some(v) = cli.tolerance {
        cfg.tolerance = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = cli.format {
        cfg.format = v;
    }
    Ok(cfg)
}

fn apply_osc(cfg: &mut JobConfig, osc: &OscArgs) {
    if let Some(v) = osc.m1 {
        cfg.m1 = v;
    }
    if let Some(v) = osc.m2 {
        cfg.m2 = v;
    }
    if let Some(v) = osc.c1 {
        cfg.c1 = v;
    }
    if let Some(v) = osc.c2 {
        cfg.c2 = v;
    }
    if let Some(v) = osc.c3 {
        cfg.c3 = v;
    }
}

fn apply_grid(cfg: &mut JobConfig, grid: &GridArgs) -> Result<()> {
    let apply_axis = |axis: &mut Axis,
                      name: &Option<String>,
                      min: Option<f64>,
                      max: Option<f64>,
                      count: Option<usize>| {
        if let Some(v) = name {
            axis.name = v.clone();
        }
        if let Some(v) = min {
            axis.min = v;
        }
        if let Some(v) = max {
            axis.max = v;
        }
        if let Some(v) = count {
            axis.count = v;
        }
    };
    apply_axis(&mut cfg.axis1, &grid.axis1, grid.axis1_min, grid.axis1_max, grid.axis1_count);
    apply_axis(&mut cfg.axis2, &grid.axis2, grid.axis2_min, grid.axis2_max, grid.axis2_count);
    for raw in &grid.fix {
        let mut parsed = std::collections::BTreeMap::new();
        config::parse_fixed(raw, &mut parsed)?;
        cfg.fixed.extend(parsed);
    }
    Ok(())
}

fn float_params(cfg: &JobConfig) -> Result<DeformationParams<C64>> {
    DeformationParams::new(
        C64::from_f64(cfg.hbar),
        C64::from_f64(cfg.mu),
        C64::from_f64(cfg.nu),
    )
    .map_err(|e| anyhow!("{e}"))
}

fn solve(cfg: &JobConfig) -> Result<OscillatorSolution> {
    let spec = CoupledOscillatorSpec::new(cfg.m1, cfg.m2, cfg.c1, cfg.c2, cfg.c3)
        .map_err(|e| anyhow!("{e}"))?;
    OscillatorSolution::solve(&spec, &float_params(cfg)?).map_err(|e| anyhow!("{e}"))
}

/// Grid rows in row-major order: (axis1 value, axis2 value, point).
type GridPoints = Vec<(f64, f64, PhasePoint)>;

/// Row-major walk over the configured grid slice. The fixed coordinates
/// default to 0 and must not name a plotted axis.
fn grid_points(cfg: &JobConfig) -> Result<(GridPoints, f64)> {
    cfg.validate_grid().map_err(|e| anyhow!("{e}"))?;
    let s1 = axis_slot(&cfg.axis1.name).expect("validated");
    let s2 = axis_slot(&cfg.axis2.name).expect("validated");
    let mut base = [0.0f64; 4];
    for (name, value) in &cfg.fixed {
        let slot = axis_slot(name).expect("validated");
        if slot == s1 || slot == s2 {
            bail!("fixed coordinate {name:?} is a plotted axis");
        }
        base[slot] = *value;
    }
    let mut pts = Vec::with_capacity(cfg.axis1.count * cfg.axis2.count);
    for a in cfg.axis1.values() {
        for b in cfg.axis2.values() {
            let mut c = base;
            c[s1] = a;
            c[s2] = b;
            let pt = PhasePoint::new(c[0], c[1], c[2], c[3]).map_err(|e| anyhow!("{e}"))?;
            pts.push((a, b, pt));
        }
    }
    let step = |axis: &Axis| {
        if axis.count > 1 { (axis.max - axis.min) / (axis.count - 1) as f64 } else { 1.0 }
    };
    Ok((pts, step(&cfg.axis1) * step(&cfg.axis2)))
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = merged_config(&cli)?;
    match &cli.command {
        Command::Spectrum { osc, n1_max, n2_max } => {
            apply_osc(&mut cfg, osc);
            if let Some(v) = n1_max {
                cfg.n1_max = *v;
            }
            if let Some(v) = n2_max {
                cfg.n2_max = *v;
            }
            let sol = solve(&cfg)?;
            let mut table = Table::new(vec!["n1", "n2", "E", "E_comm", "shift"]);
            for n1 in 0..=cfg.n1_max {
                for n2 in 0..=cfg.n2_max {
                    let e = sol.energy(n1, n2);
                    let e_comm = sol.energy_commutative(n1, n2);
                    table.push(vec![
                        Cell::Int(n1 as i64),
                        Cell::Int(n2 as i64),
                        Cell::Num(e),
                        Cell::Num(e_comm),
                        Cell::Num(e - e_comm),
                    ]);
                }
            }
            let extra = vec![format!("n1-max={} n2-max={}", cfg.n1_max, cfg.n2_max)];
            emit(cfg.out.as_deref(), &table.render(&cfg, "spectrum", &extra))?;
            Ok(0)
        }

        Command::WignerGrid { osc, grid, n1, n2, coords, normalize } => {
            apply_osc(&mut cfg, osc);
            apply_grid(&mut cfg, grid)?;
            if let Some(v) = n1 {
                cfg.n1 = *v;
            }
            if let Some(v) = n2 {
                cfg.n2 = *v;
            }
            if let Some(v) = coords {
                cfg.coords = *v;
            }
            if *normalize {
                cfg.normalize = true;
            }
            let sol = solve(&cfg)?;
            let state = sol.wigner_state(cfg.n1, cfg.n2).map_err(|e| anyhow!("{e}"))?;
            let w: GaussLagFn<C64> = match cfg.coords {
                Coords::Normal => state.w.clone(),
                Coords::Original => sol.to_original_coords(&state.w),
            };
            let (pts, cell_area) = grid_points(&cfg)?;
            let mut values = Vec::with_capacity(pts.len());
            for (a, b, pt) in &pts {
                let v = w.eval(pt).map_err(|e| anyhow!("{e}"))?;
                values.push((*a, *b, v.re));
            }
            if cfg.normalize {
                let total: f64 = values.iter().map(|(_, _, v)| v).sum::<f64>() * cell_area;
                if total.abs() < 1e-300 {
                    bail!("grid normalization impossible: near-zero grid sum");
                }
                for v in &mut values {
                    v.2 /= total;
                }
            }
            let mut table = Table::new(vec!["axis1", "axis2", "value"]);
            for (a, b, v) in values {
                table.push(vec![Cell::Num(a), Cell::Num(b), Cell::Num(v)]);
            }
            let extra = vec![
                format!("n1={} n2={} coords={} normalize={}", cfg.n1, cfg.n2, cfg.coords, cfg.normalize),
                grid_provenance(&cfg),
            ];
            emit(cfg.out.as_deref(), &table.render(&cfg, "wigner-grid", &extra))?;
            Ok(0)
        }

        Command::Verify { osc, suite, seed, cases } => {
            apply_osc(&mut cfg, osc);
            if let Some(v) = seed {
                cfg.seed = *v;
            }
            if let Some(v) = cases {
                cfg.cases = Some(*v);
            }
            let report = match suite {
                Suite::Algebra => {
                    let cases = cfg.cases.unwrap_or(200);
                    match cfg.backend {
                        Backend::Exact => report::algebra_suite::<ExactC>(cfg.seed, cases, 0.0),
                        Backend::Float => {
                            report::algebra_suite::<C64>(cfg.seed, cases, cfg.tolerance)
                        }
                    }
                }
                // Eigenvalue checks need rational arithmetic to be exact.
                Suite::Genvalue => report::genvalue_suite(cfg.seed, cfg.cases.unwrap_or(20), 5),
                Suite::Oscillator => {
                    let spec = CoupledOscillatorSpec::new(cfg.m1, cfg.m2, cfg.c1, cfg.c2, cfg.c3)
                        .map_err(|e| anyhow!("{e}"))?;
                    report::oscillator_suite(&spec, &float_params(&cfg)?, cfg.tolerance)
                }
                Suite::Evolution => {
                    let spec = CoupledOscillatorSpec::new(cfg.m1, cfg.m2, cfg.c1, cfg.c2, cfg.c3)
                        .map_err(|e| anyhow!("{e}"))?;
                    report::evolution_suite(&spec, &float_params(&cfg)?, &[0.3, 0.5, 1.0], 25, 1e-6)
                }
            };
            let doc = serde_json::json!({
                "command": "verify",
                "config": cfg.provenance(
                    "verify",
                    &[format!("suite={suite:?} seed={} cases={:?}", cfg.seed, cfg.cases)],
                ),
                "report": serde_json::to_value(&report).context("report serializes")?,
            });
            emit(cfg.out.as_deref(), &serde_json::to_string_pretty(&doc)?)?;
            Ok(if report.pass { 0 } else { 1 })
        }

        Command::Evolve { osc, grid, tau, t } => {
            apply_osc(&mut cfg, osc);
            apply_grid(&mut cfg, grid)?;
            if let Some(v) = tau {
                cfg.tau = Some(*v);
            }
            if let Some(v) = t {
                cfg.t = Some(*v);
            }
            let time = match (cfg.tau, cfg.t) {
                (Some(tau), None) => C64::new(0.0, -tau),
                (None, Some(t)) => C64::new(t, 0.0),
                (None, None) => bail!("evolve needs --tau or --t"),
                (Some(_), Some(_)) => bail!("give exactly one of --tau and --t"),
            };
            let sol = solve(&cfg)?;
            let ev = sol.evolution().map_err(|e| anyhow!("{e}"))?;
            let (pts, _) = grid_points(&cfg)?;
            let mut table = Table::new(vec!["axis1", "axis2", "re", "im"]);
            for (a, b, pt) in &pts {
                let v = ev.eval(time, pt).map_err(|e| anyhow!("{e}"))?;
                table.push(vec![Cell::Num(*a), Cell::Num(*b), Cell::Num(v.re), Cell::Num(v.im)]);
            }
            let extra = vec![
                format!("tau={:?} t={:?}", cfg.tau, cfg.t),
                grid_provenance(&cfg),
            ];
            emit(cfg.out.as_deref(), &table.render(&cfg, "evolve", &extra))?;
            Ok(0)
        }
    }
}

fn grid_provenance(cfg: &JobConfig) -> String {
    let fixed: Vec<String> =
        cfg.fixed.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "axis1={}[{},{}]x{} axis2={}[{},{}]x{} fix={}",
        cfg.axis1.name,
        cfg.axis1.min,
        cfg.axis1.max,
        cfg.axis1.count,
        cfg.axis2.name,
        cfg.axis2.min,
        cfg.axis2.max,
        cfg.axis2.count,
        if fixed.is_empty() { "-".to_string() } else { fixed.join(",") }
    )
}
