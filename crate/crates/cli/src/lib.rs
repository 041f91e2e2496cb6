//! `radner` command-line front end.

pub mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use radner_core::equilibrium::{solve_y0, Equilibrium};
use radner_core::ode::fmt17;
use radner_core::report::write_report;
use radner_core::sde::{mc_dividend_integral, mc_feynman_kac, simulate_joint, write_summary, SimConfig};
use radner_core::verify::{all_passed, write_checks, Battery, VerifyConfig};
use radner_core::{boundary_diagnostics, find_critical, integrate, wealth_ode_residual, BoundaryConfig, TrajectoryOutcome};

pub use config::{load, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "radner", version, about = "Critical Riccati solutions, equilibrium tables and Monte Carlo checks")]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config value, e.g. --set model.a=2 (repeatable)
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Output directory
    #[arg(long, env = "RADNER_OUT_DIR", default_value = "out", global = true)]
    pub out: PathBuf,
    /// Seed for Monte Carlo runs, overriding simulation.seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate one trajectory at model.xi and write grid.csv
    SolveOde,
    /// Bisect for the critical xi and write critical_grid.csv, critical_meta.txt
    FindCritical,
    /// Equilibrium table and boundary diagnostics for the [economy] block
    Equilibrium,
    /// Monte Carlo checks of the dividend and Feynman-Kac identities
    Simulate,
    /// Run the acceptance battery; exit 2 if any check fails
    VerifyAll,
    /// One trajectory per sweep.xis entry plus a long-format sweep_long.csv
    Sweep,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut cfg = load(&text, &cli.overrides)?;
    if let Some(s) = cli.seed {
        cfg.simulation.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = resolve_config(cli)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::SolveOde => solve_ode(&cfg, out),
        Command::FindCritical => find_critical_cmd(&cfg, out),
        Command::Equilibrium => equilibrium(&cfg, out),
        Command::Simulate => simulate(&cfg, out),
        Command::VerifyAll => verify_all(&cfg, out),
        Command::Sweep => sweep(&cfg, out),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let p = dir.join(name);
    Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
}

fn outcome_label(o: &TrajectoryOutcome) -> String {
    match o {
        TrajectoryOutcome::Completed(g) => format!("completed to y={}", g.last().y),
        TrajectoryOutcome::HitOne(y, _) => format!("h reached 1 at y={y}"),
        TrajectoryOutcome::Exploded(y, _) => format!("exploded at y={y}"),
    }
}

fn solve_ode(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let Some(xi) = cfg.model.xi else { bail!("solve-ode needs [model] xi") };
    let params = cfg.shooting()?.with_xi(xi).context("[model]")?;
    let o = integrate(&params, &cfg.integrator()?)?;
    let mut w = create(out, "grid.csv")?;
    o.grid().write_csv(&mut w)?;
    w.flush()?;
    println!("xi={xi}: {}", outcome_label(&o));
    Ok(EXIT_OK)
}

fn find_critical_cmd(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let c = find_critical(&cfg.shooting()?, cfg.shooting.xi_tol, &cfg.integrator()?)?;
    let mut w = create(out, "critical_grid.csv")?;
    c.grid.write_csv(&mut w)?;
    w.flush()?;
    let mut w = create(out, "critical_meta.txt")?;
    c.write_sidecar(&mut w)?;
    w.flush()?;
    println!("xi0={} L={} h'(1)={}", fmt17(c.xi0), fmt17(c.l), fmt17(c.hprime1));
    Ok(EXIT_OK)
}

fn solve_equilibrium(cfg: &RunConfig) -> Result<(Equilibrium, f64)> {
    let econ = cfg.economy()?;
    let eq = Equilibrium::solve(econ, cfg.shooting.xi_tol, &cfg.integrator()?)?;
    let y0 = match cfg.economy.theta2 {
        Some(t) => solve_y0(&eq.critical, &econ, t)?,
        None => cfg.economy.y0,
    };
    Ok((eq, y0))
}

fn equilibrium(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let (eq, y0) = solve_equilibrium(cfg)?;
    let t = &cfg.table;
    let mut w = create(out, "equilibrium.csv")?;
    eq.write_table(t.y_min, t.y_max, t.n, &mut w)?;
    w.flush()?;
    let mut w = create(out, "critical_meta.txt")?;
    eq.critical.write_sidecar(&mut w)?;
    w.flush()?;
    let b = boundary_diagnostics(&eq.critical, &BoundaryConfig::default())?;
    let mut w = create(out, "boundary.csv")?;
    write_report(&b.rows(), &mut w)?;
    w.flush()?;
    println!("A={} xi0={} y0={}", eq.critical.params.a, fmt17(eq.critical.xi0), fmt17(y0));
    Ok(EXIT_OK)
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let (eq, y0) = solve_equilibrium(cfg)?;
    let sim = cfg.simulation()?;
    let div = mc_dividend_integral(&eq.econ, &sim)?;
    let fk = mc_feynman_kac(&eq, y0, &sim)?;
    let mut w = create(out, "mc_summary.csv")?;
    write_summary(
        &[("dividend_integral", div), ("feynman_kac", fk.estimate), ("feynman_kac_truncated", fk.truncated)],
        &mut w,
    )?;
    w.flush()?;
    let s = &cfg.simulation;
    if s.dump_paths > 0 {
        let dump = SimConfig { n_paths: s.dump_paths, record_every: s.record_every.max(1), ..sim };
        let ens = simulate_joint(&eq, y0, &dump)?;
        let mut w = create(out, "paths.csv")?;
        ens.write_paths(&mut w)?;
        w.flush()?;
    }
    let z = |v: Option<f64>| v.map(|z| format!("{z:.3}")).unwrap_or_default();
    println!("dividend integral {} (se {:.3e}, z {})", div.mean, div.std_error, z(div.z));
    println!("Feynman-Kac {} vs {} (se {:.3e}, z {})", fk.estimate.mean, fk.estimate.analytic.unwrap_or(f64::NAN), fk.estimate.std_error, z(fk.estimate.z));
    println!("wealth residual at y0: {:.3e}", wealth_ode_residual(&eq, y0)?);
    Ok(EXIT_OK)
}

fn verify_all(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let vc = VerifyConfig {
        integrator: cfg.integrator()?,
        xi_tol: cfg.shooting.xi_tol,
        sim: cfg.simulation()?,
        seed: cfg.simulation.seed,
        ..VerifyConfig::default()
    };
    let battery = Battery::new(vc);
    let mut checks = Vec::new();
    for n in radner_core::verify::CRITERIA {
        for c in battery.run(n) {
            println!("{}", c.line());
            checks.push(c);
        }
    }
    let mut w = create(out, "verify.csv")?;
    write_checks(&checks, &mut w)?;
    w.flush()?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    Ok(if all_passed(&checks) { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn sweep(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let sp = cfg.shooting()?;
    let icfg = cfg.integrator()?;
    if cfg.sweep.xis.is_empty() {
        bail!("[sweep] xis is empty");
    }
    let mut long = create(out, "sweep_long.csv")?;
    writeln!(long, "xi,y,h")?;
    for &xi in &cfg.sweep.xis {
        let o = integrate(&sp.with_xi(xi).context("[sweep]")?, &icfg)?;
        let g = o.grid();
        let mut w = create(out, &format!("sweep_xi_{xi}.csv"))?;
        g.write_csv(&mut w)?;
        w.flush()?;
        for p in g.points() {
            writeln!(long, "{xi},{},{}", fmt17(p.y), fmt17(p.h))?;
        }
        println!("xi={xi}: {}", outcome_label(&o));
    }
    long.flush()?;
    Ok(EXIT_OK)
}
