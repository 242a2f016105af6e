//! `mmps`: command-line front end of the magneto-micropolar solver.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmp_core::estimates::gn_probe;
use mmp_core::experiments::{
    audit, convergence_study, load_trajectory, save_trajectory, schauder_fixed_point, simulate,
    stokes_selftest, table_csv, uniqueness_probe, write_snapshot, FieldErrors, RunConfig,
};
use mmp_core::{BoundaryMode, Error, GridSpec, State};

#[derive(Parser)]
#[command(
    name = "mmps",
    version,
    about = "2D magneto-micropolar solver and estimate audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (`section.key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, default_value = "mmps-out")]
    out: PathBuf,
    /// Override `init.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the coupled solver and store the trajectory.
    Simulate(Common),
    /// Fixed-point construction of the micro-rotation.
    Schauder(Common),
    /// Continuous dependence on the initial data.
    Uniqueness(Common),
    /// Manufactured-solution refinement study.
    Convergence(Common),
    /// Direct versus iterative Stokes solves and the regularity probe.
    StokesSelftest(Common),
    /// Empirical Gagliardo-Nirenberg constants.
    GnProbe(Common),
    /// Re-run the estimate ledgers on a stored trajectory.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Trajectory directory written by `simulate`; defaults to `--out`.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Passed,
    Failed,
}

fn load_config(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write(out: &Path, name: &str, text: &str) -> Result<(), Error> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), text)?;
    Ok(())
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Passed
    } else {
        Outcome::Failed
    }
}

fn run_simulate(c: &Common) -> Result<Outcome, Error> {
    let cfg = load_config(c)?;
    match simulate(&cfg) {
        Ok(traj) => {
            save_trajectory(&c.out, &cfg, &traj)?;
            let last = traj.records.last().expect("initial record");
            println!(
                "simulated {} steps to t = {}; energy {:e}; wrote {}",
                traj.steps(),
                last.t,
                last.energy(),
                c.out.display()
            );
            Ok(Outcome::Passed)
        }
        Err(failure) => {
            save_trajectory(&c.out, &cfg, &failure.partial)?;
            eprintln!(
                "run failed: {failure}; partial trajectory written to {}",
                c.out.display()
            );
            Ok(Outcome::Failed)
        }
    }
}

fn run_schauder(c: &Common) -> Result<Outcome, Error> {
    let cfg = load_config(c)?;
    let r = match schauder_fixed_point(&cfg) {
        Ok(r) => r,
        Err(Error::Experiment(msg)) => {
            eprintln!("{msg}");
            return Ok(Outcome::Failed);
        }
        Err(e) => return Err(e),
    };
    let mut rows = Vec::new();
    for (a, att) in r.attempts.iter().enumerate() {
        for (k, (d, n)) in att.increments.iter().zip(&att.iterate_norms).enumerate() {
            rows.push(vec![a as f64, att.t_end, (k + 1) as f64, *d, *n]);
        }
    }
    write(
        &c.out,
        "schauder.csv",
        &table_csv(
            &["attempt", "t_end", "iteration", "increment", "iterate_norm"],
            &rows,
        ),
    )?;
    let w_star = r.fixed_point.last().expect("fixed point");
    let grid = *w_star.grid();
    let mut s = State::zeros(grid);
    s.t = r.t_end();
    s.w = w_star.clone();
    write_snapshot(&c.out.join("fixed_point.mmps"), &s)?;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "T = {} after {} halvings, {} iterations, eps = {}",
        r.t_end(),
        r.halvings(),
        r.iterations,
        r.eps
    );
    let _ = writeln!(
        summary,
        "contraction ratios {:?}",
        r.final_attempt().ratios()
    );
    let _ = writeln!(
        summary,
        "|w* - w_coupled|_2 = {:e}, self-convergence scale {:e}",
        r.coupled_l2, r.self_convergence_l2
    );
    let a = r.a_bound;
    let _ = writeln!(
        summary,
        "a-bound: lhs {:e}, data {:e}, drive {:e}, implied constant {:e}",
        a.lhs, a.data, a.drive, a.implied_constant
    );
    print!("{summary}");
    write(&c.out, "schauder.txt", &summary)?;
    Ok(verdict(r.contracts()))
}

fn run_uniqueness(c: &Common) -> Result<Outcome, Error> {
    let cfg = load_config(c)?;
    let r = uniqueness_probe(&cfg, cfg.delta)?;
    let ratios = r.ratios();
    let rows: Vec<Vec<f64>> = (0..r.t.len())
        .map(|k| vec![r.t[k], r.d[k], r.d_half[k], ratios[k]])
        .collect();
    write(
        &c.out,
        "uniqueness.csv",
        &table_csv(&["t", "d", "d_half", "ratio"], &rows),
    )?;
    let in_band = ratios.iter().all(|q| (3.5..=4.5).contains(q));
    println!(
        "delta = {:e}; max D = {:e}; growth rate {:?}; ratio band [3.5, 4.5] {}",
        r.delta,
        r.d.iter().copied().fold(0.0, f64::max),
        r.growth_rate,
        if r.delta == 0.0 {
            "n/a"
        } else if in_band {
            "held"
        } else {
            "VIOLATED"
        }
    );
    Ok(verdict(r.delta == 0.0 || in_band))
}

fn run_convergence(c: &Common) -> Result<Outcome, Error> {
    let cfg = load_config(c)?;
    let r = convergence_study(&cfg)?;
    let mut cols = vec!["ladder", "size"];
    cols.extend(FieldErrors::COLUMNS);
    let mut rows = Vec::new();
    for (tag, l) in [(0.0, &r.spatial), (1.0, &r.temporal)] {
        for (s, e) in l.sizes.iter().zip(&l.errors) {
            let mut row = vec![tag, *s];
            row.extend(e.0);
            rows.push(row);
        }
    }
    write(&c.out, "convergence.csv", &table_csv(&cols, &rows))?;
    println!("spatial orders  {:?}", r.spatial.orders.0);
    println!("temporal orders {:?}", r.temporal.orders.0);
    println!(
        "convergence {}",
        if r.passes() { "passed" } else { "FAILED" }
    );
    Ok(verdict(r.passes()))
}

fn run_stokes(c: &Common) -> Result<Outcome, Error> {
    let cfg = load_config(c)?;
    let r = stokes_selftest(&cfg)?;
    write(&c.out, "stokes_selftest.csv", &r.csv())?;
    let rows: Vec<Vec<f64>> = r
        .probe
        .levels
        .iter()
        .map(|l| {
            vec![
                l.n as f64,
                l.max_ratio,
                l.max_log_ratio.unwrap_or(f64::NAN),
                l.samples_used as f64,
            ]
        })
        .collect();
    write(
        &c.out,
        "stokes_probe.csv",
        &table_csv(&["n", "max_ratio", "max_log_ratio", "samples"], &rows),
    )?;
    let worst = r.checks.iter().map(|c| c.difference).fold(0.0, f64::max);
    println!(
        "direct vs Uzawa: max relative difference {worst:e}; probe stable {} (log {:?})",
        r.probe.stable, r.probe.log_stable
    );
    println!(
        "stokes self-test {}",
        if r.passed() { "passed" } else { "FAILED" }
    );
    Ok(verdict(r.passed()))
}

fn run_gn(c: &Common) -> Result<Outcome, Error> {
    let cfg = load_config(c)?;
    let grids = cfg
        .probe
        .grids
        .iter()
        .map(|&n| GridSpec::new(n, BoundaryMode::DirichletSquare))
        .collect::<Result<Vec<_>, _>>()?;
    let r = gn_probe(cfg.probe.samples, &grids, cfg.seed)?;
    let rows: Vec<Vec<f64>> = r
        .levels
        .iter()
        .map(|l| {
            let mut row = vec![l.n as f64];
            row.extend(l.max_ratio);
            row.push(l.samples_used as f64);
            row
        })
        .collect();
    write(
        &c.out,
        "gn_probe.csv",
        &table_csv(&["n", "gn1", "gn2", "gn3", "gn4", "samples"], &rows),
    )?;
    println!("stable per inequality {:?}", r.stable);
    Ok(verdict(r.stable.iter().all(|s| *s)))
}

fn run_audit(c: &Common, trajectory: Option<&Path>) -> Result<Outcome, Error> {
    if let Some(p) = &c.config {
        RunConfig::load(p)?;
    }
    let dir = trajectory.unwrap_or(&c.out);
    let (_, traj) = load_trajectory(dir)?;
    let r = audit(&traj)?;
    write(&c.out, "audit.csv", &r.csv())?;
    print!("{}", r.summary());
    Ok(verdict(r.passed()))
}

fn dispatch(cmd: &Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Simulate(c) => run_simulate(c),
        Command::Schauder(c) => run_schauder(c),
        Command::Uniqueness(c) => run_uniqueness(c),
        Command::Convergence(c) => run_convergence(c),
        Command::StokesSelftest(c) => run_stokes(c),
        Command::GnProbe(c) => run_gn(c),
        Command::Audit { common, trajectory } => run_audit(common, trajectory.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(&cli.command) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(
            e @ (Error::Config { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidGrid(_)
            | Error::UnknownRecipe(_)),
        ) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
