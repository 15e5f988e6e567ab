//! Command-line front end: full runs, time-refinement studies, energy
//! audits and the deformed-domain gradient-equality check.
//!
//! Exit codes: 0 success, 2 configuration error, 3 degeneracy halt,
//! 4 audit failure, 5 solver failure.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use fsi2d::driver::{RunConfig, RunResult, Simulation};
use fsi2d::energy::per_step_audit_failures;
use fsi2d::error::Error;
use fsi2d::io::{config_hash, parse_config, write_archive, ParsedConfig};
use fsi2d::verify::{
    interpolant_check, korn_check, korn_mismatch, temporal_self_convergence, v_vstar_gap_rate,
    ManufacturedField, WallShape,
};

#[derive(Parser)]
#[command(name = "fsi2d", version, about = "2D channel flow coupled to a two-layer elastic wall")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full simulation and write the ledger and snapshot archive.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "fsi2d_out")]
        out: PathBuf,
    },
    /// Run the same configuration at N, 2N, ..., 2^(levels-1) N steps and
    /// report interface-gap decay and self-convergence orders.
    ConvergenceStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value = "fsi2d_out")]
        out: PathBuf,
    },
    /// Run and evaluate every per-step and run-level energy check;
    /// nonzero exit on any failure.
    EnergyAudit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate the gradient-energy equality for the manufactured fields.
    KornCheck {
        /// Wall shape: zero, bump or rough. Default: all three.
        #[arg(long)]
        eta: Option<String>,
    },
}

fn load(config: &PathBuf) -> Result<ParsedConfig, Error> {
    let text = std::fs::read_to_string(config)?;
    parse_config(&text)
}

fn report_halt(res: &RunResult) -> bool {
    if let Some(h) = res.halt {
        println!(
            "degeneracy halt: wall reached the radius guard {:.3e} at t = {:.9e} (z = {:.6e}, radius = {:.6e})",
            h.guard, h.time, h.z, h.radius
        );
        true
    } else {
        false
    }
}

fn cmd_run(config: PathBuf, out: PathBuf) -> Result<i32, Error> {
    let parsed = load(&config)?;
    let hash = config_hash(&parsed);
    let sim = Simulation::new(parsed.run.clone())?;
    let res = sim.run()?;
    write_archive(&res, &sim, &out, &parsed.output, &hash)?;
    println!(
        "wrote {} ledger rows and {} snapshots to {}",
        res.ledger.rows().len(),
        res.snapshots.len(),
        out.display()
    );
    if report_halt(&res) {
        return Ok(3);
    }
    Ok(0)
}

fn refined(cfg: &RunConfig, factor: usize) -> RunConfig {
    let mut c = cfg.clone();
    c.n_steps = cfg.n_steps * factor;
    c.snapshot_every = 1;
    c
}

fn cmd_convergence(config: PathBuf, levels: usize, out: PathBuf) -> Result<i32, Error> {
    if levels < 3 {
        return Err(Error::config(format!(
            "convergence-study needs --levels >= 3, got {levels}"
        )));
    }
    let parsed = load(&config)?;
    let mut results: Vec<RunResult> = Vec::new();
    let mut sims: Vec<Simulation> = Vec::new();
    for level in 0..levels {
        let cfg = refined(&parsed.run, 1 << level);
        let sim = Simulation::new(cfg)?;
        let res = sim.run()?;
        if report_halt(&res) {
            return Ok(3);
        }
        println!(
            "level {level}: N = {}, dt = {:.6e}, max E = {:.9e}",
            res.config.n_steps,
            res.config.dt(),
            res.ledger.max_energy()
        );
        results.push(res);
        sims.push(sim);
    }
    let refs: Vec<&RunResult> = results.iter().collect();
    let gap = v_vstar_gap_rate(&refs)?;
    let mut report = String::from("level,n_steps,dt,v_vstar_gap\n");
    for (level, (dt, g)) in gap.measurements.iter().enumerate() {
        report.push_str(&format!(
            "{level},{},{dt:.16e},{g:.16e}\n",
            parsed.run.n_steps << level
        ));
    }
    println!(
        "interface velocity gap decay slope: {}",
        gap.slope
            .map(|s| format!("{s:.3}"))
            .unwrap_or_else(|| "exact (all gaps zero)".into())
    );
    let sc = temporal_self_convergence(&sims[0], &results[0], &results[1], &results[2])?;
    for line in sc.summary_lines() {
        println!("{line}");
    }
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("convergence_report.csv"), report)?;
    println!("wrote {}", out.join("convergence_report.csv").display());
    Ok(0)
}

fn cmd_energy_audit(config: PathBuf) -> Result<i32, Error> {
    let parsed = load(&config)?;
    let sim = Simulation::new(parsed.run.clone())?;
    let res = sim.run()?;
    let mut failed = false;

    let per_step = per_step_audit_failures(&res.ledger, parsed.run.weights.mu);
    println!(
        "per-step balances: {} rows, {} violations [{}]",
        res.ledger.rows().len(),
        per_step.len(),
        if per_step.is_empty() { "pass" } else { "FAIL" }
    );
    for f in per_step.iter().take(10) {
        println!("  {f}");
    }
    failed |= !per_step.is_empty();

    let report = res.uniform_bound_report();
    for line in report.summary_lines() {
        println!("{line}");
    }
    failed |= !report.pass;

    if parsed.run.snapshot_every == 1 {
        let interp = interpolant_check(&sim, &res)?;
        for line in interp.summary_lines() {
            println!("interpolant {line}");
        }
        failed |= !interp.all_hold;
    }

    if report_halt(&res) {
        return Ok(3);
    }
    if failed {
        println!("energy audit: FAIL");
        return Ok(4);
    }
    println!("energy audit: pass");
    Ok(0)
}

fn cmd_korn(eta: Option<String>) -> Result<i32, Error> {
    let shapes: Vec<(String, WallShape)> = match eta {
        Some(name) => vec![(name.clone(), WallShape::parse(&name)?)],
        None => vec![
            ("zero".into(), WallShape::parse("zero")?),
            ("bump".into(), WallShape::parse("bump")?),
            ("rough".into(), WallShape::parse("rough")?),
        ],
    };
    let mut worst: f64 = 0.0;
    for (name, shape) in &shapes {
        for field in ManufacturedField::library() {
            let rep = korn_check(shape, &field, 32)?;
            println!(
                "shape {name:>5} field {:>18}: 2|D|^2 = {:.12e}, |grad|^2 = {:.12e}, mismatch = {:.3e}",
                field.name, rep.twice_sym, rep.grad, rep.mismatch
            );
            worst = worst.max(rep.mismatch);
        }
    }
    let control = korn_mismatch(&shapes[0].1, &ManufacturedField::slip_control(), 32);
    println!(
        "negative control (wall slip): mismatch = {:.3e} (must be large)",
        control.mismatch
    );
    if worst > 1e-8 || control.mismatch < 1e-2 {
        println!("gradient-equality check: FAIL");
        return Ok(4);
    }
    println!("gradient-equality check: pass (worst mismatch {worst:.3e})");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => cmd_run(config, out),
        Command::ConvergenceStudy {
            config,
            levels,
            out,
        } => cmd_convergence(config, levels, out),
        Command::EnergyAudit { config } => cmd_energy_audit(config),
        Command::KornCheck { eta } => cmd_korn(eta),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
