//! Command-line front end.

pub mod config;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::harness::{run_convergence_study, run_order_sweep, run_single, ConvergenceReport, RowStatus};
use crate::stencil::{SchemeSpec, StencilKind};
use crate::vonneumann::{classify_stability, DEFAULT_GROWTH_CONSTANT, DEFAULT_SAMPLES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;
pub const EXIT_DISAGREEMENT: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "dispersive-fd", version, about = "θ-schemes for ∂ₜu + ∂ₓ^(2p+1)u = 0 on a periodic grid")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one datum on the first resolution of J_list and write the final state.
    Run {
        config: PathBuf,
        /// Override a config entry, e.g. `--set theta=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Compare the sampled amplification factor with the closed-form stability predicate.
    Stability {
        /// forward, backward or central.
        #[arg(long)]
        kind: StencilKind,
        /// Equation order index: the derivative is of order 2p+1.
        #[arg(long)]
        p: u32,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        dx: f64,
        /// Number of frequencies sampled in [0, 1).
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// C in the allowance max|A| ≤ 1 + C·dt.
        #[arg(long, default_value_t = DEFAULT_GROWTH_CONSTANT)]
        growth_constant: f64,
    },
    /// Run a convergence study (or an order sweep) and write CSV and SVG reports.
    Convergence {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the built-in identity and oracle checks.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyLevel::Fast)]
        level: VerifyLevel,
        #[arg(long, hide = true)]
        tamper_stencil: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyLevel {
    Fast,
    Full,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run { config, overrides } => cmd_run(&config, &overrides),
        Command::Stability {
            kind,
            p,
            theta,
            dt,
            dx,
            samples,
            growth_constant,
        } => cmd_stability(kind, p, theta, dt, dx, samples, growth_constant),
        Command::Convergence { config, overrides } => cmd_convergence(&config, &overrides),
        Command::Verify {
            level,
            tamper_stencil,
        } => cmd_verify(level, tamper_stencil),
    }
}

fn fail(code: i32, message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    code
}

fn library_failure(e: Error) -> i32 {
    match e {
        Error::BlowUp { .. } => fail(EXIT_BLOW_UP, e),
        _ => fail(EXIT_CONFIG, e),
    }
}

fn prepare_output(dir: &Path) -> Result<(), i32> {
    std::fs::create_dir_all(dir)
        .map_err(|e| fail(EXIT_CONFIG, format!("cannot create {}: {e}", dir.display())))
}

pub fn cmd_run(config_path: &Path, overrides: &[String]) -> i32 {
    let cfg = match config::load(config_path, overrides) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Err(code) = prepare_output(&cfg.output_dir) {
        return code;
    }
    let clock = Instant::now();
    let (grid, state) = match run_single(&cfg.experiment) {
        Ok(out) => out,
        Err(e) => return library_failure(e),
    };
    let csv_path = cfg.output_dir.join("final_state.csv");
    let svg_path = cfg.output_dir.join("final_state.svg");
    if let Err(e) = report::write_final_state_csv(&csv_path, &grid, &state)
        .and_then(|_| report::write_profile_svg(&svg_path, &grid, &state))
    {
        return fail(EXIT_CONFIG, format!("cannot write output: {e}"));
    }
    println!(
        "J = {}, dt = {}, steps = {}, wall-clock {:.3} s",
        grid.cell_count(),
        report::sig6(grid.dt()),
        grid.step_count(),
        clock.elapsed().as_secs_f64()
    );
    println!("wrote {} and {}", csv_path.display(), svg_path.display());
    EXIT_OK
}

pub fn cmd_stability(
    kind: StencilKind,
    p: u32,
    theta: f64,
    dt: f64,
    dx: f64,
    samples: usize,
    growth_constant: f64,
) -> i32 {
    let report = SchemeSpec::new(kind, p, theta)
        .and_then(|s| classify_stability(&s, dt, dx, growth_constant, samples));
    let report = match report {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    println!("{:<12} {:<12} {:<10} {:<10}", "kind", "max|A|", "sampled", "predicted");
    println!(
        "{:<12} {:<12} {:<10} {:<10}",
        kind.name(),
        report::sig6(report.max_magnitude),
        report.sampled.to_string(),
        report.predicted.to_string()
    );
    if report.agrees() {
        EXIT_OK
    } else {
        fail(EXIT_DISAGREEMENT, "sampled and predicted verdicts disagree")
    }
}

fn print_report(report: &ConvergenceReport) {
    println!(
        "{:>8} {:>12} {:>12} {:>10} {:>10} {:>10}",
        "J", "dx", "l2_error", "order", "theory", "seconds"
    );
    for row in &report.rows {
        println!(
            "{:>8} {:>12} {:>12} {:>10} {:>10} {:>10.3}",
            row.cells,
            report::sig6(row.dx),
            row.l2_error.map(report::sig6).unwrap_or_else(|| row.status.to_string()),
            row.observed_order.map(|o| format!("{o:.4}")).unwrap_or_default(),
            format!("{:.4}", report.theoretical_order),
            row.wall_clock.as_secs_f64()
        );
    }
}

fn any_unstable(report: &ConvergenceReport) -> bool {
    report
        .rows
        .iter()
        .any(|r| matches!(r.status, RowStatus::Unstable { .. }))
}

pub fn cmd_convergence(config_path: &Path, overrides: &[String]) -> i32 {
    let cfg = match config::load(config_path, overrides) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if let Err(code) = prepare_output(&cfg.output_dir) {
        return code;
    }
    let dir = &cfg.output_dir;
    let reports: Vec<ConvergenceReport> = if cfg.sweep.is_empty() {
        let report = match run_convergence_study(&cfg.experiment) {
            Ok(r) => r,
            Err(e) => return library_failure(e),
        };
        let written = report::write_convergence_csv(&dir.join("convergence.csv"), &report)
            .and_then(|_| report::write_convergence_svg(&dir.join("convergence.svg"), &report));
        if let Err(e) = written {
            return fail(EXIT_CONFIG, format!("cannot write output: {e}"));
        }
        vec![report]
    } else {
        let points = match run_order_sweep(cfg.experiment.p, &cfg.sweep, &cfg.experiment) {
            Ok(p) => p,
            Err(e) => return library_failure(e),
        };
        let mut written = report::write_sweep_summary_csv(&dir.join("sweep_summary.csv"), &points)
            .and_then(|_| report::write_sweep_svg(&dir.join("sweep.svg"), &points));
        for pt in &points {
            let stem = format!("convergence_m{}", pt.m);
            written = written
                .and_then(|_| report::write_convergence_csv(&dir.join(format!("{stem}.csv")), &pt.report))
                .and_then(|_| report::write_convergence_svg(&dir.join(format!("{stem}.svg")), &pt.report));
        }
        if let Err(e) = written {
            return fail(EXIT_CONFIG, format!("cannot write output: {e}"));
        }
        points.into_iter().map(|p| p.report).collect()
    };
    for r in &reports {
        println!("datum {} (m = {})", r.config.datum.name(), r.config.datum.regularity());
        print_report(r);
    }
    println!("reports written to {}", dir.display());
    if reports.iter().any(any_unstable) {
        return fail(EXIT_BLOW_UP, "blow-up in at least one resolution (rows flagged unstable)");
    }
    EXIT_OK
}

pub fn cmd_verify(level: VerifyLevel, tamper_stencil: bool) -> i32 {
    let level = match level {
        VerifyLevel::Fast => verify::Level::Fast,
        VerifyLevel::Full => verify::Level::Full,
    };
    let tamper = tamper_stencil.then_some(verify::bump_first_weight as verify::Tamper);
    let clock = Instant::now();
    let outcomes = verify::run(level, tamper);
    for o in &outcomes {
        println!(
            "{:<16} {:<5} {}",
            o.name,
            if o.passed { "pass" } else { "FAIL" },
            o.detail
        );
    }
    println!("{:.2} s", clock.elapsed().as_secs_f64());
    match outcomes.iter().find(|o| !o.passed) {
        Some(o) => fail(EXIT_VERIFY, format!("verification failed: {}", o.name)),
        None => EXIT_OK,
    }
}
