//! Command-line front end: `run` simulates a configuration and emits CSV
//! files, `linear` evaluates the closed-form solution of the linearized
//! system for the same configuration format, `verify` executes the property
//! suites. Exit codes: 0 success, 1 configuration error, 2 runtime domain
//! error, 3 verification failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use urel::config::{parse_config, RunConfig};
use urel::diagnostics::{
    default_window, detect_shock, energy_balance, entropy_production, self_similarity_error,
    shock_admissible, shock_arrival_time, track_shock,
};
use urel::linear::LinearSolution;
use urel::output::{emit_linear_profile, emit_snapshot, emit_spacetime_grid};
use urel::scheme::{run, RunOptions, SimulationResult};
use urel::verify::run_suite;
use urel::{Result, UrelError};

#[derive(Parser)]
#[command(
    name = "urel",
    version,
    about = "Finite-volume simulator for radially symmetric ultra-relativistic flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory the emitted files go to.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Retain the level history in memory (implied by emit_spacetime).
    #[arg(long, global = true)]
    keep_history: bool,
    /// Stride for history retention and the space-time dump.
    #[arg(long, global = true, default_value_t = 1)]
    decimation: usize,
    /// Worker threads; 0 uses all cores, 1 runs sequentially.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a configuration file and emit its outputs.
    Run { config: PathBuf },
    /// Evaluate the linearized closed-form solution of a configuration.
    Linear { config: PathBuf },
    /// Execute a property suite: lemmas, stationary, linear or all.
    Verify { suite: String },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(&cli));
}

fn report(code: i32, e: &UrelError) -> i32 {
    eprintln!("error: {e}");
    code
}

fn dispatch(cli: &Cli) -> i32 {
    if cli.threads > 1 {
        // a failure here means a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match &cli.command {
        Command::Run { config } => {
            let cfg = match load_config(config) {
                Ok(cfg) => cfg,
                Err(e) => return report(1, &e),
            };
            match cmd_run(cli, &cfg) {
                Ok(()) => 0,
                Err(e) => report(2, &e),
            }
        }
        Command::Linear { config } => {
            let cfg = match load_config(config) {
                Ok(cfg) => cfg,
                Err(e) => return report(1, &e),
            };
            match cmd_linear(cli, &cfg) {
                Ok(()) => 0,
                Err(e) => report(2, &e),
            }
        }
        Command::Verify { suite } => cmd_verify(suite),
    }
}

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| UrelError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn cmd_run(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let options = RunOptions {
        snapshot_times: cfg.snapshot_times.clone(),
        keep_history: cli.keep_history || cfg.emit_spacetime,
        decimation: cli.decimation,
        parallel: cli.threads != 1,
    };
    let result = run(|x| Ok(cfg.data.sample(x)), &grid, &options)?;
    fs::create_dir_all(&cli.out_dir)?;
    if cfg.emit_snapshots {
        for (k, snap) in result.snapshots.iter().enumerate() {
            let name = format!("snapshot_{k:02}.csv");
            emit_snapshot(snap, &cli.out_dir.join(&name))?;
            println!("wrote {name}");
        }
    }
    if cfg.emit_spacetime {
        let (p, v) = emit_spacetime_grid(&result, cli.decimation, &cli.out_dir)?;
        for path in [p, v] {
            println!("wrote {}", file_name(&path));
        }
    }
    if cfg.emit_diagnostics {
        let text = diagnostics_report(&result, &options)?;
        fs::write(cli.out_dir.join("diagnostics.txt"), text)?;
        println!("wrote diagnostics.txt");
    }
    Ok(())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Post-processing summary. Each analysis is reported on its own line;
/// analyses that do not apply to the run state why instead of failing it.
fn diagnostics_report(result: &SimulationResult, options: &RunOptions) -> Result<String> {
    let grid = &result.grid;
    let mut out = String::new();
    let w = &mut out;
    writeln!(
        w,
        "grid: t_star={} x_star={} n={} m={} dt={:.6e} dx={:.6e} lambda={}",
        grid.t_star, grid.x_star, grid.n, grid.m, grid.dt, grid.dx, grid.lambda
    )
    .expect("writing to a string cannot fail");
    let stats = &result.stats;
    writeln!(
        w,
        "run: updates={} min_cone_margin={:.6e} boundary_b_exact_zero={}",
        stats.updates, stats.min_cone_margin, stats.boundary_b_exact_zero
    )
    .expect("writing to a string cannot fail");

    for (k, snap) in result.snapshots.iter().enumerate() {
        match detect_shock(snap, default_window(snap)) {
            Ok(x) => {
                let idx = snap.positions.partition_point(|&p| p < x);
                let (lo, hi) = (idx.saturating_sub(1), idx.min(snap.states.len() - 1));
                let adm = shock_admissible(&snap.states[lo], &snap.states[hi])?;
                writeln!(w, "snapshot {k:02} t={:.6e}: shock at x={x:.6e} admissible={adm}", snap.time)
            }
            Err(e) => writeln!(w, "snapshot {k:02} t={:.6e}: {e}", snap.time),
        }
        .expect("writing to a string cannot fail");
    }

    if result.snapshots.len() >= 5 {
        let first = &result.snapshots[0];
        match track_shock(&result.snapshots, default_window(first), 20.0 * grid.dx) {
            Ok(track) => {
                write!(
                    w,
                    "track: points={} fitted_speed={:.6e} fit_residual={:.6e}",
                    track.times.len(),
                    track.fitted_speed,
                    track.fit_residual
                )
                .expect("writing to a string cannot fail");
                match shock_arrival_time(&track, grid.dx) {
                    Ok(t) => writeln!(w, " arrival={t:.6e}"),
                    Err(e) => writeln!(w, " arrival: {e}"),
                }
                .expect("writing to a string cannot fail");
            }
            Err(e) => writeln!(w, "track: {e}").expect("writing to a string cannot fail"),
        }
    } else {
        writeln!(w, "track: needs at least 5 snapshots, have {}", result.snapshots.len())
            .expect("writing to a string cannot fail");
    }

    let positive: Vec<_> = result.snapshots.iter().filter(|s| s.time > 0.0).collect();
    if positive.len() >= 2 {
        let (first, last) = (positive[0], positive[positive.len() - 1]);
        match self_similarity_error(first, last) {
            Ok(gap) => writeln!(
                w,
                "similarity t={:.6e} vs t={:.6e}: pressure_gap={:.6e} velocity_gap={:.6e}",
                first.time, last.time, gap.pressure, gap.velocity
            ),
            Err(e) => writeln!(w, "similarity: {e}"),
        }
        .expect("writing to a string cannot fail");
    }

    if options.keep_history {
        let radius = grid.x_star / 2.0;
        match energy_balance(result, radius) {
            Ok(bal) => writeln!(
                w,
                "energy balance at r={radius:.6e}: normalized_max={:.6e}",
                bal.normalized_max
            ),
            Err(e) => writeln!(w, "energy balance: {e}"),
        }
        .expect("writing to a string cannot fail");
        if result.decimation == 1 {
            let mut min_value = f64::INFINITY;
            let mut max_positive: f64 = 0.0;
            for pair in result.history.windows(2) {
                let rep = entropy_production(&pair[0], &pair[1], grid)?;
                min_value = min_value.min(rep.min_value);
                max_positive = max_positive.max(rep.max_positive);
            }
            writeln!(w, "entropy: min={min_value:.6e} max_positive_excess={max_positive:.6e}")
                .expect("writing to a string cannot fail");
        } else {
            writeln!(w, "entropy: needs decimation 1, have {}", result.decimation)
                .expect("writing to a string cannot fail");
        }
    }
    Ok(out)
}

fn cmd_linear(cli: &Cli, cfg: &RunConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let sol = LinearSolution::new(cfg.data.clone());
    let positions: Vec<f64> = (0..grid.level_len(1)).map(|j| grid.node_position(1, j)).collect();
    fs::create_dir_all(&cli.out_dir)?;
    for (k, &t) in cfg.snapshot_times.iter().enumerate() {
        let mut values = Vec::with_capacity(positions.len());
        for &x in &positions {
            values.push(sol.eval(t, x)?);
        }
        let name = format!("linear_{k:02}.csv");
        emit_linear_profile(t, &positions, &values, &cli.out_dir.join(&name))?;
        println!("wrote {name}");
    }
    Ok(())
}

fn cmd_verify(suite: &str) -> i32 {
    let results = match run_suite(suite) {
        Ok(r) => r,
        Err(e) => return report(1, &e),
    };
    let mut failed = 0;
    for r in &results {
        println!(
            "{} trials={} worst_margin={:.6e} {}",
            r.name,
            r.trials,
            r.worst_margin,
            if r.passed { "PASS" } else { "FAIL" }
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("error: {failed} of {} properties failed", results.len());
        3
    } else {
        0
    }
}
