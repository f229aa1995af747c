use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chemospread::experiments::{
    boundedness_check, chi_sweep, envelope_check, gradient_coercivity_check, spreading_check,
    spreading_initial, stability_check, stability_initial, ExperimentError, ExperimentReport,
    RunSettings,
};
use chemospread::io::{
    load_config, output_root, prepare_run_dir, write_series, write_snapshot, Config, Kind,
};
use chemospread::regime::{classify, render_report, Unmet};
use chemospread::selftest;
use chemospread::stepper::{run, Diagnostics, RunConfig, RunMode, SchemeError, SimState};

const PASS: u8 = 0;
const FAILED: u8 = 1;
const CONFIG: u8 = 2;
const NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "chemospread",
    version,
    about = "Chemotaxis spreading-speed simulator and threshold calculator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print thresholds, hypotheses and speed bounds for a config.
    Regime { config: PathBuf },
    /// Run the simulation and write the time series and snapshots.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a snapshot at every k-th output time.
        #[arg(long, default_value_t = 10)]
        snapshot_every: usize,
        /// Allow parameters without guaranteed global existence; stop at blow-up.
        #[arg(long)]
        watch: bool,
    },
    /// Measure the spreading speed and check it against the bounds.
    Speed {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Repeat on a grid with half the spacing and require agreement.
        #[arg(long)]
        refine: bool,
    },
    /// Check convergence to the constant equilibrium from positive data.
    Stability {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spreading speed for scaled sensitivities (χ1, χ2).
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25, 0.0])]
        scales: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in closed-form checks.
    Selftest,
}

fn fail(code: u8, msg: impl Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn experiment_exit(e: &ExperimentError) -> ExitCode {
    let code = if e.is_numerical() { NUMERICAL } else { CONFIG };
    fail(code, e)
}

fn load(path: &Path) -> Result<Config, ExitCode> {
    load_config(path).map_err(|e| fail(CONFIG, e))
}

fn settings(cfg: &Config) -> RunSettings {
    RunSettings {
        scheme: cfg.scheme(),
        output_dt: cfg.scheme.output_dt,
    }
}

fn run_dir(out: Option<&Path>, cfg: &Config, label: &str) -> Result<PathBuf, ExitCode> {
    prepare_run_dir(&output_root(out), cfg, label).map_err(|e| fail(NUMERICAL, e))
}

fn save_report(dir: &Path, report: &mut ExperimentReport) -> Result<(), ExitCode> {
    let series = dir.join("series.csv");
    write_series(&series, &report.series).map_err(|e| fail(NUMERICAL, e))?;
    report.artifacts.push(series);
    let path = dir.join(format!("{}.txt", report.name));
    report.artifacts.push(path.clone());
    fs::write(&path, report.to_string())
        .map_err(|e| fail(NUMERICAL, format!("{}: {e}", path.display())))
}

fn verdict(passed: bool) -> ExitCode {
    ExitCode::from(if passed { PASS } else { FAILED })
}

fn cmd_regime(config: &Path) -> Result<ExitCode, ExitCode> {
    let cfg = load(config)?;
    print!("{}", render_report(&cfg.params()));
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    config: &Path,
    out: Option<&Path>,
    every: usize,
    watch: bool,
) -> Result<ExitCode, ExitCode> {
    let cfg = load(config)?;
    let p = cfg.params();
    let grid = cfg.grid();
    if !watch && !classify(&p).global_existence {
        return Err(fail(CONFIG, Unmet::GlobalExistence));
    }
    let (init, mode) = match cfg.experiment.kind {
        Kind::Spreading | Kind::Envelope => (spreading_initial(&p), RunMode::Spreading),
        Kind::Stability | Kind::Boundedness => {
            let floor = 0.3 * if p.b > 0.0 { p.a / p.b } else { 1.0 };
            (stability_initial(&p, grid, floor), RunMode::Normal)
        }
    };
    let mode = if watch { RunMode::BlowupWatch } else { mode };
    let u0 = chemospread::grid::make_initial(grid, init).map_err(|e| fail(CONFIG, e))?;
    let dir = run_dir(out, &cfg, "simulate")?;
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(|e| fail(NUMERICAL, format!("{}: {e}", snaps.display())))?;

    let every = every.max(1);
    let mut k = 0usize;
    let mut write_err = None;
    let mut snap = |s: &SimState, _: &Diagnostics| {
        if k.is_multiple_of(every) {
            let path = snaps.join(format!("u_{k:05}.txt"));
            if let Err(e) = write_snapshot(&path, s.u(), s.t()) {
                write_err.get_or_insert(e);
            }
        }
        k += 1;
    };
    let mut rc = RunConfig::new(cfg.experiment.t_end, cfg.scheme.output_dt).mode(mode);
    if p.b > 0.0 {
        rc = rc.front_level(p.a / (2.0 * p.b));
    }
    let result = run(&p, u0, cfg.scheme(), rc, &mut [&mut snap]);
    if let Some(e) = write_err {
        return Err(fail(NUMERICAL, e));
    }
    let output = match result {
        Ok(o) => o,
        Err(e @ SchemeError::Hypothesis) => return Err(fail(CONFIG, e)),
        Err(e) => return Err(fail(NUMERICAL, e)),
    };
    let series = dir.join("series.csv");
    write_series(&series, &output.series).map_err(|e| fail(NUMERICAL, e))?;
    write_snapshot(&dir.join("final.txt"), output.state.u(), output.state.t())
        .map_err(|e| fail(NUMERICAL, e))?;
    println!("run_dir={}", dir.display());
    println!("t={}", output.state.t());
    println!("steps={}", output.state.step_count());
    println!("max_sup_u={}", output.max_sup_u);
    if let Some(t) = output.blowup_time {
        println!("blowup_time={t}");
        return Ok(ExitCode::from(NUMERICAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_speed(config: &Path, out: Option<&Path>, refine: bool) -> Result<ExitCode, ExitCode> {
    let cfg = load(config)?;
    let p = cfg.params();
    let grid = cfg.grid();
    let outcome = spreading_check(
        &p,
        grid,
        spreading_initial(&p),
        cfg.experiment.t_end,
        &cfg.experiment.probes,
        refine,
        settings(&cfg),
    )
    .map_err(|e| experiment_exit(&e))?;
    let mut report = outcome.report;
    let mut drift = gradient_coercivity_check(&p, &outcome.samples, grid.dx());
    let dir = run_dir(out, &cfg, "speed")?;
    save_report(&dir, &mut report)?;
    let path = dir.join(format!("{}.txt", drift.name));
    fs::write(&path, drift.to_string()).map_err(|e| fail(NUMERICAL, e))?;
    drift.artifacts.push(path);
    print!("{report}");
    print!("{drift}");

    let mut passed = report.passed && drift.passed;
    if grid.dim() == 1 {
        let mut env = envelope_check(
            &p,
            grid,
            spreading_initial(&p),
            cfg.experiment.t_end,
            settings(&cfg),
        )
        .map_err(|e| experiment_exit(&e))?;
        env.series.clear();
        let path = dir.join(format!("{}.txt", env.name));
        env.artifacts.push(path.clone());
        fs::write(&path, env.to_string()).map_err(|e| fail(NUMERICAL, e))?;
        print!("{env}");
        passed &= env.passed;
    }
    Ok(verdict(passed))
}

fn cmd_stability(config: &Path, out: Option<&Path>) -> Result<ExitCode, ExitCode> {
    let cfg = load(config)?;
    let p = cfg.params();
    let floor = 0.3 * if p.b > 0.0 { p.a / p.b } else { 1.0 };
    let mut report = stability_check(&p, cfg.grid(), floor, cfg.experiment.t_end, settings(&cfg))
        .map_err(|e| experiment_exit(&e))?;
    let bounded = boundedness_check(
        &p,
        cfg.grid(),
        stability_initial(&p, cfg.grid(), floor),
        cfg.experiment.t_end,
        settings(&cfg),
    )
    .map_err(|e| experiment_exit(&e))?;
    let dir = run_dir(out, &cfg, "stability")?;
    save_report(&dir, &mut report)?;
    print!("{report}");
    println!("boundedness_passed={}", bounded.passed);
    Ok(verdict(report.passed && bounded.passed))
}

fn cmd_sweep(config: &Path, scales: &[f64], out: Option<&Path>) -> Result<ExitCode, ExitCode> {
    let cfg = load(config)?;
    let table = chi_sweep(
        &cfg.params(),
        scales,
        cfg.grid(),
        cfg.experiment.t_end,
        settings(&cfg),
    );
    let dir = run_dir(out, &cfg, "sweep")?;
    let path = dir.join("sweep.txt");
    fs::write(&path, table.to_string())
        .map_err(|e| fail(NUMERICAL, format!("{}: {e}", path.display())))?;
    println!("{table}");
    for row in &table.rows {
        if let Some(n) = &row.note {
            println!("note.scale={}={n}", row.scale);
        }
    }
    Ok(verdict(table.passed))
}

fn cmd_selftest() -> ExitCode {
    let checks = selftest::run_all();
    let mut ok = true;
    for c in &checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
        ok &= c.passed;
    }
    verdict(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Regime { config } => cmd_regime(config),
        Command::Simulate {
            config,
            out,
            snapshot_every,
            watch,
        } => cmd_simulate(config, out.as_deref(), *snapshot_every, *watch),
        Command::Speed {
            config,
            out,
            refine,
        } => cmd_speed(config, out.as_deref(), *refine),
        Command::Stability { config, out } => cmd_stability(config, out.as_deref()),
        Command::Sweep {
            config,
            scales,
            out,
        } => cmd_sweep(config, scales, out.as_deref()),
        Command::Selftest => Ok(cmd_selftest()),
    };
    result.unwrap_or_else(|code| code)
}
