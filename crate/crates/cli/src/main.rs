mod analyze;
mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use muskat_core::acceptance::{run_suite, SuiteReport, DEFAULT_SEED, SUITES};
use muskat_core::evolution::CurveSnapshot;
use muskat_core::run;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;

/// Spectral contour dynamics for a rising Muskat bubble.
#[derive(Parser, Debug)]
#[command(name = "muskat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the interface described by a TOML config and write trajectory files.
    Simulate {
        config: PathBuf,
    },
    /// Print JSON tables for the linearized operator.
    Analyze(AnalyzeArgs),
    /// Run acceptance suites and report pass/fail per criterion.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    config: PathBuf,
    /// a(k), b(k) and c(1).
    #[arg(long)]
    spectrum: bool,
    /// Residuals and ℓ¹ norms of the diagonalizing transform.
    #[arg(long)]
    transform: bool,
    /// I₁, I₂ closed forms against quadrature.
    #[arg(long)]
    integrals: bool,
    /// Mode count; defaults to solver.n_modes, else 64.
    #[arg(long)]
    modes: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads for independent suites.
    #[arg(long)]
    jobs: Option<usize>,
    /// Directory for per-suite JSON reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
    Criteria(usize),
}

impl Failure {
    fn config(e: impl Into<anyhow::Error>) -> Self {
        Failure::Config(e.into())
    }

    fn solver(e: impl Into<anyhow::Error>) -> Self {
        Failure::Solver(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::Analyze(a) => analyze(&a),
        Command::Verify(v) => verify(&v),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver error: {e:#}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Criteria(n)) => {
            eprintln!("{n} suite(s) failed");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

#[derive(Serialize)]
struct CurveFile<'a> {
    n_modes: usize,
    snapshots: &'a [CurveSnapshot],
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn simulate(path: &Path) -> Result<(), Failure> {
    let cfg = RunConfig::load(path).map_err(Failure::config)?;
    let solver = cfg.solver().map_err(Failure::config)?;
    cfg.initial_theta(solver.n_modes).map_err(Failure::config)?;
    let initial = cfg
        .initial_state(solver.n_modes)
        .context("initial state is not admissible")
        .map_err(Failure::solver)?;

    let outcome = run(&initial, &cfg.params, &solver).map_err(Failure::solver)?;

    let dir = cfg.out_dir();
    let write = || -> Result<()> {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        if cfg.outputs.formats.contains(&Format::Csv) {
            let p = dir.join("trajectory.csv");
            let f = fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?;
            outcome.record.write_csv(f)?;
        }
        if cfg.outputs.formats.contains(&Format::Json) {
            write_json(&dir.join("trajectory.json"), &outcome.record.rows)?;
        }
        write_json(&dir.join("final_state.json"), &outcome.final_state)?;
        if solver.curve_snapshots {
            let curves = CurveFile {
                n_modes: solver.n_modes,
                snapshots: &outcome.record.snapshots,
            };
            write_json(&dir.join("curves.json"), &curves)?;
        }
        Ok(())
    };
    write().map_err(Failure::config)?;

    let last = outcome.record.rows.last();
    eprintln!(
        "wrote {} ({} rows, t = {:.6}, ‖θ‖ = {:.3e})",
        dir.display(),
        outcome.record.rows.len(),
        outcome.final_state.time,
        last.map_or(f64::NAN, |r| r.norm_f121),
    );
    match outcome.error {
        None => Ok(()),
        Some(e) => Err(Failure::solver(anyhow!(e).context(format!(
            "run stopped at t = {}; partial output kept",
            outcome.final_state.time
        )))),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let cfg = RunConfig::load(&a.config).map_err(Failure::config)?;
    let n = a
        .modes
        .or(cfg.solver.as_ref().map(|s| s.n_modes))
        .unwrap_or(64);
    let all = !(a.spectrum || a.transform || a.integrals);
    let mean_angle = cfg.initial.mean_angle;
    let mut out = analyze::Analysis {
        params: Some(cfg.params),
        ..Default::default()
    };
    if all || a.spectrum {
        out.spectrum = Some(analyze::spectrum(&cfg.params, mean_angle, n));
    }
    if all || a.transform {
        out.transform = Some(analyze::transform(&cfg.params, mean_angle, n).map_err(Failure::config)?);
    }
    if all || a.integrals {
        out.integrals = Some(analyze::integrals().map_err(Failure::solver)?);
    }
    let text = serde_json::to_string_pretty(&out).map_err(Failure::solver)?;
    println!("{text}");
    Ok(())
}

fn verify(v: &VerifyArgs) -> Result<(), Failure> {
    let names: Vec<&str> = if v.suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&v.suite.as_str()) {
        vec![v.suite.as_str()]
    } else {
        return Err(Failure::config(anyhow!(
            "unknown suite `{}`; expected one of: all, {}",
            v.suite,
            SUITES.join(", ")
        )));
    };

    let run_all = || -> Vec<SuiteReport> {
        names
            .par_iter()
            .map(|n| run_suite(n, v.seed).expect("name checked above"))
            .collect()
    };
    let reports = match v.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(Failure::config)?
            .install(run_all),
        None => run_all(),
    };

    if let Some(dir) = &v.out {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::config)?;
        for r in &reports {
            let p = dir.join(format!("criterion-{}-{}.json", r.criterion, r.suite));
            fs::write(&p, r.to_json() + "\n")
                .with_context(|| format!("writing {}", p.display()))
                .map_err(Failure::config)?;
        }
    }

    let mut failed = 0;
    for r in &reports {
        println!("{}", r.summary_line());
        for c in &r.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            println!("    {mark} {} = {:e} ({})", c.label, c.value, c.bound);
        }
        if !r.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        Err(Failure::Criteria(failed))
    } else {
        Ok(())
    }
}
