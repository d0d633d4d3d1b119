//! Command-line front end: argument parsing, configuration loading and output files.

pub mod config;
pub mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ebclab::dtn::{dtn_mode_multiplier, DtnKind, Height};
use ebclab::fullsolver::{write_snapshots_csv, SolutionSet};
use ebclab::harness::{gnuplot_script, DEFAULT_CSV_NAME};
use ebclab::mesh::RadialMesh;
use ebclab::selftest::{run_selftest, SelftestHooks};
use ebclab::{
    ball_l2_norm, build_mesh, build_two_region_mesh, emit_report, lb_eigenvalue, run_experiment, solve_effective,
    solve_full, SphereGeometry,
};
use serde::Serialize;

pub use config::{LawSpec, RunConfig, SCHEMA_VERSION};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ebclab", version, about = "Thin-layer heat problems on the ball and their effective limits")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write JSON output where a command supports it.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write CSV output where a command supports it.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Worker threads for the per-mode solves.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for the randomized selftest inputs; never affects solver output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the configured law and print the regime cell as JSON.
    Classify,
    /// Tabulate the three DtN multipliers for l = 0..lmax as CSV.
    Dtn {
        #[arg(long)]
        lmax: Option<u32>,
        /// Strip height; `inf` for the half-space operator.
        #[arg(long, allow_hyphen_values = true)]
        height: Option<String>,
        #[arg(long)]
        r1: Option<f64>,
    },
    /// Solve the layered problem; writes per-mode snapshot CSVs and summary.json.
    SolveFull,
    /// Solve the effective problem; writes per-mode snapshot CSVs and summary.json.
    SolveEbc,
    /// Run a convergence study over the configured deltas.
    Converge,
    /// Run the fast invariant suite.
    Selftest {
        /// Test fixture: run the suite against a broken operator.
        #[arg(long, hide = true, value_parser = ["dtn-sign"])]
        inject_fault: Option<String>,
    },
}

const DEFAULT_OUT: &str = "out";

/// Execute a parsed command line, writing human-facing output to `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        // a second initialisation in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Classify => cmd_classify(&cli.global, stdout),
        Command::Dtn { lmax, height, r1 } => cmd_dtn(&cli.global, *lmax, height.as_deref(), *r1, stdout),
        Command::SolveFull => cmd_solve(&cli.global, false, stdout),
        Command::SolveEbc => cmd_solve(&cli.global, true, stdout),
        Command::Converge => cmd_converge(&cli.global, stdout),
        Command::Selftest { inject_fault } => cmd_selftest(&cli.global, inject_fault.is_some(), stdout),
    }
}

fn load_config(g: &GlobalArgs) -> Result<RunConfig, CliError> {
    let path = g.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    RunConfig::load(path)
}

fn out_dir(g: &GlobalArgs) -> Result<PathBuf, CliError> {
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// Write via a temporary file in the target directory, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn cmd_classify(g: &GlobalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(g)?;
    let cell = cfg.law()?.cell();
    let text = serde_json::to_string_pretty(&cell).map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(stdout, "{text}")?;
    if g.out.is_some() {
        write_atomic(&out_dir(g)?.join("classify.json"), text.as_bytes())?;
    }
    if cell.feasible {
        Ok(())
    } else {
        Err(CliError::Infeasible(cell.reason.unwrap_or_default()))
    }
}

/// CSV rows `l,lambda,j_combined,j1,j2`.
pub fn dtn_table(lmax: u32, height: Height, r1: f64) -> Result<String, CliError> {
    let geom = SphereGeometry::new(r1, 2.0 * r1)?;
    let mut s = String::from("l,lambda,j_combined,j1,j2\n");
    for l in 0..=lmax {
        let lam = lb_eigenvalue(l, &geom);
        // `+ 0.0` prints -0 (1/H at H = ∞) as 0
        let j = |k| dtn_mode_multiplier(k, lam, height).map(|v| v + 0.0);
        s.push_str(&format!(
            "{l},{lam},{},{},{}\n",
            j(DtnKind::Combined)?,
            j(DtnKind::FirstKind)?,
            j(DtnKind::SecondKind)?
        ));
    }
    Ok(s)
}

fn cmd_dtn(
    g: &GlobalArgs,
    lmax: Option<u32>,
    height: Option<&str>,
    r1: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let section = match &g.config {
        Some(p) => RunConfig::load(p)?.dtn,
        None => None,
    };
    let lmax = lmax
        .or(section.as_ref().map(|s| s.lmax))
        .ok_or_else(|| CliError::Config("--lmax (or dtn.lmax) is required".into()))?;
    let height = match (height, &section) {
        (Some(h), _) => h.parse::<Height>()?,
        (None, Some(s)) => s.height.resolve()?,
        (None, None) => return Err(CliError::Config("--height (or dtn.height) is required".into())),
    };
    let r1 = r1.or(section.as_ref().map(|s| s.r1)).unwrap_or(1.0);
    let table = dtn_table(lmax, height, r1)?;
    write!(stdout, "{table}")?;
    if g.out.is_some() {
        write_atomic(&out_dir(g)?.join("dtn.csv"), table.as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub command: &'static str,
    pub problem: serde_json::Value,
    pub final_time: f64,
    pub final_l2_norm: f64,
    pub steps: usize,
    pub modes: usize,
    pub cells: usize,
    pub wall_time_s: f64,
}

fn write_mode_files(dir: &Path, set: &SolutionSet) -> Result<(), CliError> {
    let snaps = dir.join("snapshots");
    std::fs::create_dir_all(&snaps)?;
    for m in &set.modes {
        let single = SolutionSet { mesh: set.mesh.clone(), times: set.times.clone(), modes: vec![m.clone()] };
        let mut buf = Vec::new();
        write_snapshots_csv(&single, &mut buf)?;
        write_atomic(&snaps.join(format!("mode_l{}_m{}.csv", m.mode.l, m.mode.m)), &buf)?;
    }
    Ok(())
}

fn cmd_solve(g: &GlobalArgs, effective: bool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(g)?;
    let u0 = cfg.initial.build(cfg.lmax, cfg.geom.r2)?;
    let forcing = cfg.forcing.build(cfg.geom.r2)?;
    let start = Instant::now();
    let (set, problem, command): (SolutionSet, serde_json::Value, &'static str) = if effective {
        let (family, ecfg) = cfg.effective()?;
        let mesh: RadialMesh =
            build_two_region_mesh(ecfg.geom.r1, ecfg.geom.r2, cfg.mesh.n_inner, cfg.mesh.n_outer, cfg.mesh.grading_ratio)?;
        let set = solve_effective(&family, &ecfg, &mesh, u0.as_ref(), forcing.as_ref(), &cfg.time)?;
        (set, serde_json::to_value(family).map_err(|e| CliError::Config(e.to_string()))?, "solve-ebc")
    } else {
        let layer = cfg.layer()?;
        let mesh = build_mesh(layer.geom.r1, layer.delta, layer.geom.r2, &cfg.mesh)?;
        let set = solve_full(&layer, &mesh, u0.as_ref(), forcing.as_ref(), &cfg.time)?;
        (set, serde_json::to_value(layer).map_err(|e| CliError::Config(e.to_string()))?, "solve-full")
    };
    let wall = start.elapsed().as_secs_f64();
    let summary = SolveSummary {
        command,
        problem,
        final_time: set.final_time(),
        final_l2_norm: ball_l2_norm(&set, set.final_time())?,
        steps: cfg.time.n_steps(),
        modes: set.modes.len(),
        cells: set.mesh.n_cells(),
        wall_time_s: wall,
    };
    let dir = out_dir(g)?;
    write_mode_files(&dir, &set)?;
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Config(e.to_string()))?;
    write_atomic(&dir.join("summary.json"), text.as_bytes())?;
    writeln!(stdout, "{text}")?;
    Ok(())
}

fn cmd_converge(g: &GlobalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(g)?;
    // infeasible cells exit before any solve
    let cell = cfg.law()?.cell();
    if !cell.feasible {
        return Err(CliError::Infeasible(cell.reason.unwrap_or_default()));
    }
    let exp = cfg.experiment()?;
    let report = run_experiment(&exp)?;
    let dir = out_dir(g)?;
    let csv = emit_report(&report, "csv")?;
    if g.csv || !g.json {
        write_atomic(&dir.join(DEFAULT_CSV_NAME), &csv)?;
        write_atomic(&dir.join("convergence.gp"), gnuplot_script(&report, DEFAULT_CSV_NAME).as_bytes())?;
    }
    if g.json {
        write_atomic(&dir.join("convergence.json"), &emit_report(&report, "json")?)?;
    }
    stdout.write_all(&csv)?;
    Ok(())
}

fn cmd_selftest(g: &GlobalArgs, fault: bool, stdout: &mut dyn Write) -> Result<(), CliError> {
    let hooks = if fault { SelftestHooks::perturbed_dtn_sign() } else { SelftestHooks::default() };
    let outcomes = run_selftest(&hooks, g.seed);
    let mut failed = Vec::new();
    for o in &outcomes {
        writeln!(stdout, "[{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail)?;
        if !o.passed {
            failed.push(o.name.to_string());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Selftest(failed))
    }
}
