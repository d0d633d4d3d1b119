//! Convergence experiments: layered solutions against the limit problem as `δ → 0`.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ebc::{solve_effective, EffectiveConfig};
use crate::error::{Error, Result};
use crate::field::{ForcingPreset, InitialPreset};
use crate::fullsolver::{solve_full, LayerConfig, SolutionSet, TimeGrid};
use crate::mesh::{build_mesh, build_two_region_mesh, MeshSpec, RadialMesh, Region};
use crate::regime::{check_sigma_delta_cubed, classify, RegimeCell, ScalingLaw};
use crate::spectral::{ModeIndex, SphereGeometry};

/// Everything needed to run one regime experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub law: ScalingLaw,
    /// Strictly decreasing layer thicknesses.
    pub deltas: Vec<f64>,
    pub geom: SphereGeometry,
    pub k1: f64,
    pub k2: f64,
    pub lmax: u32,
    pub initial: InitialPreset,
    pub forcing: ForcingPreset,
    pub time: TimeGrid,
    pub mesh: MeshSpec,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.law.validate()?;
        self.time.validate()?;
        if self.deltas.is_empty() {
            return Err(Error::InvalidArgument("delta sequence is empty".into()));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0)) || self.deltas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidArgument("deltas must be positive and strictly decreasing".into()));
        }
        if !(self.deltas[0] < self.geom.r2 - self.geom.r1) {
            return Err(Error::InvalidGeometry(format!(
                "largest delta {} does not fit in (R1, R2)",
                self.deltas[0]
            )));
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(Error::InvalidArgument("k1 and k2 must be positive".into()));
        }
        Ok(())
    }

    /// Layer data at thickness `delta`.
    pub fn layer_config(&self, delta: f64) -> Result<LayerConfig> {
        LayerConfig::new(self.geom, delta, self.law.sigma(delta), self.law.mu(delta), self.k1, self.k2)
    }

    pub fn effective_config(&self) -> Result<EffectiveConfig> {
        EffectiveConfig::new(self.geom, self.k1, self.k2)
    }

    /// Limit-problem mesh: same bulk counts and grading as the layered meshes.
    pub fn effective_mesh(&self) -> Result<RadialMesh> {
        build_two_region_mesh(self.geom.r1, self.geom.r2, self.mesh.n_inner, self.mesh.n_outer, self.mesh.grading_ratio)
    }
}

/// One δ of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    /// `max_t ‖u_δ - v‖` over `(0, R1) ∪ (R1+δ, R2)`.
    pub sup_t_error: f64,
    /// Same, over the whole ball with `v` extended constantly into the layer.
    pub sup_t_error_with_layer: f64,
    /// `max_t ‖u_δ‖` over the layer.
    pub layer_mass: f64,
    pub full_runtime_s: f64,
    pub eff_runtime_s: f64,
    /// Case-3 side condition `σδ³ → 0` is required but fails for this law.
    pub sigma_delta_cubed_violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub mesh: MeshSpec,
    pub effective_cells: usize,
    pub dt: f64,
    pub theta: f64,
    pub t_final: f64,
    pub snapshot_stride: usize,
    pub lmax: u32,
    pub k1: f64,
    pub k2: f64,
    pub geom: SphereGeometry,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cell: RegimeCell,
    pub rows: Vec<ConvergenceRow>,
    pub metadata: ReportMetadata,
}

impl ConvergenceReport {
    /// `error[i-1] / error[i]` for consecutive rows.
    pub fn error_ratios(&self) -> Vec<f64> {
        self.rows.windows(2).map(|w| w[0].sup_t_error / w[1].sup_t_error).collect()
    }

    /// Errors strictly decrease with every ratio at least `min_ratio`.
    pub fn is_monotone(&self, min_ratio: f64) -> bool {
        self.error_ratios().iter().all(|&r| r >= min_ratio && r > 1.0)
    }

    /// Copy with all wall-clock fields zeroed.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.full_runtime_s = 0.0;
            r.eff_runtime_s = 0.0;
        }
        out
    }
}

/// Run the layered problem for every δ and the limit problem once.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let cell = classify(&config.law);
    let family = match (&cell.family, &cell.reason) {
        (Some(f), _) if cell.feasible => *f,
        (_, reason) => return Err(Error::InfeasibleRegime(reason.clone().unwrap_or_default())),
    };
    let violated = cell.requires_sigma_delta_cubed && !check_sigma_delta_cubed(&config.law);
    let u0 = config.initial.build(config.lmax, config.geom.r2)?;
    let forcing = config.forcing.build(config.geom.r2)?;

    let eff_mesh = config.effective_mesh()?;
    let start = Instant::now();
    let eff = solve_effective(&family, &config.effective_config()?, &eff_mesh, u0.as_ref(), forcing.as_ref(), &config.time)?;
    let eff_runtime_s = start.elapsed().as_secs_f64();

    let mut rows = Vec::with_capacity(config.deltas.len());
    for &delta in &config.deltas {
        let layer = config.layer_config(delta)?;
        let mesh = build_mesh(config.geom.r1, delta, config.geom.r2, &config.mesh)?;
        let start = Instant::now();
        let full = solve_full(&layer, &mesh, u0.as_ref(), forcing.as_ref(), &config.time)?;
        let full_runtime_s = start.elapsed().as_secs_f64();
        let e = error_breakdown(&full, &eff)?;
        rows.push(ConvergenceRow {
            delta,
            sup_t_error: e.excluded,
            sup_t_error_with_layer: e.included,
            layer_mass: e.layer_mass,
            full_runtime_s,
            eff_runtime_s,
            sigma_delta_cubed_violated: violated,
        });
    }
    rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    Ok(ConvergenceReport {
        cell,
        rows,
        metadata: ReportMetadata {
            mesh: config.mesh,
            effective_cells: eff_mesh.n_cells(),
            dt: config.time.dt,
            theta: config.time.theta,
            t_final: config.time.t_final,
            snapshot_stride: config.time.snapshot_stride,
            lmax: config.lmax,
            k1: config.k1,
            k2: config.k2,
            geom: config.geom,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// Piecewise-linear interpolant of the limit solution on one bulk region,
/// pinned to zero at the outer sphere.
struct RegionInterp {
    xs: Vec<f64>,
    idx: Vec<usize>,
}

impl RegionInterp {
    fn new(mesh: &RadialMesh, region: Region) -> Self {
        let idx: Vec<usize> = mesh.cells_in(region).collect();
        let mut xs: Vec<f64> = idx.iter().map(|&i| mesh.centers()[i]).collect();
        if region == Region::Outer {
            xs.push(mesh.r_max());
        }
        Self { xs, idx }
    }

    fn eval(&self, values: &[f64], r: f64) -> f64 {
        let y = |k: usize| if k < self.idx.len() { values[self.idx[k]] } else { 0.0 };
        let n = self.xs.len();
        if r <= self.xs[0] {
            return y(0);
        }
        if r >= self.xs[n - 1] {
            return y(n - 1);
        }
        let k = self.xs.partition_point(|&x| x <= r) - 1;
        let t = (r - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        (1.0 - t) * y(k) + t * y(k + 1)
    }
}

struct ErrorBreakdown {
    excluded: f64,
    included: f64,
    layer_mass: f64,
}

fn error_breakdown(full: &SolutionSet, eff: &SolutionSet) -> Result<ErrorBreakdown> {
    if full.times.len() != eff.times.len()
        || full.times.iter().zip(&eff.times).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
    {
        return Err(Error::TimeGridMismatch);
    }
    let mesh = &full.mesh;
    let inner = RegionInterp::new(&eff.mesh, Region::Inner);
    let outer = RegionInterp::new(&eff.mesh, Region::Outer);
    let layer_top = mesh.cells_in(Region::Layer).last().map(|i| mesh.nodes()[i + 1]);

    let mut modes: Vec<ModeIndex> = full.modes.iter().chain(&eff.modes).map(|m| m.mode).collect();
    modes.sort();
    modes.dedup();
    let zeros_full = vec![0.0; mesh.n_cells()];
    let zeros_eff = vec![0.0; eff.mesh.n_cells()];

    let mut out = ErrorBreakdown { excluded: 0.0, included: 0.0, layer_mass: 0.0 };
    for k in 0..full.times.len() {
        let (mut ex, mut inc, mut mass) = (0.0, 0.0, 0.0);
        for &mode in &modes {
            let u = full.mode(mode).map_or(&zeros_full, |m| &m.snapshots[k]);
            let v = eff.mode(mode).map_or(&zeros_eff, |m| &m.snapshots[k]);
            for i in 0..mesh.n_cells() {
                let (r, vol) = (mesh.centers()[i], mesh.volumes()[i]);
                match mesh.regions()[i] {
                    Region::Inner => {
                        let d = u[i] - inner.eval(v, r);
                        ex += vol * d * d;
                        inc += vol * d * d;
                    }
                    Region::Outer => {
                        let d = u[i] - outer.eval(v, r);
                        ex += vol * d * d;
                        inc += vol * d * d;
                    }
                    Region::Layer => {
                        let top = layer_top.expect("layer cells exist");
                        let d = u[i] - outer.eval(v, top);
                        inc += vol * d * d;
                        mass += vol * u[i] * u[i];
                    }
                }
            }
        }
        out.excluded = out.excluded.max(ex.sqrt());
        out.included = out.included.max(inc.sqrt());
        out.layer_mass = out.layer_mass.max(mass.sqrt());
    }
    Ok(out)
}

/// `max_t ‖u_δ - v‖_{L²}` over the ball minus the layer.
///
/// `full` lives on a layered mesh, `effective` on a two-region mesh with the
/// same snapshot times; the limit solution is interpolated piecewise linearly
/// within each bulk region.
pub fn error_ct_l2(full: &SolutionSet, effective: &SolutionSet) -> Result<f64> {
    Ok(error_breakdown(full, effective)?.excluded)
}

/// As [`error_ct_l2`] but over the whole ball, extending the limit solution
/// constantly from `R1+δ` into the layer.
pub fn error_ct_l2_with_layer(full: &SolutionSet, effective: &SolutionSet) -> Result<f64> {
    Ok(error_breakdown(full, effective)?.included)
}

/// `max_t ‖u_δ‖_{L²(layer)}`.
pub fn layer_mass(full: &SolutionSet) -> f64 {
    let mesh = &full.mesh;
    let cells: Vec<usize> = mesh.cells_in(Region::Layer).collect();
    (0..full.times.len())
        .map(|k| {
            full.modes
                .iter()
                .map(|m| cells.iter().map(|&i| mesh.volumes()[i] * m.snapshots[k][i].powi(2)).sum::<f64>())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Gnuplot,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "gnuplot" | "gp" => Ok(ReportFormat::Gnuplot),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

/// Default data file referenced by the gnuplot script.
pub const DEFAULT_CSV_NAME: &str = "convergence.csv";

/// Serialize a report as `csv`, `json` or `gnuplot`.
pub fn emit_report(report: &ConvergenceReport, format: &str) -> Result<Vec<u8>> {
    Ok(match format.parse::<ReportFormat>()? {
        ReportFormat::Csv => report_csv(report).into_bytes(),
        ReportFormat::Json => serde_json::to_vec_pretty(report)?,
        ReportFormat::Gnuplot => gnuplot_script(report, DEFAULT_CSV_NAME).into_bytes(),
    })
}

fn report_csv(report: &ConvergenceReport) -> String {
    let mut s = String::from("delta,sup_t_error,error_ratio,full_runtime_s,eff_runtime_s\n");
    for (i, r) in report.rows.iter().enumerate() {
        let ratio = if i == 0 { String::new() } else { (report.rows[i - 1].sup_t_error / r.sup_t_error).to_string() };
        let _ = writeln!(s, "{},{},{},{},{}", r.delta, r.sup_t_error, ratio, r.full_runtime_s, r.eff_runtime_s);
    }
    s
}

/// Log-log plot of error against δ, reading `csv_path`.
pub fn gnuplot_script(report: &ConvergenceReport, csv_path: &str) -> String {
    let family = report.cell.family.map_or("infeasible", |f| f.name());
    format!(
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel 'delta'\n\
         set ylabel 'sup_t L2 error'\n\
         set key left top\n\
         set grid\n\
         set title 'case {} / {}'\n\
         set terminal pngcairo size 800,600\n\
         set output 'convergence.png'\n\
         plot '{}' using 1:2 skip 1 with linespoints title 'error'\n",
        report.cell.case_id, family, csv_path
    )
}

pub fn read_report_json(bytes: &[u8]) -> Result<ConvergenceReport> {
    Ok(serde_json::from_slice(bytes)?)
}
