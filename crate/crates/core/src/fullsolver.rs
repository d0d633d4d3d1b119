//! Per-mode θ-method solver for the layered ball.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ModeField;
use crate::fv::{assemble, BoundaryConditions, Conductivity, RadialOperator};
use crate::mesh::{RadialMesh, Region};
use crate::spectral::{ModeIndex, SphereGeometry};
use crate::tridiag::{ThomasFactor, Tridiagonal};

/// Geometry and material data of the layered problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub geom: SphereGeometry,
    pub delta: f64,
    /// Normal conductivity in the layer.
    pub sigma: f64,
    /// Tangential conductivity in the layer.
    pub mu: f64,
    pub k1: f64,
    pub k2: f64,
}

impl LayerConfig {
    pub fn new(geom: SphereGeometry, delta: f64, sigma: f64, mu: f64, k1: f64, k2: f64) -> Result<Self> {
        let c = Self { geom, delta, sigma, mu, k1, k2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("delta", self.delta), ("sigma", self.sigma), ("mu", self.mu), ("k1", self.k1), ("k2", self.k2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.geom.r1 + self.delta < self.geom.r2) {
            return Err(Error::InvalidGeometry(format!(
                "layer (R1, R1+δ) = ({}, {}) must lie inside R2 = {}",
                self.geom.r1,
                self.geom.r1 + self.delta,
                self.geom.r2
            )));
        }
        Ok(())
    }

    pub fn conductivity(&self, region: Region) -> Conductivity {
        match region {
            Region::Inner => Conductivity::isotropic(self.k1),
            Region::Layer => Conductivity { radial: self.sigma, tangential: self.mu },
            Region::Outer => Conductivity::isotropic(self.k2),
        }
    }
}

/// Operator of mode degree `l` with a regular origin and `u = 0` on the outer sphere.
pub fn assemble_mode_operator(mesh: &RadialMesh, config: &LayerConfig, l: u32) -> RadialOperator {
    assemble_mode_operator_with(mesh, config, l, BoundaryConditions::default())
}

pub fn assemble_mode_operator_with(
    mesh: &RadialMesh,
    config: &LayerConfig,
    l: u32,
    bcs: BoundaryConditions,
) -> RadialOperator {
    assemble(mesh, |r| config.conductivity(r), l, bcs, &[])
}

/// Uniform time stepping on `[0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Keep every `snapshot_stride`-th step (the final state is always kept).
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

fn default_theta() -> f64 {
    1.0
}

fn default_stride() -> usize {
    1
}

impl TimeGrid {
    pub fn new(t_final: f64, dt: f64, theta: f64, snapshot_stride: usize) -> Result<Self> {
        let g = Self { t_final, dt, theta, snapshot_stride };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_step(self.dt, self.theta)?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("final time must be >= 0, got {}", self.t_final)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument("snapshot stride must be >= 1".into()));
        }
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt) {
            return Err(Error::InvalidArgument(format!(
                "final time {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    fn is_snapshot(&self, step: usize) -> bool {
        step % self.snapshot_stride == 0 || step == self.n_steps()
    }

    pub fn snapshot_steps(&self) -> Vec<usize> {
        (0..=self.n_steps()).filter(|&s| self.is_snapshot(s)).collect()
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshot_steps().into_iter().map(|s| self.time(s)).collect()
    }
}

fn check_step(dt: f64, theta: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(0.5..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta must lie in [0.5, 1], got {theta}")));
    }
    Ok(())
}

/// Radial amplitude of one mode at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub mode: ModeIndex,
    pub values: Vec<f64>,
    pub t: f64,
}

/// θ-method for `V du/dt = K u + s + V f` with the implicit matrix factored once.
#[derive(Debug, Clone)]
pub struct ThetaStepper {
    explicit: Tridiagonal,
    factor: ThomasFactor,
    source: Vec<f64>,
    volumes: Vec<f64>,
    dt: f64,
    theta: f64,
}

impl ThetaStepper {
    pub fn new(op: &RadialOperator, dt: f64, theta: f64) -> Result<Self> {
        check_step(dt, theta)?;
        let implicit = op.stiffness.scaled_shift(&op.volumes, -theta * dt);
        let explicit = op.stiffness.scaled_shift(&op.volumes, (1.0 - theta) * dt);
        Ok(Self {
            explicit,
            factor: implicit.factor()?,
            source: op.boundary_source.clone(),
            volumes: op.volumes.clone(),
            dt,
            theta,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// One step; `forcing` is the θ-weighted forcing `θ f(t+dt) + (1-θ) f(t)` at cell centers.
    pub fn step(&self, u: &[f64], forcing: Option<&[f64]>) -> Vec<f64> {
        let mut rhs = vec![0.0; u.len()];
        self.explicit.matvec(u, &mut rhs);
        for (i, r) in rhs.iter_mut().enumerate() {
            *r += self.dt * self.source[i];
        }
        if let Some(f) = forcing {
            for (i, r) in rhs.iter_mut().enumerate() {
                *r += self.dt * self.volumes[i] * f[i];
            }
        }
        self.factor.solve(&mut rhs);
        rhs
    }
}

/// Single θ-step of `state` (builds and factors the system on every call).
pub fn step_theta(
    state: &ModeState,
    op: &RadialOperator,
    dt: f64,
    theta: f64,
    forcing: Option<&[f64]>,
) -> Result<ModeState> {
    let stepper = ThetaStepper::new(op, dt, theta)?;
    let values = stepper.step(&state.values, forcing);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value after step".into()));
    }
    Ok(ModeState { mode: state.mode, values, t: state.t + dt })
}

/// Stored history of one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub mode: ModeIndex,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
}

impl ModeSolution {
    pub fn state(&self, k: usize) -> ModeState {
        ModeState { mode: self.mode, values: self.snapshots[k].clone(), t: self.times[k] }
    }
}

/// All solved modes on a common mesh and snapshot grid, sorted by mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub mesh: RadialMesh,
    pub times: Vec<f64>,
    pub modes: Vec<ModeSolution>,
}

impl SolutionSet {
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-12 * t.abs().max(1.0);
        self.times.iter().position(|&s| (s - t).abs() <= tol).ok_or(Error::TimeNotStored(t))
    }

    pub fn mode(&self, mode: ModeIndex) -> Option<&ModeSolution> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Modes carried by either the data or the forcing.
pub fn active_modes(u0: &dyn ModeField, forcing: &dyn ModeField) -> Vec<ModeIndex> {
    let set: BTreeSet<ModeIndex> = u0.modes().into_iter().chain(forcing.modes()).collect();
    set.into_iter().collect()
}

/// Advance every mode independently with the operator returned by `operator_for(l)`.
///
/// Degrees run in parallel; the output does not depend on scheduling.
pub fn solve_modes<F>(
    mesh: &RadialMesh,
    operator_for: F,
    u0: &dyn ModeField,
    forcing: &dyn ModeField,
    grid: &TimeGrid,
) -> Result<SolutionSet>
where
    F: Fn(u32) -> Result<RadialOperator> + Sync,
{
    grid.validate()?;
    let modes = active_modes(u0, forcing);
    let forced: BTreeSet<ModeIndex> = forcing.modes().into_iter().collect();
    let mut by_degree: BTreeMap<u32, Vec<ModeIndex>> = BTreeMap::new();
    for m in &modes {
        by_degree.entry(m.l).or_default().push(*m);
    }
    let groups: Vec<(u32, Vec<ModeIndex>)> = by_degree.into_iter().collect();
    let solved: Vec<Vec<ModeSolution>> = groups
        .par_iter()
        .map(|(l, ms)| {
            let stepper = ThetaStepper::new(&operator_for(*l)?, grid.dt, grid.theta)?;
            ms.iter()
                .map(|&mode| {
                    let f = forced.contains(&mode).then_some(forcing);
                    integrate_mode(mesh, &stepper, mode, u0.sample(mode, mesh, 0.0), f, grid)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionSet { mesh: mesh.clone(), times: grid.snapshot_times(), modes: solved.into_iter().flatten().collect() })
}

fn integrate_mode(
    mesh: &RadialMesh,
    stepper: &ThetaStepper,
    mode: ModeIndex,
    mut u: Vec<f64>,
    forcing: Option<&dyn ModeField>,
    grid: &TimeGrid,
) -> Result<ModeSolution> {
    let theta = grid.theta;
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    let mut f_old = forcing.map(|f| f.sample(mode, mesh, 0.0));
    let mut f_theta = vec![0.0; u.len()];
    for step in 1..=grid.n_steps() {
        let t = grid.time(step);
        let f_new = forcing.map(|f| f.sample(mode, mesh, t));
        let f = match (&f_old, &f_new) {
            (Some(a), Some(b)) => {
                for ((w, a), b) in f_theta.iter_mut().zip(a).zip(b) {
                    *w = theta * b + (1.0 - theta) * a;
                }
                Some(f_theta.as_slice())
            }
            _ => None,
        };
        u = stepper.step(&u, f);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("mode {mode:?} diverged at t = {t}")));
        }
        f_old = f_new;
        if grid.is_snapshot(step) {
            times.push(t);
            snapshots.push(u.clone());
        }
    }
    Ok(ModeSolution { mode, times, snapshots })
}

/// Full layered problem on `mesh`, which must be built for `config`.
pub fn solve_full(
    config: &LayerConfig,
    mesh: &RadialMesh,
    u0: &dyn ModeField,
    forcing: &dyn ModeField,
    grid: &TimeGrid,
) -> Result<SolutionSet> {
    config.validate()?;
    solve_modes(mesh, |l| Ok(assemble_mode_operator(mesh, config, l)), u0, forcing, grid)
}

/// `√(Σ_modes Σ_i V_i û_i²)` at a stored time.
pub fn ball_l2_norm(set: &SolutionSet, t: f64) -> Result<f64> {
    let k = set.time_index(t)?;
    let v = set.mesh.volumes();
    let s: f64 = set
        .modes
        .iter()
        .map(|m| m.snapshots[k].iter().zip(v).map(|(u, v)| v * u * u).sum::<f64>())
        .sum();
    Ok(s.sqrt())
}

/// Discrete `L²` norm of one radial profile, `√(Σ V_i u_i²)`.
pub fn profile_l2_norm(mesh: &RadialMesh, u: &[f64]) -> f64 {
    u.iter().zip(mesh.volumes()).map(|(u, v)| v * u * u).sum::<f64>().sqrt()
}

/// Snapshot table with columns `l,m,t,r,value`, radii at cell centers.
pub fn write_snapshots_csv(set: &SolutionSet, mut out: impl Write) -> Result<()> {
    writeln!(out, "l,m,t,r,value")?;
    for ms in &set.modes {
        for (t, snap) in ms.times.iter().zip(&ms.snapshots) {
            for (r, v) in set.mesh.centers().iter().zip(snap) {
                writeln!(out, "{},{},{},{},{}", ms.mode.l, ms.mode.m, t, r, v)?;
            }
        }
    }
    Ok(())
}
