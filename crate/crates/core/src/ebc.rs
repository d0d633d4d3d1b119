//! Effective problems on `(0, R1) ∪ (R1, R2)` coupled at `R1`.
//!
//! Sign convention: the normal on the inner sphere points out of the inner
//! ball, so both one-sided normal derivatives at `R1` are ordinary radial
//! derivatives `v̂'`. Every family is reduced per mode to one of
//!
//! ```text
//! coefficients:       k1 v̂1'(R1-) = c11 v̂1 + c12 v̂2,   k2 v̂2'(R1+) = c21 v̂1 + c22 v̂2
//! value continuity:   v̂1 = v̂2 = v̂,                     k1 v̂1' - k2 v̂2' = jump · v̂
//! dirichlet zero:     v̂1 = v̂2 = 0
//! ```
//!
//! The interface traces are eliminated against the two adjacent cell values,
//! which turns every coupling into a 2x2 block in the ordinary tridiagonal
//! finite-volume system (so one Thomas solve per step remains exact).

use serde::{Deserialize, Serialize};

use crate::dtn::{dtn_mode_multiplier, DtnKind, Height};
use crate::error::{Error, Result};
use crate::field::ModeField;
use crate::fullsolver::{solve_modes, SolutionSet, TimeGrid};
use crate::fv::{assemble, face_conductance, BoundaryConditions, Conductivity, RadialOperator};
use crate::mesh::{RadialMesh, Region};
use crate::spectral::{lb_eigenvalue, SphereGeometry};

/// Boundary-condition family of the limit problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum EbcFamily {
    DecoupledNeumann,
    RobinContact { b: f64 },
    DtnCoupling { gamma: f64, height: Height },
    PerfectTransmission,
    FluxJumpLB { beta: f64 },
    ConstantTraceDecoupled,
    ConstantTraceRobin { b: f64 },
    ConstantTraceTransmission,
}

impl EbcFamily {
    pub fn name(&self) -> &'static str {
        match self {
            EbcFamily::DecoupledNeumann => "DecoupledNeumann",
            EbcFamily::RobinContact { .. } => "RobinContact",
            EbcFamily::DtnCoupling { .. } => "DtnCoupling",
            EbcFamily::PerfectTransmission => "PerfectTransmission",
            EbcFamily::FluxJumpLB { .. } => "FluxJumpLB",
            EbcFamily::ConstantTraceDecoupled => "ConstantTraceDecoupled",
            EbcFamily::ConstantTraceRobin { .. } => "ConstantTraceRobin",
            EbcFamily::ConstantTraceTransmission => "ConstantTraceTransmission",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} must be >= 0 and finite, got {v}")));
        match *self {
            EbcFamily::RobinContact { b } | EbcFamily::ConstantTraceRobin { b } if !(b >= 0.0 && b.is_finite()) => {
                bad("b", b)
            }
            EbcFamily::DtnCoupling { gamma, .. } if !(gamma >= 0.0 && gamma.is_finite()) => bad("gamma", gamma),
            EbcFamily::DtnCoupling { height: Height::Finite(h), .. } if !(h > 0.0) => {
                Err(Error::NonPositiveHeight(h))
            }
            EbcFamily::FluxJumpLB { beta } if !(beta >= 0.0 && beta.is_finite()) => bad("beta", beta),
            _ => Ok(()),
        }
    }
}

/// Per-mode interface condition at `R1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeBoundaryCoupling {
    Coefficients { c11: f64, c12: f64, c21: f64, c22: f64 },
    ValueContinuity { flux_jump: f64 },
    DirichletZeroBoth,
}

impl ModeBoundaryCoupling {
    fn robin(b: f64) -> Self {
        ModeBoundaryCoupling::Coefficients { c11: -b, c12: b, c21: -b, c22: b }
    }

    /// Matrix `M` with `(k1 v̂1', -k2 v̂2') = M (v̂1, v̂2)`, i.e. outward fluxes seen by each side.
    pub fn flux_matrix(&self) -> Option<[[f64; 2]; 2]> {
        match *self {
            ModeBoundaryCoupling::Coefficients { c11, c12, c21, c22 } => Some([[c11, c12], [-c21, -c22]]),
            _ => None,
        }
    }
}

/// Interface coupling of `family` for degree `l`.
pub fn mode_boundary_conditions(family: &EbcFamily, l: u32, geom: &SphereGeometry) -> Result<ModeBoundaryCoupling> {
    family.validate()?;
    let lam = lb_eigenvalue(l, geom);
    Ok(match *family {
        EbcFamily::DecoupledNeumann => ModeBoundaryCoupling::robin(0.0),
        EbcFamily::RobinContact { b } => ModeBoundaryCoupling::robin(b),
        EbcFamily::DtnCoupling { gamma, height } => {
            let j1 = dtn_mode_multiplier(DtnKind::FirstKind, lam, height)?;
            let j2 = dtn_mode_multiplier(DtnKind::SecondKind, lam, height)?;
            ModeBoundaryCoupling::Coefficients { c11: gamma * j1, c12: -gamma * j2, c21: gamma * j2, c22: -gamma * j1 }
        }
        EbcFamily::PerfectTransmission => ModeBoundaryCoupling::ValueContinuity { flux_jump: 0.0 },
        // k1 v1' - k2 v2' = β Δ_Γ v and Δ_Γ acts on degree l as -λ
        EbcFamily::FluxJumpLB { beta } => ModeBoundaryCoupling::ValueContinuity { flux_jump: -beta * lam },
        _ if l >= 1 => ModeBoundaryCoupling::DirichletZeroBoth,
        EbcFamily::ConstantTraceDecoupled => ModeBoundaryCoupling::robin(0.0),
        EbcFamily::ConstantTraceRobin { b } => ModeBoundaryCoupling::robin(b),
        EbcFamily::ConstantTraceTransmission => ModeBoundaryCoupling::ValueContinuity { flux_jump: 0.0 },
    })
}

/// Bulk data of the effective problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveConfig {
    pub geom: SphereGeometry,
    pub k1: f64,
    pub k2: f64,
}

impl EffectiveConfig {
    pub fn new(geom: SphereGeometry, k1: f64, k2: f64) -> Result<Self> {
        if !(k1 > 0.0 && k2 > 0.0 && k1.is_finite() && k2.is_finite()) {
            return Err(Error::InvalidArgument(format!("conductivities must be positive, got {k1}, {k2}")));
        }
        Ok(Self { geom, k1, k2 })
    }

    pub fn conductivity(&self, region: Region) -> Conductivity {
        match region {
            Region::Inner => Conductivity::isotropic(self.k1),
            Region::Layer | Region::Outer => Conductivity::isotropic(self.k2),
        }
    }
}

/// The 2x2 stiffness block replacing the interface face between cells `face-1` and `face`.
pub fn interface_block(
    coupling: &ModeBoundaryCoupling,
    mesh: &RadialMesh,
    face: usize,
    k1: f64,
    k2: f64,
) -> [[f64; 2]; 2] {
    let r = mesh.nodes()[face];
    let area = r * r;
    let d1 = k1 / (r - mesh.centers()[face - 1]);
    let d2 = k2 / (mesh.centers()[face] - r);
    match *coupling {
        ModeBoundaryCoupling::DirichletZeroBoth => [[-area * d1, 0.0], [0.0, -area * d2]],
        ModeBoundaryCoupling::ValueContinuity { flux_jump } if flux_jump == 0.0 => {
            let c = face_conductance(mesh, face, k1, k2);
            [[-c, c], [c, -c]]
        }
        ModeBoundaryCoupling::ValueContinuity { flux_jump } => {
            let s = d1 + d2 - flux_jump;
            let off = area * d1 * d2 / s;
            [[area * d1 * (d1 / s - 1.0), off], [off, area * d2 * (d2 / s - 1.0)]]
        }
        ModeBoundaryCoupling::Coefficients { .. } => {
            let m = coupling.flux_matrix().expect("coefficient form");
            // area · D (D - M)⁻¹ M
            let a = [[d1 - m[0][0], -m[0][1]], [-m[1][0], d2 - m[1][1]]];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
            let mut out = [[0.0; 2]; 2];
            for (i, di) in [d1, d2].into_iter().enumerate() {
                for j in 0..2 {
                    out[i][j] = area * di * (inv[i][0] * m[0][j] + inv[i][1] * m[1][j]);
                }
            }
            out
        }
    }
}

/// Operator of degree `l` on a two-region mesh, `u = 0` on the outer sphere.
pub fn assemble_effective_operator(
    mesh: &RadialMesh,
    config: &EffectiveConfig,
    family: &EbcFamily,
    l: u32,
) -> Result<RadialOperator> {
    assemble_effective_operator_with(mesh, config, family, l, BoundaryConditions::default())
}

pub fn assemble_effective_operator_with(
    mesh: &RadialMesh,
    config: &EffectiveConfig,
    family: &EbcFamily,
    l: u32,
    bcs: BoundaryConditions,
) -> Result<RadialOperator> {
    let face = mesh
        .interface_between(Region::Inner, Region::Outer)
        .ok_or_else(|| Error::InvalidArgument("effective mesh needs an inner/outer interface".into()))?;
    if (mesh.nodes()[face] - config.geom.r1).abs() > 1e-12 * config.geom.r1 {
        return Err(Error::InvalidGeometry(format!(
            "interface node {} does not match R1 = {}",
            mesh.nodes()[face],
            config.geom.r1
        )));
    }
    let coupling = mode_boundary_conditions(family, l, &config.geom)?;
    let block = interface_block(&coupling, mesh, face, config.k1, config.k2);
    Ok(assemble(mesh, |r| config.conductivity(r), l, bcs, &[(face, block)]))
}

/// Effective problem for every mode of the data.
pub fn solve_effective(
    family: &EbcFamily,
    config: &EffectiveConfig,
    mesh: &RadialMesh,
    u0: &dyn ModeField,
    forcing: &dyn ModeField,
    grid: &TimeGrid,
) -> Result<SolutionSet> {
    family.validate()?;
    solve_modes(mesh, |l| assemble_effective_operator(mesh, config, family, l), u0, forcing, grid)
}
