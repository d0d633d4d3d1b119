//! Thin-layer heat conduction on a spherical geometry.
//!
//! The layered ball is reduced mode by mode to radial problems, solved
//! with a finite-volume θ-method, and compared against the limit problems
//! in which the layer is replaced by an interface condition on the inner
//! sphere.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dtn;
pub mod ebc;
pub mod error;
pub mod field;
pub mod fullsolver;
pub mod fv;
pub mod harness;
pub mod mesh;
pub mod regime;
pub mod selftest;
pub mod spectral;
pub mod tridiag;

pub use dtn::{apply_dtn, dtn_mode_multiplier, frac_laplacian_half, DtnKind, Height, StripProblem};
pub use ebc::{mode_boundary_conditions, solve_effective, EbcFamily, EffectiveConfig, ModeBoundaryCoupling};
pub use error::{Error, Result};
pub use field::{ForcingPreset, InitialPreset, ModeField};
pub use fullsolver::{ball_l2_norm, solve_full, LayerConfig, ModeSolution, ModeState, SolutionSet, TimeGrid};
pub use harness::{emit_report, error_ct_l2, run_experiment, ConvergenceReport, ConvergenceRow, ExperimentConfig};
pub use mesh::{build_mesh, build_two_region_mesh, MeshSpec, RadialMesh, Region};
pub use regime::{check_sigma_delta_cubed, classify, classify_limits, limits_of, ExtendedLimit, RegimeCell, ScalingLaw};
pub use spectral::{lb_eigenvalue, ModeIndex, QuadratureGrid, SphereGeometry, SurfaceFunction};
