//! Shared fixtures for the benchmarks.

use ebclab::fullsolver::LayerConfig;
use ebclab::mesh::{build_mesh, MeshSpec, RadialMesh};
use ebclab::SphereGeometry;

/// Layered problem at thickness `delta` with the Robin-type law `σ = 2δ`, `μ = δ`.
pub fn robin_fixture(delta: f64, spec: &MeshSpec) -> (LayerConfig, RadialMesh) {
    let geom = SphereGeometry::new(1.0, 2.0).expect("valid geometry");
    let cfg = LayerConfig::new(geom, delta, 2.0 * delta, delta, 1.0, 2.0).expect("valid layer");
    let mesh = build_mesh(1.0, delta, 2.0, spec).expect("valid mesh");
    (cfg, mesh)
}
