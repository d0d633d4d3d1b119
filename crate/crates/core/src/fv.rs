//! Finite-volume assembly of the per-mode radial operator.
//!
//! For a spherical-harmonic mode of degree `l` the semi-discrete system is
//!
//! ```text
//! V_i dû_i/dt = Σ_faces F + (reaction) + s_i + V_i f_i
//! ```
//!
//! with `V_i = ∫ r² dr` over the cell, face flux `F = r_f² · κ_r ∂û/∂r`
//! approximated through the series (harmonic) conductance of the two
//! half-cells, and the tangential term `-κ_t l(l+1) ∫ û dr`. Flux is
//! single-valued at every face, so flux continuity across material
//! interfaces holds by construction and the stiffness matrix `K` is
//! symmetric. The face at `r = 0` has zero area.

use crate::error::Result;
use crate::mesh::{RadialMesh, Region};
use crate::tridiag::Tridiagonal;

/// Radial (normal) and tangential conductivity of a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conductivity {
    pub radial: f64,
    pub tangential: f64,
}

impl Conductivity {
    pub fn isotropic(k: f64) -> Self {
        Self { radial: k, tangential: k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    ZeroFlux,
    Dirichlet(f64),
}

/// Conditions at the two ends of the mesh. The inner one is ignored when the mesh starts at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub inner: Boundary,
    pub outer: Boundary,
}

impl Default for BoundaryConditions {
    /// Regular origin and homogeneous Dirichlet data on the outer sphere.
    fn default() -> Self {
        Self { inner: Boundary::ZeroFlux, outer: Boundary::Dirichlet(0.0) }
    }
}

/// Semi-discrete operator `V dû/dt = K û + s (+ V f)` for one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOperator {
    pub stiffness: Tridiagonal,
    pub volumes: Vec<f64>,
    pub boundary_source: Vec<f64>,
}

impl RadialOperator {
    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// `V⁻¹(K û + s)`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.stiffness.matvec(u, &mut out);
        for ((o, v), s) in out.iter_mut().zip(&self.volumes).zip(&self.boundary_source) {
            *o = (*o + s) / v;
        }
        out
    }

    /// Row-scaled operator `V⁻¹ K`.
    pub fn spatial_operator(&self) -> Tridiagonal {
        let k = &self.stiffness;
        let n = self.len();
        Tridiagonal {
            lower: (0..n.saturating_sub(1)).map(|i| k.lower[i] / self.volumes[i + 1]).collect(),
            diag: (0..n).map(|i| k.diag[i] / self.volumes[i]).collect(),
            upper: (0..n.saturating_sub(1)).map(|i| k.upper[i] / self.volumes[i]).collect(),
        }
    }

    /// Steady solution of `K û + s + V f = 0`.
    pub fn steady_state(&self, forcing: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut rhs: Vec<f64> = self.boundary_source.iter().map(|s| -s).collect();
        if let Some(f) = forcing {
            for ((r, v), f) in rhs.iter_mut().zip(&self.volumes).zip(f) {
                *r -= v * f;
            }
        }
        self.stiffness.factor()?.solve(&mut rhs);
        Ok(rhs)
    }
}

/// Series conductance of the two half-cells adjacent to node `face`.
pub fn face_conductance(mesh: &RadialMesh, face: usize, left: f64, right: f64) -> f64 {
    let r = mesh.nodes()[face];
    let c = mesh.centers();
    let dl = r - c[face - 1];
    let dr = c[face] - r;
    r * r / (dl / left + dr / right)
}

/// Assemble the operator; `overrides` replaces the face coupling at the given node
/// indices by an explicit 2x2 block acting on the cells `(face-1, face)`.
pub fn assemble(
    mesh: &RadialMesh,
    conductivity: impl Fn(Region) -> Conductivity,
    l: u32,
    bcs: BoundaryConditions,
    overrides: &[(usize, [[f64; 2]; 2])],
) -> RadialOperator {
    let n = mesh.n_cells();
    let nodes = mesh.nodes();
    let centers = mesh.centers();
    let kappa: Vec<Conductivity> = mesh.regions().iter().map(|&r| conductivity(r)).collect();
    let mut k = Tridiagonal::zeros(n);
    let mut source = vec![0.0; n];
    let ll = (l as f64) * (l as f64 + 1.0);

    for i in 0..n {
        k.diag[i] -= kappa[i].tangential * ll * mesh.width(i);
    }
    for face in 1..n {
        if let Some((_, block)) = overrides.iter().find(|(f, _)| *f == face) {
            k.add_block(face - 1, *block);
            continue;
        }
        let c = face_conductance(mesh, face, kappa[face - 1].radial, kappa[face].radial);
        k.add_block(face - 1, [[-c, c], [c, -c]]);
    }
    let r0 = nodes[0];
    if r0 > 0.0 {
        if let Boundary::Dirichlet(g) = bcs.inner {
            let c = r0 * r0 * kappa[0].radial / (centers[0] - r0);
            k.diag[0] -= c;
            source[0] += c * g;
        }
    }
    if let Boundary::Dirichlet(g) = bcs.outer {
        let r = nodes[n];
        let c = r * r * kappa[n - 1].radial / (r - centers[n - 1]);
        k.diag[n - 1] -= c;
        source[n - 1] += c * g;
    }
    RadialOperator { stiffness: k, volumes: mesh.volumes().to_vec(), boundary_source: source }
}
