//! Real spherical-harmonic representation of functions on the inner sphere.
//!
//! Normalization convention (used everywhere in the crate):
//!
//! ```text
//! Y_l0(θ, φ)  = P̄_l0(cos θ)
//! Y_lm(θ, φ)  = √2 · P̄_lm(cos θ) · cos(m φ)      m > 0
//! Y_l,-m(θ, φ) = √2 · P̄_lm(cos θ) · sin(m φ)      m > 0
//! ```
//!
//! where `P̄_lm` are associated Legendre functions scaled so that the
//! complex harmonics `P̄_lm e^{imφ}` are orthonormal on the *unit* sphere.
//! No Condon–Shortley phase is applied. A [`SurfaceFunction`] on the sphere
//! of radius `R1` stores coefficients in this unit-sphere basis; the factor
//! `R1²` is absorbed into [`surface_inner_product`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Concentric geometry: inner sphere of radius `r1` inside the ball of radius `r2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereGeometry {
    pub r1: f64,
    pub r2: f64,
}

impl SphereGeometry {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "need 0 < R1 < R2, got R1={r1}, R2={r2}"
            )));
        }
        Ok(Self { r1, r2 })
    }

    /// Mean curvature of the inner sphere (constant).
    pub fn mean_curvature(&self) -> f64 {
        1.0 / self.r1
    }

    /// Gaussian curvature of the inner sphere (constant).
    pub fn gaussian_curvature(&self) -> f64 {
        1.0 / (self.r1 * self.r1)
    }
}

/// Spherical-harmonic degree and order, `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub l: u32,
    pub m: i32,
}

impl ModeIndex {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > l {
            return Err(Error::InvalidArgument(format!("|m| > l for (l={l}, m={m})")));
        }
        Ok(Self { l, m })
    }

    /// Position of this mode in a coefficient vector: `l² + l + m`.
    pub fn flat(&self) -> usize {
        let l = self.l as i64;
        (l * l + l + self.m as i64) as usize
    }

    pub fn from_flat(idx: usize) -> Self {
        let l = (idx as f64).sqrt() as u32;
        // guard against sqrt rounding for perfect squares
        let l = if ((l + 1) * (l + 1)) as usize <= idx { l + 1 } else { l };
        let m = idx as i64 - (l as i64 * l as i64 + l as i64);
        Self { l, m: m as i32 }
    }

    /// All modes with degree up to `lmax`, in coefficient order.
    pub fn all(lmax: u32) -> impl Iterator<Item = ModeIndex> {
        (0..=lmax).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| ModeIndex { l, m }))
    }
}

/// Number of coefficients for degree `lmax`: `(lmax+1)²`.
pub fn coeff_count(lmax: u32) -> usize {
    let n = lmax as usize + 1;
    n * n
}

/// Function on the inner sphere as real spherical-harmonic coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFunction {
    lmax: u32,
    coeffs: Vec<f64>,
}

impl SurfaceFunction {
    pub fn zeros(lmax: u32) -> Self {
        Self { lmax, coeffs: vec![0.0; coeff_count(lmax)] }
    }

    pub fn from_coeffs(lmax: u32, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != coeff_count(lmax) {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients for lmax={lmax}, got {}",
                coeff_count(lmax),
                coeffs.len()
            )));
        }
        Ok(Self { lmax, coeffs })
    }

    /// A single unit-coefficient mode.
    pub fn unit_mode(lmax: u32, mode: ModeIndex) -> Self {
        let mut f = Self::zeros(lmax);
        f.coeffs[mode.flat()] = 1.0;
        f
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, mode: ModeIndex) -> f64 {
        self.coeffs[mode.flat()]
    }

    pub fn set(&mut self, mode: ModeIndex, value: f64) {
        self.coeffs[mode.flat()] = value;
    }

    /// Multiply every coefficient of degree `l` by `multiplier(l)`.
    pub fn map_degrees(&self, mut multiplier: impl FnMut(u32) -> f64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            let s = multiplier(l);
            let start = (l * l) as usize;
            for c in &mut out.coeffs[start..start + 2 * l as usize + 1] {
                *c *= s;
            }
        }
        out
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.lmax != other.lmax {
            return Err(Error::InvalidArgument("lmax mismatch".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { lmax: self.lmax, coeffs })
    }
}

/// Eigenvalue of `-Δ_Γ` on the sphere of radius `R1` for degree `l`.
pub fn lb_eigenvalue(l: u32, geom: &SphereGeometry) -> f64 {
    let l = l as f64;
    l * (l + 1.0) / (geom.r1 * geom.r1)
}

/// Normalized associated Legendre functions `P̄_lm(x)` for `0 <= m <= l <= lmax`,
/// stored triangularly at `l(l+1)/2 + m`.
pub fn normalized_legendre(lmax: u32, x: f64) -> Vec<f64> {
    let lmax = lmax as usize;
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
    let s = (1.0 - x * x).max(0.0).sqrt();
    p[0] = 0.5 / PI.sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
        }
        if m < lmax {
            p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[tri(m, m)];
        }
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - 1.0;
            let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
            p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// All real spherical harmonics up to `lmax` at one point, in coefficient order.
pub fn real_harmonics(lmax: u32, theta: f64, phi: f64) -> Vec<f64> {
    let p = normalized_legendre(lmax, theta.cos());
    let mut out = vec![0.0; coeff_count(lmax)];
    fill_harmonics(lmax, &p, phi, &mut out);
    out
}

fn fill_harmonics(lmax: u32, legendre: &[f64], phi: f64, out: &mut [f64]) {
    let sqrt2 = std::f64::consts::SQRT_2;
    for l in 0..=lmax as usize {
        let base = l * l + l;
        let tri = l * (l + 1) / 2;
        out[base] = legendre[tri];
        for m in 1..=l {
            let (sin, cos) = (m as f64 * phi).sin_cos();
            let v = sqrt2 * legendre[tri + m];
            out[base + m] = v * cos;
            out[base - m] = v * sin;
        }
    }
}

/// Pointwise value of `f` at colatitude `theta`, longitude `phi`.
pub fn synthesize(f: &SurfaceFunction, theta: f64, phi: f64) -> f64 {
    real_harmonics(f.lmax, theta, phi).iter().zip(&f.coeffs).map(|(y, c)| y * c).sum()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor grid on the unit sphere: Gauss–Legendre in `cos θ`, uniform in `φ`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    phi: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidArgument("empty quadrature grid".into()));
        }
        let (x, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let theta = x.iter().map(|x| x.acos()).collect();
        let phi = (0..n_phi).map(|j| j as f64 * dphi).collect();
        let weights = w.iter().map(|w| w * dphi).collect();
        Ok(Self { n_theta, n_phi, theta, phi, weights })
    }

    /// Smallest grid that integrates products of degree-`lmax` harmonics exactly.
    pub fn for_lmax(lmax: u32) -> Self {
        let l = lmax as usize;
        Self::new(l + 1, 2 * l + 1).expect("non-empty grid")
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact_for(&self, lmax: u32) -> bool {
        let l = lmax as usize;
        self.n_theta > l && self.n_phi > 2 * l
    }

    /// Grid points `(θ, φ, weight)` in row-major order (θ outer).
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.theta.iter().zip(&self.weights).flat_map(move |(&t, &w)| {
            self.phi.iter().map(move |&p| (t, p, w))
        })
    }

    /// Sample `f(θ, φ)` on the grid.
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        self.points().map(|(t, p, _)| f(t, p)).collect()
    }

    /// Sample a surface function on the grid.
    pub fn synthesize(&self, f: &SurfaceFunction) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut y = vec![0.0; coeff_count(f.lmax)];
        for &t in &self.theta {
            let p = normalized_legendre(f.lmax, t.cos());
            for &ph in &self.phi {
                fill_harmonics(f.lmax, &p, ph, &mut y);
                out.push(y.iter().zip(&f.coeffs).map(|(a, b)| a * b).sum());
            }
        }
        out
    }

    /// Unit-sphere quadrature of grid values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.points().zip(values).map(|((_, _, w), v)| w * v).sum()
    }
}

/// Project grid values onto the real harmonics up to `lmax`.
pub fn analyze(grid: &QuadratureGrid, values: &[f64], lmax: u32) -> Result<SurfaceFunction> {
    if !grid.is_exact_for(lmax) {
        return Err(Error::GridTooCoarse { lmax, n_theta: grid.n_theta, n_phi: grid.n_phi });
    }
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} grid values, got {}",
            grid.len(),
            values.len()
        )));
    }
    let mut out = SurfaceFunction::zeros(lmax);
    let mut y = vec![0.0; coeff_count(lmax)];
    let mut k = 0;
    for (&t, &w) in grid.theta.iter().zip(&grid.weights) {
        let p = normalized_legendre(lmax, t.cos());
        for &ph in &grid.phi {
            fill_harmonics(lmax, &p, ph, &mut y);
            let wv = w * values[k];
            for (c, yv) in out.coeffs.iter_mut().zip(&y) {
                *c += wv * yv;
            }
            k += 1;
        }
    }
    Ok(out)
}

/// `L²(Γ₁)` inner product: `R1² · Σ f_lm g_lm`.
pub fn surface_inner_product(
    f: &SurfaceFunction,
    g: &SurfaceFunction,
    geom: &SphereGeometry,
) -> Result<f64> {
    if f.lmax != g.lmax {
        return Err(Error::InvalidArgument("lmax mismatch in inner product".into()));
    }
    let dot: f64 = f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a * b).sum();
    Ok(geom.r1 * geom.r1 * dot)
}

/// `L²(Γ₁)` norm via Parseval.
pub fn surface_norm(f: &SurfaceFunction, geom: &SphereGeometry) -> f64 {
    geom.r1 * f.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> SphereGeometry {
        SphereGeometry::new(1.0, 2.0).unwrap()
    }

    fn random_fn(lmax: u32, rng: &mut ChaCha8Rng) -> SurfaceFunction {
        let c = (0..coeff_count(lmax)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SurfaceFunction::from_coeffs(lmax, c).unwrap()
    }

    #[test]
    fn geometry_rejects_bad_radii() {
        assert!(SphereGeometry::new(0.0, 1.0).is_err());
        assert!(SphereGeometry::new(2.0, 1.0).is_err());
        let g = SphereGeometry::new(2.0, 3.0).unwrap();
        assert_eq!(g.mean_curvature(), 0.5);
        assert_eq!(g.gaussian_curvature(), 0.25);
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(lb_eigenvalue(0, &unit()), 0.0);
        assert_eq!(lb_eigenvalue(1, &unit()), 2.0);
        assert_eq!(lb_eigenvalue(3, &SphereGeometry::new(2.0, 3.0).unwrap()), 3.0);
        let g = unit();
        for l in 0..50 {
            assert!(lb_eigenvalue(l + 1, &g) > lb_eigenvalue(l, &g));
        }
    }

    #[test]
    fn flat_index_round_trip() {
        for (i, mode) in ModeIndex::all(12).enumerate() {
            assert_eq!(mode.flat(), i);
            assert_eq!(ModeIndex::from_flat(i), mode);
        }
        assert!(ModeIndex::new(1, 2).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact up to degree 11
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((int - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn synthesize_examples() {
        let f = SurfaceFunction::zeros(4);
        assert_eq!(synthesize(&f, 0.3, 1.2), 0.0);
        let y00 = SurfaceFunction::unit_mode(4, ModeIndex { l: 0, m: 0 });
        for (t, p) in [(0.0, 0.0), (1.0, 2.0), (PI, 5.0)] {
            assert!((synthesize(&y00, t, p) - 0.282_094_791_773_878_1).abs() < 1e-15);
        }
        let y10 = SurfaceFunction::unit_mode(4, ModeIndex { l: 1, m: 0 });
        assert!((synthesize(&y10, 0.0, 0.0) - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        // quadrature oracle: ∫ Y10² = 1
        let grid = QuadratureGrid::for_lmax(4);
        let v = grid.synthesize(&y10);
        let norm2 = grid.integrate(&v.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!((norm2 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn harmonics_are_orthonormal_on_exact_grid() {
        let lmax = 6;
        let grid = QuadratureGrid::for_lmax(lmax);
        let basis: Vec<Vec<f64>> = ModeIndex::all(lmax)
            .map(|m| grid.synthesize(&SurfaceFunction::unit_mode(lmax, m)))
            .collect();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((grid.integrate(&prod) - expected).abs() < 1e-13, "({i},{j})");
            }
        }
    }

    #[test]
    fn analyze_constant_and_y21() {
        let grid = QuadratureGrid::for_lmax(5);
        let c = 2.5;
        let f = analyze(&grid, &grid.sample(|_, _| c), 5).unwrap();
        assert!((f.coeff(ModeIndex { l: 0, m: 0 }) - c * (4.0 * PI).sqrt()).abs() < 1e-12);
        for (i, v) in f.coeffs().iter().enumerate().skip(1) {
            assert!(v.abs() < 1e-12, "coeff {i} = {v}");
        }
        // closed form of real Y21 (no Condon–Shortley phase)
        let y21 = |t: f64, p: f64| (15.0 / (4.0 * PI)).sqrt() * t.sin() * t.cos() * p.cos();
        let f = analyze(&grid, &grid.sample(y21), 5).unwrap();
        for mode in ModeIndex::all(5) {
            let expected = if mode == (ModeIndex { l: 2, m: 1 }) { 1.0 } else { 0.0 };
            assert!((f.coeff(mode) - expected).abs() < 1e-12, "{mode:?}");
        }
    }

    #[test]
    fn analyze_rejects_coarse_grid() {
        let grid = QuadratureGrid::new(3, 9).unwrap();
        let v = vec![0.0; grid.len()];
        assert!(matches!(analyze(&grid, &v, 4), Err(Error::GridTooCoarse { .. })));
        let grid = QuadratureGrid::new(5, 8).unwrap();
        let v = vec![0.0; grid.len()];
        assert!(analyze(&grid, &v, 4).is_err());
    }

    #[test]
    fn analyze_synthesize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for lmax in [0, 1, 5, 12] {
            let f = random_fn(lmax, &mut rng);
            let grid = QuadratureGrid::for_lmax(lmax);
            let back = analyze(&grid, &grid.synthesize(&f), lmax).unwrap();
            for (a, b) in f.coeffs().iter().zip(back.coeffs()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inner_product_matches_quadrature() {
        let geom = SphereGeometry::new(1.7, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_fn(8, &mut rng);
        let g = random_fn(8, &mut rng);
        let grid = QuadratureGrid::for_lmax(8);
        let prod: Vec<f64> =
            grid.synthesize(&f).iter().zip(grid.synthesize(&g)).map(|(a, b)| a * b).collect();
        let quad = geom.r1 * geom.r1 * grid.integrate(&prod);
        let ip = surface_inner_product(&f, &g, &geom).unwrap();
        assert!((ip - quad).abs() < 1e-10);
        // symmetry and bilinearity
        assert_eq!(ip, surface_inner_product(&g, &f, &geom).unwrap());
        let h = random_fn(8, &mut rng);
        let lhs = surface_inner_product(&f.lin_comb(2.0, &h, -0.5).unwrap(), &g, &geom).unwrap();
        let rhs = 2.0 * ip - 0.5 * surface_inner_product(&h, &g, &geom).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn inner_product_examples() {
        let g = unit();
        let a = SurfaceFunction::unit_mode(3, ModeIndex { l: 2, m: -1 });
        let b = SurfaceFunction::unit_mode(3, ModeIndex { l: 1, m: 1 });
        assert_eq!(surface_inner_product(&a, &a, &g).unwrap(), 1.0);
        assert_eq!(surface_inner_product(&a, &b, &g).unwrap(), 0.0);
        assert!(surface_inner_product(&a, &SurfaceFunction::zeros(2), &g).is_err());
        assert_eq!(surface_norm(&a, &SphereGeometry::new(2.0, 3.0).unwrap()), 2.0);
    }
}
