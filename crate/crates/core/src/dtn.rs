//! Harmonic strip extension and the Dirichlet-to-Neumann operators.
//!
//! Per surface mode with eigenvalue `λ` of `-Δ_Γ`, the rescaled strip problem
//! `Ψ'' = λ Ψ` on `(0, h)` with `Ψ(0) = g1`, `Ψ(h) = g2` is solved in closed
//! form. The DtN operators act diagonally on spherical-harmonic coefficients:
//!
//! | kind       | `λ > 0`                  | `λ = 0` | `H = ∞` |
//! |------------|--------------------------|---------|---------|
//! | FirstKind  | `-√λ coth(√λ H)`         | `-1/H`  | `-√λ`   |
//! | SecondKind | `-√λ / sinh(√λ H)`       | `-1/H`  | `0`     |
//! | Combined   | `-√λ tanh(√λ H / 2)`     | `0`     | `-√λ`   |
//!
//! `Combined = FirstKind - SecondKind` holds in every column. Hyperbolic
//! functions are evaluated through `exp_m1` rewrites so large `√λ H` never
//! overflows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{lb_eigenvalue, SphereGeometry, SurfaceFunction};

/// Beyond this value of `√λ H` the hyperbolic factors are snapped to their limits.
pub const SNAP_ARGUMENT: f64 = 700.0;

/// Strip height, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum Height {
    Finite(f64),
    Infinite,
}

impl Height {
    pub fn finite(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(Height::Finite(h))
        } else if h == f64::INFINITY {
            Ok(Height::Infinite)
        } else {
            Err(Error::NonPositiveHeight(h))
        }
    }

    fn validate(self) -> Result<Self> {
        match self {
            Height::Finite(h) if !(h > 0.0) => Err(Error::NonPositiveHeight(h)),
            other => Ok(other),
        }
    }
}

impl std::fmt::Display for Height {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Height {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Height::Infinite),
            other => {
                let h: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("cannot parse height `{s}`")))?;
                Height::finite(h)
            }
        }
    }
}

/// Which DtN operator: `J^H`, `J₁^H` or `J₂^H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DtnKind {
    Combined,
    FirstKind,
    SecondKind,
}

impl DtnKind {
    pub const ALL: [DtnKind; 3] = [DtnKind::Combined, DtnKind::FirstKind, DtnKind::SecondKind];
}

/// Strip boundary-value problem for a whole surface function.
#[derive(Debug, Clone)]
pub struct StripProblem {
    pub h: f64,
    pub g1: SurfaceFunction,
    pub g2: SurfaceFunction,
}

impl StripProblem {
    pub fn new(h: f64, g1: SurfaceFunction, g2: SurfaceFunction) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::NonPositiveHeight(h));
        }
        if g1.lmax() != g2.lmax() {
            return Err(Error::InvalidArgument("g1 and g2 must share lmax".into()));
        }
        Ok(Self { h, g1, g2 })
    }

    /// Flux coefficients `(Ψ_R(·,0), Ψ_R(·,h))` as surface functions.
    pub fn fluxes(&self, geom: &SphereGeometry) -> (SurfaceFunction, SurfaceFunction) {
        let mut at0 = SurfaceFunction::zeros(self.g1.lmax());
        let mut ath = at0.clone();
        let (g1, g2) = (self.g1.coeffs(), self.g2.coeffs());
        for l in 0..=self.g1.lmax() {
            let lam = lb_eigenvalue(l, geom);
            for k in (l * l) as usize..((l + 1) * (l + 1)) as usize {
                at0.coeffs_mut()[k] = psi_r_at_0(lam, g1[k], g2[k], self.h);
                ath.coeffs_mut()[k] = psi_r_at_h(lam, g1[k], g2[k], self.h);
            }
        }
        (at0, ath)
    }
}

/// `coth(x)` for `x > 0`.
fn coth(x: f64) -> f64 {
    if x > SNAP_ARGUMENT {
        1.0
    } else {
        1.0 + 2.0 / (2.0 * x).exp_m1()
    }
}

/// `1/sinh(x)` for `x > 0`.
fn csch(x: f64) -> f64 {
    if x > SNAP_ARGUMENT {
        0.0
    } else {
        -2.0 * (-x).exp() / (-2.0 * x).exp_m1()
    }
}

/// `tanh(x)` for `x >= 0`.
fn tanh_pos(x: f64) -> f64 {
    let e = (-2.0 * x).exp_m1();
    -e / (2.0 + e)
}

/// Coefficients `(A, B)` of `Ψ(R) = A e^{√λ R} + B e^{-√λ R}` with
/// `Ψ(0) = g1n`, `Ψ(h) = g2n`. Requires `λ > 0`.
pub fn strip_coeffs(lam: f64, g1n: f64, g2n: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::NonPositiveHeight(h));
    }
    if !(lam > 0.0) {
        return Err(Error::InvalidArgument(
            "strip_coeffs needs lam > 0; the constant mode uses the linear extension".into(),
        ));
    }
    let x = lam.sqrt() * h;
    let e1 = (-x).exp();
    // 1 - e^{-2x}
    let denom = -(-2.0 * x).exp_m1();
    let a = (g2n * e1 - g1n * e1 * e1) / denom;
    let b = g1n - a;
    Ok((a, b))
}

/// `Ψ_R(0)` for the mode with eigenvalue `lam`.
pub fn psi_r_at_0(lam: f64, g1n: f64, g2n: f64, h: f64) -> f64 {
    if lam == 0.0 {
        return (g2n - g1n) / h;
    }
    let s = lam.sqrt();
    let x = s * h;
    s * (g2n * csch(x) - g1n * coth(x))
}

/// `Ψ_R(h)` for the mode with eigenvalue `lam`.
pub fn psi_r_at_h(lam: f64, g1n: f64, g2n: f64, h: f64) -> f64 {
    if lam == 0.0 {
        return (g2n - g1n) / h;
    }
    let s = lam.sqrt();
    let x = s * h;
    s * (g2n * coth(x) - g1n * csch(x))
}

/// Mode multiplier of the DtN operator of the given kind.
pub fn dtn_mode_multiplier(kind: DtnKind, lam: f64, height: Height) -> Result<f64> {
    let height = height.validate()?;
    if lam < 0.0 {
        return Err(Error::InvalidArgument(format!("negative eigenvalue {lam}")));
    }
    let value = match height {
        Height::Infinite => match kind {
            DtnKind::Combined | DtnKind::FirstKind => -lam.sqrt(),
            DtnKind::SecondKind => 0.0,
        },
        Height::Finite(h) if lam == 0.0 => match kind {
            DtnKind::Combined => 0.0,
            DtnKind::FirstKind | DtnKind::SecondKind => -1.0 / h,
        },
        Height::Finite(h) => {
            let s = lam.sqrt();
            let x = s * h;
            match kind {
                DtnKind::Combined => -s * tanh_pos(0.5 * x),
                DtnKind::FirstKind => -s * coth(x),
                DtnKind::SecondKind => -s * csch(x),
            }
        }
    };
    Ok(value)
}

/// Apply a DtN operator to a surface function, mode by mode.
pub fn apply_dtn(
    kind: DtnKind,
    height: Height,
    g: &SurfaceFunction,
    geom: &SphereGeometry,
) -> Result<SurfaceFunction> {
    let mults = (0..=g.lmax())
        .map(|l| dtn_mode_multiplier(kind, lb_eigenvalue(l, geom), height))
        .collect::<Result<Vec<_>>>()?;
    Ok(g.map_degrees(|l| mults[l as usize]))
}

/// Fractional Laplacian `(-Δ_Γ)^{1/2}`: multiplier `√λ_l`.
pub fn frac_laplacian_half(g: &SurfaceFunction, geom: &SphereGeometry) -> SurfaceFunction {
    g.map_degrees(|l| lb_eigenvalue(l, geom).sqrt())
}
