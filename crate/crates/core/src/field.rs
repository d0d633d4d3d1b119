//! Per-mode radial data: initial conditions and forcing.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{RadialMesh, Region};
use crate::spectral::{analyze, ModeIndex, QuadratureGrid};

/// A field given mode by mode, sampled at cell centers of a radial mesh.
pub trait ModeField: Send + Sync {
    /// Modes with a (possibly) nonzero profile.
    fn modes(&self) -> Vec<ModeIndex>;

    fn sample(&self, mode: ModeIndex, mesh: &RadialMesh, t: f64) -> Vec<f64>;

    fn sample_all(&self, mesh: &RadialMesh, t: f64) -> BTreeMap<ModeIndex, Vec<f64>> {
        self.modes().into_iter().map(|m| (m, self.sample(m, mesh, t))).collect()
    }
}

/// The zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl ModeField for ZeroField {
    fn modes(&self) -> Vec<ModeIndex> {
        Vec::new()
    }

    fn sample(&self, _: ModeIndex, mesh: &RadialMesh, _: f64) -> Vec<f64> {
        vec![0.0; mesh.n_cells()]
    }
}

pub type Profile = Arc<dyn Fn(f64, Region, f64) -> f64 + Send + Sync>;

/// Finite sum of `profile(r, region, t) · Y_lm`.
#[derive(Clone, Default)]
pub struct SeparableField {
    terms: BTreeMap<ModeIndex, Profile>,
}

impl SeparableField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, mode: ModeIndex, profile: Profile) -> Self {
        self.terms.insert(mode, profile);
        self
    }

    pub fn insert(&mut self, mode: ModeIndex, profile: Profile) {
        self.terms.insert(mode, profile);
    }
}

impl ModeField for SeparableField {
    fn modes(&self) -> Vec<ModeIndex> {
        self.terms.keys().copied().collect()
    }

    fn sample(&self, mode: ModeIndex, mesh: &RadialMesh, t: f64) -> Vec<f64> {
        match self.terms.get(&mode) {
            Some(p) => mesh.centers().iter().zip(mesh.regions()).map(|(&r, &g)| p(r, g, t)).collect(),
            None => vec![0.0; mesh.n_cells()],
        }
    }
}

/// Off-centre Gaussian `A exp(-|x-c|²/w²)`, projected onto harmonics at every radius.
#[derive(Debug, Clone)]
pub struct GaussianField {
    pub center: [f64; 3],
    pub width: f64,
    pub amplitude: f64,
    pub lmax: u32,
}

impl GaussianField {
    fn project(&self, r: f64, grid: &QuadratureGrid) -> Vec<f64> {
        let [cx, cy, cz] = self.center;
        let w2 = self.width * self.width;
        let values = grid.sample(|t, p| {
            let (st, ct) = t.sin_cos();
            let (sp, cp) = p.sin_cos();
            let d2 = (r * st * cp - cx).powi(2) + (r * st * sp - cy).powi(2) + (r * ct - cz).powi(2);
            self.amplitude * (-d2 / w2).exp()
        });
        analyze(grid, &values, self.lmax).expect("grid is exact").coeffs().to_vec()
    }

    fn grid(&self) -> QuadratureGrid {
        QuadratureGrid::for_lmax(2 * self.lmax + 8)
    }
}

impl ModeField for GaussianField {
    fn modes(&self) -> Vec<ModeIndex> {
        ModeIndex::all(self.lmax).collect()
    }

    fn sample(&self, mode: ModeIndex, mesh: &RadialMesh, _: f64) -> Vec<f64> {
        let grid = self.grid();
        mesh.centers().iter().map(|&r| self.project(r, &grid)[mode.flat()]).collect()
    }

    fn sample_all(&self, mesh: &RadialMesh, _: f64) -> BTreeMap<ModeIndex, Vec<f64>> {
        let grid = self.grid();
        let per_radius: Vec<Vec<f64>> = mesh.centers().iter().map(|&r| self.project(r, &grid)).collect();
        self.modes()
            .into_iter()
            .map(|m| (m, per_radius.iter().map(|c| c[m.flat()]).collect()))
            .collect()
    }
}

/// Radial shape of a preset mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialShape {
    /// `(r/R2)^l (1 - (r/R2)²)²`: smooth, regular at the origin, zero at `R2`.
    #[default]
    Bump,
    Constant,
    /// `sin(π r/R2) / (π r/R2)`, the slowest decaying radial mode of the ball.
    BallEigenfunction,
}

impl RadialShape {
    pub fn eval(self, l: u32, r: f64, r2: f64) -> f64 {
        let x = r / r2;
        match self {
            RadialShape::Bump => x.powi(l as i32) * (1.0 - x * x).powi(2),
            RadialShape::Constant => 1.0,
            RadialShape::BallEigenfunction => {
                let y = std::f64::consts::PI * x;
                if y == 0.0 {
                    1.0
                } else {
                    y.sin() / y
                }
            }
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Initial data presets available from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPreset {
    Zero {},
    SingleMode {
        l: u32,
        m: i32,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        shape: RadialShape,
    },
    /// Every mode up to `lmax` with a bump profile and deterministic, decaying weights.
    MultiMode {
        #[serde(default = "one")]
        amplitude: f64,
    },
    GaussianBump {
        center: [f64; 3],
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

/// Weight of mode `(l, m)` in the multi-mode preset.
pub fn multi_mode_weight(mode: ModeIndex) -> f64 {
    let (l, m) = (mode.l as f64, mode.m as f64);
    (0.7 + 1.3 * l + 0.9 * m).cos() / ((1.0 + l) * (1.0 + l))
}

impl InitialPreset {
    pub fn build(&self, lmax: u32, r2: f64) -> Result<Arc<dyn ModeField>> {
        Ok(match *self {
            InitialPreset::Zero {} => Arc::new(ZeroField),
            InitialPreset::SingleMode { l, m, amplitude, shape } => {
                let mode = ModeIndex::new(l, m)?;
                if l > lmax {
                    return Err(Error::InvalidArgument(format!("mode l={l} exceeds lmax={lmax}")));
                }
                let p: Profile = Arc::new(move |r, _, _| amplitude * shape.eval(l, r, r2));
                Arc::new(SeparableField::new().with(mode, p))
            }
            InitialPreset::MultiMode { amplitude } => {
                let mut f = SeparableField::new();
                for mode in ModeIndex::all(lmax) {
                    let w = amplitude * multi_mode_weight(mode);
                    let l = mode.l;
                    f.insert(mode, Arc::new(move |r, _, _| w * RadialShape::Bump.eval(l, r, r2)));
                }
                Arc::new(f)
            }
            InitialPreset::GaussianBump { center, width, amplitude } => {
                if !(width > 0.0) {
                    return Err(Error::InvalidArgument("gaussian width must be positive".into()));
                }
                Arc::new(GaussianField { center, width, amplitude, lmax })
            }
        })
    }
}

/// Forcing presets available from configuration files (time independent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingPreset {
    Zero {},
    SingleMode {
        l: u32,
        m: i32,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        shape: RadialShape,
    },
}

impl ForcingPreset {
    pub fn build(&self, r2: f64) -> Result<Arc<dyn ModeField>> {
        Ok(match *self {
            ForcingPreset::Zero {} => Arc::new(ZeroField),
            ForcingPreset::SingleMode { l, m, amplitude, shape } => {
                let mode = ModeIndex::new(l, m)?;
                let p: Profile = Arc::new(move |r, _, _| amplitude * shape.eval(l, r, r2));
                Arc::new(SeparableField::new().with(mode, p))
            }
        })
    }
}
