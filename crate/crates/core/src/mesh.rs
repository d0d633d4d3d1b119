//! Radial finite-volume meshes whose material interfaces are always nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Material region a cell belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Inner,
    Layer,
    Outer,
}

/// How cell sizes vary across a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// Geometric sizes, smallest cell at the segment start; the value is largest/smallest.
    FineAtStart(f64),
    /// Geometric sizes, smallest cell at the segment end.
    FineAtEnd(f64),
}

/// One contiguous run of cells of a single region.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub end: f64,
    pub cells: usize,
    pub region: Region,
    pub grading: Grading,
}

/// Cell counts and grading for the standard three-region mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    pub n_inner: usize,
    pub n_layer: usize,
    pub n_outer: usize,
    /// Ratio of largest to smallest bulk cell.
    #[serde(default = "default_grading_ratio")]
    pub grading_ratio: f64,
}

fn default_grading_ratio() -> f64 {
    8.0
}

impl Default for MeshSpec {
    fn default() -> Self {
        Self { n_inner: 32, n_layer: 16, n_outer: 32, grading_ratio: default_grading_ratio() }
    }
}

impl MeshSpec {
    pub fn new(n_inner: usize, n_layer: usize, n_outer: usize) -> Self {
        Self { n_inner, n_layer, n_outer, ..Self::default() }
    }

    /// Every count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_inner: self.n_inner * factor,
            n_layer: self.n_layer * factor,
            n_outer: self.n_outer * factor,
            grading_ratio: self.grading_ratio,
        }
    }
}

/// Spherical radial mesh: nodes `r_0 < r_1 < ... < r_N`, one region per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    nodes: Vec<f64>,
    regions: Vec<Region>,
    centers: Vec<f64>,
    volumes: Vec<f64>,
}

/// Smallest admissible cell width relative to the local radius.
const MIN_RELATIVE_WIDTH: f64 = 1e3 * f64::EPSILON;

impl RadialMesh {
    /// Concatenate segments starting at `r_min`.
    pub fn from_segments(r_min: f64, segments: &[Segment]) -> Result<Self> {
        if r_min < 0.0 {
            return Err(Error::InvalidArgument(format!("r_min = {r_min} < 0")));
        }
        let mut nodes = vec![r_min];
        let mut regions = Vec::new();
        let mut start = r_min;
        for seg in segments {
            if seg.cells == 0 || !(seg.end > start) {
                return Err(Error::InvalidArgument(format!(
                    "empty segment ({start}, {}) with {} cells",
                    seg.end, seg.cells
                )));
            }
            let len = seg.end - start;
            let widths = segment_widths(len, seg.cells, seg.grading)?;
            let min_w = widths.iter().copied().fold(f64::INFINITY, f64::min);
            if min_w < MIN_RELATIVE_WIDTH * seg.end {
                return Err(Error::MeshResolution(format!(
                    "cell width {min_w:e} in ({start}, {}) is below floating-point resolution",
                    seg.end
                )));
            }
            let mut r = start;
            for (k, w) in widths.iter().enumerate() {
                r = if k + 1 == seg.cells { seg.end } else { r + w };
                nodes.push(r);
                regions.push(seg.region);
            }
            start = seg.end;
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::MeshResolution("nodes are not strictly increasing".into()));
        }
        let centers = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let volumes = nodes.windows(2).map(|w| (w[1].powi(3) - w[0].powi(3)) / 3.0).collect();
        Ok(Self { nodes, regions, centers, volumes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Cell centers (arithmetic midpoints).
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Cell volumes `∫ r² dr` (the `4π`-free measure matching orthonormal harmonics).
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn n_cells(&self) -> usize {
        self.regions.len()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("mesh has nodes")
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.nodes[cell + 1] - self.nodes[cell]
    }

    /// Index of the first cell whose region differs from the previous one's and equals `to`.
    pub fn interface_between(&self, from: Region, to: Region) -> Option<usize> {
        (1..self.n_cells()).find(|&i| self.regions[i - 1] == from && self.regions[i] == to)
    }

    pub fn cells_in(&self, region: Region) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_cells()).filter(move |&i| self.regions[i] == region)
    }

    /// Largest cell width.
    pub fn max_width(&self) -> f64 {
        (0..self.n_cells()).map(|i| self.width(i)).fold(0.0, f64::max)
    }
}

fn segment_widths(len: f64, n: usize, grading: Grading) -> Result<Vec<f64>> {
    let ratio = match grading {
        Grading::Uniform => return Ok(vec![len / n as f64; n]),
        Grading::FineAtStart(r) | Grading::FineAtEnd(r) => r,
    };
    if !(ratio >= 1.0) {
        return Err(Error::InvalidArgument(format!("grading ratio {ratio} < 1")));
    }
    if n == 1 || ratio == 1.0 {
        return Ok(vec![len / n as f64; n]);
    }
    let q = ratio.powf(1.0 / (n - 1) as f64);
    let raw: Vec<f64> = (0..n).map(|j| q.powi(j as i32)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| len * x / total).collect();
    if matches!(grading, Grading::FineAtEnd(_)) {
        w.reverse();
    }
    Ok(w)
}

fn check_counts(spec: &MeshSpec) -> Result<()> {
    if spec.n_inner < 4 || spec.n_outer < 4 {
        return Err(Error::InvalidArgument("bulk cell counts must be >= 4".into()));
    }
    if spec.n_layer < 16 {
        return Err(Error::InvalidArgument("layer needs at least 16 cells".into()));
    }
    Ok(())
}

/// Three-region mesh of the ball `(0, R2)` with the layer `(R1, R1+δ)` resolved uniformly.
pub fn build_mesh(r1: f64, delta: f64, r2: f64, spec: &MeshSpec) -> Result<RadialMesh> {
    build_mesh_from(0.0, r1, delta, r2, spec)
}

/// As [`build_mesh`] but starting at `r_min >= 0` (hollow test domains).
pub fn build_mesh_from(
    r_min: f64,
    r1: f64,
    delta: f64,
    r2: f64,
    spec: &MeshSpec,
) -> Result<RadialMesh> {
    check_counts(spec)?;
    let r_layer = r1 + delta;
    if !(delta > 0.0 && r_layer < r2 && r1 > r_min) {
        return Err(Error::InvalidGeometry(format!(
            "need r_min < R1 < R1+δ < R2, got {r_min}, {r1}, {r_layer}, {r2}"
        )));
    }
    if delta / (spec.n_layer as f64) < MIN_RELATIVE_WIDTH * r_layer {
        return Err(Error::MeshResolution(format!(
            "δ = {delta:e} cannot hold {} cells at radius {r_layer}",
            spec.n_layer
        )));
    }
    let g = spec.grading_ratio;
    RadialMesh::from_segments(
        r_min,
        &[
            Segment { end: r1, cells: spec.n_inner, region: Region::Inner, grading: Grading::FineAtEnd(g) },
            Segment { end: r_layer, cells: spec.n_layer, region: Region::Layer, grading: Grading::Uniform },
            Segment { end: r2, cells: spec.n_outer, region: Region::Outer, grading: Grading::FineAtStart(g) },
        ],
    )
}

/// Two-region mesh of the ball used by the effective problems, refined toward `R1` from both sides.
pub fn build_two_region_mesh(
    r1: f64,
    r2: f64,
    n_inner: usize,
    n_outer: usize,
    grading_ratio: f64,
) -> Result<RadialMesh> {
    if n_inner < 4 || n_outer < 4 {
        return Err(Error::InvalidArgument("bulk cell counts must be >= 4".into()));
    }
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::InvalidGeometry(format!("need 0 < R1 < R2, got {r1}, {r2}")));
    }
    RadialMesh::from_segments(
        0.0,
        &[
            Segment {
                end: r1,
                cells: n_inner,
                region: Region::Inner,
                grading: Grading::FineAtEnd(grading_ratio),
            },
            Segment {
                end: r2,
                cells: n_outer,
                region: Region::Outer,
                grading: Grading::FineAtStart(grading_ratio),
            },
        ],
    )
}
