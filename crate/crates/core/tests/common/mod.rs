//! Oracles shared by the integration tests. Independent of the library's own helpers.

#![allow(dead_code)]

use ebclab::fullsolver::LayerConfig;

/// Least-squares slope of `ln y` against `ln x`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Dense Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Two-point BVP `Ψ'' = λΨ` on `(0, h)` with `n` intervals, second-order
/// differences; returns `Ψ'(0)` from the three-point one-sided stencil.
pub fn bvp_slope_at_zero(lam: f64, a: f64, b: f64, h: f64, n: usize) -> f64 {
    let dx = h / n as f64;
    let m = n - 1;
    let diag = -2.0 - lam * dx * dx;
    // Thomas for constant (1, diag, 1)
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    d[m - 1] = -b;
    d[0] += -a;
    let mut w = diag;
    c[0] = 1.0 / w;
    d[0] /= w;
    for i in 1..m {
        w = diag - c[i - 1];
        c[i] = 1.0 / w;
        d[i] = (d[i] - d[i - 1]) / w;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    let (p0, p1, p2) = (a, d[0], d[1]);
    // Ψ(dx), Ψ(2dx) from the exact ODE Taylor expansion cancels the O(dx²) stencil error
    let raw = (-3.0 * p0 + 4.0 * p1 - p2) / (2.0 * dx);
    let third = lam * (p1 - p0) / dx; // ≈ Ψ''' = λΨ'
    raw + dx * dx / 3.0 * third
}

/// Steady `l = 0` layered shell `(r0, R2)`, `u(r0) = 1`, `u(R2) = 0`, from the
/// six `a + b/r` coefficients.
pub struct ThreeRegionSteady {
    coeffs: Vec<f64>,
    r1: f64,
    rl: f64,
}

impl ThreeRegionSteady {
    pub fn new(r0: f64, c: &LayerConfig) -> Self {
        let (r1, r2, rl) = (c.geom.r1, c.geom.r2, c.geom.r1 + c.delta);
        let val = |r: f64| [1.0, 1.0 / r];
        let der = |r: f64, k: f64| [0.0, -k / (r * r)];
        let mut a = vec![vec![0.0; 6]; 6];
        let mut rhs = vec![0.0; 6];
        let put = |row: &mut Vec<f64>, block: usize, v: [f64; 2], sign: f64| {
            row[2 * block] += sign * v[0];
            row[2 * block + 1] += sign * v[1];
        };
        put(&mut a[0], 0, val(r0), 1.0);
        rhs[0] = 1.0;
        put(&mut a[1], 0, val(r1), 1.0);
        put(&mut a[1], 1, val(r1), -1.0);
        put(&mut a[2], 0, der(r1, c.k1), 1.0);
        put(&mut a[2], 1, der(r1, c.sigma), -1.0);
        put(&mut a[3], 1, val(rl), 1.0);
        put(&mut a[3], 2, val(rl), -1.0);
        put(&mut a[4], 1, der(rl, c.sigma), 1.0);
        put(&mut a[4], 2, der(rl, c.k2), -1.0);
        put(&mut a[5], 2, val(r2), 1.0);
        Self { coeffs: solve_dense(a, rhs), r1, rl }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = if r <= self.r1 {
            0
        } else if r <= self.rl {
            1
        } else {
            2
        };
        self.coeffs[2 * k] + self.coeffs[2 * k + 1] / r
    }
}

/// Manufactured solution `u = e^{-t} p(r) Y_lm` on the layered ball.
///
/// `p' = g/κ_r` with `g = r - c r³`, so the radial flux `κ_r p' = g` is
/// continuous across both interfaces and `p(0)` is regular; `c` makes `p(R2) = 0`.
pub struct Manufactured {
    pub cfg: LayerConfig,
    pub l: u32,
    c: f64,
}

impl Manufactured {
    pub fn new(cfg: LayerConfig, l: u32) -> Self {
        let (r1, rl, r2) = (cfg.geom.r1, cfg.geom.r1 + cfg.delta, cfg.geom.r2);
        let segs = [(0.0, r1, cfg.k1), (r1, rl, cfg.sigma), (rl, r2, cfg.k2)];
        let a: f64 = segs.iter().map(|&(x, y, k)| (y * y - x * x) / 2.0 / k).sum();
        let b: f64 = segs.iter().map(|&(x, y, k)| (y.powi(4) - x.powi(4)) / 4.0 / k).sum();
        Self { cfg, l, c: a / b }
    }

    fn segments(&self) -> [(f64, f64, f64, f64); 3] {
        let c = &self.cfg;
        let (r1, rl, r2) = (c.geom.r1, c.geom.r1 + c.delta, c.geom.r2);
        [(0.0, r1, c.k1, c.k1), (r1, rl, c.sigma, c.mu), (rl, r2, c.k2, c.k2)]
    }

    pub fn profile(&self, r: f64) -> f64 {
        let big_g = |x: f64| x * x / 2.0 - self.c * x.powi(4) / 4.0;
        let mut p = 0.0;
        for (a, b, kr, _) in self.segments() {
            if r <= a {
                break;
            }
            let top = r.min(b);
            p += (big_g(top) - big_g(a)) / kr;
        }
        p
    }

    fn tangential(&self, r: f64) -> f64 {
        self.segments().iter().find(|s| r <= s.1).map_or(self.cfg.k2, |s| s.3)
    }

    pub fn exact(&self, r: f64, t: f64) -> f64 {
        (-t).exp() * self.profile(r)
    }

    /// `u_t - (1/r²)(r² κ_r u')' + κ_t l(l+1) u / r²`.
    pub fn forcing(&self, r: f64, t: f64) -> f64 {
        let ll = (self.l * (self.l + 1)) as f64;
        let p = self.profile(r);
        (-t).exp() * (-p - (3.0 - 5.0 * self.c * r * r) + self.tangential(r) * ll * p / (r * r))
    }
}
