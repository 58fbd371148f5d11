//! Grid functions on the round unit sphere.
//!
//! The colatitude grid is cell-centred, `θ_j = (j + ½)π/N_θ`, so no node sits
//! on a pole. Values across a pole are supplied by reflection: for
//! axisymmetric data the ghost of node `j = 0` is node `0` itself (and
//! likewise at the south pole); in full mode the ghost of `(0, ϕ)` is
//! `(0, ϕ + π)`, which requires an even `N_ϕ`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereMode {
    Axisymmetric,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereGrid {
    pub mode: SphereMode,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl SphereGrid {
    pub fn axisymmetric(n_theta: usize) -> Self {
        assert!(n_theta >= 3, "need at least 3 colatitude cells");
        Self {
            mode: SphereMode::Axisymmetric,
            n_theta,
            n_phi: 1,
        }
    }

    pub fn full(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta >= 3, "need at least 3 colatitude cells");
        assert!(n_phi >= 4 && n_phi % 2 == 0, "n_phi must be even and >= 4");
        Self {
            mode: SphereMode::Full,
            n_theta,
            n_phi,
        }
    }

    #[inline]
    pub fn d_theta(&self) -> f64 {
        PI / self.n_theta as f64
    }

    #[inline]
    pub fn d_phi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    #[inline]
    pub fn theta(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.d_theta()
    }

    #[inline]
    pub fn phi(&self, l: usize) -> f64 {
        l as f64 * self.d_phi()
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta).map(|j| self.theta(j)).collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn idx(&self, j: usize, l: usize) -> usize {
        j * self.n_phi + l
    }
}

/// Colatitude neighbours of cell `j` with even reflection across the poles.
#[inline]
pub fn theta_neighbors(j: usize, n_theta: usize) -> (usize, usize) {
    let jm = if j == 0 { 0 } else { j - 1 };
    let jp = if j + 1 == n_theta { j } else { j + 1 };
    (jm, jp)
}

/// Central first and second colatitude differences of an axisymmetric
/// profile at cell `j`.
#[inline]
pub fn theta_derivatives(values: &[f64], j: usize, d_theta: f64) -> (f64, f64) {
    let (jm, jp) = theta_neighbors(j, values.len());
    let (fm, f0, fp) = (values[jm], values[j], values[jp]);
    (
        (fp - fm) / (2.0 * d_theta),
        (fp - 2.0 * f0 + fm) / (d_theta * d_theta),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereFunction {
    pub grid: SphereGrid,
    /// Row-major in `(θ_j, ϕ_l)`.
    pub values: Vec<f64>,
}

/// First and second partial derivatives at a node.
#[derive(Clone, Copy, Debug, Default)]
struct LocalJet {
    t: f64,
    tt: f64,
    p: f64,
    pp: f64,
}

impl SphereFunction {
    pub fn new(grid: SphereGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at node {bad}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: SphereGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_axisymmetric_fn(n_theta: usize, f: impl Fn(f64) -> f64) -> Self {
        let grid = SphereGrid::axisymmetric(n_theta);
        let values = grid.thetas().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn from_full_fn(n_theta: usize, n_phi: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let grid = SphereGrid::full(n_theta, n_phi);
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n_theta {
            for l in 0..n_phi {
                values.push(f(grid.theta(j), grid.phi(l)));
            }
        }
        Self { grid, values }
    }

    pub fn at(&self, j: usize, l: usize) -> f64 {
        self.values[self.grid.idx(j, l)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    fn jet(&self, j: usize, l: usize) -> LocalJet {
        let g = &self.grid;
        let dt = g.d_theta();
        let f0 = self.at(j, l);
        match g.mode {
            SphereMode::Axisymmetric => {
                let (t, tt) = theta_derivatives(&self.values, j, dt);
                LocalJet {
                    t,
                    tt,
                    ..Default::default()
                }
            }
            SphereMode::Full => {
                let np = g.n_phi;
                let opposite = (l + np / 2) % np;
                let fm = if j == 0 {
                    self.at(0, opposite)
                } else {
                    self.at(j - 1, l)
                };
                let fp = if j + 1 == g.n_theta {
                    self.at(j, opposite)
                } else {
                    self.at(j + 1, l)
                };
                let dp = g.d_phi();
                let gm = self.at(j, (l + np - 1) % np);
                let gp = self.at(j, (l + 1) % np);
                LocalJet {
                    t: (fp - fm) / (2.0 * dt),
                    tt: (fp - 2.0 * f0 + fm) / (dt * dt),
                    p: (gp - gm) / (2.0 * dp),
                    pp: (gp - 2.0 * f0 + gm) / (dp * dp),
                }
            }
        }
    }

    fn nodewise(&self, f: impl Fn(f64, LocalJet) -> f64) -> Self {
        let g = self.grid;
        let mut values = Vec::with_capacity(g.len());
        for j in 0..g.n_theta {
            let th = g.theta(j);
            for l in 0..g.n_phi {
                values.push(f(th, self.jet(j, l)));
            }
        }
        Self { grid: g, values }
    }

    /// `∂_θ f` by central differences.
    pub fn d_theta(&self) -> Self {
        self.nodewise(|_, d| d.t)
    }

    /// `|∇f|²` with respect to the round metric.
    pub fn grad_norm_sq(&self) -> Self {
        self.nodewise(|th, d| d.t * d.t + d.p * d.p / th.sin().powi(2))
    }

    /// Laplace-Beltrami operator of the round sphere.
    pub fn laplacian(&self) -> Self {
        self.nodewise(|th, d| d.tt + d.t / th.tan() + d.pp / th.sin().powi(2))
    }

    /// `⟨∇a, ∇b⟩` with respect to the round metric.
    pub fn grad_inner(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let g = self.grid;
        let mut values = Vec::with_capacity(g.len());
        for j in 0..g.n_theta {
            let s2 = g.theta(j).sin().powi(2);
            for l in 0..g.n_phi {
                let a = self.jet(j, l);
                let b = other.jet(j, l);
                values.push(a.t * b.t + a.p * b.p / s2);
            }
        }
        Ok(Self { grid: g, values })
    }

    /// Midpoint-rule integral over the sphere.
    pub fn integrate(&self) -> f64 {
        let g = self.grid;
        let dphi = match g.mode {
            SphereMode::Axisymmetric => 2.0 * PI,
            SphereMode::Full => g.d_phi(),
        };
        let mut acc = 0.0;
        for j in 0..g.n_theta {
            let w = g.theta(j).sin() * g.d_theta() * dphi;
            for l in 0..g.n_phi {
                acc += w * self.at(j, l);
            }
        }
        acc
    }

    /// CSV with header; `theta,value` (axisymmetric) or `theta,phi,value`.
    pub fn to_csv(&self) -> String {
        let g = self.grid;
        let mut out = String::new();
        match g.mode {
            SphereMode::Axisymmetric => {
                out.push_str("theta,value\n");
                for j in 0..g.n_theta {
                    let _ = writeln!(out, "{},{}", g.theta(j), self.at(j, 0));
                }
            }
            SphereMode::Full => {
                out.push_str("theta,phi,value\n");
                for j in 0..g.n_theta {
                    for l in 0..g.n_phi {
                        let _ = writeln!(out, "{},{},{}", g.theta(j), g.phi(l), self.at(j, l));
                    }
                }
            }
        }
        out
    }

    /// Parse the axisymmetric `theta,value` CSV produced by [`to_csv`](Self::to_csv).
    /// Rows must be on the cell-centred grid in increasing order.
    pub fn from_axisymmetric_csv(text: &str) -> Result<Self> {
        let rows = parse_theta_value_csv(text)?;
        let n = rows.len();
        if n < 3 {
            return Err(Error::Parse(format!("need at least 3 rows, got {n}")));
        }
        let grid = SphereGrid::axisymmetric(n);
        for (j, &(th, _)) in rows.iter().enumerate() {
            if (th - grid.theta(j)).abs() > 1e-9 {
                return Err(Error::GridMismatch(format!(
                    "row {j}: theta {th} is not the grid node {}",
                    grid.theta(j)
                )));
            }
        }
        Self::new(grid, rows.into_iter().map(|(_, v)| v).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text)?;
        Self::new(f.grid, f.values)
    }
}

/// Parse `theta,value` rows, skipping a header and blank or `#` lines.
pub fn parse_theta_value_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',').map(str::trim);
        let (a, b) = match (parts.next(), parts.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1))),
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => rows.push((x, y)),
            _ if rows.is_empty() && lineno == 0 => continue,
            _ => return Err(Error::Parse(format!("line {}: not numeric: {line}", lineno + 1))),
        }
    }
    Ok(rows)
}
