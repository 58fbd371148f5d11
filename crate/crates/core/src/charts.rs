//! Exterior Schwarzschild charts: the standard `(t, x)` chart, the retarded
//! null chart `(θ, ϕ, s, v)` with `v = t - r*` and `s = 1/r`, and the
//! compactified unphysical metric `ḡ = s² g`.
//!
//! Coordinate order in the null chart is fixed as `(y¹, y², s, v)` with
//! `(y¹, y²) = (θ, ϕ)`; the round metric is `σ = dθ² + sin²θ dϕ²`.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Schwarzschild mass in geometric units (`G = c = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mass(f64);

impl Mass {
    pub fn new(m: f64) -> Result<Self> {
        if m.is_finite() && m > 0.0 {
            Ok(Self(m))
        } else {
            Err(Error::Domain(format!("mass must be positive, got {m}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Upper end `1/(2m)` of the exterior range of `s`.
    #[inline]
    pub fn s_horizon(self) -> f64 {
        0.5 / self.0
    }

    /// `h = 1 - 2m s`.
    #[inline]
    pub fn h_of_s(self, s: f64) -> f64 {
        1.0 - 2.0 * self.0 * s
    }
}

impl Default for Mass {
    fn default() -> Self {
        Self(1.0)
    }
}

impl TryFrom<f64> for Mass {
    type Error = Error;
    fn try_from(m: f64) -> Result<Self> {
        Mass::new(m)
    }
}

impl From<Mass> for f64 {
    fn from(m: Mass) -> f64 {
        m.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StandardPoint {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl StandardPoint {
    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullPoint {
    pub v: f64,
    pub s: f64,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    /// `ḡ` in `(θ, ϕ, s, v)`.
    NullUnphysical,
    /// `g = s⁻² ḡ` in `(θ, ϕ, s, v)`.
    NullPhysical,
    /// `g` in `(t, x¹, x², x³)`.
    StandardCartesian,
}

/// Symmetric 4×4 metric components in a named chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricAtPoint {
    pub chart: Chart,
    pub components: [[f64; 4]; 4],
}

impl MetricAtPoint {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.components[i][j])
    }

    pub fn dot(&self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                acc += self.components[i][j] * a[i] * b[j];
            }
        }
        acc
    }

    /// Number of negative eigenvalues.
    pub fn negative_eigenvalues(&self) -> usize {
        let eig = SymmetricEigen::new(self.matrix());
        eig.eigenvalues.iter().filter(|&&l| l < 0.0).count()
    }

    pub fn is_lorentzian(&self) -> bool {
        let eig = SymmetricEigen::new(self.matrix());
        let neg = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
        let pos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
        neg == 1 && pos == 3
    }

    pub fn scaled(&self, factor: f64, chart: Chart) -> MetricAtPoint {
        let mut c = self.components;
        for row in c.iter_mut() {
            for x in row.iter_mut() {
                *x *= factor;
            }
        }
        MetricAtPoint {
            chart,
            components: c,
        }
    }
}

fn check_radius(r: f64, m: Mass) -> Result<()> {
    if !(r.is_finite() && r > 2.0 * m.get()) {
        return Err(Error::Domain(format!(
            "radius {r} is not outside the horizon 2m = {}",
            2.0 * m.get()
        )));
    }
    Ok(())
}

fn check_s(s: f64, m: Mass) -> Result<()> {
    if !(s.is_finite() && s > 0.0 && s < m.s_horizon()) {
        return Err(Error::Domain(format!(
            "s = {s} outside (0, 1/(2m)) = (0, {})",
            m.s_horizon()
        )));
    }
    Ok(())
}

/// Tortoise coordinate `r* = r + 2m log(r/(2m) - 1)`.
pub fn r_star(r: f64, m: Mass) -> Result<f64> {
    check_radius(r, m)?;
    let two_m = 2.0 * m.get();
    Ok(r + two_m * ((r - two_m) / two_m).ln())
}

/// `dr*/dr = 1/h`.
pub fn r_star_prime(r: f64, m: Mass) -> f64 {
    1.0 / (1.0 - 2.0 * m.get() / r)
}

/// Inverse of [`r_star`] on `(2m, ∞)`.
///
/// Writing `r = 2m(1 + e^y)` turns `r* = rstar` into `e^y + y = rstar/(2m) - 1`,
/// which is convex and increasing in `y`; Newton started at a point on the
/// right of the root decreases monotonically onto it.
pub fn r_from_rstar(rstar: f64, m: Mass) -> Result<f64> {
    if !rstar.is_finite() {
        return Err(Error::Domain(format!("r* must be finite, got {rstar}")));
    }
    let two_m = 2.0 * m.get();
    let c = rstar / two_m - 1.0;
    let mut y = if c > 1.0 { c.ln() } else { c };
    // Bracket: y_lo has g(y_lo) <= c.
    let mut y_lo = if c > 1.0 { 0.0 } else { c - 1.0 };
    while y_lo.exp() + y_lo > c {
        y_lo -= 1.0 + y_lo.abs();
    }
    for _ in 0..200 {
        let ey = y.exp();
        let g = ey + y - c;
        let step = g / (ey + 1.0);
        let mut next = y - step;
        if !(next > y_lo) {
            next = 0.5 * (y + y_lo);
        }
        if g < 0.0 {
            y_lo = y;
        }
        let done = (next - y).abs() <= 1e-15 * (1.0 + y.abs());
        y = next;
        if done {
            break;
        }
    }
    Ok(two_m * (1.0 + y.exp()))
}

/// `ḡ` and `ḡ⁻¹` at a null-chart point.
pub fn unphysical_metric(p: &NullPoint, m: Mass) -> Result<(MetricAtPoint, MetricAtPoint)> {
    check_s(p.s, m)?;
    Ok(unphysical_metric_unchecked(p.s, p.theta, m))
}

/// Same as [`unphysical_metric`] but also accepts `s = 0` (null infinity).
pub fn unphysical_metric_unchecked(s: f64, theta: f64, m: Mass) -> (MetricAtPoint, MetricAtPoint) {
    let sin2 = theta.sin().powi(2);
    let gvv = -s * s * m.h_of_s(s);
    let mut g = [[0.0; 4]; 4];
    g[0][0] = 1.0;
    g[1][1] = sin2;
    g[2][3] = 1.0;
    g[3][2] = 1.0;
    g[3][3] = gvv;
    let mut gi = [[0.0; 4]; 4];
    gi[0][0] = 1.0;
    gi[1][1] = 1.0 / sin2;
    gi[2][2] = -gvv;
    gi[2][3] = 1.0;
    gi[3][2] = 1.0;
    (
        MetricAtPoint {
            chart: Chart::NullUnphysical,
            components: g,
        },
        MetricAtPoint {
            chart: Chart::NullUnphysical,
            components: gi,
        },
    )
}

/// Physical `g = s⁻² ḡ` and `g⁻¹ = s² ḡ⁻¹` in the null chart.
pub fn physical_null_metric(p: &NullPoint, m: Mass) -> Result<(MetricAtPoint, MetricAtPoint)> {
    let (g, gi) = unphysical_metric(p, m)?;
    let s2 = p.s * p.s;
    Ok((
        g.scaled(1.0 / s2, Chart::NullPhysical),
        gi.scaled(s2, Chart::NullPhysical),
    ))
}

/// Schwarzschild metric `-h dt² + g_ij dx^i dx^j` with
/// `g_ij = δ_ij + (h⁻¹ - 1) r⁻² x^i x^j`, and its inverse.
pub fn standard_metric(p: &StandardPoint, m: Mass) -> Result<(MetricAtPoint, MetricAtPoint)> {
    check_radius(p.r, m)?;
    let h = 1.0 - 2.0 * m.get() / p.r;
    let (gs, gsi) = spatial_metric(&p.cartesian(), m)?;
    let mut g = [[0.0; 4]; 4];
    let mut gi = [[0.0; 4]; 4];
    g[0][0] = -h;
    gi[0][0] = -1.0 / h;
    for i in 0..3 {
        for j in 0..3 {
            g[i + 1][j + 1] = gs[i][j];
            gi[i + 1][j + 1] = gsi[i][j];
        }
    }
    Ok((
        MetricAtPoint {
            chart: Chart::StandardCartesian,
            components: g,
        },
        MetricAtPoint {
            chart: Chart::StandardCartesian,
            components: gi,
        },
    ))
}

/// Spatial part `g_ij` of the standard chart and its inverse
/// `g^{ij} = δ^{ij} + (h - 1) r⁻² x^i x^j`.
pub fn spatial_metric(x: &[f64; 3], m: Mass) -> Result<([[f64; 3]; 3], [[f64; 3]; 3])> {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    check_radius(r, m)?;
    let h = 1.0 - 2.0 * m.get() / r;
    let r2 = r * r;
    let mut g = [[0.0; 3]; 3];
    let mut gi = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let d = if i == j { 1.0 } else { 0.0 };
            g[i][j] = d + (1.0 / h - 1.0) * x[i] * x[j] / r2;
            gi[i][j] = d + (h - 1.0) * x[i] * x[j] / r2;
        }
    }
    Ok((g, gi))
}

pub fn to_null(p: &StandardPoint, m: Mass) -> Result<NullPoint> {
    Ok(NullPoint {
        v: p.t - r_star(p.r, m)?,
        s: 1.0 / p.r,
        theta: p.theta,
        phi: p.phi,
    })
}

pub fn to_standard(p: &NullPoint, m: Mass) -> Result<StandardPoint> {
    check_s(p.s, m)?;
    let r = 1.0 / p.s;
    Ok(StandardPoint {
        t: p.v + r_star(r, m)?,
        r,
        theta: p.theta,
        phi: p.phi,
    })
}
