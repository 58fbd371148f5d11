//! Mean curvature of axisymmetric spacelike graphs, in the null chart
//! (`v = -Q(θ, s)`) and in the standard chart (`t = u(r, θ)`), together with
//! the spacelikeness and tilt functions and the two pointwise inequalities
//! used by the existence argument.

use serde::{Deserialize, Serialize};

use crate::charts::{spatial_metric, Mass, MetricAtPoint};
use crate::error::{Error, Result};
use crate::foliation::Foliation;
use crate::sphere::theta_neighbors;

/// Finite-difference derivatives at one node of an axisymmetric field on a
/// `(row, θ)` grid, where rows are uniformly spaced in the radial-type
/// coordinate `x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StencilJet {
    pub theta: f64,
    pub x: f64,
    pub value: f64,
    pub d_x: f64,
    pub d_xx: f64,
    pub d_t: f64,
    pub d_tt: f64,
    pub d_xt: f64,
}

/// Axisymmetric field on a tensor grid: `n_rows` uniformly spaced rows
/// `x_i = x_min + i·dx`, each holding the `n_theta` cell-centred colatitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisymmetricField {
    pub n_theta: usize,
    pub x_min: f64,
    pub dx: f64,
    pub n_rows: usize,
    /// Row-major: `values[i * n_theta + j]`.
    pub values: Vec<f64>,
}

impl AxisymmetricField {
    pub fn from_fn(n_theta: usize, x_min: f64, x_max: f64, n_rows: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(n_rows >= 4 && n_theta >= 3 && x_max > x_min);
        let dx = (x_max - x_min) / (n_rows - 1) as f64;
        let mut values = Vec::with_capacity(n_rows * n_theta);
        for i in 0..n_rows {
            let x = x_min + i as f64 * dx;
            for j in 0..n_theta {
                values.push(f(theta_node(j, n_theta), x));
            }
        }
        Self {
            n_theta,
            x_min,
            dx,
            n_rows,
            values,
        }
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    #[inline]
    pub fn theta(&self, j: usize) -> f64 {
        theta_node(j, self.n_theta)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j]
    }

    /// Row index of `x` if it lies on the grid.
    pub fn row_of(&self, x: f64) -> Option<usize> {
        let k = (x - self.x_min) / self.dx;
        let i = k.round();
        if (k - i).abs() < 1e-6 && i >= 0.0 && (i as usize) < self.n_rows {
            Some(i as usize)
        } else {
            None
        }
    }

    /// Second-order derivatives at node `(i, j)`; central in the interior,
    /// one-sided in `x` on the first and last rows, pole reflection in `θ`.
    pub fn jet(&self, i: usize, j: usize) -> StencilJet {
        let n = self.n_theta;
        let dt = std::f64::consts::PI / n as f64;
        let (jm, jp) = theta_neighbors(j, n);
        let row = |ii: usize| {
            let r = &self.values[ii * n..(ii + 1) * n];
            (r[jm], r[j], r[jp])
        };
        let dt1 = |(a, _, c): (f64, f64, f64)| (c - a) / (2.0 * dt);
        let (a, b, c) = row(i);
        let d_t = (c - a) / (2.0 * dt);
        let d_tt = (c - 2.0 * b + a) / (dt * dt);
        let h = self.dx;
        let (d_x, d_xx, d_xt) = if i == 0 {
            let (r1, r2, r3) = (row(1), row(2), row(3));
            (
                (-3.0 * b + 4.0 * r1.1 - r2.1) / (2.0 * h),
                (2.0 * b - 5.0 * r1.1 + 4.0 * r2.1 - r3.1) / (h * h),
                (-3.0 * d_t + 4.0 * dt1(r1) - dt1(r2)) / (2.0 * h),
            )
        } else if i + 1 == self.n_rows {
            let (r1, r2, r3) = (row(i - 1), row(i - 2), row(i - 3));
            (
                (3.0 * b - 4.0 * r1.1 + r2.1) / (2.0 * h),
                (2.0 * b - 5.0 * r1.1 + 4.0 * r2.1 - r3.1) / (h * h),
                (3.0 * d_t - 4.0 * dt1(r1) + dt1(r2)) / (2.0 * h),
            )
        } else {
            let (lo, hi) = (row(i - 1), row(i + 1));
            (
                (hi.1 - lo.1) / (2.0 * h),
                (hi.1 - 2.0 * b + lo.1) / (h * h),
                (dt1(hi) - dt1(lo)) / (2.0 * h),
            )
        };
        StencilJet {
            theta: self.theta(j),
            x: self.x(i),
            value: b,
            d_x,
            d_xx,
            d_t,
            d_tt,
            d_xt,
        }
    }
}

#[inline]
pub fn theta_node(j: usize, n_theta: usize) -> f64 {
    (j as f64 + 0.5) * std::f64::consts::PI / n_theta as f64
}

/// The graph `v = -Q(θ, s)` on an annulus grid in `s`.
pub type GraphField = AxisymmetricField;
/// The graph `t = u(r, θ)` on a grid uniform in `r`.
pub type UField = AxisymmetricField;

/// `L(Q) = -(2Q_s + s²(1-2ms)Q_s² + |∇Q|²)`.
#[inline]
pub fn spacelike_l(j: &StencilJet, m: Mass) -> f64 {
    let s = j.x;
    let a = s * s * m.h_of_s(s);
    -(2.0 * j.d_x + a * j.d_x * j.d_x + j.d_t * j.d_t)
}

/// `(L, R)` where the mean curvature satisfies `-3H L^{3/2} = R`.
pub fn null_rhs(j: &StencilJet, m: Mass) -> (f64, f64) {
    let mm = m.get();
    let s = j.x;
    let a = s * s * (1.0 - 2.0 * mm * s);
    let da = 2.0 * s - 6.0 * mm * s * s;
    let (qs, qss, qt, qtt, qst) = (j.d_x, j.d_xx, j.d_t, j.d_tt, j.d_xt);
    let l = -(2.0 * qs + a * qs * qs + qt * qt);
    let l_s = -(2.0 * qss + da * qs * qs + 2.0 * a * qs * qss + 2.0 * qt * qst);
    let l_t = -(2.0 * qst + 2.0 * a * qs * qst + 2.0 * qt * qtt);
    let lap = qtt + qt / j.theta.tan();
    let rhs = s * l * (a * qss + lap) - 0.5 * s * (l_s + a * l_s * qs + l_t * qt) - s * s * l * qs - 3.0 * l;
    (l, rhs)
}

/// Mean curvature of `v = -Q` at a stencil; errors when `L ≤ l_guard`.
pub fn h_null(j: &StencilJet, m: Mass, l_guard: f64) -> Result<f64> {
    let (l, rhs) = null_rhs(j, m);
    if !(l > l_guard) {
        return Err(Error::NullDegenerate { l, guard: l_guard });
    }
    Ok(-rhs / (3.0 * l.powf(1.5)))
}

/// Polynomial form of `H(Q) = H₀`: `-3H₀L^{3/2} - R`.
#[inline]
pub fn cmc_residual(j: &StencilJet, m: Mass, h0: f64) -> f64 {
    let (l, rhs) = null_rhs(j, m);
    -3.0 * h0 * l.max(0.0).powf(1.5) - rhs
}

/// Standard-chart quantities of the graph `t = u(r, θ)` at a stencil.
#[derive(Clone, Copy, Debug)]
pub struct StandardGeometry {
    pub h: f64,
    pub dh: f64,
    /// `|Du|²` with respect to the spatial metric.
    pub du_sq: f64,
    /// `1 - h|Du|²`
    pub n: f64,
    /// `g^{ij} u_{ij}`
    pub trace_hess: f64,
    /// `D^i u D^j u u_{ij}`
    pub hess_du_du: f64,
    /// `g(Dh, Du)`
    pub dh_du: f64,
}

pub fn standard_geometry(j: &StencilJet, m: Mass) -> StandardGeometry {
    let r = j.x;
    let (sn, cs) = j.theta.sin_cos();
    let h = 1.0 - 2.0 * m.get() / r;
    let dh = 2.0 * m.get() / (r * r);
    let (ur, urr, ut, utt, urt) = (j.d_x, j.d_xx, j.d_t, j.d_tt, j.d_xt);
    let h_rr = urr + dh / (2.0 * h) * ur;
    let h_rt = urt - ut / r;
    let h_tt = utt + h * r * ur;
    let h_pp = h * r * sn * sn * ur + sn * cs * ut;
    let r2 = r * r;
    let trace_hess = h * h_rr + h_tt / r2 + h_pp / (r2 * sn * sn);
    let (dur, dut) = (h * ur, ut / r2);
    let hess_du_du = dur * dur * h_rr + 2.0 * dur * dut * h_rt + dut * dut * h_tt;
    let du_sq = h * ur * ur + ut * ut / r2;
    StandardGeometry {
        h,
        dh,
        du_sq,
        n: 1.0 - h * du_sq,
        trace_hess,
        hess_du_du,
        dh_du: h * dh * ur,
    }
}

/// Mean curvature of `t = u(r, θ)` from
/// `3H h^{-1/2} N^{3/2} = A^{ij}u_{ij} + h⁻¹N g(Dh,Du) + ½|Du|² g(Dh,Du)`,
/// `N = 1 - h|Du|²`, `A^{ij} = N g^{ij} + h D^iu D^ju`.
pub fn h_standard(j: &StencilJet, m: Mass) -> Result<f64> {
    let g = standard_geometry(j, m);
    if !(g.n > 0.0) {
        return Err(Error::SpacelikeFailure(format!(
            "1 - h|Du|² = {:.3e} at r = {}, θ = {}",
            g.n, j.x, j.theta
        )));
    }
    let a_u = g.n * g.trace_hess + g.h * g.hess_du_du;
    let lhs = a_u + g.n * g.dh_du / g.h + 0.5 * g.du_sq * g.dh_du;
    Ok(lhs * g.h.sqrt() / (3.0 * g.n.powf(1.5)))
}

/// Tilt `ν̃ = (1 - h|Du|²)^{-1/2}` of `t = u` against the static observers.
pub fn standard_nu_tilde(j: &StencilJet, m: Mass) -> Result<f64> {
    let g = standard_geometry(j, m);
    if !(g.n > 0.0) {
        return Err(Error::SpacelikeFailure(format!("1 - h|Du|² = {:.3e}", g.n)));
    }
    Ok(1.0 / g.n.sqrt())
}

/// Tilt data of the graph `v = -Q` at one point.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct TiltPoint {
    pub theta: f64,
    pub s: f64,
    /// `L(Q)`
    pub l_q: f64,
    /// Leaf through the point and its `L(P)`.
    pub tau: f64,
    pub l_p: f64,
    /// `ν̃ = -g(n, T̃) = s⁻¹h^{-1/2}L_Q^{-1/2}`
    pub nu_tilde: f64,
    /// `ν = -g(n, T)` against the foliation normal.
    pub nu: f64,
    /// `-g(T, T̃) = s⁻¹h^{-1/2}L_P^{-1/2}`
    pub gamma: f64,
}

/// `ν̃ = s⁻¹h^{-1/2}L_Q^{-1/2}` from a null-chart stencil.
pub fn null_nu_tilde(j: &StencilJet, m: Mass) -> Result<f64> {
    let l = spacelike_l(j, m);
    if !(l > 0.0) {
        return Err(Error::SpacelikeFailure(format!("L(Q) = {l:.3e}")));
    }
    Ok(1.0 / (j.x * m.h_of_s(j.x).sqrt() * l.sqrt()))
}

/// Tilts of `v = -Q` against the static observers and the foliation normal.
pub fn tilt_null(j: &StencilJet, fol: &Foliation) -> Result<TiltPoint> {
    let m = fol.mass;
    let s = j.x;
    let l_q = spacelike_l(j, m);
    if !(l_q > 0.0) {
        return Err(Error::SpacelikeFailure(format!(
            "L(Q) = {l_q:.3e} at θ = {}, s = {s}",
            j.theta
        )));
    }
    let tau = fol.invert_tau(j.theta, s, -j.value)?;
    let p = fol.jet(j.theta, s, tau)?;
    if !(p.l > 0.0) {
        return Err(Error::SpacelikeFailure(format!("L(P) = {:.3e}", p.l)));
    }
    let a = s * s * m.h_of_s(s);
    let inner = p.p_s + j.d_x + a * p.p_s * j.d_x + p.p_theta * j.d_t;
    let sh = s * m.h_of_s(s).sqrt();
    Ok(TiltPoint {
        theta: j.theta,
        s,
        l_q,
        tau,
        l_p: p.l,
        nu_tilde: 1.0 / (sh * l_q.sqrt()),
        nu: -inner / (p.l.sqrt() * l_q.sqrt()),
        gamma: 1.0 / (sh * p.l.sqrt()),
    })
}

/// Ellipticity sandwich `(N|a|², A^{ij}a_ia_j, |a|²)` at a standard-chart
/// point `x` for gradient covector `du` and test covector `a`.
pub fn ellipticity_bounds(x: &[f64; 3], du: &[f64; 3], a: &[f64; 3], m: Mass) -> Result<(f64, f64, f64)> {
    let (_, gi) = spatial_metric(x, m)?;
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let h = 1.0 - 2.0 * m.get() / r;
    let raise = |c: &[f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for k in 0..3 {
                out[i] += gi[i][k] * c[k];
            }
        }
        out
    };
    let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let du_up = raise(du);
    let a_up = raise(a);
    let du_sq = dot(du, &du_up);
    let a_sq = dot(a, &a_up);
    let n = 1.0 - h * du_sq;
    if !(n > 0.0) {
        return Err(Error::SpacelikeFailure(format!("1 - h|Du|² = {n:.3e}")));
    }
    let du_a = dot(&du_up, a);
    Ok((n * a_sq, n * a_sq + h * du_a * du_a, a_sq))
}

/// Result of checking `1 ≤ -g(T₁,T₂) ≤ 2 g(T₁,T₃) g(T₂,T₃)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BartnikCheck {
    pub g12: f64,
    pub g13: f64,
    pub g23: f64,
    pub holds: bool,
}

/// Unit timelike vectors in a common time cone must satisfy
/// `1 ≤ -g(T₁,T₂) ≤ 2 g(T₁,T₃) g(T₂,T₃)`; checked with relative slack `slack`.
pub fn bartnik_inequality_check(t: [&[f64; 4]; 3], g: &MetricAtPoint, slack: f64) -> Result<BartnikCheck> {
    for (k, v) in t.iter().enumerate() {
        let n = g.dot(v, v);
        if (n + 1.0).abs() > 1e-8 * (1.0 + v.iter().map(|c| c * c).sum::<f64>()) {
            return Err(Error::Domain(format!("T{} is not unit timelike: g(T,T) = {n}", k + 1)));
        }
    }
    let g12 = g.dot(t[0], t[1]);
    let g13 = g.dot(t[0], t[2]);
    let g23 = g.dot(t[1], t[2]);
    if g12 >= 0.0 || g13 >= 0.0 || g23 >= 0.0 {
        return Err(Error::Domain("vectors are not in a common time cone".into()));
    }
    let lhs = -g12;
    let rhs = 2.0 * g13 * g23;
    let holds = lhs >= 1.0 - slack * lhs && lhs <= rhs + slack * rhs;
    Ok(BartnikCheck { g12, g13, g23, holds })
}
