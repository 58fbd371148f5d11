//! Independent oracles shared by the integration tests. Nothing here calls
//! the crate's mean-curvature code.

#![allow(dead_code)]

use cmc_scri::curvature::StencilJet;
use nalgebra::Vector3;

/// Five-point Gauss-Legendre nodes and weights on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * w;
        for &(x, wt) in &GL5 {
            acc += wt * f(mid + 0.5 * w * x);
        }
    }
    0.5 * w * acc
}

/// Mean curvature of the spherically symmetric graph `t = u(r)` from
/// `3H = r⁻² d/dr (r² n)`, with `n = h^{3/2} u' (1 - h² u'²)^{-1/2}` the
/// radial component of the future unit normal, given `u'` and `u''` at `r`.
pub fn radial_h(m: f64, r: f64, up: f64, upp: f64) -> f64 {
    let h = 1.0 - 2.0 * m / r;
    let dh = 2.0 * m / (r * r);
    let w = 1.0 - h * h * up * up;
    let n = h.powf(1.5) * up / w.sqrt();
    let dn_dh = 1.5 * h.sqrt() * up / w.sqrt() + h.powf(2.5) * up.powi(3) / w.powf(1.5);
    let dn_dup = h.powf(1.5) / w.powf(1.5);
    let dn = dn_dh * dh + dn_dup * upp;
    (2.0 * r * n + r * r * dn) / (3.0 * r * r)
}

/// `H` of the radial graph `v = -Q(s)` with `Q_s`, `Q_ss` given at `s`, via
/// `u = r* - Q(1/r)`.
pub fn radial_h_from_q(m: f64, s: f64, q_s: f64, q_ss: f64) -> f64 {
    let r = 1.0 / s;
    let h = 1.0 - 2.0 * m * s;
    let up = 1.0 / h + s * s * q_s;
    let upp = -(2.0 * m / (r * r)) / (h * h) - s.powi(4) * q_ss - 2.0 * s.powi(3) * q_s;
    radial_h(m, r, up, upp)
}

/// `dQ/ds` of the radial CMC graph with first integral `r² n = H r³ + C`.
pub fn radial_q_s(m: f64, h0: f64, c: f64, s: f64) -> f64 {
    let h = 1.0 - 2.0 * m * s;
    let j = h0 / s + c * s * s;
    let root = (h + j * j).sqrt();
    if j >= 0.0 {
        -1.0 / (s * s * root * (root + j))
    } else {
        (j - root) / (h * s * s * root)
    }
}

/// Radial CMC graph with `Q(s_a) = q_a`, `Q(s_b) = q_b`, by shooting on the
/// first-integral constant. Returns `Q` at the requested `s` values (each in
/// `[s_a, s_b]`).
pub fn radial_dirichlet(m: f64, h0: f64, s_a: f64, s_b: f64, q_a: f64, q_b: f64, at: &[f64]) -> Vec<f64> {
    let panels = 400;
    let miss = |c: f64| gauss_legendre(|s| radial_q_s(m, h0, c, s), s_a, s_b, panels) - (q_b - q_a);
    let (mut lo, mut hi) = (-1.0, 1.0);
    while miss(lo) > 0.0 {
        lo *= 2.0;
        assert!(lo > -1e12, "no bracket");
    }
    while miss(hi) < 0.0 {
        hi *= 2.0;
        assert!(hi < 1e12, "no bracket");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if miss(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * mid.abs().max(1.0) {
            break;
        }
    }
    let c = 0.5 * (lo + hi);
    at.iter()
        .map(|&s| {
            let k = (((s - s_a) / (s_b - s_a)) * panels as f64).ceil().max(1.0) as usize;
            q_a + gauss_legendre(|x| radial_q_s(m, h0, c, x), s_a, s, k)
        })
        .collect()
}

/// Exact `P = f̃ + sφ + ½s²ψ` for `f̃ = a cos θ` (internal convention), with
/// its `θ` and `s` derivatives, from hand-computed coefficient formulas:
/// `|∇f̃|² = a² sin²θ`, `Δf̃ = -2a cos θ`,
/// `⟨∇|∇f̃|², ∇f̃⟩ = -2a³ sin²θ cos θ`.
pub fn cos_leaf(a: f64, tau: f64, theta: f64, s: f64) -> f64 {
    let (sn, cs) = theta.sin_cos();
    let f = a * cs;
    let phi = -0.5 * (tau * tau + a * a * sn * sn);
    let psi = 0.5 * (tau * tau * (-2.0 * a * cs) - 2.0 * a.powi(3) * sn * sn * cs);
    f + s * phi + 0.5 * s * s * psi
}

/// Observed order from errors at successive halvings.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Standard-chart jet of `u = r* - Q(θ, 1/r)` from a null-chart jet.
pub fn u_jet(j: &StencilJet, m: f64) -> StencilJet {
    let s = j.x;
    let r = 1.0 / s;
    let h = 1.0 - 2.0 * m * s;
    StencilJet {
        theta: j.theta,
        x: r,
        value: 0.0,
        d_x: 1.0 / h + s * s * j.d_x,
        d_xx: -(2.0 * m * s * s) / (h * h) - s.powi(4) * j.d_xx - 2.0 * s.powi(3) * j.d_x,
        d_t: -j.d_t,
        d_tt: -j.d_tt,
        d_xt: s * s * j.d_xt,
    }
}

pub type Surface = fn(f64, f64) -> f64;

/// Smooth spacelike graphs `Q(θ, s)` on `s ∈ [0.05, 0.2]`.
pub const SURFACES: [Surface; 5] = [
    |_, s| -0.5 * s + 0.1 * s * s,
    |t, s| 0.2 * t.cos() - 0.5 * (1.0 + 0.04 * t.sin().powi(2)) * s + 0.1 * s.powi(3),
    |t, s| 0.1 * (3.0 * t.cos().powi(2) - 1.0) - 0.6 * s + 0.5 * s * s * t.cos(),
    |t, s| -0.4 * s - 0.3 * s * s + 0.2 * s * s * t.sin().powi(2),
    |t, s| 0.3 * t.cos() + 0.05 * (2.0 * t).cos() - 0.7 * s + 0.2 * s * t.cos(),
];

/// Unit timelike future vector with velocity `v` in the static orthonormal
/// frame at `x` (standard Cartesian chart).
pub fn boosted(x: &Vector3<f64>, v: &Vector3<f64>, m: f64) -> [f64; 4] {
    let r = x.norm();
    let h = 1.0 - 2.0 * m / r;
    let n = x / r;
    let gamma = 1.0 / (1.0 - v.norm_squared()).sqrt();
    let e0 = [1.0 / h.sqrt(), 0.0, 0.0, 0.0];
    // orthonormal spatial frame: radial direction scaled by √h, tangential unchanged
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    let t2 = n.cross(&t1);
    let spatial = [n * h.sqrt(), t1, t2];
    let mut out = [gamma * e0[0], 0.0, 0.0, 0.0];
    for (k, e) in spatial.iter().enumerate() {
        for c in 0..3 {
            out[c + 1] += gamma * v[k] * e[c];
        }
    }
    out
}
