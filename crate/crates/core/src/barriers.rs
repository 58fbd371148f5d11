//! Cubic-correction barriers `Q(θ, s; β) = P(θ, s, H₀⁻¹) + βs³` and the
//! sensitivity of the mean curvature to higher-order corrections.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{h_null, GraphField, StencilJet};
use crate::error::{Error, Result};
use crate::foliation::{Foliation, GridLeaf};

/// Interior rows `i_min < i < n_s` of the anchored grid `s_i = i·s_max/n_s`
/// on which the barrier property is required.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierGrid {
    pub n_theta: usize,
    pub n_s: usize,
    pub i_min: usize,
    pub s_max: f64,
}

impl BarrierGrid {
    pub fn ds(&self) -> f64 {
        self.s_max / self.n_s as f64
    }

    pub fn s_min(&self) -> f64 {
        self.i_min as f64 * self.ds()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierPair {
    pub beta1: f64,
    pub beta2: f64,
    /// Validated upper end of the annulus.
    pub s0: f64,
    /// `min (H₀ - H(Q_{β₁}))` over the grid.
    pub margin_lower: f64,
    /// `min (H(Q_{β₂}) - H₀)` over the grid.
    pub margin_upper: f64,
    pub margin: f64,
    pub s0_halvings: usize,
}

/// `P(θ, s, H₀⁻¹) + βs³` (internal convention).
pub fn barrier_q(fol: &Foliation, h0: f64, beta: f64, theta: f64, s: f64) -> f64 {
    fol.p(theta, s, 1.0 / h0) + beta * s.powi(3)
}

/// Barrier surface on the grid, built on the grid-consistent leaf
/// [`GridLeaf`] so that its discrete mean curvature tends to `H₀` at null
/// infinity.
pub fn barrier_field(leaf: &GridLeaf, beta: f64, grid: &BarrierGrid) -> GraphField {
    let n_rows = grid.n_s - grid.i_min + 1;
    let ds = grid.ds();
    let n = grid.n_theta;
    let mut values = Vec::with_capacity(n_rows * n);
    for i in grid.i_min..=grid.n_s {
        let s = i as f64 * ds;
        for j in 0..n {
            values.push(leaf.p(j, s) + beta * s.powi(3));
        }
    }
    GraphField {
        n_theta: n,
        x_min: grid.s_min(),
        dx: ds,
        n_rows,
        values,
    }
}

/// Signed barrier margin on the grid interior: `min (H₀ - H)` for `β < 0`
/// and `min (H - H₀)` for `β > 0`, with `H` the discrete null-chart mean
/// curvature. Fails if the barrier leaves the foliated slab or is not
/// spacelike.
pub fn barrier_margin(fol: &Foliation, h0: f64, beta: f64, grid: &BarrierGrid) -> Result<f64> {
    let leaf = GridLeaf::new(fol, 1.0 / h0, grid.n_theta)?;
    let q = barrier_field(&leaf, beta, grid);
    let l_guard = 1e-6 * fol.tau_window.0.powi(2);
    let sign = if beta < 0.0 { -1.0 } else { 1.0 };
    let rows: Vec<Result<f64>> = (1..q.n_rows - 1)
        .into_par_iter()
        .map(|i| {
            let mut m = f64::INFINITY;
            for j in 0..q.n_theta {
                let jet = q.jet(i, j);
                fol.invert_tau(jet.theta, jet.x, -jet.value)?;
                let h = h_null(&jet, fol.mass, l_guard)?;
                m = m.min(sign * (h - h0));
            }
            Ok(m)
        })
        .collect();
    let mut margin = f64::INFINITY;
    for r in rows {
        margin = margin.min(r?);
    }
    Ok(margin)
}

/// Doubling search `β ∈ {∓1, ∓2, ∓4, ...}` (20 doublings) inside an `s₀`
/// halving loop (10 halvings).
pub fn select_barriers(fol: &Foliation, h0: f64, grid: &BarrierGrid) -> Result<BarrierPair> {
    let mut g = *grid;
    g.s_max = g.s_max.min(fol.s0);
    let mut last_err = String::new();
    for halvings in 0..=10 {
        let lower = search_side(fol, h0, -1.0, &g);
        let upper = search_side(fol, h0, 1.0, &g);
        match (lower, upper) {
            (Ok((b1, m1)), Ok((b2, m2))) => {
                return Ok(BarrierPair {
                    beta1: b1,
                    beta2: b2,
                    s0: g.s_max,
                    margin_lower: m1,
                    margin_upper: m2,
                    margin: m1.min(m2),
                    s0_halvings: halvings,
                })
            }
            (Err(e), _) | (_, Err(e)) => last_err = e.to_string(),
        }
        g.s_max *= 0.5;
    }
    Err(Error::NoBarrier(format!(
        "after 20 doublings and 10 halvings of s₀ (last: {last_err})"
    )))
}

fn search_side(fol: &Foliation, h0: f64, sign: f64, grid: &BarrierGrid) -> Result<(f64, f64)> {
    let mut last = f64::NEG_INFINITY;
    for k in 0..20 {
        let beta = sign * 2f64.powi(k);
        let m = barrier_margin(fol, h0, beta, grid)?;
        if m > 0.0 {
            return Ok((beta, m));
        }
        last = m;
    }
    Err(Error::NoBarrier(format!(
        "margin {last:.3e} still negative at |β| = 2^19"
    )))
}

/// Exact null-chart jet of `Q = P(θ, s, H₀⁻¹) + βs^p` (no finite differences;
/// valid for any real `s` near zero).
pub fn exact_jet(fol: &Foliation, h0: f64, beta: f64, power: i32, theta: f64, s: f64) -> StencilJet {
    let p = fol.jet_unchecked(theta, s, 1.0 / h0);
    let pf = power as f64;
    StencilJet {
        theta,
        x: s,
        value: p.p + beta * s.powi(power),
        d_x: p.p_s + beta * pf * s.powi(power - 1),
        d_xx: p.p_ss + beta * pf * (pf - 1.0) * s.powi(power - 2),
        d_t: p.p_theta,
        d_tt: p.p_thetatheta,
        d_xt: p.p_stheta,
    }
}

/// `H` of `Q = P + βs^p` at `(θ, s)` from exact derivatives.
pub fn exact_h(fol: &Foliation, h0: f64, beta: f64, power: i32, theta: f64, s: f64) -> Result<f64> {
    h_null(&exact_jet(fol, h0, beta, power, theta, s), fol.mass, 0.0)
}

/// Result of estimating `∂ᵏ_s H` sensitivity at null infinity.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ObstructionEstimate {
    pub k: usize,
    /// `d(∂ᵏ_s H)/dβ` at `s = 0` for the ansatz `P + βs^{k+1}`.
    pub estimate: f64,
    /// Richardson value from the coarser step pair.
    pub coarse: f64,
    /// `(3 - k)(k + 1)! H₀³ / 3`
    pub expected: f64,
}

fn central_weights(k: usize) -> &'static [(i32, f64)] {
    match k {
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        5 => &[(-3, -0.5), (-2, 2.0), (-1, -2.5), (1, 2.5), (2, -2.0), (3, 0.5)],
        _ => &[],
    }
}

/// `∂ᵏ_s[H(P + βs^{k+1}) - H(P)]/β` at `s = 0`, by second-order central
/// differences with Richardson extrapolation over the steps `h, h/2, h/4`.
///
/// Errors with [`Error::FdInstability`] if the two Richardson values differ
/// by more than 20% (relative to `max(|a|, |b|, 1)`).
pub fn higher_order_obstruction(
    fol: &Foliation,
    h0: f64,
    k: usize,
    beta: f64,
    theta: f64,
    h_ref: f64,
) -> Result<ObstructionEstimate> {
    let w = central_weights(k);
    if w.is_empty() || beta == 0.0 {
        return Err(Error::Domain(format!("need k in 2..=5 and β ≠ 0 (k = {k}, β = {beta})")));
    }
    let power = k as i32 + 1;
    let diff = |s: f64| -> Result<f64> {
        Ok(exact_h(fol, h0, beta, power, theta, s)? - exact_h(fol, h0, 0.0, power, theta, s)?)
    };
    let fd = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &(o, c) in w {
            acc += c * diff(o as f64 * h)?;
        }
        Ok(acc / h.powi(k as i32) / beta)
    };
    let f: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&r| fd(r * h_ref))
        .collect::<Result<_>>()?;
    let coarse = (4.0 * f[1] - f[0]) / 3.0;
    let fine = (4.0 * f[2] - f[1]) / 3.0;
    if (coarse - fine).abs() > 0.2 * coarse.abs().max(fine.abs()).max(1.0) {
        return Err(Error::FdInstability { coarse, fine });
    }
    let fact: f64 = (1..=k + 1).map(|i| i as f64).product();
    Ok(ObstructionEstimate {
        k,
        estimate: fine,
        coarse,
        expected: (3.0 - k as f64) * fact * h0.powi(3) / 3.0,
    })
}
