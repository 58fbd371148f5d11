//! The approximate-CMC foliation near null infinity.
//!
//! Leaves are the surfaces `v = -P(θ, s, τ)` with
//! `P = f̃ + sφ + ½s²ψ`, where (internal convention)
//! `φ = -½(τ² + |∇f̃|²)` and `ψ = ½(τ²Δf̃ + ⟨∇|∇f̃|², ∇f̃⟩)`.
//!
//! Public entry points take the user-facing cut `f` (so that `u - r* → f` at
//! null infinity) and the target mean curvature `H₀`; internally the cut is
//! `f̃ = -f` and the foliation parameter is centred at `τ = H₀⁻¹`.
//!
//! Everything here is axisymmetric: `P` does not depend on `ϕ`, and the
//! colatitude derivatives of the cut are exact (see [`Cut::jet`]).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::charts::Mass;
use crate::cut::Cut;
use crate::error::{Error, Result};
use crate::sphere::SphereFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Sign convention of the foliation construction (`f̃ = -f`).
    Internal,
    /// Sign convention of the asymptotic expansion `u - r* ≈ f + φ/r + ψ/(2r²)`.
    User,
}

/// The coefficient functions `(φ, ψ)` of a cut given on a grid, with the
/// derivatives taken by [`SphereFunction`] finite differences.
///
/// With [`Convention::Internal`], `f` is the internal cut `f̃` and the result
/// is `(φ, ψ)` as used in `P`. With [`Convention::User`], `f` is the
/// user-facing cut and the result is the pair
/// `φ_out = ½(τ² + |∇f|²)`, `ψ_out = ½(τ²Δf + ⟨∇|∇f|², ∇f⟩)`.
pub fn phi_psi(
    f: &SphereFunction,
    tau: f64,
    convention: Convention,
) -> Result<(SphereFunction, SphereFunction)> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("τ must be positive, got {tau}")));
    }
    let g = f.grad_norm_sq();
    let lap = f.laplacian();
    let k = g.grad_inner(f)?;
    let t2 = tau * tau;
    let sign = match convention {
        Convention::Internal => -1.0,
        Convention::User => 1.0,
    };
    let phi = g.map(|gv| sign * 0.5 * (t2 + gv));
    // f̃ = -f flips both Δf and ⟨∇|∇f|², ∇f⟩, and ψ_out = -ψ, so ψ keeps its form
    let psi = lap.zip_with(&k, |l, kv| 0.5 * (t2 * l + kv))?;
    Ok((phi, psi))
}

/// Colatitude jets of the foliation coefficients at fixed `(θ, τ)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoefficientJet {
    /// `f̃, f̃_θ, f̃_θθ`
    pub f: [f64; 3],
    /// `φ, φ_θ, φ_θθ`
    pub phi: [f64; 3],
    /// `ψ, ψ_θ, ψ_θθ`
    pub psi: [f64; 3],
    /// `Δf̃`
    pub lap: f64,
}

/// `P` and its derivatives, plus the spacelikeness function
/// `L = -(2P_s + s²(1-2ms)P_s² + |∇P|²)` and its derivatives.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct FoliationJet {
    pub theta: f64,
    pub s: f64,
    pub tau: f64,
    pub p: f64,
    pub p_tau: f64,
    pub p_s: f64,
    pub p_ss: f64,
    pub p_theta: f64,
    pub p_stheta: f64,
    pub p_thetatheta: f64,
    pub phi: f64,
    pub psi: f64,
    pub l: f64,
    pub l_s: f64,
    pub l_theta: f64,
}

/// Frame, lapse and extrinsic curvature of a leaf at one point.
///
/// Vectors are components in the null chart `(θ, ϕ, s, v)`.
#[derive(Clone, Debug, Serialize)]
pub struct FoliationGeometry {
    pub jet: FoliationJet,
    pub alpha: f64,
    /// `ḡ(e_a, e_b)` for the tangent frame `e_θ, e_ϕ, e_s`.
    pub frame_metric: [[f64; 3]; 3],
    /// `ḡ`-orthonormal frame from Gram-Schmidt on `e_θ, e_ϕ, e_s`.
    pub eps: [[f64; 4]; 3],
    /// `g`-orthonormal frame `w_i = s ε_i`.
    pub w: [[f64; 4]; 3],
    /// Future unit normal `T = -α∇τ` of the leaf.
    pub t: [f64; 4],
    /// `K(w_i, w_j)`.
    pub k_w: [[f64; 3]; 3],
    /// Mean curvature `⅓ tr K`.
    pub h: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Foliation {
    pub mass: Mass,
    /// Cut in the internal convention (`f̃ = -f`).
    pub cut_internal: Cut,
    pub tau_window: (f64, f64),
    pub s0: f64,
}

/// Outcome of the automatic `s₀` search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct S0Validation {
    pub s0: f64,
    pub halvings: usize,
    pub min_l: f64,
    pub max_p_tau: f64,
}

impl Foliation {
    /// Foliation for the user-facing cut `f` and target mean curvature `H₀`,
    /// with the default window `(½H₀⁻¹, 2H₀⁻¹)` and `s₀ = 1/(4m)`
    /// (not yet validated; see [`validate_s0`](Self::validate_s0)).
    pub fn new(mass: Mass, cut: &Cut, h0: f64) -> Result<Self> {
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(Error::Domain(format!("H₀ must be positive, got {h0}")));
        }
        Self::from_internal(
            mass,
            cut.negated(),
            (0.5 / h0, 2.0 / h0),
            0.25 / mass.get(),
        )
    }

    pub fn from_internal(mass: Mass, cut_internal: Cut, tau_window: (f64, f64), s0: f64) -> Result<Self> {
        let (t1, t2) = tau_window;
        if !(t1 > 0.0 && t1 < t2 && t2.is_finite()) {
            return Err(Error::Domain(format!("bad τ window ({t1}, {t2})")));
        }
        if !(s0 > 0.0 && s0 < mass.s_horizon()) {
            return Err(Error::Domain(format!(
                "s₀ = {s0} outside (0, 1/(2m)) = (0, {})",
                mass.s_horizon()
            )));
        }
        Ok(Self {
            mass,
            cut_internal,
            tau_window,
            s0,
        })
    }

    pub fn with_s0(mut self, s0: f64) -> Result<Self> {
        if !(s0 > 0.0 && s0 < self.mass.s_horizon()) {
            return Err(Error::Domain(format!("s₀ = {s0} outside (0, 1/(2m))")));
        }
        self.s0 = s0;
        Ok(self)
    }

    /// User-facing cut `f = -f̃`.
    pub fn cut(&self) -> Cut {
        self.cut_internal.negated()
    }

    pub fn coefficients(&self, theta: f64, tau: f64) -> CoefficientJet {
        let [f0, f1, f2, f3, f4] = self.cut_internal.jet(theta);
        let (sn, cs) = theta.sin_cos();
        let cot = cs / sn;
        let g = [f1 * f1, 2.0 * f1 * f2, 2.0 * f2 * f2 + 2.0 * f1 * f3];
        let lap = [
            f2 + cot * f1,
            f3 + cot * f2 - f1 / (sn * sn),
            f4 + cot * f3 - 2.0 * f2 / (sn * sn) + 2.0 * cs * f1 / sn.powi(3),
        ];
        let k = [
            2.0 * f1 * f1 * f2,
            4.0 * f1 * f2 * f2 + 2.0 * f1 * f1 * f3,
            4.0 * f2.powi(3) + 12.0 * f1 * f2 * f3 + 2.0 * f1 * f1 * f4,
        ];
        let t2 = tau * tau;
        CoefficientJet {
            f: [f0, f1, f2],
            phi: [-0.5 * (t2 + g[0]), -0.5 * g[1], -0.5 * g[2]],
            psi: [
                0.5 * (t2 * lap[0] + k[0]),
                0.5 * (t2 * lap[1] + k[1]),
                0.5 * (t2 * lap[2] + k[2]),
            ],
            lap: lap[0],
        }
    }

    /// `(φ_out, ψ_out)` in the user convention at `τ = H₀⁻¹`.
    pub fn expansion_coefficients(&self, theta: f64, h0: f64) -> (f64, f64) {
        let c = self.coefficients(theta, 1.0 / h0);
        (-c.phi[0], -c.psi[0])
    }

    fn check_domain(&self, s: f64, tau: f64) -> Result<()> {
        let (t1, t2) = self.tau_window;
        if !(s > 0.0 && s <= self.s0) {
            return Err(Error::Domain(format!("s = {s} outside (0, s₀ = {}]", self.s0)));
        }
        if !(tau >= t1 && tau <= t2) {
            return Err(Error::Domain(format!("τ = {tau} outside [{t1}, {t2}]")));
        }
        Ok(())
    }

    /// [`jet_unchecked`](Self::jet_unchecked) restricted to the working domain.
    pub fn jet(&self, theta: f64, s: f64, tau: f64) -> Result<FoliationJet> {
        self.check_domain(s, tau)?;
        Ok(self.jet_unchecked(theta, s, tau))
    }

    /// `P`, its derivatives and `L` at any `s ≥ 0` (including null infinity).
    pub fn jet_unchecked(&self, theta: f64, s: f64, tau: f64) -> FoliationJet {
        let c = self.coefficients(theta, tau);
        let m = self.mass.get();
        let a = s * s * (1.0 - 2.0 * m * s);
        let da = 2.0 * s - 6.0 * m * s * s;
        let p = c.f[0] + s * c.phi[0] + 0.5 * s * s * c.psi[0];
        let p_s = c.phi[0] + s * c.psi[0];
        let p_ss = c.psi[0];
        let p_t = c.f[1] + s * c.phi[1] + 0.5 * s * s * c.psi[1];
        let p_tt = c.f[2] + s * c.phi[2] + 0.5 * s * s * c.psi[2];
        let p_st = c.phi[1] + s * c.psi[1];
        let p_tau = -tau * s * (1.0 - 0.5 * s * c.lap);
        let l = -(2.0 * p_s + a * p_s * p_s + p_t * p_t);
        let l_s = -(2.0 * p_ss + da * p_s * p_s + 2.0 * a * p_s * p_ss + 2.0 * p_t * p_st);
        let l_theta = -(2.0 * p_st + 2.0 * a * p_s * p_st + 2.0 * p_t * p_tt);
        FoliationJet {
            theta,
            s,
            tau,
            p,
            p_tau,
            p_s,
            p_ss,
            p_theta: p_t,
            p_stheta: p_st,
            p_thetatheta: p_tt,
            phi: c.phi[0],
            psi: c.psi[0],
            l,
            l_s,
            l_theta,
        }
    }

    /// `P(θ, s, τ)` alone.
    pub fn p(&self, theta: f64, s: f64, tau: f64) -> f64 {
        let c = self.coefficients(theta, tau);
        c.f[0] + s * c.phi[0] + 0.5 * s * s * c.psi[0]
    }

    /// The leaf through `(θ, s, v)`: the `τ` in the window with `v = -P(θ, s, τ)`.
    ///
    /// `P` is affine in `τ²` (`P = A + Bτ²` with `B = -½s(1 - ½sΔf̃)`), so the
    /// inversion is closed-form; uniqueness follows from `P_τ < 0`.
    pub fn invert_tau(&self, theta: f64, s: f64, v: f64) -> Result<f64> {
        if !(s > 0.0 && s <= self.s0) {
            return Err(Error::Domain(format!("s = {s} outside (0, s₀ = {}]", self.s0)));
        }
        let c0 = self.coefficients(theta, 0.0);
        let a = c0.f[0] + s * c0.phi[0] + 0.5 * s * s * c0.psi[0];
        let b = -0.5 * s * (1.0 - 0.5 * s * c0.lap);
        if !(b < 0.0) {
            return Err(Error::OutOfRange(format!(
                "P_τ ≥ 0 at θ = {theta}, s = {s}"
            )));
        }
        let tau2 = (-v - a) / b;
        let (t1, t2) = self.tau_window;
        if !(tau2 >= t1 * t1 && tau2 <= t2 * t2) {
            return Err(Error::OutOfRange(format!(
                "v = {v} at θ = {theta}, s = {s} is not on a leaf with τ in [{t1}, {t2}]"
            )));
        }
        Ok(tau2.sqrt())
    }

    /// Lapse `α = -P_τ/(s√L)` and `g(∇τ, ∂_t) = -1/P_τ`.
    pub fn lapse_and_time_check(&self, theta: f64, s: f64, tau: f64) -> Result<(f64, f64)> {
        let jet = self.jet(theta, s, tau)?;
        lapse_from_jet(&jet)
    }

    pub fn geometry(&self, theta: f64, s: f64, tau: f64) -> Result<FoliationGeometry> {
        let jet = self.jet(theta, s, tau)?;
        geometry_from_jet(&jet, self.mass)
    }

    /// Halve `s₀` (starting from `1/(4m)`) until `min L ≥ ½τ₁²` and
    /// `max P_τ < 0` on an `n_theta × n_s` grid over `(0, s₀]` and across the
    /// τ window.
    pub fn validate_s0(&mut self, n_theta: usize, n_s: usize) -> Result<S0Validation> {
        let start = 0.25 / self.mass.get();
        let mut s0 = start;
        for halvings in 0..40 {
            let (min_l, max_pt) = self.scan(s0, n_theta, n_s);
            let t1 = self.tau_window.0;
            if min_l >= 0.5 * t1 * t1 && max_pt < 0.0 {
                self.s0 = s0;
                return Ok(S0Validation {
                    s0,
                    halvings,
                    min_l,
                    max_p_tau: max_pt,
                });
            }
            s0 *= 0.5;
        }
        Err(Error::SpacelikeFailure(format!(
            "no s₀ ≥ {s0:.3e} keeps the foliation spacelike"
        )))
    }

    /// `(min L, max P_τ)` over the sampled slab `(0, s0]`.
    pub fn scan(&self, s0: f64, n_theta: usize, n_s: usize) -> (f64, f64) {
        let (t1, t2) = self.tau_window;
        let mut min_l = f64::INFINITY;
        let mut max_pt = f64::NEG_INFINITY;
        for j in 0..n_theta {
            let theta = (j as f64 + 0.5) * std::f64::consts::PI / n_theta as f64;
            for i in 1..=n_s {
                let s = s0 * i as f64 / n_s as f64;
                for k in 0..5 {
                    let tau = t1 + (t2 - t1) * k as f64 / 4.0;
                    let jet = self.jet_unchecked(theta, s, tau);
                    min_l = min_l.min(jet.l);
                    max_pt = max_pt.max(jet.p_tau);
                }
            }
        }
        (min_l, max_pt)
    }

    /// Points of the slab `(0, s0]` where `L ≤ 0`, as `(θ, s, τ, L)`.
    pub fn nonspacelike_points(&self, s0: f64, n_theta: usize, n_s: usize) -> Vec<(f64, f64, f64, f64)> {
        let (t1, t2) = self.tau_window;
        let mut out = Vec::new();
        for j in 0..n_theta {
            let theta = (j as f64 + 0.5) * std::f64::consts::PI / n_theta as f64;
            for i in 1..=n_s {
                let s = s0 * i as f64 / n_s as f64;
                for k in 0..5 {
                    let tau = t1 + (t2 - t1) * k as f64 / 4.0;
                    let l = self.jet_unchecked(theta, s, tau).l;
                    if l <= 0.0 {
                        out.push((theta, s, tau, l));
                    }
                }
            }
        }
        out
    }

    /// CSV sweep with columns `theta,s,tau,L,alpha,H,K11,K22,K33`.
    pub fn sweep_csv(&self, thetas: &[f64], ss: &[f64], taus: &[f64]) -> Result<String> {
        let mut out = String::from("theta,s,tau,L,alpha,H,K11,K22,K33\n");
        for &theta in thetas {
            for &s in ss {
                for &tau in taus {
                    let g = self.geometry(theta, s, tau)?;
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        theta, s, tau, g.jet.l, g.alpha, g.h, g.k_w[0][0], g.k_w[1][1], g.k_w[2][2]
                    );
                }
            }
        }
        Ok(out)
    }
}

/// One leaf `P(·, ·, τ)` with its coefficients computed on the cell-centred
/// colatitude grid by [`phi_psi`], i.e. with the same finite differences the
/// discrete mean-curvature operator applies to a graph. At `s = 0` the
/// discrete `L` of this leaf is exactly `τ²`, which the exact-coefficient
/// leaf only matches up to `O(Δθ²)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridLeaf {
    pub tau: f64,
    pub f: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl GridLeaf {
    pub fn new(fol: &Foliation, tau: f64, n_theta: usize) -> Result<Self> {
        let f = fol.cut_internal.sample(n_theta);
        let (phi, psi) = phi_psi(&f, tau, Convention::Internal)?;
        Ok(Self {
            tau,
            f: f.values,
            phi: phi.values,
            psi: psi.values,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.f.len()
    }

    /// `P` at colatitude node `j`.
    #[inline]
    pub fn p(&self, j: usize, s: f64) -> f64 {
        self.f[j] + s * self.phi[j] + 0.5 * s * s * self.psi[j]
    }
}

pub fn lapse_from_jet(jet: &FoliationJet) -> Result<(f64, f64)> {
    if !(jet.l > 0.0) {
        return Err(Error::SpacelikeFailure(format!(
            "L = {:.3e} at θ = {}, s = {}, τ = {}",
            jet.l, jet.theta, jet.s, jet.tau
        )));
    }
    let alpha = -jet.p_tau / (jet.s * jet.l.sqrt());
    Ok((alpha, -1.0 / jet.p_tau))
}

/// Christoffel symbols `Γ^a_bc` of `ḡ` in the order `(θ, ϕ, s, v)`.
pub fn christoffel(theta: f64, s: f64, m: f64) -> [[[f64; 4]; 4]; 4] {
    let mut g = [[[0.0; 4]; 4]; 4];
    let (sn, cs) = theta.sin_cos();
    g[0][1][1] = -sn * cs;
    g[1][0][1] = cs / sn;
    g[1][1][0] = cs / sn;
    let q = s * (1.0 - 3.0 * m * s);
    g[2][3][3] = s.powi(3) * (1.0 - 5.0 * m * s + 6.0 * m * m * s * s);
    g[3][3][3] = q;
    g[2][2][3] = -q;
    g[2][3][2] = -q;
    g
}

fn gbar_dot(theta: f64, s: f64, m: f64, x: &[f64; 4], y: &[f64; 4]) -> f64 {
    let a = s * s * (1.0 - 2.0 * m * s);
    x[0] * y[0] + theta.sin().powi(2) * x[1] * y[1] + x[2] * y[3] + x[3] * y[2] - a * x[3] * y[3]
}

pub fn geometry_from_jet(jet: &FoliationJet, mass: Mass) -> Result<FoliationGeometry> {
    let (alpha, _) = lapse_from_jet(jet)?;
    let m = mass.get();
    let (theta, s) = (jet.theta, jet.s);
    let a = s * s * (1.0 - 2.0 * m * s);

    let e = [
        [1.0, 0.0, 0.0, -jet.p_theta],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -jet.p_s],
    ];
    // Second derivatives of P in the (θ, ϕ, s) directions.
    let hess = [
        [jet.p_thetatheta, 0.0, jet.p_stheta],
        [0.0, 0.0, 0.0],
        [jet.p_stheta, 0.0, jet.p_ss],
    ];
    let c = s * alpha / jet.p_tau;
    let n_low = [c * jet.p_theta, 0.0, c * jet.p_s, c];
    let gam = christoffel(theta, s, m);

    let mut frame_metric = [[0.0; 3]; 3];
    let mut kbar = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            frame_metric[i][j] = gbar_dot(theta, s, m, &e[i], &e[j]);
            let mut cov = [0.0; 4];
            cov[3] = -hess[i][j];
            for (ai, ca) in cov.iter_mut().enumerate() {
                for b in 0..4 {
                    for cc in 0..4 {
                        *ca += gam[ai][b][cc] * e[i][b] * e[j][cc];
                    }
                }
            }
            kbar[i][j] = -(0..4).map(|k| n_low[k] * cov[k]).sum::<f64>();
        }
    }
    let dlambda = -alpha / jet.p_tau * (1.0 + a * jet.p_s);
    let mut k_e = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k_e[i][j] = (kbar[i][j] + dlambda * frame_metric[i][j]) / s;
        }
    }

    // Gram-Schmidt with respect to the frame metric: ε_i = Σ_k coef[i][k] e_k.
    let mut coef = [[0.0; 3]; 3];
    for i in 0..3 {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        for prev in coef.iter().take(i) {
            let proj = bilinear(&frame_metric, &v, prev);
            for k in 0..3 {
                v[k] -= proj * prev[k];
            }
        }
        let n2 = bilinear(&frame_metric, &v, &v);
        if !(n2 > 1e-10) {
            return Err(Error::DegenerateFrame { pivot: n2 });
        }
        let inv = 1.0 / n2.sqrt();
        for k in 0..3 {
            coef[i][k] = v[k] * inv;
        }
    }
    let mut eps = [[0.0; 4]; 3];
    let mut w = [[0.0; 4]; 3];
    for i in 0..3 {
        for k in 0..3 {
            for a_ in 0..4 {
                eps[i][a_] += coef[i][k] * e[k][a_];
            }
        }
        for a_ in 0..4 {
            w[i][a_] = s * eps[i][a_];
        }
    }
    let mut k_w = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k_w[i][j] = s * s * bilinear(&k_e, &coef[i], &coef[j]);
        }
    }
    let h = (k_w[0][0] + k_w[1][1] + k_w[2][2]) / 3.0;
    let pref = alpha * s * s / jet.p_tau;
    let t = [
        pref * jet.p_theta,
        0.0,
        pref * (1.0 + a * jet.p_s),
        pref * jet.p_s,
    ];
    Ok(FoliationGeometry {
        jet: *jet,
        alpha,
        frame_metric,
        eps,
        w,
        t,
        k_w,
        h,
    })
}

fn bilinear(m: &[[f64; 3]; 3], x: &[f64; 3], y: &[f64; 3]) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += m[i][j] * x[i] * y[j];
        }
    }
    acc
}

/// Physical `g(x, y) = s⁻² ḡ(x, y)` in the null chart.
pub fn physical_dot(theta: f64, s: f64, m: Mass, x: &[f64; 4], y: &[f64; 4]) -> f64 {
    gbar_dot(theta, s, m.get(), x, y) / (s * s)
}

/// `‖V‖_Θ` with `Θ = Σ g(·, w_i)² + g(·, T)²`.
pub fn theta_norm(v: &[f64; 4], geom: &FoliationGeometry, m: Mass) -> f64 {
    let (theta, s) = (geom.jet.theta, geom.jet.s);
    let mut acc = physical_dot(theta, s, m, v, &geom.t).powi(2);
    for wi in &geom.w {
        acc += physical_dot(theta, s, m, v, wi).powi(2);
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat(h0: f64) -> Foliation {
        Foliation::new(Mass::default(), &Cut::Zero, h0).unwrap()
    }

    #[test]
    fn phi_psi_zero_cut() {
        let f = SphereFunction::constant(crate::sphere::SphereGrid::axisymmetric(16), 0.0);
        let (phi, psi) = phi_psi(&f, 1.0, Convention::Internal).unwrap();
        assert!(phi.values.iter().all(|&v| v == -0.5));
        assert_eq!(psi.max_abs(), 0.0);
        let (phi, _) = phi_psi(&f, 1.0, Convention::User).unwrap();
        assert!(phi.values.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn jet_values_for_zero_cut() {
        let fol = flat(1.0);
        let j = fol.jet(1.0, 0.01, 1.0).unwrap();
        assert_relative_eq!(j.p, -0.005, epsilon = 1e-15);
        assert_relative_eq!(j.p_tau, -0.01, epsilon = 1e-15);
        assert_relative_eq!(j.p_s, -0.5, epsilon = 1e-15);
        assert_relative_eq!(fol.jet_unchecked(1.0, 0.0, 1.0).l, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn analytic_coefficients_match_cos_theta_formulas() {
        // internal f̃ = cos θ
        let fol = Foliation::from_internal(Mass::default(), Cut::CosTheta { amplitude: 1.0 }, (0.5, 2.0), 0.1)
            .unwrap();
        for &t in &[0.2, 1.0, 2.5] {
            let c = fol.coefficients(t, 1.0);
            let (sn, cs) = f64::sin_cos(t);
            assert_relative_eq!(c.phi[0], -0.5 * (1.0 + sn * sn), epsilon = 1e-14);
            assert_relative_eq!(c.psi[0], -cs - sn * sn * cs, epsilon = 1e-14);
        }
    }

    #[test]
    fn invert_tau_closed_form() {
        let fol = flat(1.0);
        assert_relative_eq!(fol.invert_tau(0.5, 0.01, 0.005).unwrap(), 1.0, epsilon = 1e-14);
        assert!(matches!(fol.invert_tau(0.5, 0.01, 10.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn lapse_limit_and_time_function() {
        let fol = flat(1.0);
        let (alpha, dt) = fol.lapse_and_time_check(1.0, 0.01, 1.0).unwrap();
        assert_relative_eq!(dt, 100.0, epsilon = 1e-10);
        assert!((alpha - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_cut_frame_near_null_infinity() {
        let fol = Foliation::new(Mass::default(), &Cut::Zero, 0.5).unwrap();
        let g = fol.geometry(1.0, 1e-6, 2.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.5 } else { 0.0 };
                assert!((g.k_w[i][j] - want).abs() < 1e-5);
            }
        }
        // ε₃ = τ⁻¹ e₃ at s = 0
        assert!((g.eps[2][2] - 0.5).abs() < 1e-5);
    }

    #[test]
    fn normal_is_unit_and_orthogonal_to_frame() {
        let fol = Foliation::new(Mass::default(), &Cut::CosTheta { amplitude: 0.3 }, 1.0).unwrap();
        let m = fol.mass;
        let g = fol.geometry(0.7, 0.02, 1.2).unwrap();
        let (th, s) = (0.7, 0.02);
        assert_relative_eq!(physical_dot(th, s, m, &g.t, &g.t), -1.0, epsilon = 1e-10);
        for i in 0..3 {
            assert!(physical_dot(th, s, m, &g.t, &g.w[i]).abs() < 1e-10);
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((physical_dot(th, s, m, &g.w[i], &g.w[j]) - want).abs() < 1e-10);
            }
        }
        assert_relative_eq!(theta_norm(&g.t, &g, m), 1.0, epsilon = 1e-10);
        assert_relative_eq!(theta_norm(&g.w[0], &g, m), 1.0, epsilon = 1e-10);
        let sum: Vec<f64> = (0..4).map(|a| g.t[a] + g.w[0][a]).collect();
        let sum: [f64; 4] = sum.try_into().unwrap();
        assert_relative_eq!(theta_norm(&sum, &g, m), 2f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn s0_validation_shrinks_until_spacelike() {
        let mut fol = Foliation::new(Mass::default(), &Cut::CosTheta { amplitude: 1.0 }, 1.0).unwrap();
        let v = fol.validate_s0(16, 32).unwrap();
        assert!(v.min_l >= 0.5 * 0.25);
        assert!(v.max_p_tau < 0.0);
        assert_eq!(fol.s0, v.s0);
    }
}
