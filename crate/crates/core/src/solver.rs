//! Damped Newton solver for `H(Q) = H₀` on annuli `s ∈ [s_min, s_max]` with
//! Dirichlet data on both boundary rows, and the continuation `s_min → 0`.
//!
//! The grid is anchored at null infinity: `s_i = i·Δs`, `Δs = s_max/N_s`,
//! and stage `k` of the continuation covers rows `N_s/2^k ..= N_s`, so every
//! stage lives on a subset of the same nodes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barriers::{barrier_field, select_barriers, BarrierGrid, BarrierPair};
use crate::charts::Mass;
use crate::curvature::{cmc_residual, spacelike_l, GraphField};
use crate::error::{Error, Result};
use crate::foliation::{Foliation, GridLeaf};
use crate::linalg::BandMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub n_theta: usize,
    pub n_s: usize,
    /// Requested outer end of the annulus; shrunk to the validated barrier `s₀`.
    pub s_max: f64,
    /// Number of continuation stages `K`; `s_min = 2^{-k} s_max`.
    pub stages: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo_c: f64,
    pub min_step: f64,
    /// Spacelikeness floor `L(Q) ≥ κ H₀⁻²`.
    pub kappa: f64,
    pub sandwich_slack: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_theta: 64,
            n_s: 256,
            s_max: 0.05,
            stages: 4,
            newton_tol: 1e-10,
            max_newton: 50,
            armijo_c: 1e-4,
            min_step: 2f64.powi(-20),
            kappa: 1e-3,
            sandwich_slack: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        if self.n_theta < 3 {
            return bad(format!("n_theta = {} < 3", self.n_theta));
        }
        if self.stages == 0 || self.stages > 20 {
            return bad(format!("stages = {} outside 1..=20", self.stages));
        }
        let div = 1usize << self.stages;
        if self.n_s % div != 0 || self.n_s / div < 2 {
            return bad(format!(
                "n_s = {} must be a multiple of 2^stages = {div} with at least 2 rows below the last s_min",
                self.n_s
            ));
        }
        if !(self.s_max > 0.0) {
            return bad(format!("s_max = {} must be positive", self.s_max));
        }
        for (name, v) in [
            ("newton_tol", self.newton_tol),
            ("armijo_c", self.armijo_c),
            ("min_step", self.min_step),
            ("kappa", self.kappa),
            ("sandwich_slack", self.sandwich_slack),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if self.max_newton == 0 {
            return bad("max_newton must be positive".into());
        }
        Ok(())
    }

    /// First row of stage `k` (1-based).
    pub fn i_min(&self, k: usize) -> usize {
        self.n_s >> k
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonReport {
    pub field: GraphField,
    /// Sup-norm residual before each Newton step and at the end.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    /// Line-search halvings forced by the spacelikeness guard.
    pub guard_activations: usize,
    /// Step lengths taken.
    pub steps: Vec<f64>,
}

/// Residual `-3H₀L^{3/2} - R` on the interior rows, row-major.
pub fn residual(field: &GraphField, m: Mass, h0: f64) -> Vec<f64> {
    let n = field.n_theta;
    let mut out = vec![0.0; (field.n_rows - 2) * n];
    out.par_chunks_mut(n).enumerate().for_each(|(r, chunk)| {
        for (j, v) in chunk.iter_mut().enumerate() {
            *v = cmc_residual(&field.jet(r + 1, j), m, h0);
        }
    });
    out
}

/// `min L(Q)` over the interior rows.
pub fn min_interior_l(field: &GraphField, m: Mass) -> f64 {
    (1..field.n_rows - 1)
        .into_par_iter()
        .map(|i| {
            (0..field.n_theta)
                .map(|j| spacelike_l(&field.jet(i, j), m))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

/// Jacobian of [`residual`] by coloured finite differences. The stencil
/// couples `(i, j)` to its 3×3 neighbourhood, so nine colours `(i mod 3,
/// j mod 3)` separate all columns.
fn jacobian(field: &GraphField, base: &[f64], m: Mass, h0: f64) -> BandMatrix {
    let n = field.n_theta;
    let n_int = field.n_rows - 2;
    let size = n_int * n;
    let mut jac = BandMatrix::zeros(size, n + 1, n + 1);
    let eps_of = |q: f64| 1.5e-8 * q.abs().max(1.0);
    for ci in 0..3 {
        for cj in 0..3 {
            let mut pert = field.clone();
            for i in 1..=n_int {
                if i % 3 != ci {
                    continue;
                }
                for j in (cj..n).step_by(3) {
                    let k = i * n + j;
                    pert.values[k] += eps_of(field.values[k]);
                }
            }
            let f = residual(&pert, m, h0);
            for r_i in 1..=n_int {
                for r_j in 0..n {
                    let row = (r_i - 1) * n + r_j;
                    let ri_lo = r_i.saturating_sub(1).max(1);
                    let Some(c_i) = (ri_lo..=(r_i + 1).min(n_int)).find(|x| x % 3 == ci) else {
                        continue;
                    };
                    let Some(c_j) = (r_j.saturating_sub(1)..=(r_j + 1).min(n - 1)).find(|x| x % 3 == cj) else {
                        continue;
                    };
                    let col = (c_i - 1) * n + c_j;
                    let eps = eps_of(field.values[c_i * n + c_j]);
                    let d = (f[row] - base[row]) / eps;
                    if d != 0.0 {
                        jac.set(row, col, d);
                    }
                }
            }
        }
    }
    jac
}

/// Solve `H(Q) = H₀` on the interior rows of `init`, keeping the first and
/// last rows as Dirichlet data.
pub fn solve_dirichlet(init: GraphField, m: Mass, h0: f64, cfg: &SolverConfig) -> Result<NewtonReport> {
    if init.n_rows < 3 {
        return Err(Error::GridMismatch("need at least one interior row".into()));
    }
    let n = init.n_theta;
    let l_floor = cfg.kappa / (h0 * h0);
    if !(min_interior_l(&init, m) >= l_floor) {
        return Err(Error::GuardStarvation {
            iteration: 0,
            min_step: cfg.min_step,
        });
    }
    let mut field = init;
    let mut f = residual(&field, m, h0);
    let mut norm = sup_norm(&f);
    let mut residuals = vec![norm];
    let mut steps = Vec::new();
    let mut guard_activations = 0;
    for iteration in 0..cfg.max_newton {
        if norm < cfg.newton_tol {
            return Ok(NewtonReport {
                field,
                residuals,
                iterations: iteration,
                guard_activations,
                steps,
            });
        }
        let lu = jacobian(&field, &f, m, h0).factor()?;
        let mut delta: Vec<f64> = f.iter().map(|v| -v).collect();
        lu.solve_in_place(&mut delta);
        let mut lambda = 1.0;
        loop {
            if lambda < cfg.min_step {
                return Err(Error::GuardStarvation {
                    iteration,
                    min_step: cfg.min_step,
                });
            }
            let mut trial = field.clone();
            for (v, d) in trial.values[n..n + delta.len()].iter_mut().zip(&delta) {
                *v += lambda * d;
            }
            if !(min_interior_l(&trial, m) >= l_floor) {
                guard_activations += 1;
                lambda *= 0.5;
                continue;
            }
            let f_trial = residual(&trial, m, h0);
            let n_trial = sup_norm(&f_trial);
            if n_trial <= (1.0 - cfg.armijo_c * lambda) * norm {
                field = trial;
                f = f_trial;
                norm = n_trial;
                break;
            }
            lambda *= 0.5;
        }
        steps.push(lambda);
        residuals.push(norm);
    }
    if norm < cfg.newton_tol {
        return Ok(NewtonReport {
            field,
            residuals,
            iterations: cfg.max_newton,
            guard_activations,
            steps,
        });
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_newton,
        residual: norm,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageResult {
    pub stage: usize,
    pub s_min: f64,
    pub newton: NewtonReport,
    /// `min (Q - Q_{β₁})` over all nodes.
    pub sandwich_lower: f64,
    /// `min (Q_{β₂} - Q)` over all nodes.
    pub sandwich_upper: f64,
    pub sandwich_ok: bool,
}

impl StageResult {
    pub fn field(&self) -> &GraphField {
        &self.newton.field
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub config: SolverConfig,
    pub h0: f64,
    pub s_max: f64,
    pub barriers: BarrierPair,
    pub leaf: GridLeaf,
    pub stages: Vec<StageResult>,
    /// `sup |Q^{(k+1)} - Q^{(k)}|` on `s ∈ [s_max/4, s_max/2]`.
    pub gaps: Vec<f64>,
    pub gaps_decreasing: bool,
    pub certificate_ok: bool,
}

impl ContinuationResult {
    pub fn finest(&self) -> &StageResult {
        self.stages.last().expect("at least one stage")
    }

    pub fn sandwich_ok(&self) -> bool {
        self.stages.iter().all(|s| s.sandwich_ok)
    }
}

/// Grid field on rows `i_min ..= n_s` filled from `f(i, j)`.
fn rows_field(cfg: &SolverConfig, s_max: f64, i_min: usize, f: impl Fn(usize, usize) -> f64) -> GraphField {
    let n = cfg.n_theta;
    let ds = s_max / cfg.n_s as f64;
    let mut values = Vec::with_capacity((cfg.n_s - i_min + 1) * n);
    for i in i_min..=cfg.n_s {
        for j in 0..n {
            values.push(f(i, j));
        }
    }
    GraphField {
        n_theta: n,
        x_min: i_min as f64 * ds,
        dx: ds,
        n_rows: cfg.n_s - i_min + 1,
        values,
    }
}

/// One Dirichlet solve on rows `i_min ..= n_s` with boundary data from the
/// leaf `P(·, ·, H₀⁻¹)` and interior initial guess `guess(i, j)`.
pub fn solve_annulus(
    leaf: &GridLeaf,
    m: Mass,
    h0: f64,
    cfg: &SolverConfig,
    s_max: f64,
    i_min: usize,
    guess: impl Fn(usize, usize) -> Option<f64>,
) -> Result<NewtonReport> {
    let ds = s_max / cfg.n_s as f64;
    let init = rows_field(cfg, s_max, i_min, |i, j| {
        let p = leaf.p(j, i as f64 * ds);
        if i == i_min || i == cfg.n_s {
            p
        } else {
            guess(i, j).unwrap_or(p)
        }
    });
    solve_dirichlet(init, m, h0, cfg)
}

fn sandwich(field: &GraphField, lower: &GraphField, upper: &GraphField) -> (f64, f64) {
    // Both barrier fields cover the finest grid; align by row offset.
    let n = field.n_theta;
    let off = ((field.x_min - lower.x_min) / field.dx).round() as usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..field.n_rows {
        for j in 0..n {
            let q = field.at(i, j);
            lo = lo.min(q - lower.at(i + off, j));
            hi = hi.min(upper.at(i + off, j) - q);
        }
    }
    (lo, hi)
}

/// Barrier selection followed by the continuation `k = 1..=K`.
pub fn continuation_limit(fol: &Foliation, h0: f64, cfg: &SolverConfig) -> Result<ContinuationResult> {
    cfg.validate()?;
    let m = fol.mass;
    let grid = BarrierGrid {
        n_theta: cfg.n_theta,
        n_s: cfg.n_s,
        i_min: cfg.i_min(cfg.stages),
        s_max: cfg.s_max,
    };
    let barriers = select_barriers(fol, h0, &grid)?;
    let s_max = barriers.s0;
    let fine_grid = BarrierGrid { s_max, ..grid };
    let leaf = GridLeaf::new(fol, 1.0 / h0, cfg.n_theta)?;
    let lower = barrier_field(&leaf, barriers.beta1, &fine_grid);
    let upper = barrier_field(&leaf, barriers.beta2, &fine_grid);

    let mut stages: Vec<StageResult> = Vec::with_capacity(cfg.stages);
    for k in 1..=cfg.stages {
        let i_min = cfg.i_min(k);
        let prev = stages.last().map(|s| s.field().clone());
        let prev_i_min = if k > 1 { cfg.i_min(k - 1) } else { usize::MAX };
        let guess = |i: usize, j: usize| {
            prev.as_ref()
                .filter(|_| i > prev_i_min)
                .map(|p| p.at(i - prev_i_min, j))
        };
        let newton = solve_annulus(&leaf, m, h0, cfg, s_max, i_min, guess).map_err(|e| Error::Stage {
            stage: k,
            source: Box::new(e),
        })?;
        let (lo, hi) = sandwich(&newton.field, &lower, &upper);
        stages.push(StageResult {
            stage: k,
            s_min: newton.field.x_min,
            sandwich_lower: lo,
            sandwich_upper: hi,
            sandwich_ok: lo >= -cfg.sandwich_slack && hi >= -cfg.sandwich_slack,
            newton,
        });
    }

    let (w_lo, w_hi) = (cfg.n_s / 4, cfg.n_s / 2);
    let mut gaps = Vec::new();
    for pair in stages.windows(2) {
        let (a, b) = (pair[0].field(), pair[1].field());
        let ia = cfg.n_s + 1 - a.n_rows;
        let ib = cfg.n_s + 1 - b.n_rows;
        let mut gap: f64 = 0.0;
        for i in w_lo.max(ia).max(ib)..=w_hi {
            for j in 0..cfg.n_theta {
                gap = gap.max((a.at(i - ia, j) - b.at(i - ib, j)).abs());
            }
        }
        gaps.push(gap);
    }
    let gaps_decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let certificate_ok = gaps_decreasing && gaps.last().is_none_or(|&g| g < 1e-6);
    Ok(ContinuationResult {
        config: cfg.clone(),
        h0,
        s_max,
        barriers,
        leaf,
        stages,
        gaps,
        gaps_decreasing,
        certificate_ok,
    })
}
