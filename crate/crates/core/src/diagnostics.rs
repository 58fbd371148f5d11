//! Post-processing of converged solves: asymptotic coefficient fits,
//! Lipschitz quotients, tilt bounds and the pass/fail claim report.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{tilt_null, GraphField};
use crate::error::{Error, Result};
use crate::foliation::{Foliation, GridLeaf};
use crate::solver::ContinuationResult;

/// Nodes dropped next to each s-boundary before fitting.
pub const FIT_EXCLUDE: usize = 3;
pub const MIN_WINDOW_LEVELS: usize = 8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub thetas: Vec<f64>,
    /// Fitted `u - r* ≈ c₀ + c₁s + c₂s² + c₃s³ + c₄s⁴` per θ-row.
    pub c0: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    /// Targets `f`, `φ_out`, `½ψ_out` from the closed-form coefficients.
    pub f: Vec<f64>,
    pub phi_out: Vec<f64>,
    pub half_psi_out: Vec<f64>,
    /// Same targets with derivatives taken on the solver grid.
    pub phi_out_grid: Vec<f64>,
    pub half_psi_out_grid: Vec<f64>,
    pub c0_abs_err: f64,
    pub c1_rel_err: f64,
    /// Relative to `sup |½ψ_out|`, or absolute when that vanishes.
    pub c2_err: f64,
    pub c2_err_is_relative: bool,
    /// Rows used in the coefficient fit.
    pub fit_window: (f64, f64),
    pub fit_rms: f64,
    /// `(s, sup_θ |Q - P|)` on the remainder window `[2s_min, s_max/4]`.
    pub remainder: Vec<(f64, f64)>,
    pub remainder_window: (f64, f64),
    pub remainder_slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Least-squares polynomial coefficients (lowest degree first).
pub fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() || xs.len() <= degree {
        return Err(Error::InsufficientWindow {
            levels: xs.len(),
            needed: degree + 1,
        });
    }
    // scale x to [0, 1] for conditioning
    let scale = xs.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let a = DMatrix::from_fn(xs.len(), degree + 1, |i, k| (xs[i] / scale).powi(k as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Domain(format!("polynomial fit: {e}")))?;
    Ok((0..=degree).map(|k| sol[k] / scale.powi(k as i32)).collect())
}

fn window_rows(field: &GraphField, lo: f64, hi: f64) -> Vec<usize> {
    let tol = 1e-9 * field.dx;
    (0..field.n_rows)
        .filter(|&i| {
            let s = field.x(i);
            s >= lo - tol && s <= hi + tol
        })
        .collect()
}

/// Fit `u - r* = -Q` row by row and compare with the expansion
/// `f + φ_out s + ½ψ_out s²`.
pub fn fit_asymptotics(field: &GraphField, fol: &Foliation, h0: f64) -> Result<AsymptoticFit> {
    let n = field.n_theta;
    let last = field.n_rows - 1;
    let s_min = field.x(0);
    let s_max = field.x(last);
    if field.n_rows < 2 * FIT_EXCLUDE + MIN_WINDOW_LEVELS {
        return Err(Error::InsufficientWindow {
            levels: field.n_rows.saturating_sub(2 * FIT_EXCLUDE),
            needed: MIN_WINDOW_LEVELS,
        });
    }
    let rem_rows = window_rows(field, 2.0 * s_min, s_max / 4.0);
    if rem_rows.len() < MIN_WINDOW_LEVELS {
        return Err(Error::InsufficientWindow {
            levels: rem_rows.len(),
            needed: MIN_WINDOW_LEVELS,
        });
    }
    let fit_rows: Vec<usize> = (FIT_EXCLUDE..=last - FIT_EXCLUDE).collect();
    let xs: Vec<f64> = fit_rows.iter().map(|&i| field.x(i)).collect();

    let fits: Vec<Result<(Vec<f64>, f64)>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let ys: Vec<f64> = fit_rows.iter().map(|&i| -field.at(i, j)).collect();
            let c = poly_fit(&xs, &ys, 4)?;
            let ss: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(&x, &y)| {
                    let p = c.iter().rev().fold(0.0, |acc, ck| acc * x + ck);
                    (p - y).powi(2)
                })
                .sum();
            Ok((c, ss))
        })
        .collect();
    let mut c0 = Vec::with_capacity(n);
    let mut c1 = Vec::with_capacity(n);
    let mut c2 = Vec::with_capacity(n);
    let mut ss_total = 0.0;
    for r in fits {
        let (c, ss) = r?;
        c0.push(c[0]);
        c1.push(c[1]);
        c2.push(c[2]);
        ss_total += ss;
    }

    let thetas: Vec<f64> = (0..n).map(|j| field.theta(j)).collect();
    let f_user = fol.cut();
    let f: Vec<f64> = thetas.iter().map(|&t| f_user.value(t)).collect();
    let (phi_out, half_psi_out): (Vec<f64>, Vec<f64>) = thetas
        .iter()
        .map(|&t| {
            let (p, q) = fol.expansion_coefficients(t, h0);
            (p, 0.5 * q)
        })
        .unzip();
    let leaf = GridLeaf::new(fol, 1.0 / h0, n)?;
    let phi_out_grid: Vec<f64> = leaf.phi.iter().map(|v| -v).collect();
    let half_psi_out_grid: Vec<f64> = leaf.psi.iter().map(|v| -0.5 * v).collect();

    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let c0_abs_err = max_diff(&c0, &f);
    let c1_rel_err = c1
        .iter()
        .zip(&phi_out)
        .fold(0.0f64, |m, (c, p)| m.max((c - p).abs() / p.abs()));
    let psi_scale = max_abs(&half_psi_out);
    let c2_err_is_relative = psi_scale > 1e-12;
    let c2_err = max_diff(&c2, &half_psi_out) / if c2_err_is_relative { psi_scale } else { 1.0 };

    let remainder: Vec<(f64, f64)> = rem_rows
        .iter()
        .map(|&i| {
            let s = field.x(i);
            let r = (0..n).fold(0.0f64, |m, j| m.max((field.at(i, j) - leaf.p(j, s)).abs()));
            (s, r)
        })
        .collect();
    let remainder_slope = loglog_slope(&remainder);

    Ok(AsymptoticFit {
        thetas,
        c0,
        c1,
        c2,
        f,
        phi_out,
        half_psi_out,
        phi_out_grid,
        half_psi_out_grid,
        c0_abs_err,
        c1_rel_err,
        c2_err,
        c2_err_is_relative,
        fit_window: (xs[0], xs[xs.len() - 1]),
        fit_rms: (ss_total / (n * xs.len()) as f64).sqrt(),
        remainder,
        remainder_window: (2.0 * s_min, s_max / 4.0),
        remainder_slope,
    })
}

/// Rows `θ, s, u - r*, fit, fit residual, Q - P`.
pub fn fit_residual_csv(field: &GraphField, fit: &AsymptoticFit, leaf: &GridLeaf) -> Result<String> {
    let n = field.n_theta;
    let xs: Vec<f64> = (FIT_EXCLUDE..field.n_rows - FIT_EXCLUDE).map(|i| field.x(i)).collect();
    let ys: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let ys: Vec<f64> = (FIT_EXCLUDE..field.n_rows - FIT_EXCLUDE).map(|i| -field.at(i, j)).collect();
            ys
        })
        .collect();
    let mut out = String::from("theta,s,u_minus_rstar,fit,fit_residual,remainder\n");
    for (j, y) in ys.iter().enumerate() {
        let c = poly_fit(&xs, y, 4)?;
        debug_assert!((c[0] - fit.c0[j]).abs() < 1e-12);
        for (k, &s) in xs.iter().enumerate() {
            let p = c.iter().rev().fold(0.0, |acc, ck| acc * s + ck);
            let q = -y[k];
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                field.theta(j),
                s,
                y[k],
                p,
                y[k] - p,
                q - leaf.p(j, s)
            )
            .expect("write to string");
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipschitzLevel {
    pub s: f64,
    pub theta_quotient: f64,
    pub s_quotient: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipschitzStage {
    pub stage: usize,
    pub s_min: f64,
    pub theta_quotient: f64,
    pub s_quotient: f64,
    /// `sup max(Q_s, 0)/s³`
    pub qs_over_s3: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub stages: Vec<LipschitzStage>,
    /// Per-level quotients of the finest stage.
    pub levels: Vec<LipschitzLevel>,
    pub theta_ratio: f64,
    pub s_ratio: f64,
    pub qs_ratio: f64,
}

fn lipschitz_levels(field: &GraphField) -> Vec<LipschitzLevel> {
    let n = field.n_theta;
    let dt = std::f64::consts::PI / n as f64;
    (0..field.n_rows)
        .map(|i| {
            let mut tq: f64 = 0.0;
            for j in 0..n - 1 {
                tq = tq.max(((field.at(i, j + 1) - field.at(i, j)) / dt).abs());
            }
            let mut sq: f64 = 0.0;
            if i + 1 < field.n_rows {
                for j in 0..n {
                    sq = sq.max(((field.at(i + 1, j) - field.at(i, j)) / field.dx).abs());
                }
            }
            LipschitzLevel {
                s: field.x(i),
                theta_quotient: tq,
                s_quotient: sq,
            }
        })
        .collect()
}

/// Quotients below this are rounding noise of `O(1)` values (e.g. the
/// θ-quotient of a spherically symmetric solution).
pub const QUOTIENT_FLOOR: f64 = 1e-10;

/// Ratio `b/a`, read as 1 when both sit below [`QUOTIENT_FLOOR`].
fn stage_ratio(a: f64, b: f64) -> f64 {
    if a < QUOTIENT_FLOOR && b < QUOTIENT_FLOOR {
        1.0
    } else {
        b / a.max(QUOTIENT_FLOOR)
    }
}

pub fn lipschitz_check(result: &ContinuationResult) -> LipschitzReport {
    let stages: Vec<LipschitzStage> = result
        .stages
        .iter()
        .map(|st| {
            let f = st.field();
            let levels = lipschitz_levels(f);
            let mut qs: f64 = 0.0;
            for i in 0..f.n_rows {
                let s = f.x(i);
                for j in 0..f.n_theta {
                    qs = qs.max(f.jet(i, j).d_x.max(0.0) / s.powi(3));
                }
            }
            LipschitzStage {
                stage: st.stage,
                s_min: f.x_min,
                theta_quotient: levels.iter().fold(0.0, |m, l| m.max(l.theta_quotient)),
                s_quotient: levels.iter().fold(0.0, |m, l| m.max(l.s_quotient)),
                qs_over_s3: qs,
            }
        })
        .collect();
    let levels = lipschitz_levels(result.finest().field());
    let k = stages.len();
    let (a, b) = if k >= 2 { (&stages[k - 2], &stages[k - 1]) } else { (&stages[0], &stages[0]) };
    LipschitzReport {
        theta_ratio: stage_ratio(a.theta_quotient, b.theta_quotient),
        s_ratio: stage_ratio(a.s_quotient, b.s_quotient),
        qs_ratio: stage_ratio(a.qs_over_s3, b.qs_over_s3),
        stages,
        levels,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TiltLevel {
    pub s: f64,
    pub sup_nu: f64,
    pub sup_s_nu_tilde: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TiltStage {
    pub stage: usize,
    pub sup_nu: f64,
    pub sup_s_nu_tilde: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TiltReport {
    pub stages: Vec<TiltStage>,
    pub levels: Vec<TiltLevel>,
    /// Largest relative change of `sup ν` between consecutive stages.
    pub nu_drift: f64,
    /// `max(max/median, median/min)` of `sup_θ s·ν̃` over the finest stage.
    pub s_nu_tilde_spread: f64,
    /// `log₁₀(s_max/s_min)` of the finest stage.
    pub decades: f64,
    /// Points where `1 ≤ ν ≤ 2γν̃` fails by more than `1e-12`.
    pub bartnik_violations: usize,
    pub points_checked: usize,
}

/// Per-level tilt sups of one field and the number of chain violations.
pub fn tilt_levels(field: &GraphField, fol: &Foliation) -> Result<(Vec<TiltLevel>, usize)> {
    let rows: Vec<Result<(TiltLevel, usize)>> = (0..field.n_rows)
        .into_par_iter()
        .map(|i| {
            let mut nu: f64 = 0.0;
            let mut snt: f64 = 0.0;
            let mut bad = 0;
            for j in 0..field.n_theta {
                let t = tilt_null(&field.jet(i, j), fol)?;
                nu = nu.max(t.nu);
                snt = snt.max(t.s * t.nu_tilde);
                if t.nu < 1.0 - 1e-12 || t.nu > 2.0 * t.gamma * t.nu_tilde * (1.0 + 1e-12) {
                    bad += 1;
                }
            }
            Ok((
                TiltLevel {
                    s: field.x(i),
                    sup_nu: nu,
                    sup_s_nu_tilde: snt,
                },
                bad,
            ))
        })
        .collect();
    let mut levels = Vec::with_capacity(rows.len());
    let mut bad = 0;
    for r in rows {
        let (l, b) = r?;
        levels.push(l);
        bad += b;
    }
    Ok((levels, bad))
}

pub fn tilt_boundedness(result: &ContinuationResult, fol: &Foliation) -> Result<TiltReport> {
    let mut stages = Vec::new();
    let mut violations = 0;
    let mut points = 0;
    let mut finest = Vec::new();
    for st in &result.stages {
        let f = st.field();
        let (levels, bad) = tilt_levels(f, fol)?;
        violations += bad;
        points += f.values.len();
        stages.push(TiltStage {
            stage: st.stage,
            sup_nu: levels.iter().fold(0.0, |m, l| m.max(l.sup_nu)),
            sup_s_nu_tilde: levels.iter().fold(0.0, |m, l| m.max(l.sup_s_nu_tilde)),
        });
        finest = levels;
    }
    let nu_drift = stages
        .windows(2)
        .map(|w| (w[1].sup_nu - w[0].sup_nu).abs() / w[0].sup_nu)
        .fold(0.0, f64::max);
    let f = result.finest().field();
    Ok(TiltReport {
        nu_drift,
        s_nu_tilde_spread: spread(finest.iter().map(|l| l.sup_s_nu_tilde).collect()),
        decades: (f.x(f.n_rows - 1) / f.x(0)).log10(),
        bartnik_violations: violations,
        points_checked: points,
        stages,
        levels: finest,
    })
}

/// `max(max/median, median/min)` of positive samples.
pub fn spread(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    (v[n - 1] / median).max(median / v[0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Claim {
    pub claim_id: String,
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Claim {
    pub fn at_most(id: &str, value: f64, threshold: f64) -> Self {
        Self {
            claim_id: id.into(),
            value,
            threshold,
            comparison: Comparison::AtMost,
            pass: value <= threshold,
        }
    }

    pub fn at_least(id: &str, value: f64, threshold: f64) -> Self {
        Self {
            claim_id: id.into(),
            value,
            threshold,
            comparison: Comparison::AtLeast,
            pass: value >= threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub h0: f64,
    pub claims: Vec<Claim>,
    pub fit: AsymptoticFit,
    pub lipschitz: LipschitzReport,
    pub tilt: TiltReport,
    pub gaps: Vec<f64>,
    /// `(stage, lower, upper)` sandwich margins.
    pub sandwich: Vec<(usize, f64, f64)>,
}

impl DiagnosticsReport {
    pub fn build(result: &ContinuationResult, fol: &Foliation) -> Result<Self> {
        let h0 = result.h0;
        let fit = fit_asymptotics(result.finest().field(), fol, h0)?;
        let lipschitz = lipschitz_check(result);
        let tilt = tilt_boundedness(result, fol)?;
        let slack = result.config.sandwich_slack;
        let sandwich: Vec<(usize, f64, f64)> = result
            .stages
            .iter()
            .map(|s| (s.stage, s.sandwich_lower, s.sandwich_upper))
            .collect();
        let min_margin = sandwich.iter().fold(f64::INFINITY, |m, &(_, a, b)| m.min(a).min(b));
        let c2 = if fit.c2_err_is_relative {
            Claim::at_most("asymptotics.c2_rel_err", fit.c2_err, 0.02)
        } else {
            Claim::at_most("asymptotics.c2_abs_err", fit.c2_err, 1e-3)
        };
        let mut claims = vec![
            Claim::at_most("asymptotics.c0_abs_err", fit.c0_abs_err, 1e-3),
            Claim::at_most("asymptotics.c1_rel_err", fit.c1_rel_err, 0.02),
            c2,
            Claim::at_least("asymptotics.remainder_slope", fit.remainder_slope, 2.7),
            Claim::at_least("solver.sandwich_min_margin", min_margin, -slack),
            Claim::at_most("lipschitz.theta_ratio", lipschitz.theta_ratio, 1.5),
            Claim::at_most("lipschitz.s_ratio", lipschitz.s_ratio, 1.5),
            Claim::at_most("lipschitz.qs_over_s3_ratio", lipschitz.qs_ratio, 1.5),
            Claim::at_most("tilt.nu_drift", tilt.nu_drift, 0.1),
            Claim::at_most("tilt.s_nu_tilde_spread", tilt.s_nu_tilde_spread, 2.0),
            Claim::at_most("tilt.bartnik_violations", tilt.bartnik_violations as f64, 0.0),
        ];
        if let Some(&g) = result.gaps.last() {
            claims.push(Claim::at_most("solver.final_gap", g, 1e-6));
        }
        Ok(Self {
            h0,
            claims,
            fit,
            lipschitz,
            tilt,
            gaps: result.gaps.clone(),
            sandwich,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.claims.iter().all(|c| c.pass)
    }
}

/// Matplotlib script for the artifacts written next to it.
pub fn plot_script() -> &'static str {
    r#"import csv
import json
import sys
from pathlib import Path

import matplotlib.pyplot as plt

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
report = json.loads((out / "diagnostics.json").read_text())

fig, ax = plt.subplots(1, 3, figsize=(15, 4))

rem = report["fit"]["remainder"]
r = [1.0 / s for s, _ in rem]
ax[0].loglog(r, [v for _, v in rem], "o-", label="sup |u - r* - expansion|")
s0, v0 = rem[0]
ax[0].loglog(r, [v0 * (s / s0) ** 3 for s, _ in rem], "k--", label="r^-3")
ax[0].set_xlabel("r")
ax[0].legend()
ax[0].set_title("remainder")

stages = [m[0] for m in report["sandwich"]]
ax[1].semilogy(stages, [m[1] for m in report["sandwich"]], "o-", label="Q - Q_beta1")
ax[1].semilogy(stages, [m[2] for m in report["sandwich"]], "s-", label="Q_beta2 - Q")
ax[1].set_xlabel("stage")
ax[1].legend()
ax[1].set_title("sandwich margins")

lv = report["tilt"]["levels"]
ax[2].plot([l["s"] for l in lv], [l["sup_nu"] for l in lv], label="sup nu")
ax[2].plot([l["s"] for l in lv], [l["sup_s_nu_tilde"] for l in lv], label="sup s nu~")
ax[2].set_xlabel("s")
ax[2].legend()
ax[2].set_title("tilt profiles")

fig.tight_layout()
fig.savefig(out / "diagnostics.png", dpi=120)
"#
}
