//! Text artifacts of a continuation run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::charts::r_star;
use crate::curvature::{tilt_null, GraphField};
use crate::error::Result;
use crate::foliation::Foliation;
use crate::solver::ContinuationResult;

pub const SOLUTION_HEADER: &str = "theta,s,Q,u,L,nu_tilde,nu";

/// One line per node: `θ, s, Q, u = r* - Q, L(Q), ν̃, ν`.
pub fn solution_csv(field: &GraphField, fol: &Foliation) -> Result<String> {
    let mut out = String::with_capacity(field.values.len() * 150);
    out.push_str(SOLUTION_HEADER);
    out.push('\n');
    for i in 0..field.n_rows {
        let s = field.x(i);
        let rs = r_star(1.0 / s, fol.mass)?;
        for j in 0..field.n_theta {
            let jet = field.jet(i, j);
            let t = tilt_null(&jet, fol)?;
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                jet.theta,
                s,
                jet.value,
                rs - jet.value,
                t.l_q,
                t.nu_tilde,
                t.nu
            )
            .expect("write to string");
        }
    }
    Ok(out)
}

/// Parse a solution CSV back into a field. Rows must be `s`-major with the
/// colatitudes of [`GraphField`].
pub fn field_from_solution_csv(text: &str) -> Result<GraphField> {
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || k == 0 && line.starts_with("theta") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            return Err(crate::Error::Parse(format!("line {}: expected at least 3 columns", k + 1)));
        }
        let p = |c: &str| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| crate::Error::Parse(format!("line {}: {e}", k + 1)))
        };
        rows.push((p(cols[0])?, p(cols[1])?, p(cols[2])?));
    }
    if rows.is_empty() {
        return Err(crate::Error::Parse("no data rows".into()));
    }
    let s0 = rows[0].1;
    let n_theta = rows.iter().take_while(|r| r.1 == s0).count();
    if n_theta < 3 || rows.len() % n_theta != 0 {
        return Err(crate::Error::GridMismatch(format!(
            "{} rows do not form a grid with {n_theta} colatitudes",
            rows.len()
        )));
    }
    let n_rows = rows.len() / n_theta;
    if n_rows < 4 {
        return Err(crate::Error::GridMismatch(format!("only {n_rows} s-levels")));
    }
    // the printed s values round-trip, so look for the spacing that
    // reproduces every level bit for bit
    let levels: Vec<f64> = (0..n_rows).map(|i| rows[i * n_theta].1).collect();
    let estimate = (levels[n_rows - 1] - s0) / (n_rows - 1) as f64;
    let dx = (-16i64..=16)
        .filter_map(|k| {
            let bits = estimate.to_bits() as i64 + k;
            (bits > 0).then(|| f64::from_bits(bits as u64))
        })
        .find(|&d| levels.iter().enumerate().all(|(i, &s)| s0 + i as f64 * d == s))
        .unwrap_or(estimate);
    for (k, r) in rows.iter().enumerate() {
        let (i, j) = (k / n_theta, k % n_theta);
        let s = s0 + i as f64 * dx;
        let th = crate::curvature::theta_node(j, n_theta);
        if (r.1 - s).abs() > 1e-9 * s.abs().max(1e-3) || (r.0 - th).abs() > 1e-9 {
            return Err(crate::Error::GridMismatch(format!(
                "row {} at (θ, s) = ({}, {}) is off the grid",
                k + 2,
                r.0,
                r.1
            )));
        }
    }
    Ok(GraphField {
        n_theta,
        x_min: s0,
        dx,
        n_rows,
        values: rows.into_iter().map(|r| r.2).collect(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: usize,
    pub s_min: f64,
    pub newton_iterations: usize,
    pub residuals: Vec<f64>,
    pub guard_activations: usize,
    pub sandwich_lower: f64,
    pub sandwich_upper: f64,
    pub sandwich_ok: bool,
}

pub fn stage_summaries(result: &ContinuationResult) -> Vec<StageSummary> {
    result
        .stages
        .iter()
        .map(|s| StageSummary {
            stage: s.stage,
            s_min: s.s_min,
            newton_iterations: s.newton.iterations,
            residuals: s.newton.residuals.clone(),
            guard_activations: s.newton.guard_activations,
            sandwich_lower: s.sandwich_lower,
            sandwich_upper: s.sandwich_upper,
            sandwich_ok: s.sandwich_ok,
        })
        .collect()
}
