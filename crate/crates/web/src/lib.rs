//! wasm-bindgen front end for `www/index.html`. Each export takes plain
//! numbers, returns a JSON string and reports failures as a JS exception.
//! The `*_data` functions are the native-testable cores.

use cmc_scri::barriers::exact_h;
use cmc_scri::charts::Mass;
use cmc_scri::curvature::theta_node;
use cmc_scri::cut::Cut;
use cmc_scri::diagnostics::fit_asymptotics;
use cmc_scri::foliation::Foliation;
use cmc_scri::solver::{continuation_limit, SolverConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn cut_of(kind: &str, amplitude: f64) -> cmc_scri::Result<Cut> {
    match kind {
        "zero" => Ok(Cut::Zero),
        "cos_theta" => Ok(Cut::CosTheta { amplitude }),
        "legendre2" => Ok(Cut::Legendre2 { amplitude }),
        other => Err(cmc_scri::Error::Domain(format!("unknown cut `{other}`"))),
    }
}

fn foliation(kind: &str, amplitude: f64, h0: f64) -> cmc_scri::Result<Foliation> {
    Foliation::new(Mass::default(), &cut_of(kind, amplitude)?, h0)
}

#[derive(Debug, Serialize)]
pub struct Profiles {
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    pub phi_out: Vec<f64>,
    pub half_psi_out: Vec<f64>,
}

/// `f`, `φ_out` and `½ψ_out` of a cut on `n` cell-centred colatitudes.
pub fn profiles_data(kind: &str, amplitude: f64, h0: f64, n: usize) -> cmc_scri::Result<Profiles> {
    let fol = foliation(kind, amplitude, h0)?;
    let cut = fol.cut();
    let theta: Vec<f64> = (0..n.max(1)).map(|j| theta_node(j, n.max(1))).collect();
    let (phi_out, half_psi_out) = theta
        .iter()
        .map(|&t| {
            let (p, q) = fol.expansion_coefficients(t, h0);
            (p, 0.5 * q)
        })
        .unzip();
    Ok(Profiles {
        f: theta.iter().map(|&t| cut.value(t)).collect(),
        theta,
        phi_out,
        half_psi_out,
    })
}

#[derive(Debug, Serialize)]
pub struct BarrierCurve {
    pub beta: f64,
    /// `(H - H₀)/s²` along `s`.
    pub scaled_excess: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct BarrierCurves {
    pub s: Vec<f64>,
    pub curves: Vec<BarrierCurve>,
}

/// Mean curvature of `P + βs³` at colatitude `theta` for each `β`.
pub fn barrier_data(kind: &str, amplitude: f64, h0: f64, theta: f64, betas: &[f64]) -> cmc_scri::Result<BarrierCurves> {
    let fol = foliation(kind, amplitude, h0)?;
    let s: Vec<f64> = (1..=60).map(|i| 0.05 * i as f64 / 60.0).collect();
    let curves = betas
        .iter()
        .map(|&beta| {
            let scaled_excess = s
                .iter()
                .map(|&si| Ok((exact_h(&fol, h0, beta, 3, theta, si)? - h0) / (si * si)))
                .collect::<cmc_scri::Result<Vec<f64>>>()?;
            Ok(BarrierCurve { beta, scaled_excess })
        })
        .collect::<cmc_scri::Result<Vec<_>>>()?;
    Ok(BarrierCurves { s, curves })
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub beta1: f64,
    pub beta2: f64,
    pub stages: Vec<(usize, f64, usize)>,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    /// `u - r* = -Q`, row-major over `(s, θ)`.
    pub u_minus_rstar: Vec<f64>,
    pub c1: Vec<f64>,
    pub phi_out: Vec<f64>,
    pub remainder: Vec<(f64, f64)>,
    pub remainder_slope: f64,
}

/// Small continuation solve with diagnostics.
pub fn solve_data(kind: &str, amplitude: f64, h0: f64, n_theta: usize, n_s: usize, stages: usize) -> cmc_scri::Result<SolveSummary> {
    let fol = foliation(kind, amplitude, h0)?;
    let cfg = SolverConfig {
        n_theta,
        n_s,
        stages,
        ..Default::default()
    };
    let r = continuation_limit(&fol, h0, &cfg)?;
    let field = r.finest().field();
    let fit = fit_asymptotics(field, &fol, h0)?;
    Ok(SolveSummary {
        beta1: r.barriers.beta1,
        beta2: r.barriers.beta2,
        stages: r.stages.iter().map(|s| (s.stage, s.s_min, s.newton.iterations)).collect(),
        s: (0..field.n_rows).map(|i| field.x(i)).collect(),
        theta: (0..field.n_theta).map(|j| field.theta(j)).collect(),
        u_minus_rstar: field.values.iter().map(|q| -q).collect(),
        c1: fit.c1,
        phi_out: fit.phi_out,
        remainder: fit.remainder,
        remainder_slope: fit.remainder_slope,
    })
}

fn to_js<T: Serialize>(r: cmc_scri::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn coefficient_profiles(kind: &str, amplitude: f64, h0: f64, n: usize) -> Result<String, JsError> {
    to_js(profiles_data(kind, amplitude, h0, n))
}

#[wasm_bindgen]
pub fn barrier_curves(kind: &str, amplitude: f64, h0: f64, theta: f64, betas: Vec<f64>) -> Result<String, JsError> {
    to_js(barrier_data(kind, amplitude, h0, theta, &betas))
}

#[wasm_bindgen]
pub fn solve(kind: &str, amplitude: f64, h0: f64, n_theta: usize, n_s: usize, stages: usize) -> Result<String, JsError> {
    to_js(solve_data(kind, amplitude, h0, n_theta, n_s, stages))
}
