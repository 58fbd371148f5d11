use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cmc_scri::barriers::{higher_order_obstruction, select_barriers, BarrierGrid, BarrierPair, ObstructionEstimate};
use cmc_scri::diagnostics::{fit_asymptotics, fit_residual_csv, loglog_slope, plot_script, AsymptoticFit, Claim, DiagnosticsReport};
use cmc_scri::export::{field_from_solution_csv, solution_csv, stage_summaries, StageSummary};
use cmc_scri::foliation::{Foliation, GridLeaf};
use cmc_scri::solver::continuation_limit;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, Context};

/// Maximum number of `L ≤ 0` locations written to reports.
const MAX_LISTED: usize = 25;

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        context: format!("creating {}", dir.display()),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("reading {}", path.display()),
        source,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialise");
    s.push('\n');
    s
}

fn from_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Location {
    pub theta: f64,
    pub s: f64,
    pub tau: f64,
    pub l: f64,
}

/// How the outer end `s₀` of the foliated slab was obtained.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SlabCheck {
    pub s0: f64,
    pub forced: bool,
    pub halvings: Option<usize>,
    pub min_l: f64,
    pub max_p_tau: f64,
    pub spacelike: bool,
    pub nonspacelike_count: usize,
    pub nonspacelike: Vec<Location>,
}

fn check_slab(cfg: &RunConfig, fol: &mut Foliation) -> SlabCheck {
    let fc = &cfg.foliation_check;
    if cfg.s0.is_some() {
        let s0 = fol.s0;
        let (min_l, max_p_tau) = fol.scan(s0, fc.n_theta, fc.n_s);
        let bad = fol.nonspacelike_points(s0, fc.n_theta, fc.n_s);
        SlabCheck {
            s0,
            forced: true,
            halvings: None,
            min_l,
            max_p_tau,
            spacelike: bad.is_empty() && max_p_tau < 0.0,
            nonspacelike_count: bad.len(),
            nonspacelike: bad
                .into_iter()
                .take(MAX_LISTED)
                .map(|(theta, s, tau, l)| Location { theta, s, tau, l })
                .collect(),
        }
    } else {
        match fol.validate_s0(fc.n_theta, fc.n_s) {
            Ok(v) => SlabCheck {
                s0: v.s0,
                forced: false,
                halvings: Some(v.halvings),
                min_l: v.min_l,
                max_p_tau: v.max_p_tau,
                spacelike: true,
                nonspacelike_count: 0,
                nonspacelike: vec![],
            },
            Err(_) => {
                let (min_l, max_p_tau) = fol.scan(fol.s0, fc.n_theta, fc.n_s);
                SlabCheck {
                    s0: fol.s0,
                    forced: false,
                    halvings: None,
                    min_l,
                    max_p_tau,
                    spacelike: false,
                    nonspacelike_count: 0,
                    nonspacelike: vec![],
                }
            }
        }
    }
}

fn slab_failure(slab: &SlabCheck) -> CliError {
    let mut msg = format!(
        "foliation is not spacelike on (0, {}]: min L = {:.3e}, max P_τ = {:.3e}",
        slab.s0, slab.min_l, slab.max_p_tau
    );
    if slab.nonspacelike_count > 0 {
        let _ = write!(msg, "; {} points with L ≤ 0, first ones (θ, s, τ, L):", slab.nonspacelike_count);
        for p in slab.nonspacelike.iter().take(10) {
            let _ = write!(msg, "\n  ({:.4}, {:.4}, {:.4}, {:.3e})", p.theta, p.s, p.tau, p.l);
        }
    }
    CliError::CheckFailed(msg)
}

/// Foliation with a validated (or forced and checked) `s₀`.
fn prepared_foliation(cfg: &RunConfig) -> CliResult<(Foliation, SlabCheck)> {
    let mut fol = cfg.foliation()?;
    let slab = check_slab(cfg, &mut fol);
    if !slab.spacelike {
        return Err(slab_failure(&slab));
    }
    Ok((fol, slab))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionSlope {
    pub quantity: String,
    pub theta: f64,
    pub tau: f64,
    pub slope: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FoliationCheckReport {
    pub slab: SlabCheck,
    pub expansions: Vec<ExpansionSlope>,
    pub pass: bool,
}

fn expansion_slopes(cfg: &RunConfig, fol: &Foliation) -> CliResult<Vec<ExpansionSlope>> {
    let fc = &cfg.foliation_check;
    let ss: Vec<f64> = fc.s_levels.iter().copied().filter(|&s| s <= fol.s0).collect();
    if ss.len() < 2 {
        return Err(CliError::CheckFailed(format!(
            "fewer than two s levels inside (0, {}] for the expansion check",
            fol.s0
        )));
    }
    let mut out = vec![];
    for &f in &fc.tau_factors {
        let tau = f / cfg.h0;
        for &theta in &fc.thetas {
            let mut series: [Vec<(f64, f64)>; 3] = Default::default();
            for &s in &ss {
                let g = fol.geometry(theta, s, tau).science("foliation geometry")?;
                let mut dk: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let d = if i == j { 1.0 / tau } else { 0.0 };
                        dk = dk.max((g.k_w[i][j] - d).abs());
                    }
                }
                series[0].push((s, (g.alpha - 1.0).abs()));
                series[1].push((s, (g.h - 1.0 / tau).abs()));
                series[2].push((s, dk));
            }
            for (name, pts) in ["alpha-1", "H-1/tau", "K-delta/tau"].iter().zip(&series) {
                let slope = loglog_slope(pts);
                out.push(ExpansionSlope {
                    quantity: name.to_string(),
                    theta,
                    tau,
                    slope,
                    pass: slope >= fc.min_slope,
                });
            }
        }
    }
    Ok(out)
}

/// Spacelikeness of the slab plus the expansions of `α`, `H` and `K`.
/// Writes `foliation_check.json` and `foliation_sweep.csv`.
pub fn foliation_check(cfg: &RunConfig) -> CliResult<FoliationCheckReport> {
    let mut fol = cfg.foliation()?;
    let slab = check_slab(cfg, &mut fol);
    let expansions = if slab.spacelike {
        expansion_slopes(cfg, &fol)?
    } else {
        vec![]
    };
    let pass = slab.spacelike && expansions.iter().all(|e| e.pass);
    let report = FoliationCheckReport {
        slab: slab.clone(),
        expansions,
        pass,
    };
    write(&cfg.out, "foliation_check.json", &to_json(&report))?;
    if slab.spacelike {
        let fc = &cfg.foliation_check;
        let ss: Vec<f64> = fc.s_levels.iter().copied().filter(|&s| s <= fol.s0).collect();
        let taus: Vec<f64> = fc.tau_factors.iter().map(|f| f / cfg.h0).collect();
        let csv = fol.sweep_csv(&fc.thetas, &ss, &taus).science("foliation sweep")?;
        write(&cfg.out, "foliation_sweep.csv", &csv)?;
    } else {
        return Err(slab_failure(&slab));
    }
    if !pass {
        let bad: Vec<String> = report
            .expansions
            .iter()
            .filter(|e| !e.pass)
            .map(|e| format!("{} at θ = {}, τ = {}: slope {:.3}", e.quantity, e.theta, e.tau, e.slope))
            .collect();
        return Err(CliError::CheckFailed(format!("expansion slopes below threshold: {}", bad.join("; "))));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarriersReport {
    pub slab: SlabCheck,
    pub grid: BarrierGrid,
    pub pair: BarrierPair,
    /// `d(∂ᵏ_sH)/dβ` at null infinity for `k = 2..=5`.
    pub obstruction: Vec<ObstructionEstimate>,
}

/// Barrier selection on the solver grid; writes `barriers.json`.
pub fn barriers(cfg: &RunConfig) -> CliResult<BarriersReport> {
    let (fol, slab) = prepared_foliation(cfg)?;
    let sc = &cfg.solver;
    let grid = BarrierGrid {
        n_theta: sc.n_theta,
        n_s: sc.n_s,
        i_min: sc.i_min(sc.stages),
        s_max: sc.s_max,
    };
    let pair = select_barriers(&fol, cfg.h0, &grid).science("barrier selection")?;
    let obstruction = (2..=5)
        .map(|k| higher_order_obstruction(&fol, cfg.h0, k, 1.0, 1.1, 2e-2))
        .collect::<Result<Vec<_>, _>>()
        .science("obstruction coefficients")?;
    let report = BarriersReport {
        slab,
        grid,
        pair,
        obstruction,
    };
    write(&cfg.out, "barriers.json", &to_json(&report))?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    /// Foliation actually used, with the resolved cut and `s₀`.
    pub foliation: Foliation,
    pub slab: SlabCheck,
    pub barriers: BarrierPair,
    pub s_max: f64,
    pub stages: Vec<StageSummary>,
    pub gaps: Vec<f64>,
    pub gaps_decreasing: bool,
    pub certificate_ok: bool,
    pub sandwich_ok: bool,
    pub diagnostics_error: Option<String>,
    pub all_claims_pass: Option<bool>,
    pub artifacts: Vec<String>,
}

pub struct SolveOutcome {
    pub manifest: Manifest,
    pub diagnostics: Option<DiagnosticsReport>,
}

/// Barriers, continuation and diagnostics. Writes `solution.csv`,
/// `manifest.json`, `diagnostics.json`, `fit_residuals.csv` and `plot.py`.
pub fn solve(cfg: &RunConfig) -> CliResult<SolveOutcome> {
    let (fol, slab) = prepared_foliation(cfg)?;
    let result = continuation_limit(&fol, cfg.h0, &cfg.solver).science("solve")?;
    let field = result.finest().field();
    let mut artifacts = vec!["solution.csv".to_string()];
    write(&cfg.out, "solution.csv", &solution_csv(field, &fol).science("solution export")?)?;

    let (diagnostics, diagnostics_error) = match DiagnosticsReport::build(&result, &fol) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(d) = &diagnostics {
        write(&cfg.out, "diagnostics.json", &to_json(d))?;
        let csv = fit_residual_csv(field, &d.fit, &result.leaf).science("fit residuals")?;
        write(&cfg.out, "fit_residuals.csv", &csv)?;
        write(&cfg.out, "plot.py", plot_script())?;
        artifacts.extend(["diagnostics.json", "fit_residuals.csv", "plot.py"].map(String::from));
    }
    artifacts.push("manifest.json".into());

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        foliation: fol,
        slab,
        barriers: result.barriers.clone(),
        s_max: result.s_max,
        stages: stage_summaries(&result),
        gaps: result.gaps.clone(),
        gaps_decreasing: result.gaps_decreasing,
        certificate_ok: result.certificate_ok,
        sandwich_ok: result.sandwich_ok(),
        diagnostics_error,
        all_claims_pass: diagnostics.as_ref().map(DiagnosticsReport::all_pass),
        artifacts,
    };
    write(&cfg.out, "manifest.json", &to_json(&manifest))?;
    if !manifest.sandwich_ok {
        let bad: Vec<String> = manifest
            .stages
            .iter()
            .filter(|s| !s.sandwich_ok)
            .map(|s| format!("stage {} (margins {:.3e}, {:.3e})", s.stage, s.sandwich_lower, s.sandwich_upper))
            .collect();
        return Err(CliError::CheckFailed(format!("sandwich violated at {}", bad.join(", "))));
    }
    Ok(SolveOutcome { manifest, diagnostics })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub run: PathBuf,
    pub claims: Vec<Claim>,
    pub fit: AsymptoticFit,
}

/// Claims of the expansion check, with the thresholds the diagnostics use.
pub fn asymptotic_claims(fit: &AsymptoticFit) -> Vec<Claim> {
    let c2 = if fit.c2_err_is_relative {
        Claim::at_most("asymptotics.c2_rel_err", fit.c2_err, 0.02)
    } else {
        Claim::at_most("asymptotics.c2_abs_err", fit.c2_err, 1e-3)
    };
    vec![
        Claim::at_most("asymptotics.c0_abs_err", fit.c0_abs_err, 1e-3),
        Claim::at_most("asymptotics.c1_rel_err", fit.c1_rel_err, 0.02),
        c2,
        Claim::at_least("asymptotics.remainder_slope", fit.remainder_slope, 2.7),
    ]
}

/// Re-fits the expansion from a previous run's `solution.csv` and
/// `manifest.json`; writes `asymptotics.json` and `fit_residuals.csv` to `out`.
pub fn asymptotics(run: &Path, out: &Path) -> CliResult<AsymptoticsReport> {
    let manifest: Manifest = from_json(&run.join("manifest.json"))?;
    let text = read(&run.join("solution.csv"))?;
    let field = field_from_solution_csv(&text).map_err(|e| CliError::Config(format!("solution.csv: {e}")))?;
    let fol = &manifest.foliation;
    let h0 = manifest.config.h0;
    let fit = fit_asymptotics(&field, fol, h0).science("asymptotic fit")?;
    let leaf = GridLeaf::new(fol, 1.0 / h0, field.n_theta).science("leaf")?;
    write(out, "fit_residuals.csv", &fit_residual_csv(&field, &fit, &leaf).science("fit residuals")?)?;
    let report = AsymptoticsReport {
        run: run.to_path_buf(),
        claims: asymptotic_claims(&fit),
        fit,
    };
    write(out, "asymptotics.json", &to_json(&report))?;
    let failed: Vec<&str> = report.claims.iter().filter(|c| !c.pass).map(|c| c.claim_id.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::CheckFailed(format!("failing claims: {}", failed.join(", "))));
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: PathBuf,
    pub mass: f64,
    pub h0: f64,
    pub cut: String,
    pub all_pass: bool,
    pub claims: Vec<Claim>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MergedReport {
    pub runs: Vec<RunSummary>,
    pub all_pass: bool,
}

/// Merges the diagnostics of several runs into `report.json` and `report.md`.
pub fn report(runs: &[PathBuf], out: &Path) -> CliResult<MergedReport> {
    if runs.is_empty() {
        return Err(CliError::Config("report needs at least one run directory".into()));
    }
    let mut summaries = vec![];
    for run in runs {
        let manifest: Manifest = from_json(&run.join("manifest.json"))?;
        let diag: DiagnosticsReport = from_json(&run.join("diagnostics.json"))?;
        summaries.push(RunSummary {
            run: run.clone(),
            mass: manifest.config.mass,
            h0: manifest.config.h0,
            cut: serde_json::to_string(&manifest.config.cut).expect("cut serialises"),
            all_pass: diag.all_pass(),
            claims: diag.claims,
        });
    }
    let merged = MergedReport {
        all_pass: summaries.iter().all(|s| s.all_pass),
        runs: summaries,
    };
    write(out, "report.json", &to_json(&merged))?;
    let mut md = String::from("| run | claim | value | threshold | pass |\n|---|---|---|---|---|\n");
    for r in &merged.runs {
        for c in &r.claims {
            let _ = writeln!(
                md,
                "| {} | {} | {:.4e} | {} {:.3e} | {} |",
                r.run.display(),
                c.claim_id,
                c.value,
                serde_json::to_value(c.comparison).expect("comparison serialises").as_str().unwrap_or("?"),
                c.threshold,
                if c.pass { "yes" } else { "NO" }
            );
        }
    }
    write(out, "report.md", &md)?;
    if !merged.all_pass {
        return Err(CliError::CheckFailed("some runs have failing claims".into()));
    }
    Ok(merged)
}
