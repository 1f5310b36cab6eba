use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{num, value_or_null, Outputs};
use log::info;
use selfsim::diagnostics::{assemble_profile, diagnose, Diagnostics, ProfileOptions, SelfSimilarProfile};
use selfsim::ground_state::{fit_kappa, mass_integral, solve_ground_state};
use selfsim::interior::build_basis;
use selfsim::matcher::{
    b_sigma, continuation_sweep, solve_match, GroundData, LawRow, MatchContext, MatchedSolution, SweepEntry,
};
use selfsim::Error;
use serde::Serialize;
use serde_json::json;
use std::path::PathBuf;

pub const LAW_COLUMNS: [&str; 18] = [
    "sigma",
    "p",
    "b",
    "b_sigma",
    "b_dev",
    "rho",
    "rho_sigma",
    "rho_dev",
    "gamma",
    "gamma_sigma",
    "theta",
    "theta_sigma",
    "residual",
    "condition",
    "iterations",
    "converged",
    "strict_box",
    "error",
];

pub const PROFILE_COLUMNS: [&str; 6] = ["r", "re_psi", "im_psi", "abs_psi", "re_p", "im_p"];

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn law_cells(r: &LawRow) -> Vec<String> {
    vec![
        num(r.sigma),
        num(r.p),
        num(r.b),
        num(r.b_sigma),
        num(r.b_dev),
        num(r.rho),
        num(r.rho_sigma),
        num(r.rho_dev),
        num(r.gamma),
        num(r.gamma_sigma),
        num(r.theta),
        num(r.theta_sigma),
        num(r.residual),
        num(r.condition),
        r.iterations.to_string(),
        r.converged.to_string(),
        r.strict_box.to_string(),
        r.error.as_deref().map(quoted).unwrap_or_default(),
    ]
}

fn profile_rows(profile: &SelfSimilarProfile) -> Vec<Vec<String>> {
    let b = profile.params.b;
    let mut rows = Vec::new();
    for (k, piece) in profile.pieces().into_iter().enumerate() {
        // r_K closes the interior; skip its repeat at the start of the exterior.
        for i in k..piece.len() {
            let psi = piece.psi(b, i);
            let p = piece.p[i];
            rows.push(vec![num(piece.r(i)), num(psi.re), num(psi.im), num(psi.norm()), num(p.re), num(p.im)]);
        }
    }
    rows
}

#[derive(Serialize)]
struct GroundStateReport {
    d: u32,
    p: f64,
    q0: f64,
    kappa: f64,
    kappa_refit: f64,
    n_c: f64,
    n_c_error: f64,
    shooting_tolerance: f64,
    equation_residual: f64,
    radius: f64,
    step: f64,
}

pub fn ground_state(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let d = cfg.require_d()?;
    let p = cfg.exponent(cfg.sigma)?;
    let gs = solve_ground_state(d, p, cfg.tol_ode)?;
    let mass = mass_integral(&gs);
    let report = GroundStateReport {
        d,
        p,
        q0: gs.q0(),
        kappa: gs.kappa,
        kappa_refit: fit_kappa(&gs)?,
        n_c: mass.value,
        n_c_error: mass.error,
        shooting_tolerance: gs.shoot_tol,
        equation_residual: gs.equation_residual(),
        radius: gs.radius(),
        step: gs.step,
    };
    info!("Q(0) = {}, κ = {}, N_c = {}", report.q0, report.kappa, report.n_c);
    let mut out = Outputs::new(cfg, "ground-state");
    let rows = gs.grid.iter().zip(&gs.q).zip(&gs.qp).map(|((r, q), qp)| vec![num(*r), num(*q), num(*qp)]);
    out.csv("ground_state.csv", &["r", "q", "dq"], rows);
    out.json("ground_state.json", &report)?;
    out.commit()
}

#[derive(Serialize)]
struct BasisReport {
    d: u32,
    p: f64,
    b: f64,
    r_k: f64,
    nodes: usize,
    kappa_a: f64,
    kappa_b: f64,
    kappa_b_identity: f64,
    wronskian_defect: f64,
}

pub fn basis(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let d = cfg.require_d()?;
    let p = cfg.exponent(cfg.sigma)?;
    let ground = GroundData::new(d, p)?;
    let b = match (cfg.b, cfg.sigma) {
        (Some(b), _) => b,
        (None, Some(s)) => b_sigma(s, ground.gs.kappa, ground.gs.n_c)?,
        (None, None) => return Err(CliError::Config("basis needs --b or --sigma".into())),
    };
    if !(b > 0.0 && b < 1.0) {
        return Err(CliError::Config(format!("b = {b} must lie in (0, 1)")));
    }
    let basis = build_basis(&ground.gs, ground.consts, b.powf(-0.5))?;
    let report = BasisReport {
        d,
        p,
        b,
        r_k: basis.r_k,
        nodes: basis.len(),
        kappa_a: ground.consts.kappa_a,
        kappa_b: ground.consts.kappa_b,
        kappa_b_identity: ground.consts.kappa_b_identity,
        wronskian_defect: basis.wronskian_defect(),
    };
    let mut out = Outputs::new(cfg, "basis");
    let rows = (0..basis.len()).map(|i| vec![num(basis.r[i]), num(basis.a.v[i]), num(basis.dec.v[i]), num(basis.b.v[i])]);
    out.csv("basis.csv", &["r", "a", "d", "b"], rows);
    out.json("basis.json", &report)?;
    out.commit()
}

#[derive(Serialize)]
struct SolveReport<'a> {
    law: LawRow,
    residual_vector: [f64; 4],
    diagnostics: &'a Diagnostics,
    /// |E| is within its error estimate or below 10⁻³ of the kinetic energy.
    energy_consistent_with_zero: bool,
}

fn solved_outputs(out: &mut Outputs, sol: &MatchedSolution, ctx: &MatchContext, density: f64) -> CliResult<Diagnostics> {
    let profile = assemble_profile(sol, ProfileOptions { density })?;
    let dg = diagnose(&profile, &ctx.ground.gs)?;
    let e = dg.energy;
    let report = SolveReport {
        law: LawRow::from_solution(sol),
        residual_vector: sol.residual,
        diagnostics: &dg,
        energy_consistent_with_zero: e.energy.abs() <= e.error.max(1e-3 * e.kinetic),
    };
    out.csv("profile.csv", &PROFILE_COLUMNS, profile_rows(&profile));
    out.json("diagnostics.json", &report)?;
    Ok(dg)
}

pub fn solve(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let d = cfg.require_d()?;
    let sigma = cfg.require_sigma()?;
    let p = cfg.exponent(Some(sigma))?;
    let ctx = MatchContext::new(GroundData::new(d, p)?, sigma, cfg.match_options())?;
    let mut out = Outputs::new(cfg, "solve");
    match solve_match(&ctx, None) {
        Ok(sol) if sol.converged => {
            solved_outputs(&mut out, &sol, &ctx, cfg.density)?;
            out.csv("law_row.csv", &LAW_COLUMNS, [law_cells(&LawRow::from_solution(&sol))]);
            out.commit()
        }
        Ok(sol) => {
            let row = LawRow::from_solution(&sol);
            out.json("best_iterate.json", &json!({ "law": row, "residual_vector": sol.residual }))?;
            out.csv("law_row.csv", &LAW_COLUMNS, [law_cells(&row)]);
            out.commit()?;
            Err(Error::NoConvergence { iterations: sol.iterations, residual: sol.residual_norm }.into())
        }
        Err(e) if !e.is_config() => {
            let guess = ctx.initial_guess();
            out.json("best_iterate.json", &json!({ "error": e.to_string(), "start": [guess.b, guess.rho, guess.gamma, guess.theta] }))?;
            out.commit()?;
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct RowDiagnostics {
    sigma: f64,
    energy: serde_json::Value,
    energy_error: serde_json::Value,
    kinetic: serde_json::Value,
    tail_amplitude: serde_json::Value,
    rho_limit: serde_json::Value,
    hdot1_distance: serde_json::Value,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0])
}

pub fn sweep(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let d = cfg.require_d()?;
    let coupling = cfg.coupling()?;
    let ladder = cfg.ladder();
    let entries: Vec<SweepEntry> = continuation_sweep(d, coupling, &ladder, cfg.match_options())?;
    let mut out = Outputs::new(cfg, "sweep");
    out.csv("law_table.csv", &LAW_COLUMNS, entries.iter().map(|e| law_cells(&e.row)));

    let mut rows = Vec::new();
    for e in &entries {
        let (Some(sol), Some(ctx)) = (&e.solution, &e.context) else { continue };
        if !sol.converged {
            continue;
        }
        let dg = if entries.len() == 1 {
            solved_outputs(&mut out, sol, ctx, cfg.density)?
        } else {
            diagnose(&assemble_profile(sol, ProfileOptions { density: cfg.density })?, &ctx.ground.gs)?
        };
        rows.push(RowDiagnostics {
            sigma: e.sigma,
            energy: value_or_null(dg.energy.energy),
            energy_error: value_or_null(dg.energy.error),
            kinetic: value_or_null(dg.energy.kinetic),
            tail_amplitude: value_or_null(dg.tail.value),
            rho_limit: value_or_null(dg.rho_limit),
            hdot1_distance: value_or_null(dg.hdot1.distance),
        });
    }
    let converged: Vec<&LawRow> = entries.iter().map(|e| &e.row).filter(|r| r.converged).collect();
    let b_dev: Vec<f64> = converged.iter().map(|r| r.b_dev.abs()).collect();
    let rho_dev: Vec<f64> = converged.iter().map(|r| r.rho_dev.abs()).collect();
    let summary = json!({
        "rows": entries.len(),
        "converged": converged.len(),
        "b_dev_strictly_decreasing": strictly_decreasing(&b_dev),
        "rho_dev_decreasing": strictly_decreasing(&rho_dev),
        "final_b_dev": b_dev.last().copied().map(value_or_null),
        "final_rho_dev": rho_dev.last().copied().map(value_or_null),
        "diagnostics": rows,
    });
    out.json("sweep_summary.json", &summary)?;
    let written = out.commit()?;
    if converged.is_empty() {
        Err(CliError::NothingConverged)
    } else {
        Ok(written)
    }
}
