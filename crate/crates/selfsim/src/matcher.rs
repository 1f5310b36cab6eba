//! Four-parameter matching of interior and exterior solutions at r_K.
//!
//! Unknowns are (b, ρ, γ, θ). The residual compares P_int with e^{i(θ+θ_ext)} P_ext
//! in value and derivative, where θ_ext is the phase of the decaying component
//! of P_ext at r_K, so θ itself stays on its small natural scale. Real and
//! imaginary parts are divided by their leading-order sizes, which keeps the
//! Jacobian well conditioned although the raw entries span e^{±π/(2b)}.

use crate::error::{Error, Result};
use crate::exterior::{integrate_exterior, ExteriorOptions, ExteriorParams, ExteriorTrajectory, RegionLayout};
use crate::ground_state::{mass_integral, solve_ground_state, GroundState};
use crate::interior::{
    basis_constants, build_basis, picard_interior, BasisConstants, InteriorParams, InteriorSolution, LinearizedBasis,
    PicardOptions,
};
use log::{debug, info, warn};
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

pub const SIGMA_MAX: f64 = 0.05;
/// Below this S_Im/S_Re the imaginary part drowns in double-precision rounding.
pub const SCALE_FLOOR: f64 = 1e-13;
const FD_STEP: f64 = 1e-6;

/// How the nonlinearity exponent follows σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Coupling {
    /// p held fixed.
    Fixed(f64),
    /// p = 1 + 4/(d − 2σ), so that σ is the critical Sobolev exponent s_c.
    Critical,
}

impl Coupling {
    pub fn exponent(self, d: u32, sigma: f64) -> f64 {
        match self {
            Coupling::Fixed(p) => p,
            Coupling::Critical => critical_exponent(d, sigma),
        }
    }
}

pub fn critical_exponent(d: u32, sigma: f64) -> f64 {
    1.0 + 4.0 / (d as f64 - 2.0 * sigma)
}

/// Small root of σ = (κ²/N_c) b^{−1} e^{−π/b}.
pub fn b_sigma(sigma: f64, kappa: f64, n_c: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma <= SIGMA_MAX) {
        return Err(Error::Domain(format!("σ = {sigma} outside (0, {SIGMA_MAX}]")));
    }
    if !(kappa > 0.0 && n_c > 0.0) {
        return Err(Error::Config(format!("κ = {kappa} and N_c = {n_c} must be positive")));
    }
    let c = (kappa * kappa / n_c).ln();
    let g = |b: f64| b.ln() + PI / b + sigma.ln() - c;
    // g decreases on (0, π); a root below π needs g(π) < 0.
    let (mut lo, mut hi) = (1e-3, PI);
    if !(g(hi) < 0.0 && g(lo) > 0.0) {
        return Err(Error::Domain(format!("no small root of the eigenvalue law for σ = {sigma}")));
    }
    let mut b = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gb = g(b);
        if gb > 0.0 {
            lo = b;
        } else {
            hi = b;
        }
        let step = gb / (1.0 / b - PI / (b * b));
        if step.abs() <= 1e-16 * b || hi - lo <= 2.0 * f64::EPSILON * b {
            return Ok(b - step);
        }
        let next = b - step;
        b = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    Ok(b)
}

/// σ(b) = (κ²/N_c) b^{−1} e^{−π/b}.
pub fn sigma_law(b: f64, kappa: f64, n_c: f64) -> f64 {
    kappa * kappa / n_c / b * (-PI / b).exp()
}

/// ρ = √2 κ b^{−1/2} e^{−π/(2b)}.
pub fn rho_law(b: f64, kappa: f64) -> f64 {
    2f64.sqrt() * kappa / b.sqrt() * (-PI / (2.0 * b)).exp()
}

/// Natural sizes of the four unknowns at a given σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaScales {
    pub sigma: f64,
    pub b_sigma: f64,
    pub rho_sigma: f64,
    pub gamma_sigma: f64,
    pub theta_sigma: f64,
    /// Half width of the b box, b_σ^{13/6}/2.
    pub b_half: f64,
}

impl SigmaScales {
    pub fn new(sigma: f64, kappa: f64, n_c: f64) -> Result<Self> {
        let b = b_sigma(sigma, kappa, n_c)?;
        let root = b.sqrt();
        Ok(Self {
            sigma,
            b_sigma: b,
            rho_sigma: (2.0 * n_c * sigma).sqrt(),
            gamma_sigma: b.powf(1.0 / 6.0) * (-2.0 / root).exp(),
            theta_sigma: b.powf(1.0 / 6.0) * (-PI / b + 2.0 / root).exp(),
            b_half: 0.5 * b.powf(13.0 / 6.0),
        })
    }

    /// Box bounds for (b, ρ, γ, θ), widened by `relax` about their centres.
    pub fn bounds(&self, relax: f64) -> [(f64, f64); 4] {
        let rho_lo = (self.rho_sigma * (1.0 - 0.5 * relax)).max(1e-3 * self.rho_sigma);
        [
            (self.b_sigma - relax * self.b_half, self.b_sigma + relax * self.b_half),
            (rho_lo, self.rho_sigma * (1.0 + 0.5 * relax)),
            (-0.5 * relax * self.gamma_sigma, 0.5 * relax * self.gamma_sigma),
            (-0.5 * relax * self.theta_sigma, 0.5 * relax * self.theta_sigma),
        ]
    }

    fn to_unit(&self, m: &MatchParams) -> Vector4<f64> {
        Vector4::new(
            (m.b - self.b_sigma) / self.b_half,
            (m.rho - self.rho_sigma) / self.rho_sigma,
            m.gamma / self.gamma_sigma,
            m.theta / self.theta_sigma,
        )
    }

    fn from_unit(&self, x: &Vector4<f64>) -> MatchParams {
        MatchParams {
            b: self.b_sigma + x[0] * self.b_half,
            rho: self.rho_sigma * (1.0 + x[1]),
            gamma: x[2] * self.gamma_sigma,
            theta: x[3] * self.theta_sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchParams {
    pub b: f64,
    pub rho: f64,
    pub gamma: f64,
    pub theta: f64,
}

impl MatchParams {
    fn values(&self) -> [f64; 4] {
        [self.b, self.rho, self.gamma, self.theta]
    }

    /// Index of the first parameter outside `bounds`, if any.
    pub fn outside(&self, bounds: &[(f64, f64); 4]) -> Option<usize> {
        self.values().iter().zip(bounds).position(|(v, (lo, hi))| !(v >= lo && v <= hi))
    }
}

const NAMES: [&str; 4] = ["b", "rho", "gamma", "theta"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOptions {
    pub tol_ode: f64,
    pub tol_newton: f64,
    pub max_iter: usize,
    pub box_relax: f64,
    pub r_far: Option<f64>,
    pub jobs: usize,
    pub picard: PicardOptions,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self {
            tol_ode: crate::exterior::DEFAULT_TOL,
            tol_newton: 1e-8,
            max_iter: 30,
            box_relax: 10.0,
            r_far: None,
            jobs: 1,
            picard: PicardOptions::default(),
        }
    }
}

impl MatchOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_ode > 0.0 && self.tol_newton > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.box_relax >= 1.0) {
            return Err(Error::Config(format!("box relaxation {} must be at least 1", self.box_relax)));
        }
        if self.max_iter == 0 || self.jobs == 0 {
            return Err(Error::Config("iteration cap and job count must be positive".into()));
        }
        Ok(())
    }
}

/// Ground state with its derived constants for one (d, p).
#[derive(Debug, Clone, PartialEq)]
pub struct GroundData {
    pub gs: GroundState,
    pub consts: BasisConstants,
}

impl GroundData {
    pub fn new(d: u32, p: f64) -> Result<Self> {
        let gs = solve_ground_state(d, p, 1e-12)?;
        let consts = basis_constants(&gs)?;
        debug!(
            "ground state d = {d}, p = {p}: κ = {:.12}, N_c = {:.12} (± {:.1e}), κ_A = {:.6}, κ_B = {:.12}",
            gs.kappa,
            gs.n_c,
            mass_integral(&gs).error,
            consts.kappa_a,
            consts.kappa_b
        );
        Ok(Self { gs, consts })
    }
}

/// Everything the residual needs at one σ.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchContext {
    pub d: u32,
    pub p: f64,
    pub sigma: f64,
    pub ground: GroundData,
    pub scales: SigmaScales,
    pub opts: MatchOptions,
}

impl MatchContext {
    pub fn new(ground: GroundData, sigma: f64, opts: MatchOptions) -> Result<Self> {
        opts.validate()?;
        let scales = SigmaScales::new(sigma, ground.gs.kappa, ground.gs.n_c)?;
        let ctx = Self { d: ground.gs.d, p: ground.gs.p, sigma, ground, scales, opts };
        let b = scales.b_sigma;
        let (s_re, s_im) = ctx.normalisation(b);
        if s_im / s_re < SCALE_FLOOR {
            return Err(Error::Domain(format!(
                "σ = {sigma} is below the resolvable floor: S_Im/S_Re = {:.2e} < {SCALE_FLOOR:e}",
                s_im / s_re
            )));
        }
        Ok(ctx)
    }

    /// (S_Re, S_Im) = (κ b^{(d−1)/4} e^{−1/√b}, κ_B σ b^{1+(d−1)/4} e^{1/√b}).
    pub fn normalisation(&self, b: f64) -> (f64, f64) {
        let m = (self.d as f64 - 1.0) / 4.0;
        let e = (1.0 / b.sqrt()).exp();
        (
            self.ground.gs.kappa * b.powf(m) / e,
            self.ground.consts.kappa_b * self.sigma * b.powf(1.0 + m) * e,
        )
    }

    pub fn initial_guess(&self) -> MatchParams {
        MatchParams { b: self.scales.b_sigma, rho: self.scales.rho_sigma, gamma: 0.0, theta: 0.0 }
    }
}

/// One residual evaluation with the pieces it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub params: MatchParams,
    pub residual: [f64; 4],
    pub theta_ext: f64,
    pub s_re: f64,
    pub s_im: f64,
    pub basis: LinearizedBasis,
    pub interior: InteriorSolution,
    pub exterior: ExteriorTrajectory,
}

impl Evaluation {
    pub fn norm(&self) -> f64 {
        self.residual.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Total rotation applied to the exterior solution.
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.params.theta + self.theta_ext)
    }
}

/// Phase of the decaying component of the exterior solution at r_K:
/// −arg(P(1 − (d−1)/(2r)) − P′).
pub fn exterior_phase(d: u32, r: f64, p: Complex64, pd: Complex64) -> f64 {
    -(p * (1.0 - (d as f64 - 1.0) / (2.0 * r)) - pd).arg()
}

pub fn evaluate(ctx: &MatchContext, params: MatchParams) -> Result<Evaluation> {
    evaluate_with_tol(ctx, params, ctx.opts.tol_ode)
}

fn evaluate_with_tol(ctx: &MatchContext, params: MatchParams, tol_ode: f64) -> Result<Evaluation> {
    let MatchParams { b, rho, gamma, theta } = params;
    if !(b > 0.0 && b < 1.0 && rho > 0.0 && gamma.is_finite() && theta.is_finite()) {
        return Err(Error::Config(format!("parameters outside the admissible region: {params:?}")));
    }
    let layout = RegionLayout::new(b, ctx.opts.r_far)?;
    let basis = build_basis(&ctx.ground.gs, ctx.ground.consts, layout.r_k)?;
    let interior = picard_interior(&basis, InteriorParams { b, sigma: ctx.sigma, gamma }, ctx.opts.picard)?;
    let ext_params = ExteriorParams { d: ctx.d, p: ctx.p, b, sigma: ctx.sigma, rho, nonlinear: true };
    let exterior =
        integrate_exterior(&ext_params, &layout, &ExteriorOptions { tol: tol_ode, ..Default::default() }, &[])?;
    let pe = exterior.boundary;
    let pi = interior.boundary();
    let theta_ext = exterior_phase(ctx.d, layout.r_k, pe.p, pe.pd);
    let rot = Complex64::from_polar(1.0, theta + theta_ext);
    let dv = pi.p - rot * pe.p;
    let dd = pi.pd - rot * pe.pd;
    let (s_re, s_im) = ctx.normalisation(b);
    Ok(Evaluation {
        params,
        residual: [dv.re / s_re, dd.re / s_re, dv.im / s_im, dd.im / s_im],
        theta_ext,
        s_re,
        s_im,
        basis,
        interior,
        exterior,
    })
}

/// Normalised 4-vector [Re ΔP, Re ΔP′]/S_Re, [Im ΔP, Im ΔP′]/S_Im.
pub fn match_residual(ctx: &MatchContext, params: MatchParams) -> Result<[f64; 4]> {
    Ok(evaluate(ctx, params)?.residual)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedSolution {
    pub d: u32,
    pub p: f64,
    pub sigma: f64,
    pub params: MatchParams,
    pub scales: SigmaScales,
    pub residual: [f64; 4],
    pub residual_norm: f64,
    pub condition: f64,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<String>,
    /// All four parameters inside the unrelaxed boxes.
    pub strict_box: bool,
    pub evaluation: Evaluation,
}

fn vec4(r: &[f64; 4]) -> Vector4<f64> {
    Vector4::new(r[0], r[1], r[2], r[3])
}

fn try_eval(ctx: &MatchContext, scales: &SigmaScales, x: &Vector4<f64>) -> Option<Vector4<f64>> {
    match evaluate(ctx, scales.from_unit(x)) {
        Ok(e) => Some(vec4(&e.residual)),
        Err(err) => {
            debug!("residual evaluation failed at {:?}: {err}", scales.from_unit(x));
            None
        }
    }
}

/// Central-difference Jacobian in unit coordinates; columns may run on `jobs` threads.
fn jacobian(ctx: &MatchContext, x: &Vector4<f64>, f0: &Vector4<f64>) -> Result<Matrix4<f64>> {
    let scales = ctx.scales;
    let column = |j: usize| -> Result<Vector4<f64>> {
        let mut plus = *x;
        let mut minus = *x;
        plus[j] += FD_STEP;
        minus[j] -= FD_STEP;
        match (try_eval(ctx, &scales, &plus), try_eval(ctx, &scales, &minus)) {
            (Some(a), Some(b)) => Ok((a - b) / (2.0 * FD_STEP)),
            (Some(a), None) => Ok((a - f0) / FD_STEP),
            (None, Some(b)) => Ok((f0 - b) / FD_STEP),
            (None, None) => Err(Error::Numerical(format!("Jacobian column {} could not be evaluated", NAMES[j]))),
        }
    };
    let cols: Vec<Result<Vector4<f64>>> = if ctx.opts.jobs > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..4).map(|j| s.spawn(move || column(j))).collect();
            handles.into_iter().map(|h| h.join().expect("Jacobian worker panicked")).collect()
        })
    } else {
        (0..4).map(column).collect()
    };
    let mut jac = Matrix4::zeros();
    for (j, c) in cols.into_iter().enumerate() {
        jac.set_column(j, &c?);
    }
    Ok(jac)
}

fn condition_number(jac: &Matrix4<f64>) -> f64 {
    let sv = jac.singular_values();
    let max = sv.iter().fold(0.0, |m: f64, v| m.max(*v));
    let min = sv.iter().fold(f64::INFINITY, |m: f64, v| m.min(*v));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn wrap_angle(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Damped Newton from `start` (default: the leading-order guess).
pub fn solve_match(ctx: &MatchContext, start: Option<MatchParams>) -> Result<MatchedSolution> {
    let scales = ctx.scales;
    let relaxed = scales.bounds(ctx.opts.box_relax);
    let mut params = start.unwrap_or_else(|| ctx.initial_guess());
    params.theta = wrap_angle(params.theta);
    if let Some(i) = params.outside(&relaxed) {
        return Err(Error::OutOfBox { parameter: NAMES[i], value: params.values()[i], lo: relaxed[i].0, hi: relaxed[i].1 });
    }
    let mut x = scales.to_unit(&params);
    let mut eval = evaluate(ctx, params)?;
    let mut f = vec4(&eval.residual);
    let mut condition = f64::NAN;
    let mut iterations = 0;
    let mut failure = None;

    while eval.norm() > ctx.opts.tol_newton {
        if iterations == ctx.opts.max_iter {
            failure = Some(Error::NoConvergence { iterations, residual: eval.norm() }.to_string());
            break;
        }
        iterations += 1;
        let jac = jacobian(ctx, &x, &f)?;
        condition = condition_number(&jac);
        let Some(dx) = jac.lu().solve(&(-f)) else {
            failure = Some("singular Jacobian".to_string());
            break;
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        let mut box_exit = None;
        for _ in 0..12 {
            let xt = x + dx * lambda;
            let trial = scales.from_unit(&xt);
            if let Some(i) = trial.outside(&relaxed) {
                box_exit = Some(Error::OutOfBox {
                    parameter: NAMES[i],
                    value: trial.values()[i],
                    lo: relaxed[i].0,
                    hi: relaxed[i].1,
                });
                lambda *= 0.5;
                continue;
            }
            match evaluate(ctx, trial) {
                Ok(e) if vec4(&e.residual).norm() < (1.0 - 1e-4 * lambda) * f.norm() => {
                    accepted = Some((xt, e));
                    break;
                }
                Ok(_) => {}
                Err(err) => debug!("trial step failed: {err}"),
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, e)) => {
                info!(
                    "σ = {:.3e} Newton {iterations}: |F| = {:.3e}, λ = {lambda}, cond = {condition:.2e}",
                    ctx.sigma,
                    e.norm()
                );
                x = xt;
                f = vec4(&e.residual);
                eval = e;
            }
            None => {
                let why = box_exit.map(|e| e.to_string()).unwrap_or_else(|| "line search stalled".to_string());
                warn!("σ = {:.3e}: {why}", ctx.sigma);
                failure = Some(why);
                break;
            }
        }
    }
    if condition.is_nan() {
        condition = condition_number(&jacobian(ctx, &x, &f)?);
    }
    let mut params = eval.params;
    params.theta = wrap_angle(params.theta);
    let strict = params.outside(&scales.bounds(1.0)).is_none();
    Ok(MatchedSolution {
        d: ctx.d,
        p: ctx.p,
        sigma: ctx.sigma,
        params,
        scales,
        residual: eval.residual,
        residual_norm: eval.norm(),
        condition,
        iterations,
        converged: failure.is_none(),
        failure,
        strict_box: strict,
        evaluation: eval,
    })
}

/// Residual of a solution recomputed with the ODE tolerance divided by `factor`.
pub fn recheck(ctx: &MatchContext, sol: &MatchedSolution, factor: f64) -> Result<[f64; 4]> {
    Ok(evaluate_with_tol(ctx, sol.params, ctx.opts.tol_ode / factor)?.residual)
}

/// One row of the eigenvalue-law table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawRow {
    pub sigma: f64,
    pub p: f64,
    pub b: f64,
    pub b_sigma: f64,
    pub b_dev: f64,
    pub rho: f64,
    pub rho_sigma: f64,
    pub rho_dev: f64,
    pub gamma: f64,
    pub gamma_sigma: f64,
    pub theta: f64,
    pub theta_sigma: f64,
    pub residual: f64,
    pub condition: f64,
    pub iterations: usize,
    pub converged: bool,
    pub strict_box: bool,
    pub error: Option<String>,
}

impl LawRow {
    pub fn from_solution(s: &MatchedSolution) -> Self {
        let m = s.params;
        let sc = s.scales;
        Self {
            sigma: s.sigma,
            p: s.p,
            b: m.b,
            b_sigma: sc.b_sigma,
            b_dev: m.b / sc.b_sigma - 1.0,
            rho: m.rho,
            rho_sigma: sc.rho_sigma,
            rho_dev: m.rho / sc.rho_sigma - 1.0,
            gamma: m.gamma,
            gamma_sigma: sc.gamma_sigma,
            theta: m.theta,
            theta_sigma: sc.theta_sigma,
            residual: s.residual_norm,
            condition: s.condition,
            iterations: s.iterations,
            converged: s.converged,
            strict_box: s.strict_box,
            error: s.failure.clone(),
        }
    }

    pub fn failed(sigma: f64, p: f64, err: &Error) -> Self {
        let nan = f64::NAN;
        Self {
            sigma,
            p,
            b: nan,
            b_sigma: nan,
            b_dev: nan,
            rho: nan,
            rho_sigma: nan,
            rho_dev: nan,
            gamma: nan,
            gamma_sigma: nan,
            theta: nan,
            theta_sigma: nan,
            residual: nan,
            condition: nan,
            iterations: 0,
            converged: false,
            strict_box: false,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub sigma: f64,
    pub p: f64,
    pub row: LawRow,
    pub solution: Option<MatchedSolution>,
    pub context: Option<MatchContext>,
}

/// Solves along a descending σ list, warm-starting each point from the previous
/// solution's position relative to its scales and falling back to the
/// leading-order guess when that fails.
pub fn continuation_sweep(d: u32, coupling: Coupling, sigmas: &[f64], opts: MatchOptions) -> Result<Vec<SweepEntry>> {
    opts.validate()?;
    if sigmas.is_empty() {
        return Err(Error::Config("empty σ list".into()));
    }
    if sigmas.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Config("σ list must be strictly descending".into()));
    }
    let mut fixed_ground: Option<GroundData> = None;
    let mut prev_unit: Option<Vector4<f64>> = None;
    let mut out = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let p = coupling.exponent(d, sigma);
        let ground = match (coupling, &fixed_ground) {
            (Coupling::Fixed(_), Some(g)) => Ok(g.clone()),
            _ => GroundData::new(d, p),
        };
        let ctx = ground.and_then(|g| {
            if matches!(coupling, Coupling::Fixed(_)) {
                fixed_ground = Some(g.clone());
            }
            MatchContext::new(g, sigma, opts)
        });
        let ctx = match ctx {
            Ok(c) => c,
            Err(e) if e.is_config() => return Err(e),
            Err(e) => {
                warn!("σ = {sigma}: {e}");
                out.push(SweepEntry { sigma, p, row: LawRow::failed(sigma, p, &e), solution: None, context: None });
                continue;
            }
        };
        let warm = prev_unit.map(|x| ctx.scales.from_unit(&x));
        let mut result = solve_match(&ctx, warm);
        let retry = match &result {
            Ok(s) => !s.converged && warm.is_some(),
            Err(_) => warm.is_some(),
        };
        if retry {
            info!("σ = {sigma}: warm start failed, retrying from the leading-order guess");
            result = solve_match(&ctx, None);
        }
        match result {
            Ok(sol) => {
                if sol.converged {
                    prev_unit = Some(ctx.scales.to_unit(&sol.params));
                }
                out.push(SweepEntry { sigma, p, row: LawRow::from_solution(&sol), solution: Some(sol), context: Some(ctx) });
            }
            Err(e) => {
                warn!("σ = {sigma}: {e}");
                out.push(SweepEntry { sigma, p, row: LawRow::failed(sigma, p, &e), solution: None, context: Some(ctx) });
            }
        }
    }
    Ok(out)
}
