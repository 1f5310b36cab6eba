//! The physical profile Ψ = e^{−ibr²/4}P assembled from a matched solution,
//! and the checks run on it: energy, distance to the ground state, the
//! outgoing tail amplitude and the residual of the profile equation.
//!
//! Every diagnostic comes with an error estimate. Tail corrections past R_far
//! use the matched ρ and σ.

use crate::error::{Error, Result};
use crate::exterior::{integrate_exterior, ExteriorOptions};
use crate::ground_state::{Estimate, GroundState};
use crate::matcher::MatchedSolution;
use crate::quad::{self, UniformGrid};
use num_complex::Complex64;
use serde::Serialize;

/// Default exterior sampling step; `ProfileOptions::density` divides it.
const EXTERIOR_STEP: f64 = 0.01;
/// Geometric ladder for the tail extrapolation, as fractions of R_far.
const TAIL_LADDER: [f64; 3] = [0.64, 0.8, 1.0];
const TAIL_SPREAD_LIMIT: f64 = 0.05;
const TAIL_SHARE_LIMIT: f64 = 0.1;
const HALF_STENCIL: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Exterior samples per 0.01 in r.
    pub density: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { density: 1.0 }
    }
}

/// Scalars that fix the profile equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileParams {
    pub d: u32,
    pub p: f64,
    pub sigma: f64,
    pub b: f64,
    pub rho: f64,
}

/// One uniform piece of the composite grid with P and P′ on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub grid: UniformGrid,
    pub p: Vec<Complex64>,
    pub pd: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarProfile {
    pub params: ProfileParams,
    /// Uniform on [0, r_K].
    pub interior: Piece,
    /// Uniform on [r_K, R_far].
    pub exterior: Piece,
    /// Interior minus exterior at r_K, normalised like the matching residual.
    /// Zero when the profile was not built from a matched solve.
    pub junction: [f64; 4],
}

/// |S^{d−1}|.
pub fn sphere_measure(d: u32) -> f64 {
    use std::f64::consts::PI;
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (d as f64 - 2.0) * sphere_measure(d - 2),
    }
}

fn gauge(b: f64, r: f64) -> Complex64 {
    Complex64::from_polar(1.0, -b * r * r / 4.0)
}

impl Piece {
    pub fn r(&self, i: usize) -> f64 {
        self.grid.x(i)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn psi(&self, b: f64, i: usize) -> Complex64 {
        gauge(b, self.r(i)) * self.p[i]
    }

    /// Ψ′ = e^{−ibr²/4}(P′ − ibr/2 P).
    pub fn dpsi(&self, b: f64, i: usize) -> Complex64 {
        let r = self.r(i);
        gauge(b, r) * (self.pd[i] - Complex64::new(0.0, b * r / 2.0) * self.p[i])
    }

    fn check(&self, what: &str) -> Result<()> {
        if self.p.len() != self.grid.len() || self.pd.len() != self.grid.len() {
            return Err(Error::Config(format!("{what} samples do not match their grid")));
        }
        if self.grid.n < 12 {
            return Err(Error::Config(format!("{what} grid needs at least 12 intervals")));
        }
        Ok(())
    }
}

impl SelfSimilarProfile {
    pub fn from_parts(params: ProfileParams, interior: Piece, exterior: Piece) -> Result<Self> {
        interior.check("interior")?;
        exterior.check("exterior")?;
        if interior.grid.x0 != 0.0 || (interior.grid.end() - exterior.grid.x0).abs() > 1e-12 * exterior.grid.x0 {
            return Err(Error::Config("interior must span [0, r_K] and the exterior start at r_K".into()));
        }
        Ok(Self { params, interior, exterior, junction: [0.0; 4] })
    }

    pub fn r_k(&self) -> f64 {
        self.exterior.grid.x0
    }

    pub fn r_far(&self) -> f64 {
        self.exterior.grid.end()
    }

    /// Both pieces, r_K listed twice.
    pub fn pieces(&self) -> [&Piece; 2] {
        [&self.interior, &self.exterior]
    }

    /// The same profile multiplied by e^{iα}.
    pub fn rotated(&self, alpha: f64) -> Self {
        let w = Complex64::from_polar(1.0, alpha);
        let turn = |piece: &Piece| Piece {
            grid: piece.grid,
            p: piece.p.iter().map(|z| z * w).collect(),
            pd: piece.pd.iter().map(|z| z * w).collect(),
        };
        Self { interior: turn(&self.interior), exterior: turn(&self.exterior), ..self.clone() }
    }

    /// Largest relative P and P′ mismatch at r_K.
    pub fn junction_norm(&self) -> f64 {
        self.junction.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// ∫ f(r, Ψ, Ψ′) r^{d−1} dr over [0, R_far] with a quadrature error estimate.
    fn radial_integral<F: Fn(f64, Complex64, Complex64) -> f64>(&self, f: F) -> (f64, f64) {
        let (b, d) = (self.params.b, self.params.d as i32);
        let mut value = 0.0;
        let mut error = 0.0;
        for piece in self.pieces() {
            let vals: Vec<f64> =
                (0..piece.len()).map(|i| f(piece.r(i), piece.psi(b, i), piece.dpsi(b, i)) * piece.r(i).powi(d - 1)).collect();
            let (v, e) = quad::integrate_with_error(&piece.grid, &vals);
            value += v;
            error += e;
        }
        (value, error + 8.0 * f64::EPSILON * value.abs())
    }
}

/// Interior Picard solution plus the phase-rotated exterior solution re-integrated
/// onto a uniform grid, with Ψ = e^{−ibr²/4}P.
pub fn assemble_profile(ms: &MatchedSolution, opts: ProfileOptions) -> Result<SelfSimilarProfile> {
    if !ms.converged {
        return Err(Error::Config("profile needs a converged matched solution".into()));
    }
    if !(opts.density > 0.0 && opts.density.is_finite()) {
        return Err(Error::Config(format!("sampling density {} must be positive", opts.density)));
    }
    let eval = &ms.evaluation;
    let int = &eval.interior;
    let n_int = int.r.len() - 1;
    let interior = Piece {
        grid: UniformGrid::new(0.0, int.r[n_int], n_int),
        p: int.psi.clone(),
        pd: int.dpsi.clone(),
    };

    let layout = eval.exterior.layout;
    let span = layout.r_far - layout.r_k;
    let mut n_ext = (span / (EXTERIOR_STEP / opts.density)).ceil() as usize;
    n_ext += n_ext % 2;
    let grid = UniformGrid::new(layout.r_k, layout.r_far, n_ext);
    let nodes = grid.nodes();
    let ext_opts = ExteriorOptions { tol: eval.exterior.tol, ..Default::default() };
    let traj = integrate_exterior(&eval.exterior.params, &layout, &ext_opts, &nodes[1..n_ext])?;
    let rot = eval.rotation();
    let mut p = Vec::with_capacity(nodes.len());
    let mut pd = Vec::with_capacity(nodes.len());
    for r in &nodes {
        let s = traj.state_at(*r)?;
        p.push(rot * s.p);
        pd.push(rot * s.pd);
    }
    let exterior = Piece { grid, p, pd };

    let params = ProfileParams { d: ms.d, p: ms.p, sigma: ms.sigma, b: ms.params.b, rho: ms.params.rho };
    let mut profile = SelfSimilarProfile::from_parts(params, interior, exterior)?;
    let dv = profile.interior.p[n_int] - profile.exterior.p[0];
    let dd = profile.interior.pd[n_int] - profile.exterior.pd[0];
    profile.junction = [dv.re / eval.s_re, dd.re / eval.s_re, dv.im / eval.s_im, dd.im / eval.s_im];
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub energy: f64,
    /// ½‖∇Ψ‖², tail included.
    pub kinetic: f64,
    /// ‖Ψ‖_{p+1}^{p+1}/(p+1), tail included.
    pub potential: f64,
    pub quadrature_error: f64,
    /// Contributions of r > R_far to the kinetic and potential parts.
    pub tail_kinetic: f64,
    pub tail_potential: f64,
    pub tail_error: f64,
    /// Total error estimate for `energy`.
    pub error: f64,
    /// The tail estimate is above 10% of the kinetic energy.
    pub inconclusive: bool,
}

/// Decay exponent α in |Ψ| ~ ρ r^{−α}.
fn tail_exponent(params: &ProfileParams) -> f64 {
    params.d as f64 / 2.0 - params.sigma
}

/// E(Ψ) = ½‖∇Ψ‖² − ‖Ψ‖_{p+1}^{p+1}/(p+1) on ℝ^d.
///
/// Past R_far, |Ψ| ≈ ρ r^{−α} and r|Ψ′| ≈ |i/b + α| |Ψ| with α = d/2 − σ. The
/// tail error is the gap between that model and the same power laws scaled to
/// the computed values at R_far, plus a relative O((bR)⁻²) allowance.
pub fn energy(profile: &SelfSimilarProfile) -> Result<EnergyEstimate> {
    let pr = profile.params;
    let q = pr.p + 1.0;
    let (kin, kin_err) = profile.radial_integral(|_, _, dpsi| 0.5 * dpsi.norm_sqr());
    let (pot, pot_err) = profile.radial_integral(|_, psi, _| psi.norm().powf(q) / q);

    let alpha = tail_exponent(&pr);
    let d = pr.d as f64;
    let pot_power = d - alpha * q;
    let kin_power = 2.0 * pr.sigma - 2.0;
    if !(pot_power < 0.0 && kin_power < 0.0) {
        return Err(Error::Domain(format!("energy diverges at infinity for α = {alpha}, p = {}", pr.p)));
    }
    let r = profile.r_far();
    let last = profile.exterior.len() - 1;
    let (b, rho) = (pr.b, pr.rho);
    let amp_meas = r.powf(alpha) * profile.exterior.p[last].norm();
    let slope_meas = r.powf(alpha + 1.0) * profile.exterior.dpsi(b, last).norm();
    let tail_pot = |a: f64| a.powf(q) * r.powf(pot_power) / (-pot_power) / q;
    let tail_kin = |c: f64| 0.5 * c * c * r.powf(kin_power) / (-kin_power);
    // Without a matched tail (ρ = 0 or b = 0) only the computed values at R_far remain.
    let (tk, tp, allowance) = if rho > 0.0 && b > 0.0 {
        let slope_model = rho * (b.powi(-2) + alpha * alpha).sqrt();
        (tail_kin(slope_model), tail_pot(rho), (b * r).powi(-2))
    } else {
        (0.0, 0.0, 0.0)
    };
    let tail_error = (tk - tail_kin(slope_meas)).abs()
        + (tp - tail_pot(amp_meas)).abs()
        + allowance * (tk.abs() + tp.abs());

    let s = sphere_measure(pr.d);
    let kinetic = s * (kin + tk);
    let potential = s * (pot + tp);
    let quadrature_error = s * (kin_err + pot_err);
    let tail_error = s * tail_error;
    Ok(EnergyEstimate {
        energy: kinetic - potential,
        kinetic,
        potential,
        quadrature_error,
        tail_kinetic: s * tk,
        tail_potential: s * tp,
        tail_error,
        error: quadrature_error + tail_error,
        inconclusive: tail_error > TAIL_SHARE_LIMIT * kinetic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hdot1Distance {
    /// min_α ‖e^{iα}Ψ − Q‖_{Ḣ¹}.
    pub distance: f64,
    /// Same with the integral stopped at r_K.
    pub interior: f64,
    /// Phase that attains the minimum.
    pub phase: f64,
    pub error: f64,
}

/// Ḣ¹ distance from Ψ to the phase orbit of Q, so that it does not depend on
/// the global phase of Ψ. Q′ past the tabulated range comes from its linear
/// tail; past R_far only |Ψ′| contributes.
pub fn hdot1_distance(profile: &SelfSimilarProfile, gs: &GroundState) -> Result<Hdot1Distance> {
    let pr = profile.params;
    if gs.d != pr.d || (gs.p - pr.p).abs() > 1e-12 * pr.p {
        return Err(Error::Config(format!(
            "ground state is for (d, p) = ({}, {}), profile for ({}, {})",
            gs.d, gs.p, pr.d, pr.p
        )));
    }
    let (b, d) = (pr.b, pr.d as i32);
    let mut overlap = Complex64::default();
    for piece in profile.pieces() {
        let re: Vec<f64> =
            (0..piece.len()).map(|i| (piece.dpsi(b, i) * gs.eval(piece.r(i)).1).re * piece.r(i).powi(d - 1)).collect();
        let im: Vec<f64> =
            (0..piece.len()).map(|i| (piece.dpsi(b, i) * gs.eval(piece.r(i)).1).im * piece.r(i).powi(d - 1)).collect();
        overlap += Complex64::new(quad::integrate(&piece.grid, &re), quad::integrate(&piece.grid, &im));
    }
    let phase = if overlap.norm() > 0.0 { -overlap.arg() } else { 0.0 };
    let w = Complex64::from_polar(1.0, phase);
    let sq = |piece: &Piece| -> (f64, f64) {
        let f: Vec<f64> = (0..piece.len())
            .map(|i| (w * piece.dpsi(b, i) - gs.eval(piece.r(i)).1).norm_sqr() * piece.r(i).powi(d - 1))
            .collect();
        quad::integrate_with_error(&piece.grid, &f)
    };
    let (inner, inner_err) = sq(&profile.interior);
    let (outer, outer_err) = sq(&profile.exterior);
    let tail = energy(profile)?;
    let s = sphere_measure(pr.d);
    // The kinetic tail is ½∫|Ψ′|²; Q′ is negligible out there.
    let total = s * (inner + outer) + 2.0 * tail.tail_kinetic;
    let total_err = s * (inner_err + outer_err) + 2.0 * tail.tail_error;
    let distance = total.max(0.0).sqrt();
    Ok(Hdot1Distance {
        distance,
        interior: (s * inner).max(0.0).sqrt(),
        phase,
        error: if distance > 0.0 { total_err / (2.0 * distance) } else { total_err.sqrt() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailAmplitude {
    /// Extrapolated lim r^{2/(p−1)}|Ψ(r)|.
    pub value: f64,
    pub radii: [f64; 3],
    pub samples: [f64; 3],
    /// Largest relative gap between the extrapolation and the cruder estimates.
    pub spread: f64,
    pub inconclusive: bool,
}

/// Richardson extrapolation of r^{2/(p−1)}|Ψ(r)| in 1/r² from three exterior
/// nodes near 0.64, 0.8 and 1 times R_far.
pub fn tail_amplitude(profile: &SelfSimilarProfile) -> Result<TailAmplitude> {
    let pr = profile.params;
    let r_far = profile.r_far();
    if pr.b > 0.0 && r_far < 2.0 * pr.b.powi(-2) * (1.0 - 1e-12) {
        return Err(Error::Domain(format!("tail amplitude needs R_far ≥ 2b⁻² = {}, got {r_far}", 2.0 / (pr.b * pr.b))));
    }
    let ext = &profile.exterior;
    let power = 2.0 / (pr.p - 1.0);
    let mut radii = [0.0; 3];
    let mut samples = [0.0; 3];
    for (k, frac) in TAIL_LADDER.iter().enumerate() {
        let x = r_far * frac;
        let i = (((x - ext.grid.x0) / ext.grid.h).round() as usize).min(ext.grid.n);
        radii[k] = ext.r(i);
        samples[k] = radii[k].powf(power) * ext.p[i].norm();
    }
    let x: Vec<f64> = radii.iter().map(|r| r.powi(-2)).collect();
    // Lagrange interpolation at x = 0.
    let value = (0..3)
        .map(|i| {
            let l: f64 = (0..3).filter(|j| *j != i).map(|j| x[j] / (x[j] - x[i])).product();
            l * samples[i]
        })
        .sum::<f64>();
    let linear = (samples[2] * x[1] - samples[1] * x[2]) / (x[1] - x[2]);
    let spread = [samples[2], linear].iter().map(|e| (e - value).abs()).fold(0.0, f64::max) / value.abs();
    Ok(TailAmplitude { value, radii, samples, spread, inconclusive: !(spread <= TAIL_SPREAD_LIMIT) })
}

/// Residual of ΔΨ − Ψ + ib(αΨ + rΨ′) + |Ψ|^{p−1}Ψ with α = d/2 − σ, relative to
/// the sum of the term magnitudes, at node `i` of `piece`. Ψ″ comes from an
/// 11-point stencil on Ψ′; a shorter one resolves the weak reflected wave near
/// R_far poorly. With p = 1 + 4/(d − 2σ), α equals 2/(p−1).
fn psi_residual_at(pr: &ProfileParams, piece: &Piece, i: usize) -> f64 {
    let b = pr.b;
    let offsets: Vec<f64> = (-HALF_STENCIL..=HALF_STENCIL).map(|k| k as f64).collect();
    let w = quad::fd_weights(0.0, &offsets, 1);
    let mut dd = Complex64::default();
    for (k, wk) in w.iter().enumerate() {
        dd += piece.dpsi(b, i + k - HALF_STENCIL as usize) * *wk;
    }
    dd /= piece.grid.h;
    let r = piece.r(i);
    let (psi, dpsi) = (piece.psi(b, i), piece.dpsi(b, i));
    let drift = dpsi * ((pr.d as f64 - 1.0) / r);
    let alpha = tail_exponent(pr);
    let scaling = Complex64::new(0.0, b) * (psi * alpha + dpsi * r);
    let nonlinear = psi * psi.norm().powf(pr.p - 1.0);
    let res = dd + drift - psi + scaling + nonlinear;
    let scale = dd.norm() + drift.norm() + psi.norm() + scaling.norm() + nonlinear.norm();
    if scale == 0.0 {
        0.0
    } else {
        res.norm() / scale
    }
}

/// Sup of the relative profile-equation residual at `samples` nodes spread over
/// each piece (away from the ends so the stencil stays centred).
pub fn equation_residual(profile: &SelfSimilarProfile, samples: usize) -> f64 {
    let pr = profile.params;
    let mut worst = 0.0f64;
    for piece in profile.pieces() {
        let n = piece.grid.n;
        let m = HALF_STENCIL as usize;
        let (lo, hi) = ((n / 20).max(m), n - m);
        for k in 0..samples {
            let i = lo + (hi - lo) * k / samples.saturating_sub(1).max(1);
            worst = worst.max(psi_residual_at(&pr, piece, i));
        }
    }
    worst
}

/// d ln M / d ln R between R_far/2 and R_far, M(R) = ∫_0^R |Ψ|² r^{d−1} dr.
/// Ψ is not in L², so M grows; the exponent is close to 2σ.
pub fn mass_growth_exponent(profile: &SelfSimilarProfile) -> f64 {
    let d = profile.params.d as i32;
    let b = profile.params.b;
    let integrand =
        |piece: &Piece| -> Vec<f64> { (0..piece.len()).map(|i| piece.psi(b, i).norm_sqr() * piece.r(i).powi(d - 1)).collect() };
    let inner = quad::integrate(&profile.interior.grid, &integrand(&profile.interior));
    let ext = &profile.exterior;
    let run = quad::cumulative(&ext.grid, &integrand(ext));
    let half = ((0.5 * profile.r_far() - ext.grid.x0) / ext.grid.h).round() as usize;
    let (m_half, m_full) = (inner + run[half], inner + run[ext.grid.n]);
    (m_full / m_half).ln() / (profile.r_far() / ext.r(half)).ln()
}

/// Least-squares slope of ln|Ψ′| against ln r over [R_far/2, R_far].
pub fn dpsi_decay_slope(profile: &SelfSimilarProfile) -> f64 {
    let ext = &profile.exterior;
    let b = profile.params.b;
    let start = ((0.5 * profile.r_far() - ext.grid.x0) / ext.grid.h).round() as usize;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        (start..=ext.grid.n).map(|i| (ext.r(i).ln(), ext.dpsi(b, i).norm().ln())).unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Everything the CLI reports about one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub energy: EnergyEstimate,
    pub hdot1: Hdot1Distance,
    pub tail: TailAmplitude,
    /// (2 N_c σ)^{1/2}.
    pub rho_limit: f64,
    pub eq_residual_sup: f64,
    pub junction: f64,
    pub mass_growth: f64,
    pub dpsi_slope: f64,
    pub n_c: Estimate,
}

pub fn diagnose(profile: &SelfSimilarProfile, gs: &GroundState) -> Result<Diagnostics> {
    let n_c = crate::ground_state::mass_integral(gs);
    Ok(Diagnostics {
        energy: energy(profile)?,
        hdot1: hdot1_distance(profile, gs)?,
        tail: tail_amplitude(profile)?,
        rho_limit: (2.0 * gs.n_c * profile.params.sigma).sqrt(),
        eq_residual_sup: equation_residual(profile, 16),
        junction: profile.junction_norm(),
        mass_growth: mass_growth_exponent(profile),
        dpsi_slope: dpsi_decay_slope(profile),
        n_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_measures() {
        use std::f64::consts::PI;
        assert_eq!(sphere_measure(1), 2.0);
        assert!((sphere_measure(3) - 4.0 * PI).abs() < 1e-15);
        assert!((sphere_measure(4) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_measure(5) - 8.0 * PI * PI / 3.0).abs() < 1e-14);
    }
}
