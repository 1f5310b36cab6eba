//! Exterior solution of the U equation on [r_K, R_far].
//!
//! U = r^{(d-1)/2} P solves
//! U'' + (b²r²/4 − 1 − (d−1)(d−3)/(4r²) − ibσ)U + r^{-(d−1)(p−1)/2}|U|^{p−1}U = 0.
//! It is started at R_far on the outgoing WKB profile ρV+ and integrated inward
//! straight through the turning point at 2/b; no connection formulas are used.

use crate::error::{Error, Result};
use crate::farfield::{Branch, FarFieldBasis};
use crate::ode::{Control, Rkf78, Stats, System, Tolerances};
use crate::quad::{self, gauss_composite};
use num_complex::Complex64;
use serde::Serialize;

/// Target for the global relative error at r_K. Per-step control runs a
/// hundred times tighter, which covers error accumulation over the long
/// oscillatory stretch.
pub const DEFAULT_TOL: f64 = 1e-12;
const LOCAL_FACTOR: f64 = 1e-2;
pub const DEFAULT_GUARD: f64 = 1e6;

/// Radii of the three regions for a given b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionLayout {
    pub b: f64,
    pub r_k: f64,
    pub r_j: f64,
    pub r_i: f64,
    pub r_far: f64,
}

impl RegionLayout {
    /// `r_far` defaults to max(b⁻², 50).
    pub fn new(b: f64, r_far: Option<f64>) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Config(format!("b = {b} must lie in (0, 1)")));
        }
        let r_i = b.powi(-2);
        let r_far = r_far.unwrap_or(r_i.max(50.0));
        if !(r_far >= r_i) || !r_far.is_finite() {
            return Err(Error::Config(format!("R_far = {r_far} is below b⁻² = {r_i}")));
        }
        Ok(Self { b, r_k: b.powf(-0.5), r_j: 2.0 / b, r_i, r_far })
    }
}

/// Value and derivative of P at a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryState {
    pub r: f64,
    pub p: Complex64,
    pub pd: Complex64,
}

impl BoundaryState {
    pub fn rotate(&self, theta: f64) -> Self {
        let e = Complex64::from_polar(1.0, theta);
        Self { r: self.r, p: e * self.p, pd: e * self.pd }
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.pd.is_finite() && self.r.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExteriorParams {
    pub d: u32,
    pub p: f64,
    pub b: f64,
    pub sigma: f64,
    pub rho: f64,
    /// Switch the nonlinearity off to get the linear equation.
    pub nonlinear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExteriorOptions {
    pub tol: f64,
    /// Abort when |U| exceeds this multiple of |U(R_far)|.
    pub guard: f64,
}

impl Default for ExteriorOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, guard: DEFAULT_GUARD }
    }
}

pub(crate) struct UEquation {
    d: f64,
    p: f64,
    b: f64,
    sigma: f64,
    nonlinear: bool,
}

impl UEquation {
    pub(crate) fn new(params: &ExteriorParams) -> Self {
        Self { d: params.d as f64, p: params.p, b: params.b, sigma: params.sigma, nonlinear: params.nonlinear }
    }

    /// U'' given U.
    pub(crate) fn second(&self, r: f64, u: Complex64) -> Complex64 {
        let (d, b) = (self.d, self.b);
        let coef = b * b * r * r / 4.0 - 1.0 - (d - 1.0) * (d - 3.0) / (4.0 * r * r);
        let mut upp = -Complex64::new(coef, -b * self.sigma) * u;
        if self.nonlinear {
            let w = r.powf(-(d - 1.0) * (self.p - 1.0) / 2.0);
            upp -= u * (w * u.norm().powf(self.p - 1.0));
        }
        upp
    }
}

impl System<4> for UEquation {
    fn rhs(&self, r: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let upp = self.second(r, Complex64::new(y[0], y[1]));
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = upp.re;
        dy[3] = upp.im;
    }
}

fn pack(u: Complex64, du: Complex64) -> [f64; 4] {
    [u.re, u.im, du.re, du.im]
}

fn unpack(y: &[f64; 4]) -> (Complex64, Complex64) {
    (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

/// Convert (U, U′) to (P, P′) at r.
pub fn u_to_p(d: u32, r: f64, u: Complex64, du: Complex64) -> BoundaryState {
    let m = (d as f64 - 1.0) / 2.0;
    let f = r.powf(-m);
    BoundaryState { r, p: u * f, pd: (du - u * (m / r)) * f }
}

/// (U, U′) = ρ(V+, V+′) at `r_far`.
pub fn far_field_init(params: &ExteriorParams, r_far: f64) -> Result<(Complex64, Complex64)> {
    let b = params.b;
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Config(format!("b = {b} must lie in (0, 1)")));
    }
    if !(params.rho >= 0.0) {
        return Err(Error::Config(format!("ρ = {} must be non-negative", params.rho)));
    }
    if !(r_far >= b.powi(-2)) {
        return Err(Error::Config(format!("R_far = {r_far} is below b⁻² = {}", b.powi(-2))));
    }
    let basis = FarFieldBasis::new(b, params.sigma)?;
    let (v, dv) = basis.v_pm(r_far, Branch::Plus)?;
    Ok((v * params.rho, dv * params.rho))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorTrajectory {
    pub params: ExteriorParams,
    pub layout: RegionLayout,
    pub tol: f64,
    /// Every accepted step and requested output, ascending in r.
    pub radii: Vec<f64>,
    pub states: Vec<[f64; 4]>,
    pub stats: Stats,
    /// P and P′ at r_K.
    pub boundary: BoundaryState,
}

fn solver(tol: f64, scale: f64) -> Rkf78 {
    let mut s = Rkf78::new(Tolerances::new((tol * LOCAL_FACTOR).max(1e-15), 1e-16 * scale.max(1e-300)));
    s.complex_pairs = true;
    s.initial_step = Some(1e-2);
    s
}

/// Integrate from R_far to r_K. `outputs` are extra radii in [r_K, R_far]
/// (any order) that are hit exactly and stored.
pub fn integrate_exterior(
    params: &ExteriorParams,
    layout: &RegionLayout,
    opts: &ExteriorOptions,
    outputs: &[f64],
) -> Result<ExteriorTrajectory> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("ODE tolerance {} must be positive", opts.tol)));
    }
    let init = far_field_init(params, layout.r_far)?;
    integrate_exterior_from(params, layout, opts, init, outputs)
}

/// Same as [`integrate_exterior`] but from arbitrary data (U, U′) at R_far.
pub fn integrate_exterior_from(
    params: &ExteriorParams,
    layout: &RegionLayout,
    opts: &ExteriorOptions,
    init: (Complex64, Complex64),
    outputs: &[f64],
) -> Result<ExteriorTrajectory> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("ODE tolerance {} must be positive", opts.tol)));
    }
    if params.b != layout.b {
        return Err(Error::Config("layout built for a different b".into()));
    }
    let (u0, du0) = init;
    let scale = u0.norm();
    let mut radii = vec![layout.r_far];
    let mut states = vec![pack(u0, du0)];
    if scale == 0.0 {
        let zero = BoundaryState { r: layout.r_k, p: Complex64::default(), pd: Complex64::default() };
        radii.insert(0, layout.r_k);
        states.insert(0, [0.0; 4]);
        return Ok(ExteriorTrajectory {
            params: *params,
            layout: *layout,
            tol: opts.tol,
            radii,
            states,
            stats: Stats::default(),
            boundary: zero,
        });
    }
    let mut outs: Vec<f64> = outputs.iter().copied().filter(|r| *r >= layout.r_k && *r < layout.r_far).collect();
    outs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    outs.dedup();

    let sys = UEquation::new(params);
    let mut ode = solver(opts.tol, scale);
    let limit = opts.guard * scale;
    let mut blowup = None;
    let (r_end, y_end) = ode.integrate(&sys, layout.r_far, pack(u0, du0), layout.r_k, &outs, |r, y, _| {
        radii.push(r);
        states.push(*y);
        let m = y[0].hypot(y[1]);
        if !(m <= limit) {
            blowup = Some((r, m));
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    if let Some((r, magnitude)) = blowup {
        return Err(Error::Divergence { r, magnitude });
    }
    debug_assert_eq!(r_end, layout.r_k);
    radii.reverse();
    states.reverse();
    let (u, du) = unpack(&y_end);
    Ok(ExteriorTrajectory {
        params: *params,
        layout: *layout,
        tol: opts.tol,
        radii,
        states,
        stats: ode.stats,
        boundary: u_to_p(params.d, layout.r_k, u, du),
    })
}

impl ExteriorTrajectory {
    /// (U, U′) at r, re-integrating from the nearest stored node.
    pub fn u_at(&self, r: f64) -> Result<(Complex64, Complex64)> {
        let (lo, hi) = (self.radii[0], *self.radii.last().unwrap());
        if !(r >= lo && r <= hi) {
            return Err(Error::Domain(format!("r = {r} outside exterior range [{lo}, {hi}]")));
        }
        let i = self.radii.partition_point(|x| *x < r);
        let j = if i == self.radii.len() {
            i - 1
        } else if i > 0 && r - self.radii[i - 1] < self.radii[i] - r {
            i - 1
        } else {
            i
        };
        if self.radii[j] == r {
            return Ok(unpack(&self.states[j]));
        }
        let sys = UEquation::new(&self.params);
        let scale = self.states.last().map(|y| y[0].hypot(y[1])).unwrap_or(1.0);
        let mut ode = solver(self.tol, scale);
        ode.initial_step = Some((r - self.radii[j]).abs());
        let (_, y) = ode.integrate(&sys, self.radii[j], self.states[j], r, &[], |_, _, _| Control::Continue)?;
        Ok(unpack(&y))
    }

    pub fn state_at(&self, r: f64) -> Result<BoundaryState> {
        let (u, du) = self.u_at(r)?;
        Ok(u_to_p(self.params.d, r, u, du))
    }

    /// |U″ − F(r, U)| / max(|F|, |U|) at r, with U″ from a 7-point stencil on U′.
    pub fn equation_residual(&self, r: f64) -> Result<f64> {
        let k = 1.0 + self.params.b * r / 2.0;
        let h = 0.05 / k;
        let offsets: Vec<f64> = (-3..=3).map(|j| j as f64 * h).collect();
        let w = quad::fd_weights(0.0, &offsets, 1);
        let mut upp = Complex64::default();
        for (x, wk) in offsets.iter().zip(&w) {
            upp += self.u_at(r + x)?.1 * *wk;
        }
        let (u, _) = self.u_at(r)?;
        let f = UEquation::new(&self.params).second(r, u);
        Ok((upp - f).norm() / f.norm().max(u.norm()))
    }

    /// Largest |U| reached, relative to |U(R_far)|.
    pub fn growth(&self) -> f64 {
        let m0 = self.states.last().map(|y| y[0].hypot(y[1])).unwrap_or(0.0);
        let top = self.states.iter().map(|y| y[0].hypot(y[1])).fold(0.0, f64::max);
        if m0 == 0.0 {
            0.0
        } else {
            top / m0
        }
    }
}

/// Coefficients λ± in U = λ+V+ + λ−V−, U′ = λ+V+′ + λ−V−′ at r ≥ b⁻².
pub fn lambda_decompose(traj: &ExteriorTrajectory, r: f64) -> Result<(Complex64, Complex64)> {
    let b = traj.params.b;
    if r < b.powi(-2) * (1.0 - 1e-12) {
        return Err(Error::Domain(format!("λ decomposition needs r ≥ b⁻² = {}, got {r}", b.powi(-2))));
    }
    let basis = FarFieldBasis::new(b, traj.params.sigma)?;
    let (vp, dvp) = basis.v_pm(r, Branch::Plus)?;
    let (vm, dvm) = basis.v_pm(r, Branch::Minus)?;
    let (u, du) = traj.u_at(r)?;
    let w = vp * dvm - dvp * vm;
    assert!(w.norm() > 0.0, "WKB Wronskian vanished at r = {r}");
    Ok(((u * dvm - du * vm) / w, (vp * du - dvp * u) / w))
}

/// (1/(2b))∫_0^{2−√b} √(τ(4−τ)) dτ against π/(2b) − 1/√b.
pub fn turning_point_phase(b: f64) -> Result<(f64, f64)> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Domain(format!("b = {b} must lie in (0, 1)")));
    }
    let lhs = phase_integral(2.0 - b.sqrt()) / (2.0 * b);
    let rhs = std::f64::consts::PI / (2.0 * b) - 1.0 / b.sqrt();
    Ok((lhs, rhs))
}

/// ∫_0^t √(τ(4−τ)) dτ for t ∈ [0, 2], by Gauss panels after τ = u².
fn phase_integral(t: f64) -> f64 {
    gauss_composite(|u| 2.0 * u * u * (4.0 - u * u).sqrt(), 0.0, t.sqrt(), 8, 20)
}

/// ζ(τ) = ((3/2)∫_0^τ √τ' h(τ') dτ')^{2/3} with h = ½√(4−τ), for τ ∈ [0, 2].
pub fn zeta(tau: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&tau) {
        return Err(Error::Domain(format!("ζ map implemented on [0, 2], got {tau}")));
    }
    Ok((0.75 * phase_integral(tau)).powf(2.0 / 3.0))
}

pub fn zeta0() -> f64 {
    zeta(2.0).expect("2 lies in the domain")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_ordering() {
        for b in [0.05, 0.3, 0.5] {
            let l = RegionLayout::new(b, None).unwrap();
            assert!(l.r_k < l.r_j && l.r_j <= l.r_i && l.r_i <= l.r_far);
        }
        // Above b = 1/2 the turning point lies beyond b⁻²; only R_far keeps its place.
        let l = RegionLayout::new(0.9, None).unwrap();
        assert!(l.r_i < l.r_j && l.r_j < l.r_far);
        assert!(RegionLayout::new(0.3, Some(5.0)).is_err());
        assert!(RegionLayout::new(1.2, None).is_err());
    }

    #[test]
    fn phase_integral_closed_form() {
        // ∫√(τ(4−τ)) = ((τ−2)/2)√(τ(4−τ)) + 2 arcsin((τ−2)/2) + π.
        for t in [0.3f64, 1.0, 1.7, 2.0] {
            let exact = (t - 2.0) / 2.0 * (t * (4.0 - t)).sqrt() + 2.0 * ((t - 2.0) / 2.0).asin() + std::f64::consts::PI;
            assert!((phase_integral(t) - exact).abs() < 1e-13, "{t}");
        }
    }

    #[test]
    fn zeta0_value() {
        assert!((zeta0() - (0.75 * std::f64::consts::PI).powf(2.0 / 3.0)).abs() < 1e-13);
        assert!((zeta0() - 1.770_682_754_000_227).abs() < 1e-13);
    }
}
