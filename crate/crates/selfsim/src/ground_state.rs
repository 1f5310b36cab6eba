//! Radial ground state Q of ΔQ − Q + Q^p = 0 and its constants κ, N_c.
//!
//! Q(0) is found by shooting with bisection between solutions that cross zero
//! and solutions that turn back up. The bisected profile is only trusted up to
//! a moderate radius r_m (shooting errors grow like e^{2r} relative to Q); past
//! r_m the table comes from an inward integration started on the exact linear
//! tail r^{-(d-1)/2} e^{-r} S_ν(r), and the two pieces are joined by a 2×2 Newton
//! solve on (Q(0), tail amplitude).

use crate::error::{Error, Result};
use crate::ode::{Control, Rkf78, System, Tolerances};
use crate::quad::{self, UniformGrid};
use serde::Serialize;

const SERIES_START: f64 = 1e-6;
const DEFAULT_STEP: f64 = 0.01;
const DEFAULT_RADIUS: f64 = 30.0;

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub d: u32,
    pub p: f64,
    pub grid: Vec<f64>,
    pub q: Vec<f64>,
    pub qp: Vec<f64>,
    pub kappa: f64,
    pub n_c: f64,
    pub n_c_err: f64,
    pub shoot_tol: f64,
    /// Amplitude of the linear tail used to extend Q beyond the grid.
    pub tail_amp: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateOptions {
    pub step: f64,
    pub radius: f64,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self { step: DEFAULT_STEP, radius: DEFAULT_RADIUS }
    }
}

/// |q|^{p-1} q, the odd extension of q^p.
#[inline]
pub fn power(q: f64, p: f64) -> f64 {
    q.abs().powf(p - 1.0) * q
}

/// ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1) r / 2), the one-dimensional ground state.
pub fn closed_form_soliton_1d(p: f64, r: f64) -> Result<f64> {
    if p <= 1.0 || !p.is_finite() {
        return Err(Error::Domain(format!("exponent p = {p} must exceed 1")));
    }
    if r < 0.0 {
        return Err(Error::Domain(format!("radius {r} is negative")));
    }
    let amp = ((p + 1.0) / 2.0).powf(1.0 / (p - 1.0));
    let x = (p - 1.0) * r / 2.0;
    // sech via exp(-x) keeps large r finite.
    let sech = 2.0 * (-x).exp() / (1.0 + (-2.0 * x).exp());
    Ok(amp * sech.powf(2.0 / (p - 1.0)))
}

struct Profile {
    d: f64,
    p: f64,
}

impl System<2> for Profile {
    fn rhs(&self, r: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
        dy[0] = y[1];
        dy[1] = -(self.d - 1.0) / r * y[1] + y[0] - power(y[0], self.p);
    }
}

/// Decaying solution of y'' + (d-1)/r y' − y = 0 scaled to r^{-(d-1)/2} e^{-r} at leading order.
pub fn linear_tail(d: u32, r: f64) -> (f64, f64) {
    bessel_asymptotic(d, r, -1.0)
}

/// Growing solution of the same equation, r^{-(d-1)/2} e^{r} at leading order
/// (up to exponentially small terms).
pub fn linear_growth(d: u32, r: f64) -> (f64, f64) {
    bessel_asymptotic(d, r, 1.0)
}

fn bessel_asymptotic(d: u32, r: f64, dir: f64) -> (f64, f64) {
    let nu = (d as f64 - 2.0) / 2.0;
    let m = (d as f64 - 1.0) / 2.0;
    let mut s = 1.0;
    let mut sd = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        a *= -dir * (4.0 * nu * nu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        let term = a / r.powi(k);
        if a == 0.0 || term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        s += term;
        sd -= kf * term / r;
        last = term.abs();
    }
    let base = r.powf(-m) * (dir * r).exp();
    (base * s, base * (sd + dir * s - m / r * s))
}

fn validate(d: u32, p: f64, tol: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::Config("dimension d must be at least 1".into()));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Config(format!("exponent p = {p} must exceed 1")));
    }
    if d >= 3 {
        let crit = (d as f64 + 2.0) / (d as f64 - 2.0);
        if p >= crit {
            return Err(Error::Config(format!("p = {p} is not energy-subcritical for d = {d} (need p < {crit})")));
        }
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

fn ode_tolerances(tol: f64) -> Tolerances {
    Tolerances::new((tol * 1e-2).max(2e-14), 1e-300)
}

fn series_start(d: u32, p: f64, a: f64) -> [f64; 2] {
    let c = (a - power(a, p)) / (2.0 * d as f64);
    [a + c * SERIES_START * SERIES_START, 2.0 * c * SERIES_START]
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    /// Q crossed zero: Q(0) too large.
    Over,
    /// Q turned upward while positive: Q(0) too small.
    Under,
    Undecided,
}

fn shoot(d: u32, p: f64, a: f64, tol: f64, radius: f64) -> Result<Shot> {
    let sys = Profile { d: d as f64, p };
    let mut solver = Rkf78::new(ode_tolerances(tol));
    // A run that neither crosses, turns nor decays (Q(0) = 1 in one dimension) counts as low.
    let mut verdict = Shot::Under;
    solver.integrate(&sys, SERIES_START, series_start(d, p, a), radius, &[], |_, y, _| {
        if y[0] < 0.0 {
            verdict = Shot::Over;
            Control::Stop
        } else if y[1] > 0.0 {
            verdict = Shot::Under;
            Control::Stop
        } else if y[0] < 1e-12 * a {
            verdict = Shot::Undecided;
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    Ok(verdict)
}

fn bisect(d: u32, p: f64, tol: f64, radius: f64) -> Result<f64> {
    let mut lo = None;
    let mut hi = None;
    // Q(0) ≤ 1 always turns upward, so the scan starts just above 1.
    let mut prev = 1.0;
    for k in 1..=40 {
        let a = 10f64.powf(k as f64 / 40.0);
        match shoot(d, p, a, tol, radius)? {
            Shot::Under => prev = a,
            Shot::Over => {
                lo = Some(prev);
                hi = Some(a);
                break;
            }
            Shot::Undecided => return Ok(a),
        }
    }
    let (mut lo, mut hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        _ => {
            return Err(Error::Config(format!(
                "no shooting bracket for Q(0) in [1, 10] (d = {d}, p = {p})"
            )))
        }
    };
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        match shoot(d, p, mid, tol, radius)? {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
            Shot::Undecided => return Ok(mid),
        }
    }
    Err(Error::Numerical(format!("bisection for Q(0) stalled in bracket [{lo:.17}, {hi:.17}]")))
}

/// Outward value and slope at `r_m` from Q(0) = a.
fn outward(d: u32, p: f64, a: f64, r_m: f64, tol: f64) -> Result<[f64; 2]> {
    let sys = Profile { d: d as f64, p };
    let mut solver = Rkf78::new(ode_tolerances(tol));
    let (_, y) = solver.integrate(&sys, SERIES_START, series_start(d, p, a), r_m, &[], |_, _, _| Control::Continue)?;
    Ok(y)
}

/// Inward value and slope at `r_m` from the linear tail with amplitude `k` at `radius`.
fn inward(d: u32, p: f64, k: f64, radius: f64, r_m: f64, tol: f64) -> Result<[f64; 2]> {
    let sys = Profile { d: d as f64, p };
    let (t, tp) = linear_tail(d, radius);
    let mut solver = Rkf78::new(ode_tolerances(tol));
    let (_, y) = solver.integrate(&sys, radius, [k * t, k * tp], r_m, &[], |_, _, _| Control::Continue)?;
    Ok(y)
}

pub fn solve_ground_state(d: u32, p: f64, tol: f64) -> Result<GroundState> {
    solve_ground_state_with(d, p, tol, GroundStateOptions::default())
}

pub fn solve_ground_state_with(d: u32, p: f64, tol: f64, opts: GroundStateOptions) -> Result<GroundState> {
    validate(d, p, tol)?;
    let radius = opts.radius.max(20.0);
    let n = (radius / opts.step).round() as usize;
    let grid = UniformGrid::new(0.0, radius, n);
    let a0 = bisect(d, p, tol, radius)?;

    // Junction: first node where the shot profile has dropped to 1% of Q(0).
    let sys = Profile { d: d as f64, p };
    let mut solver = Rkf78::new(ode_tolerances(tol));
    let nodes = grid.nodes();
    let mut m = n / 2;
    solver.integrate(&sys, SERIES_START, series_start(d, p, a0), nodes[n / 2], &nodes[1..=n / 2], |r, y, flag| {
        if flag && y[0] < 1e-2 * a0 {
            m = (r / grid.h).round() as usize;
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    let r_m = nodes[m];

    // Two-sided Newton on (a, tail amplitude).
    let (t_m, _) = linear_tail(d, r_m);
    let mut a = a0;
    let mut k = outward(d, p, a, r_m, tol)?[0] / t_m;
    let residual = |a: f64, k: f64| -> Result<[f64; 2]> {
        let o = outward(d, p, a, r_m, tol)?;
        let i = inward(d, p, k, radius, r_m, tol)?;
        Ok([o[0] - i[0], o[1] - i[1]])
    };
    let mut f = residual(a, k)?;
    for _ in 0..20 {
        let scale = a0 * 1e-2;
        if f[0].abs().max(f[1].abs()) <= 1e-15 * scale {
            break;
        }
        let (da, dk) = (1e-7 * a, 1e-7 * k);
        let fa = residual(a + da, k)?;
        let fk = residual(a, k + dk)?;
        let j = [[(fa[0] - f[0]) / da, (fk[0] - f[0]) / dk], [(fa[1] - f[1]) / da, (fk[1] - f[1]) / dk]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numerical("singular Jacobian while joining the ground-state tail".into()));
        }
        let step_a = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let step_k = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        a -= step_a;
        k -= step_k;
        let next = residual(a, k)?;
        let done = step_a.abs() <= 1e-15 * a && step_k.abs() <= 1e-15 * k.abs();
        f = next;
        if done {
            break;
        }
    }

    // Tabulate both halves on the grid.
    let mut q = vec![0.0; n + 1];
    let mut qp = vec![0.0; n + 1];
    q[0] = a;
    let mut solver = Rkf78::new(ode_tolerances(tol));
    solver.integrate(&sys, SERIES_START, series_start(d, p, a), r_m, &nodes[1..=m], |r, y, flag| {
        if flag {
            let i = (r / grid.h).round() as usize;
            q[i] = y[0];
            qp[i] = y[1];
        }
        Control::Continue
    })?;
    let (t_end, tp_end) = linear_tail(d, radius);
    q[n] = k * t_end;
    qp[n] = k * tp_end;
    let inward_nodes: Vec<f64> = nodes[m + 1..n].iter().rev().copied().collect();
    let mut solver = Rkf78::new(ode_tolerances(tol));
    let mut out = Vec::with_capacity(inward_nodes.len());
    solver.integrate(&sys, radius, [q[n], qp[n]], r_m, &inward_nodes, |r, y, flag| {
        if flag && r > r_m {
            out.push((r, *y));
        }
        Control::Continue
    })?;
    for (r, y) in out {
        let i = (r / grid.h).round() as usize;
        q[i] = y[0];
        qp[i] = y[1];
    }

    let mut gs = GroundState {
        d,
        p,
        grid: nodes,
        q,
        qp,
        kappa: k,
        n_c: 0.0,
        n_c_err: 0.0,
        shoot_tol: tol,
        tail_amp: k,
        step: grid.h,
    };
    check_shape(&gs)?;
    gs.kappa = fit_kappa(&gs)?;
    let mass = mass_integral(&gs);
    gs.n_c = mass.value;
    gs.n_c_err = mass.error;
    log::debug!("ground state d={d} p={p}: Q(0)={a:.15} kappa={:.12} N_c={:.12}", gs.kappa, gs.n_c);
    Ok(gs)
}

fn check_shape(gs: &GroundState) -> Result<()> {
    for i in 1..gs.q.len() {
        if !(gs.q[i] > 0.0) || gs.q[i] >= gs.q[i - 1] || gs.qp[i] > 0.0 {
            return Err(Error::Numerical(format!(
                "ground-state table not positive and decreasing at r = {}",
                gs.grid[i]
            )));
        }
    }
    Ok(())
}

impl GroundState {
    pub fn radius(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn q0(&self) -> f64 {
        self.q[0]
    }

    fn grid_spec(&self) -> UniformGrid {
        UniformGrid::new(0.0, self.radius(), self.grid.len() - 1)
    }

    /// Q'' from the equation (series limit at the origin).
    pub fn second_derivative(&self, r: f64, q: f64, qp: f64) -> f64 {
        if r == 0.0 {
            (q - power(q, self.p)) / self.d as f64
        } else {
            -(self.d as f64 - 1.0) / r * qp + q - power(q, self.p)
        }
    }

    /// Q and Q' at any r ≥ 0; beyond the grid the linear tail takes over.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let rq = self.radius();
        if r >= rq {
            let (t, tp) = linear_tail(self.d, r);
            return (self.tail_amp * t, self.tail_amp * tp);
        }
        let i = ((r / self.step) as usize).min(self.grid.len() - 2);
        let (r0, r1) = (self.grid[i], self.grid[i + 1]);
        let a = [self.q[i], self.qp[i], self.second_derivative(r0, self.q[i], self.qp[i])];
        let b = [self.q[i + 1], self.qp[i + 1], self.second_derivative(r1, self.q[i + 1], self.qp[i + 1])];
        quad::hermite5(r0, r1, a, b, r)
    }

    /// Sup over interior nodes of |Q'' + (d-1)/r Q' − Q + Q^p| with Q'' from
    /// differencing the tabulated Q'.
    pub fn equation_residual(&self) -> f64 {
        let g = self.grid_spec();
        let qpp = quad::derivative(&g, &self.qp);
        let d = self.d as f64;
        (1..self.grid.len() - 1)
            .map(|i| {
                let r = self.grid[i];
                (qpp[i] + (d - 1.0) / r * self.qp[i] - self.q[i] + power(self.q[i], self.p)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Least-squares fit of Q/T ≈ κ(1 + c/r) on [R_Q/2, R_Q], with T the decaying
/// linear solution. Dividing by T removes the algebraic corrections of the
/// tail, so c only absorbs what is left of the nonlinearity.
pub fn fit_kappa(gs: &GroundState) -> Result<f64> {
    let rq = gs.radius();
    let (xs, ys): (Vec<f64>, Vec<f64>) = gs
        .grid
        .iter()
        .zip(&gs.q)
        .filter(|(r, _)| **r >= 0.5 * rq)
        .map(|(r, q)| (*r, q / linear_tail(gs.d, *r).0))
        .unzip();
    if xs.len() < 10 {
        return Err(Error::Config(format!("fit window holds {} nodes, need at least 10", xs.len())));
    }
    Ok(quad::fit_inverse_linear(&xs, &ys).0)
}

/// N_c = ∫ Q² r^{d-1} dr with a tail correction, and a Richardson-style error
/// estimate from the same rule on every other node.
pub fn mass_integral(gs: &GroundState) -> Estimate {
    let g = gs.grid_spec();
    let d = gs.d as i32;
    let f: Vec<f64> = gs.grid.iter().zip(&gs.q).map(|(r, q)| q * q * r.powi(d - 1)).collect();
    let (fine, quad_err) = quad::integrate_with_error(&g, &f);
    let rq = gs.radius();
    let tail = gs.kappa * gs.kappa * (-2.0 * rq).exp() / 2.0;
    let value = fine + tail;
    let error = quad_err + tail / rq + 4.0 * f64::EPSILON * value;
    Estimate { value, error }
}
