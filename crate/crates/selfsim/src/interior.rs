//! Interior solution on K = [0, r_K] as a perturbation of the ground state.
//!
//! With L+ = −Δ + 1 − pQ^{p−1} and L− = −Δ + 1 − Q^{p−1}, the profile is sought as
//! P = (Q + γA + φ+) + i(bσB + φ−), where L+A = 0 with A(0) = 1 and L−B = −Q.
//! The corrections solve L±φ± = F±(φ+, φ−) and are found by Picard iteration
//! through the Green operators H± built from (A, D) and Q.

use crate::error::{Error, Result};
use crate::exterior::BoundaryState;
use crate::ground_state::{linear_growth, linear_tail, GroundState};
use crate::ode::{Control, Rkf78, System, Tolerances};
use crate::quad::{self, UniformGrid};
use num_complex::Complex64;
use serde::Serialize;

const SERIES_START: f64 = 1e-6;
const MIN_NODES: usize = 400;
const MAX_STEP: f64 = 0.01;
/// D is started on the linear tail this far beyond max(r_K, 1).
const TAIL_OFFSET: f64 = 25.0;
const FIT_WINDOW: (f64, f64) = (10.0, 20.0);
const ODE_RTOL: f64 = 1e-14;

/// Asymptotic constants of A and B: A ~ κ_A r^{−(d−1)/2} e^r, B ~ κ_B r^{−(d−1)/2} e^r.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisConstants {
    pub kappa_a: f64,
    pub kappa_b: f64,
    /// N_c/(2κ), the closed-form value κ_B should reproduce.
    pub kappa_b_identity: f64,
}

/// Samples of a function and its derivative on the interior grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridFn {
    pub v: Vec<f64>,
    pub d: Vec<f64>,
}

impl GridFn {
    pub fn zeros(n: usize) -> Self {
        Self { v: vec![0.0; n], d: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedBasis {
    pub dim: u32,
    pub p: f64,
    pub r_k: f64,
    pub grid: UniformGrid,
    pub r: Vec<f64>,
    pub q: GridFn,
    pub a: GridFn,
    /// Decaying solution D, normalised by W(A, D) r^{d−1} = 1. For d ≥ 2 the
    /// node at r = 0 holds 0: D is singular there, but it only ever enters
    /// multiplied by an integral over [0, r] that vanishes.
    pub dec: GridFn,
    pub b: GridFn,
    pub consts: BasisConstants,
}

struct LinearizedPlus<'a> {
    gs: &'a GroundState,
}

impl System<2> for LinearizedPlus<'_> {
    fn rhs(&self, r: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
        let d = self.gs.d as f64;
        let q = self.gs.eval(r).0;
        let drift = if self.gs.d == 1 { 0.0 } else { (d - 1.0) / r * y[1] };
        dy[0] = y[1];
        dy[1] = -drift + (1.0 - self.gs.p * q.powf(self.gs.p - 1.0)) * y[0];
    }
}

/// Q and A together, so the interior Q is free of table interpolation error.
struct GroundAndA {
    d: f64,
    p: f64,
}

impl System<4> for GroundAndA {
    fn rhs(&self, r: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let k = if self.d == 1.0 { 0.0 } else { (self.d - 1.0) / r };
        let qm = y[0].powf(self.p - 1.0);
        dy[0] = y[1];
        dy[1] = -k * y[1] + y[0] - qm * y[0];
        dy[2] = y[3];
        dy[3] = -k * y[3] + (1.0 - self.p * qm) * y[2];
    }
}

fn solver() -> Rkf78 {
    let mut s = Rkf78::new(Tolerances::new(ODE_RTOL, 1e-300));
    s.max_step = MAX_STEP;
    s
}

fn a_series(gs: &GroundState) -> [f64; 2] {
    let c = (1.0 - gs.p * gs.q0().powf(gs.p - 1.0)) / (2.0 * gs.d as f64);
    [1.0 + c * SERIES_START * SERIES_START, 2.0 * c * SERIES_START]
}

/// Integrates L+A = 0 outward, recording A at `nodes` (ascending, all > 0).
fn solve_a(gs: &GroundState, nodes: &[f64]) -> Result<Vec<[f64; 2]>> {
    let sys = LinearizedPlus { gs };
    let mut out = Vec::with_capacity(nodes.len());
    let end = *nodes.last().unwrap();
    solver().integrate(&sys, SERIES_START, a_series(gs), end, nodes, |_, y, hit| {
        if hit {
            out.push(*y);
        }
        Control::Continue
    })?;
    if out.len() != nodes.len() {
        return Err(Error::Numerical(format!("A integration hit {} of {} nodes", out.len(), nodes.len())));
    }
    Ok(out)
}

/// B = Q ∫_0^r [∫_0^s Q² τ^{d−1} dτ] / (Q² s^{d−1}) ds on a uniform grid from 0.
fn b_on_grid(grid: &UniformGrid, dim: u32, q: &GridFn) -> GridFn {
    let mut h = green_minus_raw(grid, dim, q, &q.v);
    for (v, d) in h.v.iter_mut().zip(h.d.iter_mut()) {
        *v = -*v;
        *d = -*d;
    }
    h
}

fn fit_growth(dim: u32, r: &[f64], y: &[f64]) -> f64 {
    let scaled: Vec<f64> = r.iter().zip(y).map(|(r, y)| y / linear_growth(dim, *r).0).collect();
    quad::fit_inverse_linear(r, &scaled).0
}

/// κ_A and κ_B from the large-r behaviour of A and B on [10, 20].
pub fn basis_constants(gs: &GroundState) -> Result<BasisConstants> {
    if gs.radius() < FIT_WINDOW.1 {
        return Err(Error::Config(format!("ground state covers [0, {}], need {}", gs.radius(), FIT_WINDOW.1)));
    }
    let n = (FIT_WINDOW.1 / gs.step).round() as usize;
    let grid = UniformGrid::new(0.0, FIT_WINDOW.1, n);
    let r = grid.nodes();
    let in_window: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= FIT_WINDOW.0).collect();
    let rw: Vec<f64> = in_window.iter().map(|&i| r[i]).collect();

    let a = solve_a(gs, &rw)?;
    let ya: Vec<f64> = a.iter().map(|y| y[0]).collect();
    let kappa_a = fit_growth(gs.d, &rw, &ya);
    if let Some(i) = ya.iter().position(|v| v.signum() != kappa_a.signum()) {
        return Err(Error::Numerical(format!("A changes sign at r = {} inside the fit window", rw[i])));
    }

    let q = GridFn { v: gs.q[..=n].to_vec(), d: gs.qp[..=n].to_vec() };
    let b = b_on_grid(&grid, gs.d, &q);
    let yb: Vec<f64> = in_window.iter().map(|&i| b.v[i]).collect();
    let kappa_b = fit_growth(gs.d, &rw, &yb);
    Ok(BasisConstants { kappa_a, kappa_b, kappa_b_identity: gs.n_c / (2.0 * gs.kappa) })
}

/// Interior grid size for a given r_K: step at most min(0.01, r_K/400).
pub fn interior_nodes(r_k: f64) -> usize {
    MIN_NODES.max((r_k / MAX_STEP).ceil() as usize)
}

/// Tabulates Q, A, D and B on [0, r_K].
pub fn build_basis(gs: &GroundState, consts: BasisConstants, r_k: f64) -> Result<LinearizedBasis> {
    if !(r_k > 0.0 && r_k < gs.radius()) {
        return Err(Error::Config(format!("r_K = {r_k} outside (0, {})", gs.radius())));
    }
    let dim = gs.d;
    let df = dim as f64;
    let grid = UniformGrid::new(0.0, r_k, interior_nodes(r_k));
    let r = grid.nodes();
    let n = r.len();

    let q0 = gs.q0();
    let cq = (q0 - q0.powf(gs.p)) / (2.0 * df);
    let e = SERIES_START;
    let [a0, a1] = a_series(gs);
    let mut q = GridFn::zeros(n);
    let mut a = GridFn::zeros(n);
    q.v[0] = q0;
    a.v[0] = 1.0;
    let mut idx = 0;
    let y0 = [q0 + cq * e * e, 2.0 * cq * e, a0, a1];
    solver().integrate(&GroundAndA { d: df, p: gs.p }, e, y0, r_k, &r[1..], |_, y, hit| {
        if hit {
            idx += 1;
            q.v[idx] = y[0];
            q.d[idx] = y[1];
            a.v[idx] = y[2];
            a.d[idx] = y[3];
        }
        Control::Continue
    })?;
    if idx != n - 1 {
        return Err(Error::Numerical(format!("interior integration hit {idx} of {} nodes", n - 1)));
    }

    // D grows inward, so integrating from the tail is stable.
    let start = r_k.max(1.0) + TAIL_OFFSET;
    let (t, tp) = linear_tail(dim, start);
    let stop = if dim == 1 { 0.0 } else { r[1] };
    let outs: Vec<f64> = r[if dim == 1 { 0 } else { 1 }..].iter().rev().copied().collect();
    let mut dec = GridFn::zeros(n);
    let mut idx = n;
    solver().integrate(&LinearizedPlus { gs }, start, [t, tp], stop, &outs, |_, y, hit| {
        if hit {
            idx -= 1;
            dec.v[idx] = y[0];
            dec.d[idx] = y[1];
        }
        Control::Continue
    })?;
    let last = n - 1;
    let w = (a.v[last] * dec.d[last] - a.d[last] * dec.v[last]) * r_k.powf(df - 1.0);
    if !(w.is_finite() && w != 0.0) {
        return Err(Error::Numerical(format!("degenerate Wronskian {w} for A, D")));
    }
    for (v, d) in dec.v.iter_mut().zip(dec.d.iter_mut()) {
        *v /= w;
        *d /= w;
    }

    let b = b_on_grid(&grid, dim, &q);
    Ok(LinearizedBasis { dim, p: gs.p, r_k, grid, r, q, a, dec, b, consts })
}

impl LinearizedBasis {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn weight(&self, i: usize) -> f64 {
        self.r[i].powi(self.dim as i32 - 1)
    }

    /// Sup over (0, r_K] of |W(A, D) r^{d−1} − 1|.
    pub fn wronskian_defect(&self) -> f64 {
        (1..self.len())
            .map(|i| {
                let w = self.a.v[i] * self.dec.d[i] - self.a.d[i] * self.dec.v[i];
                (w * self.weight(i) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Config(format!("function has {} samples, grid has {}", f.len(), self.len())));
        }
        Ok(())
    }

    fn laplacian(&self, f: &GridFn) -> Vec<f64> {
        let fpp = quad::derivative(&self.grid, &f.d);
        let d = self.dim as f64;
        (0..self.len())
            .map(|i| {
                // (d−1) f'/r → (d−1) f''(0) for radial f.
                let drift = if i == 0 { (d - 1.0) * fpp[0] } else { (d - 1.0) / self.r[i] * f.d[i] };
                fpp[i] + drift
            })
            .collect()
    }

    /// L+f = −f'' − (d−1)/r f' + f − pQ^{p−1} f, with f'' by differencing f'.
    pub fn apply_lplus(&self, f: &GridFn) -> Result<Vec<f64>> {
        self.check(&f.v)?;
        self.check(&f.d)?;
        let lap = self.laplacian(f);
        Ok((0..self.len()).map(|i| -lap[i] + f.v[i] - self.p * self.q.v[i].powf(self.p - 1.0) * f.v[i]).collect())
    }

    /// L−f = −f'' − (d−1)/r f' + f − Q^{p−1} f.
    pub fn apply_lminus(&self, f: &GridFn) -> Result<Vec<f64>> {
        self.check(&f.v)?;
        self.check(&f.d)?;
        let lap = self.laplacian(f);
        Ok((0..self.len()).map(|i| -lap[i] + f.v[i] - self.q.v[i].powf(self.p - 1.0) * f.v[i]).collect())
    }

    /// H+(f) = −{A ∫_r^{r_K} f D s^{d−1} + D ∫_0^r f A s^{d−1}} and its derivative.
    pub fn green_hplus(&self, f: &[f64]) -> Result<GridFn> {
        self.check(f)?;
        let n = self.len();
        let fa: Vec<f64> = (0..n).map(|i| f[i] * self.a.v[i]).collect();
        let inner = quad::cumulative_weighted(&self.grid, &fa, self.dim - 1);
        let running = self.running_fdw(f, &inner);
        let total = running[n - 1];
        let outer: Vec<f64> = running.iter().map(|v| total - v).collect();
        let mut h = GridFn::zeros(n);
        for i in 0..n {
            h.v[i] = -(self.a.v[i] * outer[i] + self.dec.v[i] * inner[i]);
            h.d[i] = -(self.a.d[i] * outer[i] + self.dec.d[i] * inner[i]);
        }
        Ok(h)
    }

    /// ∫_0^r f D s^{d−1} ds. In two dimensions D = A ln r + E with E smooth
    /// (the Wronskian fixes the log coefficient to 1), and the log part is
    /// integrated by parts: ∫_0^r u ln s = U(r) ln r − ∫_0^r U/s with U = ∫_0^s f A.
    fn running_fdw(&self, f: &[f64], big_u: &[f64]) -> Vec<f64> {
        let n = self.len();
        if self.dim != 2 {
            let g: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { f[i] * self.dec.v[i] * self.weight(i) }).collect();
            return quad::cumulative(&self.grid, &g);
        }
        let mut smooth: Vec<f64> = (0..n)
            .map(|i| if i == 0 { 0.0 } else { self.dec.v[i] - self.a.v[i] * self.r[i].ln() })
            .collect();
        smooth[0] = extrapolate_to_origin(&smooth[1..8]);
        let g: Vec<f64> = (0..n).map(|i| f[i] * smooth[i] * self.r[i]).collect();
        let u_over_s: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { big_u[i] / self.r[i] }).collect();
        let tail = quad::cumulative(&self.grid, &u_over_s);
        let reg = quad::cumulative(&self.grid, &g);
        (0..n).map(|i| if i == 0 { 0.0 } else { reg[i] + big_u[i] * self.r[i].ln() - tail[i] }).collect()
    }

    /// H−(f) = −Q ∫_0^r [∫_0^s f Q τ^{d−1}] / (Q² s^{d−1}) ds and its derivative.
    pub fn green_hminus(&self, f: &[f64]) -> Result<GridFn> {
        self.check(f)?;
        Ok(green_minus_raw(&self.grid, self.dim, &self.q, f))
    }

    /// N+(f) = sup |f/Q|.
    pub fn norm_plus(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.q.v).map(|(f, q)| (f / q).abs()).fold(0.0, f64::max)
    }

    /// N−(f) = sup |(1+r)^{d−1} Q f|.
    pub fn norm_minus(&self, f: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| ((1.0 + self.r[i]).powi(self.dim as i32 - 1) * self.q.v[i] * f[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Value at node 0 of a smooth function sampled at nodes 1..=k of a uniform grid.
fn extrapolate_to_origin(v: &[f64]) -> f64 {
    let xs: Vec<f64> = (1..=v.len()).map(|k| k as f64).collect();
    let w = quad::fd_weights(0.0, &xs, 0);
    w.iter().zip(v).map(|(w, v)| w * v).sum()
}

fn green_minus_raw(grid: &UniformGrid, dim: u32, q: &GridFn, f: &[f64]) -> GridFn {
    let n = f.len();
    let r = grid.nodes();
    let e = dim as i32 - 1;
    let g: Vec<f64> = (0..n).map(|i| f[i] * q.v[i]).collect();
    let inner = quad::cumulative_weighted(grid, &g, dim - 1);
    // inner ~ f(0)Q(0) s^d/d near 0, so the kernel vanishes at the origin.
    let k: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else { inner[i] / (q.v[i] * q.v[i] * r[i].powi(e)) }).collect();
    let outer = quad::cumulative(grid, &k);
    let mut h = GridFn::zeros(n);
    for i in 0..n {
        h.v[i] = -q.v[i] * outer[i];
        h.d[i] = -q.d[i] * outer[i] - k[i] * q.v[i];
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorParams {
    pub b: f64,
    pub sigma: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteriorSolution {
    pub params: InteriorParams,
    pub dim: u32,
    pub p: f64,
    pub r: Vec<f64>,
    pub phi_plus: GridFn,
    pub phi_minus: GridFn,
    pub psi: Vec<Complex64>,
    pub dpsi: Vec<Complex64>,
    /// Relative sup-norm change per iteration.
    pub history: Vec<f64>,
    pub tol: f64,
}

impl InteriorSolution {
    /// P and P′ at r_K.
    pub fn boundary(&self) -> BoundaryState {
        let i = self.r.len() - 1;
        BoundaryState { r: self.r[i], p: self.psi[i], pd: self.dpsi[i] }
    }

    /// Largest observed ratio of successive deltas from the third iteration on.
    pub fn contraction_ratio(&self) -> f64 {
        self.history.windows(2).skip(1).map(|w| w[1] / w[0]).filter(|x| x.is_finite()).fold(0.0, f64::max)
    }

    /// Sup of |P'' + (d−1)/r P' + (b²r²/4 − 1 − ibσ)P + |P|^{p−1}P| over interior
    /// nodes relative to sup|P|, with P'' by differencing P'.
    pub fn equation_residual(&self) -> f64 {
        let n = self.r.len();
        let grid = UniformGrid::new(0.0, self.r[n - 1], n - 1);
        let re: Vec<f64> = self.dpsi.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.dpsi.iter().map(|z| z.im).collect();
        let (dre, dim_) = (quad::derivative(&grid, &re), quad::derivative(&grid, &im));
        let (b, sigma) = (self.params.b, self.params.sigma);
        let d = self.dim as f64;
        let scale = self.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (1..n)
            .map(|i| {
                let r = self.r[i];
                let p = self.psi[i];
                let pp = Complex64::new(dre[i], dim_[i]);
                let coef = Complex64::new(b * b * r * r / 4.0 - 1.0, -b * sigma);
                (pp + self.dpsi[i] * ((d - 1.0) / r) + coef * p + p * p.norm().powf(self.p - 1.0)).norm()
            })
            .fold(0.0, f64::max)
            / scale
    }
}

/// Nonlinear remainders (N+, N−) at one node for Q > 0, u = γA + φ+, v = bσB + φ−.
fn remainders(q: f64, u: f64, v: f64, p: f64) -> (f64, f64) {
    let qm = q.powf(p - 1.0);
    // |P|^{p−1} = Q^{p−1}(1 + g), with g formed without cancellation.
    let delta = (2.0 * q * u + u * u + v * v) / (q * q);
    let g = (0.5 * (p - 1.0) * delta.ln_1p()).exp_m1();
    (qm * (g * q + g * u - (p - 1.0) * u), qm * g * v)
}

/// Fixed-point iteration (φ+, φ−) ← (H+(F+), H−(F−)) from φ± = 0.
pub fn picard_interior(basis: &LinearizedBasis, params: InteriorParams, opts: PicardOptions) -> Result<InteriorSolution> {
    let InteriorParams { b, sigma, gamma } = params;
    if !(b >= 0.0 && b.is_finite() && sigma.is_finite() && gamma.is_finite()) {
        return Err(Error::Config(format!("invalid interior parameters b = {b}, σ = {sigma}, γ = {gamma}")));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::Config("Picard tolerance and iteration cap must be positive".into()));
    }
    let n = basis.len();
    let p = basis.p;
    let bs = b * sigma;
    let qmax = basis.q.v.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let mut plus = GridFn::zeros(n);
    let mut minus = GridFn::zeros(n);
    let mut history = Vec::new();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for iter in 1..=opts.max_iter {
        for i in 0..n {
            let (r, q) = (basis.r[i], basis.q.v[i]);
            let u = gamma * basis.a.v[i] + plus.v[i];
            let v = bs * basis.b.v[i] + minus.v[i];
            let (np, nm) = remainders(q, u, v, p);
            let w = b * b * r * r / 4.0;
            fp[i] = w * (q + u) + bs * v + np;
            fm[i] = -bs * u + w * v + nm;
        }
        let next_plus = basis.green_hplus(&fp)?;
        let next_minus = basis.green_hminus(&fm)?;
        let dp = sup_diff(&next_plus.v, &plus.v) / qmax;
        let im_scale = (0..n).map(|i| (bs * basis.b.v[i] + next_minus.v[i]).abs()).fold(0.0, f64::max);
        let dm = if im_scale > 0.0 { sup_diff(&next_minus.v, &minus.v) / im_scale } else { 0.0 };
        let delta = dp.max(dm);
        plus = next_plus;
        minus = next_minus;
        history.push(delta);
        if !delta.is_finite() {
            return Err(Error::Numerical(format!("Picard iterate became non-finite at step {iter}")));
        }
        if delta < opts.tol {
            return Ok(assemble(basis, params, plus, minus, history, opts.tol));
        }
        if iter >= 3 {
            let ratio = delta / history[iter - 2];
            if ratio >= 1.0 {
                return Err(Error::Contraction { iterations: iter, ratio });
            }
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: *history.last().unwrap() })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn assemble(
    basis: &LinearizedBasis,
    params: InteriorParams,
    plus: GridFn,
    minus: GridFn,
    history: Vec<f64>,
    tol: f64,
) -> InteriorSolution {
    let bs = params.b * params.sigma;
    let g = params.gamma;
    let n = basis.len();
    let psi = (0..n)
        .map(|i| Complex64::new(basis.q.v[i] + g * basis.a.v[i] + plus.v[i], bs * basis.b.v[i] + minus.v[i]))
        .collect();
    let dpsi = (0..n)
        .map(|i| Complex64::new(basis.q.d[i] + g * basis.a.d[i] + plus.d[i], bs * basis.b.d[i] + minus.d[i]))
        .collect();
    InteriorSolution {
        params,
        dim: basis.dim,
        p: basis.p,
        r: basis.r.clone(),
        phi_plus: plus,
        phi_minus: minus,
        psi,
        dpsi,
        history,
        tol,
    }
}

/// (P(r_K), P′(r_K)) of a converged solution.
pub fn interior_at_matchpoint(sol: &InteriorSolution) -> BoundaryState {
    sol.boundary()
}

struct PEquation {
    d: f64,
    p: f64,
    b: f64,
    sigma: f64,
}

impl System<4> for PEquation {
    fn rhs(&self, r: f64, y: &[f64; 4], dy: &mut [f64; 4]) {
        let u = Complex64::new(y[0], y[1]);
        let du = Complex64::new(y[2], y[3]);
        let coef = Complex64::new(self.b * self.b * r * r / 4.0 - 1.0, -self.b * self.sigma);
        let upp = -du * ((self.d - 1.0) / r) - coef * u - u * u.norm().powf(self.p - 1.0);
        *dy = [y[2], y[3], upp.re, upp.im];
    }
}

/// Direct integration of the profile equation from P(0) = P0, P′(0) = 0,
/// returning (P, P′) at each of `radii` (ascending, positive).
pub fn shoot_profile(
    dim: u32,
    p: f64,
    b: f64,
    sigma: f64,
    p0: Complex64,
    radii: &[f64],
    tol: f64,
) -> Result<Vec<BoundaryState>> {
    if dim == 0 || !(p > 1.0) || !(tol > 0.0) {
        return Err(Error::Config(format!("invalid shooting setup d = {dim}, p = {p}, tol = {tol}")));
    }
    let d = dim as f64;
    let sys = PEquation { d, p, b, sigma };
    // P'' + (d−1)/r P' → d P''(0) at the origin.
    let a2 = (Complex64::new(1.0, b * sigma) * p0 - p0 * p0.norm().powf(p - 1.0)) / (2.0 * d);
    let e = SERIES_START;
    let y0 = p0 + a2 * (e * e);
    let dy0 = a2 * (2.0 * e);
    let mut ode = Rkf78::new(Tolerances::new((tol * 1e-2).max(1e-15), 1e-300));
    ode.complex_pairs = true;
    let guard = 1e6 * p0.norm().max(1.0);
    let mut out = Vec::with_capacity(radii.len());
    let mut blowup = None;
    let end = *radii.last().ok_or_else(|| Error::Config("no output radii".into()))?;
    ode.integrate(&sys, e, [y0.re, y0.im, dy0.re, dy0.im], end, radii, |r, y, hit| {
        if hit {
            out.push(BoundaryState { r, p: Complex64::new(y[0], y[1]), pd: Complex64::new(y[2], y[3]) });
        }
        let m = y[0].hypot(y[1]);
        if !(m <= guard) {
            blowup = Some((r, m));
            return Control::Stop;
        }
        Control::Continue
    })?;
    if let Some((r, magnitude)) = blowup {
        return Err(Error::Divergence { r, magnitude });
    }
    Ok(out)
}

/// Boundary state at `r_k` from a direct shot with P(0) = P0.
pub fn shoot_interior_oracle(
    dim: u32,
    p: f64,
    b: f64,
    sigma: f64,
    p0: Complex64,
    r_k: f64,
    tol: f64,
) -> Result<BoundaryState> {
    Ok(shoot_profile(dim, p, b, sigma, p0, &[r_k], tol)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub p0: Complex64,
    pub oracle: BoundaryState,
    pub picard: BoundaryState,
    /// max(|ΔP|/|P|, |ΔP′|/|P′|) at r_K.
    pub boundary_rel: f64,
    /// Same for the imaginary parts alone, relative to |Im P| and |Im P′|.
    pub imag_rel: f64,
    /// sup over grid nodes in [r_K/2, r_K] of |ΔP| / sup|P|.
    pub sup_rel: f64,
    pub newton_steps: usize,
}

/// Chooses P0 so the direct shot matches the Picard solution at r_K/2, then
/// compares the two on [r_K/2, r_K].
pub fn cross_validate(sol: &InteriorSolution, tol: f64) -> Result<OracleComparison> {
    let n = sol.r.len();
    let mid = (n - 1) / 2;
    let InteriorParams { b, sigma, .. } = sol.params;
    let target = sol.psi[mid];
    let at_mid = |p0: Complex64| -> Result<Complex64> {
        Ok(shoot_profile(sol.dim, sol.p, b, sigma, p0, &[sol.r[mid]], tol)?[0].p - target)
    };
    let mut p0 = sol.psi[0];
    let mut g = at_mid(p0)?;
    let mut steps = 0;
    let h = 1e-7 * p0.norm();
    while steps < 8 {
        let gr = (at_mid(p0 + h)? - g) / h;
        let gi = (at_mid(p0 + Complex64::new(0.0, h))? - g) / h;
        let det = gr.re * gi.im - gi.re * gr.im;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numerical("singular Jacobian in oracle shooting".into()));
        }
        let dx = (gi.im * g.re - gi.re * g.im) / det;
        let dy = (gr.re * g.im - gr.im * g.re) / det;
        let step = Complex64::new(dx, dy);
        p0 -= step;
        g = at_mid(p0)?;
        steps += 1;
        if step.norm() <= 1e-15 * p0.norm() {
            break;
        }
    }
    let radii: Vec<f64> = sol.r[mid..].to_vec();
    let shot = shoot_profile(sol.dim, sol.p, b, sigma, p0, &radii, tol)?;
    let scale = sol.psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let sup_rel = shot.iter().zip(&sol.psi[mid..]).map(|(s, p)| (s.p - p).norm()).fold(0.0, f64::max) / scale;
    let oracle = *shot.last().unwrap();
    let picard = sol.boundary();
    let rel = |a: Complex64, c: Complex64| (a - c).norm() / c.norm();
    let rel_im = |a: f64, c: f64| if c == 0.0 { (a - c).abs() } else { ((a - c) / c).abs() };
    Ok(OracleComparison {
        p0,
        oracle,
        picard,
        boundary_rel: rel(oracle.p, picard.p).max(rel(oracle.pd, picard.pd)),
        imag_rel: rel_im(oracle.p.im, picard.p.im).max(rel_im(oracle.pd.im, picard.pd.im)),
        sup_rel,
        newton_steps: steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainders_are_second_order() {
        let (q, p) = (1.2, 5.0);
        for eps in [1e-2, 1e-3] {
            let (np, nm) = remainders(q, eps, 0.5 * eps, p);
            let exact = Complex64::new(q + eps, 0.5 * eps);
            let full = exact * exact.norm().powf(p - 1.0);
            let lin_re = q.powf(p) + p * q.powf(p - 1.0) * eps;
            let lin_im = q.powf(p - 1.0) * 0.5 * eps;
            assert!((np - (full.re - lin_re)).abs() < 1e-12);
            assert!((nm - (full.im - lin_im)).abs() < 1e-12);
            assert!(np.abs() < 20.0 * eps * eps);
        }
        assert_eq!(remainders(0.7, 0.0, 0.0, 3.0), (0.0, 0.0));
    }

    #[test]
    fn node_count() {
        assert_eq!(interior_nodes(1.5), 400);
        assert_eq!(interior_nodes(5.0), 500);
    }
}
