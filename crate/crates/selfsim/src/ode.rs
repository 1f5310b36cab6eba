//! Adaptive Runge-Kutta-Fehlberg 7(8) integrator for small fixed-size systems.
//!
//! The 8th-order solution is propagated (local extrapolation) and the 7th-order
//! companion only feeds the error estimate. Steps are clipped so that requested
//! output points are hit exactly, which keeps tabulated solutions free of
//! interpolation error.

use crate::error::{Error, Result};
use serde::Serialize;

pub trait System<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

/// Returned by observers to stop an integration early (event detection).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C: [f64; 13] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

// Lower-triangular Fehlberg tableau, row i holds a_{i,0..i}.
const A: [[f64; 12]; 13] = [
    [0.0; 12],
    [2.0 / 27.0, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.0 / 36.0, 1.0 / 12.0, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0., 0., 0., 0., 0., 0., 0.],
    [-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0, 0., 0., 0., 0., 0., 0.],
    [31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0, 0., 0., 0., 0., 0.],
    [2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0, 0., 0., 0., 0.],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.,
        0.,
        0.,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.,
        0.,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

const B8: [f64; 13] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

const ERR_WEIGHT: f64 = 41.0 / 840.0;

/// Round a step down to the grid 2^{k/8}. Step choices then depend on the
/// error estimate only through a coarse threshold, so data that differ by
/// rounding (a phase rotation, say) follow the same step sequence.
fn quantize(h: f64) -> f64 {
    if !(h > 0.0) || !h.is_finite() {
        return h;
    }
    ((8.0 * h.log2()).floor() * 0.125).exp2()
}

pub struct Rkf78 {
    pub tol: Tolerances,
    pub max_steps: usize,
    /// Steps shorter than this fraction of |t| are treated as underflow.
    pub min_step_rel: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    /// Measure errors on (y[2k], y[2k+1]) as complex moduli, so step selection
    /// is invariant under phase rotation of complex systems.
    pub complex_pairs: bool,
    pub stats: Stats,
}

impl Rkf78 {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            max_steps: 2_000_000,
            min_step_rel: 1e-12,
            initial_step: None,
            max_step: f64::INFINITY,
            complex_pairs: false,
            stats: Stats::default(),
        }
    }

    fn error_norm<const N: usize>(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut worst = 0.0f64;
        if self.complex_pairs {
            for i in (0..N).step_by(2) {
                let m = y[i].hypot(y[i + 1]).max(y_new[i].hypot(y_new[i + 1]));
                let scale = self.tol.atol + self.tol.rtol * m;
                worst = worst.max(err[i].hypot(err[i + 1]) / scale);
            }
            return worst;
        }
        for i in 0..N {
            let scale = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
            worst = worst.max(err[i].abs() / scale);
        }
        worst
    }

    fn guess_step<S: System<N>, const N: usize>(&mut self, sys: &S, t: f64, y: &[f64; N], span: f64) -> f64 {
        if let Some(h) = self.initial_step {
            return h.min(span);
        }
        let mut f0 = [0.0; N];
        sys.rhs(t, y, &mut f0);
        self.stats.evals += 1;
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for i in 0..N {
            let sc = self.tol.atol + self.tol.rtol * y[i].abs();
            d0 = d0.max(y[i].abs() / sc);
            d1 = d1.max(f0[i].abs() / sc);
        }
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).min(self.max_step)
    }

    /// One trial step; returns the 8th-order state and the scaled error.
    fn trial<S: System<N>, const N: usize>(&mut self, sys: &S, t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64) {
        let mut k = [[0.0; N]; 13];
        let mut tmp = [0.0; N];
        for s in 0..13 {
            for i in 0..N {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                tmp[i] = y[i] + h * acc;
            }
            sys.rhs(t + C[s] * h, &tmp, &mut k[s]);
        }
        self.stats.evals += 13;
        let mut y_new = [0.0; N];
        let mut err = [0.0; N];
        for i in 0..N {
            let mut acc = 0.0;
            for s in 0..13 {
                acc += B8[s] * k[s][i];
            }
            y_new[i] = y[i] + h * acc;
            err[i] = h * ERR_WEIGHT * (k[0][i] + k[10][i] - k[11][i] - k[12][i]);
        }
        let norm = self.error_norm(y, &y_new, &err);
        (y_new, norm)
    }

    /// Integrates from `t0` to `t1` (either direction).
    ///
    /// `outputs` must be ordered in the direction of integration; each one is
    /// hit exactly and reported to `observer` with the flag set. The observer
    /// also sees every other accepted step and may stop the run.
    pub fn integrate<S, F, const N: usize>(
        &mut self,
        sys: &S,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        outputs: &[f64],
        mut observer: F,
    ) -> Result<(f64, [f64; N])>
    where
        S: System<N>,
        F: FnMut(f64, &[f64; N], bool) -> Control,
    {
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let span = (t1 - t0).abs();
        let mut t = t0;
        let mut y = y0;
        if span == 0.0 {
            return Ok((t, y));
        }
        let mut out_idx = outputs.iter().position(|&o| (o - t0) * dir > 0.0).unwrap_or(outputs.len());
        let mut h = self.guess_step(sys, t, &y, span);
        let mut steps = 0usize;

        loop {
            if (t1 - t) * dir <= 0.0 {
                return Ok((t, y));
            }
            let (target, is_output) = match outputs.get(out_idx) {
                Some(&o) if (o - t1) * dir < 0.0 => (o, true),
                Some(&o) if o == t1 => (t1, true),
                _ => (t1, false),
            };
            let remaining = (target - t).abs();
            let hit = h >= remaining * (1.0 - 1e-12);
            let hs = if hit { target - t } else { dir * h };

            let (y_new, err) = self.trial(sys, t, &y, hs);
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Numerical(format!("step limit {} reached at t = {t:.6e}", self.max_steps)));
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                self.stats.rejected += 1;
                h = 0.25 * hs.abs();
            } else if err <= 1.0 {
                self.stats.accepted += 1;
                t = if hit { target } else { t + hs };
                y = y_new;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.125)).clamp(0.2, 5.0) };
                // A clipped step says nothing about the natural step size.
                h = if hit { h.max(hs.abs() * fac) } else { hs.abs() * fac };
                h = quantize(h.min(self.max_step));
                let flagged = hit && is_output;
                if flagged {
                    out_idx += 1;
                    while out_idx < outputs.len() && (outputs[out_idx] - t) * dir <= 0.0 {
                        out_idx += 1;
                    }
                }
                if observer(t, &y, flagged) == Control::Stop {
                    return Ok((t, y));
                }
                continue;
            } else {
                self.stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.125)).clamp(0.2, 1.0);
                h = quantize(hs.abs() * fac);
            }
            let floor = self.min_step_rel * t.abs().max(1e-300);
            if h < floor {
                return Err(Error::StepUnderflow { r: t, h });
            }
        }
    }
}
