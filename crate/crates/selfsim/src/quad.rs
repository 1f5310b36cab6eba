//! Quadrature, differentiation and interpolation on tabulated data.

use std::sync::OnceLock;

/// Nodes `x0 + i·h`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(x0: f64, x1: f64, n: usize) -> Self {
        Self { x0, h: (x1 - x0) / n as f64, n }
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n {
            // Avoid drift at the right end; callers rely on hitting it exactly.
            self.x0 + self.h * self.n as f64
        } else {
            self.x0 + self.h * i as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.x(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.x(self.n)
    }
}

const PANEL: usize = 6;

/// Weights for integrating over `[a, a+1]` the degree-5 interpolant through
/// nodes `0..6`, one row per offset `a = 0..5`.
fn panel_weights() -> &'static [[f64; PANEL]; PANEL - 1] {
    static W: OnceLock<[[f64; PANEL]; PANEL - 1]> = OnceLock::new();
    W.get_or_init(|| {
        let (gx, gw) = gauss_legendre(4);
        let mut out = [[0.0; PANEL]; PANEL - 1];
        for (a, row) in out.iter_mut().enumerate() {
            for (k, w) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (x, wt) in gx.iter().zip(&gw) {
                    let t = a as f64 + 0.5 * (x + 1.0);
                    let mut l = 1.0;
                    for m in 0..PANEL {
                        if m != k {
                            l *= (t - m as f64) / (k as f64 - m as f64);
                        }
                    }
                    acc += 0.5 * wt * l;
                }
                *w = acc;
            }
        }
        out
    })
}

fn interval_integral(f: &[f64], h: f64, i: usize) -> f64 {
    let n = f.len() - 1;
    let start = i.saturating_sub(2).min(n - (PANEL - 1));
    let w = &panel_weights()[i - start];
    let mut acc = 0.0;
    for k in 0..PANEL {
        acc += w[k] * f[start + k];
    }
    h * acc
}

/// Running integral `∫_{x0}^{x_i} f` for every node (6th-order accurate).
pub fn cumulative(grid: &UniformGrid, f: &[f64]) -> Vec<f64> {
    assert_eq!(f.len(), grid.len(), "grid/sample length mismatch");
    assert!(grid.n >= PANEL - 1, "need at least {} intervals", PANEL - 1);
    let mut out = vec![0.0; f.len()];
    for i in 0..grid.n {
        out[i + 1] = out[i] + interval_integral(f, grid.h, i);
    }
    out
}

/// Running integral `∫_{x_i}^{x_n} f` for every node.
pub fn cumulative_to_end(grid: &UniformGrid, f: &[f64]) -> Vec<f64> {
    assert_eq!(f.len(), grid.len(), "grid/sample length mismatch");
    assert!(grid.n >= PANEL - 1, "need at least {} intervals", PANEL - 1);
    let mut out = vec![0.0; f.len()];
    for i in (0..grid.n).rev() {
        out[i] = out[i + 1] + interval_integral(f, grid.h, i);
    }
    out
}

/// Running integral `∫_0^{x_i} s^k g(s) ds` on a grid starting at 0. On the
/// first panel the weight s^k is integrated exactly against the interpolant of
/// g, so values near the origin keep their relative accuracy.
pub fn cumulative_weighted(grid: &UniformGrid, g: &[f64], k: u32) -> Vec<f64> {
    assert_eq!(grid.x0, 0.0, "weighted integral needs a grid starting at 0");
    let f: Vec<f64> = (0..g.len()).map(|i| g[i] * grid.x(i).powi(k as i32)).collect();
    let mut out = cumulative(grid, &f);
    if k == 0 {
        return out;
    }
    // Monomial coefficients of the Lagrange basis on nodes 0..PANEL.
    let mut coef = [[0.0; PANEL]; PANEL];
    for (j, row) in coef.iter_mut().enumerate() {
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for m in 0..PANEL {
            if m == j {
                continue;
            }
            let mut next = vec![0.0; poly.len() + 1];
            for (e, c) in poly.iter().enumerate() {
                next[e + 1] += c;
                next[e] -= c * m as f64;
            }
            poly = next;
            denom *= j as f64 - m as f64;
        }
        for (e, c) in poly.iter().enumerate() {
            row[e] = c / denom;
        }
    }
    let scale = grid.h.powi(k as i32 + 1);
    let top = (PANEL - 1).min(grid.n);
    for (i, o) in out.iter_mut().enumerate().take(top + 1).skip(1) {
        let x = i as f64;
        let mut acc = 0.0;
        for j in 0..PANEL {
            let w: f64 = (0..PANEL).map(|e| coef[j][e] * x.powi((k as usize + e + 1) as i32) / (k as usize + e + 1) as f64).sum();
            acc += w * g[j];
        }
        *o = scale * acc;
    }
    let offset = out[top] - cumulative(grid, &f)[top];
    for o in out.iter_mut().skip(top + 1) {
        *o += offset;
    }
    out
}

pub fn integrate(grid: &UniformGrid, f: &[f64]) -> f64 {
    *cumulative(grid, f).last().unwrap()
}

/// Integral and an error estimate from repeating the rule on every other node.
/// An odd trailing interval is taken from the fine rule in both passes.
pub fn integrate_with_error(grid: &UniformGrid, f: &[f64]) -> (f64, f64) {
    let run = cumulative(grid, f);
    let fine = run[grid.n];
    let half = grid.n / 2;
    if half < PANEL - 1 {
        return (fine, fine.abs());
    }
    let coarse_grid = UniformGrid::new(grid.x0, grid.x(2 * half), half);
    let coarse_f: Vec<f64> = (0..=half).map(|i| f[2 * i]).collect();
    let coarse = integrate(&coarse_grid, &coarse_f) + (fine - run[2 * half]);
    (fine, (fine - coarse).abs())
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre quadrature of `f` on `[a, b]`.
pub fn gauss_composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        for (x, w) in gx.iter().zip(&gw) {
            acc += w * f(lo + 0.5 * h * (x + 1.0));
        }
    }
    0.5 * h * acc
}

/// Finite-difference weights for the `m`-th derivative at `x0` from nodes `xs`
/// (Fornberg's recursion).
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First derivative of tabulated values with a 7-point (6th-order) stencil,
/// shifted one-sided near the ends.
pub fn derivative(grid: &UniformGrid, f: &[f64]) -> Vec<f64> {
    const W: usize = 7;
    assert!(grid.len() >= W);
    let n = grid.n;
    let mut out = vec![0.0; f.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let start = i.saturating_sub(W / 2).min(n + 1 - W);
        let offsets: Vec<f64> = (0..W).map(|k| (start + k) as f64 - i as f64).collect();
        let w = fd_weights(0.0, &offsets, 1);
        *o = (0..W).map(|k| w[k] * f[start + k]).sum::<f64>() / grid.h;
    }
    out
}

/// Quintic Hermite interpolation on `[x0, x1]` from value, first and second
/// derivative at both ends. Returns value and first derivative.
pub fn hermite5(x0: f64, x1: f64, a: [f64; 3], b: [f64; 3], x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let d3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let v = h0 * a[0] + h1 * h * a[1] + h2 * h * h * a[2] + h3 * h * h * b[2] + h4 * h * b[1] + h5 * b[0];
    let dv = (d0 * a[0] + d1 * h * a[1] + d2 * h * h * a[2] + d3 * h * h * b[2] + d4 * h * b[1] + d5 * b[0]) / h;
    (v, dv)
}

/// Least-squares fit of `y ≈ α + β/x`; returns `(α, β)`.
pub fn fit_inverse_linear(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mut su, mut sy, mut suu, mut suy) = (0.0, 0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let u = 1.0 / xi;
        su += u;
        sy += yi;
        suu += u * u;
        suy += u * yi;
    }
    let det = n * suu - su * su;
    let beta = (n * suy - su * sy) / det;
    let alpha = (sy - beta * su) / n;
    (alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_cumulative_keeps_relative_accuracy_near_origin() {
        let g = UniformGrid::new(0.0, 2.0, 400);
        let f: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
        let out = cumulative_weighted(&g, &f, 2);
        for i in [1, 2, 3, 7, 400] {
            let x = g.x(i);
            // Closed form cancels badly near 0; use the series there.
            let exact = if x < 0.1 {
                x.powi(3) / 3.0 - x.powi(5) / 10.0 + x.powi(7) / 168.0 - x.powi(9) / 6480.0
            } else {
                2.0 * x * x.cos() + (x * x - 2.0) * x.sin()
            };
            assert!(((out[i] - exact) / exact).abs() < 1e-12, "i = {i}: {}", out[i] / exact - 1.0);
        }
    }

    #[test]
    fn cumulative_is_sixth_order() {
        let err = |n: usize| {
            let g = UniformGrid::new(0.0, 2.0, n);
            let f: Vec<f64> = g.nodes().iter().map(|x| (3.0 * x).exp()).collect();
            let c = cumulative(&g, &f);
            (c[n] - ((6f64).exp() - 1.0) / 3.0).abs()
        };
        let ratio = err(40) / err(80);
        assert!(ratio > 50.0, "ratio {ratio}");
    }

    #[test]
    fn cumulative_directions_agree() {
        let g = UniformGrid::new(0.0, 1.0, 20);
        let f: Vec<f64> = g.nodes().iter().map(|x| x.sin()).collect();
        let fwd = cumulative(&g, &f);
        let bwd = cumulative_to_end(&g, &f);
        for i in 0..=20 {
            assert!((fwd[i] + bwd[i] - fwd[20]).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_of_smooth_function() {
        let g = UniformGrid::new(0.0, 1.0, 100);
        let f: Vec<f64> = g.nodes().iter().map(|x| (2.0 * x).sin()).collect();
        let d = derivative(&g, &f);
        for (i, x) in g.nodes().iter().enumerate() {
            assert!((d[i] - 2.0 * (2.0 * x).cos()).abs() < 1e-10, "at {x}");
        }
    }

    #[test]
    fn hermite_reproduces_quintic() {
        let f = |x: f64| [x.powi(5) - x, 5.0 * x.powi(4) - 1.0, 20.0 * x.powi(3)];
        let (v, dv) = hermite5(0.3, 0.9, f(0.3), f(0.9), 0.71);
        assert!((v - f(0.71)[0]).abs() < 1e-14);
        assert!((dv - f(0.71)[1]).abs() < 1e-13);
    }

    #[test]
    fn inverse_linear_fit_recovers_model() {
        let x: Vec<f64> = (10..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| 2.5 * (1.0 - 0.3 / x)).collect();
        let (a, b) = fit_inverse_linear(&x, &y);
        assert!((a - 2.5).abs() < 1e-12);
        assert!((b + 0.75).abs() < 1e-11);
    }
}
