//! WKB profiles V± for V'' + (b²r²/4 − 1 − ibσ)V ≈ 0 beyond the turning point r = 2/b.
//!
//! V± = e^{±i(1+2 ln 2b)/(2b)} b^{1/2} (2b)^{∓σ} e^{±iθ0(br)/b} e^{θ1±(br)}, which behaves like
//! r^{-1/2±σ} e^{±ibr²/4} e^{∓i ln r / b} as r → ∞.

use crate::error::{Error, Result};
use crate::quad;
use num_complex::Complex64;
use serde::Serialize;

/// Practical floor for the basis, in units of 1/b.
pub const DOMAIN_FLOOR: f64 = 2.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// θ0(s) = (s/4)√(s²−4) − ln(√(s²−4) + s).
pub fn theta0(s: f64) -> Result<f64> {
    if !(s >= 2.0) {
        return Err(Error::Domain(format!("θ0 needs s ≥ 2, got {s}")));
    }
    let q = (s * s - 4.0).sqrt();
    Ok(s / 4.0 * q - (q + s).ln())
}

/// θ1±(s) = −¼ ln(s²−4) ± σ ln(√(s²−4) + s).
pub fn theta1(s: f64, sigma: f64, branch: Branch) -> Result<f64> {
    if !(s > 2.0) {
        return Err(Error::Domain(format!("θ1 needs s > 2, got {s}")));
    }
    let q2 = s * s - 4.0;
    Ok(-0.25 * q2.ln() + branch.sign() * sigma * (q2.sqrt() + s).ln())
}

fn theta1_d(s: f64, sigma: f64, branch: Branch) -> f64 {
    let q2 = s * s - 4.0;
    -s / (2.0 * q2) + branch.sign() * sigma / q2.sqrt()
}

fn theta1_dd(s: f64, sigma: f64, branch: Branch) -> f64 {
    let q2 = s * s - 4.0;
    (s * s + 4.0) / (2.0 * q2 * q2) - branch.sign() * sigma * s / (q2 * q2.sqrt())
}

/// f±(s) = (θ1±')² + θ1±'', the defect left by the two-term phase.
pub fn defect(s: f64, sigma: f64, branch: Branch) -> f64 {
    let t = theta1_d(s, sigma, branch);
    t * t + theta1_dd(s, sigma, branch)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FarFieldBasis {
    pub b: f64,
    pub sigma: f64,
}

impl FarFieldBasis {
    pub fn new(b: f64, sigma: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Config(format!("b = {b} must lie in (0, 1)")));
        }
        if !sigma.is_finite() {
            return Err(Error::Config(format!("σ = {sigma} is not finite")));
        }
        Ok(Self { b, sigma })
    }

    pub fn floor(&self) -> f64 {
        DOMAIN_FLOOR / self.b
    }

    /// V± and V±′ at r.
    pub fn v_pm(&self, r: f64, branch: Branch) -> Result<(Complex64, Complex64)> {
        if !(r >= self.floor()) {
            return Err(Error::Domain(format!(
                "WKB basis needs r ≥ {:.6} (2.05/b), got {r}",
                self.floor()
            )));
        }
        let (b, sigma) = (self.b, self.sigma);
        let sg = branch.sign();
        let s = b * r;
        // e^{θ1} = (s²−4)^{-1/4}(√(s²−4)+s)^{±σ}; combine with the constant factors in log form.
        let q = (s * s - 4.0).sqrt();
        let log_mod = 0.5 * b.ln() - sg * sigma * (2.0 * b).ln() - 0.5 * q.ln() + sg * sigma * (q + s).ln();
        // Phase θ0(s)/b + (1 + 2 ln 2b)/(2b), regrouped so the large pieces cancel early:
        // s q/(4b) − [ln((q+s)/(2b)) − ½]/b.
        let phase = s * q / (4.0 * b) - (((q + s) / (2.0 * b)).ln() - 0.5) / b;
        let v = Complex64::from_polar(log_mod.exp(), sg * phase);
        let dv = v * Complex64::new(b * theta1_d(s, sigma, branch), sg * 0.5 * q);
        Ok((v, dv))
    }

    /// W(V+, V−) = V+ V−′ − V+′ V−.
    pub fn wronskian(&self, r: f64) -> Result<Complex64> {
        let (vp, dvp) = self.v_pm(r, Branch::Plus)?;
        let (vm, dvm) = self.v_pm(r, Branch::Minus)?;
        Ok(vp * dvm - dvp * vm)
    }

    /// −ib − 2b²σ/(b²r² − 4).
    pub fn wronskian_exact(&self, r: f64) -> Complex64 {
        let b = self.b;
        Complex64::new(-2.0 * b * b * self.sigma / (b * b * r * r - 4.0), -b)
    }

    /// |V″ + (b²r²/4 − 1 − ibσ)V| / (b²|V|), with V″ from a 10th-order stencil on V′.
    pub fn wkb_residual(&self, r: f64, branch: Branch) -> Result<f64> {
        let b = self.b;
        if r < 4.0 / b {
            return Err(Error::Domain(format!("residual check needs r ≥ 4/b, got {r}")));
        }
        // Local wavenumber is about br/2. A wide step keeps rounding in the
        // (large) phase from swamping the O(b²s⁻²) defect.
        let h = (0.3 / (b * r)).min(0.05);
        let offsets: Vec<f64> = (-5..=5).map(|k| k as f64 * h).collect();
        let w = quad::fd_weights(0.0, &offsets, 1);
        let mut vpp = Complex64::new(0.0, 0.0);
        for (x, wk) in offsets.iter().zip(&w) {
            vpp += self.v_pm(r + x, branch)?.1 * *wk;
        }
        let (v, _) = self.v_pm(r, branch)?;
        let coef = Complex64::new(b * b * r * r / 4.0 - 1.0, -b * self.sigma);
        Ok((vpp + coef * v).norm() / (b * b * v.norm()))
    }
}
