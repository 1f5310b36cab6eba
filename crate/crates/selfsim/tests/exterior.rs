use num_complex::Complex64;
use selfsim::error::Error;
use selfsim::exterior::{
    far_field_init, integrate_exterior, integrate_exterior_from, lambda_decompose, turning_point_phase, zeta0,
    ExteriorOptions, ExteriorParams, RegionLayout,
};

fn params(b: f64, sigma: f64, rho: f64) -> ExteriorParams {
    ExteriorParams { d: 1, p: 5.0, b, sigma, rho, nonlinear: true }
}

#[test]
fn far_field_data() {
    let pr = params(0.35, 1e-3, 0.05);
    let r = 60.0;
    let (u, du) = far_field_init(&pr, r).unwrap();
    let m = u.norm() * r.powf(0.5 - pr.sigma) / pr.rho;
    assert!((m - 1.0).abs() < 2.0 / (pr.b * r).powi(2));
    let out = (du - Complex64::i() * (pr.b * r / 2.0) * u).norm();
    assert!(out < 2.0 * pr.rho / pr.b * r.powf(-1.5 + pr.sigma));
    let zero = far_field_init(&params(0.35, 1e-3, 0.0), r).unwrap();
    assert_eq!(zero, (Complex64::default(), Complex64::default()));
    assert!(far_field_init(&params(0.35, 1e-3, 0.05), 5.0).unwrap_err().is_config());
}

#[test]
fn phase_equivariance() {
    let pr = params(0.4, 3e-3, 0.08);
    let layout = RegionLayout::new(pr.b, None).unwrap();
    let opts = ExteriorOptions::default();
    let (u, du) = far_field_init(&pr, layout.r_far).unwrap();
    let base = integrate_exterior_from(&pr, &layout, &opts, (u, du), &[]).unwrap();
    for alpha in [0.3, 2.0, -1.1] {
        let e = Complex64::from_polar(1.0, alpha);
        let rot = integrate_exterior_from(&pr, &layout, &opts, (u * e, du * e), &[]).unwrap();
        let want = base.boundary.rotate(alpha);
        assert!((rot.boundary.p - want.p).norm() <= 1e-13 * want.p.norm(), "α = {alpha}: {:e}", (rot.boundary.p - want.p).norm() / want.p.norm());
        assert!((rot.boundary.pd - want.pd).norm() <= 1e-13 * want.pd.norm());
    }
}

#[test]
fn tolerance_refinement() {
    for (b, sigma, rho) in [(0.5, 1e-2, 0.16), (0.35, 1e-3, 0.052)] {
        let pr = params(b, sigma, rho);
        let layout = RegionLayout::new(b, None).unwrap();
        let run = |tol| integrate_exterior(&pr, &layout, &ExteriorOptions { tol, ..Default::default() }, &[]).unwrap().boundary;
        let (a, c) = (run(1e-10), run(5e-11));
        assert!((a.p - c.p).norm() <= 10.0 * 5e-11 * c.p.norm(), "b = {b}: {} vs {}", a.p, c.p);
        let (lo, hi) = (run(1e-8), run(1e-11));
        assert!((lo.p - hi.p).norm() <= 1e-6 * hi.p.norm());
        assert!((lo.pd - hi.pd).norm() <= 1e-6 * hi.pd.norm());
    }
}

#[test]
fn equation_residual_at_step_midpoints() {
    let pr = params(0.35, 1e-3, 0.052);
    let layout = RegionLayout::new(pr.b, None).unwrap();
    let traj = integrate_exterior(&pr, &layout, &ExteriorOptions::default(), &[]).unwrap();
    let n = traj.radii.len();
    let mut worst = 0.0f64;
    for k in (1..n - 1).step_by(n / 40) {
        let mid = 0.5 * (traj.radii[k] + traj.radii[k + 1]);
        if mid - 0.2 < layout.r_k || mid + 0.2 > layout.r_far {
            continue;
        }
        worst = worst.max(traj.equation_residual(mid).unwrap());
    }
    assert!(worst <= 100.0 * traj.tol, "{worst}");
}

#[test]
fn lambda_coefficients_on_far_window() {
    let b = 0.35f64;
    let sigma = 1e-3;
    let rho = 0.052;
    let pr = params(b, sigma, rho);
    let r_i = b.powi(-2);
    let layout = RegionLayout::new(b, Some(12.0 * r_i)).unwrap();
    let traj = integrate_exterior(&pr, &layout, &ExteriorOptions::default(), &[]).unwrap();
    for k in 0..=20 {
        let r = r_i * 10f64.powf(k as f64 / 20.0);
        let (lp, lm) = lambda_decompose(&traj, r).unwrap();
        let bound = rho / (b * r * r);
        assert!((lp - rho).norm() <= 5.0 * bound, "r = {r}: λ+ = {lp}");
        assert!(lm.norm() <= 5.0 * bound * r.powf(sigma * 6.0), "r = {r}: λ− = {lm}");
    }
    assert!(lambda_decompose(&traj, 0.9 * r_i).is_err());
}

#[test]
fn linear_lambdas_are_nearly_constant() {
    let b = 0.35f64;
    let mut pr = params(b, 5e-3, 0.052);
    pr.nonlinear = false;
    let r_i = b.powi(-2);
    let layout = RegionLayout::new(b, Some(12.0 * r_i)).unwrap();
    let traj = integrate_exterior(&pr, &layout, &ExteriorOptions::default(), &[]).unwrap();
    let (l0, _) = lambda_decompose(&traj, 10.0 * r_i).unwrap();
    for r in [r_i, 2.0 * r_i, 4.0 * r_i] {
        let (lp, lm) = lambda_decompose(&traj, r).unwrap();
        assert!((lp - l0).norm() <= b * b * l0.norm(), "r = {r}: {lp} vs {l0}");
        assert!(lm.norm() <= b * b * l0.norm());
    }
}

#[test]
fn guard_reports_divergence() {
    let pr = params(0.35, 1e-3, 0.052);
    let layout = RegionLayout::new(pr.b, None).unwrap();
    let err = integrate_exterior(&pr, &layout, &ExteriorOptions { guard: 2.0, ..Default::default() }, &[]).unwrap_err();
    assert!(matches!(err, Error::Divergence { .. }), "{err:?}");
}

#[test]
fn zero_amplitude_gives_zero_state() {
    let pr = params(0.35, 1e-3, 0.0);
    let layout = RegionLayout::new(pr.b, None).unwrap();
    let traj = integrate_exterior(&pr, &layout, &ExteriorOptions::default(), &[]).unwrap();
    assert_eq!(traj.boundary.p, Complex64::default());
}

#[test]
fn stored_outputs_are_hit() {
    let pr = params(0.35, 1e-3, 0.052);
    let layout = RegionLayout::new(pr.b, None).unwrap();
    let want = [3.0, 10.0, 25.0];
    let traj = integrate_exterior(&pr, &layout, &ExteriorOptions::default(), &want).unwrap();
    for r in want {
        assert!(traj.radii.contains(&r));
    }
    // Re-integration from a nearby node agrees with the stored value.
    let stored = traj.state_at(10.0).unwrap();
    let near = traj.state_at(10.0 + 1e-9).unwrap();
    assert!((stored.p - near.p).norm() < 1e-7 * stored.p.norm());
}

#[test]
fn turning_point_identity() {
    for (b, expect) in [(0.4, 0.0423), (0.2, 0.0420), (0.1, 0.0418), (0.05, 0.0417)] {
        let (lhs, rhs) = turning_point_phase(b).unwrap();
        let scaled = (lhs - rhs) / b.sqrt();
        assert!(scaled.abs() <= 1.0);
        assert!((scaled - expect).abs() < 1e-4, "b = {b}: {scaled}");
    }
    assert!((zeta0() - 1.770_682_754_000_227).abs() < 1e-13);
    assert!(turning_point_phase(0.0).is_err());
}
