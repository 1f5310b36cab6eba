use num_complex::Complex64;
use proptest::prelude::*;
use selfsim::farfield::{defect, Branch, FarFieldBasis};

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn wronskian_law() {
    // σ values consistent with each b through the eigenvalue relation (κ²/N_c = 8/π).
    for b in [0.2f64, 0.35, 0.5] {
        let sigma = 8.0 / std::f64::consts::PI / b * (-std::f64::consts::PI / b).exp();
        let basis = FarFieldBasis::new(b, sigma).unwrap();
        // At b = 0.5 the radius b⁻² sits on the turning point, so it is lifted to 4/b.
        for r in [4.0 / b, b.powi(-2).max(4.0 / b), 10.0 * b.powi(-2)] {
            let w = basis.wronskian(r).unwrap();
            let exact = basis.wronskian_exact(r);
            assert!((w - exact).norm() <= 1e-8 * exact.norm(), "b = {b}, r = {r}: {w} vs {exact}");
        }
    }
}

#[test]
fn defect_decays_like_inverse_square() {
    for b in [0.2, 0.35, 0.5] {
        let basis = FarFieldBasis::new(b, 1e-3).unwrap();
        for branch in [Branch::Plus, Branch::Minus] {
            let (mut xs, mut ys) = (vec![], vec![]);
            let mut s = 8.0f64;
            while s <= 100.0 {
                let f = basis.wkb_residual(s / b, branch).unwrap();
                // The stencil value agrees with the closed-form defect.
                let exact = defect(s, 1e-3, branch).abs();
                assert!((f - exact).abs() <= 1e-2 * exact, "b = {b}, s = {s}: {f} vs {exact}");
                xs.push(s.ln());
                ys.push(f.ln());
                s *= 1.25;
            }
            let k = slope(&xs, &ys);
            assert!((-2.3..=-1.7).contains(&k), "b = {b}: slope {k}");
        }
    }
}

#[test]
fn defect_is_bounded_on_long_range() {
    let mut s = 4.0;
    while s <= 1000.0 {
        for branch in [Branch::Plus, Branch::Minus] {
            let f = defect(s, 1e-2, branch);
            assert!(f.is_finite() && f.abs() * s * s < 2.0);
        }
        s *= 1.1;
    }
    // Switching σ off barely moves the defect.
    let (f0, f1) = (defect(10.0, 0.0, Branch::Plus), defect(10.0, 1e-3, Branch::Plus));
    assert!((f0 - f1).abs() < 0.1 * f0.abs());
}

#[test]
fn decay_exponents() {
    // The window starts at s = 1/b, so the (s²−4)^{-1/4} correction biases the
    // fit by about 1/s²; b = 0.05 puts that bias below 1e-3. At b = 0.35 the
    // same window reaches down to s ≈ 3 and only the looser bound holds.
    for (b, tol) in [(0.05f64, 1e-3), (0.35, 2e-2)] {
        check_decay(b, 0.02, tol);
    }
}

fn check_decay(b: f64, sigma: f64, tol: f64) {
    let basis = FarFieldBasis::new(b, sigma).unwrap();
    for branch in [Branch::Plus, Branch::Minus] {
        let (mut xs, mut ys) = (vec![], vec![]);
        let r0 = b.powi(-2);
        for k in 0..=40 {
            let r = r0 * 100f64.powf(k as f64 / 40.0);
            xs.push(r.ln());
            ys.push(basis.v_pm(r, branch).unwrap().0.norm().ln());
        }
        let k = slope(&xs, &ys);
        let expect = -0.5 + branch.sign() * sigma;
        assert!((k - expect).abs() < tol, "b = {b}, {branch:?}: {k} vs {expect}");
    }
}

#[test]
fn modulus_and_outgoing_derivative_at_far_radius() {
    let b = 0.3f64;
    let sigma = 5e-3;
    let basis = FarFieldBasis::new(b, sigma).unwrap();
    let r = b.powi(-2);
    let (v, dv) = basis.v_pm(r, Branch::Plus).unwrap();
    let m = v.norm() * r.powf(0.5 - sigma);
    assert!((m - 1.0).abs() < 2.0 / (b * r).powi(2), "{m}");
    let out = (dv - Complex64::i() * (b * r / 2.0) * v).norm();
    assert!(out < 2.0 / (b * r) * v.norm(), "{out}");
}

#[test]
fn conjugate_symmetry_without_sigma() {
    let basis = FarFieldBasis::new(0.4, 0.0).unwrap();
    for r in [6.0, 11.0, 40.0] {
        let (vp, dvp) = basis.v_pm(r, Branch::Plus).unwrap();
        let (vm, dvm) = basis.v_pm(r, Branch::Minus).unwrap();
        assert!((vp.conj() - vm).norm() < 1e-15 * vm.norm());
        assert!((dvp.conj() - dvm).norm() < 1e-14 * dvm.norm());
    }
}

#[test]
fn below_floor_is_rejected() {
    let basis = FarFieldBasis::new(0.4, 1e-3).unwrap();
    assert!(basis.v_pm(5.0, Branch::Plus).is_err());
    assert!(basis.v_pm(2.05 / 0.4, Branch::Plus).is_ok());
}

proptest! {
    #[test]
    fn branch_flip_is_conjugation_with_negated_sigma(b in 0.1f64..0.6, sigma in 0.0f64..0.05, x in 2.2f64..50.0) {
        let r = x / b;
        let plus = FarFieldBasis::new(b, sigma).unwrap().v_pm(r, Branch::Plus).unwrap();
        let minus = FarFieldBasis::new(b, -sigma).unwrap().v_pm(r, Branch::Minus).unwrap();
        prop_assert!((plus.0.conj() - minus.0).norm() <= 1e-15 * plus.0.norm());
        prop_assert!((plus.1.conj() - minus.1).norm() <= 1e-15 * plus.1.norm());
    }
}
