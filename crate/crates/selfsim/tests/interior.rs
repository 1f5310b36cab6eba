use num_complex::Complex64;
use selfsim::error::Error;
use selfsim::ground_state::{solve_ground_state, GroundState};
use selfsim::interior::{
    basis_constants, build_basis, cross_validate, interior_at_matchpoint, picard_interior, shoot_interior_oracle,
    GridFn, InteriorParams, LinearizedBasis, PicardOptions,
};

fn basis(d: u32, p: f64, b: f64) -> (GroundState, LinearizedBasis) {
    let gs = solve_ground_state(d, p, 1e-12).unwrap();
    let consts = basis_constants(&gs).unwrap();
    let basis = build_basis(&gs, consts, b.powf(-0.5)).unwrap();
    (gs, basis)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn test_functions(basis: &LinearizedBasis) -> Vec<Vec<f64>> {
    let r = &basis.r;
    let q = &basis.q.v;
    let p = basis.p;
    vec![
        q.iter().map(|q| q.powf(p)).collect(),
        r.iter().zip(q).map(|(r, q)| r * q).collect(),
        q.clone(),
        r.iter().zip(q).map(|(r, q)| 0.03 * r * r * q).collect(),
        r.iter().map(|r| 1.0 / (1.0 + r * r)).collect(),
    ]
}

#[test]
fn green_operators_invert_linearized_operators() {
    for (d, p) in [(1, 5.0), (3, 7.0 / 3.0), (2, 3.0)] {
        let (_, basis) = basis(d, p, 0.35);
        for f in test_functions(&basis) {
            let hp = basis.green_hplus(&f).unwrap();
            let lp = basis.apply_lplus(&hp).unwrap();
            let hm = basis.green_hminus(&f).unwrap();
            let lm = basis.apply_lminus(&hm).unwrap();
            let scale = sup(&f);
            let ep = sup(&lp.iter().zip(&f).map(|(a, b)| a - b).collect::<Vec<_>>()) / scale;
            let em = sup(&lm.iter().zip(&f).map(|(a, b)| a - b).collect::<Vec<_>>()) / scale;
            assert!(ep <= 1e-6 && em <= 1e-6, "d = {d}: L+H+ {ep:e}, L−H− {em:e}");
        }
        let zero = vec![0.0; basis.len()];
        assert!(basis.green_hplus(&zero).unwrap().v.iter().all(|v| *v == 0.0));
        assert!(basis.green_hminus(&zero).unwrap().v.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn kappa_b_identity() {
    for (d, p) in [(1, 5.0), (1, 3.0), (2, 3.0), (3, 7.0 / 3.0)] {
        let gs = solve_ground_state(d, p, 1e-12).unwrap();
        let c = basis_constants(&gs).unwrap();
        let ratio = c.kappa_b * 2.0 * gs.kappa / gs.n_c;
        assert!((ratio - 1.0).abs() <= 1e-5, "d = {d}, p = {p}: {ratio}");
        assert!(c.kappa_b > 0.0 && c.kappa_a != 0.0);
    }
}

#[test]
fn wronskian_normalisation() {
    for (d, p) in [(1, 5.0), (3, 7.0 / 3.0), (2, 3.0)] {
        let (_, basis) = basis(d, p, 0.3);
        let w = basis.wronskian_defect();
        assert!(w <= 1e-7, "d = {d}: {w:e}");
    }
}

#[test]
fn special_solutions_solve_their_equations() {
    for (d, p) in [(1, 5.0), (3, 7.0 / 3.0)] {
        let (_, basis) = basis(d, p, 0.35);
        assert!(sup(&basis.apply_lminus(&basis.q).unwrap()) <= 1e-8);
        assert!(sup(&basis.apply_lplus(&basis.a).unwrap()) <= 1e-7);
        // L−B = −Q.
        let lb = basis.apply_lminus(&basis.b).unwrap();
        assert!(sup(&lb.iter().zip(&basis.q.v).map(|(a, q)| a + q).collect::<Vec<_>>()) <= 1e-7);
        assert_eq!((basis.a.v[0], basis.a.d[0], basis.b.v[0], basis.b.d[0]), (1.0, 0.0, 0.0, 0.0));
        // H−(Q) = −B.
        let h = basis.green_hminus(&basis.q.v).unwrap();
        let dev = sup(&h.v.iter().zip(&basis.b.v).map(|(h, b)| h + b).collect::<Vec<_>>());
        assert!(dev <= 1e-8 * sup(&basis.b.v));
        // Linearity of L+.
        let twice = GridFn { v: basis.a.v.iter().map(|v| 2.0 * v).collect(), d: basis.a.d.iter().map(|v| 2.0 * v).collect() };
        let (l1, l2) = (basis.apply_lplus(&basis.a).unwrap(), basis.apply_lplus(&twice).unwrap());
        assert!(l1.iter().zip(&l2).all(|(a, b)| (2.0 * a - b).abs() <= 1e-14));
    }
}

#[test]
fn one_dimensional_decaying_solution_is_scaled_derivative_of_q() {
    let (gs, basis) = basis(1, 5.0, 0.35);
    let qpp0 = gs.second_derivative(0.0, gs.q0(), 0.0);
    for i in 0..basis.len() {
        let want = basis.q.d[i] / qpp0;
        assert!((basis.dec.v[i] - want).abs() <= 1e-9, "r = {}: {} vs {want}", basis.r[i], basis.dec.v[i]);
    }
    // D = r(1 + O(r)) near the origin.
    assert!((basis.dec.v[1] / basis.r[1] - 1.0).abs() < 1e-3);
}

#[test]
fn mismatched_grid_is_a_config_error() {
    let (_, basis) = basis(1, 5.0, 0.35);
    let err = basis.green_hplus(&[1.0, 2.0]).unwrap_err();
    assert!(err.is_config());
    assert!(basis.apply_lplus(&GridFn::zeros(3)).unwrap_err().is_config());
}

#[test]
fn trivial_parameters_give_the_ground_state() {
    let (_, basis) = basis(1, 5.0, 0.35);
    let sol = picard_interior(&basis, InteriorParams { b: 0.0, sigma: 0.0, gamma: 0.0 }, PicardOptions::default()).unwrap();
    assert!(sol.phi_plus.v.iter().chain(&sol.phi_minus.v).all(|v| *v == 0.0));
    let o = shoot_interior_oracle(1, 5.0, 0.0, 0.0, Complex64::new(basis.q.v[0], 0.0), basis.r_k, 1e-12).unwrap();
    let qk = *basis.q.v.last().unwrap();
    assert!((o.p - qk).norm() <= 1e-10 * qk);
}

#[test]
fn picard_agrees_with_direct_shooting() {
    // b near the σ = 1e-3 law, γ on the scale of its box.
    let b = 0.353_713_893_088_751_4f64;
    let (_, basis) = basis(1, 5.0, b);
    let gamma_scale = b.powf(1.0 / 6.0) * (-2.0 / b.sqrt()).exp();
    for (sigma, gamma) in [(1e-3, 0.0), (1e-3, 0.3 * gamma_scale), (1e-2, -0.2 * gamma_scale)] {
        let sol = picard_interior(&basis, InteriorParams { b, sigma, gamma }, PicardOptions::default()).unwrap();
        assert!(sol.contraction_ratio() < 0.5, "{:?}", sol.history);
        assert!(sol.equation_residual() <= 1e-9, "{:e}", sol.equation_residual());
        let cmp = cross_validate(&sol, 1e-13).unwrap();
        assert!(cmp.boundary_rel <= 1e-6, "σ = {sigma}: {:e}", cmp.boundary_rel);
        assert!(cmp.sup_rel <= 1e-6);
        assert!(cmp.imag_rel <= 1e-4, "σ = {sigma}: imaginary parts {:e}", cmp.imag_rel);
    }
}

#[test]
fn boundary_values_follow_the_leading_order_laws() {
    let b = 0.3f64;
    let (gs, basis) = basis(1, 5.0, b);
    let c = basis.consts;
    let sigma = 1e-3;
    let at = |gamma| {
        interior_at_matchpoint(&picard_interior(&basis, InteriorParams { b, sigma, gamma }, PicardOptions::default()).unwrap())
    };
    let base = at(0.0);
    let re_law = gs.kappa * (-1.0 / b.sqrt()).exp();
    assert!((base.p.re / re_law - 1.0).abs() < 2.0 * b.powf(0.25), "{} vs {re_law}", base.p.re);
    let im_law = c.kappa_b * sigma * b * (1.0 / b.sqrt()).exp();
    assert!((base.p.im / im_law - 1.0).abs() < 2.0 * b.powf(0.25), "{} vs {im_law}", base.p.im);
    // Re P(r_K) is affine in γ with slope ≈ κ_A e^{1/√b}.
    let g = 1e-3;
    let (up, down) = (at(g), at(-g));
    let slope = (up.p.re - down.p.re) / (2.0 * g);
    let curvature = (up.p.re + down.p.re - 2.0 * base.p.re) / (g * g);
    let law = c.kappa_a * (1.0 / b.sqrt()).exp();
    assert!((slope / law - 1.0).abs() < 2.0 * b.powf(0.25), "{slope} vs {law}");
    assert!(curvature.abs() * g < 1e-2 * slope.abs());
}

#[test]
fn oracle_is_phase_equivariant() {
    let p0 = Complex64::new(1.3, 0.01);
    let base = shoot_interior_oracle(1, 5.0, 0.35, 1e-3, p0, 1.6, 1e-12).unwrap();
    let alpha = 0.7;
    let rot = shoot_interior_oracle(1, 5.0, 0.35, 1e-3, p0 * Complex64::from_polar(1.0, alpha), 1.6, 1e-12).unwrap();
    let want = base.rotate(alpha);
    assert!((rot.p - want.p).norm() <= 1e-12 * want.p.norm());
}

#[test]
fn contraction_failure_is_reported() {
    let (_, basis) = basis(1, 5.0, 0.35);
    let err = picard_interior(&basis, InteriorParams { b: 0.35, sigma: 1e-3, gamma: 50.0 }, PicardOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Contraction { .. } | Error::Numerical(_) | Error::NoConvergence { .. }), "{err:?}");
}
