use proptest::prelude::*;
use selfsim::airy::{airy_bounds_check, airy_eval, omega};
use std::f64::consts::PI;

// (s, Ai, Ai', Bi, Bi') computed independently with 30-digit mpmath.
const REFERENCE: [(f64, f64, f64, f64, f64); 10] = [
    (-50.0, -0.16188142361232092, 0.96898983727674909, -0.13715015212882007, -1.1453617002654776),
    (-20.0, -0.17640612707798469, 0.89286285673647124, -0.20013930932265135, -0.79142903383953648),
    (-7.5, 0.32177571638064788, 0.3188095066985546, -0.11246348507649081, 0.87780228154576092),
    (-3.0, -0.37881429367765807, 0.31458376921659881, -0.19828962637492654, -0.67561122268525854),
    (0.0, 0.35502805388781724, -0.2588194037928068, 0.61492662744600074, 0.44828835735382636),
    (1.5, 0.07174949700810541, -0.097382012842301319, 1.878941503747895, 1.8862122548481655),
    (4.2, 0.00062749586830916314, -0.0013210006638876861, 124.03800986864215, 246.14599171178569),
    (8.0, 4.6922076160992316e-8, -1.3414392979067866e-7, 1199586.0041244599, 3354342.3127445389),
    (15.0, 2.1649625207379923e-18, -8.4205679540177728e-18, 18982099567493590.0, 73197492034070105.0),
    (35.0, 1.2981999731218427e-61, -7.6894996836291995e-61, 2.0722688390069165e+59, 1.2244860857772324e+60),
];

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * b.abs() + abs
}

#[test]
fn matches_reference_values() {
    for (s, ai, aid, bi, bid) in REFERENCE {
        let p = airy_eval(s).unwrap();
        // Oscillatory side: relative accuracy measured against the envelope.
        let env = if s < 0.0 { 1.0 } else { 0.0 };
        assert!(close(p.ai, ai, 1e-10, 1e-12 * env), "Ai({s}) = {} vs {ai}", p.ai);
        assert!(close(p.ai_d, aid, 1e-10, 1e-12 * env * s.abs().sqrt()), "Ai'({s})");
        assert!(close(p.bb.re / PI, bi, 1e-10, 1e-12 * env), "Bi({s})");
        assert!(close(p.bb_d.re / PI, bid, 1e-10, 1e-12 * env * s.abs().sqrt()), "Bi'({s})");
    }
}

#[test]
fn wronskian_and_imaginary_part_on_dense_samples() {
    for k in 0..1000 {
        let s = -40.0 + 70.0 * k as f64 / 999.0;
        let p = airy_eval(s).unwrap();
        let w = p.ai * p.bb_d - p.ai_d * p.bb;
        assert!((w.re - 1.0).abs() <= 1e-9 && w.im.abs() <= 1e-9, "W at {s}: {w}");
        if p.ai.abs() > 1e-12 {
            assert!((p.bb.im - PI * p.ai).abs() <= 1e-9 * (PI * p.ai).abs(), "Im B at {s}");
        }
        let cross = p.ai * p.bb_d.im - p.ai_d * p.bb.im;
        assert!(cross.abs() <= 1e-9, "Im-part Wronskian at {s}");
    }
}

#[test]
fn second_difference_satisfies_airy_equation() {
    let h = 1e-3;
    // Beyond |s| ≈ 10 the O(h²) truncation of the stencil itself exceeds 1e-6.
    let mut s = -10.0;
    while s < 10.0 {
        let f = |x: f64| airy_eval(x).unwrap().ai;
        let second = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
        let scale = 1.0f64.max(f(s).abs() * s.abs());
        assert!((second - s * f(s)).abs() <= 1e-6 * scale, "at {s}");
        s += 0.37;
    }
}

#[test]
fn outside_range_is_rejected() {
    assert!(airy_eval(-60.5).is_err());
    assert!(airy_eval(40.5).is_err());
}

#[test]
fn omega_examples() {
    assert_eq!(omega(-5.0).unwrap(), 1.0);
    assert_eq!(omega(0.0).unwrap(), 1.0);
    // exp(16/3) = 207.12724888983...
    assert!((omega(4.0).unwrap() - 207.127_248_889_834_5).abs() < 1e-9);
    assert!(omega(1e4).is_err());
}

#[test]
fn bounds_ratios_are_order_one() {
    for s in [-20.0, 10.0] {
        let b = airy_bounds_check(s).unwrap();
        for r in [b.ai, b.bb, b.product] {
            assert!((0.1..=10.0).contains(&r), "s = {s}: {b:?}");
        }
    }
    let b = airy_bounds_check(0.0).unwrap();
    assert!(b.ai > 0.0 && b.bb > 0.0 && b.product > 0.0);
}

proptest! {
    #[test]
    fn wronskian_holds_anywhere(s in -60.0f64..40.0) {
        let p = airy_eval(s).unwrap();
        let w = p.ai * p.bb_d - p.ai_d * p.bb;
        prop_assert!((w - 1.0).norm() < 1e-9);
    }
}
