//! Real Airy function Ai and the complex companion 𝔹 = π(Bi + i·Ai) on the real line.
//!
//! 𝔹 is normalized so that W(Ai, 𝔹) = 1 and Im 𝔹 = π·Ai. Evaluation uses
//! Maclaurin series for |s| ≤ 2, large-argument expansions for |s| ≥ 10, and in
//! between a Taylor expansion of the Airy equation about the nearest node of a
//! table spaced 1/4 apart. The table itself is filled by stepping the same
//! Taylor series from the two ends in the numerically stable direction.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const AI0: f64 = 0.355_028_053_887_817_24;
pub const AIP0: f64 = -0.258_819_403_792_806_8;

const S_MIN: f64 = -60.0;
const S_MAX: f64 = 40.0;
const SERIES_MAX: f64 = 2.0;
const ASYMPTOTIC_MIN: f64 = 10.0;
const NODE_STEP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub s: f64,
    pub ai: f64,
    pub ai_d: f64,
    pub bb: Complex64,
    pub bb_d: Complex64,
}

/// Ai, Ai', Bi, Bi' at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Quad {
    ai: f64,
    aid: f64,
    bi: f64,
    bid: f64,
}

fn maclaurin(s: f64) -> Quad {
    let s3 = s * s * s;
    // f = Σ 3^k (1/3)_k s^{3k}/(3k)!, g = Σ 3^k (2/3)_k s^{3k+1}/(3k+1)!
    let (mut f, mut g, mut fd, mut gd) = (1.0, s, 0.0, 1.0);
    let (mut tf, mut tg, mut tfd, mut tgd) = (1.0, s, s * s / 2.0, 1.0);
    fd += tfd;
    for k in 1..200 {
        let kf = k as f64;
        tf *= s3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= s3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tgd *= s3 / ((3.0 * kf - 2.0) * (3.0 * kf));
        if k > 1 {
            tfd *= s3 / ((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fd += tfd;
        }
        f += tf;
        g += tg;
        gd += tgd;
        let small = 1e-18 * (f.abs() + g.abs() + fd.abs() + gd.abs());
        if tf.abs() + tg.abs() + tfd.abs() + tgd.abs() < small {
            break;
        }
    }
    let c1 = AI0;
    let c2 = -AIP0;
    let r3 = 3f64.sqrt();
    Quad {
        ai: c1 * f - c2 * g,
        aid: c1 * fd - c2 * gd,
        bi: r3 * (c1 * f + c2 * g),
        bid: r3 * (c1 * fd + c2 * gd),
    }
}

/// Coefficients u_k, v_k of the large-argument expansions.
fn uv_coefficients() -> &'static ([f64; 40], [f64; 40]) {
    static UV: OnceLock<([f64; 40], [f64; 40])> = OnceLock::new();
    UV.get_or_init(|| {
        let mut u = [0.0; 40];
        let mut v = [0.0; 40];
        u[0] = 1.0;
        v[0] = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
        }
        (u, v)
    })
}

/// Sums Σ sign^k c_k/ζ^k with optimal truncation (stops at the smallest term).
fn asymptotic_sum(c: &[f64], zeta: f64, alternate: bool, start: usize, stride: usize) -> f64 {
    let mut acc = 0.0;
    let mut last = f64::INFINITY;
    let mut k = start;
    let mut j = 0usize;
    while k < c.len() {
        let sign = if alternate && j % 2 == 1 { -1.0 } else { 1.0 };
        let term = sign * c[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        acc += term;
        if term.abs() < 1e-18 * acc.abs() {
            break;
        }
        last = term.abs();
        k += stride;
        j += 1;
    }
    acc
}

fn asymptotic(s: f64) -> Quad {
    let (u, v) = uv_coefficients();
    let x = s.abs();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let q = x.powf(0.25);
    let sp = PI.sqrt();
    if s > 0.0 {
        // Alternating series for the decaying solution, plain for the growing one.
        let su_alt = asymptotic_sum(u, zeta, true, 0, 1);
        let sv_alt = asymptotic_sum(v, zeta, true, 0, 1);
        let su = asymptotic_sum(u, zeta, false, 0, 1);
        let sv = asymptotic_sum(v, zeta, false, 0, 1);
        let decay = (-zeta).exp();
        let grow = zeta.exp();
        Quad {
            ai: decay / (2.0 * sp * q) * su_alt,
            aid: -q * decay / (2.0 * sp) * sv_alt,
            bi: grow / (sp * q) * su,
            bid: q * grow / sp * sv,
        }
    } else {
        let ue = asymptotic_sum(u, zeta, true, 0, 2);
        let uo = asymptotic_sum(u, zeta, true, 1, 2);
        let ve = asymptotic_sum(v, zeta, true, 0, 2);
        let vo = asymptotic_sum(v, zeta, true, 1, 2);
        let phase = zeta - PI / 4.0;
        let (sn, cs) = phase.sin_cos();
        Quad {
            ai: (cs * ue + sn * uo) / (sp * q),
            aid: q / sp * (sn * ve - cs * vo),
            bi: (-sn * ue + cs * uo) / (sp * q),
            bid: q / sp * (cs * ve + sn * vo),
        }
    }
}

/// Advances a solution of y'' = s·y from `s0` by `h` with its Taylor series.
fn taylor_step(s0: f64, y: f64, yd: f64, h: f64) -> (f64, f64) {
    let mut c_prev2 = y; // c_{n}
    let mut c_prev1 = yd; // c_{n+1}
    let mut c_before = 0.0; // c_{n-1}
    let mut val = y + yd * h;
    let mut der = yd;
    let mut hp = h; // h^{n+1}
    let mut quiet = 0;
    for n in 0..200usize {
        // c_{n+2} = (s0·c_n + c_{n-1}) / ((n+2)(n+1))
        let c_next = (s0 * c_prev2 + c_before) / (((n + 2) * (n + 1)) as f64);
        let term_d = (n + 2) as f64 * c_next * hp;
        hp *= h;
        let term_v = c_next * hp;
        val += term_v;
        der += term_d;
        if term_v.abs() <= 1e-18 * val.abs().max(1e-300) && term_d.abs() <= 1e-18 * der.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        c_before = c_prev2;
        c_prev2 = c_prev1;
        c_prev1 = c_next;
    }
    (val, der)
}

fn node_table() -> &'static Vec<Quad> {
    static TABLE: OnceLock<Vec<Quad>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let count = (2.0 * ASYMPTOTIC_MIN / NODE_STEP).round() as usize;
        let node = |i: usize| -ASYMPTOTIC_MIN + NODE_STEP * i as f64;
        let mut table: Vec<Option<Quad>> = vec![None; count + 1];
        for (i, slot) in table.iter_mut().enumerate() {
            if node(i).abs() <= SERIES_MAX + 1e-12 {
                *slot = Some(maclaurin(node(i)));
            }
        }
        let i_pos = (0..=count).rev().find(|&i| table[i].is_some()).unwrap();
        let i_neg = (0..=count).find(|&i| table[i].is_some()).unwrap();

        // Bi grows with s: march it forward from the series region.
        let mut bi = table[i_pos].unwrap();
        let mut fwd = vec![(0.0, 0.0); count + 1];
        for i in i_pos + 1..=count {
            let (b, bd) = taylor_step(node(i - 1), bi.bi, bi.bid, NODE_STEP);
            bi.bi = b;
            bi.bid = bd;
            fwd[i] = (b, bd);
        }
        // Ai decays with s: march it backward from the asymptotic region.
        let start = asymptotic(ASYMPTOTIC_MIN);
        let (mut a, mut ad) = (start.ai, start.aid);
        for i in (i_pos + 1..=count).rev() {
            if i < count {
                let step = taylor_step(node(i + 1), a, ad, -NODE_STEP);
                a = step.0;
                ad = step.1;
            }
            table[i] = Some(Quad { ai: a, aid: ad, bi: fwd[i].0, bid: fwd[i].1 });
        }
        // Oscillatory side: either direction is stable; march outward.
        let mut cur = table[i_neg].unwrap();
        for i in (0..i_neg).rev() {
            let x = node(i + 1);
            let (a, ad) = taylor_step(x, cur.ai, cur.aid, -NODE_STEP);
            let (b, bd) = taylor_step(x, cur.bi, cur.bid, -NODE_STEP);
            cur = Quad { ai: a, aid: ad, bi: b, bid: bd };
            table[i] = Some(cur);
        }
        table.into_iter().map(|q| q.unwrap()).collect()
    })
}

fn from_table(s: f64) -> Quad {
    let table = node_table();
    let i = ((s + ASYMPTOTIC_MIN) / NODE_STEP).round() as usize;
    let i = i.min(table.len() - 1);
    let s0 = -ASYMPTOTIC_MIN + NODE_STEP * i as f64;
    let q = table[i];
    let (ai, aid) = taylor_step(s0, q.ai, q.aid, s - s0);
    let (bi, bid) = taylor_step(s0, q.bi, q.bid, s - s0);
    Quad { ai, aid, bi, bid }
}

fn real_quad(s: f64) -> Quad {
    if s.abs() <= SERIES_MAX {
        maclaurin(s)
    } else if s.abs() >= ASYMPTOTIC_MIN {
        asymptotic(s)
    } else {
        from_table(s)
    }
}

pub fn airy_eval(s: f64) -> Result<AiryPair> {
    if !(S_MIN..=S_MAX).contains(&s) {
        return Err(Error::Domain(format!("Airy argument {s} outside [{S_MIN}, {S_MAX}]")));
    }
    let q = real_quad(s);
    Ok(AiryPair {
        s,
        ai: q.ai,
        ai_d: q.aid,
        bb: Complex64::new(PI * q.bi, PI * q.ai),
        bb_d: Complex64::new(PI * q.bid, PI * q.aid),
    })
}

/// The weight exp((2/3)·max(0, s)^{3/2}).
pub fn omega(s: f64) -> Result<f64> {
    let sp = s.max(0.0);
    let w = (2.0 / 3.0 * sp * sp.sqrt()).exp();
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::Domain(format!("omega({s}) overflows")))
    }
}

/// Scaled magnitudes that the Airy bounds say are of order one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryBounds {
    pub ai: f64,
    pub bb: f64,
    pub product: f64,
}

pub fn airy_bounds_check(s: f64) -> Result<AiryBounds> {
    let pair = airy_eval(s)?;
    let w = omega(s)?;
    let jp = (1.0 + s * s).sqrt();
    Ok(AiryBounds {
        ai: pair.ai.abs() * w * jp.powf(0.25),
        bb: pair.bb.norm() * jp.powf(0.25) / w,
        product: (pair.ai * pair.bb).norm() * jp.sqrt(),
    })
}

/// Largest disagreement between the two evaluation paths at the seams
/// (series vs table at |s| = 2, table vs asymptotics at |s| = 10), relative to
/// the local magnitude of each function.
pub fn crossover_mismatch() -> f64 {
    let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale;
    let mut worst = 0.0f64;
    for s in [-ASYMPTOTIC_MIN, ASYMPTOTIC_MIN] {
        let a = asymptotic(s);
        let t = from_table(s);
        let sa = a.ai.abs().max(1e-300) + if s < 0.0 { a.bi.abs() } else { 0.0 };
        let sad = a.aid.abs() + if s < 0.0 { a.bid.abs() } else { 0.0 };
        worst = worst.max(rel(a.ai, t.ai, sa)).max(rel(a.aid, t.aid, sad));
        worst = worst.max(rel(a.bi, t.bi, a.bi.abs() + a.ai.abs())).max(rel(a.bid, t.bid, a.bid.abs() + a.aid.abs()));
    }
    for s in [-SERIES_MAX - 1e-9, SERIES_MAX + 1e-9] {
        let m = maclaurin(s);
        let t = from_table(s);
        worst = worst.max(rel(m.ai, t.ai, m.ai.abs())).max(rel(m.bi, t.bi, m.bi.abs()));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        let p = airy_eval(0.0).unwrap();
        assert!((p.ai - 0.3550280539).abs() < 1e-10);
        assert!((p.ai_d + 0.2588194038).abs() < 1e-10);
    }

    #[test]
    fn taylor_step_matches_series() {
        let a = maclaurin(1.0);
        let (v, d) = taylor_step(1.0, a.ai, a.aid, 0.7);
        let b = maclaurin(1.7);
        assert!((v - b.ai).abs() < 1e-15);
        assert!((d - b.aid).abs() < 1e-15);
    }

    #[test]
    fn seams_agree() {
        assert!(crossover_mismatch() < 1e-11, "{}", crossover_mismatch());
    }
}
