//! Extended-precision evaluation of the clock error vectors.
//!
//! The error vectors are differences of quantities of order one whose true
//! size falls to ~1e-22 at d = 64, far below double-precision roundoff.
//! Everything here runs in 256-bit binary floating point and is rounded to
//! `f64` only at the end.

use crate::C64;
use astro_float::{BigFloat, Consts, RoundingMode, Sign};

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Clone)]
struct Cx {
    re: BigFloat,
    im: BigFloat,
}

struct Ctx {
    cc: Consts,
    pi: BigFloat,
    zero: BigFloat,
}

impl Ctx {
    fn new() -> Self {
        let mut cc = Consts::new().expect("astro-float constants cache");
        let pi = cc.pi(P, RM);
        Ctx { cc, pi, zero: BigFloat::from_f64(0.0, P) }
    }

    fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    fn i(&self, x: i64) -> BigFloat {
        BigFloat::from_i64(x, P)
    }

    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, P, RM)
    }

    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, P, RM)
    }

    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, P, RM)
    }

    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, P, RM)
    }

    fn exp(&mut self, a: &BigFloat) -> BigFloat {
        a.exp(P, RM, &mut self.cc)
    }

    fn cis(&mut self, ang: &BigFloat) -> Cx {
        Cx { re: ang.cos(P, RM, &mut self.cc), im: ang.sin(P, RM, &mut self.cc) }
    }

    fn czero(&self) -> Cx {
        Cx { re: self.zero.clone(), im: self.zero.clone() }
    }

    fn cadd(&self, a: &Cx, b: &Cx) -> Cx {
        Cx { re: self.add(&a.re, &b.re), im: self.add(&a.im, &b.im) }
    }

    fn csub(&self, a: &Cx, b: &Cx) -> Cx {
        Cx { re: self.sub(&a.re, &b.re), im: self.sub(&a.im, &b.im) }
    }

    fn cmul(&self, a: &Cx, b: &Cx) -> Cx {
        let re = self.sub(&self.mul(&a.re, &b.re), &self.mul(&a.im, &b.im));
        let im = self.add(&self.mul(&a.re, &b.im), &self.mul(&a.im, &b.re));
        Cx { re, im }
    }

    fn cscale(&self, a: &Cx, s: &BigFloat) -> Cx {
        Cx { re: self.mul(&a.re, s), im: self.mul(&a.im, s) }
    }

    /// Multiply by `i * s` for real `s`.
    fn cscale_i(&self, a: &Cx, s: &BigFloat) -> Cx {
        Cx { re: -self.mul(&a.im, s), im: self.mul(&a.re, s) }
    }

    /// `w[r] = e^{-i 2 pi r / d}` for `r = 0..d`.
    fn roots(&mut self, d: usize) -> Vec<Cx> {
        let two_pi = self.mul(&self.i(2), &self.pi.clone());
        let dd = self.i(d as i64);
        (0..d)
            .map(|r| {
                let ang = -self.div(&self.mul(&two_pi, &self.i(r as i64)), &dd);
                self.cis(&ang)
            })
            .collect()
    }

    fn norm(&self, v: &[Cx]) -> BigFloat {
        let mut acc = self.zero.clone();
        for z in v {
            acc = self.add(&acc, &self.mul(&z.re, &z.re));
            acc = self.add(&acc, &self.mul(&z.im, &z.im));
        }
        acc.sqrt(P, RM)
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    let Some((words, _bits, sign, exp, _inexact)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().unwrap_or(&0);
    if top == 0 {
        return 0.0;
    }
    // value = 0.mantissa * 2^exp with the leading bit in the top word
    let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
    let m = (top as f64) + (next as f64) * 2f64.powi(-64);
    let e = exp - 64;
    let v = if e < -1000 { m * 2f64.powi(-1000) * 2f64.powi(e + 1000) } else { m * 2f64.powi(e) };
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

fn to_c64(z: &Cx) -> C64 {
    C64::new(to_f64(&z.re), to_f64(&z.im))
}

/// Window amplitudes `psi(k0; k)` for `k = start..start+d`, with the
/// normalization constant applied.
struct Packet {
    start: i64,
    amps: Vec<Cx>,
    offsets: Vec<BigFloat>,
}

fn packet(ctx: &mut Ctx, d: usize, sigma: f64, j0: f64, k0: &BigFloat, start: i64) -> Packet {
    let sig = ctx.f(sigma);
    let sig2 = ctx.mul(&sig, &sig);
    let pi = ctx.pi.clone();
    let two_pi_j0_over_d = ctx.div(&ctx.mul(&ctx.mul(&ctx.i(2), &pi), &ctx.f(j0)), &ctx.i(d as i64));
    let mut amps = Vec::with_capacity(d);
    let mut offsets = Vec::with_capacity(d);
    let mut weight = ctx.zero.clone();
    for i in 0..d {
        let x = ctx.sub(&ctx.i(start + i as i64), k0);
        let g = ctx.exp(&-ctx.div(&ctx.mul(&pi, &ctx.mul(&x, &x)), &sig2));
        weight = ctx.add(&weight, &ctx.mul(&g, &g));
        let ph = ctx.cis(&ctx.mul(&two_pi_j0_over_d, &x));
        amps.push(ctx.cscale(&ph, &g));
        offsets.push(x);
    }
    let a = ctx.div(&ctx.i(1), &weight.sqrt(P, RM));
    let amps = amps.iter().map(|z| ctx.cscale(z, &a)).collect();
    Packet { start, amps, offsets }
}

/// Energy components `sum_k c_k <E_j|theta_k>` of a window-indexed vector.
fn to_energy(ctx: &Ctx, roots: &[Cx], start: i64, coeffs: &[Cx]) -> Vec<Cx> {
    let d = roots.len();
    let inv_sqrt_d = ctx.div(&ctx.i(1), &ctx.i(d as i64).sqrt(P, RM));
    (0..d)
        .map(|j| {
            let mut acc = ctx.czero();
            for (i, c) in coeffs.iter().enumerate() {
                let k = start + i as i64;
                let r = ((j as i64) * k).rem_euclid(d as i64) as usize;
                acc = ctx.cadd(&acc, &ctx.cmul(c, &roots[r]));
            }
            ctx.cscale(&acc, &inv_sqrt_d)
        })
        .collect()
}

fn finish(ctx: &Ctx, v: &[Cx]) -> (Vec<C64>, f64) {
    (v.iter().map(to_c64).collect(), to_f64(&ctx.norm(v)))
}

/// `-d/dtau psi(tau) - i (2 pi / d) J psi(tau)` in the energy basis, with the
/// normalization and the window held fixed during differentiation.
pub(crate) fn lemma1(d: usize, sigma: f64, j0: f64, tau: f64, start: i64) -> (Vec<C64>, f64) {
    let mut ctx = Ctx::new();
    let roots = ctx.roots(d);
    let k0 = ctx.f(tau);
    let pk = packet(&mut ctx, d, sigma, j0, &k0, start);
    let two_pi = ctx.mul(&ctx.i(2), &ctx.pi.clone());
    let slope = ctx.div(&two_pi, &ctx.mul(&ctx.f(sigma), &ctx.f(sigma)));
    let env: Vec<Cx> = pk.amps.iter().zip(&pk.offsets).map(|(a, x)| ctx.cscale(a, &ctx.mul(&slope, x))).collect();
    let psi = to_energy(&ctx, &roots, pk.start, &pk.amps);
    let denv = to_energy(&ctx, &roots, pk.start, &env);
    let step = ctx.div(&two_pi, &ctx.i(d as i64));
    let j0b = ctx.f(j0);
    let out: Vec<Cx> = (0..d)
        .map(|j| {
            let coef = ctx.mul(&step, &ctx.sub(&j0b, &ctx.i(j as i64)));
            ctx.csub(&ctx.cscale_i(&psi[j], &coef), &denv[j])
        })
        .collect();
    finish(&ctx, &out)
}

/// `e^{-i omega J t} psi(k0) - psi(k0 + t d / T)` in the energy basis.
/// `shifted_start` maps the shifted centre to its window start.
#[allow(clippy::too_many_arguments)]
pub(crate) fn evolution(
    d: usize,
    sigma: f64,
    j0: f64,
    k0: f64,
    omega: f64,
    t: f64,
    start: i64,
    shifted_start: impl Fn(f64) -> i64,
) -> (Vec<C64>, f64) {
    let mut ctx = Ctx::new();
    let roots = ctx.roots(d);
    let k0b = ctx.f(k0);
    let wt = ctx.mul(&ctx.f(omega), &ctx.f(t));
    let two_pi = ctx.mul(&ctx.i(2), &ctx.pi.clone());
    let shift = ctx.div(&ctx.mul(&wt, &ctx.i(d as i64)), &two_pi);
    let k1 = ctx.add(&k0b, &shift);
    let start1 = shifted_start(to_f64(&k1));
    let p0 = packet(&mut ctx, d, sigma, j0, &k0b, start);
    let p1 = packet(&mut ctx, d, sigma, j0, &k1, start1);
    let e0 = to_energy(&ctx, &roots, p0.start, &p0.amps);
    let e1 = to_energy(&ctx, &roots, p1.start, &p1.amps);
    let out: Vec<Cx> = (0..d)
        .map(|j| {
            let ang = -ctx.mul(&wt, &ctx.i(j as i64));
            let ph = ctx.cis(&ang);
            ctx.csub(&ctx.cmul(&ph, &e0[j]), &e1[j])
        })
        .collect();
    finish(&ctx, &out)
}

/// `[H_C, T_op] psi + i psi` in the energy basis, where the time operator
/// carries the window labels of the state.
pub(crate) fn commutator(d: usize, sigma: f64, j0: f64, k0: f64, start: i64) -> (Vec<C64>, f64) {
    let mut ctx = Ctx::new();
    let roots = ctx.roots(d);
    let k0b = ctx.f(k0);
    let pk = packet(&mut ctx, d, sigma, j0, &k0b, start);
    let psi = to_energy(&ctx, &roots, pk.start, &pk.amps);
    let dd = d as i64;
    // c[m + d - 1] = sum_k k e^{-i 2 pi m k / d}
    let c: Vec<Cx> = (-(dd - 1)..dd)
        .map(|m| {
            let mut acc = ctx.czero();
            for i in 0..dd {
                let k = start + i;
                let r = (m * k).rem_euclid(dd) as usize;
                acc = ctx.cadd(&acc, &ctx.cscale(&roots[r], &ctx.i(k)));
            }
            acc
        })
        .collect();
    let two_pi = ctx.mul(&ctx.i(2), &ctx.pi.clone());
    let pref = ctx.div(&two_pi, &ctx.i(dd * dd));
    let one = ctx.i(1);
    let out: Vec<Cx> = (0..dd)
        .map(|j| {
            let mut acc = ctx.czero();
            for l in 0..dd {
                let m = j - l;
                if m == 0 {
                    continue;
                }
                let w = ctx.mul(&pref, &ctx.i(m));
                let term = ctx.cscale(&ctx.cmul(&c[(m + dd - 1) as usize], &psi[l as usize]), &w);
                acc = ctx.cadd(&acc, &term);
            }
            ctx.cadd(&acc, &ctx.cscale_i(&psi[j as usize], &one))
        })
        .collect();
    finish(&ctx, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversion_round_trips_doubles() {
        for &x in &[1.5, -0.1, 3.0e-300, 7.25e12, -2.0f64.powi(-60), 0.0] {
            assert_eq!(to_f64(&BigFloat::from_f64(x, P)), x);
        }
    }

    #[test]
    fn cis_matches_std() {
        let mut ctx = Ctx::new();
        let z = ctx.cis(&ctx.f(0.7));
        assert!((to_f64(&z.re) - 0.7f64.cos()).abs() < 1e-16);
        assert!((to_f64(&z.im) - 0.7f64.sin()).abs() < 1e-16);
    }
}
