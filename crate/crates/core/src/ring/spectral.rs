//! The `xi` integral evaluated on a lattice.
//!
//! The kernel vanishes outside `(-pi, pi]` on the covering line, so `c(xi)` is
//! band-limited and equals its cardinal series through the integer
//! coefficients:
//!
//! ```text
//! c(xi) = sin(pi xi)/pi * sum_s c_s (-1)^s / (xi - s)
//! ```
//!
//! `(nu c)^M` is the transform of a function supported in `|x| <= M pi`, so the
//! trapezoid rule with step `1/P` aliases winding `n` only onto windings
//! `n + kP`, none of which are reachable once `P > M/2 + |n|`. The lattice sum
//! is therefore exact apart from truncating the slowly decaying `xi` tails.
//!
//! In linearized mode the transform is the free one shifted by `b`; putting
//! the lattice on `b + j/P` makes the sample values identical to the free run,
//! so the ratio to the free amplitude is exactly `e^{2 pi i n b}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Amp, AmplitudeOptions, KernelMode, StepKernel};
use crate::error::{Error, Result};

/// Most lattice points evaluated beyond the core window on each side.
const MAX_TAIL_POINTS: usize = 1 << 22;

pub(crate) fn amplitudes(kernel: &StepKernel, steps: usize, ns: &[i64], opts: &AmplitudeOptions) -> Result<Vec<Amp>> {
    let m = steps;
    let p = m / 2 + opts.n_max + 1;
    let (coef_b, shift) = match kernel.mode {
        KernelMode::Full => (kernel.b, 0.0),
        KernelMode::Linearized => (0.0, kernel.b),
    };
    let (s0, cs) = kernel.coefficients(coef_b);
    let nu = kernel.normalization();
    let a: Vec<Complex64> = cs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let s = s0 + i as i64;
            if s % 2 == 0 { nu * c } else { -nu * c }
        })
        .collect();
    let s_top = -s0;
    let y = a.iter().map(|v| v.norm()).sum::<f64>() / PI;

    let sampler = Sampler::new(&a, s0, p, m);
    let mut residues = vec![Complex64::new(0.0, 0.0); p];
    let mut l1 = 0.0;
    let core = (s_top as usize + 2) * p;
    for j in -(core as i64)..=core as i64 {
        let f = sampler.value(j);
        residues[j.rem_euclid(p as i64) as usize] += f;
        l1 += f.norm();
    }
    l1 /= p as f64;

    // |(nu c)(eta)|^M <= (y / (|eta| - S))^M beyond the coefficient range, so
    // the lattice tails past |eta| = L contribute at most
    // 2 y^M (L - S)^{1 - M} / (M - 1).
    let tol = opts.truncation_tol * l1;
    let mf = m as f64;
    let tail_bound = |l: f64| 2.0 * (mf * y.ln() - (mf - 1.0) * (l - s_top as f64).ln()).exp() / (mf - 1.0);
    let log_needed = ((2.0_f64).ln() + mf * y.ln() - (mf - 1.0).ln() - tol.ln()) / (mf - 1.0);
    let reach = s_top as f64 + log_needed.exp();
    let mut edge = core as i64;
    if reach > (s_top + 2) as f64 {
        let target = (reach * p as f64).ceil();
        if target - core as f64 > MAX_TAIL_POINTS as f64 {
            let cap = (core + MAX_TAIL_POINTS) as f64 / p as f64;
            return Err(Error::Tolerance {
                what: format!("xi truncation for M = {m}, kappa = {}", kernel.kappa),
                bound: tail_bound(cap) / l1,
                tolerance: opts.truncation_tol,
            });
        }
        let target = target as i64;
        for j in edge + 1..=target {
            for jj in [j, -j] {
                let f = sampler.value(jj);
                residues[jj.rem_euclid(p as i64) as usize] += f;
            }
        }
        edge = target;
    }
    let tail = tail_bound(edge as f64 / p as f64);
    let error = tail + 4.0 * mf * f64::EPSILON * l1 * (s_top as f64 + 1.0).sqrt();

    let roots: Vec<Complex64> = (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect();
    Ok(ns
        .iter()
        .map(|&n| {
            let sum: Complex64 = residues
                .iter()
                .enumerate()
                .map(|(r, g)| g * roots[(n * r as i64).rem_euclid(p as i64) as usize])
                .sum();
            let shift_phase = Complex64::from_polar(1.0, 2.0 * PI * n as f64 * shift);
            Amp {
                value: shift_phase * sum / p as f64,
                error,
            }
        })
        .collect())
}

/// `(nu c(j/P))^M` from the cardinal series.
struct Sampler<'a> {
    a: &'a [Complex64],
    s0: i64,
    p: i64,
    m: i32,
    /// `sin(pi r / P) / pi` for residues `r`.
    sines: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(a: &'a [Complex64], s0: i64, p: usize, m: usize) -> Self {
        let sines = (0..p).map(|r| (PI * r as f64 / p as f64).sin() / PI).collect();
        Sampler { a, s0, p: p as i64, m: m as i32, sines }
    }

    fn value(&self, j: i64) -> Complex64 {
        let whole = j.div_euclid(self.p);
        let r = j.rem_euclid(self.p);
        let c = if r == 0 {
            let idx = whole - self.s0;
            if idx < 0 || idx >= self.a.len() as i64 {
                return Complex64::new(0.0, 0.0);
            }
            // a carries (-1)^s; undo it at the node itself.
            let v = self.a[idx as usize];
            if whole % 2 == 0 { v } else { -v }
        } else {
            let eta = whole as f64 + r as f64 / self.p as f64;
            let mut re = 0.0;
            let mut im = 0.0;
            let mut s = self.s0 as f64;
            for v in self.a {
                let w = 1.0 / (eta - s);
                re += v.re * w;
                im += v.im * w;
                s += 1.0;
            }
            let sine = if whole % 2 == 0 { self.sines[r as usize] } else { -self.sines[r as usize] };
            Complex64::new(re, im) * sine
        };
        c.powi(self.m)
    }
}
