//! `M`-fold convolution of the step kernel on the covering line.
//!
//! The kernel is sampled with `G` points per `2 pi` on a periodic grid of
//! length `2 pi P`; the convolution power is taken in Fourier space. With
//! `P > M/2 + |n|` the periodic wrap never reaches the winding of interest,
//! so the only error is the trapezoid discretization. Its expansion runs in
//! even powers of the spacing because every kernel edge and every kink of the
//! convolution powers sits on a grid node, and Romberg extrapolation over four
//! grid doublings removes the leading terms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Amp, StepKernel};
use crate::error::Result;

const LEVELS: usize = 4;

pub(crate) fn amplitudes(kernel: &StepKernel, steps: usize, ns: &[i64], n_max: usize) -> Result<Vec<Amp>> {
    let p = next_smooth(steps / 2 + n_max + 1);
    let g0 = ((20.0 * (kernel.kappa + kernel.b.abs() + 2.0)).ceil() as usize).max(32).next_power_of_two();
    let mut planner = FftPlanner::new();
    // r[i][k]: level i extrapolated k times in the squared spacing.
    let mut r: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(LEVELS);
    for i in 0..LEVELS {
        let mut row = vec![trapezoid(kernel, steps, ns, g0 << i, p, &mut planner)];
        for k in 1..=i {
            let factor = 4f64.powi(k as i32) - 1.0;
            let next = row[k - 1]
                .iter()
                .zip(&r[i - 1][k - 1])
                .map(|(fine, coarse)| fine + (fine - coarse) / factor)
                .collect();
            row.push(next);
        }
        r.push(row);
    }
    let best = &r[LEVELS - 1][LEVELS - 1];
    let previous = &r[LEVELS - 2][LEVELS - 2];
    Ok(best
        .iter()
        .zip(previous)
        .map(|(v, w)| Amp {
            value: *v,
            error: (v - w).norm(),
        })
        .collect())
}

fn trapezoid(
    kernel: &StepKernel,
    steps: usize,
    ns: &[i64],
    g: usize,
    p: usize,
    planner: &mut FftPlanner<f64>,
) -> Vec<Complex64> {
    let n_total = g * p;
    let delta = 2.0 * PI / g as f64;
    let nu = kernel.normalization();
    let half = (g / 2) as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n_total];
    for j in -half..=half {
        let weight = if j.abs() == half { 0.5 } else { 1.0 };
        let v = nu * kernel.v(j as f64 * delta).exp() * (weight * delta / (2.0 * PI));
        buf[j.rem_euclid(n_total as i64) as usize] += v;
    }
    planner.plan_fft_forward(n_total).process(&mut buf);
    for x in buf.iter_mut() {
        *x = x.powi(steps as i32);
    }
    let scale = 2.0 * PI / delta / n_total as f64;
    if ns.len() > 8 {
        planner.plan_fft_inverse(n_total).process(&mut buf);
        ns.iter()
            .map(|&n| buf[(n * g as i64).rem_euclid(n_total as i64) as usize] * scale)
            .collect()
    } else {
        let roots: Vec<Complex64> = (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect();
        ns.iter()
            .map(|&n| {
                let sum: Complex64 = buf
                    .iter()
                    .enumerate()
                    .map(|(k, x)| x * roots[(k as i64 * n).rem_euclid(p as i64) as usize])
                    .sum();
                sum * scale
            })
            .collect()
    }
}

/// Smallest integer `>= n` with no prime factor above 5.
fn next_smooth(n: usize) -> usize {
    (n.max(1)..)
        .find(|&k| {
            let mut r = k;
            for f in [2, 3, 5] {
                while r % f == 0 {
                    r /= f;
                }
            }
            r == 1
        })
        .expect("5-smooth numbers are unbounded")
}
