//! Integer-order Bessel functions of the first kind.

use crate::error::{Error, Result};

const MAX_ORDER: i64 = 200;
const MAX_ARG: f64 = 1e4;
const SERIES_LIMIT: f64 = 2.0;

/// `J_s(x)` for `|s| <= 200`, `|x| <= 1e4`, to about `1e-12` absolute.
///
/// Small arguments use the ascending series; otherwise Miller's downward
/// recurrence normalized by `J_0 + 2 sum J_2k = 1`.
pub fn bessel_j(s: i64, x: f64) -> Result<f64> {
    if s.abs() > MAX_ORDER || !(x.abs() <= MAX_ARG) {
        return Err(Error::Range(format!(
            "bessel_j supports |s| <= {MAX_ORDER}, |x| <= {MAX_ARG:e}; got s = {s}, x = {x}"
        )));
    }
    let n = s.unsigned_abs() as usize;
    // J_{-n}(x) = (-1)^n J_n(x) = J_n(-x)
    let sign = if n % 2 == 1 && ((s < 0) != (x < 0.0)) { -1.0 } else { 1.0 };
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        series(n, ax)
    } else {
        bessel_j_sequence(n, ax)[n]
    };
    Ok(sign * v)
}

fn series(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    // (x/2)^n / n! built in log space to survive large n.
    let log_lead = n as f64 * (0.5 * x).ln() - ln_factorial(n);
    let lead = log_lead.exp();
    if lead == 0.0 {
        return 0.0;
    }
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `J_0(x) .. J_{n_max}(x)` for `x >= 0` by one downward recurrence.
///
/// There is no order cap here; orders far beyond `x` underflow to zero as the
/// true values do.
pub fn bessel_j_sequence(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = n_max.max(x.ceil() as usize) + 30 + (15.0 * x.cbrt()).ceil() as usize;
    let start = start + start % 2;
    let mut next = 0.0; // j_{k+1}
    let mut cur = 1e-30; // j_k
    let mut norm = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            next *= scale;
            norm *= scale;
            for v in out.iter_mut().skip(k.saturating_sub(1)) {
                *v *= scale;
            }
        }
    }
    out[0] = cur;
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
