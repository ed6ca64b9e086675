//! Quadrature rules: spectrally accurate trapezoid for periodic integrands,
//! adaptive Gauss-Kronrod on finite intervals, and a tangent map for the
//! whole real line.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// A quadrature result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodicOptions {
    /// Starting node count, at least 8.
    pub nodes: usize,
    pub max_nodes: usize,
    /// Absolute tolerance on successive doublings.
    pub tol: f64,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions {
            nodes: 8,
            max_nodes: 1 << 20,
            tol: 1e-12,
        }
    }
}

impl PeriodicOptions {
    pub fn with_nodes(nodes: usize) -> Self {
        PeriodicOptions {
            nodes: nodes.max(8),
            ..Self::default()
        }
    }
}

/// `(1/2pi) * integral of f over (-pi, pi]` by the equally spaced trapezoid
/// rule, doubling the node count until two successive doublings change the
/// result by less than `opts.tol`.
///
/// Requiring two agreeing doublings guards against a coarse grid that aliases
/// a high harmonic onto the same wrong value twice.
pub fn periodic_quadrature<F>(f: F, opts: PeriodicOptions) -> Result<Quad<Complex64>>
where
    F: Fn(f64) -> Complex64,
{
    if opts.nodes < 8 {
        return Err(Error::Range(format!(
            "periodic quadrature needs at least 8 nodes, got {}",
            opts.nodes
        )));
    }
    let mut n = opts.nodes;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        sum += f(PI - 2.0 * PI * k as f64 / n as f64);
    }
    let mut mean = sum / n as f64;
    let mut agreed = 0;
    let mut residual = f64::INFINITY;
    while n < opts.max_nodes {
        let mut mid = Complex64::new(0.0, 0.0);
        for k in 0..n {
            mid += f(PI - 2.0 * PI * (k as f64 + 0.5) / n as f64);
        }
        sum += mid;
        n *= 2;
        let next = sum / n as f64;
        residual = (next - mean).norm();
        mean = next;
        if residual < opts.tol {
            agreed += 1;
            if agreed == 2 {
                return Ok(Quad {
                    value: mean,
                    error: residual,
                    evaluations: n,
                });
            }
        } else {
            agreed = 0;
        }
    }
    Err(Error::NotConverged {
        what: "periodic quadrature",
        last: mean,
        residual,
        nodes: n,
    })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate, error estimate and integral of `|f|` over `[a, b]`.
fn gk15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut vals = [(T::zero(), T::zero()); 7];
    for (j, v) in vals.iter_mut().enumerate() {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        kron = kron + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
        *v = (f1, f2);
    }
    let mean = kron * 0.5;
    let mut resasc = WGK[7] * (fc - mean).magnitude();
    let mut resabs = WGK[7] * fc.magnitude();
    for (j, &(f1, f2)) in vals.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).magnitude() + (f2 - mean).magnitude());
        resabs += WGK[j] * (f1.magnitude() + f2.magnitude());
    }
    let h = h.abs();
    resasc *= h;
    resabs *= h;
    let mut err = (kron - gauss).magnitude() * h;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (kron * (b - a) * 0.5, err, resabs)
}

#[derive(Debug, Clone, Copy)]
pub struct GkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for GkOptions {
    fn default() -> Self {
        GkOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 4000,
        }
    }
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    abs: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature on `[a, b]`.
///
/// Stops once the error estimate drops below
/// `max(abs_tol, rel_tol |I|)`, or below the roundoff floor
/// `64 eps integral |f|` when the integral cancels.
pub fn adaptive_gk<T, F>(f: F, a: f64, b: f64, opts: GkOptions) -> Result<Quad<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let (value, error, abs) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error, abs });
    let mut total = value;
    let mut total_err = error;
    let mut total_abs = abs;
    let mut evaluations = 15;
    loop {
        let tol = opts
            .abs_tol
            .max(opts.rel_tol * total.magnitude())
            .max(64.0 * f64::EPSILON * total_abs);
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Tolerance {
                what: "adaptive Gauss-Kronrod quadrature".into(),
                bound: total_err,
                tolerance: tol,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        let (v1, e1, a1) = gk15(&f, worst.a, m);
        let (v2, e2, a2) = gk15(&f, m, worst.b);
        evaluations += 30;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        total_abs += a1 + a2 - worst.abs;
        heap.push(Panel { a: worst.a, b: m, value: v1, error: e1, abs: a1 });
        heap.push(Panel { a: m, b: worst.b, value: v2, error: e2, abs: a2 });
        // Recompute occasionally; the running sums drift after many updates.
        if heap.len() % 64 == 0 {
            total = heap.iter().fold(T::zero(), |s, p| s + p.value);
            total_err = heap.iter().map(|p| p.error).sum();
            total_abs = heap.iter().map(|p| p.abs).sum();
        }
    }
    let value = heap.iter().fold(T::zero(), |s, p| s + p.value);
    Ok(Quad {
        value,
        error: total_err,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ImproperOptions {
    /// Length scale `R` of the substitution `z = R tan(u)`.
    pub scale: f64,
    pub rel_tol: f64,
    /// Absolute error floor, for integrals expected to vanish.
    pub abs_tol: f64,
    /// The tail is probed at `tail_probe * scale`.
    pub tail_probe: f64,
}

impl Default for ImproperOptions {
    fn default() -> Self {
        ImproperOptions {
            scale: 1.0,
            rel_tol: 1e-10,
            abs_tol: 0.0,
            tail_probe: 1e6,
        }
    }
}

impl ImproperOptions {
    pub fn with_scale(scale: f64) -> Self {
        ImproperOptions {
            scale,
            ..Self::default()
        }
    }
}

/// Bound on `integral_Z^inf |f|` from the local power-law decay at `Z`.
fn tail_bound<F: Fn(f64) -> f64>(f: &F, z: f64) -> f64 {
    let f1 = f(z).abs();
    if f1 == 0.0 {
        return 0.0;
    }
    let f2 = f(2.0 * z).abs();
    if !(f2 > 0.0) {
        return 0.0;
    }
    let p = (f1 / f2).log2();
    if p <= 1.0 {
        f64::INFINITY
    } else {
        f1 * z / (p - 1.0)
    }
}

/// Integral of `f` over the real line.
///
/// Maps `z = R tan(u)` onto `(-pi/2, pi/2)` and integrates adaptively. The
/// integrand must decay fast enough that the mapped integrand stays bounded;
/// a power-law tail fitted at `tail_probe * R` rejects slower decay.
pub fn improper_line_quadrature<F>(f: F, opts: ImproperOptions) -> Result<Quad<f64>>
where
    F: Fn(f64) -> f64,
{
    let r = opts.scale;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Range(format!("quadrature scale must be positive, got {r}")));
    }
    let g = |u: f64| {
        let c = u.cos();
        f(r * u.tan()) * r / (c * c)
    };
    let q = adaptive_gk(
        g,
        -FRAC_PI_2,
        FRAC_PI_2,
        GkOptions {
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol.max(1e-300),
            max_intervals: 4000,
        },
    )?;
    let z = opts.tail_probe * r;
    let tail = tail_bound(&f, z) + tail_bound(&|x| f(-x), z);
    // Scale for integrals that cancel: the error floor of the quadrature itself.
    let tol = (opts.rel_tol * q.value.abs()).max(q.error).max(opts.abs_tol).max(f64::MIN_POSITIVE);
    if tail > tol {
        return Err(Error::Tolerance {
            what: format!("slowly decaying integrand, tail beyond |z| = {z:.1e}"),
            bound: tail,
            tolerance: tol,
        });
    }
    Ok(Quad {
        value: q.value,
        error: q.error + tail,
        evaluations: q.evaluations + 4,
    })
}
