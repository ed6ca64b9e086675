//! Discretized path integral for a charge confined to a ring of radius `R`
//! around a magnetic dipole on the ring axis, or around a thin magnet.
//!
//! Each of the `M` time steps contributes the kernel `exp V(dtheta)` with
//!
//! ```text
//! V(theta) = i kappa (1 - cos theta) + i b sin theta,   b = phi1 / 2pi
//! ```
//!
//! Unrolling the ring onto the real line separates the paths by winding
//! number `n`: the amplitude of winding `n` is the `M`-fold convolution of the
//! kernel evaluated at `2 pi n`, or equivalently
//!
//! ```text
//! A(n) = integral d xi  (nu c(xi))^M  exp(2 pi i n xi)
//! ```
//!
//! where `c(xi)` is the Fourier transform of the kernel and
//! `nu = sqrt(2 pi kappa) e^{-i pi/4}` is a per-step normalization that keeps
//! `|nu c|` of order one. All reported phases are ratios, so `nu` cancels.
//!
//! Two independent evaluations are provided: [`Route::Spectral`] integrates
//! over `xi`, [`Route::Covering`] convolves the kernel on the line with FFTs.

mod covering;
mod spectral;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Axis, SolenoidMagnet};
use crate::numerics::{
    adaptive_gk, bessel_j_sequence, improper_line_quadrature, periodic_quadrature, GkOptions,
    ImproperOptions, PeriodicOptions,
};
use crate::phases::PhaseBreakdown;
use crate::units::Units;

/// Default largest winding number handled by one amplitude run.
pub const DEFAULT_N_MAX: usize = 8;

/// Charge on a ring of radius `radius` around a dipole `mu z` sitting on the
/// ring axis at height `z_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingModel {
    pub radius: f64,
    #[serde(default)]
    pub z_m: f64,
    pub steps: usize,
    pub time: f64,
    pub q: f64,
    pub mass: f64,
    pub mu: f64,
    #[serde(default)]
    pub units: Units,
}

impl RingModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        radius: f64,
        z_m: f64,
        steps: usize,
        time: f64,
        q: f64,
        mass: f64,
        mu: f64,
        units: Units,
    ) -> Result<Self> {
        let m = RingModel { radius, z_m, steps, time, q, mass, mu, units };
        m.validate()?;
        Ok(m)
    }

    /// Unit radius, mass and charge, dipole in the ring plane, natural units,
    /// with `T` and `mu` chosen to give the requested `kappa` and `phi1`.
    pub fn dimensionless(kappa: f64, phi1: f64, steps: usize) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::input(format!("kappa must be positive, got {kappa}")));
        }
        RingModel::new(1.0, 0.0, steps, steps as f64 / kappa, 1.0, 1.0, phi1 / (2.0 * PI), Units::NATURAL)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::input(format!("ring needs at least 2 time steps, got {}", self.steps)));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::input("ring radius must be positive"));
        }
        if !(self.time > 0.0) || !(self.mass > 0.0) {
            return Err(Error::input("total time and mass must be positive"));
        }
        if !(self.z_m.is_finite() && self.q.is_finite() && self.mu.is_finite()) {
            return Err(Error::input("charge, moment and offset must be finite"));
        }
        if !(self.kappa() > 0.0) || !self.kappa().is_finite() {
            return Err(Error::input(format!("kappa = {} is not a positive number", self.kappa())));
        }
        if !self.phi1().is_finite() {
            return Err(Error::input("phi1 is not finite"));
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.time / self.steps as f64
    }

    /// `m R^2 / hbar eps`.
    pub fn kappa(&self) -> f64 {
        self.mass * self.radius * self.radius / (self.units.hbar * self.eps())
    }

    pub fn d_m(&self) -> f64 {
        self.radius.hypot(self.z_m)
    }

    /// `2 pi q mu R^2 / (hbar c d_m^3)`.
    pub fn phi1(&self) -> f64 {
        let d = self.d_m();
        2.0 * PI * self.q * self.mu * self.radius * self.radius / (self.units.hbar_c() * d * d * d)
    }
}

/// Charge on a ring around a coaxial cylindrical magnet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolenoidRingModel {
    pub radius: f64,
    pub steps: usize,
    pub time: f64,
    pub q: f64,
    pub mass: f64,
    pub magnet: SolenoidMagnet,
    #[serde(default)]
    pub units: Units,
}

impl SolenoidRingModel {
    pub fn new(
        radius: f64,
        steps: usize,
        time: f64,
        q: f64,
        mass: f64,
        magnet: SolenoidMagnet,
        units: Units,
    ) -> Result<Self> {
        let m = SolenoidRingModel { radius, steps, time, q, mass, magnet, units };
        m.validate()?;
        Ok(m)
    }

    /// Unit ring, charge and mass in natural units; the magnet has radius
    /// `R/2` and flux `phi_ab`.
    pub fn with_phi_ab(phi_ab: f64, kappa: f64, steps: usize) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::input(format!("kappa must be positive, got {kappa}")));
        }
        let magnet = SolenoidMagnet::with_flux(phi_ab, 0.5, Axis::z())?;
        SolenoidRingModel::new(1.0, steps, steps as f64 / kappa, 1.0, 1.0, magnet, Units::NATURAL)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::input(format!("ring needs at least 2 time steps, got {}", self.steps)));
        }
        if !(self.radius > 0.0) || !(self.time > 0.0) || !(self.mass > 0.0) {
            return Err(Error::input("ring radius, total time and mass must be positive"));
        }
        if !(self.magnet.radius < self.radius) {
            return Err(Error::geometry(format!(
                "magnet radius {} must be smaller than the ring radius {}",
                self.magnet.radius, self.radius
            )));
        }
        if !self.phi_ab().is_finite() {
            return Err(Error::input("flux phase is not finite"));
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.time / self.steps as f64
    }

    pub fn kappa(&self) -> f64 {
        self.mass * self.radius * self.radius / (self.units.hbar * self.eps())
    }

    pub fn flux(&self) -> f64 {
        self.magnet.flux()
    }

    /// `q Phi / hbar c`.
    pub fn phi_ab(&self) -> f64 {
        self.q * self.flux() / self.units.hbar_c()
    }

    /// `T hbar phi_AB^2 / (8 pi^2 m R^2)`.
    pub fn varphi(&self) -> f64 {
        let p = self.phi_ab();
        self.time * self.units.hbar * p * p / (8.0 * PI * PI * self.mass * self.radius * self.radius)
    }
}

/// Whether the flux term keeps `sin theta` or is linearized to `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    #[default]
    Full,
    Linearized,
}

/// The single-step exponent `V(theta) = i kappa (1 - cos theta) + i b f(theta)`
/// with `f = sin` or the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepKernel {
    pub kappa: f64,
    /// Flux phase per winding over `2 pi`.
    pub b: f64,
    pub mode: KernelMode,
}

impl StepKernel {
    pub fn new(kappa: f64, b: f64, mode: KernelMode) -> Self {
        StepKernel { kappa, b, mode }
    }

    pub fn free(&self) -> StepKernel {
        StepKernel { b: 0.0, ..*self }
    }

    pub fn v(&self, theta: f64) -> Complex64 {
        let flux = match self.mode {
            KernelMode::Full => theta.sin(),
            KernelMode::Linearized => theta,
        };
        Complex64::new(0.0, self.kappa * (1.0 - theta.cos()) + self.b * flux)
    }

    /// `sqrt(2 pi kappa) e^{-i pi/4}`.
    pub fn normalization(&self) -> Complex64 {
        Complex64::from_polar((2.0 * PI * self.kappa).sqrt(), -PI / 4.0)
    }

    /// `(1/2pi) integral_{-pi}^{pi} e^{-i s theta} e^{V(theta)} d theta` by
    /// quadrature, for any real `s`.
    ///
    /// The integrand is periodic only for integer `s` in full mode; that case
    /// uses the trapezoid rule and everything else adaptive Gauss-Kronrod.
    pub fn fourier_coefficient(&self, s: f64) -> Result<Complex64> {
        if !s.is_finite() {
            return Err(Error::Range(format!("Fourier order must be finite, got {s}")));
        }
        let f = |t: f64| (self.v(t) - Complex64::new(0.0, s * t)).exp();
        let periodic = self.mode == KernelMode::Full || self.b == 0.0;
        if periodic && s.fract() == 0.0 {
            let nodes = (2.0 * (self.kappa.abs() + self.b.abs() + s.abs()) + 16.0) as usize;
            let q = periodic_quadrature(f, PeriodicOptions::with_nodes(nodes.next_power_of_two()));
            return q.map(|q| q.value).map_err(tolerance_from);
        }
        let opts = GkOptions {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_intervals: 20_000,
        };
        let q = adaptive_gk(f, -PI, PI, opts)?;
        Ok(q.value / (2.0 * PI))
    }

    /// Closed-form integer-order coefficient in full mode, from the
    /// Jacobi-Anger expansion of `exp(-i rho cos(theta + delta))`:
    /// `c_s = e^{i kappa} (-i)^s J_s(rho) e^{i s delta}`.
    pub fn jacobi_anger_coefficient(&self, s: i64) -> Result<Complex64> {
        if self.mode != KernelMode::Full && self.b != 0.0 {
            return Err(Error::input("the Jacobi-Anger form needs the full kernel"));
        }
        let n = s.unsigned_abs() as usize;
        let rho = self.kappa.hypot(self.b);
        let j = bessel_j_sequence(n, rho)[n];
        let j = if s < 0 && n % 2 == 1 { -j } else { j };
        Ok(ja_phase(self.kappa, self.b, s) * j)
    }

    /// All non-negligible integer coefficients of the periodic kernel with
    /// flux `b` (full mode), as `(s_min, values)`.
    pub(crate) fn coefficients(&self, b: f64) -> (i64, Vec<Complex64>) {
        let rho = self.kappa.hypot(b);
        let top = (rho + 40.0 + 10.0 * rho.cbrt()).ceil() as usize;
        let js = bessel_j_sequence(top, rho);
        let peak = js.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut s_max = top;
        while s_max > 0 && js[s_max].abs() < 1e-17 * peak {
            s_max -= 1;
        }
        let s_max = s_max as i64;
        let probe = StepKernel { b, ..*self };
        let values = (-s_max..=s_max)
            .map(|s| {
                let j = js[s.unsigned_abs() as usize];
                let j = if s < 0 && s % 2 != 0 { -j } else { j };
                ja_phase(probe.kappa, probe.b, s) * j
            })
            .collect();
        (-s_max, values)
    }
}

fn ja_phase(kappa: f64, b: f64, s: i64) -> Complex64 {
    let delta = b.atan2(kappa);
    let minus_i_pow = match s.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    };
    Complex64::from_polar(1.0, kappa) * minus_i_pow * Complex64::from_polar(1.0, s as f64 * delta)
}

fn tolerance_from(e: Error) -> Error {
    match e {
        Error::NotConverged { what, residual, .. } => Error::Tolerance {
            what: what.to_string(),
            bound: residual,
            tolerance: PeriodicOptions::default().tol,
        },
        other => other,
    }
}

/// A charge-on-ring system that reduces to a step kernel.
pub trait RingSystem {
    fn steps(&self) -> usize;
    fn kernel(&self, mode: KernelMode) -> StepKernel;
    /// Flux phase per winding the system is expected to show.
    fn phase_per_winding(&self) -> f64;
    /// Winding-independent phase from the `mu^2` part of the action.
    fn dynamical_phase(&self) -> f64;
    fn validate(&self) -> Result<()>;
}

impl RingSystem for RingModel {
    fn steps(&self) -> usize {
        self.steps
    }
    fn kernel(&self, mode: KernelMode) -> StepKernel {
        StepKernel::new(self.kappa(), self.phi1() / (2.0 * PI), mode)
    }
    fn phase_per_winding(&self) -> f64 {
        self.phi1()
    }
    fn dynamical_phase(&self) -> f64 {
        dynamical_phase_from_action(self).action
    }
    fn validate(&self) -> Result<()> {
        RingModel::validate(self)
    }
}

impl RingSystem for SolenoidRingModel {
    fn steps(&self) -> usize {
        self.steps
    }
    fn kernel(&self, mode: KernelMode) -> StepKernel {
        StepKernel::new(self.kappa(), self.phi_ab() / (2.0 * PI), mode)
    }
    fn phase_per_winding(&self) -> f64 {
        self.phi_ab()
    }
    fn dynamical_phase(&self) -> f64 {
        self.varphi()
    }
    fn validate(&self) -> Result<()> {
        SolenoidRingModel::validate(self)
    }
}

/// `V(theta)` for a model; `theta` is taken in `(-pi, pi]`.
pub fn step_kernel_v<S: RingSystem + ?Sized>(model: &S, theta: f64, linearized: bool) -> Complex64 {
    let mode = if linearized { KernelMode::Linearized } else { KernelMode::Full };
    model.kernel(mode).v(theta)
}

pub fn fourier_coefficient<S: RingSystem + ?Sized>(model: &S, s: f64, mode: KernelMode) -> Result<Complex64> {
    model.validate()?;
    model.kernel(mode).fourier_coefficient(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Integral over the continuous Fourier variable.
    #[default]
    Spectral,
    /// FFT convolution of the kernel on the covering line.
    Covering,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Spectral => "spectral",
            Route::Covering => "covering",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeOptions {
    pub mode: KernelMode,
    /// Largest `|n|` the run must resolve.
    pub n_max: usize,
    /// Truncation tolerance of the spectral integral, relative to its
    /// absolute mass.
    pub truncation_tol: f64,
}

impl Default for AmplitudeOptions {
    fn default() -> Self {
        AmplitudeOptions {
            mode: KernelMode::Full,
            n_max: DEFAULT_N_MAX,
            truncation_tol: 1e-12,
        }
    }
}

impl AmplitudeOptions {
    pub fn with_mode(mode: KernelMode) -> Self {
        AmplitudeOptions { mode, ..Self::default() }
    }
}

/// Amplitude of winding `n` next to the field-free amplitude of the same
/// winding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingAmplitude {
    pub n: i64,
    pub amplitude: Complex64,
    pub reference_amplitude: Complex64,
    /// Principal `arg(amplitude / reference_amplitude)`.
    pub extracted_phase: f64,
    pub route: Route,
    /// Bound on the absolute error of `amplitude`.
    pub error_estimate: f64,
}

impl WindingAmplitude {
    fn new(n: i64, amplitude: Amp, reference: Amp, route: Route) -> Self {
        let ratio = amplitude.value / reference.value;
        WindingAmplitude {
            n,
            amplitude: amplitude.value,
            reference_amplitude: reference.value,
            extracted_phase: if reference.value.norm() > 0.0 { ratio.arg() } else { f64::NAN },
            route,
            error_estimate: amplitude.error,
        }
    }

    pub fn ratio(&self) -> Complex64 {
        self.amplitude / self.reference_amplitude
    }

    /// The extracted phase moved by multiples of `2 pi` to the branch closest
    /// to `expected`.
    pub fn unwrapped_phase(&self, expected: f64) -> f64 {
        let p = self.extracted_phase;
        p + 2.0 * PI * ((expected - p) / (2.0 * PI)).round()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Amp {
    pub value: Complex64,
    pub error: f64,
}

fn check_windings(ns: &[i64], n_max: usize) -> Result<()> {
    match ns.iter().find(|n| n.unsigned_abs() as usize > n_max) {
        Some(n) => Err(Error::Range(format!("winding {n} exceeds n_max = {n_max}"))),
        None => Ok(()),
    }
}

fn raw_amplitudes(kernel: &StepKernel, steps: usize, ns: &[i64], route: Route, opts: &AmplitudeOptions) -> Result<Vec<Amp>> {
    match route {
        Route::Spectral => spectral::amplitudes(kernel, steps, ns, opts),
        Route::Covering => covering::amplitudes(kernel, steps, ns, opts.n_max),
    }
}

/// Winding amplitudes for every `n` in `ns`, sharing one evaluation.
pub fn winding_amplitudes<S: RingSystem + ?Sized>(
    model: &S,
    ns: &[i64],
    route: Route,
    opts: &AmplitudeOptions,
) -> Result<Vec<WindingAmplitude>> {
    model.validate()?;
    check_windings(ns, opts.n_max)?;
    let kernel = model.kernel(opts.mode);
    let steps = model.steps();
    let amps = raw_amplitudes(&kernel, steps, ns, route, opts)?;
    let refs = raw_amplitudes(&kernel.free(), steps, ns, route, opts)?;
    Ok(ns
        .iter()
        .zip(amps.into_iter().zip(refs))
        .map(|(&n, (a, r))| WindingAmplitude::new(n, a, r, route))
        .collect())
}

pub fn winding_amplitude<S: RingSystem + ?Sized>(
    model: &S,
    n: i64,
    route: Route,
    opts: &AmplitudeOptions,
) -> Result<WindingAmplitude> {
    Ok(winding_amplitudes(model, &[n], route, opts)?[0])
}

/// `I_0(n)`: the amplitude with the flux switched off.
pub fn free_amplitude<S: RingSystem + ?Sized>(model: &S, n: i64, route: Route, opts: &AmplitudeOptions) -> Result<Complex64> {
    model.validate()?;
    check_windings(&[n], opts.n_max)?;
    let kernel = model.kernel(opts.mode).free();
    Ok(raw_amplitudes(&kernel, model.steps(), &[n], route, opts)?[0].value)
}

/// `sum over |n| <= n_max` of the winding amplitudes: the return amplitude
/// seen by a detector that does not resolve windings.
pub fn interference_pattern<S: RingSystem + ?Sized>(model: &S, route: Route, opts: &AmplitudeOptions) -> Result<Complex64> {
    model.validate()?;
    let n_max = opts.n_max as i64;
    let ns: Vec<i64> = (-n_max..=n_max).collect();
    let kernel = model.kernel(opts.mode);
    let amps = raw_amplitudes(&kernel, model.steps(), &ns, route, opts)?;
    Ok(amps.iter().map(|a| a.value).sum())
}

/// Topological phase per winding from the amplitude ratio, and the dynamical
/// phase from the action.
pub fn extract_phase_breakdown<S: RingSystem + ?Sized>(
    model: &S,
    n: i64,
    route: Route,
    opts: &AmplitudeOptions,
) -> Result<PhaseBreakdown> {
    let topological_per_winding = if n == 0 {
        None
    } else {
        let w = winding_amplitude(model, n, route, opts)?;
        let expected = n as f64 * model.phase_per_winding();
        Some(w.unwrapped_phase(expected) / n as f64)
    };
    Ok(PhaseBreakdown {
        winding: n,
        topological_per_winding,
        dynamical: model.dynamical_phase(),
    })
}

/// The `mu^2` term of the action on the circular path, next to the closed
/// form `T q^2 mu^2 / (2 m c^2 d_m^4 hbar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicalPhase {
    /// `T q^2 mu^2 R^2 / (2 m c^2 d_m^6 hbar)`.
    pub action: f64,
    pub closed_form: f64,
    /// `action / closed_form = R^2 / d_m^2`; one only for a dipole in the
    /// ring plane.
    pub ratio: f64,
}

pub fn dynamical_phase_from_action(model: &RingModel) -> DynamicalPhase {
    let d2 = model.d_m() * model.d_m();
    let c2 = model.units.c * model.units.c;
    let coupling = model.q * model.q * model.mu * model.mu / (2.0 * model.mass * c2 * model.units.hbar);
    // Each step contributes eps q^2 |mu x r|^2 / (2 m c^2 |r|^6) with |mu x r| = |mu| R.
    let per_step = model.eps() * coupling * model.radius * model.radius / (d2 * d2 * d2);
    let closed_form = model.time * coupling / (d2 * d2);
    DynamicalPhase {
        action: per_step * model.steps as f64,
        closed_form,
        ratio: model.radius * model.radius / d2,
    }
}

/// Phase per winding from a line of dipoles with linear density `density`
/// along the ring axis: `N * integral phi1(z) dz`.
pub fn integrate_dipole_line_phase(q: f64, mu: f64, density: f64, radius: f64, units: &Units) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::input(format!("ring radius must be positive, got {radius}")));
    }
    let r2 = radius * radius;
    let pref = 2.0 * PI * q * mu * r2 / units.hbar_c();
    let phi = |z: f64| {
        let d2 = r2 + z * z;
        pref / (d2 * d2.sqrt())
    };
    let q = improper_line_quadrature(phi, ImproperOptions::with_scale(radius))?;
    Ok(density * q.value)
}

/// The two solenoid phases and how the dynamical one compares with the
/// de Broglie wavelength at the traversal speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolenoidPhases {
    pub phi_ab: f64,
    pub varphi: f64,
    /// `lambda_deB / 2 pi R` at speed `2 pi R / T`.
    pub de_broglie_over_circumference: f64,
    /// `(varphi / phi_ab) / (lambda_deB / 2 pi R)`; absent without flux.
    pub ratio_to_de_broglie: Option<f64>,
}

pub fn solenoid_phase_parameters(model: &SolenoidRingModel) -> SolenoidPhases {
    let phi_ab = model.phi_ab();
    let varphi = model.varphi();
    let speed = 2.0 * PI * model.radius / model.time;
    let lambda = 2.0 * PI * model.units.hbar / (model.mass * speed);
    let db = lambda / (2.0 * PI * model.radius);
    SolenoidPhases {
        phi_ab,
        varphi,
        de_broglie_over_circumference: db,
        ratio_to_de_broglie: (phi_ab != 0.0).then(|| varphi / phi_ab / db),
    }
}

#[cfg(test)]
mod tests;
