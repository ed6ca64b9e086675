//! Fields and potentials of point charges, point dipoles and the macroscopic
//! sources built from them.
//!
//! Gaussian convention without `1/4pi`: `A = mu x r / r^3`, `E = q r / r^3`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{adaptive_gk, improper_line_quadrature, periodic_quadrature};
use crate::numerics::{GkOptions, ImproperOptions, PeriodicOptions, Vec3};
use crate::series::TimeSeries;
use crate::units::Units;

const UNIT_TOL: f64 = 1e-12;

fn check_unit(u: Vec3, what: &str) -> Result<()> {
    if (u.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::input(format!("{what} must be a unit vector, |u| = {}", u.norm())));
    }
    Ok(())
}

/// `at - source` and its length; fails when the two coincide.
fn displacement(at: Vec3, source: Vec3, what: &'static str) -> Result<(Vec3, f64)> {
    let r = at - source;
    let d = r.norm();
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Singularity(what));
    }
    Ok((r, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Charge {
    pub q: f64,
    pub m: f64,
    pub r: Vec3,
    pub v: Vec3,
}

impl Charge {
    pub fn new(q: f64, m: f64, r: Vec3, v: Vec3, units: &Units) -> Result<Self> {
        if !(m > 0.0) {
            return Err(Error::input(format!("mass must be positive, got {m}")));
        }
        if !(v.norm() < units.c) {
            return Err(Error::input(format!("speed {} is not below c = {}", v.norm(), units.c)));
        }
        Ok(Charge { q, m, r, v })
    }

    pub fn from_momentum(q: f64, m: f64, r: Vec3, p: Vec3, units: &Units) -> Result<Self> {
        Charge::new(q, m, r, p / m, units)
    }

    /// A static charge; mass is irrelevant for the field and set to 1.
    pub fn at_rest(q: f64, r: Vec3) -> Self {
        Charge { q, m: 1.0, r, v: Vec3::ZERO }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dipole {
    pub mu: f64,
    pub u: Vec3,
    pub r: Vec3,
}

impl Dipole {
    pub fn new(mu: f64, u: Vec3, r: Vec3) -> Result<Self> {
        if mu < 0.0 {
            return Err(Error::input("dipole moment magnitude must be nonnegative"));
        }
        check_unit(u, "dipole direction")?;
        Ok(Dipole { mu, u, r })
    }

    /// Moment vector `m = mu u` with the direction normalized from `dir`.
    pub fn from_moment(m: Vec3, r: Vec3) -> Self {
        match m.unit() {
            Some(u) => Dipole { mu: m.norm(), u, r },
            None => Dipole { mu: 0.0, u: Vec3::Z, r },
        }
    }

    pub fn moment(&self) -> Vec3 {
        self.u * self.mu
    }
}

pub fn dipole_vector_potential(d: &Dipole, at: Vec3) -> Result<Vec3> {
    let (r, dist) = displacement(at, d.r, "dipole vector potential")?;
    Ok(d.moment().cross(r) / (dist * dist * dist))
}

/// `(3 r^ (m . r^) - m) / r^3`, the curl of [`dipole_vector_potential`].
pub fn dipole_b(d: &Dipole, at: Vec3) -> Result<Vec3> {
    let (r, dist) = displacement(at, d.r, "dipole magnetic field")?;
    let n = r / dist;
    let m = d.moment();
    Ok((n * (3.0 * m.dot(n)) - m) / (dist * dist * dist))
}

/// Nonrelativistic Biot-Savart field `(q/c) v x r / r^3`.
pub fn moving_charge_b(c: &Charge, at: Vec3, units: &Units) -> Result<Vec3> {
    let (r, dist) = displacement(at, c.r, "moving-charge magnetic field")?;
    Ok(c.v.cross(r) * (c.q / (units.c * dist * dist * dist)))
}

pub fn point_charge_e(c: &Charge, at: Vec3) -> Result<Vec3> {
    let (r, dist) = displacement(at, c.r, "Coulomb field")?;
    Ok(r * (c.q / (dist * dist * dist)))
}

/// An infinite straight line through `point` along the unit vector `dir`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    #[serde(default)]
    pub point: Vec3,
    #[serde(default = "default_dir")]
    pub dir: Vec3,
}

fn default_dir() -> Vec3 {
    Vec3::Z
}

impl Default for Axis {
    fn default() -> Self {
        Axis { point: Vec3::ZERO, dir: Vec3::Z }
    }
}

impl Axis {
    pub fn new(point: Vec3, dir: Vec3) -> Result<Self> {
        check_unit(dir, "axis direction")?;
        Ok(Axis { point, dir })
    }

    pub fn z() -> Self {
        Self::default()
    }

    /// Perpendicular displacement from the axis to `at`.
    pub fn radial(&self, at: Vec3) -> Vec3 {
        let d = at - self.point;
        d - self.dir * d.dot(self.dir)
    }

    /// Signed coordinate of `at` along the axis.
    pub fn along(&self, at: Vec3) -> f64 {
        (at - self.point).dot(self.dir)
    }

    fn validate(&self) -> Result<()> {
        check_unit(self.dir, "axis direction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargedWire {
    pub lambda: f64,
    #[serde(default)]
    pub axis: Axis,
}

impl ChargedWire {
    pub fn new(lambda: f64, axis: Axis) -> Self {
        ChargedWire { lambda, axis }
    }
}

/// `2 lambda rho^ / rho`.
pub fn charged_wire_e(w: &ChargedWire, at: Vec3) -> Result<Vec3> {
    let rho = w.axis.radial(at);
    let r2 = rho.norm_sq();
    if r2 == 0.0 {
        return Err(Error::Singularity("charged-wire field on the axis"));
    }
    Ok(rho * (2.0 * w.lambda / r2))
}

/// A line of identical dipoles aligned with the line itself, `density` per
/// unit length: an infinitely thin solenoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleLine {
    pub density: f64,
    pub mu: f64,
    #[serde(default)]
    pub axis: Axis,
}

impl DipoleLine {
    pub fn new(density: f64, mu: f64, axis: Axis) -> Self {
        DipoleLine { density, mu, axis }
    }

    /// `4 pi mu N`.
    pub fn flux(&self) -> f64 {
        4.0 * PI * self.mu * self.density
    }

    /// `2 N mu (dir x rho^) / rho`.
    pub fn vector_potential(&self, at: Vec3) -> Result<Vec3> {
        let rho = self.axis.radial(at);
        let r2 = rho.norm_sq();
        if r2 == 0.0 {
            return Err(Error::Singularity("dipole-line potential on the axis"));
        }
        Ok(self.axis.dir.cross(rho) * (2.0 * self.density * self.mu / r2))
    }

    /// Zero away from the line.
    pub fn magnetic_field(&self, at: Vec3) -> Result<Vec3> {
        if self.axis.radial(at).norm_sq() == 0.0 {
            return Err(Error::Singularity("dipole-line field on the axis"));
        }
        Ok(Vec3::ZERO)
    }

    fn discrete(&self, at: Vec3, spacing: f64, half_length: f64) -> Result<(Vec<Dipole>, f64)> {
        if !(spacing > 0.0 && half_length > spacing) {
            return Err(Error::input("need 0 < spacing < half_length"));
        }
        let rho = self.axis.radial(at).norm();
        if rho == 0.0 {
            return Err(Error::Singularity("dipole-line sum on the axis"));
        }
        let z0 = self.axis.along(at);
        let base = self.axis.point + self.axis.dir * z0;
        let count = (half_length / spacing).ceil() as i64;
        let moment = self.density * self.mu * spacing;
        let dipoles = (-count..count)
            .map(|j| Dipole {
                mu: moment.abs(),
                u: self.axis.dir * moment.signum(),
                r: base + self.axis.dir * ((j as f64 + 0.5) * spacing),
            })
            .collect();
        // |A| from |z| > L is at most N mu rho / L^2.
        let l = count as f64 * spacing;
        Ok((dipoles, (self.density * self.mu).abs() * rho / (l * l)))
    }

    /// Potential by direct summation over discrete dipoles spaced `spacing`
    /// apart, truncated at `|z| <= half_length` around the field point.
    /// Returns the sum and a bound on the truncated tail.
    pub fn vector_potential_direct_sum(&self, at: Vec3, spacing: f64, half_length: f64) -> Result<(Vec3, f64)> {
        let (dipoles, tail) = self.discrete(at, spacing, half_length)?;
        let mut a = Vec3::ZERO;
        for d in &dipoles {
            a += dipole_vector_potential(d, at)?;
        }
        Ok((a, tail))
    }

    pub fn magnetic_field_direct_sum(&self, at: Vec3, spacing: f64, half_length: f64) -> Result<Vec3> {
        let (dipoles, _) = self.discrete(at, spacing, half_length)?;
        let mut b = Vec3::ZERO;
        for d in &dipoles {
            b += dipole_b(d, at)?;
        }
        Ok(b)
    }
}

/// Infinitely long cylinder of radius `radius` uniformly filled with dipoles
/// along its axis, `density` per unit volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolenoidMagnet {
    pub radius: f64,
    pub density: f64,
    pub mu: f64,
    #[serde(default)]
    pub axis: Axis,
}

impl SolenoidMagnet {
    pub fn new(radius: f64, density: f64, mu: f64, axis: Axis) -> Result<Self> {
        let s = SolenoidMagnet { radius, density, mu, axis };
        s.validate()?;
        Ok(s)
    }

    /// A magnet with the given total flux, built with unit moment whose sign
    /// carries the sign of the flux.
    pub fn with_flux(flux: f64, radius: f64, axis: Axis) -> Result<Self> {
        let mu = if flux < 0.0 { -1.0 } else { 1.0 };
        SolenoidMagnet::new(radius, flux.abs() / (4.0 * PI * PI * radius * radius), mu, axis)
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || self.density < 0.0 {
            return Err(Error::input("solenoid radius must be positive and density nonnegative"));
        }
        self.axis.validate()
    }

    /// `4 pi N mu * pi R^2`.
    pub fn flux(&self) -> f64 {
        4.0 * PI * self.density * self.mu * PI * self.radius * self.radius
    }

    pub fn vector_potential(&self, at: Vec3) -> Vec3 {
        let rho = self.axis.radial(at);
        let r = rho.norm();
        if r == 0.0 {
            return Vec3::ZERO;
        }
        let phi_hat = self.axis.dir.cross(rho / r);
        let big_r2 = self.radius * self.radius;
        let a_phi = if r <= self.radius {
            self.flux() * r / (2.0 * PI * big_r2)
        } else {
            self.flux() / (2.0 * PI * r)
        };
        phi_hat * a_phi
    }

    /// Uniform `4 pi N mu` inside, zero outside.
    pub fn magnetic_field(&self, at: Vec3) -> Vec3 {
        if self.axis.radial(at).norm() < self.radius {
            self.axis.dir * (4.0 * PI * self.density * self.mu)
        } else {
            Vec3::ZERO
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngularSpeed {
    Constant(f64),
    Series(TimeSeries),
}

impl AngularSpeed {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            AngularSpeed::Constant(w) => *w,
            AngularSpeed::Series(s) => s.interpolate(t),
        }
    }
}

/// Hollow cylinder `inner <= rho <= outer` of axis-aligned dipoles rotating
/// rigidly about the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatingDipoleCylinder {
    pub inner: f64,
    pub outer: f64,
    pub density: f64,
    pub mu: f64,
    pub omega: AngularSpeed,
    #[serde(default)]
    pub axis: Axis,
}

impl RotatingDipoleCylinder {
    pub fn new(inner: f64, outer: f64, density: f64, mu: f64, omega: AngularSpeed, axis: Axis) -> Result<Self> {
        let c = RotatingDipoleCylinder { inner, outer, density, mu, omega, axis };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if !(self.inner >= 0.0 && self.outer > self.inner) || self.density < 0.0 {
            return Err(Error::input("cylinder needs 0 <= inner < outer and nonnegative density"));
        }
        self.axis.validate()
    }
}

/// Quadrature accuracy for assembly superpositions.
pub const ASSEMBLY_REL_TOL: f64 = 1e-10;

/// Scalar potential at `at` from the moving dipoles of the cylinder, by
/// superposing `(v_m / c) . A_m` over the shell volume.
///
/// The shell integral runs adaptive Gauss-Kronrod in the radius, the periodic
/// trapezoid rule in the angle and the tangent-mapped rule along the axis.
pub fn assembly_scalar_potential(cyl: &RotatingDipoleCylinder, at: Vec3, t: f64, units: &Units) -> Result<f64> {
    cyl.validate()?;
    let omega = cyl.omega.at(t);
    if omega == 0.0 || cyl.density == 0.0 || cyl.mu == 0.0 {
        return Ok(0.0);
    }
    let rho0 = cyl.axis.radial(at).norm();
    if rho0 >= cyl.inner && rho0 <= cyl.outer && cyl.inner < cyl.outer {
        return Err(Error::geometry(format!(
            "potential requested inside the shell (rho = {rho0})"
        )));
    }
    // Local frame with the axis along z and the field point on the x axis.
    let field_point = Vec3::new(rho0, 0.0, 0.0);
    let pref = cyl.density * cyl.mu * omega / units.c;

    let err_cell = std::cell::RefCell::new(None::<Error>);
    let record = |e: Error| {
        let mut slot = err_cell.borrow_mut();
        if slot.is_none() {
            *slot = Some(e);
        }
    };

    // Integrand over (rho', phi', z') in the local frame, without the prefactor.
    let inner_z = |rp: f64, phi: f64| -> f64 {
        let (s, c) = phi.sin_cos();
        let src = Vec3::new(rp * c, rp * s, 0.0);
        let vel = Vec3::new(-rp * s, rp * c, 0.0); // omega x r_m / omega
        let planar = field_point - src;
        let scale = planar.norm().max(1e-3 * cyl.outer);
        let f = |z: f64| {
            let r = Vec3::new(planar.x, planar.y, -z);
            let d2 = r.norm_sq();
            // A_m = mu z^ x r / |r|^3 per unit moment
            let a = Vec3::Z.cross(r) / (d2 * d2.sqrt());
            vel.dot(a)
        };
        match improper_line_quadrature(f, ImproperOptions { scale, rel_tol: 1e-12, abs_tol: 0.0, tail_probe: 1e6 }) {
            Ok(q) => q.value,
            Err(e) => {
                record(e);
                0.0
            }
        }
    };
    let angular = |rp: f64| -> f64 {
        let nodes = 16;
        match periodic_quadrature(
            |phi| Complex64::new(inner_z(rp, phi), 0.0),
            PeriodicOptions { nodes, max_nodes: 1 << 14, tol: 1e-11 * rp * rp.max(1e-300) },
        ) {
            Ok(q) => 2.0 * PI * q.value.re * rp,
            Err(e) => {
                record(e);
                0.0
            }
        }
    };
    // Outside the cylinder the angular integral cancels exactly, so the
    // tolerance is anchored to the size of the cavity potential instead.
    let scale = 2.0 * PI * (cyl.outer * cyl.outer - cyl.inner * cyl.inner);
    let radial = adaptive_gk(
        angular,
        cyl.inner,
        cyl.outer,
        GkOptions { rel_tol: ASSEMBLY_REL_TOL, abs_tol: ASSEMBLY_REL_TOL * scale, max_intervals: 200 },
    );
    if let Some(e) = err_cell.into_inner() {
        return Err(e);
    }
    Ok(pref * radial?.value)
}

/// Outside-minus-axis potential difference of a rotating cylinder at time `t`.
pub fn cylinder_potential_difference(cyl: &RotatingDipoleCylinder, t: f64, units: &Units) -> Result<f64> {
    let (e1, _) = cyl.axis.dir.orthonormal_pair();
    let outside = cyl.axis.point + e1 * (2.0 * cyl.outer);
    let v_out = assembly_scalar_potential(cyl, outside, t, units)?;
    let v_axis = assembly_scalar_potential(cyl, cyl.axis.point, t, units)?;
    Ok(v_out - v_axis)
}

/// A current loop whose field difference `delta_b(t)` is prescribed directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeVaryingLoop {
    pub delta_b: TimeSeries,
}

/// Macroscopic sources, tagged by `kind` in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceAssembly {
    DipoleLine(DipoleLine),
    SolenoidMagnet(SolenoidMagnet),
    ChargedWire(ChargedWire),
    RotatingDipoleCylinder(RotatingDipoleCylinder),
    TimeVaryingLoop(TimeVaryingLoop),
}

impl SourceAssembly {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let a: SourceAssembly = toml::from_str(s).map_err(|e| Error::input(format!("source spec: {e}")))?;
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceAssembly::DipoleLine(d) => {
                if d.density < 0.0 {
                    return Err(Error::input("dipole-line density must be nonnegative"));
                }
                d.axis.validate()
            }
            SourceAssembly::SolenoidMagnet(s) => s.validate(),
            SourceAssembly::ChargedWire(w) => w.axis.validate(),
            SourceAssembly::RotatingDipoleCylinder(c) => c.validate(),
            SourceAssembly::TimeVaryingLoop(_) => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SourceAssembly::DipoleLine(_) => "dipole_line",
            SourceAssembly::SolenoidMagnet(_) => "solenoid_magnet",
            SourceAssembly::ChargedWire(_) => "charged_wire",
            SourceAssembly::RotatingDipoleCylinder(_) => "rotating_dipole_cylinder",
            SourceAssembly::TimeVaryingLoop(_) => "time_varying_loop",
        }
    }
}

/// Enclosed flux of a solenoid magnet or dipole line.
pub fn assembly_flux(s: &SourceAssembly) -> Result<f64> {
    match s {
        SourceAssembly::SolenoidMagnet(m) => Ok(m.flux()),
        SourceAssembly::DipoleLine(d) => Ok(d.flux()),
        other => Err(Error::input(format!("no enclosed flux for a {}", other.kind()))),
    }
}

/// Static electric and magnetic fields of a source.
pub trait FieldSource {
    fn electric(&self, at: Vec3, units: &Units) -> Result<Vec3>;
    fn magnetic(&self, at: Vec3, units: &Units) -> Result<Vec3>;
}

impl FieldSource for Charge {
    fn electric(&self, at: Vec3, _: &Units) -> Result<Vec3> {
        point_charge_e(self, at)
    }
    fn magnetic(&self, at: Vec3, units: &Units) -> Result<Vec3> {
        moving_charge_b(self, at, units)
    }
}

impl FieldSource for Dipole {
    fn electric(&self, at: Vec3, _: &Units) -> Result<Vec3> {
        displacement(at, self.r, "dipole field")?;
        Ok(Vec3::ZERO)
    }
    fn magnetic(&self, at: Vec3, _: &Units) -> Result<Vec3> {
        dipole_b(self, at)
    }
}

impl FieldSource for SourceAssembly {
    fn electric(&self, at: Vec3, _: &Units) -> Result<Vec3> {
        match self {
            SourceAssembly::ChargedWire(w) => charged_wire_e(w, at),
            SourceAssembly::DipoleLine(d) => d.magnetic_field(at).map(|_| Vec3::ZERO),
            SourceAssembly::SolenoidMagnet(_) => Ok(Vec3::ZERO),
            other => Err(Error::input(format!("{} has no static field map", other.kind()))),
        }
    }
    fn magnetic(&self, at: Vec3, _: &Units) -> Result<Vec3> {
        match self {
            SourceAssembly::ChargedWire(_) => Ok(Vec3::ZERO),
            SourceAssembly::DipoleLine(d) => d.magnetic_field(at),
            SourceAssembly::SolenoidMagnet(s) => Ok(s.magnetic_field(at)),
            other => Err(Error::input(format!("{} has no static field map", other.kind()))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample {
    pub at: Vec3,
    pub e: Vec3,
    pub b: Vec3,
}

/// Superposed fields of all sources at each point.
pub fn field_map(sources: &[&dyn FieldSource], points: &[Vec3], units: &Units) -> Result<Vec<FieldSample>> {
    points
        .iter()
        .map(|&at| {
            let mut e = Vec3::ZERO;
            let mut b = Vec3::ZERO;
            for s in sources {
                e += s.electric(at, units)?;
                b += s.magnetic(at, units)?;
            }
            Ok(FieldSample { at, e, b })
        })
        .collect()
}

/// CSV with header `x,y,z,Ex,Ey,Ez,Bx,By,Bz`.
pub fn write_field_csv<W: Write>(out: W, samples: &[FieldSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["x", "y", "z", "Ex", "Ey", "Ez", "Bx", "By", "Bz"]).map_err(io)?;
    for s in samples {
        let row: Vec<String> = [s.at, s.e, s.b]
            .iter()
            .flat_map(|v| v.to_array())
            .map(|x| format!("{x:e}"))
            .collect();
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Uniform grid of points spanning `[lo, hi]` with `n` samples per axis
/// (a single sample sits at `lo`).
pub fn grid_points(lo: Vec3, hi: Vec3, n: [usize; 3]) -> Vec<Vec3> {
    let coord = |a: f64, b: f64, k: usize, n: usize| if n <= 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
    let mut pts = Vec::with_capacity(n[0] * n[1] * n[2]);
    for i in 0..n[0].max(1) {
        for j in 0..n[1].max(1) {
            for k in 0..n[2].max(1) {
                pts.push(Vec3::new(
                    coord(lo.x, hi.x, i, n[0]),
                    coord(lo.y, hi.y, j, n[1]),
                    coord(lo.z, hi.z, k, n[2]),
                ));
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const NAT: Units = Units::NATURAL;

    /// d f_i / d x_j by central differences: second order, or fourth order
    /// with the five-point stencil.
    fn partial<F: Fn(Vec3) -> Vec3>(f: &F, at: Vec3, i: usize, j: usize, h: f64, fourth: bool) -> f64 {
        let mut e = [0.0; 3];
        e[j] = h;
        let e = Vec3::from(e);
        let g = |k: f64| f(at + e * k).component(i);
        if fourth {
            (g(-2.0) - 8.0 * g(-1.0) + 8.0 * g(1.0) - g(2.0)) / (12.0 * h)
        } else {
            (g(1.0) - g(-1.0)) / (2.0 * h)
        }
    }

    fn curl_with<F: Fn(Vec3) -> Vec3>(f: F, at: Vec3, h: f64, fourth: bool) -> Vec3 {
        let d = |i, j| partial(&f, at, i, j, h, fourth);
        Vec3::new(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1))
    }

    fn curl<F: Fn(Vec3) -> Vec3>(f: F, at: Vec3, h: f64) -> Vec3 {
        curl_with(f, at, h, false)
    }

    fn div<F: Fn(Vec3) -> Vec3>(f: F, at: Vec3, h: f64) -> f64 {
        (0..3).map(|j| partial(&f, at, j, j, h, true)).sum()
    }

    fn zdip() -> Dipole {
        Dipole::new(1.0, Vec3::Z, Vec3::ZERO).unwrap()
    }

    #[test]
    fn dipole_potential_examples() {
        let d = zdip();
        assert_eq!(dipole_vector_potential(&d, Vec3::X).unwrap(), Vec3::Y);
        assert_eq!(dipole_vector_potential(&d, Vec3::new(0.0, 0.0, 3.0)).unwrap(), Vec3::ZERO);
        let p = Vec3::new(0.3, -1.2, 0.7);
        let a1 = dipole_vector_potential(&d, p).unwrap().norm();
        let a2 = dipole_vector_potential(&d, p * 2.0).unwrap().norm();
        assert!((a2 / a1 - 0.25).abs() < 1e-14);
        assert!(matches!(dipole_vector_potential(&d, Vec3::ZERO), Err(Error::Singularity(_))));
    }

    #[test]
    fn dipole_field_examples() {
        let d = zdip();
        assert_eq!(dipole_b(&d, Vec3::Z).unwrap(), Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(dipole_b(&d, Vec3::X).unwrap(), Vec3::new(0.0, 0.0, -1.0));
        assert!(dipole_b(&d, Vec3::ZERO).is_err());
    }

    #[test]
    fn moving_charge_examples() {
        let c = Charge::new(1.0, 1.0, Vec3::X, Vec3::Y, &Units::NATURAL).unwrap_err();
        // |v| = c is rejected; use a slower charge and rescale.
        assert!(c.to_string().contains("not below"));
        let c = Charge::new(1.0, 1.0, Vec3::X, Vec3::Y * 0.5, &NAT).unwrap();
        assert_eq!(moving_charge_b(&c, Vec3::ZERO, &NAT).unwrap() * 2.0, Vec3::Z);
        let par = Charge::new(1.0, 1.0, Vec3::X, Vec3::X * 0.5, &NAT).unwrap();
        assert_eq!(moving_charge_b(&par, Vec3::ZERO, &NAT).unwrap().norm(), 0.0);
        let rest = Charge::at_rest(1.0, Vec3::X);
        assert_eq!(moving_charge_b(&rest, Vec3::ZERO, &NAT).unwrap(), Vec3::ZERO);
        // With c = 10 the unit-velocity example is admissible.
        let units = Units { hbar: 1.0, c: 10.0 };
        let c = Charge::new(10.0, 1.0, Vec3::X, Vec3::Y, &units).unwrap();
        assert_eq!(moving_charge_b(&c, Vec3::ZERO, &units).unwrap(), Vec3::Z);
    }

    #[test]
    fn coulomb_examples() {
        let c = Charge::at_rest(1.0, Vec3::ZERO);
        assert_eq!(point_charge_e(&c, Vec3::X).unwrap(), Vec3::X);
        let e1 = point_charge_e(&c, Vec3::new(1.0, 1.0, 0.0)).unwrap().norm();
        let e2 = point_charge_e(&c, Vec3::new(2.0, 2.0, 0.0)).unwrap().norm();
        assert!((e2 / e1 - 0.25).abs() < 1e-15);
        let neg = Charge::at_rest(-1.0, Vec3::ZERO);
        assert_eq!(point_charge_e(&neg, Vec3::X).unwrap(), -Vec3::X);
    }

    #[test]
    fn wire_examples() {
        let w = ChargedWire::new(1.0, Axis::z());
        let e = charged_wire_e(&w, Vec3::new(0.0, 2.0, 5.0)).unwrap();
        assert!((e - Vec3::Y).norm() < 1e-15);
        assert_eq!(charged_wire_e(&ChargedWire::new(0.0, Axis::z()), Vec3::X).unwrap(), Vec3::ZERO);
        assert!(charged_wire_e(&w, Vec3::new(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn wire_matches_superposed_point_charges() {
        let w = ChargedWire::new(0.7, Axis::z());
        let at = Vec3::new(0.4, -1.1, 0.3);
        // Pair charges at z0 +- z so the axial component, which decays only as
        // z^-2, cancels inside the integrand.
        let e = |z: f64| point_charge_e(&Charge::at_rest(w.lambda, Vec3::new(0.0, 0.0, z)), at).unwrap();
        let comp = |i: usize| {
            improper_line_quadrature(
                |z| 0.5 * (e(at.z + z) + e(at.z - z)).component(i),
                ImproperOptions { abs_tol: 1e-14, ..ImproperOptions::default() },
            )
            .unwrap()
            .value
        };
        let sum = Vec3::new(comp(0), comp(1), comp(2));
        assert!((sum - charged_wire_e(&w, at).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn solenoid_examples() {
        let s = SolenoidMagnet::with_flux(3.0, 0.5, Axis::z()).unwrap();
        assert!((s.flux() - 3.0).abs() < 1e-14);
        assert!(s.vector_potential(Vec3::new(1e9, 0.0, 0.0)).norm() < 1e-9);
        // Loop integral on an exterior circle, spectrally accurate trapezoid.
        let n = 64;
        let mut total = 0.0;
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            let p = Vec3::new(2.0 * t.cos(), 2.0 * t.sin(), 0.0);
            let tangent = Vec3::new(-2.0 * t.sin(), 2.0 * t.cos(), 0.0);
            total += s.vector_potential(p).dot(tangent) * 2.0 * PI / n as f64;
        }
        assert!((total - 3.0).abs() < 1e-12);
        for p in [Vec3::new(1.0, 0.2, 0.0), Vec3::new(-0.7, 0.9, 3.0)] {
            let b = curl_with(|x| s.vector_potential(x), p, 1e-3, true);
            assert!(b.norm() < 1e-10, "exterior curl {b:?}");
        }
        let inside = curl(|x| s.vector_potential(x), Vec3::new(0.1, 0.1, 0.0), 1e-4);
        assert!((inside - s.magnetic_field(Vec3::ZERO)).norm() < 1e-8);
    }

    #[test]
    fn flux_examples() {
        let s = SourceAssembly::SolenoidMagnet(SolenoidMagnet::new(1.0, 1.0, 1.0, Axis::z()).unwrap());
        assert!((assembly_flux(&s).unwrap() - 4.0 * PI * PI).abs() < 1e-14);
        let l = SourceAssembly::DipoleLine(DipoleLine::new(1.0, 1.0, Axis::z()));
        assert!((assembly_flux(&l).unwrap() - 4.0 * PI).abs() < 1e-15);
        let z = SourceAssembly::DipoleLine(DipoleLine::new(1.0, 0.0, Axis::z()));
        assert_eq!(assembly_flux(&z).unwrap(), 0.0);
        let w = SourceAssembly::ChargedWire(ChargedWire::new(1.0, Axis::z()));
        assert!(assembly_flux(&w).is_err());
    }

    #[test]
    fn dipole_line_potential_encloses_flux() {
        let l = DipoleLine::new(0.3, 2.0, Axis::z());
        let at = Vec3::new(0.0, 1.5, 0.0);
        let a = l.vector_potential(at).unwrap();
        // A_phi * 2 pi rho = flux
        assert!((a.norm() * 2.0 * PI * 1.5 - l.flux()).abs() < 1e-13);
        assert!(a.dot(Vec3::new(-1.0, 0.0, 0.0)) > 0.0);
    }

    #[test]
    fn dipole_line_direct_sum_converges() {
        let l = DipoleLine::new(1.0, 1.0, Axis::z());
        let at = Vec3::new(1.0, 0.0, 0.2);
        let exact = l.vector_potential(at).unwrap();
        let mut errs = Vec::new();
        for h in [1.0, 0.5, 0.25] {
            let (a, tail) = l.vector_potential_direct_sum(at, h, 3000.0).unwrap();
            assert!(tail < 1e-6);
            errs.push((a - exact).norm());
        }
        // At least second order; the midpoint rule on a smooth decaying
        // integrand does much better.
        assert!(errs[1] <= errs[0] / 4.0 && errs[2] <= errs[1] / 4.0 + 1e-6, "{errs:?}");
        let b = l.magnetic_field_direct_sum(at, 0.25, 3000.0).unwrap();
        assert!(b.norm() < 1e-6);
    }

    #[test]
    fn rotating_cylinder_static_is_zero() {
        let c = RotatingDipoleCylinder::new(1.0, 2.0, 1.0, 1.0, AngularSpeed::Constant(0.0), Axis::z()).unwrap();
        assert_eq!(assembly_scalar_potential(&c, Vec3::ZERO, 0.0, &NAT).unwrap(), 0.0);
    }

    /// V(rho) = -(2 pi N omega mu / c) (b^2 - max(a, rho)^2) outside the shell
    /// material, from integrating (v/c) . A over z, angle and radius in turn.
    fn cylinder_oracle(c: &RotatingDipoleCylinder, rho: f64, omega: f64) -> f64 {
        let m = rho.max(c.inner);
        let span = (c.outer * c.outer - m * m).max(0.0);
        -2.0 * PI * c.density * omega * c.mu * span
    }

    #[test]
    fn rotating_cylinder_matches_oracle() {
        let c = RotatingDipoleCylinder::new(0.5, 1.0, 0.8, 1.3, AngularSpeed::Constant(0.6), Axis::z()).unwrap();
        for rho in [0.0, 0.3, 1.5, 3.0] {
            let v = assembly_scalar_potential(&c, Vec3::new(rho, 0.0, 0.1), 0.0, &NAT).unwrap();
            let o = cylinder_oracle(&c, rho, 0.6);
            assert!((v - o).abs() < 1e-8 * (1.0 + o.abs()), "rho {rho}: {v} vs {o}");
        }
        assert!(assembly_scalar_potential(&c, Vec3::new(0.7, 0.0, 0.0), 0.0, &NAT).is_err());
    }

    #[test]
    fn rotating_cylinder_difference_constant_along_axis_and_linear() {
        let mk = |w: f64| RotatingDipoleCylinder::new(0.5, 1.0, 1.0, 1.0, AngularSpeed::Constant(w), Axis::z()).unwrap();
        let c = mk(0.01);
        let diffs: Vec<f64> = [-2.0, 0.0, 3.5]
            .iter()
            .map(|&z| {
                let out = assembly_scalar_potential(&c, Vec3::new(2.0, 0.0, z), 0.0, &NAT).unwrap();
                let inn = assembly_scalar_potential(&c, Vec3::new(0.0, 0.0, z), 0.0, &NAT).unwrap();
                out - inn
            })
            .collect();
        for d in &diffs {
            assert!((d - diffs[0]).abs() < 1e-6);
        }
        let d1 = cylinder_potential_difference(&mk(1e-3), 0.0, &NAT).unwrap();
        let d2 = cylinder_potential_difference(&mk(2e-3), 0.0, &NAT).unwrap();
        assert!((d2 / d1 - 2.0).abs() < 1e-8);
        let expect = 2.0 * PI * 1e-3 * (1.0 - 0.25);
        assert!((d1 - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn rotating_cylinder_follows_series() {
        let s = TimeSeries::new(vec![0.0, 1.0], vec![0.0, 2.0]).unwrap();
        let c = RotatingDipoleCylinder::new(0.5, 1.0, 1.0, 1.0, AngularSpeed::Series(s), Axis::z()).unwrap();
        let half = cylinder_potential_difference(&c, 0.5, &NAT).unwrap();
        assert!((half - 2.0 * PI * 0.75).abs() < 1e-8);
    }

    #[test]
    fn assembly_toml_roundtrip() {
        let src = r#"
kind = "solenoid_magnet"
radius = 0.5
density = 2.0
mu = 1.0
"#;
        let a = SourceAssembly::from_toml_str(src).unwrap();
        assert_eq!(a.kind(), "solenoid_magnet");
        assert!((assembly_flux(&a).unwrap() - 4.0 * PI * 2.0 * PI * 0.25).abs() < 1e-13);
        let cyl = r#"
kind = "rotating_dipole_cylinder"
inner = 1.0
outer = 2.0
density = 1.0
mu = 1.0
omega = { t = [0.0, 1.0], v = [0.0, 1.0] }
"#;
        assert!(matches!(SourceAssembly::from_toml_str(cyl).unwrap(), SourceAssembly::RotatingDipoleCylinder(_)));
        let bad = "kind = \"solenoid_magnet\"\nradius = -1.0\ndensity = 1.0\nmu = 1.0\n";
        assert!(SourceAssembly::from_toml_str(bad).is_err());
        let tv = "kind = \"time_varying_loop\"\ndelta_b = { t = [1.0, 0.0], v = [0.0, 0.0] }\n";
        assert!(SourceAssembly::from_toml_str(tv).is_err());
    }

    #[test]
    fn field_map_csv() {
        let wire = SourceAssembly::ChargedWire(ChargedWire::new(1.0, Axis::z()));
        let pts = grid_points(Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0), [2, 1, 1]);
        let samples = field_map(&[&wire], &pts, &NAT).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,z,Ex,Ey,Ez,Bx,By,Bz");
        assert!(lines.next().unwrap().starts_with("1e0,0e0,0e0,2e0,"));
    }

    proptest! {
        #[test]
        fn dipole_field_is_curl_of_potential(x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0,
                                             mx in -1.0f64..1.0, my in -1.0f64..1.0, mz in -1.0f64..1.0) {
            let at = Vec3::new(x, y, z);
            prop_assume!(at.norm() > 1.0);
            let d = Dipole::from_moment(Vec3::new(mx, my, mz), Vec3::ZERO);
            let num = curl(|p| dipole_vector_potential(&d, p).unwrap(), at, 1e-4);
            let b = dipole_b(&d, at).unwrap();
            prop_assert!((num - b).norm() < 1e-6);
            prop_assert!(div(|p| dipole_b(&d, p).unwrap(), at, 1e-3).abs() < 1e-8);
        }

        #[test]
        fn solenoid_field_divergence_free(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -1.0f64..1.0) {
            let s = SolenoidMagnet::with_flux(2.0, 1.0, Axis::z()).unwrap();
            let at = Vec3::new(x, y, z);
            let rho = (x * x + y * y).sqrt();
            prop_assume!((rho - 1.0).abs() > 0.01);
            prop_assert!(div(|p| s.magnetic_field(p), at, 1e-3).abs() < 1e-8);
            prop_assert!(div(|p| s.vector_potential(p), at, 1e-3).abs() < 1e-8);
        }
    }
}
