//! Closed-form AB / scalar AB / AC / scalar AC phases and a discretized
//! evaluator for the gauge-potential loop integral.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{charged_wire_e, Axis, ChargedWire};
use crate::gamma::pseudo_potential;
use crate::numerics::Vec3;
use crate::series::TimeSeries;
use crate::units::Units;

/// `q Phi / hbar c`.
pub fn phase_ab(q: f64, flux: f64, units: &Units) -> f64 {
    q * flux / units.hbar_c()
}

/// `(q/hbar) integral of delta_v dt`, trapezoidal in the samples.
pub fn phase_sab(q: f64, delta_v: &TimeSeries, units: &Units) -> f64 {
    q * delta_v.trapezoid() / units.hbar
}

/// `4 pi mu lambda / hbar c`.
pub fn phase_ac(mu: f64, lambda: f64, units: &Units) -> f64 {
    4.0 * PI * mu * lambda / units.hbar_c()
}

/// `(mu/hbar) integral of delta_b dt`.
pub fn phase_sac(mu: f64, delta_b: &TimeSeries, units: &Units) -> f64 {
    mu * delta_b.trapezoid() / units.hbar
}

/// Reduces an angle to `(-pi, pi]`. For presentation only; computations keep
/// raw radians so that multiples of the winding stay visible.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Per-winding topological phase plus the winding-independent part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseBreakdown {
    pub winding: i64,
    /// Absent for `winding == 0`.
    pub topological_per_winding: Option<f64>,
    pub dynamical: f64,
}

impl PhaseBreakdown {
    pub fn total(&self) -> f64 {
        self.winding as f64 * self.topological_per_winding.unwrap_or(0.0) + self.dynamical
    }
}

const CLOSURE_TOL: f64 = 1e-12;
const WINDING_TOL: f64 = 1e-9;

/// A closed, time-stamped path with a winding number about a reference axis.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPath {
    points: Vec<Vec3>,
    times: Vec<f64>,
    axis: Axis,
    winding: i64,
}

/// Net winding of the polygon about the axis, in turns, with a check that no
/// single step turns by more than a quarter turn.
fn accumulated_turns(points: &[Vec3], axis: &Axis) -> Result<f64> {
    let (e1, e2) = axis.dir.orthonormal_pair();
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (k, p) in points.iter().enumerate() {
        let r = axis.radial(*p);
        let (x, y) = (r.dot(e1), r.dot(e2));
        if x == 0.0 && y == 0.0 {
            return Err(Error::geometry(format!("path sample {k} lies on the reference axis")));
        }
        if let Some((px, py)) = prev {
            let step = (px * y - py * x).atan2(px * x + py * y);
            if step.abs() > 0.5 * PI {
                return Err(Error::geometry(format!(
                    "step {k} turns by {step:.3} rad about the axis; refine the path"
                )));
            }
            total += step;
        }
        prev = Some((x, y));
    }
    Ok(total / (2.0 * PI))
}

impl LoopPath {
    /// Validates closure and that `winding` matches the sampled geometry.
    pub fn new(points: Vec<Vec3>, times: Vec<f64>, axis: Axis, winding: i64) -> Result<Self> {
        let path = Self::build(points, times, axis)?;
        let turns = accumulated_turns(&path.points, &path.axis)?;
        if (turns - winding as f64).abs() > WINDING_TOL {
            return Err(Error::geometry(format!(
                "declared winding {winding} but the path turns {turns:.12} times"
            )));
        }
        Ok(LoopPath { winding, ..path })
    }

    /// Like [`LoopPath::new`] with the winding read off the geometry.
    pub fn detect(points: Vec<Vec3>, times: Vec<f64>, axis: Axis) -> Result<Self> {
        let path = Self::build(points, times, axis)?;
        let turns = accumulated_turns(&path.points, &path.axis)?;
        let winding = turns.round();
        if (turns - winding).abs() > WINDING_TOL {
            return Err(Error::geometry(format!("path turns {turns:.12} times, not an integer")));
        }
        Ok(LoopPath { winding: winding as i64, ..path })
    }

    fn build(points: Vec<Vec3>, times: Vec<f64>, axis: Axis) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::input("a loop needs at least 3 samples"));
        }
        if points.len() != times.len() {
            return Err(Error::input("path has mismatched point and time counts"));
        }
        if let Some(k) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::input(format!("non-finite coordinate in sample {k}")));
        }
        let size = points.iter().map(|p| (*p - points[0]).max_abs()).fold(1.0, f64::max);
        let gap = (points[points.len() - 1] - points[0]).norm();
        if gap > CLOSURE_TOL * size {
            return Err(Error::geometry(format!("path is not closed (gap {gap:e})")));
        }
        Ok(LoopPath { points, times, axis: Axis::new(axis.point, axis.dir)?, winding: 0 })
    }

    /// `winding` turns around a circle in the plane normal to `axis.dir`,
    /// centred at `center`, traversed uniformly over `[0, period]`.
    pub fn circle(axis: Axis, center: Vec3, radius: f64, segments: usize, winding: i64, period: f64) -> Result<Self> {
        let (e1, e2) = axis.dir.orthonormal_pair();
        Self::parametric(axis, segments, winding, period, |s| {
            let a = 2.0 * PI * s;
            center + (e1 * a.cos() + e2 * a.sin()) * radius
        })
    }

    /// Samples `curve(s)` for `s` in `[0, |winding|]` (or `[0, 1]` when the
    /// winding is zero); the curve must be 1-periodic.
    pub fn parametric<F: Fn(f64) -> Vec3>(axis: Axis, segments: usize, winding: i64, period: f64, curve: F) -> Result<Self> {
        if segments < 3 {
            return Err(Error::input("a loop needs at least 3 segments"));
        }
        let span = winding.unsigned_abs().max(1) as f64;
        let sign = if winding < 0 { -1.0 } else { 1.0 };
        let mut points: Vec<Vec3> = (0..=segments)
            .map(|k| curve(sign * span * k as f64 / segments as f64))
            .collect();
        points[segments] = points[0];
        let times = (0..=segments).map(|k| period * k as f64 / segments as f64).collect();
        Self::new(points, times, axis, winding)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    /// Every other sample, when the segment count is even.
    pub fn coarsened(&self) -> Option<LoopPath> {
        if !self.segments().is_multiple_of(2) || self.segments() < 6 {
            return None;
        }
        Some(LoopPath {
            points: self.points.iter().step_by(2).copied().collect(),
            times: self.times.iter().step_by(2).copied().collect(),
            axis: self.axis,
            winding: self.winding,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LineRule {
    /// One potential evaluation per segment, second order.
    #[default]
    Midpoint,
    /// Endpoints and midpoint, fourth order.
    Simpson,
}

impl LineRule {
    fn order(self) -> i32 {
        match self {
            LineRule::Midpoint => 2,
            LineRule::Simpson => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopPhase {
    /// `(q/hbar c) * loop integral of (A0 c dt - A . dx)`, the phase of the
    /// gauge factor multiplying the wave function.
    pub phase: f64,
    /// `-phase`: the phase the particle acquires, with the sign of the
    /// tabulated closed forms.
    pub table_phase: f64,
    pub magnitude: f64,
    pub winding: i64,
    /// Richardson estimate from the path with every other sample dropped;
    /// absent when the segment count is odd.
    pub convergence_estimate: Option<f64>,
    pub segments: usize,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn line_integral<P>(potential: &P, path: &LoopPath, units: &Units, rule: LineRule) -> Result<f64>
where
    P: Fn(Vec3, f64) -> Result<(Vec3, f64)>,
{
    let eval = |x: Vec3, t: f64, k: usize| -> Result<(Vec3, f64)> {
        let (a, a0) = potential(x, t).map_err(|e| match e {
            Error::Singularity(what) => Error::geometry(format!("{what} at path segment {k}")),
            other => other,
        })?;
        if !a.is_finite() || !a0.is_finite() {
            return Err(Error::geometry(format!("potential not finite at path segment {k}")));
        }
        Ok((a, a0))
    };
    let p = path.points();
    let t = path.times();
    let mut terms = Vec::with_capacity(path.segments());
    for k in 0..path.segments() {
        let dx = p[k + 1] - p[k];
        let dt = t[k + 1] - t[k];
        let xm = p[k] + dx * 0.5;
        let tm = t[k] + 0.5 * dt;
        let (a, a0) = match rule {
            LineRule::Midpoint => eval(xm, tm, k)?,
            LineRule::Simpson => {
                let (a_0, a0_0) = eval(p[k], t[k], k)?;
                let (a_m, a0_m) = eval(xm, tm, k)?;
                let (a_1, a0_1) = eval(p[k + 1], t[k + 1], k)?;
                ((a_0 + a_m * 4.0 + a_1) / 6.0, (a0_0 + 4.0 * a0_m + a0_1) / 6.0)
            }
        };
        terms.push(a0 * units.c * dt - a.dot(dx));
    }
    Ok(pairwise_sum(&terms))
}

/// Discretized `(q_eff / hbar c) * loop integral of (A0 c dt - A . dx)`.
///
/// `potential(x, t)` returns `(A, A0)`.
pub fn loop_phase<P>(potential: P, path: &LoopPath, q_eff: f64, units: &Units, rule: LineRule) -> Result<LoopPhase>
where
    P: Fn(Vec3, f64) -> Result<(Vec3, f64)>,
{
    let scale = q_eff / units.hbar_c();
    let phase = scale * line_integral(&potential, path, units, rule)?;
    let convergence_estimate = match path.coarsened() {
        Some(coarse) => {
            let c = scale * line_integral(&potential, &coarse, units, rule)?;
            Some((phase - c).abs() / (2f64.powi(rule.order()) - 1.0))
        }
        None => None,
    };
    Ok(LoopPhase {
        phase,
        table_phase: -phase,
        magnitude: phase.abs(),
        winding: path.winding(),
        convergence_estimate,
        segments: path.segments(),
    })
}

/// Loop phase of a dipole (moment `mu`, spin eigenvalue `spin` along the
/// wire) carried around a charged wire, through the pseudo-potential.
///
/// For winding `n` the `table_phase` field approaches `n spin 4 pi mu lambda / hbar c`.
pub fn ac_loop_phase(
    wire: &ChargedWire,
    path: &LoopPath,
    mu: f64,
    spin: f64,
    units: &Units,
    rule: LineRule,
) -> Result<LoopPhase> {
    let axis = wire.axis;
    let z0 = axis.along(path.points()[0]);
    let size = path.points().iter().map(|p| axis.radial(*p).norm()).fold(1.0, f64::max);
    if let Some(k) = path.points().iter().position(|p| (axis.along(*p) - z0).abs() > 1e-12 * size) {
        return Err(Error::geometry(format!(
            "path sample {k} leaves the plane perpendicular to the wire"
        )));
    }
    let (e1, e2) = axis.dir.orthonormal_pair();
    let e3 = axis.dir;
    let potential = |x: Vec3, _t: f64| -> Result<(Vec3, f64)> {
        let e = charged_wire_e(wire, x)?;
        let local = Vec3::new(e.dot(e1), e.dot(e2), e.dot(e3));
        let (a, a0) = pseudo_potential(local, Vec3::ZERO, spin, mu, 1.0)?;
        Ok((e1 * a.x + e2 * a.y + e3 * a.z, a0))
    };
    loop_phase(potential, path, 1.0, units, rule)
}
