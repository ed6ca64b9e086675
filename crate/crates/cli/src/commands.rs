use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use topophase::fields::{field_map, grid_points, write_field_csv, FieldSource, SourceAssembly};
use topophase::gamma::{build_gamma_rep, dirac_equivalence_trials, scan_tau_basis, Dimensionality, TAU_TOL};
use topophase::io::{read_path_file, read_series_file};
use topophase::phases::{ac_loop_phase, loop_phase, phase_ab, phase_ac, phase_sab, phase_sac, wrap_phase, LineRule};
use topophase::two_body::{run_trials, Identity, DEFAULT_SEED, IDENTITY_TOL};
use topophase::{TimeSeries, Units, Vec3};

use crate::cli::{EquivArgs, FieldArgs, Format, GammaArgs, GlobalArgs, LoopArgs, PhaseArgs, PhaseKind, Rule, UnitSystem};
use crate::envelope::{quantity, Envelope, Verdict};
use crate::error::{missing, CliError};

const DEFAULT_TRIALS: usize = 1000;
const DEFAULT_LOOP_TOL: f64 = 1e-6;
const DIRAC_TOL: f64 = 1e-12;

pub struct Ctx {
    pub units: Units,
    pub seed: u64,
    pub format: Option<Format>,
}

impl Ctx {
    pub fn new(global: &GlobalArgs) -> Self {
        Ctx {
            units: match global.units.unwrap_or(UnitSystem::Natural) {
                UnitSystem::Natural => Units::NATURAL,
                UnitSystem::Gaussian => Units::GAUSSIAN,
            },
            seed: global.seed.unwrap_or(DEFAULT_SEED),
            format: global.format,
        }
    }

    fn json_only(&self, command: &str) -> Result<(), CliError> {
        match self.format {
            Some(Format::Csv) => Err(CliError::Usage(format!(
                "{command} emits JSON; CSV output is available for `field` and `ring --sweep`"
            ))),
            _ => Ok(()),
        }
    }
}

pub enum Output {
    Json(Envelope),
    Csv { bytes: Vec<u8>, pass: bool },
}

impl Output {
    pub fn pass(&self) -> bool {
        match self {
            Output::Json(e) => e.pass,
            Output::Csv { pass, .. } => *pass,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Rounding bound of a closed-form evaluation.
fn exact(v: f64) -> Value {
    quantity(v, 4.0 * f64::EPSILON * v.abs())
}

/// Trapezoid value with the Richardson estimate from every other sample.
fn trapezoid_with_estimate(series: &TimeSeries) -> (f64, f64) {
    let fine = series.trapezoid();
    let n = series.len();
    if n < 3 || n.is_multiple_of(2) {
        return (fine, f64::NAN);
    }
    let pick = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<_>>();
    match TimeSeries::new(pick(series.times()), pick(series.values())) {
        Ok(coarse) => (fine, (fine - coarse.trapezoid()).abs() / 3.0),
        Err(_) => (fine, f64::NAN),
    }
}

fn read_series(path: Option<&Path>, kind: &str) -> Result<TimeSeries, CliError> {
    let path = path.ok_or_else(|| missing("series", kind))?;
    Ok(read_series_file(path)?)
}

pub fn phase(kind: PhaseKind, args: &PhaseArgs, ctx: &Ctx, config: Value) -> Result<Output, CliError> {
    ctx.json_only("phase")?;
    let u = &ctx.units;
    let what = format!("phase {}", kind.name());
    let (value, error) = match kind {
        PhaseKind::Ab => {
            let q = args.q.ok_or_else(|| missing("q", &what))?;
            let flux = args.flux.ok_or_else(|| missing("flux", &what))?;
            let v = phase_ab(q, flux, u);
            (v, 4.0 * f64::EPSILON * v.abs())
        }
        PhaseKind::Ac => {
            let mu = args.mu.ok_or_else(|| missing("mu", &what))?;
            let lambda = args.lambda.ok_or_else(|| missing("lambda", &what))?;
            let v = phase_ac(mu, lambda, u);
            (v, 4.0 * f64::EPSILON * v.abs())
        }
        PhaseKind::Sab => {
            let q = args.q.ok_or_else(|| missing("q", &what))?;
            let s = read_series(args.series.as_deref(), &what)?;
            let (_, est) = trapezoid_with_estimate(&s);
            (phase_sab(q, &s, u), (q / u.hbar).abs() * est)
        }
        PhaseKind::Sac => {
            let mu = args.mu.ok_or_else(|| missing("mu", &what))?;
            let s = read_series(args.series.as_deref(), &what)?;
            let (_, est) = trapezoid_with_estimate(&s);
            (phase_sac(mu, &s, u), (mu / u.hbar).abs() * est)
        }
    };
    let results = json!({
        "kind": kind.name(),
        "phase": quantity(value, error),
        "wrapped": quantity(wrap_phase(value), error),
    });
    let diagnostics = json!({ "units": u });
    let verdicts = vec![Verdict::check("finite", value.is_finite())];
    Ok(Output::Json(Envelope::new("phase".into(), config, results, diagnostics, verdicts)))
}

fn read_source(path: Option<&Path>, what: &str) -> Result<SourceAssembly, CliError> {
    let path = path.ok_or_else(|| missing("source", what))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read source {}: {e}", path.display())))?;
    Ok(SourceAssembly::from_toml_str(&text)?)
}

pub fn loop_cmd(args: &LoopArgs, ctx: &Ctx, config: Value) -> Result<Output, CliError> {
    ctx.json_only("loop")?;
    let source = read_source(args.source.as_deref(), "loop")?;
    let axis = match &source {
        SourceAssembly::SolenoidMagnet(m) => m.axis,
        SourceAssembly::DipoleLine(d) => d.axis,
        SourceAssembly::ChargedWire(w) => w.axis,
        other => {
            return Err(CliError::Usage(format!(
                "loop integrals need a solenoid_magnet, dipole_line or charged_wire source, not {}",
                other.kind()
            )))
        }
    };
    let path_file = args.path.as_deref().ok_or_else(|| missing("path", "loop"))?;
    let path = read_path_file(path_file, axis)?;
    let rule = match args.rule.unwrap_or_default() {
        Rule::Midpoint => LineRule::Midpoint,
        Rule::Simpson => LineRule::Simpson,
    };
    let tol = args.tolerance.unwrap_or(DEFAULT_LOOP_TOL);
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tolerance must be positive, got {tol}")));
    }
    let u = &ctx.units;
    let (lp, per_winding, effect) = match &source {
        SourceAssembly::SolenoidMagnet(m) => {
            let q = args.q.unwrap_or(1.0);
            let lp = loop_phase(|x, _| Ok((m.vector_potential(x), 0.0)), &path, q, u, rule)?;
            (lp, phase_ab(q, m.flux(), u), "ab")
        }
        SourceAssembly::DipoleLine(d) => {
            let q = args.q.unwrap_or(1.0);
            let lp = loop_phase(|x, _| Ok((d.vector_potential(x)?, 0.0)), &path, q, u, rule)?;
            (lp, phase_ab(q, d.flux(), u), "ab")
        }
        SourceAssembly::ChargedWire(w) => {
            let mu = args.mu.ok_or_else(|| missing("mu", "a loop around a charged wire"))?;
            let spin = args.spin.unwrap_or(1.0);
            if spin != 1.0 && spin != -1.0 {
                return Err(CliError::Usage(format!("--spin must be 1 or -1, got {spin}")));
            }
            let lp = ac_loop_phase(w, &path, mu, spin, u, rule)?;
            (lp, spin * phase_ac(mu, w.lambda, u), "ac")
        }
        _ => unreachable!("rejected above"),
    };
    let expected = lp.winding as f64 * per_winding;
    let deviation = (lp.table_phase - expected).abs();
    let est = lp.convergence_estimate.unwrap_or(f64::NAN);
    let results = json!({
        "effect": effect,
        "source": source.kind(),
        "phase": quantity(lp.phase, est),
        "table_phase": quantity(lp.table_phase, est),
        "magnitude": quantity(lp.magnitude, est),
        "winding": lp.winding,
        "expected_table_phase": exact(expected),
        "deviation": deviation,
    });
    let diagnostics = json!({
        "segments": lp.segments,
        "rule": rule,
        "convergence_estimate": lp.convergence_estimate,
        "units": u,
    });
    let verdicts = vec![Verdict::within("closed_form_agreement", deviation, tol)];
    Ok(Output::Json(Envelope::new("loop".into(), config, results, diagnostics, verdicts)))
}

pub fn equiv(args: &EquivArgs, ctx: &Ctx, config: Value) -> Result<Output, CliError> {
    ctx.json_only("equiv")?;
    let trials = args.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let mut results = serde_json::Map::new();
    let mut verdicts = Vec::new();
    for id in Identity::ALL {
        let r = run_trials(id, trials, ctx.seed, &ctx.units, !args.at_rest)?;
        results.insert(
            id.name().into(),
            json!({ "max_residual": quantity(r.max_residual, IDENTITY_TOL), "trials": r.trials }),
        );
        verdicts.push(Verdict::within(id.name(), r.max_residual, IDENTITY_TOL));
    }
    let diagnostics = json!({ "seed": ctx.seed, "moving": !args.at_rest, "units": ctx.units });
    Ok(Output::Json(Envelope::new("equiv".into(), config, Value::Object(results), diagnostics, verdicts)))
}

pub fn gamma(args: &GammaArgs, ctx: &Ctx, config: Value) -> Result<Output, CliError> {
    ctx.json_only("gamma")?;
    let trials = args.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let rep = build_gamma_rep();
    let defect = rep.clifford_defect();
    let planar = scan_tau_basis(&rep, Dimensionality::Planar);
    let linear = scan_tau_basis(&rep, Dimensionality::Linear);
    let dirac = dirac_equivalence_trials(&rep, trials, ctx.seed, ctx.units.c)?;
    let results = json!({
        "clifford_defect": quantity(defect, TAU_TOL),
        "tau_scan": { "planar": to_value(&planar), "linear": to_value(&linear) },
        "dirac_equivalence_max_residual": quantity(dirac, DIRAC_TOL),
    });
    let verdicts = vec![
        Verdict::within("clifford", defect, TAU_TOL),
        Verdict::check("tau_planar_sigma12", planar.solutions == ["sigma12"]),
        Verdict::check("tau_linear_gamma3gamma5", linear.solutions == ["gamma3gamma5"]),
        Verdict::within("dirac_equivalence", dirac, DIRAC_TOL),
    ];
    let diagnostics = json!({ "trials": trials, "seed": ctx.seed, "spins": [1.0, -1.0] });
    Ok(Output::Json(Envelope::new("gamma".into(), config, results, diagnostics, verdicts)))
}

fn vec3_arg(v: Option<&Vec<f64>>, flag: &str) -> Result<Vec3, CliError> {
    match v.map(Vec::as_slice) {
        Some(&[x, y, z]) => Ok(Vec3::new(x, y, z)),
        Some(_) => Err(CliError::Usage(format!("--{flag} takes three values x,y,z"))),
        None => Err(missing(flag, "field")),
    }
}

pub fn field(args: &FieldArgs, ctx: &Ctx, config: Value) -> Result<Output, CliError> {
    let source = read_source(args.source.as_deref(), "field")?;
    let lo = vec3_arg(args.lo.as_ref(), "lo")?;
    let hi = vec3_arg(args.hi.as_ref(), "hi")?;
    let n = match args.n.as_deref() {
        Some(&[a, b, c]) => [a, b, c],
        Some(_) => return Err(CliError::Usage("--n takes three counts nx,ny,nz".into())),
        None => return Err(missing("n", "field")),
    };
    let points = grid_points(lo, hi, n);
    let sources: [&dyn FieldSource; 1] = [&source];
    let samples = field_map(&sources, &points, &ctx.units)?;
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut bytes = Vec::new();
            write_field_csv(&mut bytes, &samples)?;
            Ok(Output::Csv { bytes, pass: true })
        }
        Format::Json => {
            let results = json!({ "source": source.kind(), "samples": to_value(&samples) });
            let diagnostics = json!({ "points": samples.len(), "evaluation": "closed form", "units": ctx.units });
            Ok(Output::Json(Envelope::new("field".into(), config, results, diagnostics, vec![])))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trapezoid_estimate_shrinks_with_refinement() {
        let est = |k: usize| {
            let s = TimeSeries::sample(|t| t.sin(), 0.0, PI, k).unwrap();
            trapezoid_with_estimate(&s)
        };
        let (v1, e1) = est(16);
        let (v2, e2) = est(32);
        assert!((v1 - 2.0).abs() < 2.0 * e1 && (v2 - 2.0).abs() < 2.0 * e2);
        assert!(e2 < e1 / 3.5);
        assert!(est(15).1.is_nan());
    }
}
