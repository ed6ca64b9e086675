use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde_json::{json, Value};
use topophase::fields::Axis;
use topophase::ring::{
    dynamical_phase_from_action, integrate_dipole_line_phase, solenoid_phase_parameters, winding_amplitudes,
    AmplitudeOptions, KernelMode, RingModel, RingSystem, Route, SolenoidRingModel, WindingAmplitude, DEFAULT_N_MAX,
};
use topophase::{Complex64, Units};

use crate::cli::{Format, RingArgs, RouteChoice};
use crate::commands::{Ctx, Output};
use crate::envelope::{quantity, Envelope, Verdict};
use crate::error::{missing, CliError};

const DEFAULT_STEPS: usize = 64;
const DEFAULT_ROUTE_TOL: f64 = 1e-6;
const FACTORIZATION_TOL: f64 = 1e-10;

enum Model {
    Dipole(RingModel),
    Solenoid(SolenoidRingModel),
}

impl Model {
    fn system(&self) -> &dyn RingSystem {
        match self {
            Model::Dipole(m) => m,
            Model::Solenoid(m) => m,
        }
    }

    fn units(&self) -> Units {
        match self {
            Model::Dipole(m) => m.units,
            Model::Solenoid(m) => m.units,
        }
    }

    fn describe(&self) -> Value {
        let s = self.system();
        let kappa = match self {
            Model::Dipole(m) => m.kappa(),
            Model::Solenoid(m) => m.kappa(),
        };
        let model = match self {
            Model::Dipole(m) => json!({ "kind": "dipole", "model": m }),
            Model::Solenoid(m) => json!({ "kind": "solenoid", "model": m }),
        };
        json!({ "system": model, "kappa": kappa, "steps": s.steps(), "phase_per_winding": s.phase_per_winding() })
    }

    fn diagnostics(&self) -> Value {
        match self {
            Model::Dipole(m) => {
                let d = dynamical_phase_from_action(m);
                json!({ "dynamical_phase": {
                    "action": quantity(d.action, f64::EPSILON * d.action.abs()),
                    "closed_form": quantity(d.closed_form, f64::EPSILON * d.closed_form.abs()),
                    "ratio": d.ratio,
                }})
            }
            Model::Solenoid(m) => json!({ "solenoid_phases": solenoid_phase_parameters(m) }),
        }
    }
}

fn physical(args: &RingArgs) -> bool {
    args.time.is_some()
}

fn build_model(args: &RingArgs, ctx: &Ctx, phi_override: Option<f64>) -> Result<Model, CliError> {
    let steps = args.steps.unwrap_or(DEFAULT_STEPS);
    if args.solenoid {
        if let Some(time) = args.time {
            let radius = args.radius.unwrap_or(1.0);
            let q = args.q.unwrap_or(1.0);
            let flux = match (args.flux, args.phi_ab) {
                (Some(f), _) => f,
                (None, Some(p)) => p * ctx.units.hbar_c() / q,
                (None, None) => return Err(missing("flux", "a physical solenoid run")),
            };
            let magnet = topophase::fields::SolenoidMagnet::with_flux(flux, args.magnet_radius.unwrap_or(radius / 2.0), Axis::z())?;
            let m = SolenoidRingModel::new(radius, steps, time, q, args.mass.unwrap_or(1.0), magnet, ctx.units)?;
            return Ok(Model::Solenoid(m));
        }
        let kappa = args.kappa.ok_or_else(|| missing("kappa", "a solenoid run without --time"))?;
        let phi_ab = match phi_override.or(args.phi_ab) {
            Some(p) => p,
            None => args.flux.ok_or_else(|| missing("phi-ab", "a solenoid run"))? * args.q.unwrap_or(1.0),
        };
        return Ok(Model::Solenoid(SolenoidRingModel::with_phi_ab(phi_ab, kappa, steps)?));
    }
    if let Some(time) = args.time {
        let mu = args.mu.ok_or_else(|| missing("mu", "a physical dipole run"))?;
        let m = RingModel::new(
            args.radius.unwrap_or(1.0),
            args.z_m.unwrap_or(0.0),
            steps,
            time,
            args.q.unwrap_or(1.0),
            args.mass.unwrap_or(1.0),
            mu,
            ctx.units,
        )?;
        return Ok(Model::Dipole(m));
    }
    let kappa = args.kappa.ok_or_else(|| missing("kappa", "a dimensionless dipole run"))?;
    let phi1 = phi_override.or(args.phi1).ok_or_else(|| missing("phi1", "a dimensionless dipole run"))?;
    Ok(Model::Dipole(RingModel::dimensionless(kappa, phi1, steps)?))
}

fn mode(args: &RingArgs) -> KernelMode {
    // The thin-magnet potential integrates to a linear function of the angle.
    if args.solenoid || args.dipole_line || args.linearized {
        KernelMode::Linearized
    } else {
        KernelMode::Full
    }
}

struct Run {
    amps: Vec<WindingAmplitude>,
    /// Largest relative spectral/covering deviation, when both ran.
    route_deviation: Option<f64>,
}

fn route_deviation(a: &[WindingAmplitude], b: &[WindingAmplitude]) -> f64 {
    let scale = a.iter().map(|w| w.amplitude.norm()).fold(0.0, f64::max);
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let den = x.amplitude.norm().max(y.amplitude.norm()).max(1e-10 * scale);
            if den > 0.0 { (x.amplitude - y.amplitude).norm() / den } else { 0.0 }
        })
        .fold(0.0, f64::max)
}

fn run_model(model: &Model, route: RouteChoice, opts: &AmplitudeOptions) -> Result<Run, CliError> {
    let n_max = opts.n_max as i64;
    let ns: Vec<i64> = (-n_max..=n_max).collect();
    let sys = model.system();
    Ok(match route {
        RouteChoice::Spectral => Run { amps: winding_amplitudes(sys, &ns, Route::Spectral, opts)?, route_deviation: None },
        RouteChoice::Covering => Run { amps: winding_amplitudes(sys, &ns, Route::Covering, opts)?, route_deviation: None },
        RouteChoice::Both => {
            let amps = winding_amplitudes(sys, &ns, Route::Spectral, opts)?;
            let cov = winding_amplitudes(sys, &ns, Route::Covering, opts)?;
            let route_deviation = Some(route_deviation(&amps, &cov));
            Run { amps, route_deviation }
        }
    })
}

/// `max |A(n) - e^{i n phi} A0(n)| / max |A0(n)|`.
fn factorization_residual(amps: &[WindingAmplitude], phi: f64) -> f64 {
    let scale = amps.iter().map(|w| w.reference_amplitude.norm()).fold(0.0, f64::max);
    let worst = amps
        .iter()
        .map(|w| (w.amplitude - Complex64::from_polar(1.0, w.n as f64 * phi) * w.reference_amplitude).norm())
        .fold(0.0, f64::max);
    if scale > 0.0 { worst / scale } else { worst }
}

struct Row {
    n: i64,
    amplitude: Complex64,
    error: f64,
    extracted: f64,
    expected: f64,
}

impl Row {
    fn new(w: &WindingAmplitude, phi: f64) -> Self {
        let expected = w.n as f64 * phi;
        Row { n: w.n, amplitude: w.amplitude, error: w.error_estimate, extracted: w.unwrapped_phase(expected), expected }
    }

    fn abs_error(&self) -> f64 {
        (self.extracted - self.expected).abs()
    }

    fn phase_error(&self) -> f64 {
        let a = self.amplitude.norm();
        if a > 0.0 { self.error / a } else { f64::INFINITY }
    }

    fn to_json(&self, reference: Complex64) -> Value {
        json!({
            "n": self.n,
            "re": quantity(self.amplitude.re, self.error),
            "im": quantity(self.amplitude.im, self.error),
            "reference_re": reference.re,
            "reference_im": reference.im,
            "extracted_phase": quantity(self.extracted, self.phase_error()),
            "expected_phase": self.expected,
            "abs_error": self.abs_error(),
        })
    }
}

fn options(args: &RingArgs, mode: KernelMode) -> AmplitudeOptions {
    AmplitudeOptions { mode, n_max: args.n_max.unwrap_or(DEFAULT_N_MAX), ..AmplitudeOptions::default() }
}

fn route_choice(args: &RingArgs) -> RouteChoice {
    args.route.unwrap_or(RouteChoice::Spectral)
}

fn route_tol(args: &RingArgs) -> Result<f64, CliError> {
    let tol = args.tolerance.unwrap_or(DEFAULT_ROUTE_TOL);
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn mode_name(mode: KernelMode) -> &'static str {
    match mode {
        KernelMode::Full => "full",
        KernelMode::Linearized => "linearized",
    }
}

pub fn run(args: &RingArgs, ctx: &Ctx, config: Value) -> Result<Output, CliError> {
    if args.sweep.is_some() {
        return sweep(args, ctx, config);
    }
    let tol = route_tol(args)?;
    let mut results = serde_json::Map::new();
    let mut verdicts = Vec::new();
    let mut diagnostics = serde_json::Map::new();

    let model = if args.dipole_line {
        let q = args.q.unwrap_or(1.0);
        let mu = args.mu.ok_or_else(|| missing("mu", "a dipole-line run"))?;
        let density = args.density.ok_or_else(|| missing("N", "a dipole-line run"))?;
        let radius = args.radius.unwrap_or(1.0);
        let phi = integrate_dipole_line_phase(q, mu, density, radius, &ctx.units)?;
        let closed = 4.0 * PI * q * mu * density / ctx.units.hbar_c();
        let dev = (phi - closed).abs();
        results.insert("phase_per_winding".into(), quantity(phi, dev));
        results.insert("enclosed_flux_phase".into(), quantity(closed, f64::EPSILON * closed.abs()));
        verdicts.push(Verdict::within("dipole_line_vs_flux", dev, 1e-8 * closed.abs().max(1.0)));
        match (args.kappa, args.steps) {
            (Some(kappa), steps) => Some(Model::Solenoid(SolenoidRingModel::with_phi_ab(phi, kappa, steps.unwrap_or(DEFAULT_STEPS))?)),
            (None, _) => None,
        }
    } else {
        Some(build_model(args, ctx, None)?)
    };

    if let Some(model) = model {
        let mode = mode(args);
        let opts = options(args, mode);
        let route = route_choice(args);
        let run = run_model(&model, route, &opts)?;
        let phi = model.system().phase_per_winding();
        let rows: Vec<Value> = run.amps.iter().map(|w| Row::new(w, phi).to_json(w.reference_amplitude)).collect();
        let pattern: Complex64 = run.amps.iter().map(|w| w.amplitude).sum();
        let pattern_err: f64 = run.amps.iter().map(|w| w.error_estimate).sum();
        results.insert("model".into(), model.describe());
        results.insert("mode".into(), json!(mode_name(mode)));
        results.insert("windings".into(), Value::Array(rows));
        results.insert("interference".into(), json!({ "re": quantity(pattern.re, pattern_err), "im": quantity(pattern.im, pattern_err) }));
        if mode == KernelMode::Linearized {
            verdicts.push(Verdict::within("linearized_factorization", factorization_residual(&run.amps, phi), FACTORIZATION_TOL));
        }
        if let Some(dev) = run.route_deviation {
            verdicts.push(Verdict::within("route_agreement", dev, tol));
        }
        if let Value::Object(d) = model.diagnostics() {
            diagnostics.extend(d);
        }
        diagnostics.insert("units".into(), json!(model.units()));
    }
    let env = Envelope::new("ring".into(), config, Value::Object(results), Value::Object(diagnostics), verdicts);
    if !env.pass {
        eprintln!("ring: contract check failed: {}", failed_names(&env));
    }
    Ok(Output::Json(env))
}

fn failed_names(env: &Envelope) -> String {
    env.verdicts.iter().filter(|v| !v.pass).map(|v| format!("{} = {:e} > {:e}", v.name, v.value, v.tolerance)).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: String,
    pub values: Vec<f64>,
}

/// Parses `name=a:b:points` into `points` evenly spaced values from `a` to
/// `b` inclusive.
pub fn parse_sweep(s: &str) -> Result<SweepSpec, CliError> {
    let bad = || CliError::Usage(format!("sweep `{s}` is not of the form name=start:stop:points"));
    let (name, range) = s.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, n] = parts.as_slice() else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(CliError::Usage(format!("sweep `{s}` is empty or not finite")));
    }
    let values = (0..n).map(|k| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect();
    Ok(SweepSpec { param: name.trim().to_string(), values })
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("TOPOPHASE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("TOPOPHASE_THREADS must be a positive integer, got `{v}`")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

struct SweepPoint {
    value: f64,
    rows: Vec<Row>,
    route_deviation: Option<f64>,
}

fn sweep(args: &RingArgs, ctx: &Ctx, config: Value) -> Result<Output, CliError> {
    let spec = parse_sweep(args.sweep.as_deref().unwrap_or_default())?;
    let expected_param = if args.solenoid { "phi_ab" } else { "phi1" };
    if spec.param != expected_param {
        return Err(CliError::Usage(format!(
            "this model sweeps `{expected_param}`, not `{}`",
            spec.param
        )));
    }
    if physical(args) || args.dipole_line {
        return Err(CliError::Usage("sweeps run on the dimensionless models; drop --time and --dipole-line".into()));
    }
    let tol = route_tol(args)?;
    let mode = mode(args);
    let opts = options(args, mode);
    let route = route_choice(args);

    let points: Vec<Result<SweepPoint, CliError>> = thread_pool()?.install(|| {
        spec.values
            .par_iter()
            .map(|&v| {
                let model = build_model(args, ctx, Some(v))?;
                let run = run_model(&model, route, &opts)?;
                let phi = model.system().phase_per_winding();
                Ok(SweepPoint { value: v, rows: run.amps.iter().map(|w| Row::new(w, phi)).collect(), route_deviation: run.route_deviation })
            })
            .collect()
    });
    let points = points.into_iter().collect::<Result<Vec<_>, _>>()?;

    let worst_route = points.iter().filter_map(|p| p.route_deviation).fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    let mut verdicts = Vec::new();
    if let Some(dev) = worst_route {
        verdicts.push(Verdict::within("route_agreement", dev, tol));
    }
    let param = spec.param.as_str();
    match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            writeln!(
                buf,
                "# units=natural (hbar=c=1); convention=gaussian; phases in radians; model={}; mode={}; route={}; kappa={}; steps={}",
                if args.solenoid { "solenoid" } else { "dipole" },
                mode_name(mode),
                route_name(route),
                args.kappa.unwrap_or(f64::NAN),
                args.steps.unwrap_or(DEFAULT_STEPS),
            )?;
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| CliError::Output(std::io::Error::other(e));
            w.write_record([param, "n", "re", "im", "extracted_phase", "expected_phase", "abs_error"]).map_err(io)?;
            for p in &points {
                for r in &p.rows {
                    w.write_record([
                        format!("{:e}", p.value),
                        r.n.to_string(),
                        format!("{:e}", r.amplitude.re),
                        format!("{:e}", r.amplitude.im),
                        format!("{:e}", r.extracted),
                        format!("{:e}", r.expected),
                        format!("{:e}", r.abs_error()),
                    ])
                    .map_err(io)?;
                }
            }
            w.flush()?;
            drop(w);
            let pass = verdicts.iter().all(|v| v.pass);
            if !pass {
                eprintln!("ring sweep: route disagreement {:e} exceeds {tol:e}", worst_route.unwrap_or(f64::NAN));
            }
            Ok(Output::Csv { bytes: buf, pass })
        }
        Format::Json => {
            let rows: Vec<Value> = points
                .iter()
                .flat_map(|p| {
                    p.rows.iter().map(move |r| {
                        json!({
                            param: p.value,
                            "n": r.n,
                            "re": quantity(r.amplitude.re, r.error),
                            "im": quantity(r.amplitude.im, r.error),
                            "extracted_phase": quantity(r.extracted, r.phase_error()),
                            "expected_phase": r.expected,
                            "abs_error": r.abs_error(),
                        })
                    })
                })
                .collect();
            let diagnostics = json!({ "mode": mode_name(mode), "route": route_name(route), "points": points.len() });
            Ok(Output::Json(Envelope::new("ring".into(), config, json!({ "sweep": param, "rows": rows }), diagnostics, verdicts)))
        }
    }
}

fn route_name(r: RouteChoice) -> &'static str {
    match r {
        RouteChoice::Spectral => "spectral",
        RouteChoice::Covering => "covering",
        RouteChoice::Both => "both",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_spec_is_inclusive() {
        let s = parse_sweep("phi1=0:1:5").unwrap();
        assert_eq!(s.param, "phi1");
        assert_eq!(s.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_sweep("phi_ab=2:3:1").unwrap().values, vec![2.0]);
    }

    #[test]
    fn malformed_sweeps_are_usage_errors() {
        for s in ["phi1", "phi1=0:1", "phi1=0:1:0", "phi1=a:1:3", "phi1=0:1:2:3"] {
            assert!(matches!(parse_sweep(s), Err(CliError::Usage(_))), "{s}");
        }
    }
}
