use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use super::*;
use crate::numerics::bessel_j;

fn model(kappa: f64, phi1: f64, steps: usize) -> RingModel {
    RingModel::dimensionless(kappa, phi1, steps).unwrap()
}

fn lin() -> AmplitudeOptions {
    AmplitudeOptions::with_mode(KernelMode::Linearized)
}

#[test]
fn derived_quantities() {
    let m = RingModel::new(2.0, 1.5, 10, 5.0, 0.5, 3.0, 0.7, Units::NATURAL).unwrap();
    assert_eq!(m.eps(), 0.5);
    assert_eq!(m.kappa(), 3.0 * 4.0 / 0.5);
    assert_eq!(m.d_m(), 2.5);
    let expected = 2.0 * PI * 0.5 * 0.7 * 4.0 / 2.5f64.powi(3);
    assert!((m.phi1() - expected).abs() < 1e-15);
    let d = model(7.0, 1.25, 12);
    assert!((d.kappa() - 7.0).abs() < 1e-12);
    assert!((d.phi1() - 1.25).abs() < 1e-15);
}

#[test]
fn invalid_models_are_rejected() {
    assert!(RingModel::new(1.0, 0.0, 1, 1.0, 1.0, 1.0, 1.0, Units::NATURAL).is_err());
    assert!(RingModel::new(0.0, 0.0, 4, 1.0, 1.0, 1.0, 1.0, Units::NATURAL).is_err());
    assert!(RingModel::dimensionless(0.0, 1.0, 4).is_err());
    let magnet = SolenoidMagnet::with_flux(1.0, 1.5, Axis::z()).unwrap();
    assert!(matches!(
        SolenoidRingModel::new(1.0, 4, 1.0, 1.0, 1.0, magnet, Units::NATURAL),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn step_kernel_examples() {
    let m = model(3.0, 2.0, 8);
    assert_eq!(step_kernel_v(&m, 0.0, false), Complex64::new(0.0, 0.0));
    let at_pi = step_kernel_v(&m, PI, false);
    assert!((at_pi - Complex64::new(0.0, 6.0)).norm() < 1e-12);
    let t: f64 = 0.01;
    let diff = step_kernel_v(&m, t, true) - step_kernel_v(&m, t, false);
    let b = m.phi1() / (2.0 * PI);
    assert_eq!(diff.re, 0.0);
    assert!((diff.im - b * (t - t.sin())).abs() < 1e-18);
    assert!((diff.im - b * t.powi(3) / 6.0).abs() < 1e-10 * b);
}

#[test]
fn fourier_coefficient_examples() {
    let k = StepKernel::new(0.0, 1.0, KernelMode::Full);
    let c = k.fourier_coefficient(0.0).unwrap();
    assert!((c.re - 0.765_197_686_557_966_6).abs() < 1e-10 && c.im.abs() < 1e-12);
    let k = StepKernel::new(0.0, 0.0, KernelMode::Full);
    assert!((k.fourier_coefficient(0.0).unwrap() - 1.0).norm() < 1e-14);
    for s in [0, 1, 5, 12] {
        let k = StepKernel::new(6.5, 0.0, KernelMode::Full);
        let c = k.fourier_coefficient(s as f64).unwrap();
        assert!((c.norm() - bessel_j(s, 6.5).unwrap().abs()).abs() < 1e-12);
    }
}

#[test]
fn jacobi_anger_matches_quadrature() {
    for kappa in [0.0, 1.0, 10.0, 100.0] {
        for phi1 in [0.0, 1.0, PI, 2.0 * PI] {
            let k = StepKernel::new(kappa, phi1 / (2.0 * PI), KernelMode::Full);
            for s in -50..=50 {
                let q = k.fourier_coefficient(s as f64).unwrap();
                let ja = k.jacobi_anger_coefficient(s).unwrap();
                assert!((q - ja).norm() < 1e-10, "kappa {kappa} phi1 {phi1} s {s}: {q} vs {ja}");
            }
        }
    }
}

#[test]
fn real_order_coefficients_follow_the_cardinal_series() {
    // Non-integer orders come from adaptive quadrature; the cardinal series of
    // the integer coefficients is an independent evaluation of the same
    // band-limited transform.
    let k = StepKernel::new(4.0, 0.3, KernelMode::Full);
    let (s0, cs) = k.coefficients(k.b);
    for xi in [0.5, -2.25, 7.1] {
        let sum: Complex64 = cs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let s = (s0 + i as i64) as f64;
                c * ((PI * (xi - s)).sin() / (PI * (xi - s)))
            })
            .sum();
        let q = k.fourier_coefficient(xi).unwrap();
        assert!((q - sum).norm() < 1e-10, "xi {xi}: {q} vs {sum}");
    }
}

#[test]
fn linearized_coefficient_is_shifted_free_transform() {
    let lin_k = StepKernel::new(3.0, 0.4, KernelMode::Linearized);
    let free = lin_k.free();
    for xi in [0.0, 1.0, -2.5] {
        let a = lin_k.fourier_coefficient(xi).unwrap();
        let b = free.fourier_coefficient(xi - 0.4).unwrap();
        assert!((a - b).norm() < 1e-11);
    }
}

#[test]
fn free_amplitude_is_even_in_winding() {
    let m = model(2.0, 0.0, 16);
    for route in [Route::Spectral, Route::Covering] {
        let ws = winding_amplitudes(&m, &[1, -1, 3, -3], route, &AmplitudeOptions::default()).unwrap();
        for pair in ws.chunks(2) {
            let (a, b) = (pair[0].amplitude, pair[1].amplitude);
            assert!((a - b).norm() <= 1e-12 * a.norm(), "{route:?}: {a} vs {b}");
            assert!((pair[0].amplitude - pair[0].reference_amplitude).norm() == 0.0);
        }
    }
}

#[test]
fn winding_sum_equals_ring_return_amplitude() {
    // On the ring itself the return amplitude is sum_s (nu c_s)^M; the winding
    // sectors with |n| <= M/2 exhaust it.
    for (kappa, steps) in [(0.7, 8), (3.0, 12), (12.0, 10)] {
        let m = model(kappa, 0.0, steps);
        let opts = AmplitudeOptions::default();
        let reach = (steps / 2) as i64;
        let ns: Vec<i64> = (-reach..=reach).collect();
        let total: Complex64 = winding_amplitudes(&m, &ns, Route::Spectral, &opts)
            .unwrap()
            .iter()
            .map(|w| w.amplitude)
            .sum();
        let kernel = m.kernel(KernelMode::Full);
        let nu = kernel.normalization();
        let ring: Complex64 = (-80..=80)
            .map(|s| (nu * kernel.jacobi_anger_coefficient(s).unwrap()).powi(steps as i32))
            .sum();
        assert!((total - ring).norm() < 1e-10 * ring.norm(), "kappa {kappa}: {total} vs {ring}");
    }
}

#[test]
fn amplitude_vanishes_beyond_reach() {
    // The kernel moves at most pi per step.
    let m = model(2.0, 0.8, 6);
    let w = winding_amplitude(&m, 4, Route::Spectral, &AmplitudeOptions::default()).unwrap();
    let w0 = winding_amplitude(&m, 0, Route::Spectral, &AmplitudeOptions::default()).unwrap();
    assert!(w.amplitude.norm() < 1e-10 * w0.amplitude.norm());
}

#[test]
fn three_steps_against_nested_quadrature() {
    // K_2(y) = integral k(u) k(y - u) du / 2pi over the overlap of supports,
    // K_3(x) = integral K_2(y) k(x - y) dy / 2pi.
    let kernel = StepKernel::new(1.5, 0.2, KernelMode::Full);
    let m = model(1.5, 0.2 * 2.0 * PI, 3);
    let nu = kernel.normalization();
    let gk = GkOptions { rel_tol: 1e-12, abs_tol: 1e-13, ..Default::default() };
    let k = |t: f64| if t.abs() <= PI { kernel.v(t).exp() } else { Complex64::new(0.0, 0.0) };
    let k2 = |y: f64| -> Complex64 {
        let lo = (y - PI).max(-PI);
        let hi = (y + PI).min(PI);
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        let q: crate::numerics::Quad<Complex64> = adaptive_gk(|u| k(u) * k(y - u), lo, hi, gk).unwrap();
        q.value / (2.0 * PI)
    };
    let k3 = |x: f64| -> Complex64 {
        let lo = (x - PI).max(-2.0 * PI);
        let hi = (x + PI).min(2.0 * PI);
        // K_2 has kinks at 0 and the support edges.
        let mut cuts = vec![lo, hi];
        if lo < 0.0 && 0.0 < hi {
            cuts.push(0.0);
        }
        cuts.sort_by(f64::total_cmp);
        let mut total = Complex64::new(0.0, 0.0);
        for w in cuts.windows(2) {
            let q: crate::numerics::Quad<Complex64> = adaptive_gk(|y| k2(y) * k(x - y), w[0], w[1], gk).unwrap();
            total += q.value;
        }
        nu * nu * nu * total / (2.0 * PI)
    };
    let opts = AmplitudeOptions::default();
    for w in winding_amplitudes(&m, &[0, 1], Route::Covering, &opts).unwrap() {
        let direct = k3(2.0 * PI * w.n as f64);
        assert!((w.amplitude - direct).norm() < 1e-8 * direct.norm(), "n {}: {} vs {direct}", w.n, w.amplitude);
    }
}

#[test]
fn two_steps_exceed_the_truncation_budget() {
    // (nu c)^2 decays only as xi^-2, so the lattice tails cannot be bounded
    // to the default tolerance within the evaluation budget.
    let m = model(1.5, 1.0, 2);
    match winding_amplitude(&m, 0, Route::Spectral, &AmplitudeOptions::default()) {
        Err(Error::Tolerance { bound, tolerance, .. }) => assert!(bound > tolerance),
        other => panic!("expected a truncation error, got {other:?}"),
    }
}

#[test]
fn routes_agree_on_desk_grid() {
    for (kappa, steps) in [(1.0, 16), (1.0, 64), (0.1, 64), (10.0, 16)] {
        let m = model(kappa, 1.3, steps);
        let ns: Vec<i64> = (-4..=4).collect();
        let opts = AmplitudeOptions::default();
        let a = winding_amplitudes(&m, &ns, Route::Spectral, &opts).unwrap();
        let b = winding_amplitudes(&m, &ns, Route::Covering, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let rel = (x.amplitude - y.amplitude).norm() / y.amplitude.norm();
            assert!(rel < 1e-6, "kappa {kappa} M {steps} n {}: {rel:e}", x.n);
        }
    }
}

#[test]
fn linearized_factorization_is_exact() {
    for steps in [16, 64] {
        for phi1 in [0.1, 1.0, PI, 5.0] {
            let m = model(3.0, phi1, steps);
            let ns: Vec<i64> = (-4..=4).collect();
            for w in winding_amplitudes(&m, &ns, Route::Spectral, &lin()).unwrap() {
                let expected = Complex64::from_polar(1.0, w.n as f64 * phi1);
                assert!((w.ratio() - expected).norm() < 1e-13, "n {} phi1 {phi1}: {}", w.n, w.ratio());
            }
        }
    }
}

#[test]
fn linearized_covering_route_confirms_the_shift() {
    let m = model(2.0, 1.1, 16);
    for w in winding_amplitudes(&m, &[-2, 1, 3], Route::Covering, &lin()).unwrap() {
        let expected = Complex64::from_polar(1.0, w.n as f64 * 1.1);
        assert!((w.ratio() - expected).norm() < 1e-8, "n {}: {}", w.n, w.ratio());
    }
}

#[test]
fn breakdown_in_linearized_mode() {
    let m = RingModel::new(1.3, 0.4, 32, 40.0, 0.8, 2.0, 0.9, Units::NATURAL).unwrap();
    let b = extract_phase_breakdown(&m, 2, Route::Spectral, &lin()).unwrap();
    let expected = 2.0 * PI * 0.8 * 0.9 * 1.69 / (1.3f64.hypot(0.4)).powi(3);
    assert!((b.topological_per_winding.unwrap() - expected).abs() < 1e-13);
    assert_eq!(b.dynamical, dynamical_phase_from_action(&m).action);
    let zero = extract_phase_breakdown(&m, 0, Route::Spectral, &lin()).unwrap();
    assert_eq!(zero.topological_per_winding, None);
}

#[test]
fn flux_quantum_solenoid_is_trivial() {
    let s = SolenoidRingModel::with_phi_ab(2.0 * PI, 2.0, 16).unwrap();
    assert!((s.phi_ab() - 2.0 * PI).abs() < 1e-12);
    let b = extract_phase_breakdown(&s, 1, Route::Spectral, &lin()).unwrap();
    assert!((b.topological_per_winding.unwrap() - 2.0 * PI).abs() < 1e-12);
    for w in winding_amplitudes(&s, &[-3, -1, 1, 2], Route::Spectral, &lin()).unwrap() {
        assert!((w.ratio() - 1.0).norm() < 1e-12);
    }
}

#[test]
fn far_dipole_phase_decays_as_cube() {
    let at = |z: f64| RingModel::new(1.0, z, 4, 1.0, 1.0, 1.0, 1.0, Units::NATURAL).unwrap().phi1();
    let r = at(2000.0) / at(1000.0);
    assert!((r - 0.125).abs() < 1e-5);
}

#[test]
fn full_mode_phase_at_moderate_kappa() {
    // Full mode carries sin theta instead of theta; at small coupling the
    // extracted phase is close to but not exactly n phi1.
    let m = model(5.0, FRAC_PI_2, 16);
    let w = winding_amplitude(&m, 1, Route::Spectral, &AmplitudeOptions::default()).unwrap();
    let c = winding_amplitude(&m, 1, Route::Covering, &AmplitudeOptions::default()).unwrap();
    assert!((w.extracted_phase - c.extracted_phase).abs() < 1e-8);
    assert!(w.extracted_phase.is_finite());
}

#[test]
fn winding_above_n_max_is_a_range_error() {
    let m = model(1.0, 0.5, 8);
    let opts = AmplitudeOptions { n_max: 3, ..Default::default() };
    assert!(matches!(winding_amplitude(&m, 4, Route::Spectral, &opts), Err(Error::Range(_))));
    assert!(matches!(free_amplitude(&m, -4, Route::Covering, &opts), Err(Error::Range(_))));
}

#[test]
fn interference_pattern_is_flux_periodic() {
    let a = SolenoidRingModel::with_phi_ab(0.7, 1.5, 16).unwrap();
    let b = SolenoidRingModel::with_phi_ab(0.7 + 2.0 * PI, 1.5, 16).unwrap();
    let pa = interference_pattern(&a, Route::Spectral, &lin()).unwrap();
    let pb = interference_pattern(&b, Route::Spectral, &lin()).unwrap();
    assert!((pa - pb).norm() < 1e-10 * pa.norm());
}

#[test]
fn dynamical_phase_examples() {
    let mut m = RingModel::new(1.5, 0.0, 10, 2.0, 1.2, 0.9, 0.0, Units::NATURAL).unwrap();
    assert_eq!(dynamical_phase_from_action(&m).action, 0.0);
    m.mu = 0.6;
    let d = dynamical_phase_from_action(&m);
    let expected = 2.0 * 1.44 * 0.36 / (2.0 * 0.9 * 1.5f64.powi(4));
    assert!((d.action - expected).abs() < 1e-14);
    assert!((d.closed_form - expected).abs() < 1e-14);
    m.z_m = 2.0;
    let d = dynamical_phase_from_action(&m);
    assert!((d.action / d.closed_form - 2.25 / 6.25).abs() < 1e-14);
    assert!((d.ratio - 2.25 / 6.25).abs() < 1e-15);
    m.time *= 3.0;
    let d3 = dynamical_phase_from_action(&m);
    assert!((d3.action - 3.0 * d.action).abs() < 1e-14);
}

#[test]
fn dipole_line_phase_is_radius_independent() {
    for r in [0.5, 1.0, 7.0] {
        let p = integrate_dipole_line_phase(1.0, 1.0, 1.0, r, &Units::NATURAL).unwrap();
        assert!((p - 4.0 * PI).abs() < 1e-8, "R {r}: {p}");
    }
    assert_eq!(integrate_dipole_line_phase(1.0, 1.0, 0.0, 1.0, &Units::NATURAL).unwrap(), 0.0);
    assert!(integrate_dipole_line_phase(1.0, 1.0, 1.0, 0.0, &Units::NATURAL).is_err());
}

#[test]
fn solenoid_parameter_examples() {
    let magnet = SolenoidMagnet::new(0.2, 0.0, 1.0, Axis::z()).unwrap();
    let s = SolenoidRingModel::new(1.0, 8, 3.0, 1.0, 1.0, magnet, Units::NATURAL).unwrap();
    let p = solenoid_phase_parameters(&s);
    assert_eq!((p.phi_ab, p.varphi, p.ratio_to_de_broglie), (0.0, 0.0, None));

    let mk = |flux: f64| {
        let magnet = SolenoidMagnet::with_flux(flux, 0.2, Axis::z()).unwrap();
        solenoid_phase_parameters(&SolenoidRingModel::new(1.0, 8, 3.0, 1.0, 1.0, magnet, Units::NATURAL).unwrap())
    };
    let (a, b) = (mk(0.5), mk(1.5));
    assert!((b.varphi / a.varphi - 9.0).abs() < 1e-12);
    // The two diagnostics differ by phi_AB / 4 pi.
    assert!((a.ratio_to_de_broglie.unwrap() - a.phi_ab / (4.0 * PI)).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linearized_phase_depends_only_on_phi1(
        phi1 in -4.0f64..4.0,
        radius in 0.3f64..5.0,
        z_m in -3.0f64..3.0,
        n in -4i64..=4,
    ) {
        let reference = model(2.0, phi1, 16);
        // Rescale mu so that phi1 is unchanged; keep kappa by scaling T with R^2.
        let d3 = radius.hypot(z_m).powi(3);
        let mu = phi1 * d3 / (2.0 * PI * radius * radius);
        let other = RingModel::new(radius, z_m, 16, 8.0 * radius * radius, 1.0, 1.0, mu, Units::NATURAL).unwrap();
        let a = winding_amplitude(&reference, n, Route::Spectral, &lin()).unwrap();
        let b = winding_amplitude(&other, n, Route::Spectral, &lin()).unwrap();
        prop_assert!((a.ratio() - b.ratio()).norm() < 1e-13);
    }

    #[test]
    fn quadrature_matches_jacobi_anger(kappa in 0.0f64..30.0, phi1 in -7.0f64..7.0, s in -50i64..=50) {
        let k = StepKernel::new(kappa, phi1 / (2.0 * PI), KernelMode::Full);
        let q = k.fourier_coefficient(s as f64).unwrap();
        prop_assert!((q - k.jacobi_anger_coefficient(s).unwrap()).norm() < 1e-10);
    }
}
