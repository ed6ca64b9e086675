//! 4x4 Dirac-matrix algebra: gamma matrices in the Dirac representation,
//! the conditions a spin matrix `tau` must meet for a neutral dipole to look
//! like a charge, and the resulting pseudo-potential.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::Vec3;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance for the commutation tests on `tau`.
pub const TAU_TOL: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[Complex64; 4]; 4]);

impl Matrix4 {
    pub const ZERO: Matrix4 = Matrix4([[C0; 4]; 4]);

    pub fn identity() -> Self {
        Self::diag([C1; 4])
    }

    pub fn diag(d: [Complex64; 4]) -> Self {
        let mut m = Self::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Block matrix `[[a, b], [c, d]]` from 2x2 blocks.
    pub fn blocks(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2], c: [[Complex64; 2]; 2], d: [[Complex64; 2]; 2]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a[i][j];
                m.0[i][j + 2] = b[i][j];
                m.0[i + 2][j] = c[i][j];
                m.0[i + 2][j + 2] = d[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn commutator(&self, o: &Matrix4) -> Matrix4 {
        *self * *o - *o * *self
    }

    pub fn anticommutator(&self, o: &Matrix4) -> Matrix4 {
        *self * *o + *o * *self
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn adjoint(&self) -> Matrix4 {
        let mut m = Self::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn distance(&self, o: &Matrix4) -> f64 {
        (*self - *o).norm()
    }

    /// Whether `self = lambda * o` for some complex `lambda`, within `tol`.
    pub fn proportional_to(&self, o: &Matrix4, tol: f64) -> bool {
        let on = o.norm();
        if on == 0.0 {
            return self.norm() < tol;
        }
        // lambda = <o, self> / <o, o> with the Frobenius inner product.
        let inner: Complex64 = o.0.iter().flatten().zip(self.0.iter().flatten()).map(|(a, b)| a.conj() * b).sum();
        let lambda = inner / (on * on);
        self.distance(&o.scale(lambda)) < tol * self.norm().max(1.0)
    }
}

impl fmt::Debug for Matrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.0 {
            let cells: Vec<String> = row.iter().map(|v| format!("{:+.3}{:+.3}i", v.re, v.im)).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Add for Matrix4 {
    type Output = Matrix4;
    fn add(mut self, o: Matrix4) -> Matrix4 {
        self.0.iter_mut().flatten().zip(o.0.iter().flatten()).for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Matrix4 {
    type Output = Matrix4;
    fn sub(mut self, o: Matrix4) -> Matrix4 {
        self.0.iter_mut().flatten().zip(o.0.iter().flatten()).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for Matrix4 {
    type Output = Matrix4;
    fn neg(self) -> Matrix4 {
        self.scale_re(-1.0)
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, o: Matrix4) -> Matrix4 {
        let mut m = Matrix4::ZERO;
        for i in 0..4 {
            for k in 0..4 {
                let a = self.0[i][k];
                if a == C0 {
                    continue;
                }
                for j in 0..4 {
                    m.0[i][j] += a * o.0[k][j];
                }
            }
        }
        m
    }
}

fn pauli(k: usize) -> [[Complex64; 2]; 2] {
    match k {
        1 => [[C0, C1], [C1, C0]],
        2 => [[C0, -CI], [CI, C0]],
        3 => [[C1, C0], [C0, -C1]],
        _ => panic!("Pauli index {k} out of range"),
    }
}

fn neg2(a: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [[-a[0][0], -a[0][1]], [-a[1][0], -a[1][1]]]
}

const Z2: [[Complex64; 2]; 2] = [[C0; 2]; 2];
const I2: [[Complex64; 2]; 2] = [[C1, C0], [C0, C1]];

/// Minkowski metric, signature (+, -, -, -).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Clone, Debug)]
pub struct GammaRep {
    pub gamma: [Matrix4; 4],
    /// `gamma0 gamma1 gamma2 gamma3`, without the conventional factor `i`.
    pub gamma5: Matrix4,
    pub metric: [f64; 4],
}

/// Gamma matrices in the Dirac (standard) representation.
///
/// `gamma0 = diag(1, 1, -1, -1)`, `gamma_k = [[0, sigma_k], [-sigma_k, 0]]`.
/// With the product definition used here `gamma5^2 = -1`.
pub fn build_gamma_rep() -> GammaRep {
    let g0 = Matrix4::blocks(I2, Z2, Z2, neg2(I2));
    let gk = |k| Matrix4::blocks(Z2, pauli(k), neg2(pauli(k)), Z2);
    let gamma = [g0, gk(1), gk(2), gk(3)];
    let gamma5 = g0 * gamma[1] * gamma[2] * gamma[3];
    let rep = GammaRep {
        gamma,
        gamma5,
        metric: METRIC,
    };
    assert_eq!(rep.clifford_defect(), 0.0, "Dirac representation violates the Clifford algebra");
    rep
}

impl GammaRep {
    /// Largest `|{g^mu, g^nu} - 2 g^{mu nu}|` over all index pairs. Exactly zero
    /// for this representation since all entries are 0, +-1, +-i.
    pub fn clifford_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let expect = if mu == nu {
                    Matrix4::identity().scale_re(2.0 * self.metric[mu])
                } else {
                    Matrix4::ZERO
                };
                let ac = self.gamma[mu].anticommutator(&self.gamma[nu]);
                worst = worst.max(ac.distance(&expect));
            }
        }
        worst
    }

    /// `Sigma_k = diag(sigma_k, sigma_k)`, the spin matrix.
    pub fn spin(&self, k: usize) -> Matrix4 {
        Matrix4::blocks(pauli(k), Z2, Z2, pauli(k))
    }

    /// `gamma . v` with contravariant spatial components.
    pub fn slash_spatial(&self, v: Vec3) -> Matrix4 {
        self.gamma[1].scale_re(v.x) + self.gamma[2].scale_re(v.y) + self.gamma[3].scale_re(v.z)
    }
}

/// `sigma^{mu nu} = (i/2)[gamma^mu, gamma^nu]`.
pub fn sigma_mu_nu(rep: &GammaRep, mu: usize, nu: usize) -> Matrix4 {
    assert!(mu < 4 && nu < 4, "Lorentz indices run over 0..4");
    rep.gamma[mu].commutator(&rep.gamma[nu]).scale(CI * 0.5)
}

#[derive(Debug, Clone, Serialize)]
pub struct TauReport {
    pub satisfied: bool,
    /// `||[tau, gamma0]||`
    pub commutator_gamma0: f64,
    /// `||{tau, gamma^k}||` for each active axis `k`.
    pub anticommutators: Vec<(usize, f64)>,
}

/// Checks `[tau, gamma0] = 0` and `{tau, gamma^k} = 0` for every active axis.
pub fn check_tau_conditions(rep: &GammaRep, tau: &Matrix4, active_axes: &[usize]) -> TauReport {
    let commutator_gamma0 = tau.commutator(&rep.gamma[0]).norm();
    let anticommutators: Vec<(usize, f64)> = active_axes
        .iter()
        .map(|&k| {
            assert!((1..=3).contains(&k), "active axes are spatial, 1..=3");
            (k, tau.anticommutator(&rep.gamma[k]).norm())
        })
        .collect();
    let satisfied = commutator_gamma0 < TAU_TOL && anticommutators.iter().all(|&(_, r)| r < TAU_TOL);
    TauReport {
        satisfied,
        commutator_gamma0,
        anticommutators,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimensionality {
    /// Motion confined to the 1-2 plane.
    Planar,
    /// Motion along axis 3 only.
    Linear,
}

impl Dimensionality {
    pub fn active_axes(self) -> &'static [usize] {
        match self {
            Dimensionality::Planar => &[1, 2],
            Dimensionality::Linear => &[3],
        }
    }

    pub fn inactive_axes(self) -> &'static [usize] {
        match self {
            Dimensionality::Planar => &[3],
            Dimensionality::Linear => &[1, 2],
        }
    }
}

/// `sigma^{12}` for planar motion, `i gamma3 gamma5` for motion along axis 3.
pub fn solve_tau(rep: &GammaRep, dim: Dimensionality) -> Matrix4 {
    match dim {
        Dimensionality::Planar => sigma_mu_nu(rep, 1, 2),
        Dimensionality::Linear => (rep.gamma[3] * rep.gamma5).scale(CI),
    }
}

#[derive(Debug, Clone)]
pub struct Bilinear {
    pub name: String,
    pub matrix: Matrix4,
}

/// The 16 standard bilinears `1, gamma^mu, sigma^{mu nu} (mu < nu), gamma5, gamma^mu gamma5`.
pub fn bilinear_basis(rep: &GammaRep) -> Vec<Bilinear> {
    let mut out = vec![Bilinear { name: "1".into(), matrix: Matrix4::identity() }];
    for mu in 0..4 {
        out.push(Bilinear { name: format!("gamma{mu}"), matrix: rep.gamma[mu] });
    }
    for mu in 0..4 {
        for nu in mu + 1..4 {
            out.push(Bilinear { name: format!("sigma{mu}{nu}"), matrix: sigma_mu_nu(rep, mu, nu) });
        }
    }
    out.push(Bilinear { name: "gamma5".into(), matrix: rep.gamma5 });
    for mu in 0..4 {
        out.push(Bilinear { name: format!("gamma{mu}gamma5"), matrix: rep.gamma[mu] * rep.gamma5 });
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TauScan {
    pub dimensionality: Dimensionality,
    /// Bilinears meeting the commutation conditions on the active axes.
    pub satisfying_conditions: Vec<String>,
    /// Those that also commute with gamma^k on the inactive axes, so that the
    /// substitution leaves the free motion along those axes untouched.
    pub solutions: Vec<String>,
}

/// Scans the 16 bilinears for admissible `tau`.
///
/// The bare conditions admit `gamma0` and, for linear motion, the spin
/// components transverse to the motion as well. Those act nontrivially on
/// the inactive axes; requiring `[tau, gamma^k] = 0` there leaves one
/// solution per case.
pub fn scan_tau_basis(rep: &GammaRep, dim: Dimensionality) -> TauScan {
    let mut satisfying_conditions = Vec::new();
    let mut solutions = Vec::new();
    for b in bilinear_basis(rep) {
        if !check_tau_conditions(rep, &b.matrix, dim.active_axes()).satisfied {
            continue;
        }
        satisfying_conditions.push(b.name.clone());
        let commutes_inactive = dim
            .inactive_axes()
            .iter()
            .all(|&k| b.matrix.commutator(&rep.gamma[k]).norm() < TAU_TOL);
        if commutes_inactive {
            solutions.push(b.name);
        }
    }
    TauScan {
        dimensionality: dim,
        satisfying_conditions,
        solutions,
    }
}

fn planar_precondition(e: Vec3, b: Vec3) -> Result<()> {
    for (name, v) in [("E3", e.z), ("B1", b.x), ("B2", b.y)] {
        if !(v.abs() <= TAU_TOL) {
            return Err(Error::geometry(format!(
                "planar configuration requires {name} = 0, got {v:e}"
            )));
        }
    }
    Ok(())
}

/// Effective gauge potential seen by a dipole with spin eigenvalue `s`.
///
/// `q A = -mu s (E2, -E1, 0)`, `q A0 = -mu s B3`; returned divided by `q_eff`.
pub fn pseudo_potential(e: Vec3, b: Vec3, spin: f64, mu: f64, q_eff: f64) -> Result<(Vec3, f64)> {
    planar_precondition(e, b)?;
    check_spin(spin)?;
    if q_eff == 0.0 || !q_eff.is_finite() {
        return Err(Error::input("effective charge must be finite and nonzero"));
    }
    let qa = Vec3::new(-mu * spin * e.y, mu * spin * e.x, 0.0);
    let qa0 = -mu * spin * b.z;
    Ok((qa / q_eff, qa0 / q_eff))
}

fn check_spin(spin: f64) -> Result<()> {
    if spin == 1.0 || spin == -1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("spin eigenvalue must be +1 or -1, got {spin}")))
    }
}

/// Projector `(1 + s Sigma3)/2` onto the `sigma^{12}` eigenspace.
pub fn spin_projector(rep: &GammaRep, spin: f64) -> Matrix4 {
    (Matrix4::identity() + rep.spin(3).scale_re(spin)).scale_re(0.5)
}

/// Difference between the charge-coupling and dipole-coupling interaction
/// operators on the spin eigenspace.
///
/// The charge side is `-(q/c) gamma^mu gamma0 A_mu` with `(A, A0)` from
/// [`pseudo_potential`]; the dipole side is
/// `(i mu/c) (gamma . E) gamma0 + (mu/c) Sigma . B`. Both act on
/// the image of [`spin_projector`], and the Frobenius norm of the difference
/// is returned. The value of `q` drops out.
pub fn verify_dirac_equivalence(rep: &GammaRep, e: Vec3, b: Vec3, mu: f64, spin: f64, c: f64) -> Result<f64> {
    let q = 1.0;
    let (a, a0) = pseudo_potential(e, b, spin, mu, q)?;
    let g0 = rep.gamma[0];
    // gamma^mu A_mu = gamma0 A0 - gamma . A; each potential carries gamma0.
    let charge_side = (g0 * g0.scale_re(a0) - rep.slash_spatial(a) * g0).scale_re(-q / c);
    let dipole_side = (rep.slash_spatial(e) * g0).scale(CI * (mu / c))
        + (rep.spin(1).scale_re(b.x) + rep.spin(2).scale_re(b.y) + rep.spin(3).scale_re(b.z)).scale_re(mu / c);
    let p = spin_projector(rep, spin);
    Ok(((charge_side - dipole_side) * p).norm())
}

/// Largest [`verify_dirac_equivalence`] residual over `trials` random planar
/// configurations, each checked for both spin eigenvalues.
pub fn dirac_equivalence_trials(rep: &GammaRep, trials: usize, seed: u64, c: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let e = Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0);
        let b = Vec3::new(0.0, 0.0, rng.random_range(-3.0..3.0));
        let mu = rng.random_range(-2.0..2.0);
        for spin in [1.0, -1.0] {
            worst = worst.max(verify_dirac_equivalence(rep, e, b, mu, spin, c)?);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn rep() -> GammaRep {
        build_gamma_rep()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn clifford_examples() {
        let r = rep();
        let two = Matrix4::identity().scale_re(2.0);
        assert_eq!(r.gamma[0].anticommutator(&r.gamma[0]), two);
        assert_eq!(r.gamma[1].anticommutator(&r.gamma[2]), Matrix4::ZERO);
        assert_eq!(r.clifford_defect(), 0.0);
        assert_eq!(r.gamma[0] * r.gamma[0], Matrix4::identity());
    }

    #[test]
    fn gamma5_product_squares_to_minus_one() {
        // Without the factor i, (g0 g1 g2 g3)^2 = -1; the Hermitian i g5 squares to +1.
        let r = rep();
        assert_eq!(r.gamma5 * r.gamma5, -Matrix4::identity());
        let ig5 = r.gamma5.scale(CI);
        assert_eq!(ig5 * ig5, Matrix4::identity());
        assert_eq!(ig5.adjoint(), ig5);
        for mu in 0..4 {
            assert_eq!(r.gamma5.anticommutator(&r.gamma[mu]), Matrix4::ZERO);
        }
    }

    #[test]
    fn sigma12_is_block_sigma3() {
        let r = rep();
        let s3 = Matrix4::diag([c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(sigma_mu_nu(&r, 1, 2), s3);
        assert_eq!(sigma_mu_nu(&r, 0, 0), Matrix4::ZERO);
        assert_eq!(sigma_mu_nu(&r, 1, 2), -sigma_mu_nu(&r, 2, 1));
    }

    #[test]
    fn tau_condition_examples() {
        let r = rep();
        let s12 = sigma_mu_nu(&r, 1, 2);
        assert!(check_tau_conditions(&r, &s12, &[1, 2]).satisfied);
        let lin = (r.gamma[3] * r.gamma5).scale(CI);
        assert!(check_tau_conditions(&r, &lin, &[3]).satisfied);
        let rep3 = check_tau_conditions(&r, &s12, &[1, 2, 3]);
        assert!(!rep3.satisfied);
        assert!(rep3.anticommutators[2].1 > 1.0);
    }

    #[test]
    fn solved_tau_matrices() {
        let r = rep();
        let planar = solve_tau(&r, Dimensionality::Planar);
        let linear = solve_tau(&r, Dimensionality::Linear);
        assert_eq!(planar, sigma_mu_nu(&r, 1, 2));
        // i g3 g5 = diag(sigma3, -sigma3) here
        let expect = Matrix4::diag([c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(linear, expect);
        for (m, d) in [(planar, Dimensionality::Planar), (linear, Dimensionality::Linear)] {
            assert_eq!(m.trace(), C0);
            assert!(check_tau_conditions(&r, &m, d.active_axes()).satisfied);
            assert_eq!(m.adjoint(), m);
            assert_eq!(m * m, Matrix4::identity());
        }
    }

    #[test]
    fn basis_scan_is_unique() {
        let r = rep();
        let planar = scan_tau_basis(&r, Dimensionality::Planar);
        assert_eq!(planar.solutions, vec!["sigma12".to_string()]);
        let linear = scan_tau_basis(&r, Dimensionality::Linear);
        assert_eq!(linear.solutions, vec!["gamma3gamma5".to_string()]);
        let g3g5 = r.gamma[3] * r.gamma5;
        assert!(g3g5.proportional_to(&solve_tau(&r, Dimensionality::Linear), 1e-14));
        // The bare conditions are weaker.
        assert_eq!(planar.satisfying_conditions, vec!["gamma0", "sigma12"]);
        assert_eq!(linear.satisfying_conditions.len(), 4);
    }

    #[test]
    fn basis_is_linearly_independent() {
        // Trace orthogonality of the 16 bilinears.
        let r = rep();
        let basis = bilinear_basis(&r);
        assert_eq!(basis.len(), 16);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let t = (a.matrix.adjoint() * b.matrix).trace();
                if i == j {
                    assert!((t.norm() - 4.0).abs() < 1e-14);
                } else {
                    assert!(t.norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pseudo_potential_examples() {
        let (a, a0) = pseudo_potential(Vec3::ZERO, Vec3::ZERO, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((a, a0), (Vec3::ZERO, 0.0));
        let (a, _) = pseudo_potential(Vec3::X, Vec3::ZERO, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(a, Vec3::new(0.0, 1.0, 0.0));
        let (_, a0) = pseudo_potential(Vec3::ZERO, Vec3::new(0.0, 0.0, 2.0), 1.0, 1.0, 1.0).unwrap();
        assert_eq!(a0, -2.0);
    }

    #[test]
    fn pseudo_potential_rejects_out_of_plane_fields() {
        let err = pseudo_potential(Vec3::new(0.0, 0.0, 1.0), Vec3::ZERO, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("E3"));
        let err = pseudo_potential(Vec3::ZERO, Vec3::new(0.0, 0.5, 0.0), 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("B2"));
        assert!(verify_dirac_equivalence(&rep(), Vec3::ZERO, Vec3::X, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn equivalence_zero_fields() {
        assert_eq!(verify_dirac_equivalence(&rep(), Vec3::ZERO, Vec3::ZERO, 1.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn equivalence_fails_off_the_eigenspace() {
        // The full, unprojected difference does not vanish: the identification
        // needs the spin eigenvalue.
        let r = rep();
        let e = Vec3::new(0.3, -0.7, 0.0);
        let good = verify_dirac_equivalence(&r, e, Vec3::ZERO, 1.0, 1.0, 1.0).unwrap();
        assert!(good < 1e-14);
        let (a, _) = pseudo_potential(e, Vec3::ZERO, 1.0, 1.0, 1.0).unwrap();
        let wrong = (r.slash_spatial(a) * r.gamma[0] - (r.slash_spatial(e) * r.gamma[0]).scale(CI)) * spin_projector(&r, -1.0);
        assert!(wrong.norm() > 0.1);
    }

    #[test]
    fn equivalence_random_seeded() {
        let r = rep();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let e = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), 0.0);
            let b = Vec3::new(0.0, 0.0, rng.random_range(-5.0..5.0));
            let mu = rng.random_range(-3.0..3.0);
            for s in [1.0, -1.0] {
                worst = worst.max(verify_dirac_equivalence(&r, e, b, mu, s, 1.0).unwrap());
            }
        }
        assert!(worst < 1e-12, "worst residual {worst}");
    }

    proptest! {
        #[test]
        fn associativity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = || {
                let mut x = Matrix4::ZERO;
                x.0.iter_mut().flatten().for_each(|v| *v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
                x
            };
            let (a, b, cc) = (m(), m(), m());
            prop_assert!(((a * b) * cc).distance(&(a * (b * cc))) < 1e-13);
            // Jacobi identity for commutators
            let j = a.commutator(&b.commutator(&cc)) + b.commutator(&cc.commutator(&a)) + cc.commutator(&a.commutator(&b));
            prop_assert!(j.norm() < 1e-13);
        }

        #[test]
        fn equivalence_in_gaussian_units(e1 in -1e3f64..1e3, e2 in -1e3f64..1e3, b3 in -1e3f64..1e3, spin in prop::bool::ANY) {
            let s = if spin { 1.0 } else { -1.0 };
            let c = crate::Units::GAUSSIAN.c;
            let mu = crate::units::cgs::BOHR_MAGNETON;
            let res = verify_dirac_equivalence(&rep(), Vec3::new(e1, e2, 0.0), Vec3::new(0.0, 0.0, b3), mu, s, c).unwrap();
            prop_assert!(res < 1e-12 * (mu / c) * (1.0 + e1.abs() + e2.abs() + b3.abs()));
        }
    }
}
