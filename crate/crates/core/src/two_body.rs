//! Charge-dipole interaction identities: the magnetic energy of a dipole in
//! a moving charge's field equals the charge's coupling to the dipole's
//! vector potential, and the scalar potential of a moving dipole matches the
//! dipole's motional coupling to the charge's electric field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{dipole_vector_potential, moving_charge_b, point_charge_e, Charge, Dipole};
use crate::numerics::Vec3;
use crate::units::{FieldConvention, Units};

/// Seed for the randomized identity checks.
pub const DEFAULT_SEED: u64 = 0x7A11_5EED;

/// Pass threshold on `|lhs - rhs| / max(1, |lhs|)`.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionPair {
    pub charge: Charge,
    pub dipole: Dipole,
    pub dipole_velocity: Vec3,
}

impl InteractionPair {
    pub fn new(charge: Charge, dipole: Dipole, dipole_velocity: Vec3) -> Result<Self> {
        if charge.r == dipole.r {
            return Err(Error::Singularity("charge and dipole at the same point"));
        }
        Ok(InteractionPair { charge, dipole, dipole_velocity })
    }

    /// The same configuration with every vector mapped by `rot`.
    pub fn transformed(&self, rot: &Rotation) -> InteractionPair {
        InteractionPair {
            charge: Charge { r: rot.apply(self.charge.r), v: rot.apply(self.charge.v), ..self.charge },
            dipole: Dipole { r: rot.apply(self.dipole.r), u: rot.apply(self.dipole.u), ..self.dipole },
            dipole_velocity: rot.apply(self.dipole_velocity),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        IdentityCheck { lhs, rhs, residual: (lhs - rhs).abs() }
    }

    pub fn relative(&self) -> f64 {
        self.residual / self.lhs.abs().max(1.0)
    }

    pub fn holds(&self) -> bool {
        self.relative() < IDENTITY_TOL
    }
}

/// `mu . B_q(at dipole)` against `(q/c) v_q . A_m(at charge)`.
pub fn check_ab_sac(pair: &InteractionPair, units: &Units) -> Result<IdentityCheck> {
    check_ab_sac_in(pair, units, FieldConvention::Gaussian)
}

pub fn check_ab_sac_in(pair: &InteractionPair, units: &Units, conv: FieldConvention) -> Result<IdentityCheck> {
    let k = conv.factor();
    let b_q = moving_charge_b(&pair.charge, pair.dipole.r, units)? * k;
    let a_m = dipole_vector_potential(&pair.dipole, pair.charge.r)? * k;
    let lhs = pair.dipole.moment().dot(b_q);
    let rhs = pair.charge.q / units.c * pair.charge.v.dot(a_m);
    Ok(IdentityCheck::new(lhs, rhs))
}

/// `(v_m / c) . A_m` at the charge.
pub fn moving_dipole_scalar_potential(pair: &InteractionPair, units: &Units) -> Result<f64> {
    let a_m = dipole_vector_potential(&pair.dipole, pair.charge.r)?;
    Ok(pair.dipole_velocity.dot(a_m) / units.c)
}

/// `q A0m` against `-(v_m / c) . (mu x E_q(at dipole))`.
pub fn check_ac_sab(pair: &InteractionPair, units: &Units) -> Result<IdentityCheck> {
    check_ac_sab_in(pair, units, FieldConvention::Gaussian)
}

pub fn check_ac_sab_in(pair: &InteractionPair, units: &Units, conv: FieldConvention) -> Result<IdentityCheck> {
    let k = conv.factor();
    let lhs = pair.charge.q * moving_dipole_scalar_potential(pair, units)? * k;
    let e_q = point_charge_e(&pair.charge, pair.dipole.r)? * k;
    let rhs = -pair.dipole_velocity.dot(pair.dipole.moment().cross(e_q)) / units.c;
    Ok(IdentityCheck::new(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// Moving charge near a dipole: AB versus scalar AC.
    AbSac,
    /// Moving dipole near a charge: AC versus scalar AB.
    AcSab,
}

impl Identity {
    pub const ALL: [Identity; 2] = [Identity::AbSac, Identity::AcSab];

    pub fn check(self, pair: &InteractionPair, units: &Units, conv: FieldConvention) -> Result<IdentityCheck> {
        match self {
            Identity::AbSac => check_ab_sac_in(pair, units, conv),
            Identity::AcSab => check_ac_sab_in(pair, units, conv),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Identity::AbSac => "ab_sac",
            Identity::AcSab => "ac_sab",
        }
    }
}

/// A proper rotation matrix, rows first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    /// Uniformly random rotation from a random unit quaternion.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let (w, x, y, z) = loop {
            let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.1 && n <= 1.0 {
                break (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
            }
        };
        Rotation([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A random configuration: positions in the cube `[-1, 1]^3` at least 0.05
/// apart, speeds below `c/2`, charges in `[-2, 2]`, moments in `[0, 2]`.
/// With `moving = false` both velocities are zero.
pub fn random_pair<R: Rng>(rng: &mut R, units: &Units, moving: bool) -> InteractionPair {
    let mut cube = || Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let (rq, rm) = loop {
        let (a, b) = (cube(), cube());
        if (a - b).norm() > 0.05 {
            break (a, b);
        }
    };
    let speed = |rng: &mut R| if moving { rng.random_range(0.0..0.5) * units.c } else { 0.0 };
    let vq = random_unit(rng) * speed(rng);
    let vm = random_unit(rng) * speed(rng);
    let q = rng.random_range(-2.0..2.0);
    let mu = rng.random_range(0.0..2.0);
    let u = random_unit(rng);
    InteractionPair {
        charge: Charge { q, m: 1.0, r: rq, v: vq },
        dipole: Dipole { mu, u, r: rm },
        dipole_velocity: vm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialReport {
    pub identity: Identity,
    pub trials: usize,
    pub seed: u64,
    /// Largest `|lhs - rhs| / max(1, |lhs|)`.
    pub max_residual: f64,
    pub pass: bool,
}

/// Checks `identity` on `trials` seeded random configurations.
pub fn run_trials(identity: Identity, trials: usize, seed: u64, units: &Units, moving: bool) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::input("at least one trial is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual: f64 = 0.0;
    for _ in 0..trials {
        let pair = random_pair(&mut rng, units, moving);
        let c = identity.check(&pair, units, FieldConvention::Gaussian)?;
        max_residual = max_residual.max(c.relative());
    }
    Ok(TrialReport {
        identity,
        trials,
        seed,
        max_residual,
        pass: max_residual < IDENTITY_TOL,
    })
}
