use serde::{Deserialize, Serialize};

/// Values of the reduced Planck constant and the speed of light.
///
/// Charges, moments and fields are Gaussian in both systems; only these two
/// constants change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub c: f64,
}

impl Units {
    pub const NATURAL: Units = Units { hbar: 1.0, c: 1.0 };

    /// CGS-Gaussian: erg s and cm/s.
    pub const GAUSSIAN: Units = Units {
        hbar: 1.054_571_817e-27,
        c: 2.997_924_58e10,
    };

    pub fn natural() -> Self {
        Self::NATURAL
    }

    pub fn gaussian() -> Self {
        Self::GAUSSIAN
    }

    pub fn hbar_c(&self) -> f64 {
        self.hbar * self.c
    }
}

impl Default for Units {
    fn default() -> Self {
        Self::NATURAL
    }
}

/// CGS constants used by the electron-scale examples.
pub mod cgs {
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-28;
    pub const ELEMENTARY_CHARGE: f64 = 4.803_204_712_570_263e-10;
    pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-21;

    /// Flux quantum `hc/e`, the period of the AB phase for charge `e`.
    pub fn flux_quantum() -> f64 {
        2.0 * std::f64::consts::PI * super::Units::GAUSSIAN.hbar_c() / ELEMENTARY_CHARGE
    }
}

/// Prefactor convention for point-source fields.
///
/// `Gaussian` writes `A = mu x r / r^3`; `HeavisideLorentz` carries an extra
/// `1/(4 pi)`. Only the Gaussian choice reproduces the closed-form AC phase
/// `4 pi mu lambda / hbar c`, so it is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldConvention {
    #[default]
    Gaussian,
    HeavisideLorentz,
}

impl FieldConvention {
    pub fn factor(self) -> f64 {
        match self {
            FieldConvention::Gaussian => 1.0,
            FieldConvention::HeavisideLorentz => 1.0 / (4.0 * std::f64::consts::PI),
        }
    }
}
