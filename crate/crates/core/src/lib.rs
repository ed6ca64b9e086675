//! Topological phases of the Aharonov-Bohm family.
//!
//! The crate covers the four closed-form phases (AB, scalar AB, Aharonov-Casher,
//! scalar AC), a discretized evaluator for gauge-potential loop integrals, the
//! Dirac-matrix construction that maps a neutral dipole onto an effective
//! charge, the two-body interaction identities linking the effects, and an
//! exact discretized path integral for a charge on a ring around a magnetic
//! dipole or a thin magnet, decomposed by winding number.
//!
//! Internal units are natural (`hbar = c = 1`) unless a [`Units`] value says
//! otherwise. Fields use the Gaussian convention without `1/4pi` factors.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod gamma;
pub mod io;
pub mod numerics;
pub mod phases;
pub mod ring;
pub mod series;
pub mod two_body;
pub mod units;

pub use error::{Error, Result};
pub use series::TimeSeries;
pub use numerics::vec3::Vec3;
pub use units::{FieldConvention, Units};

pub use num_complex::Complex64;
