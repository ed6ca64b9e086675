//! Shared numerical kernels: 3-vectors, quadrature rules and integer-order
//! Bessel functions.

pub mod bessel;
pub mod quadrature;
pub mod vec3;

pub use bessel::{bessel_j, bessel_j_sequence};
pub use quadrature::{
    adaptive_gk, improper_line_quadrature, periodic_quadrature, GkOptions, ImproperOptions,
    PeriodicOptions, Quad,
};
pub use vec3::Vec3;
