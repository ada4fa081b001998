//! Exact-convention quaternion and imaginary-octonion arithmetic.
//!
//! The quaternion product is the plain Hamilton product (`ij = k`). The
//! octonion product is table-driven: the basis
//! `(i, j, k, e, ie, je, ke)` of the imaginary octonions carries finitely
//! many norm-composing sign tables, and the one actually used is *searched
//! for*, not assumed — see [`MultiplicationConvention::calibrate`]. All
//! values are immutable and every operation is a pure function.

mod convention;
mod octonion;
mod quaternion;

pub use convention::{CalibrationError, ConventionFile, MultiplicationConvention, StructureSign};
pub use octonion::{calibration_phi, oct_mul, ImaginaryOctonion, Octonion};
pub use quaternion::{ImaginaryQuaternion, Quaternion};
