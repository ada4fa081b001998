//! Quaternionic moment maps, exact integer weight predicates, and numerical
//! certificates for the weighted quotient constructions on the 27- and
//! 31-spheres.
//!
//! The crate is organized around six concerns:
//!
//! * [`algebra`] — quaternion and imaginary-octonion arithmetic, including
//!   the calibration search that freezes the octonion sign table.
//! * [`momentmaps`] — the `Sp(1)`, weighted-circle, and 2-torus moment maps,
//!   their analytic Jacobians, group actions and Killing fields.
//! * [`weights`] — exact integer predicates: admissibility, freeness, minor
//!   and box determinants, isotropy orders, enumerations.
//! * [`levelset`] — Gauss-Newton projection onto the constraint varieties,
//!   seeded sampling, and the rank/vertex/co-associativity certificates.
//! * [`verify`] — per-datum verification pipelines producing machine-readable
//!   reports.
//! * [`suite`] — the consolidated acceptance checks.

pub mod algebra;
pub mod levelset;
pub mod momentmaps;
pub mod suite;
pub mod verify;
pub mod weights;

pub use algebra::{ImaginaryOctonion, ImaginaryQuaternion, MultiplicationConvention, Quaternion};
pub use levelset::{Family, LevelSetSpec, SamplePoint, ToleranceProfile};
pub use momentmaps::QuaternionVector;
pub use weights::{WeightMatrix, WeightQuad, WeightTriple};
