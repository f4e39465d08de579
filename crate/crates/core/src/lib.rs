//! Exterior algebra, polynomial differential forms, polyhedral integral
//! currents and density estimators for studying where a current is
//! tangent to a distribution of planes, and whether the distribution is
//! involutive there.

pub mod currents;
pub mod density;
pub mod exterior;
pub mod forms;
pub mod harness;
pub mod plane;
pub mod poly;
pub mod scalar;

pub use currents::{PolyhedralCurrent, Simplex};
pub use exterior::{KCovector, KVector, MultiIndex};
pub use forms::{DifferentialForm, Distribution};
pub use plane::Plane;
pub use poly::PolyExpr;
pub use scalar::{Rational, Scalar};
