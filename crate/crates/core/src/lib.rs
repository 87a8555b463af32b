//! Spectral contour dynamics for a rising Muskat bubble with surface tension.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod constraint;
pub mod diagonal;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod linear;
pub mod operators;
pub mod quad;
pub mod spectral;

pub use constraint::{ci_constant, g_map, solve_first_modes, ConstraintProblem, FirstModes};
pub use diagonal::{build_transform, cs_bound, TriangularTransform};
pub use error::{Error, Result};
pub use evolution::{run, step, ImexMode, RunOutcome, SolverConfig, TrajectoryRecord};
pub use geometry::{BubbleState, PhysicalParams};
pub use linear::{linearized_rhs_hat, LinearCoefficients};
pub use num_complex::Complex64;
pub use operators::{PicardOptions, VorticityField};
pub use spectral::{AnalyticWeight, ComplexField, SpectralField};
