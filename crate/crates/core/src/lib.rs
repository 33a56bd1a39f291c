//! Finite-dimensional laboratory for local ergodic theorems over semifinite
//! von Neumann algebras.
//!
//! An algebra is modelled as a direct sum of complex matrix factors, each with
//! a strictly positive trace weight. On top of that the crate provides the
//! singular-value rearrangement `mu_t(x)`, rearrangement-invariant norms
//! (L^p, L1+L∞, L1∩L∞, Orlicz, Lorentz, Marcinkiewicz), positive
//! Dunford–Schwartz semigroups indexed by `R_+^d`, the local ergodic averages
//! `A_t`, and experiments that check the quantitative bounds attached to them.

// NaN-rejecting guards are written as !(x > 0.0); index loops mirror the maths.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod algebra;
pub mod averaging;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod random;
pub mod rearrangement;
pub mod report;
pub mod scenario;
pub mod spaces;

pub use algebra::{AlgebraShape, Operator, SpectralDecomposition};
pub use averaging::{AveragingMethod, QuadratureMode};
pub use dynamics::{DSCertificate, FamilySpec, Semigroup, Superoperator};
pub use error::{Error, Result};
pub use rearrangement::StepFunction;
pub use spaces::{ConcavePhi, NormDescriptor, OrliczFunction, SpaceTraits};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix used for blocks and superoperators.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
