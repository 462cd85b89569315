//! Core numerics for lower bounds on the first nontrivial Neumann
//! eigenvalue of the p-Laplacian on anisotropic cusp domains.
//!
//! The pieces: domain descriptions and admissibility windows (`domain`),
//! the explicit cusp homeomorphism with its Jacobian calculus (`cuspmap`),
//! closed-form constants and the assembled bound search (`bounds`), a
//! deterministic graded quadrature engine that independently validates
//! every constant (`quad`, `verify`), and shared plumbing: flat key-value
//! configs, dense small-matrix helpers, Bessel-derivative roots, and a
//! small Sobol sequence for deterministic sampling.

pub mod bessel;
pub mod bounds;
pub mod config;
pub mod cuspmap;
pub mod domain;
pub mod error;
pub mod mat;
pub mod quad;
pub mod sobol;
pub mod verify;

pub use bounds::{BoundReport, ClassicalBounds, SearchOpts, Variant};
pub use cuspmap::CuspMap;
pub use domain::{admissible_a_interval, AInterval, CuspProfile, ExponentConfig};
pub use error::NbError;
pub use quad::QuadSpec;
