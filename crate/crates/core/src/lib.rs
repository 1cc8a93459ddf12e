//! Second-order optimality analysis for spatio-temporally sparse optimal control.
//!
//! The control problem is
//!
//! ```text
//! minimize  F(u) + mu * j(u)   over   alpha <= u <= beta,
//! ```
//!
//! with `F` a smooth tracking functional of a semilinear parabolic state and
//! `j` one of the sparsity functionals in [`sparsity`]. Everything lives on a
//! piecewise-constant space-time grid ([`fnspace`]).

pub mod cones;
pub mod control;
pub mod error;
pub mod fnspace;
pub mod oracle;
pub mod pde;
pub mod report;
pub mod roots;
pub mod second_order;
pub mod solver;
pub mod sparsity;

pub use control::{Bounds, ControlSpec};
pub use error::{Error, Result};
pub use fnspace::{GridFunction, GridSpec};
pub use sparsity::SparsityKind;

/// Signature of [`sparsity::j_dir_deriv`]; the verification suites accept a
/// replacement so that a deliberately broken derivative can be exercised.
pub type DirDerivFn = fn(SparsityKind, &GridFunction, &GridFunction, &sparsity::SignClassification) -> f64;
