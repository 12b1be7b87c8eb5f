//! Characteristic curvature of real hypersurfaces in `C^{n+1}` and the
//! degenerate Dirichlet problem for graphs of prescribed characteristic
//! curvature.
//!
//! - [`symplectic`]: `J`, Liouville and symplectic forms, Hamiltonian flows
//!   and the characteristic curvature of level sets.
//! - [`surface`]: second fundamental form, Levi form and the relation
//!   `(2n+1)H = 2nL + C`.
//! - [`operator`]: the graph operator `T u = tr(A(Du) D²u) / (1+|Du|²)^{3/2}`.
//! - [`solver`]: finite-difference solution of the regularized Dirichlet
//!   problem with vanishing-viscosity continuation, plus experiment drivers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod field;
pub mod operator;
pub mod solver;
pub mod surface;
pub mod symplectic;

pub use catalog::CatalogSurface;
pub use error::{Error, Result};
pub use field::{AnalyticField, Jet2, Quadratic, ScalarField, ValueField};
pub use operator::{AffineInR, ConstantCurvature, CurvatureSpec, GraphJet, Monotonicity};
pub use surface::{AdaptedFrame, DefiningFunctionSurface};
pub use symplectic::{PhasePoint, Trajectory};
