//! Finite-difference solver for the prescribed characteristic curvature
//! Dirichlet problem on graphs over domains in `R³`.

mod enclosing;
mod experiments;
mod grid;
mod picard;
mod sparse;

pub use enclosing::{smallest_enclosing_ball, EnclosingBall};
pub use experiments::*;
pub use grid::{build_grid, discrete_jet, DomainSpec, GridField, NodeClass};
pub use picard::{
    continuation_solve, max_interior_gradient, max_residual, picard_solve, Diagnosis, SolverConfig, SolverReport,
    StageOutcome, StageRecord,
};
pub use sparse::{bicgstab, CsrBuilder, CsrMatrix, Ilu0, SolveStats};
