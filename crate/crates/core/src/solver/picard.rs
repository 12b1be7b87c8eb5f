//! Frozen-coefficient (Picard) iteration for the regularized problem
//!
//! ```text
//! -tr(Ã^ε(Du) D²u) + k(x, u) = 0 in Ω,   u = φ on ∂Ω,
//! ```
//!
//! and the continuation over a decreasing schedule of `ε`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{CurvatureSpec, Monotonicity};

use super::grid::{unknown_map, GridField, STENCIL};
use super::sparse::{bicgstab, CsrBuilder};

/// Consecutive residual increases that count as divergence.
const DIVERGENCE_RUN: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Strictly decreasing, positive.
    pub eps_schedule: Vec<f64>,
    /// `u ← u + θ (w - u)`, `θ ∈ (0, 1]`.
    pub damping: f64,
    pub max_iterations: usize,
    /// Stop when `max |F^ε|` over interior nodes is at or below this.
    pub residual_tol: f64,
    /// Relative residual for each linear solve, measured against the defect
    /// of the current iterate.
    pub linear_tol: f64,
    pub linear_max_iterations: usize,
    /// Absolute cap on the interior gradient; `None` means
    /// `50 (1 + max |∇φ| on the boundary)`.
    pub blowup_threshold: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_schedule: vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4],
            damping: 0.7,
            max_iterations: 200,
            residual_tol: 1e-9,
            linear_tol: 1e-10,
            linear_max_iterations: 5000,
            blowup_threshold: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.eps_schedule.is_empty() {
            return bad("empty eps schedule".into());
        }
        if !self.eps_schedule.iter().all(|e| *e > 0.0 && e.is_finite()) {
            return bad(format!("eps schedule must be positive: {:?}", self.eps_schedule));
        }
        if !self.eps_schedule.windows(2).all(|w| w[1] < w[0]) {
            return bad(format!("eps schedule must be strictly decreasing: {:?}", self.eps_schedule));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        if self.max_iterations == 0 || self.linear_max_iterations == 0 {
            return bad("iteration caps must be positive".into());
        }
        if !(self.residual_tol > 0.0 && self.linear_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(t) = self.blowup_threshold {
            if !(t > 0.0) {
                return bad(format!("blow-up threshold must be positive, got {t}"));
            }
        }
        Ok(())
    }

    pub fn threshold_for(&self, grid: &GridField) -> f64 {
        self.blowup_threshold.unwrap_or(50.0 * (1.0 + grid.data_gradient_max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOutcome {
    Converged,
    MaxIterations,
    GradientBlowUp,
    Diverged,
    LinearSolveFailed,
}

/// One `ε` stage of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub eps: f64,
    /// Linear solves performed.
    pub iterations: usize,
    /// `max |F^ε|` over interior nodes at the returned iterate.
    pub max_residual: f64,
    /// Largest discrete `|Du|` over interior nodes seen during the stage.
    pub max_grad: f64,
    pub converged: bool,
    pub outcome: StageOutcome,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnosis {
    Converged,
    GradientBlowUp,
    MaxIterations,
    /// A stage stopped on divergence or a failed linear solve without the
    /// gradient crossing the blow-up threshold.
    StageFailed,
}

impl Diagnosis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::GradientBlowUp => "gradient-blow-up",
            Self::MaxIterations => "max-iterations",
            Self::StageFailed => "stage-failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub stages: Vec<StageRecord>,
    pub diagnosis: Diagnosis,
    pub blowup_threshold: f64,
}

/// Per-node frozen data: gradient, Hessian and the residual `F^ε`.
struct NodeState {
    p: [f64; 3],
    residual: f64,
    grad: f64,
}

fn node_state(grid: &GridField, node: usize, k: &(impl CurvatureSpec + ?Sized), eps: f64) -> NodeState {
    let (p, hess) = grid.stencil_jet(node);
    let s = [-p[1], p[0], 1.0];
    let mut trace = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            trace += (s[i] * s[j] + if i == j { eps } else { 0.0 }) * hess[i][j];
        }
    }
    let psq = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let norm = (1.0 + psq).powf(1.5);
    let x = grid.coords(node);
    NodeState {
        p,
        residual: -trace / norm + k.value(&x, grid.value(node)),
        grad: psq.sqrt(),
    }
}

fn states(grid: &GridField, k: &(impl CurvatureSpec + ?Sized), eps: f64) -> Vec<NodeState> {
    grid.interior_nodes()
        .par_iter()
        .map(|&node| node_state(grid, node, k, eps))
        .collect()
}

/// `max |F^ε|` over interior nodes.
pub fn max_residual(grid: &GridField, k: &(impl CurvatureSpec + ?Sized), eps: f64) -> f64 {
    states(grid, k, eps).iter().fold(0.0, |m, s| m.max(s.residual.abs()))
}

/// Largest discrete gradient norm over interior nodes.
pub fn max_interior_gradient(grid: &GridField) -> f64 {
    grid.interior_nodes()
        .iter()
        .fold(0.0, |m: f64, &n| m.max(grid.gradient_norm(n)))
}

/// Solves `tr(A^ε(p_c) D²w) = (1 + |p_c|²)^{3/2} k(x_c, u_c)` at every
/// interior node `c` with `p_c`, `u_c` frozen from the current field, and
/// returns the interior values of `w`.
fn frozen_solve(
    grid: &GridField,
    frozen: &[NodeState],
    k: &(impl CurvatureSpec + ?Sized),
    eps: f64,
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    let unknown = unknown_map(grid);
    let h2 = grid.h() * grid.h();
    let rows: Vec<(Vec<(usize, f64)>, f64)> = grid
        .interior_nodes()
        .par_iter()
        .zip(frozen.par_iter())
        .enumerate()
        .map(|(row, (&node, state))| {
            let p = state.p;
            let s = [-p[1], p[0], 1.0];
            let a = |i: usize, j: usize| s[i] * s[j] + if i == j { eps } else { 0.0 };
            let psq = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            let x = grid.coords(node);
            let mut rhs = h2 * (1.0 + psq).powf(1.5) * k.value(&x, grid.value(node));
            let mut entries = Vec::with_capacity(19);
            let diag = -2.0 * (a(0, 0) + a(1, 1) + a(2, 2));
            entries.push((row, diag));
            let mut couple = |d: [i64; 3], w: f64, entries: &mut Vec<(usize, f64)>| {
                let nb = grid.offset(node, d);
                match unknown[nb] {
                    usize::MAX => rhs -= w * grid.value(nb),
                    col => entries.push((col, w)),
                }
            };
            for (idx, d) in STENCIL.iter().enumerate() {
                let w = if idx < 6 {
                    a(idx / 2, idx / 2)
                } else {
                    // In-plane diagonal: the two non-zero axes and their signs.
                    let axes: Vec<usize> = (0..3).filter(|&c| d[c] != 0).collect();
                    let sign = (d[axes[0]] * d[axes[1]]) as f64;
                    sign * 0.5 * a(axes[0], axes[1])
                };
                if w != 0.0 {
                    couple(*d, w, &mut entries);
                }
            }
            (entries, rhs)
        })
        .collect();

    let n = rows.len();
    let mut builder = CsrBuilder::with_capacity(n, 19 * n);
    let mut rhs = Vec::with_capacity(n);
    for (entries, b) in rows {
        builder.push_row(entries);
        rhs.push(b);
    }
    let matrix = builder.build();
    // Solve for the correction so the linear tolerance is relative to the
    // current defect rather than to the boundary data.
    let mut w = grid.interior_values();
    let mut defect = vec![0.0; n];
    matrix.mul_into(&w, &mut defect);
    for (d, b) in defect.iter_mut().zip(&rhs) {
        *d = b - *d;
    }
    let mut correction = vec![0.0; n];
    bicgstab(&matrix, &defect, &mut correction, config.linear_tol, config.linear_max_iterations)?;
    for (w, c) in w.iter_mut().zip(&correction) {
        *w += c;
    }
    Ok(w)
}

/// Runs one stage and always returns the last accepted iterate.
pub(crate) fn run_stage(
    grid: &GridField,
    k: &(impl CurvatureSpec + ?Sized),
    eps: f64,
    config: &SolverConfig,
    threshold: f64,
) -> (GridField, StageRecord) {
    let mut field = grid.clone();
    let mut record = StageRecord {
        eps,
        iterations: 0,
        max_residual: f64::INFINITY,
        max_grad: 0.0,
        converged: false,
        outcome: StageOutcome::MaxIterations,
        message: None,
    };
    let mut previous = f64::INFINITY;
    let mut growth = 0;
    loop {
        let frozen = states(&field, k, eps);
        let residual = frozen.iter().fold(0.0, |m: f64, s| m.max(s.residual.abs()));
        let grad = frozen.iter().fold(0.0, |m: f64, s| m.max(s.grad));
        record.max_residual = residual;
        record.max_grad = record.max_grad.max(grad);

        if !residual.is_finite() || grad > threshold {
            record.outcome = StageOutcome::GradientBlowUp;
            break;
        }
        if residual <= config.residual_tol {
            record.converged = true;
            record.outcome = StageOutcome::Converged;
            break;
        }
        growth = if residual > previous { growth + 1 } else { 0 };
        previous = residual;
        if growth >= DIVERGENCE_RUN {
            record.outcome = StageOutcome::Diverged;
            record.message = Some(format!("residual grew for {DIVERGENCE_RUN} consecutive iterations"));
            break;
        }
        if record.iterations >= config.max_iterations {
            break;
        }

        match frozen_solve(&field, &frozen, k, eps, config) {
            Ok(w) => {
                let theta = config.damping;
                let mut values = field.interior_values();
                for (u, w) in values.iter_mut().zip(&w) {
                    *u += theta * (w - *u);
                }
                field.set_interior_values(&values);
                record.iterations += 1;
            }
            Err(e) => {
                record.outcome = StageOutcome::LinearSolveFailed;
                record.message = Some(e.to_string());
                break;
            }
        }
    }
    log::debug!(
        "eps {eps:e}: {:?} after {} iterations, residual {:e}, max grad {:.4}",
        record.outcome,
        record.iterations,
        record.max_residual,
        record.max_grad
    );
    (field, record)
}

/// Solves the regularized problem at a single `ε`, starting from the values
/// currently held by `grid`. Linear-solve failures and divergence are errors.
pub fn picard_solve(
    grid: &GridField,
    k: &(impl CurvatureSpec + ?Sized),
    eps: f64,
    config: &SolverConfig,
) -> Result<(GridField, StageRecord)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    config.validate()?;
    let (field, record) = run_stage(grid, k, eps, config, config.threshold_for(grid));
    match record.outcome {
        StageOutcome::Diverged => Err(Error::Divergence {
            iteration: record.iterations,
            residual: record.max_residual,
        }),
        StageOutcome::LinearSolveFailed => Err(Error::LinearSolve(record.message.unwrap_or_default())),
        _ => Ok((field, record)),
    }
}

/// Warm-started sweep over the `ε` schedule. Every stage is attempted; a stage
/// that does not converge is recorded and the next one restarts from the last
/// converged field. The returned field is the last converged one, or the last
/// iterate when no stage converged.
pub fn continuation_solve(
    grid: &GridField,
    k: &(impl CurvatureSpec + ?Sized),
    config: &SolverConfig,
) -> Result<(GridField, SolverReport)> {
    config.validate()?;
    if k.monotonicity() == Monotonicity::General {
        log::warn!("prescribed curvature is outside both comparison regimes; uniqueness is not guaranteed");
    }
    let threshold = config.threshold_for(grid);
    let mut field = grid.clone();
    let mut last = None;
    let mut stages = Vec::with_capacity(config.eps_schedule.len());
    for &eps in &config.eps_schedule {
        let (next, record) = run_stage(&field, k, eps, config, threshold);
        if record.converged {
            field = next;
        } else {
            last = Some(next);
        }
        stages.push(record);
    }
    if stages.iter().all(|s| !s.converged) {
        field = last.expect("at least one stage");
    }
    let diagnosis = if stages.iter().any(|s| s.max_grad > threshold) {
        Diagnosis::GradientBlowUp
    } else if stages.iter().all(|s| s.converged) {
        Diagnosis::Converged
    } else if stages.iter().any(|s| s.outcome == StageOutcome::MaxIterations) {
        Diagnosis::MaxIterations
    } else {
        Diagnosis::StageFailed
    };
    Ok((
        field,
        SolverReport {
            stages,
            diagnosis,
            blowup_threshold: threshold,
        },
    ))
}
