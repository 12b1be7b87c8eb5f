//! Experiment drivers: comparison, gradient and sup bounds, barriers, the
//! non-uniqueness and Hopf counterexamples, and the cylinder condition.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{AnalyticField, ScalarField};
use crate::operator::{char_operator_value, check_gradient_hypotheses, CurvatureSpec, GraphJet, Monotonicity};
use crate::surface::DefiningFunctionSurface;

use super::enclosing::{smallest_enclosing_ball, EnclosingBall};
use super::grid::{build_grid, DomainSpec, GridField};
use super::picard::{continuation_solve, SolverConfig, SolverReport};

/// `ξ ↦ -√(R² - |ξ - c|²)`, the lower hemisphere of radius `R` centred at `c`.
/// Its graph has `T u = 1/R`.
pub fn hemisphere(center: [f64; 3], radius: f64) -> AnalyticField {
    let d = move |x: &[f64]| [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
    let s = move |x: &[f64]| {
        let d = d(x);
        (radius * radius - d[0] * d[0] - d[1] * d[1] - d[2] * d[2]).sqrt()
    };
    AnalyticField::new(
        3,
        move |x| -s(x),
        move |x| DVector::from_column_slice(&d(x)) / s(x),
        move |x| {
            let (dv, s) = (DVector::from_column_slice(&d(x)), s(x));
            DMatrix::identity(3, 3) / s + &dv * dv.transpose() / (s * s * s)
        },
    )
}

/// Largest `|u - exact|` over interior and boundary nodes.
pub fn max_error(field: &GridField, exact: &(impl ScalarField + ?Sized)) -> f64 {
    field
        .active_nodes()
        .fold(0.0, |m: f64, n| m.max((field.value(n) - exact.value(&field.coords(n))).abs()))
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// `max (u₁ - u₂)` over interior and boundary nodes.
    pub max_violation: f64,
    pub lower: GridField,
    pub upper: GridField,
    pub lower_report: SolverReport,
    pub upper_report: SolverReport,
}

/// Solves the problem for boundary data `φ₁ ≤ φ₂` and reports how far the
/// discrete solutions fail to be ordered.
pub fn comparison_experiment(
    domain: &DomainSpec,
    h: f64,
    k: &(impl CurvatureSpec + ?Sized),
    phi_lower: &(impl ScalarField + ?Sized),
    phi_upper: &(impl ScalarField + ?Sized),
    config: &SolverConfig,
) -> Result<ComparisonReport> {
    if k.monotonicity() == Monotonicity::General {
        return Err(Error::InvalidArgument(
            "comparison needs k strictly increasing in r, or nondecreasing in r and independent of x".into(),
        ));
    }
    let g1 = build_grid(domain, h, phi_lower)?;
    let g2 = build_grid(domain, h, phi_upper)?;
    if let Some(&node) = g1.boundary_nodes().iter().find(|&&n| g1.value(n) > g2.value(n)) {
        return Err(Error::InvalidArgument(format!(
            "boundary data are not ordered at {:?}: {} > {}",
            g1.coords(node),
            g1.value(node),
            g2.value(node)
        )));
    }
    let (lower, lower_report) = continuation_solve(&g1, k, config)?;
    let (upper, upper_report) = continuation_solve(&g2, k, config)?;
    let max_violation = lower
        .active_nodes()
        .fold(f64::NEG_INFINITY, |m, n| m.max(lower.value(n) - upper.value(n)));
    Ok(ComparisonReport {
        max_violation,
        lower,
        upper,
        lower_report,
        upper_report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientBoundReport {
    /// Largest discrete `|Du|` at interior nodes whose stencil stays inside.
    pub interior_max: f64,
    /// Largest discrete `|Du|` at interior nodes whose stencil reaches the boundary.
    pub boundary_max: f64,
    pub slack: f64,
    /// Result of the sampled `∂k/∂r ≥ 0`, `k² ≥ Σ|∂k/∂x_i|` check, when `k` was given.
    pub hypotheses_hold: Option<bool>,
    pub pass: bool,
}

/// Checks that the discrete gradient peaks next to the boundary, up to
/// `slack_constant · h`.
pub fn gradient_bound_check(
    field: &GridField,
    k: Option<&dyn CurvatureSpec>,
    slack_constant: f64,
) -> GradientBoundReport {
    let (mut interior_max, mut boundary_max) = (0.0f64, 0.0f64);
    for &node in field.interior_nodes() {
        let g = field.gradient_norm(node);
        if field.touches_boundary(node) {
            boundary_max = boundary_max.max(g);
        } else {
            interior_max = interior_max.max(g);
        }
    }
    let hypotheses_hold = k.map(|k| {
        let samples: Vec<(Vec<f64>, f64)> = field
            .interior_nodes()
            .iter()
            .map(|&n| (field.coords(n).to_vec(), field.value(n)))
            .collect();
        check_gradient_hypotheses(k, &samples)
    });
    let slack = slack_constant * field.h();
    GradientBoundReport {
        interior_max,
        boundary_max,
        slack,
        hypotheses_hold,
        pass: interior_max <= boundary_max + slack,
    }
}

/// `φ̃ + c ρ`, one half of a barrier pair.
#[derive(Clone)]
pub struct BarrierField {
    base: Arc<dyn ScalarField>,
    rho: Arc<dyn ScalarField>,
    coefficient: f64,
}

impl ScalarField for BarrierField {
    fn dim(&self) -> usize {
        3
    }
    fn value(&self, z: &[f64]) -> f64 {
        self.base.value(z) + self.coefficient * self.rho.value(z)
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        self.base.gradient(z) + self.coefficient * self.rho.gradient(z)
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        self.base.hessian(z) + self.coefficient * self.rho.hessian(z)
    }
}

/// `(φ̃ + λρ, φ̃ - λρ)` for the domain's defining function `ρ`. Both agree
/// with `φ̃` on `∂Ω` and the first lies below the second inside.
pub fn barrier_pair(
    domain: &DomainSpec,
    phi: Arc<dyn ScalarField>,
    lambda: f64,
) -> Result<(BarrierField, BarrierField)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("barrier coefficient must be positive, got {lambda}")));
    }
    let rho = domain
        .defining_function()
        .ok_or_else(|| Error::InvalidArgument("barriers need a domain with a C² defining function".into()))?;
    let half = |coefficient| BarrierField {
        base: phi.clone(),
        rho: rho.clone(),
        coefficient,
    };
    Ok((half(lambda), half(-lambda)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupBoundReport {
    pub ball: EnclosingBall,
    pub sup_all: f64,
    pub sup_boundary: f64,
    /// `sup_∂Ω |u| + max √(R² - |x - x₀|²)` over the nodes.
    pub bound: f64,
    pub margin: f64,
    /// `sup k ≤ 1/R`, when `k` has a known upper bound.
    pub curvature_condition: Option<bool>,
    pub pass: bool,
}

/// Checks `sup |u| ≤ sup_∂Ω |u| + max v` with `v = √(R² - |x - x₀|²)` built
/// on the smallest ball containing the lattice nodes.
pub fn supbound_check(field: &GridField, k: &(impl CurvatureSpec + ?Sized)) -> SupBoundReport {
    let nodes: Vec<usize> = field.active_nodes().collect();
    let points: Vec<[f64; 3]> = nodes.iter().map(|&n| field.coords(n)).collect();
    let ball = smallest_enclosing_ball(&points).expect("a grid always has nodes");
    let radius = ball.radius;
    let v_max = points.iter().fold(0.0f64, |m, x| {
        let d2: f64 = (0..3).map(|a| (x[a] - ball.center[a]).powi(2)).sum();
        m.max((radius * radius - d2).max(0.0).sqrt())
    });
    let sup_all = nodes.iter().fold(0.0f64, |m, &n| m.max(field.value(n).abs()));
    let sup_boundary = field
        .boundary_nodes()
        .iter()
        .fold(0.0f64, |m, &n| m.max(field.value(n).abs()));
    let bound = sup_boundary + v_max;
    SupBoundReport {
        ball,
        sup_all,
        sup_boundary,
        bound,
        margin: bound - sup_all,
        curvature_condition: k.sup().map(|s| s <= 1.0 / radius),
        pass: sup_all <= bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfReport {
    /// Outward unit normal of `Ω = B ∩ {x₂² + x₃² - x₁ < 0}` at the origin.
    pub normal: [f64; 3],
    pub du_dnu: f64,
    pub dv_dnu: f64,
    /// Whether `u < v` at every sample of the cut domain.
    pub strictly_below_inside: bool,
    pub samples: usize,
    pub verdict: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub radius: f64,
    pub samples: usize,
    /// `max |T u - 1/R|` over the samples.
    pub max_deviation_u: f64,
    pub max_deviation_v: f64,
    /// `u ≤ v` at every sample.
    pub ordered: bool,
    /// Samples with `u = v`.
    pub equal_nodes: usize,
    /// Samples on the `t`-axis.
    pub axis_nodes: usize,
    /// Equality holds at exactly the `t`-axis samples.
    pub equality_exactly_on_axis: bool,
    pub hopf: HopfReport,
}

fn jet_u(radius: f64, x: [f64; 3]) -> (f64, GraphJet) {
    let s = (radius * radius - x[2] * x[2]).sqrt();
    let mut hess = DMatrix::zeros(3, 3);
    hess[(2, 2)] = radius * radius / (s * s * s);
    let p = DVector::from_vec(vec![0.0, 0.0, x[2] / s]);
    (-s, GraphJet::new(p, hess).expect("symmetric"))
}

fn jet_v(radius: f64, x: [f64; 3]) -> (f64, GraphJet) {
    let hemi = hemisphere([0.0; 3], radius);
    let jet = GraphJet::new(hemi.gradient(&x), hemi.hessian(&x)).expect("symmetric");
    (hemi.value(&x), jet)
}

/// Evaluates `u(x) = -√(R² - t²)` and `v(x) = -√(R² - |x|²)` at the lattice
/// points of spacing `h` strictly inside `B(0, R)`, using analytic jets.
/// Both have `T = 1/R` and touch along the `t`-axis without coinciding, and
/// on `B ∩ {x₂² + x₃² - x₁ < 0}` they violate the Hopf boundary lemma at 0.
pub fn counterexample_report(radius: f64, h: f64) -> Result<CounterexampleReport> {
    if !(radius > 0.0 && radius.is_finite()) || !(h > 0.0 && h < radius) {
        return Err(Error::InvalidArgument(format!("need 0 < h < R, got R = {radius}, h = {h}")));
    }
    let m = (radius / h).ceil() as i64;
    let target = 1.0 / radius;
    let mut report = CounterexampleReport {
        radius,
        samples: 0,
        max_deviation_u: 0.0,
        max_deviation_v: 0.0,
        ordered: true,
        equal_nodes: 0,
        axis_nodes: 0,
        equality_exactly_on_axis: true,
        hopf: HopfReport {
            normal: [-1.0, 0.0, 0.0],
            du_dnu: 0.0,
            dv_dnu: 0.0,
            strictly_below_inside: true,
            samples: 0,
            verdict: "",
        },
    };
    for i in -m..=m {
        for j in -m..=m {
            for l in -m..=m {
                let x = [i as f64 * h, j as f64 * h, l as f64 * h];
                if x.iter().map(|c| c * c).sum::<f64>() >= radius * radius {
                    continue;
                }
                let (u, ju) = jet_u(radius, x);
                let (v, jv) = jet_v(radius, x);
                report.samples += 1;
                report.max_deviation_u = report.max_deviation_u.max((char_operator_value(&ju) - target).abs());
                report.max_deviation_v = report.max_deviation_v.max((char_operator_value(&jv) - target).abs());
                report.ordered &= u <= v;
                let on_axis = i == 0 && j == 0;
                report.axis_nodes += on_axis as usize;
                report.equal_nodes += (u == v) as usize;
                report.equality_exactly_on_axis &= (u == v) == on_axis;
                if x[1] * x[1] + x[2] * x[2] - x[0] < 0.0 {
                    report.hopf.samples += 1;
                    report.hopf.strictly_below_inside &= u < v;
                }
            }
        }
    }
    let nu = DVector::from_column_slice(&report.hopf.normal);
    report.hopf.du_dnu = jet_u(radius, [0.0; 3]).1.gradient().dot(&nu);
    report.hopf.dv_dnu = jet_v(radius, [0.0; 3]).1.gradient().dot(&nu);
    report.hopf.verdict = if report.hopf.strictly_below_inside && report.hopf.du_dnu == report.hopf.dv_dnu {
        "Hopf conclusion fails"
    } else {
        "Hopf conclusion not contradicted"
    };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CylinderCondition {
    /// `sup_s k(x, s) < C` at every sampled boundary point, where `C` is the
    /// characteristic curvature of `∂Ω × R ⊂ R⁴`.
    Checked {
        samples: usize,
        min_curvature: f64,
        sup_k: f64,
        holds: bool,
    },
    Unchecked(String),
}

impl CylinderCondition {
    pub fn holds(&self) -> Option<bool> {
        match self {
            Self::Checked { holds, .. } => Some(*holds),
            Self::Unchecked(_) => None,
        }
    }
}

/// `ρ(x, y, t)` lifted to `R⁴ = {(x, t, y, s)}`, so its zero set is `∂Ω × R`
/// with the graph variable in the last `y` slot.
struct Lifted(Arc<dyn ScalarField>);

impl Lifted {
    fn down(z: &[f64]) -> [f64; 3] {
        [z[0], z[2], z[1]]
    }
}

impl ScalarField for Lifted {
    fn dim(&self) -> usize {
        4
    }
    fn value(&self, z: &[f64]) -> f64 {
        self.0.value(&Self::down(z))
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        let g = self.0.gradient(&Self::down(z));
        DVector::from_vec(vec![g[0], g[2], g[1], 0.0])
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let h = self.0.hessian(&Self::down(z));
        let map = [0, 2, 1];
        DMatrix::from_fn(4, 4, |i, j| if i < 3 && j < 3 { h[(map[i], map[j])] } else { 0.0 })
    }
}

/// Quasi-uniform directions on the unit sphere.
fn fibonacci_directions(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Boundary point along a ray from `center`, by bisection on `ρ`. Assumes the
/// domain is star-shaped about `center`.
fn ray_boundary(rho: &dyn ScalarField, center: [f64; 3], dir: [f64; 3], reach: f64) -> Option<[f64; 3]> {
    let at = |s: f64| [0, 1, 2].map(|a| center[a] + s * dir[a]);
    if !(rho.value(&center) < 0.0) || rho.value(&at(reach)) <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, reach);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rho.value(&at(mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * reach {
            break;
        }
    }
    Some(at(0.5 * (lo + hi)))
}

/// Checks `sup_s k(x, s) < C^{Ω_c}(x)` on `samples` boundary points, for ball
/// and defining-function domains.
pub fn cylinder_condition(domain: &DomainSpec, k: &(impl CurvatureSpec + ?Sized), samples: usize) -> CylinderCondition {
    let Some(sup_k) = k.sup() else {
        return CylinderCondition::Unchecked("k has no known upper bound".into());
    };
    let (rho, center, reach) = match domain {
        DomainSpec::Box { .. } => return CylinderCondition::Unchecked("box boundaries are not C²".into()),
        DomainSpec::Ball { center, radius } => (domain.defining_function().expect("ball"), *center, *radius),
        DomainSpec::Defining { rho, lower, upper } => {
            let center = [0, 1, 2].map(|a| 0.5 * (lower[a] + upper[a]));
            let reach = (0..3).map(|a| (upper[a] - lower[a]).powi(2)).sum::<f64>().sqrt();
            (rho.clone(), center, reach)
        }
    };
    let surface = DefiningFunctionSurface::new(Lifted(rho.clone()));
    let mut min_curvature = f64::INFINITY;
    let mut checked = 0;
    for dir in fibonacci_directions(samples.max(1)) {
        let point = match domain {
            DomainSpec::Ball { .. } => Some([0, 1, 2].map(|a| center[a] + reach * dir[a])),
            _ => ray_boundary(rho.as_ref(), center, dir, reach),
        };
        let Some(p) = point else {
            return CylinderCondition::Unchecked(format!("no boundary crossing from {center:?} along {dir:?}"));
        };
        let z = [p[0], p[2], p[1], 0.0];
        match surface.characteristic_curvature(&z) {
            Ok(c) => {
                min_curvature = min_curvature.min(c);
                checked += 1;
            }
            Err(e) => return CylinderCondition::Unchecked(format!("curvature failed at {p:?}: {e}")),
        }
    }
    CylinderCondition::Checked {
        samples: checked,
        min_curvature,
        sup_k,
        holds: sup_k < min_curvature,
    }
}
