use std::sync::Arc;

use charcurv_core::operator::{char_operator_value, f_value};
use charcurv_core::solver::{
    barrier_pair, build_grid, comparison_experiment, continuation_solve, discrete_jet, gradient_bound_check,
    hemisphere, max_error, max_residual, picard_solve, supbound_check, Diagnosis, DomainSpec, GridField,
    SolverConfig, StageOutcome,
};
use charcurv_core::{AffineInR, AnalyticField, ConstantCurvature, Error, GraphJet, ScalarField};
use nalgebra::{DMatrix, DVector};

fn affine(c: [f64; 3], c0: f64) -> AnalyticField {
    AnalyticField::new(
        3,
        move |x| c0 + c[0] * x[0] + c[1] * x[1] + c[2] * x[2],
        move |_| DVector::from_column_slice(&c),
        |_| DMatrix::zeros(3, 3),
    )
}

fn constant(c: f64) -> AnalyticField {
    affine([0.0; 3], c)
}

/// Smooth, non-affine data used for ordering experiments.
fn wavy(shift: f64, scale: f64) -> AnalyticField {
    let v = move |x: &[f64]| shift + scale * (0.3 * x[0] - 0.2 * x[1] + 0.1 * x[2] + 0.4 * x[0] * x[1] - 0.25 * x[2] * x[2]);
    AnalyticField::new(
        3,
        v,
        move |x| DVector::from_vec(vec![scale * (0.3 + 0.4 * x[1]), scale * (-0.2 + 0.4 * x[0]), scale * (0.1 - 0.5 * x[2])]),
        move |_| {
            let mut m = DMatrix::zeros(3, 3);
            m[(0, 1)] = 0.4 * scale;
            m[(1, 0)] = 0.4 * scale;
            m[(2, 2)] = -0.5 * scale;
            m
        },
    )
}

fn unit_ball() -> DomainSpec {
    DomainSpec::ball([0.0; 3], 1.0)
}

fn hemisphere_run(h: f64) -> (GridField, charcurv_core::solver::SolverReport) {
    let grid = build_grid(&unit_ball(), h, &hemisphere([0.0; 3], 2.0)).unwrap();
    continuation_solve(&grid, &ConstantCurvature(0.5), &SolverConfig::default()).unwrap()
}

#[test]
fn affine_data_is_reproduced_exactly() {
    let phi = affine([0.7, -0.4, 1.3], 0.25);
    let grid = build_grid(&DomainSpec::unit_box(), 1.0 / 16.0, &phi).unwrap();
    let (field, record) = picard_solve(&grid, &ConstantCurvature(0.0), 1e-3, &SolverConfig::default()).unwrap();
    assert!(record.converged);
    assert!(max_error(&field, &phi) <= 1e-8);

    let (field, report) = continuation_solve(&grid, &ConstantCurvature(0.0), &SolverConfig::default()).unwrap();
    assert_eq!(report.diagnosis, Diagnosis::Converged);
    let g0 = report.stages[0].max_grad;
    for stage in &report.stages {
        assert!(stage.converged);
        assert!((stage.max_grad - g0).abs() < 1e-8);
    }
    let bound = gradient_bound_check(&field, Some(&ConstantCurvature(0.0)), 10.0);
    assert!(bound.pass);
    assert!((bound.interior_max - bound.boundary_max).abs() < 1e-8);
    let sup = supbound_check(&field, &ConstantCurvature(0.0));
    assert!(sup.pass && sup.margin > 0.5);
}

#[test]
fn zero_data_with_k_equal_to_r_gives_zero() {
    let grid = build_grid(&unit_ball(), 0.25, &constant(0.0)).unwrap();
    let k = AffineInR { offset: 0.0, slope: 1.0 };
    let (field, report) = continuation_solve(&grid, &k, &SolverConfig::default()).unwrap();
    assert_eq!(report.diagnosis, Diagnosis::Converged);
    for node in field.active_nodes() {
        assert_eq!(field.value(node), 0.0);
    }
}

#[test]
fn discrete_maximum_principle_for_zero_curvature() {
    let grid = build_grid(&DomainSpec::unit_box(), 0.125, &wavy(0.0, 1.0)).unwrap();
    let (field, report) = continuation_solve(&grid, &ConstantCurvature(0.0), &SolverConfig::default()).unwrap();
    assert_eq!(report.diagnosis, Diagnosis::Converged);
    let bvals: Vec<f64> = field.boundary_nodes().iter().map(|&n| field.value(n)).collect();
    let bmax = bvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bmin = bvals.iter().copied().fold(f64::INFINITY, f64::min);
    for &n in field.interior_nodes() {
        assert!(field.value(n) <= bmax + 1e-9 && field.value(n) >= bmin - 1e-9);
    }
}

#[test]
fn hemisphere_is_recovered_and_improves_with_refinement() {
    let exact = hemisphere([0.0; 3], 2.0);
    let (coarse, _) = hemisphere_run(0.125);
    let (fine, report) = hemisphere_run(0.0625);
    assert_eq!(report.diagnosis, Diagnosis::Converged);
    let (e1, e2) = (max_error(&coarse, &exact), max_error(&fine, &exact));
    assert!(e2 <= 5e-2 && e2 < e1, "{e1} -> {e2}");

    let bound = gradient_bound_check(&fine, Some(&ConstantCurvature(0.5)), 10.0);
    assert_eq!(bound.hypotheses_hold, Some(true));
    assert!(bound.pass, "{bound:?}");

    // sup k = 1/2 is at most 1/R for the enclosing ball of the lattice.
    let sup = supbound_check(&fine, &ConstantCurvature(0.5));
    assert!(sup.pass);
    assert_eq!(sup.curvature_condition, Some(true));

    let phi: Arc<dyn ScalarField> = Arc::new(constant(-(3f64.sqrt())));
    let (below, above) = barrier_pair(&unit_ball(), phi, 10.0).unwrap();
    for &n in fine.interior_nodes() {
        let x = fine.coords(n);
        assert!(below.value(&x) <= fine.value(n) && fine.value(n) <= above.value(&x));
    }
}

#[test]
fn error_decreases_across_stages() {
    let exact = hemisphere([0.0; 3], 2.0);
    let grid = build_grid(&unit_ball(), 0.125, &exact).unwrap();
    let mut field = grid;
    let mut errors = Vec::new();
    for eps in SolverConfig::default().eps_schedule {
        let (next, record) = picard_solve(&field, &ConstantCurvature(0.5), eps, &SolverConfig::default()).unwrap();
        assert!(record.converged);
        errors.push(max_error(&next, &exact));
        field = next;
    }
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
}

#[test]
fn curvature_above_the_threshold_blows_up() {
    let grid = build_grid(&unit_ball(), 0.125, &constant(0.0)).unwrap();
    let (_, report) = continuation_solve(&grid, &ConstantCurvature(2.0), &SolverConfig::default()).unwrap();
    assert_eq!(report.diagnosis, Diagnosis::GradientBlowUp);
    assert_eq!(report.stages.len(), 5);
    assert!(report.stages.iter().any(|s| s.outcome == StageOutcome::GradientBlowUp));
    let last: Vec<f64> = report.stages[2..].iter().map(|s| s.max_grad).collect();
    assert!(last[0] < last[1] && last[1] < last[2], "{last:?}");
}

#[test]
fn comparison_with_ordered_data() {
    let domain = DomainSpec::unit_box();
    let k = ConstantCurvature(0.1);
    let config = SolverConfig::default();
    let report = comparison_experiment(&domain, 0.125, &k, &wavy(0.0, 1.0), &wavy(0.3, 1.2), &config).unwrap();
    assert!(report.max_violation <= 1e-8, "{}", report.max_violation);

    let same = comparison_experiment(&domain, 0.125, &k, &wavy(0.0, 1.0), &wavy(0.0, 1.0), &config).unwrap();
    assert_eq!(same.max_violation, 0.0);

    // k independent of u: shifting the data shifts the solution.
    let shifted = comparison_experiment(&domain, 0.125, &k, &wavy(0.0, 1.0), &wavy(0.75, 1.0), &config).unwrap();
    let deviation = shifted
        .lower
        .active_nodes()
        .fold(0.0f64, |m, n| m.max((shifted.upper.value(n) - shifted.lower.value(n) - 0.75).abs()));
    assert!(deviation <= 1e-8, "{deviation}");

    // Strictly increasing k.
    let increasing = AffineInR { offset: 0.1, slope: 0.5 };
    let report = comparison_experiment(&domain, 0.125, &increasing, &wavy(0.0, 1.0), &wavy(0.2, 1.0), &config).unwrap();
    assert!(report.max_violation <= 1e-8);
}

#[test]
fn comparison_rejects_bad_inputs() {
    let domain = DomainSpec::unit_box();
    let config = SolverConfig::default();
    let decreasing = AffineInR { offset: 0.0, slope: -1.0 };
    assert!(comparison_experiment(&domain, 0.25, &decreasing, &constant(0.0), &constant(1.0), &config).is_err());
    assert!(
        comparison_experiment(&domain, 0.25, &ConstantCurvature(0.0), &constant(1.0), &constant(0.0), &config)
            .is_err()
    );
}

#[test]
fn residual_of_sampled_hemisphere_is_second_order() {
    let exact = hemisphere([0.0; 3], 2.0);
    let k = ConstantCurvature(0.5);
    let residual = |h: f64| {
        let mut grid = build_grid(&unit_ball(), h, &exact).unwrap();
        grid.fill_from(|x| exact.value(&x));
        max_residual(&grid, &k, 0.0)
    };
    let (r1, r2) = (residual(0.125), residual(0.0625));
    let order = (r1 / r2).log2();
    assert!(order > 1.7 && order < 2.3, "{r1} {r2} {order}");

    // With ε > 0 the exact solution leaves a residual of size ε tr(D²u)/(1+|Du|²)^{3/2}.
    let mut grid = build_grid(&unit_ball(), 0.0625, &exact).unwrap();
    grid.fill_from(|x| exact.value(&x));
    let eps = 1e-2;
    let with_eps = max_residual(&grid, &k, eps);
    assert!(with_eps <= r2 + eps * 3.0 / 3f64.sqrt() && with_eps >= eps * 0.5);
}

#[test]
fn discrete_jet_converges_at_second_order() {
    let exact = hemisphere([0.0; 3], 1.0);
    let domain = DomainSpec::ball([0.0; 3], 0.5);
    let error = |h: f64| {
        let mut grid = build_grid(&domain, h, &exact).unwrap();
        grid.fill_from(|x| exact.value(&x));
        grid.interior_nodes()
            .iter()
            .map(|&n| {
                let x = grid.coords(n);
                let jet = discrete_jet(&grid, n).unwrap();
                let reference = GraphJet::new(exact.gradient(&x), exact.hessian(&x)).unwrap();
                (jet.hessian() - reference.hessian())
                    .amax()
                    .max((jet.gradient() - reference.gradient()).amax())
                    .max((char_operator_value(&jet) - 1.0).abs())
            })
            .fold(0.0f64, f64::max)
    };
    let (e1, e2) = (error(1.0 / 32.0), error(1.0 / 64.0));
    let order = (e1 / e2).log2();
    assert!(order > 1.8 && order < 2.2, "{e1} {e2}");
}

#[test]
fn runs_are_bit_reproducible() {
    let a = hemisphere_run(0.125).0;
    let b = hemisphere_run(0.125).0;
    let bits = |f: &GridField| f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn solver_input_validation() {
    let grid = build_grid(&DomainSpec::unit_box(), 0.25, &constant(0.0)).unwrap();
    let k = ConstantCurvature(0.0);
    assert!(matches!(
        picard_solve(&grid, &k, 0.0, &SolverConfig::default()),
        Err(Error::InvalidArgument(_))
    ));
    for bad in [
        SolverConfig { eps_schedule: vec![], ..Default::default() },
        SolverConfig { eps_schedule: vec![1e-2, 1e-1], ..Default::default() },
        SolverConfig { eps_schedule: vec![1.0, 0.0], ..Default::default() },
        SolverConfig { damping: 0.0, ..Default::default() },
        SolverConfig { damping: 1.5, ..Default::default() },
        SolverConfig { blowup_threshold: Some(-1.0), ..Default::default() },
    ] {
        assert!(bad.validate().is_err(), "{bad:?}");
        assert!(continuation_solve(&grid, &k, &bad).is_err());
    }
}

#[test]
fn iteration_cap_is_reported() {
    let grid = build_grid(&unit_ball(), 0.125, &hemisphere([0.0; 3], 2.0)).unwrap();
    let config = SolverConfig { max_iterations: 2, ..Default::default() };
    let (_, report) = continuation_solve(&grid, &ConstantCurvature(0.5), &config).unwrap();
    assert_eq!(report.diagnosis, Diagnosis::MaxIterations);
    assert!(report.stages.iter().all(|s| s.outcome == StageOutcome::MaxIterations && s.iterations == 2));
}

#[test]
fn f_value_vanishes_on_the_hemisphere_jet() {
    let exact = hemisphere([0.0; 3], 2.0);
    let x = [0.2, -0.3, 0.5];
    let jet = GraphJet::new(exact.gradient(&x), exact.hessian(&x)).unwrap();
    assert!(f_value(&x, exact.value(&x), &jet, &ConstantCurvature(0.5), 0.0).unwrap().abs() < 1e-12);
}
