//! The six subcommands. Each writes its CSV files into the output directory
//! and returns the process outcome.

use std::path::Path;

use anyhow::{bail, Context, Result};
use charcurv_core::catalog::unit_direction;
use charcurv_core::operator::{
    assemble_a, char_operator_n1, char_operator_value, null_eigenvectors, principal_eigenpair, CurvatureSpec,
};
use charcurv_core::solver::{
    build_grid, continuation_solve, counterexample_report, cylinder_condition, gradient_bound_check, hemisphere,
    max_error, smallest_enclosing_ball, supbound_check, CylinderCondition, Diagnosis, DomainSpec, GridField,
    SolverConfig, SolverReport,
};
use charcurv_core::symplectic::{characteristic_curvature_levelset, curvature_along_curve, integrate_characteristic_curve, IntegratorConfig};
use charcurv_core::{
    AffineInR, AnalyticField, CatalogSurface, ConstantCurvature, DefiningFunctionSurface, GraphJet, PhasePoint,
    ScalarField, ValueField,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{BoundaryConfig, CurvatureConfig, DomainConfig, RunConfig, Subcommand, SurfaceSpec};
use crate::output::{float, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
    GradientBlowUp,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Self::Success => 0,
            Self::Failure => 1,
            Self::GradientBlowUp => 2,
        }
    }
}

pub fn run(sub: Subcommand, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    if let Some(expected) = cfg.subcommand {
        if expected != sub {
            bail!("config is for '{}' but '{}' was requested", expected.as_str(), sub.as_str());
        }
    }
    std::fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    match sub {
        Subcommand::Verify => run_verify(cfg, out),
        Subcommand::Curvature => run_curvature(cfg, out),
        Subcommand::Trajectory => run_trajectory(cfg, out),
        Subcommand::Solve => run_solve(cfg, out),
        Subcommand::Probe => run_probe(cfg, out),
        Subcommand::Counterexample => run_counterexample(cfg, out),
    }
}

pub fn catalog_surface(spec: &SurfaceSpec) -> CatalogSurface {
    match spec {
        SurfaceSpec::Sphere { n, radius } => CatalogSurface::Sphere { n: *n, radius: *radius },
        SurfaceSpec::Cylinder1 { radius } => CatalogSurface::Cylinder1 { radius: *radius },
        SurfaceSpec::Cylinder2 { radius } => CatalogSurface::Cylinder2 { radius: *radius },
        SurfaceSpec::Ellipsoid { axes } => CatalogSurface::Ellipsoid { axes: axes.clone() },
    }
}

pub fn domain_spec(cfg: &DomainConfig) -> DomainSpec {
    match cfg {
        DomainConfig::Box { lower, upper } => DomainSpec::Box {
            lower: *lower,
            upper: *upper,
        },
        DomainConfig::Ball { center, radius } => DomainSpec::ball(*center, *radius),
        DomainConfig::Ellipsoid { center, axes } => DomainSpec::ellipsoid(*center, *axes),
    }
}

pub fn boundary_field(cfg: &BoundaryConfig) -> AnalyticField {
    match cfg {
        BoundaryConfig::Affine { value, slope } => {
            let (value, slope) = (*value, *slope);
            AnalyticField::new(
                3,
                move |x| value + slope[0] * x[0] + slope[1] * x[1] + slope[2] * x[2],
                move |_| DVector::from_column_slice(&slope),
                |_| DMatrix::zeros(3, 3),
            )
        }
        BoundaryConfig::Hemisphere { center, radius } => hemisphere(*center, *radius),
        BoundaryConfig::Constant { value } => {
            let value = *value;
            AnalyticField::new(3, move |_| value, |_| DVector::zeros(3), |_| DMatrix::zeros(3, 3))
        }
    }
}

pub fn curvature_spec(cfg: &CurvatureConfig) -> Box<dyn CurvatureSpec> {
    match cfg {
        CurvatureConfig::Constant { value } => Box::new(ConstantCurvature(*value)),
        CurvatureConfig::AffineInR { offset, slope } => Box::new(AffineInR {
            offset: *offset,
            slope: *slope,
        }),
    }
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    let s = &cfg.solve;
    SolverConfig {
        eps_schedule: s.eps_schedule.clone(),
        damping: s.damping,
        max_iterations: s.max_iters,
        residual_tol: s.tol,
        linear_tol: s.linear_tol,
        blowup_threshold: s.blowup_threshold,
        ..SolverConfig::default()
    }
}

/// A closed-form solution of the configured problem, when one is known.
fn exact_solution(cfg: &RunConfig) -> Option<AnalyticField> {
    let k = match cfg.k {
        CurvatureConfig::Constant { value } => value,
        CurvatureConfig::AffineInR { offset, slope: 0.0 } => offset,
        _ => return None,
    };
    match &cfg.boundary {
        BoundaryConfig::Affine { .. } | BoundaryConfig::Constant { .. } if k == 0.0 => {
            Some(boundary_field(&cfg.boundary))
        }
        BoundaryConfig::Hemisphere { radius, .. } if (k - 1.0 / radius).abs() <= 1e-15 * k.abs() => {
            Some(boundary_field(&cfg.boundary))
        }
        _ => None,
    }
}

fn coordinate_names(n: usize) -> Vec<String> {
    (1..=n + 1)
        .map(|i| format!("x{i}"))
        .chain((1..=n + 1).map(|i| format!("y{i}")))
        .collect()
}

struct Check {
    name: String,
    samples: usize,
    max_error: f64,
    tol: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.max_error <= self.tol
    }
}

fn verify_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n_samples = cfg.verify_samples;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    let crit = cfg.critical_tol;

    let catalog = |name: String, surfaces: Vec<CatalogSurface>, rng: &mut ChaCha8Rng| -> Result<Check> {
        let mut worst: f64 = 0.0;
        let mut samples = 0;
        for s in &surfaces {
            let exact = s.exact_characteristic_curvature().context("no closed form")?;
            let h = s.hamiltonian();
            for _ in 0..n_samples {
                let c = characteristic_curvature_levelset(&h, &s.sample_point(rng), crit)?;
                worst = worst.max((c - exact).abs());
                samples += 1;
            }
        }
        Ok(Check {
            name,
            samples,
            max_error: worst,
            tol: 1e-10,
        })
    };
    for radius in [0.5, 1.0, 2.0] {
        let spheres = (1..=3).map(|n| CatalogSurface::Sphere { n, radius }).collect();
        checks.push(catalog(format!("sphere_R{radius}_curvature"), spheres, &mut rng)?);
    }
    checks.push(catalog("cylinder1_curvature".into(), vec![CatalogSurface::Cylinder1 { radius: 1.0 }], &mut rng)?);
    checks.push(catalog("cylinder2_curvature".into(), vec![CatalogSurface::Cylinder2 { radius: 1.0 }], &mut rng)?);
    let configured = catalog_surface(&cfg.surface);
    if configured.exact_characteristic_curvature().is_some() {
        checks.push(catalog("configured_surface_curvature".into(), vec![configured], &mut rng)?);
    }

    let (mut outer, mut spec, mut null, mut samples): (f64, f64, f64, usize) = (0.0, 0.0, 0.0, 0);
    for d in [3usize, 5, 7] {
        let n = (d - 1) / 2;
        for _ in 0..n_samples {
            let p: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let s: Vec<f64> = (0..n).map(|k| -p[n + k]).chain((0..n).map(|k| p[k])).chain([1.0]).collect();
            let a = assemble_a(&p)?;
            outer = outer.max(DMatrix::from_fn(d, d, |i, j| a[(i, j)] - s[i] * s[j]).amax());
            let mut eig: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
            eig.sort_by(f64::total_cmp);
            let (_, lambda) = principal_eigenpair(&p)?;
            spec = spec.max((eig[d - 1] - lambda).abs());
            for e in &eig[..d - 1] {
                spec = spec.max(e.abs());
            }
            for v in null_eigenvectors(&p)? {
                null = null.max((&a * v).amax());
            }
            samples += 1;
        }
    }
    for (name, max_error, tol) in [
        ("a_equals_sigma_sigma_t", outer, 1e-15),
        ("a_spectrum", spec, 1e-10),
        ("a_null_vectors", null, 1e-10),
    ] {
        checks.push(Check {
            name: name.into(),
            samples,
            max_error,
            tol,
        });
    }

    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let h: Vec<f64> = (0..9).map(|_| rng.random_range(-3.0..3.0)).collect();
        let jet = GraphJet::from_slices(&p, &h)?;
        worst = worst.max((char_operator_value(&jet) - char_operator_n1(&jet)?).abs());
    }
    checks.push(Check {
        name: "n1_expansion".into(),
        samples: n_samples,
        max_error: worst,
        tol: 1e-12,
    });

    let mut surfaces = vec![
        CatalogSurface::Sphere { n: 1, radius: 1.0 },
        CatalogSurface::Sphere { n: 2, radius: 1.0 },
        CatalogSurface::Cylinder1 { radius: 1.0 },
        CatalogSurface::Cylinder2 { radius: 1.0 },
    ];
    for n in 1..=2 {
        surfaces.push(CatalogSurface::Ellipsoid {
            axes: (0..2 * n + 2).map(|_| rng.random_range(0.4..3.0)).collect(),
        });
    }
    let (mut analytic, mut fd, mut samples): (f64, f64, usize) = (0.0, 0.0, 0);
    for s in &surfaces {
        let q = s.defining_function();
        let mut exact = DefiningFunctionSurface::new(q.clone());
        exact.level_tol = cfg.level_tol;
        exact.critical_tol = crit;
        let mut sampled = DefiningFunctionSurface::new(ValueField::new(q.dim(), move |z| q.value(z)));
        sampled.level_tol = cfg.level_tol;
        sampled.critical_tol = crit;
        for _ in 0..n_samples {
            let z = s.sample_point(&mut rng);
            analytic = analytic.max(exact.curvature_relation_residual(z.as_slice())?.abs());
            fd = fd.max(sampled.curvature_relation_residual(z.as_slice())?.abs());
            samples += 1;
        }
    }
    checks.push(Check {
        name: "curvature_relation_analytic".into(),
        samples,
        max_error: analytic,
        tol: 1e-10,
    });
    checks.push(Check {
        name: "curvature_relation_finite_difference".into(),
        samples,
        max_error: fd,
        tol: 1e-6,
    });

    let hemi = hemisphere([0.0; 3], 2.0);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let x: Vec<f64> = unit_direction(&mut rng, 3).iter().map(|v| v * 1.9 * rng.random::<f64>()).collect();
        let jet = GraphJet::new(hemi.gradient(&x), hemi.hessian(&x))?;
        worst = worst.max((char_operator_value(&jet) - 0.5).abs());
    }
    checks.push(Check {
        name: "hemisphere_operator".into(),
        samples: n_samples,
        max_error: worst,
        tol: 1e-10,
    });
    Ok(checks)
}

pub fn run_verify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let checks = verify_checks(cfg)?;
    let mut table = Table::new(["check_name", "samples", "max_error", "pass"]);
    for c in &checks {
        table.push(vec![c.name.clone(), c.samples.to_string(), float(c.max_error), c.pass().to_string()]);
    }
    table.write(&out.join("verify.csv"))?;
    let failing: Vec<&Check> = checks.iter().filter(|c| !c.pass()).collect();
    for c in &failing {
        eprintln!("FAIL {}: max error {:e} above {:e}", c.name, c.max_error, c.tol);
    }
    Ok(if failing.is_empty() { Outcome::Success } else { Outcome::Failure })
}

pub fn run_curvature(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let surface = catalog_surface(&cfg.surface);
    let n = surface.n();
    let h = surface.hamiltonian();
    let mut m = DefiningFunctionSurface::new(surface.defining_function());
    m.level_tol = cfg.level_tol;
    m.critical_tol = cfg.critical_tol;
    let exact = surface.exact_characteristic_curvature();
    let mut header: Vec<String> = vec!["sample".into()];
    header.extend(coordinate_names(n));
    header.extend(["characteristic", "mean", "levi", "relation_residual", "exact"].map(String::from));
    let mut table = Table::new(header);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.curvature_samples {
        let z = surface.sample_point(&mut rng);
        let c = characteristic_curvature_levelset(&h, &z, cfg.critical_tol)?;
        let mut row = vec![i.to_string()];
        row.extend(z.as_slice().iter().map(|v| float(*v)));
        row.push(float(c));
        row.push(float(m.mean_curvature(z.as_slice())?));
        row.push(float(m.levi_mean_curvature(z.as_slice())?));
        row.push(float(m.curvature_relation_residual(z.as_slice())?));
        row.push(exact.map(float).unwrap_or_default());
        table.push(row);
    }
    table.write(&out.join("curvature.csv"))?;
    Ok(Outcome::Success)
}

pub fn run_trajectory(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let surface = catalog_surface(&cfg.surface);
    let h = surface.hamiltonian();
    let start = match &cfg.trajectory_start {
        Some(z) => PhasePoint::new(z.clone())?,
        None => surface.base_point(),
    };
    let integrator = IntegratorConfig {
        critical_tol: cfg.critical_tol,
        drift_tol: None,
    };
    let traj = integrate_characteristic_curve(&h, &start, cfg.trajectory_t_end, cfg.trajectory_dt, &integrator)?;
    let curvature = curvature_along_curve(&h, &traj, cfg.critical_tol)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(coordinate_names(surface.n()));
    header.extend(["H", "curvature"].map(String::from));
    let mut table = Table::new(header);
    for ((t, z), c) in traj.times.iter().zip(&traj.states).zip(&curvature) {
        let mut row = vec![float(*t)];
        row.extend(z.as_slice().iter().map(|v| float(*v)));
        row.push(float(h.value(z.as_slice())));
        row.push(float(*c));
        table.push(row);
    }
    table.write(&out.join("trajectory.csv"))?;
    Ok(Outcome::Success)
}

fn field_table(field: &GridField) -> Table {
    let mut table = Table::new(["i", "j", "l", "x", "y", "t", "class", "u"]);
    for node in 0..field.len() {
        let ijk = field.ijk(node);
        let x = field.coords(node);
        table.push(vec![
            ijk[0].to_string(),
            ijk[1].to_string(),
            ijk[2].to_string(),
            float(x[0]),
            float(x[1]),
            float(x[2]),
            field.class(node).as_str().into(),
            float(field.value(node)),
        ]);
    }
    table
}

fn report_table(report: &SolverReport) -> Table {
    let mut table = Table::new(["eps", "iters", "max_residual", "max_grad", "converged"]);
    for s in &report.stages {
        table.push(vec![
            float(s.eps),
            s.iterations.to_string(),
            float(s.max_residual),
            float(s.max_grad),
            s.converged.to_string(),
        ]);
    }
    table
}

fn outcome_of(report: &SolverReport) -> Outcome {
    match report.diagnosis {
        Diagnosis::Converged => Outcome::Success,
        Diagnosis::GradientBlowUp => Outcome::GradientBlowUp,
        _ => Outcome::Failure,
    }
}

fn solve_problem(cfg: &RunConfig) -> Result<(DomainSpec, Box<dyn CurvatureSpec>, GridField, SolverReport)> {
    let domain = domain_spec(&cfg.domain);
    let phi = boundary_field(&cfg.boundary);
    let k = curvature_spec(&cfg.k);
    let grid = build_grid(&domain, cfg.solve.h, &phi)?;
    let (field, report) = continuation_solve(&grid, k.as_ref(), &solver_config(cfg))?;
    Ok((domain, k, field, report))
}

pub fn run_solve(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (_, k, field, report) = solve_problem(cfg)?;
    field_table(&field).write(&out.join("field.csv"))?;
    report_table(&report).write(&out.join("report.csv"))?;

    let gradient = gradient_bound_check(&field, Some(k.as_ref()), 10.0);
    let sup = supbound_check(&field, k.as_ref());
    let mut summary = vec![
        ("diagnosis", report.diagnosis.as_str().to_string()),
        ("blowup_threshold", float(report.blowup_threshold)),
        ("interior_nodes", field.interior_nodes().len().to_string()),
        ("gradient_interior_max", float(gradient.interior_max)),
        ("gradient_boundary_max", float(gradient.boundary_max)),
        ("gradient_bound_pass", gradient.pass.to_string()),
        ("sup_bound_margin", float(sup.margin)),
        ("sup_bound_pass", sup.pass.to_string()),
    ];
    if let Some(exact) = exact_solution(cfg) {
        summary.push(("max_error", float(max_error(&field, &exact))));
    }
    Table::key_values(summary).write(&out.join("summary.csv"))?;
    Ok(outcome_of(&report))
}

/// Radius of the smallest ball containing the domain.
fn enclosing_radius(domain: &DomainConfig) -> f64 {
    match domain {
        DomainConfig::Ball { radius, .. } => *radius,
        DomainConfig::Ellipsoid { axes, .. } => axes.iter().copied().fold(0.0, f64::max),
        DomainConfig::Box { lower, upper } => {
            let corners: Vec<[f64; 3]> = (0..8)
                .map(|c| [0, 1, 2].map(|a| if c >> a & 1 == 0 { lower[a] } else { upper[a] }))
                .collect();
            smallest_enclosing_ball(&corners).map_or(0.0, |b| b.radius)
        }
    }
}

pub fn run_probe(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let (domain, k, _, report) = solve_problem(cfg)?;
    report_table(&report).write(&out.join("report.csv"))?;
    let radius = enclosing_radius(&cfg.domain);
    let mut summary = vec![
        ("enclosing_radius", float(radius)),
        ("diagnosis", report.diagnosis.as_str().to_string()),
        ("blowup_threshold", float(report.blowup_threshold)),
    ];
    match k.sup() {
        Some(s) => {
            summary.push(("k_sup", float(s)));
            summary.push(("k_sup_times_radius", float(s * radius)));
            summary.push(("within_radius_bound", (s * radius <= 1.0).to_string()));
        }
        None => summary.push(("k_sup", "unbounded".into())),
    }
    match cylinder_condition(&domain, k.as_ref(), 400) {
        CylinderCondition::Checked { min_curvature, holds, .. } => {
            summary.push(("cylinder_min_curvature", float(min_curvature)));
            summary.push(("cylinder_condition", holds.to_string()));
        }
        CylinderCondition::Unchecked(why) => summary.push(("cylinder_condition", format!("unchecked: {why}"))),
    }
    Table::key_values(summary).write(&out.join("probe.csv"))?;
    Ok(outcome_of(&report))
}

pub fn run_counterexample(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let r = counterexample_report(cfg.counterexample_radius, cfg.counterexample_h)?;
    let pass = r.max_deviation_u <= 1e-10
        && r.max_deviation_v <= 1e-10
        && r.ordered
        && r.equality_exactly_on_axis
        && r.hopf.strictly_below_inside
        && r.hopf.du_dnu == 0.0
        && r.hopf.dv_dnu == 0.0;
    let summary = vec![
        ("radius", float(r.radius)),
        ("samples", r.samples.to_string()),
        ("max_deviation_u", float(r.max_deviation_u)),
        ("max_deviation_v", float(r.max_deviation_v)),
        ("u_le_v", r.ordered.to_string()),
        ("equal_nodes", r.equal_nodes.to_string()),
        ("axis_nodes", r.axis_nodes.to_string()),
        ("equality_exactly_on_axis", r.equality_exactly_on_axis.to_string()),
        ("hopf_samples", r.hopf.samples.to_string()),
        ("hopf_du_dnu", float(r.hopf.du_dnu)),
        ("hopf_dv_dnu", float(r.hopf.dv_dnu)),
        ("hopf_verdict", r.hopf.verdict.to_string()),
    ];
    Table::key_values(summary).write(&out.join("counterexample.csv"))?;
    Ok(if pass { Outcome::Success } else { Outcome::Failure })
}
