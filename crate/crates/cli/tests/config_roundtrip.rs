use charcurv_cli::config::{
    emit_config, parse_config, BoundaryConfig, CurvatureConfig, DomainConfig, RunConfig, SolveConfig, Subcommand,
    SurfaceSpec,
};
use proptest::prelude::*;

fn pos() -> impl Strategy<Value = f64> {
    prop_oneof![0.01f64..100.0, Just(1.0 / 3.0), Just(0.1)]
}

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3f64..1e3, Just(0.0), Just(-0.0), Just(1e-300)]
}

fn triple() -> impl Strategy<Value = [f64; 3]> {
    [real(), real(), real()]
}

fn surface() -> impl Strategy<Value = SurfaceSpec> {
    prop_oneof![
        (1usize..4, pos()).prop_map(|(n, radius)| SurfaceSpec::Sphere { n, radius }),
        pos().prop_map(|radius| SurfaceSpec::Cylinder1 { radius }),
        pos().prop_map(|radius| SurfaceSpec::Cylinder2 { radius }),
        (1usize..4)
            .prop_flat_map(|n| prop::collection::vec(pos(), 2 * n + 2))
            .prop_map(|axes| SurfaceSpec::Ellipsoid { axes }),
    ]
}

fn domain() -> impl Strategy<Value = DomainConfig> {
    prop_oneof![
        (triple(), [pos(), pos(), pos()]).prop_map(|(lower, ext)| DomainConfig::Box {
            lower,
            upper: [0, 1, 2].map(|a| lower[a] + ext[a]),
        }),
        (triple(), pos()).prop_map(|(center, radius)| DomainConfig::Ball { center, radius }),
        (triple(), [pos(), pos(), pos()]).prop_map(|(center, axes)| DomainConfig::Ellipsoid { center, axes }),
    ]
}

fn boundary() -> impl Strategy<Value = BoundaryConfig> {
    prop_oneof![
        (real(), triple()).prop_map(|(value, slope)| BoundaryConfig::Affine { value, slope }),
        (triple(), pos()).prop_map(|(center, radius)| BoundaryConfig::Hemisphere { center, radius }),
        real().prop_map(|value| BoundaryConfig::Constant { value }),
    ]
}

fn curvature() -> impl Strategy<Value = CurvatureConfig> {
    prop_oneof![
        real().prop_map(|value| CurvatureConfig::Constant { value }),
        (real(), real()).prop_map(|(offset, slope)| CurvatureConfig::AffineInR { offset, slope }),
    ]
}

fn solve() -> impl Strategy<Value = SolveConfig> {
    (
        pos(),
        prop::collection::vec(1e-8f64..10.0, 1..6),
        0.01f64..=1.0,
        1usize..1000,
        pos(),
        pos(),
        prop::option::of(pos()),
    )
        .prop_map(|(h, mut eps, damping, max_iters, tol, linear_tol, blowup_threshold)| {
            eps.sort_by(|a, b| b.total_cmp(a));
            eps.dedup();
            SolveConfig {
                h,
                eps_schedule: eps,
                damping,
                max_iters,
                tol,
                linear_tol,
                blowup_threshold,
            }
        })
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        (
            prop::option::of(prop::sample::select(Subcommand::ALL.to_vec())),
            surface(),
            1usize..10_000,
            any::<u64>(),
            pos(),
            pos(),
            any::<bool>(),
        ),
        (domain(), boundary(), curvature(), solve()),
        (pos(), pos(), 1usize..1000, 1.0f64..5.0, 0.01f64..0.9, "[a-z0-9_/.-]{1,20}"),
    )
        .prop_flat_map(|(a, b, c)| {
            let d = 2 * match &a.1 {
                SurfaceSpec::Sphere { n, .. } => *n,
                SurfaceSpec::Ellipsoid { axes } => axes.len() / 2 - 1,
                _ => 1,
            } + 2;
            (Just((a, b, c)), prop::collection::vec(real(), d))
        })
        .prop_map(|(((subcommand, surface, samples, seed, t_end, dt, with_start), (domain, boundary, k, solve), c), start)| {
            RunConfig {
                subcommand,
                surface,
                curvature_samples: samples,
                seed,
                trajectory_t_end: t_end,
                trajectory_dt: dt,
                trajectory_start: with_start.then_some(start),
                domain,
                boundary,
                k,
                solve,
                critical_tol: c.0,
                level_tol: c.1,
                verify_samples: c.2,
                counterexample_radius: c.3,
                counterexample_h: c.4,
                output_dir: c.5,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn emit_then_parse_is_identity(cfg in config()) {
        let text = emit_config(&cfg);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn emit_is_a_fixed_point(cfg in config()) {
        let text = emit_config(&cfg);
        prop_assert_eq!(emit_config(&parse_config(&text).unwrap()), text);
    }

    #[test]
    fn unknown_keys_report_their_line(pad in 0usize..20, key in "x[a-z]{1,8}\\.[a-z]{1,8}") {
        let text = format!("{}{key} = 1\n", "# filler\n".repeat(pad));
        let err = parse_config(&text).unwrap_err().to_string();
        prop_assert!(err.contains(&format!("line {}", pad + 1)), "{}", err);
    }
}
