use charcurv_core::operator::{
    assemble_a, char_operator_n1, char_operator_value, f_value, null_eigenvectors, principal_eigenpair,
    regularized_a, sigma,
};
use charcurv_core::{AffineInR, ConstantCurvature, GraphJet};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

fn vec_of(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, d)
}

fn sym_of(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, d * d).prop_map(move |v| {
        let m = DMatrix::from_vec(d, d, v);
        (&m + m.transpose()) * 0.5
    })
}

fn odd_dim() -> impl Strategy<Value = usize> {
    prop_oneof![Just(3usize), Just(5), Just(7)]
}

proptest! {
    #[test]
    fn a_is_outer_product_of_sigma(p in odd_dim().prop_flat_map(vec_of)) {
        let s = sigma(&p).unwrap();
        let a = assemble_a(&p).unwrap();
        prop_assert!((a - &s * s.transpose()).amax() <= 1e-15 * (1.0 + s.norm_squared()));
    }

    #[test]
    fn trace_ignores_the_t_derivative(p in odd_dim().prop_flat_map(vec_of), ut in -50.0..50.0f64) {
        let mut q = p.clone();
        *q.last_mut().unwrap() = ut;
        let n = (p.len() - 1) / 2;
        let expected = 1.0 + p[..2 * n].iter().map(|v| v * v).sum::<f64>();
        prop_assert!((assemble_a(&p).unwrap().trace() - expected).abs() < 1e-12 * expected);
        prop_assert!((assemble_a(&q).unwrap().trace() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn spectrum_matches_symmetric_eigensolve(p in odd_dim().prop_flat_map(vec_of)) {
        let a = assemble_a(&p).unwrap();
        let mut eig: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let (s, lambda) = principal_eigenpair(&p).unwrap();
        prop_assert!((eig.last().unwrap() - lambda).abs() <= 1e-10 * lambda);
        for e in &eig[..eig.len() - 1] {
            prop_assert!(e.abs() <= 1e-10 * lambda);
        }
        prop_assert!((&a * &s - &s * lambda).amax() <= 1e-10 * lambda * s.norm());
        let nulls = null_eigenvectors(&p).unwrap();
        prop_assert_eq!(nulls.len(), p.len() - 1);
        for v in &nulls {
            prop_assert!((&a * v).amax() <= 1e-10 * lambda * v.norm());
        }
    }

    #[test]
    fn regularized_a_is_positive_definite(p in odd_dim().prop_flat_map(vec_of)) {
        let a = regularized_a(&p, 1e-4).unwrap();
        prop_assert!(a.cholesky().is_some());
    }

    #[test]
    fn degenerate_ellipticity(
        (p, l1, gap) in odd_dim().prop_flat_map(|d| (vec_of(d), sym_of(d), sym_of(d))),
        eps in prop_oneof![Just(0.0), 1e-4..1.0f64],
    ) {
        // l2 = l1 + G Gᵀ is above l1 in the Loewner order.
        let l2 = &l1 + &gap * gap.transpose();
        let d = p.len();
        let k = ConstantCurvature(0.3);
        let x = vec![0.0; d];
        let j1 = GraphJet::new(DVector::from_vec(p.clone()), l1).unwrap();
        let j2 = GraphJet::new(DVector::from_vec(p), l2).unwrap();
        let f1 = f_value(&x, 0.0, &j1, &k, eps).unwrap();
        let f2 = f_value(&x, 0.0, &j2, &k, eps).unwrap();
        prop_assert!(f1 >= f2 - 1e-12 * (1.0 + f1.abs()));
    }

    #[test]
    fn n1_expansion_matches_trace_form((p, l) in (vec_of(3), sym_of(3))) {
        let jet = GraphJet::new(DVector::from_vec(p), l).unwrap();
        let trace = char_operator_value(&jet);
        let expanded = char_operator_n1(&jet).unwrap();
        prop_assert!((trace - expanded).abs() <= 1e-12 * (1.0 + trace.abs()));
    }

    #[test]
    fn f_is_affine_in_k(
        (p, l) in (vec_of(3), sym_of(3)),
        offset in -2.0..2.0f64,
        slope in -2.0..2.0f64,
        r in -2.0..2.0f64,
    ) {
        let jet = GraphJet::new(DVector::from_vec(p), l).unwrap();
        let x = [0.1, 0.2, 0.3];
        let base = f_value(&x, r, &jet, &ConstantCurvature(0.0), 0.0).unwrap();
        let shifted = f_value(&x, r, &jet, &AffineInR { offset, slope }, 0.0).unwrap();
        prop_assert!((shifted - base - (offset + slope * r)).abs() < 1e-12 * (1.0 + base.abs()));
    }
}

#[test]
fn hemisphere_has_constant_operator_value() {
    for radius in [0.5, 1.0, 2.0] {
        let hemi = charcurv_core::solver::hemisphere([0.0; 3], radius);
        let h = radius / 8.0;
        for i in -7..=7 {
            for j in -7..=7 {
                for l in -7..=7 {
                    let x = [i as f64 * h, j as f64 * h, l as f64 * h];
                    if x.iter().map(|c| c * c).sum::<f64>() >= radius * radius {
                        continue;
                    }
                    use charcurv_core::ScalarField;
                    let jet = GraphJet::new(hemi.gradient(&x), hemi.hessian(&x)).unwrap();
                    let t = char_operator_value(&jet);
                    assert!((t - 1.0 / radius).abs() < 1e-10, "R = {radius}, x = {x:?}: {t}");
                    let f = f_value(&x, 0.0, &jet, &ConstantCurvature(1.0 / radius + 0.25), 0.0).unwrap();
                    assert!((f - 0.25).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn regularized_a_at_zero_gradient() {
    let a = regularized_a(&[0.0; 3], 0.1).unwrap();
    let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.1, 1.1]));
    assert!((a - expected).amax() < 1e-15);
    assert!(regularized_a(&[0.0; 3], -1e-3).is_err());
}

#[test]
fn even_gradients_are_rejected() {
    assert!(sigma(&[1.0, 2.0]).is_err());
    assert!(assemble_a(&[1.0, 2.0, 3.0, 4.0]).is_err());
    assert!(GraphJet::from_slices(&[0.0; 3], &[0.0; 4]).is_err());
}
