//! The characteristic curvature operator for graphs `s = u(x, y, t)` over
//! domains of `R^{2n+1}`:
//!
//! ```text
//! T u = tr(A(Du) D²u) / (1 + |Du|²)^{3/2},   A(p) = σ(p) σ(p)ᵀ,
//! σ(p) = (-u_y, u_x, 1)
//! ```
//!
//! `A` is rank one, so `T` is degenerate elliptic with a `2n`-dimensional
//! null space at every gradient. [`regularized_a`] adds `εI`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Asymmetry above this is logged when a Hessian is symmetrized.
const ASYMMETRY_WARN: f64 = 1e-9;

fn graph_n(d: usize) -> Result<usize> {
    if d >= 3 && d % 2 == 1 {
        Ok((d - 1) / 2)
    } else {
        Err(Error::Dimension {
            expected: "an odd length >= 3".into(),
            got: d,
        })
    }
}

/// Gradient and symmetric Hessian of a graph function at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphJet {
    p: DVector<f64>,
    hessian: DMatrix<f64>,
}

impl GraphJet {
    /// Validates dimensions and replaces the Hessian by its symmetric part.
    pub fn new(p: DVector<f64>, hessian: DMatrix<f64>) -> Result<Self> {
        let d = p.len();
        graph_n(d)?;
        if hessian.nrows() != d || hessian.ncols() != d {
            return Err(Error::Dimension {
                expected: format!("a {d}x{d} Hessian"),
                got: hessian.nrows() * hessian.ncols(),
            });
        }
        let asym = (&hessian - hessian.transpose()).amax();
        if asym > ASYMMETRY_WARN {
            log::warn!("symmetrizing a Hessian with asymmetry {asym:e}");
        }
        let hessian = (&hessian + hessian.transpose()) * 0.5;
        Ok(Self { p, hessian })
    }

    pub fn from_slices(p: &[f64], hessian_row_major: &[f64]) -> Result<Self> {
        let d = p.len();
        if hessian_row_major.len() != d * d {
            return Err(Error::Dimension {
                expected: format!("{} Hessian entries", d * d),
                got: hessian_row_major.len(),
            });
        }
        Self::new(DVector::from_column_slice(p), DMatrix::from_row_slice(d, d, hessian_row_major))
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn n(&self) -> usize {
        (self.p.len() - 1) / 2
    }

    pub fn gradient(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn u_x(&self) -> &[f64] {
        &self.p.as_slice()[..self.n()]
    }

    pub fn u_y(&self) -> &[f64] {
        &self.p.as_slice()[self.n()..2 * self.n()]
    }

    pub fn u_t(&self) -> f64 {
        self.p[self.p.len() - 1]
    }
}

/// `σ(p) = (-u_y, u_x, 1)`.
pub fn sigma(p: &[f64]) -> Result<DVector<f64>> {
    let n = graph_n(p.len())?;
    Ok(DVector::from_fn(2 * n + 1, |i, _| {
        if i < n {
            -p[n + i]
        } else if i < 2 * n {
            p[i - n]
        } else {
            1.0
        }
    }))
}

/// `A(p) = σ(p) σ(p)ᵀ`.
pub fn assemble_a(p: &[f64]) -> Result<DMatrix<f64>> {
    let s = sigma(p)?;
    Ok(&s * s.transpose())
}

/// `A(p) + εI`.
pub fn regularized_a(p: &[f64], eps: f64) -> Result<DMatrix<f64>> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("regularization must be >= 0, got {eps}")));
    }
    let mut a = assemble_a(p)?;
    for i in 0..a.nrows() {
        a[(i, i)] += eps;
    }
    Ok(a)
}

/// `(1 + |p|²)^{3/2}`, including the `t` derivative.
pub fn normalization(p: &[f64]) -> f64 {
    let sq: f64 = p.iter().map(|v| v * v).sum();
    (1.0 + sq).powf(1.5)
}

/// `tr(A(p) Λ) / (1 + |p|²)^{3/2}`, computed as `σᵀ Λ σ`.
pub fn char_operator_value(jet: &GraphJet) -> f64 {
    let s = sigma(jet.p.as_slice()).expect("validated on construction");
    (&jet.hessian * &s).dot(&s) / normalization(jet.p.as_slice())
}

/// Explicit expansion of the operator for `n = 1`.
pub fn char_operator_n1(jet: &GraphJet) -> Result<f64> {
    if jet.dim() != 3 {
        return Err(Error::Dimension {
            expected: "3".into(),
            got: jet.dim(),
        });
    }
    let (ux, uy, _) = (jet.p[0], jet.p[1], jet.p[2]);
    let h = &jet.hessian;
    let (uxx, uyy, utt) = (h[(0, 0)], h[(1, 1)], h[(2, 2)]);
    let (uxy, uxt, uyt) = (h[(0, 1)], h[(0, 2)], h[(1, 2)]);
    let numer = uy * uy * uxx + ux * ux * uyy + utt - 2.0 * ux * uy * uxy + 2.0 * ux * uyt - 2.0 * uy * uxt;
    Ok(numer / normalization(jet.p.as_slice()))
}

/// The `2n` vectors `∂_{x_k} + u_{y_k} ∂_t` and `∂_{y_k} - u_{x_k} ∂_t`
/// spanning the kernel of `A(p)`.
pub fn null_eigenvectors(p: &[f64]) -> Result<Vec<DVector<f64>>> {
    let n = graph_n(p.len())?;
    let d = 2 * n + 1;
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let mut v = DVector::zeros(d);
        v[k] = 1.0;
        v[d - 1] = p[n + k];
        out.push(v);
    }
    for k in 0..n {
        let mut v = DVector::zeros(d);
        v[n + k] = 1.0;
        v[d - 1] = -p[k];
        out.push(v);
    }
    Ok(out)
}

/// `(σ(p), 1 + |u_x|² + |u_y|²)`, the only non-zero eigenpair of `A(p)`.
pub fn principal_eigenpair(p: &[f64]) -> Result<(DVector<f64>, f64)> {
    let s = sigma(p)?;
    let lambda = s.norm_squared();
    Ok((s, lambda))
}

/// How a prescribed curvature `k(x, r)` depends on `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    StrictlyIncreasingInR,
    /// Nondecreasing in `r` and independent of `x`.
    NondecreasingXFree,
    General,
}

/// A prescribed curvature function `k: Ω × R → R`.
pub trait CurvatureSpec: Send + Sync {
    fn value(&self, x: &[f64], r: f64) -> f64;

    /// `∂k/∂r`; central differences unless overridden.
    fn d_dr(&self, x: &[f64], r: f64) -> f64 {
        let step = 1e-6 * (1.0 + r.abs());
        (self.value(x, r + step) - self.value(x, r - step)) / (2.0 * step)
    }

    /// `∂k/∂x`; central differences unless overridden.
    fn d_dx(&self, x: &[f64], r: f64) -> Vec<f64> {
        let mut p = x.to_vec();
        (0..x.len())
            .map(|i| {
                let step = 1e-6 * (1.0 + x[i].abs());
                p[i] = x[i] + step;
                let fp = self.value(&p, r);
                p[i] = x[i] - step;
                let fm = self.value(&p, r);
                p[i] = x[i];
                (fp - fm) / (2.0 * step)
            })
            .collect()
    }

    fn monotonicity(&self) -> Monotonicity;

    /// Upper bound of `k` over `Ω × R` when one is known.
    fn sup(&self) -> Option<f64> {
        None
    }
}

/// `k ≡ value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCurvature(pub f64);

impl CurvatureSpec for ConstantCurvature {
    fn value(&self, _x: &[f64], _r: f64) -> f64 {
        self.0
    }
    fn d_dr(&self, _x: &[f64], _r: f64) -> f64 {
        0.0
    }
    fn d_dx(&self, x: &[f64], _r: f64) -> Vec<f64> {
        vec![0.0; x.len()]
    }
    fn monotonicity(&self) -> Monotonicity {
        Monotonicity::NondecreasingXFree
    }
    fn sup(&self) -> Option<f64> {
        Some(self.0)
    }
}

/// `k(x, r) = offset + slope * r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineInR {
    pub offset: f64,
    pub slope: f64,
}

impl CurvatureSpec for AffineInR {
    fn value(&self, _x: &[f64], r: f64) -> f64 {
        self.offset + self.slope * r
    }
    fn d_dr(&self, _x: &[f64], _r: f64) -> f64 {
        self.slope
    }
    fn d_dx(&self, x: &[f64], _r: f64) -> Vec<f64> {
        vec![0.0; x.len()]
    }
    fn monotonicity(&self) -> Monotonicity {
        if self.slope > 0.0 {
            Monotonicity::StrictlyIncreasingInR
        } else if self.slope == 0.0 {
            Monotonicity::NondecreasingXFree
        } else {
            Monotonicity::General
        }
    }
    fn sup(&self) -> Option<f64> {
        (self.slope == 0.0).then_some(self.offset)
    }
}

/// Samples `(x, r)` and confirms the declared monotonicity flag, returning
/// the first violating sample.
pub fn check_monotonicity(k: &(impl CurvatureSpec + ?Sized), samples: &[(Vec<f64>, f64)]) -> Result<()> {
    for (x, r) in samples {
        let dr = k.d_dr(x, *r);
        let ok = match k.monotonicity() {
            Monotonicity::StrictlyIncreasingInR => dr > 0.0,
            Monotonicity::NondecreasingXFree => dr >= -1e-9 && k.d_dx(x, *r).iter().all(|g| g.abs() <= 1e-9),
            Monotonicity::General => true,
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "declared {:?} but the sample at x = {x:?}, r = {r} has dk/dr = {dr:e}",
                k.monotonicity()
            )));
        }
    }
    Ok(())
}

/// Checks `∂k/∂r ≥ 0` and `k² - Σ|∂k/∂x_i| ≥ 0` on samples, the hypotheses
/// under which the gradient of the regularized solution peaks on the boundary.
pub fn check_gradient_hypotheses(k: &(impl CurvatureSpec + ?Sized), samples: &[(Vec<f64>, f64)]) -> bool {
    samples.iter().all(|(x, r)| {
        let value = k.value(x, *r);
        let dx: f64 = k.d_dx(x, *r).iter().map(|g| g.abs()).sum();
        k.d_dr(x, *r) >= 0.0 && value * value - dx >= 0.0
    })
}

/// `F^ε(x, r, p, Λ) = -tr(Ã^ε(p) Λ) + k(x, r)` with
/// `Ã^ε = (A(p) + εI) / (1 + |p|²)^{3/2}`. Subsolutions have `F ≤ 0`.
pub fn f_value(x: &[f64], r: f64, jet: &GraphJet, k: &(impl CurvatureSpec + ?Sized), eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("regularization must be >= 0, got {eps}")));
    }
    let trace = char_operator_value(jet) + eps * jet.hessian.trace() / normalization(jet.p.as_slice());
    Ok(-trace + k.value(x, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hemisphere_center_jet(r: f64) -> GraphJet {
        GraphJet::new(DVector::zeros(3), DMatrix::identity(3, 3) / r).unwrap()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&[0.0, 0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
        assert_eq!(sigma(&[1.0, 1.0, 5.0]).unwrap().as_slice(), &[-1.0, 1.0, 1.0]);
        assert_eq!(sigma(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap().as_slice(), &[-3.0, -4.0, 1.0, 2.0, 1.0]);
        assert!(sigma(&[1.0, 2.0]).is_err());
        assert!(sigma(&[1.0, 2.0, 3.0, 4.0]).is_err());
    }

    #[test]
    fn assembled_matrix_examples() {
        let a = assemble_a(&[0.0; 3]).unwrap();
        let mut expected = DMatrix::zeros(3, 3);
        expected[(2, 2)] = 1.0;
        assert_eq!(a, expected);
        let a = assemble_a(&[1.0, 1.0, 5.0]).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0]);
        assert_eq!(a, expected);
    }

    #[test]
    fn regularization() {
        let p = [0.3, -0.4, 2.0];
        assert_eq!(regularized_a(&p, 0.0).unwrap(), assemble_a(&p).unwrap());
        let r = regularized_a(&[0.0; 3], 0.1).unwrap();
        assert_eq!(r, DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.1, 1.1])));
        assert!(regularized_a(&p, -1e-3).is_err());
        assert!(regularized_a(&p, f64::NAN).is_err());
    }

    #[test]
    fn operator_on_hemisphere_center() {
        let jet = hemisphere_center_jet(2.0);
        assert!((char_operator_value(&jet) - 0.5).abs() < 1e-15);
        assert!((char_operator_n1(&jet).unwrap() - 0.5).abs() < 1e-15);
        let diag = GraphJet::from_slices(&[0.0; 3], &[2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 7.0]).unwrap();
        assert_eq!(char_operator_n1(&diag).unwrap(), 7.0);
        let affine = GraphJet::new(DVector::from_vec(vec![1.0, 2.0, 3.0]), DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(char_operator_value(&affine), 0.0);
    }

    #[test]
    fn expansion_requires_three_dimensions() {
        let jet = GraphJet::new(DVector::zeros(5), DMatrix::zeros(5, 5)).unwrap();
        assert!(char_operator_n1(&jet).is_err());
    }

    #[test]
    fn jet_validation() {
        assert!(GraphJet::new(DVector::zeros(4), DMatrix::zeros(4, 4)).is_err());
        assert!(GraphJet::new(DVector::zeros(3), DMatrix::zeros(2, 2)).is_err());
        let jet = GraphJet::from_slices(&[0.0; 3], &[1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(jet.hessian()[(0, 1)], 1.0);
        assert_eq!(jet.hessian()[(1, 0)], 1.0);
    }

    #[test]
    fn eigenstructure_examples() {
        let p = [1.0, 1.0, 5.0];
        let (v, lambda) = principal_eigenpair(&p).unwrap();
        assert_eq!(lambda, 3.0);
        let a = assemble_a(&p).unwrap();
        assert!((&a * &v - &v * lambda).amax() < 1e-15);
        let (v, lambda) = principal_eigenpair(&[0.0; 3]).unwrap();
        assert_eq!((v.as_slice(), lambda), (&[0.0, 0.0, 1.0][..], 1.0));

        let p = [0.7, -1.3, 2.0];
        let null = null_eigenvectors(&p).unwrap();
        assert_eq!(null[0].as_slice(), &[1.0, 0.0, -1.3]);
        assert_eq!(null[1].as_slice(), &[0.0, 1.0, -0.7]);
        let a = assemble_a(&p).unwrap();
        for v in null {
            assert!((&a * v).amax() < 1e-15);
        }
    }

    #[test]
    fn f_value_examples() {
        let affine = GraphJet::new(DVector::from_vec(vec![1.0, 2.0, 3.0]), DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(f_value(&[0.0; 3], 0.0, &affine, &ConstantCurvature(0.0), 0.0).unwrap(), 0.0);
        let jet = hemisphere_center_jet(2.0);
        assert!(f_value(&[0.0; 3], -2.0, &jet, &ConstantCurvature(0.5), 0.0).unwrap().abs() < 1e-15);
        let delta = 0.125;
        let f = f_value(&[0.0; 3], -2.0, &jet, &ConstantCurvature(0.5 + delta), 0.0).unwrap();
        assert!((f - delta).abs() < 1e-15);
        // εΔu / (1 + |p|²)^{3/2} = ε * 3/2 at the center.
        let f = f_value(&[0.0; 3], -2.0, &jet, &ConstantCurvature(0.5), 0.1).unwrap();
        assert!((f + 0.15).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_flags() {
        let samples: Vec<_> = (0..5).map(|i| (vec![0.1 * i as f64; 3], i as f64 - 2.0)).collect();
        check_monotonicity(&ConstantCurvature(0.3), &samples).unwrap();
        check_monotonicity(&AffineInR { offset: 0.0, slope: 1.0 }, &samples).unwrap();

        struct Lying;
        impl CurvatureSpec for Lying {
            fn value(&self, x: &[f64], _r: f64) -> f64 {
                x[0]
            }
            fn monotonicity(&self) -> Monotonicity {
                Monotonicity::NondecreasingXFree
            }
        }
        assert!(check_monotonicity(&Lying, &samples).is_err());
        assert!(check_gradient_hypotheses(&ConstantCurvature(0.5), &samples));
        assert!(!check_gradient_hypotheses(&AffineInR { offset: 0.0, slope: -1.0 }, &samples));
    }
}
