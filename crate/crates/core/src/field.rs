//! Scalar fields with first and second derivatives.
//!
//! A [`ScalarField`] is any twice-differentiable function `R^d -> R`. Fields
//! either supply analytic derivatives or fall back to central differences of
//! their values (see [`ValueField`]).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

/// Default central-difference step for value-only fields.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Value, gradient and symmetric Hessian of a field at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, z: &[f64]) -> f64;

    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        fd_gradient(|p| self.value(p), z, DEFAULT_FD_STEP)
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        fd_hessian(|p| self.value(p), z, DEFAULT_FD_STEP)
    }

    fn jet(&self, z: &[f64]) -> Jet2 {
        Jet2 {
            value: self.value(z),
            gradient: self.gradient(z),
            hessian: self.hessian(z),
        }
    }
}

impl<F: ScalarField + ?Sized> ScalarField for Arc<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, z: &[f64]) -> f64 {
        (**self).value(z)
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        (**self).gradient(z)
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        (**self).hessian(z)
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, z: &[f64]) -> f64 {
        (**self).value(z)
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        (**self).gradient(z)
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        (**self).hessian(z)
    }
}

/// Central-difference gradient, second order in `step`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, z: &[f64], step: f64) -> DVector<f64> {
    let mut p = z.to_vec();
    DVector::from_fn(z.len(), |i, _| {
        p[i] = z[i] + step;
        let fp = f(&p);
        p[i] = z[i] - step;
        let fm = f(&p);
        p[i] = z[i];
        (fp - fm) / (2.0 * step)
    })
}

/// Central-difference Hessian: three-point stencil on the diagonal and the
/// four-point centered stencil off it. The result is exactly symmetric.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, z: &[f64], step: f64) -> DMatrix<f64> {
    let d = z.len();
    let mut p = z.to_vec();
    let f0 = f(z);
    let mut hess = DMatrix::zeros(d, d);
    for i in 0..d {
        p[i] = z[i] + step;
        let fp = f(&p);
        p[i] = z[i] - step;
        let fm = f(&p);
        p[i] = z[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (step * step);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| {
                p[i] = z[i] + si * step;
                p[j] = z[j] + sj * step;
                let v = f(&p);
                p[i] = z[i];
                p[j] = z[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                + corner(-1.0, -1.0))
                / (4.0 * step * step);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> DVector<f64> + Send + Sync;
type HessianFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// A field given by analytic callables for its value, gradient and Hessian.
#[derive(Clone)]
pub struct AnalyticField {
    dim: usize,
    value: Arc<ValueFn>,
    gradient: Arc<GradientFn>,
    hessian: Arc<HessianFn>,
}

impl AnalyticField {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static,
        hessian: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
        }
    }
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField").field("dim", &self.dim).finish()
    }
}

impl ScalarField for AnalyticField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, z: &[f64]) -> f64 {
        (self.value)(z)
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        (self.gradient)(z)
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        (self.hessian)(z)
    }
}

/// A value-only field whose derivatives come from central differences at a
/// configurable step.
#[derive(Clone)]
pub struct ValueField {
    dim: usize,
    step: f64,
    value: Arc<ValueFn>,
}

impl ValueField {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            dim,
            step: DEFAULT_FD_STEP,
            value: Arc::new(value),
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl fmt::Debug for ValueField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValueField")
            .field("dim", &self.dim)
            .field("step", &self.step)
            .finish()
    }
}

impl ScalarField for ValueField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, z: &[f64]) -> f64 {
        (self.value)(z)
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        fd_gradient(|p| (self.value)(p), z, self.step)
    }
    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        fd_hessian(|p| (self.value)(p), z, self.step)
    }
}

/// `q(z) = ½ zᵀ Q z + bᵀ z + c` with symmetric `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub matrix: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
}

impl Quadratic {
    /// Symmetrizes `matrix`; panics if the shapes disagree.
    pub fn new(matrix: DMatrix<f64>, linear: DVector<f64>, constant: f64) -> Self {
        assert!(matrix.is_square() && matrix.nrows() == linear.len());
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        Self {
            matrix,
            linear,
            constant,
        }
    }

    /// `½ Σ w_i z_i² + c`.
    pub fn diagonal(weights: &[f64], constant: f64) -> Self {
        let d = weights.len();
        Self::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(weights)),
            DVector::zeros(d),
            constant,
        )
    }
}

impl ScalarField for Quadratic {
    fn dim(&self) -> usize {
        self.linear.len()
    }
    fn value(&self, z: &[f64]) -> f64 {
        let z = DVector::from_column_slice(z);
        0.5 * z.dot(&(&self.matrix * &z)) + self.linear.dot(&z) + self.constant
    }
    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        &self.matrix * DVector::from_column_slice(z) + &self.linear
    }
    fn hessian(&self, _z: &[f64]) -> DMatrix<f64> {
        self.matrix.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> ValueField {
        ValueField::new(3, |z| z[0].powi(3) + z[0] * z[1] * z[2] + (z[2]).sin())
    }

    #[test]
    fn fd_derivatives_match_closed_form() {
        let f = cubic();
        let z = [0.3, -0.7, 1.1];
        let g = f.gradient(&z);
        let expected = [3.0 * 0.09 + (-0.7 * 1.1), 0.3 * 1.1, 0.3 * -0.7 + 1.1f64.cos()];
        for i in 0..3 {
            assert!((g[i] - expected[i]).abs() < 1e-9, "{i}: {}", g[i]);
        }
        let h = f.hessian(&z);
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[1.8, 1.1, -0.7, 1.1, 0.0, 0.3, -0.7, 0.3, -(1.1f64.sin())],
        );
        assert!((h - expected).amax() < 1e-5);
    }

    #[test]
    fn quadratic_is_exact() {
        let q = Quadratic::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 4.0]),
            DVector::from_vec(vec![1.0, -1.0]),
            3.0,
        );
        let z = [1.0, 2.0];
        // ½(2 + 4 + 16) + 1 - 2 + 3
        assert_eq!(q.value(&z), 13.0);
        assert_eq!(q.gradient(&z).as_slice(), &[5.0, 8.0]);
        let jet = q.jet(&z);
        assert_eq!(jet.hessian, q.matrix);
    }
}
