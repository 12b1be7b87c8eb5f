//! Extrinsic geometry of a level-set hypersurface `M = {f = 0}` in
//! `R^{2n+2} ≅ C^{n+1}`: unit normal, characteristic direction, a frame
//! adapted to the splitting `TM = HM ⊕ RT`, the second fundamental form and
//! the classical, Levi and characteristic curvatures.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::field::ScalarField;
use crate::symplectic::{apply_j, characteristic_curvature_levelset, PhasePoint, DEFAULT_CRITICAL_TOL};

pub const DEFAULT_LEVEL_TOL: f64 = 1e-8;
/// Relative tangency tolerance used by [`DefiningFunctionSurface::second_fundamental_form`].
pub const DEFAULT_TANGENCY_TOL: f64 = 1e-8;

/// The hypersurface `{f = 0}` with the inner normal `-∇f/|∇f|`.
#[derive(Debug, Clone)]
pub struct DefiningFunctionSurface<F> {
    f: F,
    n: usize,
    pub level_tol: f64,
    pub critical_tol: f64,
    pub tangency_tol: f64,
}

/// Orthonormal frame `{X_1..X_n, Y_1..Y_n, T, N}` at a point of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    pub base: DVector<f64>,
    pub normal: DVector<f64>,
    pub characteristic: DVector<f64>,
    pub x: Vec<DVector<f64>>,
    /// `y[k] = J x[k]`.
    pub y: Vec<DVector<f64>>,
}

impl AdaptedFrame {
    /// All `2n + 2` vectors as the columns of a matrix, ordered `X, Y, T, N`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let cols: Vec<_> = self
            .x
            .iter()
            .chain(&self.y)
            .chain([&self.characteristic, &self.normal])
            .cloned()
            .collect();
        DMatrix::from_columns(&cols)
    }

    /// Orthonormal basis of the horizontal (Levi) distribution `HM`.
    pub fn horizontal(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.x.iter().chain(&self.y)
    }
}

struct LocalData {
    grad: DVector<f64>,
    grad_norm: f64,
    hess: DMatrix<f64>,
}

impl<F: ScalarField> DefiningFunctionSurface<F> {
    /// Panics unless `f` lives on an even-dimensional space of dimension at least 4.
    pub fn new(f: F) -> Self {
        let dim = f.dim();
        assert!(dim >= 4 && dim.is_multiple_of(2), "defining function must live on R^(2n+2)");
        Self {
            f,
            n: dim / 2 - 1,
            level_tol: DEFAULT_LEVEL_TOL,
            critical_tol: DEFAULT_CRITICAL_TOL,
            tangency_tol: DEFAULT_TANGENCY_TOL,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &F {
        &self.f
    }

    fn local(&self, z: &[f64]) -> Result<LocalData> {
        check_len(z.len(), 2 * self.n + 2)?;
        let value = self.f.value(z);
        if !(value.abs() <= self.level_tol) {
            return Err(Error::OffSurface {
                value: value.abs(),
                tol: self.level_tol,
            });
        }
        let grad = self.f.gradient(z);
        let grad_norm = grad.norm();
        if !(grad_norm > self.critical_tol) {
            return Err(Error::CriticalPoint {
                norm: grad_norm,
                tol: self.critical_tol,
            });
        }
        Ok(LocalData {
            grad,
            grad_norm,
            hess: self.f.hessian(z),
        })
    }

    /// `N = -∇f / |∇f|`.
    pub fn unit_normal(&self, z: &[f64]) -> Result<DVector<f64>> {
        let local = self.local(z)?;
        Ok(-local.grad / local.grad_norm)
    }

    /// `T = -J N = J∇f / |∇f|`.
    pub fn characteristic_direction(&self, z: &[f64]) -> Result<DVector<f64>> {
        let local = self.local(z)?;
        Ok(apply_j(local.grad.as_slice())? / local.grad_norm)
    }

    /// Adapted frame seeded by the canonical basis in index order.
    pub fn adapted_frame(&self, z: &[f64]) -> Result<AdaptedFrame> {
        let d = 2 * self.n + 2;
        let seeds: Vec<_> = (0..d).map(|i| DVector::from_fn(d, |j, _| f64::from(u8::from(i == j)))).collect();
        self.adapted_frame_with_seeds(z, &seeds)
    }

    /// Gram-Schmidt over `seeds` in order. Each accepted `X_k` is paired with
    /// `Y_k = J X_k` before the next seed is considered; seeds whose
    /// projection is too small are skipped.
    pub fn adapted_frame_with_seeds(&self, z: &[f64], seeds: &[DVector<f64>]) -> Result<AdaptedFrame> {
        let local = self.local(z)?;
        let d = 2 * self.n + 2;
        let normal = -&local.grad / local.grad_norm;
        let characteristic = apply_j(local.grad.as_slice())? / local.grad_norm;

        // Some canonical seed always keeps at least 1/sqrt(n+1) after projection.
        let accept = 0.5 / ((self.n + 1) as f64).sqrt();
        let mut basis = vec![normal.clone(), characteristic.clone()];
        let mut x = Vec::with_capacity(self.n);
        let mut y = Vec::with_capacity(self.n);
        for seed in seeds {
            if x.len() == self.n {
                break;
            }
            check_len(seed.len(), d)?;
            let scale = seed.norm();
            if scale == 0.0 {
                continue;
            }
            let mut v = seed / scale;
            // Two passes keep the frame orthonormal to rounding.
            for _ in 0..2 {
                for b in &basis {
                    v -= b * b.dot(&v);
                }
            }
            let norm = v.norm();
            if norm < accept {
                continue;
            }
            v /= norm;
            let jv = apply_j(v.as_slice())?;
            basis.push(v.clone());
            basis.push(jv.clone());
            x.push(v);
            y.push(jv);
        }
        if x.len() < self.n {
            return Err(Error::FrameBreakdown);
        }
        Ok(AdaptedFrame {
            base: DVector::from_column_slice(z),
            normal,
            characteristic,
            x,
            y,
        })
    }

    /// `h(V, W) = <D²f V, W> / |∇f|`, for `V`, `W` tangent at `z`.
    pub fn second_fundamental_form(&self, z: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        let local = self.local(z)?;
        let v = DVector::from_column_slice(v);
        let w = DVector::from_column_slice(w);
        check_len(v.len(), local.grad.len())?;
        check_len(w.len(), local.grad.len())?;
        for u in [&v, &w] {
            let residual = u.dot(&local.grad).abs() / (u.norm() * local.grad_norm).max(f64::MIN_POSITIVE);
            if residual > self.tangency_tol {
                return Err(Error::NotTangent { residual });
            }
        }
        Ok(form(&local, &v, &w))
    }

    /// Mean curvature `tra(h) / (2n + 1)`.
    pub fn mean_curvature(&self, z: &[f64]) -> Result<f64> {
        let traces = self.traces(z)?;
        Ok((traces.horizontal + traces.characteristic) / (2 * self.n + 1) as f64)
    }

    /// Levi mean curvature `Σ_k [h(X_k, X_k) + h(JX_k, JX_k)] / (2n)`.
    pub fn levi_mean_curvature(&self, z: &[f64]) -> Result<f64> {
        Ok(self.traces(z)?.horizontal / (2 * self.n) as f64)
    }

    /// `h(T, T)`, the characteristic curvature through the frame.
    pub fn characteristic_curvature(&self, z: &[f64]) -> Result<f64> {
        Ok(self.traces(z)?.characteristic)
    }

    /// `(2n + 1) H - 2n L - C`, with `C` computed independently from the
    /// Hamiltonian formula.
    pub fn curvature_relation_residual(&self, z: &[f64]) -> Result<f64> {
        let n = self.n as f64;
        let mean = self.mean_curvature(z)?;
        let levi = self.levi_mean_curvature(z)?;
        let point = PhasePoint::new(z.to_vec())?;
        let characteristic = characteristic_curvature_levelset(&self.f, &point, self.critical_tol)?;
        Ok((2.0 * n + 1.0) * mean - 2.0 * n * levi - characteristic)
    }

    fn traces(&self, z: &[f64]) -> Result<Traces> {
        let frame = self.adapted_frame(z)?;
        let local = self.local(z)?;
        let horizontal = frame.horizontal().map(|v| form(&local, v, v)).sum();
        let characteristic = form(&local, &frame.characteristic, &frame.characteristic);
        Ok(Traces {
            horizontal,
            characteristic,
        })
    }
}

struct Traces {
    horizontal: f64,
    characteristic: f64,
}

fn form(local: &LocalData, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
    (&local.hess * v).dot(w) / local.grad_norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Quadratic;

    fn sphere(n: usize, r: f64) -> DefiningFunctionSurface<Quadratic> {
        DefiningFunctionSurface::new(Quadratic::diagonal(&vec![1.0; 2 * n + 2], -0.5 * r * r))
    }

    #[test]
    fn sphere_normal_and_direction() {
        let s = sphere(1, 2.0);
        let z = [2.0, 0.0, 0.0, 0.0];
        assert_eq!(s.unit_normal(&z).unwrap().as_slice(), &[-1.0, 0.0, 0.0, 0.0]);
        assert_eq!(s.characteristic_direction(&z).unwrap().as_slice(), &[0.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn normal_is_scale_invariant() {
        let s1 = sphere(1, 1.0);
        let scaled = DefiningFunctionSurface::new(Quadratic::diagonal(&[3.0; 4], -1.5));
        let z = [0.6, 0.0, 0.0, 0.8];
        let a = s1.unit_normal(&z).unwrap();
        let b = scaled.unit_normal(&z).unwrap();
        assert!((a - b).amax() < 1e-15);
    }

    #[test]
    fn off_surface_and_critical_points_are_rejected() {
        let s = sphere(1, 1.0);
        assert!(matches!(s.unit_normal(&[2.0, 0.0, 0.0, 0.0]), Err(Error::OffSurface { .. })));
        let cone = DefiningFunctionSurface::new(Quadratic::diagonal(&[1.0, 1.0, -1.0, -1.0], 0.0));
        assert!(matches!(cone.mean_curvature(&[0.0; 4]), Err(Error::CriticalPoint { .. })));
    }

    #[test]
    fn second_form_rejects_normal_input() {
        let s = sphere(1, 2.0);
        let z = [2.0, 0.0, 0.0, 0.0];
        let err = s.second_fundamental_form(&z, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::NotTangent { residual }) if (residual - 1.0).abs() < 1e-15));
        let h = s.second_fundamental_form(&z, &[0.0, 1.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((h - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sphere_curvatures_agree() {
        for n in 1..=3 {
            for r in [0.5, 1.0, 2.0] {
                let s = sphere(n, r);
                let mut z = vec![0.0; 2 * n + 2];
                z[n] = r;
                let inv = 1.0 / r;
                assert!((s.mean_curvature(&z).unwrap() - inv).abs() < 1e-12);
                assert!((s.levi_mean_curvature(&z).unwrap() - inv).abs() < 1e-12);
                assert!((s.characteristic_curvature(&z).unwrap() - inv).abs() < 1e-12);
                assert!(s.curvature_relation_residual(&z).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn frame_breakdown_when_seeds_run_out() {
        let s = sphere(1, 1.0);
        let z = [1.0, 0.0, 0.0, 0.0];
        // Both seeds lie in span{N, T}.
        let seeds = [DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0])];
        assert_eq!(s.adapted_frame_with_seeds(&z, &seeds), Err(Error::FrameBreakdown));
    }
}
