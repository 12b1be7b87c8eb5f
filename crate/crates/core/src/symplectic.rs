//! Symplectic linear algebra on `R^{n+1} x R^{n+1}`, Hamiltonian vector
//! fields, and the characteristic curvature of isoenergetic surfaces.
//!
//! Coordinates are ordered `z = (x_1, .., x_{n+1}, y_1, .., y_{n+1})` and the
//! canonical structure acts as `J(x, y) = (y, -x)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::field::ScalarField;

/// Gradients with norm at or below this are treated as critical.
pub const DEFAULT_CRITICAL_TOL: f64 = 1e-10;

/// A point of phase space `R^{2n+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    coords: DVector<f64>,
    n: usize,
}

impl PhasePoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords: Vec<f64> = coords.into();
        let n = phase_n(coords.len())?;
        Ok(Self {
            coords: DVector::from_vec(coords),
            n,
        })
    }

    pub fn from_xy(x: &[f64], y: &[f64]) -> Result<Self> {
        check_len(y.len(), x.len())?;
        Self::new([x, y].concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn x(&self) -> &[f64] {
        &self.coords.as_slice()[..=self.n]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords.as_slice()[self.n + 1..]
    }
}

/// Returns `n` for a phase space of dimension `len = 2n + 2`.
fn phase_n(len: usize) -> Result<usize> {
    if len >= 4 && len.is_multiple_of(2) {
        Ok(len / 2 - 1)
    } else {
        Err(Error::Dimension {
            expected: "an even length >= 4".into(),
            got: len,
        })
    }
}

/// `J v` for `v = (x, y)`.
pub fn apply_j(v: &[f64]) -> Result<DVector<f64>> {
    phase_n(v.len())?;
    let half = v.len() / 2;
    Ok(DVector::from_fn(v.len(), |i, _| {
        if i < half {
            v[i + half]
        } else {
            -v[i - half]
        }
    }))
}

/// The canonical symplectic matrix as a dense matrix.
pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let half = n + 1;
    let mut j = DMatrix::zeros(2 * half, 2 * half);
    for k in 0..half {
        j[(k, k + half)] = 1.0;
        j[(k + half, k)] = -1.0;
    }
    j
}

/// Liouville form `λ_z(v) = ½ <J z, v>`.
pub fn liouville_form(z: &PhasePoint, v: &[f64]) -> Result<f64> {
    check_len(v.len(), z.coords.len())?;
    let jz = apply_j(z.as_slice())?;
    Ok(0.5 * jz.as_slice().iter().zip(v).map(|(a, b)| a * b).sum::<f64>())
}

/// `ω(v, u) = <J v, u>`, so that `ω(v, J u) = <v, u>`.
pub fn symplectic_form(v: &[f64], u: &[f64]) -> Result<f64> {
    check_len(u.len(), v.len())?;
    let jv = apply_j(v)?;
    Ok(jv.as_slice().iter().zip(u).map(|(a, b)| a * b).sum())
}

fn check_field(h: &(impl ScalarField + ?Sized), z: &PhasePoint) -> Result<()> {
    check_len(z.coords.len(), h.dim())
}

/// `X^H(z) = J ∇H(z)`.
pub fn hamiltonian_vector_field(h: &(impl ScalarField + ?Sized), z: &PhasePoint) -> Result<DVector<f64>> {
    check_field(h, z)?;
    apply_j(h.gradient(z.as_slice()).as_slice())
}

/// Characteristic curvature of the level set of `h` through `z`:
/// `<D²H J∇H, J∇H> / |∇H|³`.
pub fn characteristic_curvature_levelset(
    h: &(impl ScalarField + ?Sized),
    z: &PhasePoint,
    critical_tol: f64,
) -> Result<f64> {
    check_field(h, z)?;
    let grad = h.gradient(z.as_slice());
    let norm = grad.norm();
    if !(norm > critical_tol) {
        return Err(Error::CriticalPoint {
            norm,
            tol: critical_tol,
        });
    }
    let xh = apply_j(grad.as_slice())?;
    let hess = h.hessian(z.as_slice());
    Ok((&hess * &xh).dot(&xh) / norm.powi(3))
}

/// Curvature of a characteristic curve from its velocity and acceleration,
/// `<γ̈, Jγ̇> / |γ̇|³`.
pub fn curvature_from_motion(velocity: &[f64], acceleration: &[f64]) -> Result<f64> {
    check_len(acceleration.len(), velocity.len())?;
    let jv = apply_j(velocity)?;
    let speed = jv.norm();
    Ok(jv.as_slice().iter().zip(acceleration).map(|(a, b)| a * b).sum::<f64>() / speed.powi(3))
}

/// A sampled solution of the Hamilton system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    /// `H` at the initial state.
    pub energy: f64,
    /// Largest `|H(state) - energy|` seen along the trajectory.
    pub max_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub critical_tol: f64,
    /// Defaults to `1e-6 * max(1, |E|)` when `None`.
    pub drift_tol: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            critical_tol: DEFAULT_CRITICAL_TOL,
            drift_tol: None,
        }
    }
}

/// Integrates `ż = J∇H(z)` with the classical fourth-order Runge-Kutta
/// scheme on a uniform step no larger than `dt`, ending exactly at `t_end`.
pub fn integrate_characteristic_curve(
    h: &(impl ScalarField + ?Sized),
    z0: &PhasePoint,
    t_end: f64,
    dt: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_end > 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    check_field(h, z0)?;
    let norm = h.gradient(z0.as_slice()).norm();
    if !(norm > config.critical_tol) {
        return Err(Error::CriticalPoint {
            norm,
            tol: config.critical_tol,
        });
    }

    let energy = h.value(z0.as_slice());
    let drift_tol = config.drift_tol.unwrap_or(1e-6 * energy.abs().max(1.0));
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let step = t_end / steps as f64;
    let rhs = |z: &DVector<f64>| -> DVector<f64> {
        apply_j(h.gradient(z.as_slice()).as_slice()).expect("dimension checked above")
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(z0.clone());
    let mut z = z0.coords.clone();
    let mut max_drift: f64 = 0.0;
    for s in 1..=steps {
        let k1 = rhs(&z);
        let k2 = rhs(&(&z + &k1 * (0.5 * step)));
        let k3 = rhs(&(&z + &k2 * (0.5 * step)));
        let k4 = rhs(&(&z + &k3 * step));
        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (step / 6.0);

        let drift = (h.value(z.as_slice()) - energy).abs();
        max_drift = max_drift.max(drift);
        if !(drift <= drift_tol) {
            return Err(Error::EnergyDrift {
                step: s,
                drift,
                tol: drift_tol,
            });
        }
        times.push(s as f64 * step);
        states.push(PhasePoint {
            coords: z.clone(),
            n: z0.n,
        });
    }
    Ok(Trajectory {
        times,
        states,
        energy,
        max_drift,
    })
}

/// Characteristic curvature at every state of `traj`, using the exact
/// acceleration `γ̈ = J D²H γ̇` rather than differencing states.
pub fn curvature_along_curve(
    h: &(impl ScalarField + ?Sized),
    traj: &Trajectory,
    critical_tol: f64,
) -> Result<Vec<f64>> {
    traj.states
        .iter()
        .map(|z| {
            check_field(h, z)?;
            let grad = h.gradient(z.as_slice());
            let norm = grad.norm();
            if !(norm > critical_tol) {
                return Err(Error::CriticalPoint {
                    norm,
                    tol: critical_tol,
                });
            }
            let velocity = apply_j(grad.as_slice())?;
            let acceleration = apply_j((h.hessian(z.as_slice()) * &velocity).as_slice())?;
            curvature_from_motion(velocity.as_slice(), acceleration.as_slice())
        })
        .collect()
}
