//! Built-in Hamiltonians whose level sets are spheres, cylinders and
//! ellipsoids, with samplers for points on the level set.

use std::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::Quadratic;
use crate::symplectic::PhasePoint;

#[derive(Debug, Clone, PartialEq)]
pub enum CatalogSurface {
    /// `H = (|x|² + |y|²)/2` in `R^{2n+2}`, level `R²/2`.
    Sphere { n: usize, radius: f64 },
    /// `H = |x|²/2` in `R² x R²`.
    Cylinder1 { radius: f64 },
    /// `H = (x₁² + y₁²)/2` in `R² x R²`.
    Cylinder2 { radius: f64 },
    /// `H = ½ Σ z_i² / a_i²`, level `½`.
    Ellipsoid { axes: Vec<f64> },
}

impl CatalogSurface {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidArgument(what));
        match self {
            Self::Sphere { n, radius } => {
                if *n == 0 {
                    return bad("sphere needs n >= 1".into());
                }
                positive(*radius)
            }
            Self::Cylinder1 { radius } | Self::Cylinder2 { radius } => positive(*radius),
            Self::Ellipsoid { axes } => {
                if axes.len() < 4 || axes.len() % 2 != 0 {
                    return bad(format!("ellipsoid needs an even number >= 4 of semi-axes, got {}", axes.len()));
                }
                axes.iter().try_for_each(|a| positive(*a))
            }
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Sphere { n, .. } => *n,
            Self::Cylinder1 { .. } | Self::Cylinder2 { .. } => 1,
            Self::Ellipsoid { axes } => axes.len() / 2 - 1,
        }
    }

    pub fn hamiltonian(&self) -> Quadratic {
        match self {
            Self::Sphere { n, .. } => Quadratic::diagonal(&vec![1.0; 2 * n + 2], 0.0),
            Self::Cylinder1 { .. } => Quadratic::diagonal(&[1.0, 1.0, 0.0, 0.0], 0.0),
            Self::Cylinder2 { .. } => Quadratic::diagonal(&[1.0, 0.0, 1.0, 0.0], 0.0),
            Self::Ellipsoid { axes } => {
                let w: Vec<_> = axes.iter().map(|a| 1.0 / (a * a)).collect();
                Quadratic::diagonal(&w, 0.0)
            }
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            Self::Sphere { radius, .. } | Self::Cylinder1 { radius } | Self::Cylinder2 { radius } => {
                0.5 * radius * radius
            }
            Self::Ellipsoid { .. } => 0.5,
        }
    }

    /// `H - E`, a defining function for the surface.
    pub fn defining_function(&self) -> Quadratic {
        let mut h = self.hamiltonian();
        h.constant = -self.energy();
        h
    }

    /// A deterministic point on the surface: `(R, 0, ..)` or `(a₁, 0, ..)`.
    pub fn base_point(&self) -> PhasePoint {
        let d = 2 * self.n() + 2;
        let mut z = vec![0.0; d];
        z[0] = match self {
            Self::Sphere { radius, .. } | Self::Cylinder1 { radius } | Self::Cylinder2 { radius } => *radius,
            Self::Ellipsoid { axes } => axes[0],
        };
        PhasePoint::new(z).expect("catalog dimensions are valid")
    }

    /// A random point on the surface. Unbounded directions of the cylinders
    /// are sampled in `[-2, 2]`.
    pub fn sample_point(&self, rng: &mut impl Rng) -> PhasePoint {
        let z = match self {
            Self::Sphere { n, radius } => scale_to(unit_direction(rng, 2 * n + 2), *radius),
            Self::Cylinder1 { radius } => {
                let theta = rng.random_range(0.0..TAU);
                vec![
                    radius * theta.cos(),
                    radius * theta.sin(),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ]
            }
            Self::Cylinder2 { radius } => {
                let theta = rng.random_range(0.0..TAU);
                vec![
                    radius * theta.cos(),
                    rng.random_range(-2.0..2.0),
                    radius * theta.sin(),
                    rng.random_range(-2.0..2.0),
                ]
            }
            Self::Ellipsoid { axes } => unit_direction(rng, axes.len())
                .into_iter()
                .zip(axes)
                .map(|(u, a)| u * a)
                .collect(),
        };
        PhasePoint::new(z).expect("catalog dimensions are valid")
    }

    /// Closed-form characteristic curvature where one exists.
    pub fn exact_characteristic_curvature(&self) -> Option<f64> {
        match self {
            Self::Sphere { radius, .. } | Self::Cylinder2 { radius } => Some(1.0 / radius),
            Self::Cylinder1 { .. } => Some(0.0),
            Self::Ellipsoid { .. } => None,
        }
    }
}

fn positive(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("expected a positive finite value, got {v}")))
    }
}

/// Uniformly distributed unit vector (rejection sampling from the cube).
pub fn unit_direction(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn scale_to(v: Vec<f64>, r: f64) -> Vec<f64> {
    v.into_iter().map(|c| c * r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_lie_on_their_surface() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let surfaces = [
            CatalogSurface::Sphere { n: 2, radius: 0.5 },
            CatalogSurface::Cylinder1 { radius: 1.5 },
            CatalogSurface::Cylinder2 { radius: 2.0 },
            CatalogSurface::Ellipsoid { axes: vec![1.0, 2.0, 0.5, 3.0] },
        ];
        for s in &surfaces {
            s.validate().unwrap();
            let f = s.defining_function();
            for _ in 0..20 {
                let z = s.sample_point(&mut rng);
                assert!(f.value(z.as_slice()).abs() < 1e-12, "{s:?}");
            }
            assert!(f.value(s.base_point().as_slice()).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(CatalogSurface::Sphere { n: 1, radius: -1.0 }.validate().is_err());
        assert!(CatalogSurface::Sphere { n: 0, radius: 1.0 }.validate().is_err());
        assert!(CatalogSurface::Ellipsoid { axes: vec![1.0; 3] }.validate().is_err());
        assert!(CatalogSurface::Cylinder1 { radius: f64::INFINITY }.validate().is_err());
    }
}
