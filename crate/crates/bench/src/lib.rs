//! Fixtures shared by the benchmarks.

use charcurv_core::solver::{build_grid, hemisphere, DomainSpec, GridField};
use charcurv_core::{CatalogSurface, GraphJet, PhasePoint, ScalarField};

/// Unit ball at spacing `h` with hemisphere data of radius 2.
pub fn hemisphere_grid(h: f64) -> GridField {
    build_grid(&DomainSpec::ball([0.0; 3], 1.0), h, &hemisphere([0.0; 3], 2.0)).expect("valid grid")
}

/// Points spread over the unit sphere in `R^{2n+2}`.
pub fn sphere_points(n: usize, count: usize) -> Vec<PhasePoint> {
    let d = 2 * n + 2;
    (0..count)
        .map(|i| {
            let mut z: Vec<f64> = (0..d).map(|j| ((i * d + j) as f64 * 0.618_033_988_75).sin()).collect();
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            z.iter_mut().for_each(|v| *v /= norm);
            PhasePoint::new(z).expect("even dimension")
        })
        .collect()
}

pub fn sphere(n: usize) -> CatalogSurface {
    CatalogSurface::Sphere { n, radius: 1.0 }
}

/// Jets of the radius-2 hemisphere at a few interior points.
pub fn hemisphere_jets() -> Vec<GraphJet> {
    let hemi = hemisphere([0.0; 3], 2.0);
    [[0.0, 0.0, 0.0], [0.5, -0.3, 0.2], [1.2, 0.4, -0.9], [-1.5, 0.1, 0.6]]
        .iter()
        .map(|x| GraphJet::new(hemi.gradient(x), hemi.hessian(x)).expect("symmetric"))
        .collect()
}
