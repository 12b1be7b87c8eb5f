//! Lattice discretization of bounded domains in `R³ = {(x, y, t)}`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::{Quadratic, ScalarField};
use crate::operator::GraphJet;

use super::sparse::{bicgstab, CsrBuilder};

/// Offsets of the 18 lattice neighbours used by the second-order stencils:
/// the 6 axis neighbours followed by the 12 in-plane diagonals.
pub(crate) const STENCIL: [[i64; 3]; 18] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [1, -1, 0],
    [-1, 1, 0],
    [-1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [-1, 0, 1],
    [-1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [0, -1, 1],
    [0, -1, -1],
];

/// A bounded domain `Ω ⊂ R³`.
#[derive(Clone)]
pub enum DomainSpec {
    Box {
        lower: [f64; 3],
        upper: [f64; 3],
    },
    Ball {
        center: [f64; 3],
        radius: f64,
    },
    /// `Ω = {ρ < 0}`, contained in the box `[lower, upper]`.
    Defining {
        rho: Arc<dyn ScalarField>,
        lower: [f64; 3],
        upper: [f64; 3],
    },
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Box { lower, upper } => f.debug_struct("Box").field("lower", lower).field("upper", upper).finish(),
            Self::Ball { center, radius } => {
                f.debug_struct("Ball").field("center", center).field("radius", radius).finish()
            }
            Self::Defining { lower, upper, .. } => {
                f.debug_struct("Defining").field("lower", lower).field("upper", upper).finish()
            }
        }
    }
}

impl DomainSpec {
    pub fn unit_box() -> Self {
        Self::Box {
            lower: [0.0; 3],
            upper: [1.0; 3],
        }
    }

    pub fn ball(center: [f64; 3], radius: f64) -> Self {
        Self::Ball { center, radius }
    }

    /// `{ Σ (x_i - c_i)² / a_i² < 1 }`, described by its defining function.
    pub fn ellipsoid(center: [f64; 3], axes: [f64; 3]) -> Self {
        let w: Vec<f64> = axes.iter().map(|a| 1.0 / (a * a)).collect();
        let m = DMatrix::from_diagonal(&DVector::from_vec(w.clone()));
        let lin = DVector::from_fn(3, |i, _| -w[i] * center[i]);
        let c: f64 = (0..3).map(|i| 0.5 * w[i] * center[i] * center[i]).sum::<f64>() - 0.5;
        Self::Defining {
            rho: Arc::new(Quadratic::new(m, lin, c)),
            lower: [center[0] - axes[0], center[1] - axes[1], center[2] - axes[2]],
            upper: [center[0] + axes[0], center[1] + axes[1], center[2] + axes[2]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        let ok = match self {
            Self::Box { lower, upper } | Self::Defining { lower, upper, .. } => {
                finite(lower) && finite(upper) && (0..3).all(|i| lower[i] < upper[i])
            }
            Self::Ball { center, radius } => finite(center) && *radius > 0.0 && radius.is_finite(),
        };
        if let Self::Defining { rho, .. } = self {
            if rho.dim() != 3 {
                return Err(Error::InvalidArgument("defining function must live on R^3".into()));
            }
        }
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate or unbounded domain {self:?}")))
        }
    }

    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            Self::Box { lower, upper } | Self::Defining { lower, upper, .. } => (*lower, *upper),
            Self::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            ),
        }
    }

    /// Strict membership in the open domain. Box faces within `slack` count as outside.
    pub fn contains(&self, x: &[f64; 3], slack: f64) -> bool {
        match self {
            Self::Box { lower, upper } => (0..3).all(|i| x[i] > lower[i] + slack && x[i] < upper[i] - slack),
            Self::Ball { center, radius } => {
                let r2: f64 = (0..3).map(|i| (x[i] - center[i]).powi(2)).sum();
                r2 < radius * radius
            }
            Self::Defining { rho, .. } => rho.value(x) < 0.0,
        }
    }

    /// A C² defining function, `(|x - c|² - R²)/2` for balls. Boxes have none.
    pub fn defining_function(&self) -> Option<Arc<dyn ScalarField>> {
        match self {
            Self::Box { .. } => None,
            Self::Ball { center, radius } => {
                let c = DVector::from_column_slice(center);
                let constant = 0.5 * (c.norm_squared() - radius * radius);
                Some(Arc::new(Quadratic::new(DMatrix::identity(3, 3), -c, constant)))
            }
            Self::Defining { rho, .. } => Some(rho.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Interior,
    Boundary,
    Exterior,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Interior => "interior",
            Self::Boundary => "boundary",
            Self::Exterior => "exterior",
        }
    }
}

/// Node values on an axis-aligned lattice with uniform spacing `h`.
///
/// Nodes strictly inside the domain are interior. Nodes outside it that are
/// reached by the 18-point stencil of an interior node are boundary nodes and
/// carry Dirichlet data; the rest are exterior and hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    origin: [f64; 3],
    h: f64,
    dims: [usize; 3],
    class: Vec<NodeClass>,
    values: Vec<f64>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    /// Largest `|∇φ|` over boundary nodes.
    pub data_gradient_max: f64,
}

impl GridField {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    pub fn ijk(&self, node: usize) -> [usize; 3] {
        let i = node % self.dims[0];
        let rest = node / self.dims[0];
        [i, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn coords(&self, node: usize) -> [f64; 3] {
        let ijk = self.ijk(node);
        [0, 1, 2].map(|a| self.origin[a] + ijk[a] as f64 * self.h)
    }

    pub fn class(&self, node: usize) -> NodeClass {
        self.class[node]
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Interior and boundary nodes in index order.
    pub fn active_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&n| self.class[n] != NodeClass::Exterior)
    }

    /// Overwrites interior values; boundary data is left untouched.
    pub fn set_interior_values(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.interior.len());
        for (&node, &v) in self.interior.iter().zip(values) {
            self.values[node] = v;
        }
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.interior.iter().map(|&n| self.values[n]).collect()
    }

    /// Replaces every active value by `f` at the node.
    pub fn fill_from(&mut self, f: impl Fn([f64; 3]) -> f64) {
        for node in 0..self.len() {
            if self.class[node] != NodeClass::Exterior {
                self.values[node] = f(self.coords(node));
            }
        }
    }

    pub(crate) fn offset(&self, node: usize, d: [i64; 3]) -> usize {
        let stride = [1, self.dims[0] as i64, (self.dims[0] * self.dims[1]) as i64];
        (node as i64 + d[0] * stride[0] + d[1] * stride[1] + d[2] * stride[2]) as usize
    }

    /// Central-difference gradient and Hessian at an interior node.
    pub(crate) fn stencil_jet(&self, node: usize) -> ([f64; 3], [[f64; 3]; 3]) {
        let h = self.h;
        let u = |d: [i64; 3]| self.values[self.offset(node, d)];
        let c = self.values[node];
        let mut p = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for a in 0..3 {
            let mut e = [0; 3];
            e[a] = 1;
            let plus = u(e);
            let minus = u(e.map(|v| -v));
            p[a] = (plus - minus) / (2.0 * h);
            hess[a][a] = (plus - 2.0 * c + minus) / (h * h);
            for b in 0..a {
                let at = |sa: i64, sb: i64| {
                    let mut d = [0; 3];
                    d[a] = sa;
                    d[b] = sb;
                    u(d)
                };
                let v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
                hess[a][b] = v;
                hess[b][a] = v;
            }
        }
        (p, hess)
    }

    /// Discrete gradient norm at an interior node.
    pub(crate) fn gradient_norm(&self, node: usize) -> f64 {
        let h2 = 2.0 * self.h;
        let mut sq = 0.0;
        for a in 0..3 {
            let mut e = [0; 3];
            e[a] = 1;
            let d = (self.values[self.offset(node, e)] - self.values[self.offset(node, e.map(|v| -v))]) / h2;
            sq += d * d;
        }
        sq.sqrt()
    }

    /// Whether any stencil neighbour of `node` is a boundary node.
    pub(crate) fn touches_boundary(&self, node: usize) -> bool {
        STENCIL
            .iter()
            .any(|&d| self.class[self.offset(node, d)] == NodeClass::Boundary)
    }
}

/// Second-order central-difference jet of the field at an interior node.
pub fn discrete_jet(grid: &GridField, node: usize) -> Result<GraphJet> {
    if node >= grid.len() || grid.class[node] != NodeClass::Interior {
        return Err(Error::NotInterior(node));
    }
    let (p, hess) = grid.stencil_jet(node);
    GraphJet::new(
        DVector::from_column_slice(&p),
        DMatrix::from_fn(3, 3, |i, j| hess[i][j]),
    )
}

/// Classifies the lattice, stores `φ` on boundary nodes and fills the interior
/// with the discrete harmonic extension of that data.
pub fn build_grid(domain: &DomainSpec, h: f64, phi: &(impl ScalarField + ?Sized)) -> Result<GridField> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
    }
    domain.validate()?;
    if phi.dim() != 3 {
        return Err(Error::Dimension {
            expected: "boundary data on R^3".into(),
            got: phi.dim(),
        });
    }
    let mut grid = classify(domain, h)?;
    let mut grad_max: f64 = 0.0;
    for &node in &grid.boundary {
        let x = grid.coords(node);
        grid.values[node] = phi.value(&x);
        grad_max = grad_max.max(phi.gradient(&x).norm());
    }
    grid.data_gradient_max = grad_max;
    harmonic_extension(&mut grid)?;
    Ok(grid)
}

fn classify(domain: &DomainSpec, h: f64) -> Result<GridField> {
    let (lower, upper) = domain.bounds();
    // Two extra layers keep every stencil of an interior node on the lattice.
    let (origin, dims) = match domain {
        DomainSpec::Ball { center, radius } => {
            let m = (radius / h).ceil() as usize;
            ([0, 1, 2].map(|a| center[a] - (m + 1) as f64 * h), [2 * m + 3; 3])
        }
        _ => {
            let dims = [0, 1, 2].map(|a| ((upper[a] - lower[a]) / h + 1e-9).floor() as usize + 3);
            ([0, 1, 2].map(|a| lower[a] - h), dims)
        }
    };
    let total = dims[0] * dims[1] * dims[2];
    if total > 50_000_000 {
        return Err(Error::InvalidArgument(format!("grid spacing {h} gives {total} lattice nodes")));
    }

    let mut grid = GridField {
        origin,
        h,
        dims,
        class: vec![NodeClass::Exterior; total],
        values: vec![f64::NAN; total],
        interior: Vec::new(),
        boundary: Vec::new(),
        data_gradient_max: 0.0,
    };
    let slack = 1e-9 * h;
    for node in 0..total {
        let ijk = grid.ijk(node);
        let on_rim = (0..3).any(|a| ijk[a] == 0 || ijk[a] + 1 == dims[a]);
        if !on_rim && domain.contains(&grid.coords(node), slack) {
            grid.class[node] = NodeClass::Interior;
        }
    }
    grid.interior = (0..total).filter(|&n| grid.class[n] == NodeClass::Interior).collect();
    if grid.interior.is_empty() {
        return Err(Error::NoInteriorNodes { h });
    }
    for i in 0..grid.interior.len() {
        let node = grid.interior[i];
        for d in STENCIL {
            let nb = grid.offset(node, d);
            if grid.class[nb] == NodeClass::Exterior {
                grid.class[nb] = NodeClass::Boundary;
            }
        }
    }
    grid.boundary = (0..total).filter(|&n| grid.class[n] == NodeClass::Boundary).collect();
    Ok(grid)
}

/// Solves the 7-point discrete Laplace equation for the interior values.
fn harmonic_extension(grid: &mut GridField) -> Result<()> {
    let unknown = unknown_map(grid);
    let n = grid.interior.len();
    let mut builder = CsrBuilder::with_capacity(n, 7 * n);
    let mut rhs = vec![0.0; n];
    for (row, &node) in grid.interior.iter().enumerate() {
        let mut entries = vec![(row, -6.0)];
        for d in &STENCIL[..6] {
            let nb = grid.offset(node, *d);
            match unknown[nb] {
                usize::MAX => rhs[row] -= grid.values[nb],
                col => entries.push((col, 1.0)),
            }
        }
        builder.push_row(entries);
    }
    let matrix = builder.build();
    // Mean of the boundary data as the starting guess.
    let mean = grid.boundary.iter().map(|&b| grid.values[b]).sum::<f64>() / grid.boundary.len() as f64;
    let mut x = vec![mean; n];
    bicgstab(&matrix, &rhs, &mut x, 1e-13, 10_000)?;
    grid.set_interior_values(&x);
    Ok(())
}

/// Maps lattice nodes to unknown indices; non-interior nodes map to `usize::MAX`.
pub(crate) fn unknown_map(grid: &GridField) -> Vec<usize> {
    let mut unknown = vec![usize::MAX; grid.len()];
    for (k, &node) in grid.interior.iter().enumerate() {
        unknown[node] = k;
    }
    unknown
}
