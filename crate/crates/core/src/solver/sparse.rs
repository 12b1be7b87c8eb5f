//! Compressed sparse rows, ILU(0) and preconditioned BiCGSTAB.
//!
//! The frozen-coefficient systems are non-symmetric and, because of the
//! cross-derivative stencil, not M-matrices, so only a general Krylov method
//! is used here.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Row-by-row builder. Duplicate columns within a row are summed.
#[derive(Debug, Default)]
pub struct CsrBuilder {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrBuilder {
    pub fn with_capacity(rows: usize, nnz: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(rows + 1);
        row_ptr.push(0);
        Self {
            row_ptr,
            cols: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        }
    }

    pub fn push_row(&mut self, mut entries: Vec<(usize, f64)>) {
        entries.sort_unstable_by_key(|e| e.0);
        let mut last = usize::MAX;
        for (c, v) in entries {
            if c == last {
                *self.vals.last_mut().expect("previous entry") += v;
            } else {
                self.cols.push(c);
                self.vals.push(v);
                last = c;
            }
        }
        self.row_ptr.push(self.cols.len());
    }

    pub fn build(self) -> CsrMatrix {
        CsrMatrix {
            n: self.row_ptr.len() - 1,
            row_ptr: self.row_ptr,
            cols: self.cols,
            vals: self.vals,
        }
    }
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[range.clone()]
                .iter()
                .zip(&self.vals[range])
                .map(|(&c, &v)| v * x[c])
                .sum();
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.cols[k] == i {
                    *d = k;
                }
            }
            if *d == usize::MAX {
                return Err(Error::LinearSolve(format!("row {i} has no diagonal entry")));
            }
        }
        let mut position = vec![usize::MAX; n];
        for i in 0..n {
            let range = lu.row_ptr[i]..lu.row_ptr[i + 1];
            for k in range.clone() {
                position[lu.cols[k]] = k;
            }
            for k in range.clone() {
                let col = lu.cols[k];
                if col >= i {
                    break;
                }
                let pivot = lu.vals[diag[col]];
                if pivot == 0.0 {
                    return Err(Error::LinearSolve(format!("zero pivot in row {col}")));
                }
                let factor = lu.vals[k] / pivot;
                lu.vals[k] = factor;
                for kk in diag[col] + 1..lu.row_ptr[col + 1] {
                    let p = position[lu.cols[kk]];
                    if p != usize::MAX {
                        lu.vals[p] -= factor * lu.vals[kk];
                    }
                }
            }
            for k in range {
                position[lu.cols[k]] = usize::MAX;
            }
            if lu.vals[diag[i]] == 0.0 || !lu.vals[diag[i]].is_finite() {
                return Err(Error::LinearSolve(format!("singular incomplete factor at row {i}")));
            }
        }
        Ok(Self { lu, diag })
    }

    /// Solves `LU x = b` in place.
    pub fn apply(&self, x: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = x[i];
            for k in lu.row_ptr[i]..self.diag[i] {
                s -= lu.vals[k] * x[lu.cols[k]];
            }
            x[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.vals[k] * x[lu.cols[k]];
            }
            x[i] = s / lu.vals[self.diag[i]];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// ILU(0)-preconditioned BiCGSTAB. `x` holds the initial guess on entry and
/// the solution on exit. Converged when `|b - Ax| <= tol |b|`.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<SolveStats> {
    let n = a.n;
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let precond = Ilu0::new(a)?;
    let target = tol * b_norm;

    let mut r = vec![0.0; n];
    let residual = |x: &[f64], r: &mut [f64]| {
        a.mul_into(x, r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
    };
    residual(x, &mut r);
    let mut r_norm = norm(&r);
    if r_norm <= target {
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: r_norm / b_norm,
        });
    }

    let mut shadow = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];

    for it in 1..=max_iter {
        let rho_new = dot(&shadow, &r);
        if rho_new.abs() < 1e-300 || omega == 0.0 {
            // Breakdown: restart from the true residual.
            residual(x, &mut r);
            shadow.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        y.copy_from_slice(&p);
        precond.apply(&mut y);
        a.mul_into(&y, &mut v);
        let denom = dot(&shadow, &v);
        if denom == 0.0 {
            return Err(Error::LinearSolve(format!("BiCGSTAB breakdown at iteration {it}")));
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= target {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            residual(x, &mut r);
            r_norm = norm(&r);
            if r_norm <= target {
                return Ok(SolveStats {
                    iterations: it,
                    relative_residual: r_norm / b_norm,
                });
            }
            continue;
        }
        z.copy_from_slice(&s);
        precond.apply(&mut z);
        a.mul_into(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        r_norm = norm(&r);
        if !r_norm.is_finite() {
            return Err(Error::LinearSolve(format!("non-finite residual at iteration {it}")));
        }
        if r_norm <= target {
            // Guard against drift between the recursive and true residual.
            residual(x, &mut r);
            r_norm = norm(&r);
            if r_norm <= target {
                return Ok(SolveStats {
                    iterations: it,
                    relative_residual: r_norm / b_norm,
                });
            }
        }
    }
    Err(Error::LinearSolve(format!(
        "BiCGSTAB did not reach {tol:e} in {max_iter} iterations (relative residual {:e})",
        r_norm / b_norm
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn random_system(n: usize) -> (CsrMatrix, DMatrix<f64>) {
        // Non-symmetric, diagonally weighted tridiagonal-plus-corner pattern.
        let mut dense = DMatrix::zeros(n, n);
        let mut b = CsrBuilder::with_capacity(n, 4 * n);
        for i in 0..n {
            let mut row = vec![(i, 4.0 + (i % 3) as f64)];
            if i > 0 {
                row.push((i - 1, -1.5));
            }
            if i + 1 < n {
                row.push((i + 1, -0.5 + 0.1 * (i % 5) as f64));
            }
            if i >= 7 {
                row.push((i - 7, 0.75));
            }
            for &(c, v) in &row {
                dense[(i, c)] += v;
            }
            b.push_row(row);
        }
        (b.build(), dense)
    }

    #[test]
    fn matvec_matches_dense() {
        let (a, dense) = random_system(40);
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut y = vec![0.0; 40];
        a.mul_into(&x, &mut y);
        let expected = &dense * DVector::from_vec(x);
        assert!((DVector::from_vec(y) - expected).amax() < 1e-13);
        assert_eq!(a.get(3, 2), -1.5);
        assert_eq!(a.get(3, 30), 0.0);
    }

    #[test]
    fn bicgstab_solves_nonsymmetric_system() {
        let (a, dense) = random_system(200);
        let truth = DVector::from_fn(200, |i, _| (i as f64).cos());
        let b = &dense * &truth;
        let mut x = vec![0.0; 200];
        let stats = bicgstab(&a, b.as_slice(), &mut x, 1e-13, 500).unwrap();
        assert!(stats.relative_residual <= 1e-13);
        assert!((DVector::from_vec(x) - truth).amax() < 1e-10);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let (a, _) = random_system(10);
        let mut x = vec![1.0; 10];
        bicgstab(&a, &[0.0; 10], &mut x, 1e-12, 10).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let mut b = CsrBuilder::with_capacity(1, 3);
        b.push_row(vec![(0, 1.0), (0, 2.0)]);
        assert_eq!(b.build().get(0, 0), 3.0);
    }

    #[test]
    fn missing_diagonal_is_reported() {
        let mut b = CsrBuilder::with_capacity(2, 2);
        b.push_row(vec![(1, 1.0)]);
        b.push_row(vec![(0, 1.0)]);
        assert!(matches!(Ilu0::new(&b.build()), Err(Error::LinearSolve(_))));
    }
}
