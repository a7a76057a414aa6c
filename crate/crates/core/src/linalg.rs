//! Compressed-row sparse matrices and a Jacobi-preconditioned conjugate
//! gradient solver for symmetric positive definite systems.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry ({row}, {col}) is outside a {dim}x{dim} matrix")]
    OutOfBounds { row: usize, col: usize, dim: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("diagonal entry {row} is not positive ({value}); Jacobi preconditioning needs an SPD matrix")]
    NonPositiveDiagonal { row: usize, value: f64 },
}

/// Square sparse matrix in compressed-row form.
///
/// Both triangles are stored. Column indices are strictly increasing within
/// each row and every diagonal entry is present (possibly as an explicit 0).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    ///
    /// Duplicates are summed in the order they appear, so if the triplet list
    /// is generated symmetrically (every `(i, j, v)` matched by `(j, i, v)` at
    /// the same position in the sequence of contributions) the resulting
    /// matrix is bit-for-bit symmetric.
    pub fn from_triplets(
        dim: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        let mut counts = vec![0usize; dim + 1];
        for &(row, col, _) in triplets {
            if row >= dim || col >= dim {
                return Err(LinalgError::OutOfBounds { row, col, dim });
            }
            counts[row + 1] += 1;
        }
        // bucket by row, keeping insertion order (counting sort is stable)
        for r in 0..dim {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut bucketed = vec![(0usize, 0.0f64); triplets.len()];
        for &(row, col, value) in triplets {
            bucketed[next[row]] = (col, value);
            next[row] += 1;
        }

        let mut row_offsets = Vec::with_capacity(dim + 1);
        let mut col_indices = Vec::with_capacity(triplets.len() / 2 + dim);
        let mut values = Vec::with_capacity(triplets.len() / 2 + dim);
        row_offsets.push(0);
        let mut row_entries: Vec<(usize, f64)> = Vec::new();
        for r in 0..dim {
            row_entries.clear();
            row_entries.extend_from_slice(&bucketed[counts[r]..counts[r + 1]]);
            row_entries.push((r, 0.0));
            row_entries.sort_by_key(|&(c, _)| c);
            let mut iter = row_entries.iter().peekable();
            while let Some(&(c, v)) = iter.next() {
                let mut sum = v;
                while let Some(&&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    sum += v2;
                    iter.next();
                }
                col_indices.push(c);
                values.push(sum);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            dim,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_offsets: (0..=dim).collect(),
            col_indices: (0..dim).collect(),
            values: vec![1.0; dim],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            dim: diag.len(),
            row_offsets: (0..=diag.len()).collect(),
            col_indices: (0..diag.len()).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Stored value at `(row, col)`, or 0 when the entry is structurally absent.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (cols, vals) = self.row(row);
        match cols.binary_search(&col) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// Row-major dense copy, for tests and small debugging dumps.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.dim]; self.dim];
        for (r, row) in dense.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        dense
    }

    /// True when every stored `(i, j)` has a bit-identical `(j, i)`.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|r| {
            let (cols, vals) = self.row(r);
            cols.iter()
                .zip(vals)
                .all(|(&c, &v)| self.get(c, r).to_bits() == v.to_bits())
        })
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut y = vec![0.0; self.dim];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), LinalgError> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            *out = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<(), LinalgError> {
        if len != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }
}

/// Stopping parameters for [`cg_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual target `||Ax - b|| / ||b||`.
    pub tol: f64,
    /// Iteration cap; `None` means `20 * dim`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// True relative residual of the returned iterate, recomputed from `b - Ax`.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` for SPD `A`. Non-convergence is reported through
/// [`SolveReport::converged`], not as an error.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    options: &CgOptions,
) -> Result<(Vec<f64>, SolveReport), LinalgError> {
    cg_solve_observed(a, b, options, |_, _| {})
}

/// Same as [`cg_solve`], calling `observer(iteration, x)` after every update.
pub fn cg_solve_observed<F>(
    a: &CsrMatrix,
    b: &[f64],
    options: &CgOptions,
    mut observer: F,
) -> Result<(Vec<f64>, SolveReport), LinalgError>
where
    F: FnMut(usize, &[f64]),
{
    let n = a.dim();
    a.check_len(b.len())?;
    if !(options.tol > 0.0) {
        return Err(LinalgError::InvalidTolerance(options.tol));
    }
    let max_iter = options.max_iter.unwrap_or(20 * n.max(1));
    let inv_diag = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(LinalgError::NonPositiveDiagonal { row, value: d })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let target = options.tol * b_norm;

    // The recurrence residual drifts from the true one; once it claims
    // convergence the true residual is recomputed and CG restarted if needed.
    let mut restarts = 0;
    loop {
        if norm2(&r) <= target {
            a.spmv_into(&x, &mut ap)?;
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            if norm2(&r) <= target || restarts >= 3 {
                break;
            }
            restarts += 1;
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
        }
        if iterations >= max_iter {
            break;
        }
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        iterations += 1;
        observer(iterations, &x);
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    a.spmv_into(&x, &mut ap)?;
    let residual: f64 = libm::sqrt(
        b.iter()
            .zip(&ap)
            .map(|(bi, ai)| (bi - ai) * (bi - ai))
            .sum::<f64>(),
    );
    let relative_residual = residual / b_norm;
    Ok((
        x,
        SolveReport {
            iterations,
            relative_residual,
            converged: relative_residual <= options.tol,
        },
    ))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}
