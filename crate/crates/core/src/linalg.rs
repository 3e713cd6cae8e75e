//! Dense kernels: Gram submatrices, cyclic Jacobi eigendecomposition and an
//! orthonormal null-space basis.
//!
//! Support sizes stay small (at most a few dozen columns), so everything here
//! is plain dense arithmetic on `nalgebra` matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal Frobenius mass, relative to `||M||_F`, at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative asymmetry tolerated on input to [`jacobi_symmetric_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative singular-value threshold below which a direction counts as null.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymEigen {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Columns are unit eigenvectors aligned with `eigenvalues`.
    #[serde(skip)]
    pub eigenvectors: Option<DMatrix<f64>>,
    pub sweeps: usize,
}

impl SymEigen {
    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

/// `G[a][b] = <X_{E[a]}, X_{E[b]}>` for the columns listed in `support`.
pub fn gram_submatrix(a: &DMatrix<f64>, support: &[usize]) -> Result<DMatrix<f64>> {
    if support.is_empty() {
        return Err(Error::param("support must be nonempty"));
    }
    if let Some(&bad) = support.iter().find(|&&i| i >= a.ncols()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: a.ncols(),
        });
    }
    let k = support.len();
    let mut g = DMatrix::zeros(k, k);
    for (p, &i) in support.iter().enumerate() {
        for (q, &j) in support.iter().enumerate().skip(p) {
            let v = a.column(i).dot(&a.column(j));
            g[(p, q)] = v;
            g[(q, p)] = v;
        }
    }
    Ok(g)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn jacobi_symmetric_eigen(m: &DMatrix<f64>, with_vectors: bool) -> Result<SymEigen> {
    let k = m.nrows();
    if k != m.ncols() || k == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let fro = m.norm();
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOL * fro.max(f64::MIN_POSITIVE) {
        return Err(Error::param(format!("matrix is not symmetric (asymmetry {asym:e})")));
    }
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = with_vectors.then(|| DMatrix::<f64>::identity(k, k));

    let off = |a: &DMatrix<f64>| {
        let mut s = 0.0;
        for p in 0..k {
            for q in 0..k {
                if p != q {
                    s += a[(p, q)] * a[(p, q)];
                }
            }
        }
        s.sqrt()
    };

    let target = JACOBI_TOL * fro;
    let mut sweeps = 0;
    let mut residual = off(&a);
    while residual > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Convergence {
                sweeps,
                off_diagonal: residual,
            });
        }
        sweeps += 1;
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..k {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = c * arp - s * arq;
                    a[(r, q)] = s * arp + c * arq;
                }
                for r in 0..k {
                    let apr = a[(p, r)];
                    let aqr = a[(q, r)];
                    a[(p, r)] = c * apr - s * aqr;
                    a[(q, r)] = s * apr + c * aqr;
                }
                if let Some(v) = v.as_mut() {
                    for r in 0..k {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
        residual = off(&a);
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = v.map(|v| DMatrix::from_fn(k, k, |r, c| v[(r, order[c])]));
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// Spectral norm of a symmetric matrix, `max |lambda|`.
pub fn operator_norm_sym(m: &DMatrix<f64>) -> Result<f64> {
    let eig = jacobi_symmetric_eigen(m, false)?;
    Ok(eig.max().abs().max(eig.min().abs()))
}

/// Largest singular value of a dense matrix.
pub fn largest_singular_value(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let small = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    Ok(jacobi_symmetric_eigen(&small, false)?.max().max(0.0).sqrt())
}

#[derive(Debug, Clone)]
pub struct NullspaceBasis {
    /// Orthonormal vectors spanning `ker(A)`.
    pub vectors: Vec<DVector<f64>>,
    pub rank: usize,
    /// Set when a pivot lies within two decades of the rank threshold.
    pub near_threshold: bool,
}

impl NullspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Basis as the columns of an `N x dim` matrix.
    pub fn as_matrix(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, self.vectors.len(), |r, c| self.vectors[c][r])
    }
}

/// Orthonormal basis of `ker(A)` from a column-pivoted Householder QR of `A^T`.
///
/// With `A^T P = Q R`, the columns of `Q` past the numerical rank span the
/// orthogonal complement of the row space, which is the kernel. The rank counts
/// pivots `|R_kk| > RANK_TOL * sigma_max(A)`.
pub fn nullspace_basis(a: &DMatrix<f64>) -> Result<NullspaceBasis> {
    let n_cols = a.ncols();
    let mut x = a.transpose();
    let steps = x.nrows().min(x.ncols());
    let sigma_max = largest_singular_value(a)?;
    let threshold = RANK_TOL * sigma_max;

    let mut reflectors: Vec<Option<DVector<f64>>> = Vec::with_capacity(steps);
    let mut pivots = Vec::with_capacity(steps);
    for k in 0..steps {
        let (best, best_norm) = (k..x.ncols())
            .map(|j| (j, x.view((k, j), (n_cols - k, 1)).norm()))
            .fold((k, -1.0), |acc, (j, nrm)| if nrm > acc.1 { (j, nrm) } else { acc });
        x.swap_columns(k, best);
        if best_norm == 0.0 {
            reflectors.push(None);
            pivots.push(0.0);
            continue;
        }
        let col = x.view((k, k), (n_cols - k, 1)).clone_owned();
        let alpha = if col[0] >= 0.0 { -best_norm } else { best_norm };
        let mut v = DVector::from_column_slice(col.as_slice());
        v[0] -= alpha;
        let vn = v.norm();
        if vn == 0.0 {
            reflectors.push(None);
            pivots.push(col[0]);
            continue;
        }
        v /= vn;
        let mut block = x.view_mut((k, k), (n_cols - k, x.ncols() - k));
        let proj = v.transpose() * &block;
        block -= &v * proj * 2.0;
        pivots.push(x[(k, k)]);
        reflectors.push(Some(v));
    }

    let rank = pivots.iter().filter(|p| p.abs() > threshold).count();
    let near_threshold = pivots
        .iter()
        .any(|p| p.abs() > threshold * 1e-2 && p.abs() < threshold * 1e2);

    let mut q = DMatrix::<f64>::identity(n_cols, n_cols);
    for (k, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            let mut block = q.view_mut((k, 0), (n_cols - k, n_cols));
            let proj = v.transpose() * &block;
            block -= v * proj * 2.0;
        }
    }
    let vectors = (rank..n_cols).map(|c| q.column(c).clone_owned()).collect();
    Ok(NullspaceBasis {
        vectors,
        rank,
        near_threshold,
    })
}
