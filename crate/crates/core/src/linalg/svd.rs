//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations,
//! and the operations built on it.
//!
//! One-sided Jacobi computes small singular values to high relative
//! accuracy, which matters here: the pseudo-inverse norm is `1/σ_min`.

use crate::linalg::Matrix;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U·diag(σ)·Vᵀ` with `k = min(rows, cols)` singular values in
/// descending order. Columns of `U` belonging to zero singular values are
/// zero rather than completed to an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub singular_values: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn sigma_max(&self) -> T {
        self.singular_values.first().copied().unwrap_or_else(T::zero)
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: T) -> usize {
        let cutoff = rel_tol * self.sigma_max();
        self.singular_values
            .iter()
            .filter(|&&s| s > cutoff && s > T::zero())
            .count()
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        let us = Matrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u[(i, j)] * self.singular_values[j]
        });
        &us * &self.v.transpose()
    }
}

/// Default relative rank tolerance: `max(rows, cols)·ε`.
pub fn default_rank_tol<T: Scalar>(m: &Matrix<T>) -> T {
    T::lit(m.rows().max(m.cols()) as f64) * T::epsilon()
}

pub fn svd<T: Scalar>(m: &Matrix<T>) -> Svd<T> {
    if m.rows() < m.cols() {
        let t = svd_tall(&m.transpose());
        return Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        };
    }
    svd_tall(m)
}

fn svd_tall<T: Scalar>(m: &Matrix<T>) -> Svd<T> {
    let (rows, cols) = m.shape();
    // Work column-major: each column of the evolving U is contiguous.
    let mut u: Vec<Vec<T>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<T>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let (alpha, beta, gamma) = (0..rows).fold(
                    (T::zero(), T::zero(), T::zero()),
                    |(a, b, g), k| {
                        let x = u[i][k];
                        let y = u[j][k];
                        (a + x * x, b + y * y, g + x * y)
                    },
                );
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut triples: Vec<(T, Vec<T>, Vec<T>)> = u
        .into_iter()
        .zip(v)
        .map(|(col, vcol)| {
            let sigma = col.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
            let ucol = if sigma > T::zero() {
                col.iter().map(|&x| x / sigma).collect()
            } else {
                vec![T::zero(); col.len()]
            };
            (sigma, ucol, vcol)
        })
        .collect();
    triples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    let k = triples.len();
    let mut uo = Matrix::zeros(rows, k);
    let mut vo = Matrix::zeros(cols, k);
    let mut sv = Vec::with_capacity(k);
    for (j, (s, uc, vc)) in triples.into_iter().enumerate() {
        sv.push(s);
        for i in 0..rows {
            uo[(i, j)] = uc[i];
        }
        for i in 0..cols {
            vo[(i, j)] = vc[i];
        }
    }
    Svd {
        u: uo,
        singular_values: sv,
        v: vo,
    }
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(j);
    let ci = &mut left[i];
    let cj = &mut right[0];
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

pub fn singular_values<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    svd(m).singular_values
}

/// Largest singular value `σ_max(M)`.
pub fn spectral_norm<T: Scalar>(m: &Matrix<T>) -> T {
    svd(m).sigma_max()
}

/// Moore–Penrose pseudo-inverse. Singular values at or below
/// `rank_tol·σ_max` are treated as zero; `None` selects
/// [`default_rank_tol`]. The zero matrix maps to the zero matrix of
/// transposed shape.
pub fn pseudo_inverse<T: Scalar>(m: &Matrix<T>, rank_tol: Option<T>) -> Matrix<T> {
    pseudo_inverse_from(&svd(m), rank_tol.unwrap_or_else(|| default_rank_tol(m)))
}

pub(crate) fn pseudo_inverse_from<T: Scalar>(d: &Svd<T>, rank_tol: T) -> Matrix<T> {
    let r = d.rank(rank_tol);
    let (rows, cols) = (d.u.rows(), d.v.rows());
    let mut out = Matrix::zeros(cols, rows);
    for k in 0..r {
        let inv = T::one() / d.singular_values[k];
        for i in 0..cols {
            let vik = d.v[(i, k)] * inv;
            for j in 0..rows {
                out[(i, j)] += vik * d.u[(j, k)];
            }
        }
    }
    out
}

/// Norm of the pseudo-inverse, `1/σ_min` over the nonzero singular values;
/// zero for the zero matrix.
pub fn pseudo_inverse_norm<T: Scalar>(m: &Matrix<T>, rank_tol: Option<T>) -> T {
    let d = svd(m);
    let r = d.rank(rank_tol.unwrap_or_else(|| default_rank_tol(m)));
    if r == 0 {
        T::zero()
    } else {
        T::one() / d.singular_values[r - 1]
    }
}

/// Minimum-spectral-norm solution of `A·X·A = A`, which is `X = A†`.
///
/// Every feasible `X` satisfies `‖X‖ ≥ ‖A†‖`: for a unit `y` in the range of
/// `A`, `x = Xy` solves `Ax = y`, and the least-norm such `x` is `A†y`.
pub fn min_norm_interpolant<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    pseudo_inverse(a, None)
}

/// Numerical rank with the default tolerance.
pub fn rank<T: Scalar>(m: &Matrix<T>) -> usize {
    svd(m).rank(default_rank_tol(m))
}
