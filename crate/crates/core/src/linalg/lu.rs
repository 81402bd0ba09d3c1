use num_complex::Complex;
use num_traits::{Num, NumAssign};

use crate::linalg::{LinalgError, Matrix};
use crate::scalar::Scalar;

/// Entry type an LU factorization can pivot on.
pub(crate) trait PivotEntry<T: Scalar>: Copy + Num + NumAssign + std::ops::Neg<Output = Self> {
    fn magnitude(self) -> T;
}

impl<T: Scalar> PivotEntry<T> for T {
    #[inline]
    fn magnitude(self) -> T {
        self.abs()
    }
}

impl<T: Scalar> PivotEntry<T> for Complex<T> {
    #[inline]
    fn magnitude(self) -> T {
        self.norm()
    }
}

/// LU factors with partial pivoting, stored in place (unit lower + upper).
pub(crate) struct Lu<E> {
    n: usize,
    lu: Vec<E>,
    perm: Vec<usize>,
    odd: bool,
}

impl<E> Lu<E> {
    /// Factors the row-major `n×n` matrix `a`. A pivot smaller than
    /// `n·ε·max|a|` is treated as exact singularity.
    pub(crate) fn factor<T: Scalar>(n: usize, mut a: Vec<E>) -> Result<Self, LinalgError>
    where
        E: PivotEntry<T>,
    {
        debug_assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(T::zero(), |m, x| m.max(x.magnitude()));
        let threshold = T::epsilon() * T::lit(n.max(1) as f64) * scale;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, a[i * n + k].magnitude()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || pmag == T::zero() {
                return Err(LinalgError::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                if f == E::zero() {
                    continue;
                }
                for j in (k + 1)..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        Ok(Self { n, lu: a, perm, odd })
    }

    pub(crate) fn determinant<T: Scalar>(&self) -> E
    where
        E: PivotEntry<T>,
    {
        let d = (0..self.n).fold(E::one(), |acc, k| acc * self.lu[k * self.n + k]);
        if self.odd {
            -d
        } else {
            d
        }
    }

    /// Solves `A X = B` for row-major `B` with `nrhs` columns.
    pub(crate) fn solve<T: Scalar>(&self, b: &[E], nrhs: usize) -> Vec<E>
    where
        E: PivotEntry<T>,
    {
        let n = self.n;
        debug_assert_eq!(b.len(), n * nrhs);
        let mut x: Vec<E> = Vec::with_capacity(n * nrhs);
        for &p in &self.perm {
            x.extend_from_slice(&b[p * nrhs..(p + 1) * nrhs]);
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l == E::zero() {
                    continue;
                }
                for c in 0..nrhs {
                    let xk = x[k * nrhs + c];
                    x[i * nrhs + c] -= l * xk;
                }
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.lu[i * n + k];
                if u == E::zero() {
                    continue;
                }
                for c in 0..nrhs {
                    let xk = x[k * nrhs + c];
                    x[i * nrhs + c] -= u * xk;
                }
            }
            let d = self.lu[i * n + i];
            for c in 0..nrhs {
                x[i * nrhs + c] /= d;
            }
        }
        x
    }
}

/// Solves `A X = B` for real square `A`.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.rows() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "solve",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let lu = Lu::factor::<T>(a.rows(), a.as_slice().to_vec())?;
    let x = lu.solve::<T>(b.as_slice(), b.cols());
    Ok(Matrix::from_vec(b.rows(), b.cols(), x))
}

pub fn inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    solve(a, &Matrix::identity(a.rows()))
}
