//! Continuous-time LTI systems: state-space carrier, frequency-domain
//! evaluation, the closed-loop maps of a plant under PI feedback, internal
//! stability and the H∞ norm engine.

mod freq;
mod hinf;
mod maps;
mod stability;

pub use freq::{frequency_response, FrequencyGrid, FrequencyResponse};
pub use hinf::{hinf_norm, HinfNorm, HinfOptions};
pub use maps::{
    closed_loop, effort_map, effort_map_direct, rejection_map, rejection_map_optimal, rejection_map_response,
    ClosedLoop, IntegratorRealization, PiGains, Plant,
};
pub use stability::{
    four_block_peak, is_internally_stabilizing, is_stabilizing_transfer, stability_analysis,
    StabilityReport,
};

use num_complex::Complex;
use thiserror::Error;

use crate::linalg::{self, CMatrix, LinalgError, Matrix};
use crate::scalar::Scalar;

/// Default absolute margin on real parts for Hurwitz certification.
pub const STABILITY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LtiError {
    #[error("state-space dimensions inconsistent: {0}")]
    Dimensions(String),
    #[error("system is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { abscissa: f64 },
    #[error("evaluation at a pole: i*{omega} is (numerically) an eigenvalue")]
    EvaluationAtPole { omega: f64 },
    #[error("singular pencil at omega = {omega}")]
    SingularPencil { omega: f64 },
    #[error("{count} controller integrator(s) unreachable from the loop are not stabilized in closed loop")]
    UnstabilizedIntegrator { count: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `ẋ = Ax + Bu, y = Cx + Du`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
    pub d: Matrix<T>,
}

impl<T: Scalar> StateSpace<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, c: Matrix<T>, d: Matrix<T>) -> Result<Self, LtiError> {
        let n = a.rows();
        if !a.is_square() {
            return Err(LtiError::Dimensions(format!(
                "A is {}x{}, expected square",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != n || c.cols() != n || d.rows() != c.rows() || d.cols() != b.cols() {
            return Err(LtiError::Dimensions(format!(
                "A {:?}, B {:?}, C {:?}, D {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn n_states(&self) -> usize {
        self.a.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn poles(&self) -> Result<Vec<Complex<T>>, LtiError> {
        Ok(linalg::eigenvalues(&self.a)?)
    }

    /// Maximum real part of the eigenvalues of `A`; `−∞` without states.
    pub fn spectral_abscissa(&self) -> Result<T, LtiError> {
        if self.n_states() == 0 {
            return Ok(T::neg_infinity());
        }
        Ok(linalg::spectral_abscissa(&self.a)?)
    }

    pub fn is_hurwitz(&self, margin: T) -> Result<bool, LtiError> {
        Ok(self.spectral_abscissa()? < -margin)
    }

    /// `C(sI − A)⁻¹B + D` at a complex point.
    pub fn eval(&self, s: Complex<T>) -> Result<CMatrix<T>, LtiError> {
        let d = CMatrix::from_real(&self.d);
        if self.n_states() == 0 {
            return Ok(d);
        }
        let x = CMatrix::shifted(s, &self.a)
            .solve(&CMatrix::from_real(&self.b))
            .map_err(|e| match e {
                LinalgError::Singular => LtiError::EvaluationAtPole {
                    omega: s.im.to_f64_lossy(),
                },
                other => other.into(),
            })?;
        Ok(&(&CMatrix::from_real(&self.c) * &x) + &d)
    }

    /// DC gain `D − CA⁻¹B`.
    pub fn dc_gain(&self) -> Result<Matrix<T>, LtiError> {
        if self.n_states() == 0 {
            return Ok(self.d.clone());
        }
        let x = linalg::solve(&self.a, &self.b).map_err(|e| match e {
            LinalgError::Singular => LtiError::EvaluationAtPole { omega: 0.0 },
            other => other.into(),
        })?;
        Ok(&self.d - &(&self.c * &x))
    }

    /// Restricts to one input column.
    pub fn input_channel(&self, j: usize) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.submatrix(0, j, self.b.rows(), 1),
            c: self.c.clone(),
            d: self.d.submatrix(0, j, self.d.rows(), 1),
        }
    }

    /// Replaces the input matrix by `B·v` (a fixed input direction).
    pub fn with_input_direction(&self, v: &[T]) -> Self {
        let col = Matrix::column_vector(v);
        Self {
            a: self.a.clone(),
            b: &self.b * &col,
            c: self.c.clone(),
            d: &self.d * &col,
        }
    }
}

/// Frequency response `C(iωI − A)⁻¹B + D`, by a direct complex solve.
pub fn freq_eval<T: Scalar>(sys: &StateSpace<T>, omega: T) -> Result<CMatrix<T>, LtiError> {
    sys.eval(Complex::new(T::zero(), omega))
}

/// Largest singular value of the frequency response at `omega`.
pub fn gain_at<T: Scalar>(sys: &StateSpace<T>, omega: T) -> Result<T, LtiError> {
    Ok(freq_eval(sys, omega)?.spectral_norm())
}
