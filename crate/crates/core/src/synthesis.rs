//! Closed-form H∞-optimal PI synthesis for plants `ẋ = Ax + Bu` with `A`
//! symmetric negative definite.
//!
//! The controller is `K(s) = k·(BᵀA⁻² − (1/s)·BᵀA⁻¹)` with
//! `k = ‖(A⁻¹B)†‖/τ`. For `τ ≥ √‖BᵀA⁻⁴B‖` it minimizes the H∞ norm of the
//! effort map `(I + KP)⁻¹K` subject to `‖(1/s)·P(I + KP)⁻¹‖∞ ≤ τ`, and the
//! minimum is `γ = ‖(A⁻¹B)†‖`.

use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, SymEig};
use crate::lti::{LtiError, PiGains, StateSpace};
use crate::scalar::Scalar;

/// Relative asymmetry `‖A − Aᵀ‖_F/‖A‖_F` accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// `A` counts as negative definite when `λ_max ≤ −DEFINITENESS_TOL·|λ_min|`.
pub const DEFINITENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error("A is not symmetric (relative asymmetry {relative:.3e})")]
    Asymmetric { relative: f64 },
    #[error("A is not negative definite (largest eigenvalue {max_eigenvalue:.6e})")]
    NotNegativeDefinite { max_eigenvalue: f64 },
    #[error("B is zero")]
    ZeroInput,
    #[error("B does not have full column rank (rank {rank} < {cols} columns); drop or merge dependent actuators")]
    RankDeficient { rank: usize, cols: usize },
    #[error("tau below threshold: tau = {tau:.6} < tau* = {tau_min:.6}")]
    TauBelowThreshold { tau: f64, tau_min: f64 },
    #[error("tau must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("gain k must be positive and finite, got {0}")]
    InvalidGain(f64),
    #[error(transparent)]
    Linalg(LinalgError),
    #[error(transparent)]
    Lti(#[from] LtiError),
}

impl From<LinalgError> for SynthesisError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Asymmetric { relative } => SynthesisError::Asymmetric { relative },
            other => SynthesisError::Linalg(other),
        }
    }
}

/// Synthesized controller `K(s) = Kp + Ki/s` with its design data.
#[derive(Clone, Debug, PartialEq)]
pub struct PiController<T> {
    pub gains: PiGains<T>,
    /// Scalar gain, `k·τ = γ`.
    pub k: T,
    /// Optimal effort-map norm `‖(A⁻¹B)†‖`.
    pub gamma: T,
    pub tau: T,
}

impl<T: Scalar> PiController<T> {
    pub fn kp(&self) -> &Matrix<T> {
        &self.gains.kp
    }

    pub fn ki(&self) -> &Matrix<T> {
        &self.gains.ki
    }
}

/// Admissible plant data with the quantities every synthesis step reuses.
#[derive(Clone, Debug)]
pub struct DiffusivePlant<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    /// `A⁻¹`, assembled from the symmetric eigendecomposition.
    pub a_inv: Matrix<T>,
    pub eig: SymEig<T>,
}

impl<T: Scalar> DiffusivePlant<T> {
    /// Checks `A` symmetric negative definite and `B` nonzero with matching
    /// rows. Column rank is checked separately.
    pub fn new(a: &Matrix<T>, b: &Matrix<T>) -> Result<Self, SynthesisError> {
        if !a.is_square() || b.rows() != a.rows() {
            return Err(SynthesisError::Dimensions(format!(
                "A is {:?}, B is {:?}",
                a.shape(),
                b.shape()
            )));
        }
        let eig = linalg::sym_eig(a, T::tol_at_least(SYMMETRY_TOL, 10.0))?;
        let (hi, lo) = (eig.max(), eig.min());
        if !(hi < T::zero()) || hi > -T::lit(DEFINITENESS_TOL) * lo.abs() {
            return Err(SynthesisError::NotNegativeDefinite {
                max_eigenvalue: hi.to_f64_lossy(),
            });
        }
        if b.max_abs() == T::zero() {
            return Err(SynthesisError::ZeroInput);
        }
        let n = a.rows();
        let q = &eig.vectors;
        let ql = Matrix::from_fn(n, n, |i, j| q[(i, j)] / eig.values[j]);
        let a_inv = (&ql * &q.transpose()).symmetrize();
        Ok(Self {
            a: a.clone(),
            b: b.clone(),
            a_inv,
            eig,
        })
    }

    /// `A⁻¹B = −P(0)`.
    pub fn a_inv_b(&self) -> Matrix<T> {
        &self.a_inv * &self.b
    }

    pub fn tau_min(&self) -> T {
        linalg::spectral_norm(&(&self.a_inv * &self.a_inv_b()))
    }

    pub fn require_full_column_rank(&self) -> Result<(), SynthesisError> {
        let m = self.b.cols();
        let rank = linalg::rank(&self.a_inv_b());
        if rank < m {
            return Err(SynthesisError::RankDeficient { rank, cols: m });
        }
        Ok(())
    }

    pub fn optimal_value(&self) -> T {
        linalg::pseudo_inverse_norm(&self.a_inv_b(), None)
    }

    /// `k·BᵀA⁻²` and `−k·BᵀA⁻¹` for an arbitrary positive `k`.
    pub fn gains_for(&self, k: T) -> PiGains<T> {
        let bt_ainv = &self.b.transpose() * &self.a_inv;
        PiGains {
            kp: (&bt_ainv * &self.a_inv).scale(k),
            ki: bt_ainv.scale(-k),
        }
    }
}

/// `√‖BᵀA⁻⁴B‖ = ‖A⁻²B‖`, the smallest admissible time constant.
pub fn tau_min<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T, SynthesisError> {
    Ok(DiffusivePlant::new(a, b)?.tau_min())
}

/// `‖(A⁻¹B)†‖`, the minimal achievable effort-map norm.
pub fn optimal_value<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T, SynthesisError> {
    let plant = DiffusivePlant::new(a, b)?;
    plant.require_full_column_rank()?;
    Ok(plant.optimal_value())
}

pub fn synthesize<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, tau: T) -> Result<PiController<T>, SynthesisError> {
    let plant = DiffusivePlant::new(a, b)?;
    plant.require_full_column_rank()?;
    check_tau(tau)?;
    let tau_min = plant.tau_min();
    // τ = c·τ* with c = 1 must pass despite rounding in the product.
    if tau < tau_min * (T::one() - T::lit(64.0) * T::epsilon()) {
        return Err(SynthesisError::TauBelowThreshold {
            tau: tau.to_f64_lossy(),
            tau_min: tau_min.to_f64_lossy(),
        });
    }
    Ok(formula(&plant, tau))
}

/// The same formula without the threshold check, for demonstrating what
/// happens below `τ*`. The plant and rank checks still apply.
pub fn synthesize_unchecked<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    tau: T,
) -> Result<PiController<T>, SynthesisError> {
    let plant = DiffusivePlant::new(a, b)?;
    plant.require_full_column_rank()?;
    check_tau(tau)?;
    Ok(formula(&plant, tau))
}

fn check_tau<T: Scalar>(tau: T) -> Result<(), SynthesisError> {
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(SynthesisError::InvalidTau(tau.to_f64_lossy()));
    }
    Ok(())
}

fn formula<T: Scalar>(plant: &DiffusivePlant<T>, tau: T) -> PiController<T> {
    let gamma = plant.optimal_value();
    let k = gamma / tau;
    PiController {
        gains: plant.gains_for(k),
        k,
        gamma,
        tau,
    }
}

/// One integrator per error channel: `(0ₙ, Iₙ, Ki, Kp)`.
pub fn pi_realization<T: Scalar>(controller: &PiController<T>) -> StateSpace<T> {
    controller.gains.realization()
}
