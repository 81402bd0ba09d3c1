//! Numerical certification of a synthesized controller.
//!
//! For an instance `(A, B, τ)` the checks are: internal stability of the
//! loop; `‖F‖∞ = γ` attained at DC; `‖G‖∞ ≤ τ` with `‖G(0)‖ = τ`; the DC
//! interpolation identity `P(0)F(0)P(0) = P(0)`; the closed-loop pole
//! structure; positivity of the network closed loop; and optionally a
//! randomized search for PI competitors that beat `γ`.
//!
//! Optimality over all controllers cannot be checked numerically. The DC
//! identity pins `F(0)` to a feasible interpolant, whose norm is at least
//! `‖P(0)†‖ = γ`, and sampling probes the rest.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, CMatrix, LinalgError, Matrix};
use crate::lti::{
    self, effort_map, freq_eval, hinf_norm, is_stabilizing_transfer, rejection_map, rejection_map_optimal,
    stability_analysis, HinfOptions, IntegratorRealization, LtiError, PiGains, Plant, StateSpace,
};
use crate::network::{build_plant, closed_loop_r_to_z, NetworkError, NetworkSpec};
use crate::scalar::Scalar;
use crate::simulation::impulse_response;
use crate::synthesis::{synthesize, synthesize_unchecked, tau_min, DiffusivePlant, PiController, SynthesisError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerificationError {
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("violation factor must lie in (0, 1], got {0}")]
    InvalidFactor(f64),
}

impl From<LinalgError> for VerificationError {
    fn from(e: LinalgError) -> Self {
        VerificationError::Lti(e.into())
    }
}

#[derive(Clone, Debug)]
pub struct VerificationConfig<T> {
    /// Relative tolerance on norm equalities and bounds.
    pub norm_tol: T,
    /// Relative tolerance on `‖G(0)‖ = τ`.
    pub dc_tol: T,
    /// Absolute tolerance on algebraic residuals.
    pub residual_tol: T,
    pub positivity_tol: T,
    pub positivity_horizon: T,
    pub positivity_dt: T,
    pub hinf: HinfOptions<T>,
    /// Feasible competitors to collect; zero skips sampling.
    pub competitors: usize,
    pub seed: u64,
    /// Draw budget per requested competitor.
    pub max_draws_per_competitor: usize,
}

impl<T: Scalar> Default for VerificationConfig<T> {
    fn default() -> Self {
        Self {
            norm_tol: T::tol_at_least(1e-6, 1e3),
            dc_tol: T::tol_at_least(1e-8, 1e3),
            residual_tol: T::tol_at_least(1e-8, 1e3),
            positivity_tol: T::tol_at_least(1e-7, 1e3),
            positivity_horizon: T::lit(20.0),
            positivity_dt: T::lit(0.01),
            hinf: HinfOptions::default(),
            competitors: 0,
            seed: 42,
            max_draws_per_competitor: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CompetitorSummary {
    pub requested: usize,
    pub drawn: usize,
    /// Stabilizing candidates meeting `‖G‖∞ ≤ τ`.
    pub count: usize,
    /// Feasible candidates with `‖F‖∞ < γ − tol`.
    pub violations: usize,
    /// Smallest `‖F‖∞/γ` among feasible candidates.
    pub min_norm_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub tau: f64,
    pub tau_min: f64,
    pub k: f64,
    pub stabilizing: bool,
    /// Integrators of the one-per-channel realization left at the origin.
    pub unreachable_integrators: usize,
    pub gamma_claim: f64,
    pub gamma_measured: f64,
    pub f_peak_omega: f64,
    pub f_dc_gain: f64,
    pub constraint_norm: f64,
    pub constraint_dc_value: f64,
    pub interpolation_residual: f64,
    pub pole_match_residual: f64,
    pub positivity_min: Option<f64>,
    pub competitor_summary: Option<CompetitorSummary>,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn verify_instance<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    tau: T,
    config: &VerificationConfig<T>,
) -> Result<VerificationReport, VerificationError> {
    verify_inner(a, b, tau, false, config)
}

/// [`verify_instance`] on the plant of a network, adding the positivity
/// check of the closed loop from reference to integrated state.
pub fn verify_network<T: Scalar>(
    spec: &NetworkSpec,
    tau: T,
    config: &VerificationConfig<T>,
) -> Result<VerificationReport, VerificationError> {
    let plant = build_plant::<T>(spec)?;
    verify_inner(&plant.a, &plant.b, tau, true, config)
}

fn check(name: &str, value: f64, tolerance: f64, passed: bool) -> Check {
    Check {
        name: name.into(),
        passed,
        value,
        tolerance,
    }
}

fn verify_inner<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    tau: T,
    positivity: bool,
    config: &VerificationConfig<T>,
) -> Result<VerificationReport, VerificationError> {
    let ctrl = synthesize(a, b, tau)?;
    let threshold = tau_min(a, b)?;
    let plant = Plant::new(a.clone(), b.clone())?;
    let margin = config.hinf.margin;
    let f = |x: T| x.to_f64_lossy();
    let mut checks = Vec::new();

    let stabilizing = is_stabilizing_transfer(&plant, &ctrl.gains, margin)?;
    let per_channel = stability_analysis(&plant, &ctrl.gains, IntegratorRealization::PerChannel, margin)?;
    checks.push(check("internal stability", f(per_channel.spectral_abscissa), 0.0, stabilizing));

    let fmap = effort_map(&plant, &ctrl.gains)?;
    let gamma = ctrl.gamma;
    let (gamma_measured, f_peak_omega, f_dc) = if stabilizing {
        let h = hinf_norm(&fmap, &config.hinf)?;
        (h.norm, h.peak_omega, lti::gain_at(&fmap, T::zero())?)
    } else {
        (T::infinity(), T::nan(), T::nan())
    };
    let rel = ((gamma_measured - gamma) / gamma).abs();
    checks.push(check("effort norm equals gamma", f(rel), f(config.norm_tol), rel <= config.norm_tol));
    let dc_gap = (gamma_measured - f_dc) / gamma_measured;
    checks.push(check(
        "effort norm attained at dc",
        f(dc_gap),
        f(config.norm_tol),
        dc_gap <= config.norm_tol,
    ));

    let gmap = rejection_map_optimal(a, b, ctrl.k)?;
    let constraint = hinf_norm(&gmap, &config.hinf)?.norm;
    let g_dc = lti::gain_at(&gmap, T::zero())?;
    let over = constraint / tau - T::one();
    checks.push(check("rejection norm within tau", f(over), f(config.norm_tol), over <= config.norm_tol));
    let dc_err = ((g_dc - tau) / tau).abs();
    checks.push(check("rejection dc equals tau", f(dc_err), f(config.dc_tol), dc_err <= config.dc_tol));

    let interp = if stabilizing {
        interpolation_residual(&plant, &fmap)?
    } else {
        T::infinity()
    };
    checks.push(check(
        "dc interpolation identity",
        f(interp),
        f(config.residual_tol),
        interp <= config.residual_tol,
    ));

    let poles = pole_match_residual(&plant, &ctrl, &fmap)?;
    checks.push(check(
        "effort poles",
        f(poles),
        f(config.residual_tol),
        poles <= config.residual_tol,
    ));

    let positivity_min = if positivity {
        let rz = closed_loop_r_to_z(a, b, ctrl.k)?;
        let resp = impulse_response(&rz, config.positivity_horizon, config.positivity_dt)?;
        let min = resp.min_value();
        checks.push(check(
            "closed-loop positivity",
            f(min),
            f(config.positivity_tol),
            min >= -config.positivity_tol,
        ));
        Some(f(min))
    } else {
        None
    };

    let competitor_summary = if config.competitors > 0 {
        let s = sample_competitors(a, b, tau, config.competitors, config.seed, config)?;
        checks.push(check(
            "no competitor beats gamma",
            s.violations as f64,
            0.0,
            s.violations == 0,
        ));
        Some(s)
    } else {
        None
    };

    Ok(VerificationReport {
        passed: checks.iter().all(|c| c.passed),
        tau: f(tau),
        tau_min: f(threshold),
        k: f(ctrl.k),
        stabilizing,
        unreachable_integrators: per_channel.unstabilized_integrators,
        gamma_claim: f(gamma),
        gamma_measured: f(gamma_measured),
        f_peak_omega: f(f_peak_omega),
        f_dc_gain: f(f_dc),
        constraint_norm: f(constraint),
        constraint_dc_value: f(g_dc),
        interpolation_residual: f(interp),
        pole_match_residual: f(poles),
        positivity_min,
        competitor_summary,
        checks,
    })
}

/// `‖P(0)·F(0)·P(0) − P(0)‖`.
pub fn interpolation_residual<T: Scalar>(plant: &Plant<T>, fmap: &StateSpace<T>) -> Result<T, LtiError> {
    let p0 = plant.state_space().dc_gain()?;
    let f0 = fmap.dc_gain()?;
    Ok(linalg::spectral_norm(&(&(&(&p0 * &f0) * &p0) - &p0)))
}

/// Largest of two relative residuals at test points `s` around the
/// spectrum:
///
/// * `det(sI − A_F) / (det(sI − A)·det(sI + k·BᵀA⁻²B)) − 1`, i.e. the
///   realization's eigenvalues are `eig(A) ∪ eig(−k·BᵀA⁻²B)` with
///   multiplicity;
/// * `F(s) − k·(sI + k·BᵀA⁻²B)⁻¹·BᵀA⁻²·(sI − A)`, which cancels every
///   `eig(A)` mode, so the poles of `F` are eigenvalues of `−k·BᵀA⁻²B`.
///
/// Determinants avoid the ill-conditioning of matching repeated eigenvalues
/// one by one.
pub fn pole_match_residual<T: Scalar>(
    plant: &Plant<T>,
    ctrl: &PiController<T>,
    fmap: &StateSpace<T>,
) -> Result<T, VerificationError> {
    let dp = DiffusivePlant::new(&plant.a, &plant.b)?;
    let ainv2 = &dp.a_inv * &dp.a_inv;
    let bt = plant.b.transpose();
    let gram = (&(&bt * &ainv2) * &plant.b).scale(ctrl.k);
    let num = (&bt * &ainv2).scale(ctrl.k);
    let radius = linalg::spectral_norm(&plant.a).max(linalg::spectral_norm(&gram));
    let (n, m) = (plant.n_states(), plant.n_inputs());
    let mut worst = T::zero();
    for scale in [0.1, 1.0, 10.0] {
        for angle in [0.25, 0.5, 0.75] {
            let th = std::f64::consts::PI * angle;
            let s = Complex::new(T::lit(th.cos()), T::lit(th.sin())).scale(radius * T::lit(scale));
            let det_f = CMatrix::shifted(s, &fmap.a).determinant()?;
            let det_a = CMatrix::shifted(s, &plant.a).determinant()?;
            let det_g = CMatrix::shifted(s, &(-&gram)).determinant()?;
            let ratio = det_f / (det_a * det_g);
            worst = worst.max((ratio - Complex::new(T::one(), T::zero())).norm());

            let lhs = fmap.eval(s)?;
            let shifted_a = CMatrix::shifted(s, &plant.a);
            let rhs = CMatrix::shifted(s, &(-&gram))
                .solve(&(&CMatrix::from_real(&num) * &shifted_a))
                .map_err(LtiError::from)?;
            let diff = (&lhs - &rhs).spectral_norm() / lhs.spectral_norm().max(T::one());
            worst = worst.max(diff);
        }
    }
    debug_assert_eq!(fmap.n_states(), n + m);
    Ok(worst)
}

/// Evidence that the formula fails below the threshold: the effort map's
/// peak exceeds its DC value `γ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationEvidence {
    pub factor: f64,
    pub tau: f64,
    pub tau_min: f64,
    pub k: f64,
    pub gamma: f64,
    pub dc_value: f64,
    pub peak_value: f64,
    /// `+∞` when the supremum is only approached at high frequency.
    pub peak_omega: f64,
    /// `peak_value > dc_value·(1 + norm_tol)`.
    pub violated: bool,
}

/// Applies the formula at `τ = factor·τ*` and measures the effort map.
pub fn check_tau_violation<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    factor: T,
    config: &VerificationConfig<T>,
) -> Result<ViolationEvidence, VerificationError> {
    if !(factor > T::zero()) || factor > T::one() {
        return Err(VerificationError::InvalidFactor(factor.to_f64_lossy()));
    }
    let threshold = tau_min(a, b)?;
    let tau = factor * threshold;
    let ctrl = synthesize_unchecked(a, b, tau)?;
    let plant = Plant::new(a.clone(), b.clone())?;
    let fmap = effort_map(&plant, &ctrl.gains)?;
    let h = hinf_norm(&fmap, &config.hinf)?;
    let dc = lti::gain_at(&fmap, T::zero())?;
    Ok(ViolationEvidence {
        factor: factor.to_f64_lossy(),
        tau: tau.to_f64_lossy(),
        tau_min: threshold.to_f64_lossy(),
        k: ctrl.k.to_f64_lossy(),
        gamma: ctrl.gamma.to_f64_lossy(),
        dc_value: dc.to_f64_lossy(),
        peak_value: h.norm.to_f64_lossy(),
        peak_omega: h.peak_omega.to_f64_lossy(),
        violated: h.norm > dc * (T::one() + config.norm_tol),
    })
}

/// Candidate families, chosen uniformly per draw. `c` is log-uniform on
/// `[0.1, 10]` and `N` standard normal, scaled by the largest entry of the
/// matching optimal gain:
///
/// * `Perturbed`: `c·(K̂ + 0.3·N)`, separately for `Kp` and `Ki`;
/// * `Structured`: `c·N` on the nonzeros of `Bᵀ`;
/// * `Dense`: `c·N` everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    Perturbed,
    Structured,
    Dense,
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random_range(0.1f64.ln()..10f64.ln())).exp()
}

fn draw_gain<T: Scalar>(
    rng: &mut ChaCha8Rng,
    family: Family,
    nominal: &Matrix<T>,
    pattern: &Matrix<T>,
) -> Matrix<T> {
    let c = log_uniform(rng);
    let size = nominal.max_abs().to_f64_lossy().max(f64::MIN_POSITIVE);
    let (rows, cols) = nominal.shape();
    Matrix::from_fn(rows, cols, |i, j| {
        let z: f64 = rng.sample(StandardNormal);
        let v = match family {
            Family::Perturbed => c * (nominal[(i, j)].to_f64_lossy() + 0.3 * size * z),
            Family::Structured if pattern[(j, i)] == T::zero() => 0.0,
            Family::Structured | Family::Dense => c * size * z,
        };
        T::lit(v)
    })
}

/// Draws random PI controllers until `n_samples` of them are stabilizing
/// and meet `‖G‖∞ ≤ τ(1 + norm_tol)`, or the draw budget
/// `n_samples·max_draws_per_competitor` runs out. Each kept candidate is
/// a violation when `‖F‖∞ < γ − norm_tol`. Deterministic in `seed`.
pub fn sample_competitors<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    tau: T,
    n_samples: usize,
    seed: u64,
    config: &VerificationConfig<T>,
) -> Result<CompetitorSummary, VerificationError> {
    let ctrl = synthesize(a, b, tau)?;
    let mut summary = CompetitorSummary {
        requested: n_samples,
        ..Default::default()
    };
    if n_samples == 0 {
        return Ok(summary);
    }
    let plant = Plant::new(a.clone(), b.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = n_samples.saturating_mul(config.max_draws_per_competitor);
    let bound = tau * (T::one() + config.norm_tol);
    let grid = config.hinf.grid.omegas();
    let mut min_ratio: Option<T> = None;
    while summary.count < n_samples && summary.drawn < budget {
        summary.drawn += 1;
        let family = match rng.random_range(0..3) {
            0 => Family::Perturbed,
            1 => Family::Structured,
            _ => Family::Dense,
        };
        let gains = PiGains {
            kp: draw_gain(&mut rng, family, &ctrl.gains.kp, b),
            ki: draw_gain(&mut rng, family, &ctrl.gains.ki, b),
        };
        if !is_stabilizing_transfer(&plant, &gains, config.hinf.margin)? {
            continue;
        }
        let gmap = match rejection_map(&plant, &gains) {
            Ok(g) => g,
            Err(LtiError::SingularPencil { .. } | LtiError::NotHurwitz { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        // Cheap rejection before the certified norm.
        if lti::gain_at(&gmap, T::zero())? > bound {
            continue;
        }
        if hinf_norm(&gmap, &config.hinf)?.norm > bound {
            continue;
        }
        summary.count += 1;
        let fmap = effort_map(&plant, &gains)?;
        let mut lower = T::zero();
        for &w in &grid {
            lower = lower.max(freq_eval(&fmap, w)?.spectral_norm());
        }
        let value = if lower >= ctrl.gamma - config.norm_tol {
            lower
        } else {
            hinf_norm(&fmap, &config.hinf)?.norm
        };
        if value < ctrl.gamma - config.norm_tol {
            summary.violations += 1;
        }
        let ratio = value / ctrl.gamma;
        min_ratio = Some(min_ratio.map_or(ratio, |r| r.min(ratio)));
    }
    summary.min_norm_ratio = min_ratio.map(|r| r.to_f64_lossy());
    Ok(summary)
}
