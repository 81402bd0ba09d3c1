//! Closed-loop maps of a state-feedback plant `P(s) = (sI − A)⁻¹B` under a
//! PI law `K(s) = Kp + Ki/s` acting on the error `e = r − x`.
//!
//! * the effort map `(I + KP)⁻¹K` from reference to control input;
//! * the rejection map `(1/s)·P(I + KP)⁻¹` from an input disturbance to the
//!   integrated state.
//!
//! The `1/s` weight of the rejection map is never realized as a bare
//! integrator; see [`rejection_map_optimal`] and [`rejection_map_response`].

use num_complex::Complex;

use crate::linalg::{self, svd, CMatrix, LinalgError, Matrix};
use crate::lti::{LtiError, StateSpace};
use crate::scalar::Scalar;

/// Plant data `(A, B)`; the measured output is the full state.
#[derive(Clone, Debug, PartialEq)]
pub struct Plant<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
}

impl<T: Scalar> Plant<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>) -> Result<Self, LtiError> {
        if !a.is_square() || b.rows() != a.rows() {
            return Err(LtiError::Dimensions(format!(
                "plant needs square A and B with matching rows, got A {:?}, B {:?}",
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn n_states(&self) -> usize {
        self.a.rows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.cols()
    }

    /// `(A, B, I, 0)`.
    pub fn state_space(&self) -> StateSpace<T> {
        let n = self.n_states();
        StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: Matrix::identity(n),
            d: Matrix::zeros(n, self.n_inputs()),
        }
    }

    /// `P(s) = (sI − A)⁻¹B`.
    pub fn eval(&self, s: Complex<T>) -> Result<CMatrix<T>, LtiError> {
        self.state_space().eval(s)
    }
}

/// Gains of `K(s) = Kp + Ki/s`, both `m×n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiGains<T> {
    pub kp: Matrix<T>,
    pub ki: Matrix<T>,
}

impl<T: Scalar> PiGains<T> {
    pub fn new(kp: Matrix<T>, ki: Matrix<T>) -> Result<Self, LtiError> {
        if kp.shape() != ki.shape() {
            return Err(LtiError::Dimensions(format!(
                "Kp {:?} and Ki {:?} differ in shape",
                kp.shape(),
                ki.shape()
            )));
        }
        Ok(Self { kp, ki })
    }

    /// `Kp + Ki/s`; `s` must be nonzero when `Ki ≠ 0`.
    pub fn eval(&self, s: Complex<T>) -> CMatrix<T> {
        let kp = CMatrix::from_real(&self.kp);
        let ki = CMatrix::from_real(&self.ki).scale(Complex::new(T::one(), T::zero()) / s);
        &kp + &ki
    }

    /// One integrator per error channel: `(0ₙ, Iₙ, Ki, Kp)`.
    pub fn realization(&self) -> StateSpace<T> {
        let n = self.kp.cols();
        StateSpace {
            a: Matrix::zeros(n, n),
            b: Matrix::identity(n),
            c: self.ki.clone(),
            d: self.kp.clone(),
        }
    }

    /// `Ki = L·R` with `r = rank(Ki)` integrators: `ż = R e`, `u = Kp e + L z`.
    pub fn integrator_factors(&self) -> (Matrix<T>, Matrix<T>) {
        let d = linalg::svd(&self.ki);
        let r = d.rank(T::tol_at_least(1e-10, 100.0));
        let (m, n) = self.ki.shape();
        let l = Matrix::from_fn(m, r, |i, j| d.u[(i, j)] * d.singular_values[j]);
        let rr = Matrix::from_fn(r, n, |i, j| d.v[(j, i)]);
        (l, rr)
    }

    /// Realization with `rank(Ki)` integrators.
    pub fn minimal_realization(&self) -> StateSpace<T> {
        let (l, r) = self.integrator_factors();
        let k = r.rows();
        StateSpace {
            a: Matrix::zeros(k, k),
            b: r,
            c: l,
            d: self.kp.clone(),
        }
    }
}

/// How the controller integrators are realized in a closed loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegratorRealization {
    /// One integrator per error channel, as in the per-node network law.
    PerChannel,
    /// `rank(Ki)` integrators; the closed loop then carries only the
    /// controller dynamics visible in its transfer function.
    Minimal,
}

/// Plant + PI interconnection with states `(x, z)`, driven by the
/// reference `r`:
///
/// ```text
/// ẋ = (A − B·Kp)x + B·L z + B·Kp r
/// ż = −R x + R r
/// u = −Kp x + L z + Kp r
/// ```
#[derive(Clone, Debug)]
pub struct ClosedLoop<T> {
    pub a: Matrix<T>,
    pub b_ref: Matrix<T>,
    pub c_u: Matrix<T>,
    pub d_u: Matrix<T>,
    pub integrators: usize,
}

impl<T: Scalar> ClosedLoop<T> {
    /// Reference → (control input, state), stacked `[u; x]`.
    pub fn reference_to_input_and_state(&self) -> StateSpace<T> {
        let n = self.b_ref.cols();
        let nz = self.integrators;
        let cx = Matrix::identity(n).hstack(&Matrix::zeros(n, nz));
        StateSpace {
            a: self.a.clone(),
            b: self.b_ref.clone(),
            c: self.c_u.vstack(&cx),
            d: self.d_u.vstack(&Matrix::zeros(n, n)),
        }
    }
}

pub fn closed_loop<T: Scalar>(
    plant: &Plant<T>,
    gains: &PiGains<T>,
    integrators: IntegratorRealization,
) -> Result<ClosedLoop<T>, LtiError> {
    let (n, m) = (plant.n_states(), plant.n_inputs());
    if gains.kp.shape() != (m, n) {
        return Err(LtiError::Dimensions(format!(
            "controller gains are {:?}, plant needs {}x{}",
            gains.kp.shape(),
            m,
            n
        )));
    }
    let (l, r) = match integrators {
        IntegratorRealization::PerChannel => (gains.ki.clone(), Matrix::identity(n)),
        IntegratorRealization::Minimal => gains.integrator_factors(),
    };
    let nz = r.rows();
    let b = &plant.b;
    let a11 = &plant.a - &(b * &gains.kp);
    let a12 = b * &l;
    let a21 = -&r;
    let a = Matrix::block(&[
        &[Some(&a11), Some(&a12)],
        &[Some(&a21), Some(&Matrix::zeros(nz, nz))],
    ]);
    let b_ref = (b * &gains.kp).vstack(&r);
    let c_u = (-&gains.kp).hstack(&l);
    Ok(ClosedLoop {
        a,
        b_ref,
        c_u,
        d_u: gains.kp.clone(),
        integrators: nz,
    })
}

/// Effort map `F = (I + KP)⁻¹K`, realized with `rank(Ki)` integrators.
///
/// The feedthrough is `Kp` since the plant is strictly proper. States of the
/// realization that the transfer function cancels stay in it; callers that
/// need the true poles filter them.
pub fn effort_map<T: Scalar>(plant: &Plant<T>, gains: &PiGains<T>) -> Result<StateSpace<T>, LtiError> {
    let cl = closed_loop(plant, gains, IntegratorRealization::Minimal)?;
    Ok(StateSpace {
        a: cl.a,
        b: cl.b_ref,
        c: cl.c_u,
        d: cl.d_u,
    })
}

/// `(I + K(iω)P(iω))⁻¹K(iω)` evaluated directly, `ω > 0`.
pub fn effort_map_direct<T: Scalar>(
    plant: &Plant<T>,
    gains: &PiGains<T>,
    omega: T,
) -> Result<CMatrix<T>, LtiError> {
    if !(omega > T::zero()) {
        return Err(LtiError::InvalidArgument(
            "direct effort-map evaluation needs omega > 0".into(),
        ));
    }
    let s = Complex::new(T::zero(), omega);
    let p = plant.eval(s)?;
    let k = gains.eval(s);
    let lhs = &CMatrix::identity(plant.n_inputs()) + &(&k * &p);
    lhs.solve(&k)
        .map_err(|_| LtiError::SingularPencil { omega: omega.to_f64_lossy() })
}

/// Rejection map of the optimal controller with scalar gain `k`:
/// `(sI − A)⁻¹B(sI + k·BᵀA⁻²B)⁻¹`, realized as the cascade
///
/// ```text
/// ξ̇ = −k·BᵀA⁻²B ξ + w,   ẋ = A x + B ξ,   y = x
/// ```
///
/// which is Hurwitz when `A` is and `B` has full column rank.
pub fn rejection_map_optimal<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    k: T,
) -> Result<StateSpace<T>, LtiError> {
    if !(k > T::zero()) || !k.is_finite() {
        return Err(LtiError::InvalidArgument(format!("gain k must be positive, got {k}")));
    }
    let plant = Plant::new(a.clone(), b.clone())?;
    let (n, m) = (plant.n_states(), plant.n_inputs());
    if svd::rank(b) < m {
        return Err(LtiError::InvalidArgument(
            "B must have full column rank for the optimal rejection map".into(),
        ));
    }
    let a_inv = linalg::inverse(a).map_err(|e| match e {
        LinalgError::Singular => LtiError::InvalidArgument("A is singular".into()),
        other => other.into(),
    })?;
    let a_inv2_b = &(&a_inv * &a_inv) * b;
    let gram = (&b.transpose() * &a_inv2_b).scale(k);
    let big_a = Matrix::block(&[&[Some(&-&gram), None], &[Some(b), Some(a)]]);
    let big_b = Matrix::identity(m).vstack(&Matrix::zeros(n, m));
    let big_c = Matrix::zeros(n, m).hstack(&Matrix::identity(n));
    StateSpace::new(big_a, big_b, big_c, Matrix::zeros(n, m))
}

/// Rejection map of an arbitrary PI controller as a state-space system.
///
/// With `T(s) = P(I + KP)⁻¹` realized by the closed loop `(A_cl, B_d, C_x)`,
/// `T(0) = 0` whenever the integral action reaches every input direction, and
/// then `T(s)/s = C_x·A_cl⁻¹·(sI − A_cl)⁻¹·B_d`. Requires a Hurwitz closed
/// loop; a nonzero `T(0)` (unbounded map) is reported as
/// [`LtiError::SingularPencil`] at `ω = 0`.
pub fn rejection_map<T: Scalar>(plant: &Plant<T>, gains: &PiGains<T>) -> Result<StateSpace<T>, LtiError> {
    let cl = closed_loop(plant, gains, IntegratorRealization::Minimal)?;
    let (n, m) = (plant.n_states(), plant.n_inputs());
    let b_d = plant.b.vstack(&Matrix::zeros(cl.integrators, m));
    let c_x = Matrix::identity(n).hstack(&Matrix::zeros(n, cl.integrators));
    let abscissa = linalg::spectral_abscissa(&cl.a)?;
    if !(abscissa < T::zero()) {
        return Err(LtiError::NotHurwitz {
            abscissa: abscissa.to_f64_lossy(),
        });
    }
    // C_x·A_cl⁻¹ from the transposed solve.
    let c_g = linalg::solve(&cl.a.transpose(), &c_x.transpose())?.transpose();
    let t0 = &c_g * &b_d;
    let scale = (&c_g.map(|x| x.abs()) * &b_d.map(|x| x.abs())).max_abs();
    if t0.max_abs() > T::tol_at_least(1e-9, 1e3) * scale.max(T::one()) {
        return Err(LtiError::SingularPencil { omega: 0.0 });
    }
    StateSpace::new(cl.a, b_d, c_g, Matrix::zeros(n, m))
}

/// Rejection map of an arbitrary PI controller at one frequency, in the
/// singularity-free form `P(iω)·(iωI + (iω·Kp + Ki)·P(iω))⁻¹`, which is valid
/// at `ω = 0`.
pub fn rejection_map_response<T: Scalar>(
    plant: &Plant<T>,
    gains: &PiGains<T>,
    omega: T,
) -> Result<CMatrix<T>, LtiError> {
    let s = Complex::new(T::zero(), omega);
    let p = plant.eval(s)?;
    let kp = CMatrix::from_real(&gains.kp).scale(s);
    let ki = CMatrix::from_real(&gains.ki);
    let pencil = &CMatrix::identity(plant.n_inputs()).scale(s) + &(&(&kp + &ki) * &p);
    pencil
        .solve_right(&p)
        .map_err(|_| LtiError::SingularPencil { omega: omega.to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::freq_eval;

    fn scalar_demo() -> (Plant<f64>, PiGains<f64>) {
        let one = Matrix::<f64>::from_rows(&[[1.0]]).unwrap();
        let plant = Plant::new(Matrix::<f64>::from_rows(&[[-1.0]]).unwrap(), one.clone()).unwrap();
        // K(s) = 1 + 1/s
        (plant, PiGains::new(one.clone(), one).unwrap())
    }

    #[test]
    fn scalar_effort_map_is_identically_one() {
        let (plant, gains) = scalar_demo();
        let f = effort_map(&plant, &gains).unwrap();
        for w in [0.0, 0.1, 1.0, 7.0, 300.0] {
            let v = freq_eval(&f, w).unwrap()[(0, 0)];
            assert!((v - Complex::new(1.0, 0.0)).norm() < 1e-12, "w={w}: {v}");
        }
    }

    #[test]
    fn scalar_rejection_map_is_squared_lag() {
        let (plant, gains) = scalar_demo();
        let g = rejection_map_optimal(&plant.a, &plant.b, 1.0).unwrap();
        for w in [0.0, 0.5, 1.0, 4.0] {
            let expect = 1.0 / (1.0 + w * w);
            let v = freq_eval(&g, w).unwrap().spectral_norm();
            assert!((v - expect).abs() < 1e-14);
            let v2 = rejection_map_response(&plant, &gains, w).unwrap().spectral_norm();
            assert!((v2 - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn general_rejection_realization_matches_pointwise_form() {
        let a = Matrix::<f64>::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]).unwrap();
        let b = Matrix::<f64>::from_rows(&[[1.0, -1.0], [0.0, 1.0]]).unwrap();
        let plant = Plant::new(a, b).unwrap();
        let gains = PiGains::new(
            Matrix::<f64>::from_rows(&[[2.0, 0.0], [-2.0, 0.5]]).unwrap(),
            Matrix::<f64>::from_rows(&[[2.0, 0.0], [-2.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let g = rejection_map(&plant, &gains).unwrap();
        for w in [0.0, 0.2, 1.0, 9.0] {
            let direct = rejection_map_response(&plant, &gains, w).unwrap();
            assert!((&freq_eval(&g, w).unwrap() - &direct).max_abs() < 1e-12);
        }
        let opt = rejection_map_optimal(&plant.a, &plant.b, 2.0).unwrap();
        for w in [0.0, 0.7, 3.0] {
            let d = (&freq_eval(&opt, w).unwrap() - &freq_eval(&g, w).unwrap()).max_abs();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn zero_gain_rejected() {
        let (plant, _) = scalar_demo();
        assert!(rejection_map_optimal(&plant.a, &plant.b, 0.0).is_err());
    }

    #[test]
    fn no_integral_action_is_singular_at_dc() {
        let (plant, _) = scalar_demo();
        let gains = PiGains::new(Matrix::<f64>::from_rows(&[[1.0]]).unwrap(), Matrix::zeros(1, 1)).unwrap();
        assert!(matches!(
            rejection_map_response(&plant, &gains, 0.0),
            Err(LtiError::SingularPencil { .. })
        ));
    }

    #[test]
    fn minimal_factors_reproduce_ki() {
        let kp = Matrix::zeros(2, 3);
        let ki = Matrix::<f64>::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]).unwrap();
        let g = PiGains::new(kp, ki.clone()).unwrap();
        let (l, r) = g.integrator_factors();
        assert_eq!(r.rows(), 1);
        assert!((&(&l * &r) - &ki).max_abs() < 1e-13);
    }
}
