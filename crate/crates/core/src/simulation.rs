//! Step and impulse responses sampled exactly on a uniform grid.
//!
//! Inputs are held constant between samples, so the zero-order-hold
//! discretization `exp([[A, B], [0, 0]]·dt)` reproduces a step input without
//! integration error; the only error source is the matrix exponential.

use serde::Serialize;

use crate::linalg::{self, Matrix};
use crate::lti::{LtiError, StateSpace};
use crate::scalar::Scalar;

/// Sampled response on `t = 0, dt, 2dt, …`. Row `k` of `values` holds the
/// outputs at `times[k]`, in the order of `output_labels`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeResponse<T> {
    pub times: Vec<T>,
    pub values: Vec<Vec<T>>,
    pub input_label: String,
    pub output_labels: Vec<String>,
    /// Weight of the Dirac impulse passed straight through by `D`; only set
    /// by [`impulse_response`], and never part of `values`.
    pub feedthrough: Option<Vec<Vec<T>>>,
}

impl<T: Scalar> TimeResponse<T> {
    pub fn column(&self, j: usize) -> Vec<T> {
        self.values.iter().map(|row| row[j]).collect()
    }

    /// Smallest sampled entry over all outputs and times.
    pub fn min_value(&self) -> T {
        self.values
            .iter()
            .flatten()
            .fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn last(&self) -> &[T] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn time_grid<T: Scalar>(t_final: T, dt: T) -> Result<Vec<T>, LtiError> {
    if !(dt > T::zero()) || !dt.is_finite() || !(t_final >= dt) || !t_final.is_finite() {
        return Err(LtiError::InvalidArgument(format!(
            "simulation needs dt > 0 and T >= dt (got T = {t_final}, dt = {dt})"
        )));
    }
    // Tolerate T/dt landing just below an integer.
    let steps = (t_final / dt + T::lit(1e-9)).floor().to_usize().unwrap_or(0);
    Ok((0..=steps).map(|k| T::lit(k as f64) * dt).collect())
}

fn default_labels(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

/// Response to a unit step on input `channel` from `x(0) = 0`.
pub fn step_response<T: Scalar>(
    sys: &StateSpace<T>,
    t_final: T,
    dt: T,
    channel: usize,
) -> Result<TimeResponse<T>, LtiError> {
    let times = time_grid(t_final, dt)?;
    if channel >= sys.n_inputs() {
        return Err(LtiError::InvalidArgument(format!(
            "input channel {channel} out of range ({} inputs)",
            sys.n_inputs()
        )));
    }
    let n = sys.n_states();
    let b = sys.b.submatrix(0, channel, n, 1);
    let d = sys.d.column(channel);
    let (phi, gamma) = zoh(&sys.a, &b, dt)?;
    let mut x = vec![T::zero(); n];
    let mut values = Vec::with_capacity(times.len());
    for _ in &times {
        let mut y = sys.c.mul_vec(&x);
        for (yi, di) in y.iter_mut().zip(&d) {
            *yi += *di;
        }
        values.push(y);
        let mut next = phi.mul_vec(&x);
        for (xi, gi) in next.iter_mut().zip(gamma.column(0)) {
            *xi += gi;
        }
        x = next;
    }
    Ok(TimeResponse {
        times,
        values,
        input_label: format!("u{channel}"),
        output_labels: default_labels("y", sys.n_outputs()),
        feedthrough: None,
    })
}

/// Samples of `C·e^{At}·B`, flattened row-major per time (`y{i}/u{j}`).
pub fn impulse_response<T: Scalar>(sys: &StateSpace<T>, t_final: T, dt: T) -> Result<TimeResponse<T>, LtiError> {
    let times = time_grid(t_final, dt)?;
    let (p, m) = (sys.n_outputs(), sys.n_inputs());
    let phi = linalg::matrix_exp(&sys.a.scale(dt))?;
    let mut state = sys.b.clone();
    let mut values = Vec::with_capacity(times.len());
    for _ in &times {
        values.push((&sys.c * &state).as_slice().to_vec());
        state = &phi * &state;
    }
    let output_labels = (0..p)
        .flat_map(|i| (0..m).map(move |j| format!("y{i}/u{j}")))
        .collect();
    let feedthrough = (sys.d.max_abs() > T::zero()).then(|| sys.d.to_rows());
    Ok(TimeResponse {
        times,
        values,
        input_label: "impulse".into(),
        output_labels,
        feedthrough,
    })
}

/// `(Φ, Γ)` with `x⁺ = Φx + Γu` for an input held over `dt`.
pub fn zoh<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, dt: T) -> Result<(Matrix<T>, Matrix<T>), LtiError> {
    let (n, m) = (a.rows(), b.cols());
    let aug = Matrix::block(&[&[Some(a), Some(b)], &[None, Some(&Matrix::zeros(m, m))]]).scale(dt);
    let e = linalg::matrix_exp(&aug)?;
    Ok((e.submatrix(0, 0, n, n), e.submatrix(0, n, n, m)))
}
