use crate::lti::{gain_at, LtiError, StateSpace};
use crate::scalar::Scalar;

/// Log-spaced frequency grid, optionally preceded by `ω = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid<T> {
    pub min: T,
    pub max: T,
    pub points: usize,
    pub include_zero: bool,
}

impl<T: Scalar> FrequencyGrid<T> {
    pub fn log(min: T, max: T, points: usize) -> Self {
        Self {
            min,
            max,
            points,
            include_zero: true,
        }
    }

    pub fn validate(&self) -> Result<(), LtiError> {
        if !(self.min > T::zero()) || !(self.max > self.min) || self.points < 2 {
            return Err(LtiError::InvalidArgument(format!(
                "frequency grid needs 0 < min < max and at least 2 points (got [{}, {}], {})",
                self.min, self.max, self.points
            )));
        }
        Ok(())
    }

    /// Strictly increasing sample frequencies.
    pub fn omegas(&self) -> Vec<T> {
        let lo = self.min.ln();
        let hi = self.max.ln();
        let last = T::lit((self.points.max(2) - 1) as f64);
        let mut out = Vec::with_capacity(self.points + 1);
        if self.include_zero {
            out.push(T::zero());
        }
        for k in 0..self.points {
            let t = T::lit(k as f64) / last;
            out.push((lo + (hi - lo) * t).exp());
        }
        out
    }
}

impl Default for FrequencyGrid<f64> {
    fn default() -> Self {
        Self::log(1e-4, 1e4, 400)
    }
}

impl Default for FrequencyGrid<f32> {
    fn default() -> Self {
        Self::log(1e-4, 1e4, 400)
    }
}

/// Sampled largest-singular-value trace of a transfer matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyResponse<T> {
    pub omegas: Vec<T>,
    pub gains: Vec<T>,
    pub peak_omega: T,
    pub peak_gain: T,
}

impl<T: Scalar> FrequencyResponse<T> {
    /// Requires strictly increasing frequencies and one gain per frequency.
    /// Ties for the peak resolve to the lowest frequency.
    pub fn from_samples(omegas: Vec<T>, gains: Vec<T>) -> Result<Self, LtiError> {
        if omegas.is_empty() || omegas.len() != gains.len() {
            return Err(LtiError::InvalidArgument(
                "frequency response needs one gain per frequency".into(),
            ));
        }
        if omegas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LtiError::InvalidArgument(
                "frequencies must be strictly increasing".into(),
            ));
        }
        let (mut peak_omega, mut peak_gain) = (omegas[0], gains[0]);
        for (&w, &g) in omegas.iter().zip(&gains) {
            if g > peak_gain {
                peak_gain = g;
                peak_omega = w;
            }
        }
        Ok(Self {
            omegas,
            gains,
            peak_omega,
            peak_gain,
        })
    }

    /// Samples an arbitrary gain function, e.g. a transfer matrix that has
    /// no Hurwitz realization of its own.
    pub fn from_fn(
        omegas: Vec<T>,
        mut gain: impl FnMut(T) -> Result<T, LtiError>,
    ) -> Result<Self, LtiError> {
        let gains = omegas.iter().map(|&w| gain(w)).collect::<Result<Vec<_>, _>>()?;
        Self::from_samples(omegas, gains)
    }

    /// Gain at the sample closest to `omega`.
    pub fn gain_near(&self, omega: T) -> T {
        let idx = self
            .omegas
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (*a.1 - omega)
                    .abs()
                    .partial_cmp(&(*b.1 - omega).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.gains[idx]
    }
}

pub fn frequency_response<T: Scalar>(
    sys: &StateSpace<T>,
    grid: &FrequencyGrid<T>,
) -> Result<FrequencyResponse<T>, LtiError> {
    grid.validate()?;
    FrequencyResponse::from_fn(grid.omegas(), |w| gain_at(sys, w))
}
