use num_complex::Complex;

use crate::linalg::{self, CMatrix};
use crate::lti::maps::{closed_loop, IntegratorRealization, PiGains, Plant};
use crate::lti::{FrequencyGrid, LtiError, STABILITY_MARGIN};
use crate::scalar::Scalar;

/// Closed-loop eigenvalue analysis of a plant under PI feedback.
#[derive(Clone, Debug)]
pub struct StabilityReport<T> {
    /// All closed-loop eigenvalues lie left of `−margin`.
    pub stabilizing: bool,
    pub spectral_abscissa: T,
    /// Integrators of the analysed realization that the loop cannot reach.
    /// Nonzero only when those are the sole obstruction to stability.
    pub unstabilized_integrators: usize,
    pub eigenvalues: Vec<Complex<T>>,
}

/// Eigenvalue test on the closed loop built with the given integrator
/// realization. With [`IntegratorRealization::PerChannel`], a loop that
/// fails only because of integrators outside the range of `Kiᵀ` reports
/// those in `unstabilized_integrators`.
pub fn stability_analysis<T: Scalar>(
    plant: &Plant<T>,
    gains: &PiGains<T>,
    integrators: IntegratorRealization,
    margin: T,
) -> Result<StabilityReport<T>, LtiError> {
    let cl = closed_loop(plant, gains, integrators)?;
    let eigenvalues = linalg::eigenvalues(&cl.a)?;
    let abscissa = eigenvalues
        .iter()
        .fold(T::neg_infinity(), |m, z| m.max(z.re));
    let stabilizing = abscissa < -margin;
    let mut unstabilized = 0;
    if !stabilizing && integrators == IntegratorRealization::PerChannel {
        let minimal = closed_loop(plant, gains, IntegratorRealization::Minimal)?;
        let reachable = minimal.integrators;
        if reachable < cl.integrators && linalg::spectral_abscissa(&minimal.a)? < -margin {
            unstabilized = cl.integrators - reachable;
        }
    }
    Ok(StabilityReport {
        stabilizing,
        spectral_abscissa: abscissa,
        unstabilized_integrators: unstabilized,
        eigenvalues,
    })
}

/// Internal stability of the plant with one controller integrator per error
/// channel.
///
/// Integrators the loop cannot reach (for example at a network node without
/// actuation and without edges) sit at the origin in closed loop; that case
/// is reported as [`LtiError::UnstabilizedIntegrator`] rather than `false`.
pub fn is_internally_stabilizing<T: Scalar>(
    plant: &Plant<T>,
    gains: &PiGains<T>,
) -> Result<bool, LtiError> {
    let report = stability_analysis(
        plant,
        gains,
        IntegratorRealization::PerChannel,
        T::lit(STABILITY_MARGIN),
    )?;
    if report.unstabilized_integrators > 0 {
        return Err(LtiError::UnstabilizedIntegrator {
            count: report.unstabilized_integrators,
        });
    }
    Ok(report.stabilizing)
}

/// Internal stability in the transfer-function sense: the closed loop with a
/// minimal controller realization has all eigenvalues left of `−margin`.
pub fn is_stabilizing_transfer<T: Scalar>(
    plant: &Plant<T>,
    gains: &PiGains<T>,
    margin: T,
) -> Result<bool, LtiError> {
    Ok(stability_analysis(plant, gains, IntegratorRealization::Minimal, margin)?.stabilizing)
}

/// Largest gain over the grid (positive frequencies only) of the four-block
/// closed-loop map `[I; K](I + PK)⁻¹[I  P]`. A smoke test complementing the
/// eigenvalue decision; a finite value says nothing about the right half
/// plane.
pub fn four_block_peak<T: Scalar>(
    plant: &Plant<T>,
    gains: &PiGains<T>,
    grid: &FrequencyGrid<T>,
) -> Result<T, LtiError> {
    let n = plant.n_states();
    let mut peak = T::zero();
    for w in grid.omegas().into_iter().filter(|&w| w > T::zero()) {
        let s = Complex::new(T::zero(), w);
        let p = plant.eval(s)?;
        let k = gains.eval(s);
        let sens = (&CMatrix::identity(n) + &(&p * &k))
            .solve(&CMatrix::identity(n))
            .map_err(|_| LtiError::SingularPencil { omega: w.to_f64_lossy() })?;
        let ip = hstack(&CMatrix::identity(n), &p);
        let top = &sens * &ip;
        let bottom = &k * &top;
        let full = vstack(&top, &bottom);
        peak = peak.max(full.spectral_norm());
    }
    Ok(peak)
}

fn hstack<T: Scalar>(l: &CMatrix<T>, r: &CMatrix<T>) -> CMatrix<T> {
    let mut out = CMatrix::zeros(l.rows(), l.cols() + r.cols());
    for i in 0..l.rows() {
        for j in 0..l.cols() {
            out[(i, j)] = l[(i, j)];
        }
        for j in 0..r.cols() {
            out[(i, l.cols() + j)] = r[(i, j)];
        }
    }
    out
}

fn vstack<T: Scalar>(t: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let mut out = CMatrix::zeros(t.rows() + b.rows(), t.cols());
    for j in 0..t.cols() {
        for i in 0..t.rows() {
            out[(i, j)] = t[(i, j)];
        }
        for i in 0..b.rows() {
            out[(t.rows() + i, j)] = b[(i, j)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn scalar_demo_loop_is_stable() {
        // a = −1, b = 1, K = 1 + 1/s: closed-loop polynomial s² + 2s + 1.
        let one = Matrix::<f64>::from_rows(&[[1.0]]).unwrap();
        let plant = Plant::new(Matrix::<f64>::from_rows(&[[-1.0]]).unwrap(), one.clone()).unwrap();
        let gains = PiGains::new(one.clone(), one).unwrap();
        assert!(is_internally_stabilizing(&plant, &gains).unwrap());
        let rep = stability_analysis(&plant, &gains, IntegratorRealization::PerChannel, 1e-9).unwrap();
        for z in &rep.eigenvalues {
            assert!((z.re + 1.0).abs() < 1e-7 && z.im.abs() < 1e-7);
        }
        let peak = four_block_peak(&plant, &gains, &FrequencyGrid::default()).unwrap();
        assert!(peak.is_finite() && peak > 0.0);
    }

    #[test]
    fn unreachable_integrator_is_diagnosed() {
        // Node 2 has no actuation: its integrator only integrates.
        let plant = Plant::new(
            Matrix::<f64>::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]).unwrap(),
            Matrix::<f64>::from_rows(&[[1.0], [0.0]]).unwrap(),
        )
        .unwrap();
        let gains = PiGains::new(
            Matrix::<f64>::from_rows(&[[1.0, 0.0]]).unwrap(),
            Matrix::<f64>::from_rows(&[[1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            is_internally_stabilizing(&plant, &gains),
            Err(LtiError::UnstabilizedIntegrator { count: 1 })
        ));
        assert!(is_stabilizing_transfer(&plant, &gains, 1e-9).unwrap());
    }

    #[test]
    fn destabilizing_gain_is_false() {
        let one = Matrix::<f64>::from_rows(&[[1.0]]).unwrap();
        let plant = Plant::new(Matrix::<f64>::from_rows(&[[-1.0]]).unwrap(), one.clone()).unwrap();
        // Positive feedback through Kp = −3 puts a pole in the RHP.
        let gains = PiGains::new(Matrix::<f64>::from_rows(&[[-3.0]]).unwrap(), one).unwrap();
        assert!(!is_internally_stabilizing(&plant, &gains).unwrap());
    }
}
