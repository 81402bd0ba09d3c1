//! H∞ norm of a stable continuous-time system by Hamiltonian bisection,
//! seeded and cross-checked by a refined frequency sweep.
//!
//! For `γ > σ_max(D)`, `γ` is below the norm exactly when the Hamiltonian
//!
//! ```text
//! H(γ) = [ A − B R⁻¹DᵀC        −γ B R⁻¹ Bᵀ          ]
//!        [ γ Cᵀ S⁻¹ C          −Aᵀ + CᵀD R⁻¹ Bᵀ     ]
//! R = DᵀD − γ²I,   S = DDᵀ − γ²I
//! ```
//!
//! has an eigenvalue on the imaginary axis. Imaginary-axis candidates are
//! never trusted on their own: the gain is evaluated at each candidate and
//! between consecutive candidates, and only an attained gain raises the lower
//! bound.

use crate::linalg::{self, Matrix};
use crate::lti::{gain_at, FrequencyGrid, LtiError, StateSpace, STABILITY_MARGIN};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct HinfOptions<T> {
    /// Relative width `(upper − lower)/lower` at which bisection stops.
    pub tol: T,
    /// Initial sweep; refined around its local maxima.
    pub grid: FrequencyGrid<T>,
    pub refine_levels: usize,
    /// Required distance of the poles from the imaginary axis.
    pub margin: T,
    pub max_steps: usize,
}

impl<T: Scalar> Default for HinfOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tol_at_least(1e-10, 100.0),
            grid: FrequencyGrid::log(T::lit(1e-4), T::lit(1e4), 400),
            refine_levels: 3,
            margin: T::lit(STABILITY_MARGIN),
            max_steps: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HinfNorm<T> {
    /// Certified attained gain: some frequency reaches it.
    pub norm: T,
    /// Frequency attaining `norm`; `+∞` when only the feedthrough does.
    pub peak_omega: T,
    pub lower: T,
    /// No imaginary-axis Hamiltonian eigenvalue exists at this level.
    pub upper: T,
    /// Peak of the refined sweep alone.
    pub grid_estimate: T,
    pub steps: usize,
}

const MAX_REFINED_PEAKS: usize = 8;

struct Peak<T> {
    gain: T,
    omega: T,
}

impl<T: Scalar> Peak<T> {
    // Near-ties go to the lower frequency.
    fn offer(&mut self, gain: T, omega: T) {
        let slack = T::lit(100.0) * T::epsilon() * self.gain.abs();
        if gain > self.gain + slack {
            self.gain = gain;
            self.omega = omega;
        } else if gain >= self.gain - slack && omega < self.omega {
            self.gain = self.gain.max(gain);
            self.omega = omega;
        }
    }
}

pub fn hinf_norm<T: Scalar>(sys: &StateSpace<T>, opts: &HinfOptions<T>) -> Result<HinfNorm<T>, LtiError> {
    opts.grid.validate()?;
    let d_norm = linalg::spectral_norm(&sys.d);
    let mut best = Peak {
        gain: d_norm,
        omega: T::infinity(),
    };
    if sys.n_states() == 0 || sys.n_inputs() == 0 || sys.n_outputs() == 0 {
        return Ok(HinfNorm {
            norm: d_norm,
            peak_omega: best.omega,
            lower: d_norm,
            upper: d_norm,
            grid_estimate: d_norm,
            steps: 0,
        });
    }
    let abscissa = sys.spectral_abscissa()?;
    if !(abscissa < -opts.margin) {
        return Err(LtiError::NotHurwitz {
            abscissa: abscissa.to_f64_lossy(),
        });
    }

    let sweep = refined_sweep(sys, opts)?;
    let mut grid_estimate = T::zero();
    for &(w, g) in &sweep {
        grid_estimate = grid_estimate.max(g);
        best.offer(g, w);
    }

    let mut lo = best.gain;
    if lo == T::zero() {
        return Ok(HinfNorm {
            norm: lo,
            peak_omega: T::zero(),
            lower: lo,
            upper: lo,
            grid_estimate,
            steps: 0,
        });
    }
    let mut hi = lo * T::lit(2.0);
    let imag_tol = T::tol_at_least(1e-6, 1e4);
    let mut steps = 0;

    // Grow the upper bound until the Hamiltonian certifies it.
    while steps < opts.max_steps {
        steps += 1;
        match probe(sys, hi, imag_tol)? {
            Some((g, w)) if g > hi => {
                best.offer(g, w);
                lo = best.gain;
                hi = lo * T::lit(2.0);
            }
            Some((g, w)) => {
                best.offer(g, w);
                lo = best.gain;
                break;
            }
            None => break,
        }
    }

    while (hi - lo) > opts.tol * lo && steps < opts.max_steps {
        steps += 1;
        let mid = (lo + hi) / T::lit(2.0);
        match probe(sys, mid, imag_tol)? {
            Some((g, w)) if g > mid => {
                best.offer(g, w);
                lo = best.gain;
                if lo >= hi {
                    hi = lo * (T::one() + opts.tol);
                }
            }
            Some((g, w)) => {
                best.offer(g, w);
                lo = best.gain.max(lo);
                hi = mid;
            }
            None => hi = mid,
        }
    }

    Ok(HinfNorm {
        norm: lo,
        peak_omega: best.omega,
        lower: lo,
        upper: hi.max(lo),
        grid_estimate,
        steps,
    })
}

/// Largest gain among the imaginary-axis candidates of `H(γ)` and the
/// midpoints between them; `None` without candidates.
fn probe<T: Scalar>(sys: &StateSpace<T>, gamma: T, imag_tol: T) -> Result<Option<(T, T)>, LtiError> {
    let h = hamiltonian(sys, gamma)?;
    let eigs = linalg::eigenvalues(&h)?;
    let mut freqs: Vec<T> = eigs
        .iter()
        .filter(|z| z.re.abs() <= imag_tol * (T::one() + z.norm()))
        .map(|z| z.im.abs())
        .collect();
    if freqs.is_empty() {
        return Ok(None);
    }
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    freqs.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * (T::one() + b.abs()));
    let mut points = Vec::with_capacity(2 * freqs.len() + 1);
    let mut prev = T::zero();
    points.push(prev);
    for &w in &freqs {
        points.push((prev + w) / T::lit(2.0));
        points.push(w);
        prev = w;
    }
    let mut top: Option<(T, T)> = None;
    for w in points {
        let g = gain_at(sys, w)?;
        if top.is_none_or(|(tg, _)| g > tg) {
            top = Some((g, w));
        }
    }
    Ok(top)
}

fn hamiltonian<T: Scalar>(sys: &StateSpace<T>, gamma: T) -> Result<Matrix<T>, LtiError> {
    let (a, b, c, d) = (&sys.a, &sys.b, &sys.c, &sys.d);
    let g2 = gamma * gamma;
    let dt = d.transpose();
    let r = &(&dt * d) - &Matrix::identity(d.cols()).scale(g2);
    let s = &(d * &dt) - &Matrix::identity(d.rows()).scale(g2);
    let r_inv = linalg::inverse(&r)?;
    let s_inv = linalg::inverse(&s)?;
    let bt = b.transpose();
    let ct = c.transpose();
    let br = b * &r_inv;
    let h11 = a - &(&(&br * &dt) * c);
    let h12 = (&br * &bt).scale(-gamma);
    let h21 = (&(&ct * &s_inv) * c).scale(gamma);
    let h22 = &(-&a.transpose()) + &(&(&(&ct * d) * &r_inv) * &bt);
    Ok(Matrix::block(&[&[Some(&h11), Some(&h12)], &[Some(&h21), Some(&h22)]]))
}

/// Gains on the grid, then on finer log grids around each local maximum.
fn refined_sweep<T: Scalar>(sys: &StateSpace<T>, opts: &HinfOptions<T>) -> Result<Vec<(T, T)>, LtiError> {
    let mut samples: Vec<(T, T)> = opts
        .grid
        .omegas()
        .into_iter()
        .map(|w| Ok((w, gain_at(sys, w)?)))
        .collect::<Result<_, LtiError>>()?;
    for _ in 0..opts.refine_levels {
        let mut maxima: Vec<usize> = (0..samples.len())
            .filter(|&i| {
                let g = samples[i].1;
                (i == 0 || g >= samples[i - 1].1) && samples.get(i + 1).is_none_or(|r| g >= r.1)
            })
            .collect();
        maxima.sort_by(|&i, &j| samples[j].1.partial_cmp(&samples[i].1).unwrap_or(std::cmp::Ordering::Equal));
        maxima.truncate(MAX_REFINED_PEAKS);
        let mut extra = Vec::new();
        for i in maxima {
            let lo_w = samples[i.saturating_sub(1)].0;
            let hi_w = samples.get(i + 1).map_or(samples[i].0, |r| r.0);
            if !(hi_w > lo_w) {
                continue;
            }
            for k in 1..16 {
                let t = T::lit(k as f64 / 16.0);
                let w = if lo_w > T::zero() {
                    (lo_w.ln() + (hi_w.ln() - lo_w.ln()) * t).exp()
                } else {
                    hi_w * t * t
                };
                extra.push((w, gain_at(sys, w)?));
            }
        }
        if extra.is_empty() {
            break;
        }
        samples.extend(extra);
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        samples.dedup_by(|a, b| a.0 == b.0);
    }
    Ok(samples)
}
