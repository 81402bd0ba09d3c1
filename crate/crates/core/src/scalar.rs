use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point scalar the whole toolkit is generic over.
///
/// Implemented for `f32` and `f64`. Default tolerances are expressed in
/// terms of [`Float::epsilon`] where the precision matters, so the same code
/// path runs (less accurately) in single precision.
pub trait Scalar:
    'static
    + Float
    + FromPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
{
    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossy conversion back to `f64`, used for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// `max(floor, factor * epsilon)`; keeps fixed double-precision
    /// tolerances meaningful in single precision.
    #[inline]
    fn tol_at_least(floor: f64, factor: f64) -> Self {
        let eps_based = Self::epsilon() * Self::lit(factor);
        let floor = Self::lit(floor);
        if eps_based > floor {
            eps_based
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_floor_respects_precision() {
        assert_eq!(<f64 as Scalar>::tol_at_least(1e-10, 100.0), 1e-10);
        let t32 = <f32 as Scalar>::tol_at_least(1e-10, 100.0);
        assert!(t32 > 1e-6);
    }
}
