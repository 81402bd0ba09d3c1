use crate::linalg::{lu, LinalgError, Matrix};
use crate::scalar::Scalar;

// Degree-13 Padé coefficients and the 1-norm bound up to which the
// unscaled approximant is accurate to double precision.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371_920_351_148_152;

/// Matrix exponential by scaling and squaring around a degree-13 Padé
/// approximant.
pub fn matrix_exp<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let norm = m.norm_1();
    if norm == T::zero() {
        return Ok(Matrix::identity(n));
    }
    let ratio = (norm / T::lit(THETA13)).to_f64_lossy();
    let squarings = if ratio > 1.0 { ratio.log2().ceil() as i32 } else { 0 };
    let a = m.scale(T::lit(2f64.powi(-squarings)));

    let b: Vec<T> = PADE13.iter().map(|&c| T::lit(c)).collect();
    let id = Matrix::<T>::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let lin = |c6: T, c4: T, c2: T, c0: Option<T>| {
        let mut out = &(&a6.scale(c6) + &a4.scale(c4)) + &a2.scale(c2);
        if let Some(c0) = c0 {
            out = &out + &id.scale(c0);
        }
        out
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], None)) + &lin(b[7], b[5], b[3], Some(b[1]));
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], None)) + &lin(b[6], b[4], b[2], Some(b[0]));

    let mut r = lu::solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
