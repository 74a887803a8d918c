//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Euclid, Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating point scalar the pipeline is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + Euclid + FromPrimitive + ToPrimitive + FftNum + Sum + Debug + Display + Send + Sync
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `10·log10(x)`.
#[inline]
pub fn to_db<T: Real>(linear: T) -> T {
    T::lit(10.0) * linear.log10()
}

/// Inverse of [`to_db`].
#[inline]
pub fn from_db<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// Fractional part of `a·b` in cycles, in `[-0.5, 0.5]`.
///
/// The product is split into an exact high/low pair with a fused multiply-add,
/// so the result keeps full relative precision even when `a·b` is many
/// thousands of cycles (delays in the hundreds of ns at tens of GHz).
#[inline]
pub fn frac_product<T: Real>(a: T, b: T) -> T {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    (hi - hi.round()) + lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_round_trip() {
        assert!((to_db(from_db(-84.5_f64)) + 84.5).abs() < 1e-12);
        assert_eq!(to_db(1.0_f64), 0.0);
    }

    #[test]
    fn frac_product_matches_exact_integer_case() {
        // 29 GHz * 2^-30 s = 27.0079... cycles
        let f = 29.0e9_f64;
        let t = 2.0_f64.powi(-30);
        let frac = frac_product(f, t);
        let expected = 29.0e9 / 1073741824.0 - 27.0;
        assert!((frac - expected).abs() < 1e-15);
        assert_eq!(frac_product(2.0_f64.powi(33), 2.0_f64.powi(-31)), 0.0);
        // 5e-10 is not representable; the residual of the rounded factor survives
        assert!(frac_product(2.0e9_f64, 5.0e-10).abs() < 1e-15);
    }
}
