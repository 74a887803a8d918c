//! Azimuth wrapping helpers (all angles in degrees).

use crate::scalar::Real;

/// Wraps an angle to `[-180, 180)`.
#[inline]
pub fn wrap_half_open<T: Real>(deg: T) -> T {
    let full = T::lit(360.0);
    let half = T::lit(180.0);
    let w = (deg + half).rem_euclid(&full) - half;
    // rem_euclid can return `full` itself after rounding
    if w >= half {
        w - full
    } else {
        w
    }
}

/// Wraps an angle difference to `(-180, 180]`.
#[inline]
pub fn wrap_difference<T: Real>(deg: T) -> T {
    -wrap_half_open(-deg)
}

/// `count` angles evenly spaced over the full circle starting at `start`.
pub fn uniform_circle<T: Real>(start: T, count: usize) -> Vec<T> {
    let n = T::from_usize_exact(count);
    (0..count)
        .map(|i| start + T::lit(360.0) * T::from_usize_exact(i) / n)
        .collect()
}
