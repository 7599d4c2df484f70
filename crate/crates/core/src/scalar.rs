//! Scalar abstraction shared by the numeric kernels.
//!
//! Filtering, rank correlation, calibration and the set-theoretic metrics are
//! written once against [`Scalar`] and instantiated for `f32` and `f64`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sum of a slice.
pub(crate) fn sum<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, &x| acc + x)
}

/// Arithmetic mean; `None` for an empty slice.
pub(crate) fn mean<T: Scalar>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        None
    } else {
        Some(sum(xs) / T::from_count(xs.len()))
    }
}

/// Percentile with linear interpolation between order statistics
/// (`h = (n - 1) p`). `p` in `[0, 1]`; `None` for empty input.
pub fn percentile<T: Scalar>(values: &[T], p: T) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Some(percentile_sorted(&sorted, p))
}

pub(crate) fn percentile_sorted<T: Scalar>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = T::from_count(n - 1) * p.max(T::zero()).min(T::one());
    let lo = h.floor();
    let lo_idx = lo.to_usize().unwrap_or(0).min(n - 1);
    let hi_idx = (lo_idx + 1).min(n - 1);
    let frac = h - lo;
    sorted[lo_idx] + frac * (sorted[hi_idx] - sorted[lo_idx])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_matches_direct_formula() {
        let xs = [0.3, 0.1, 0.9, 0.5, 0.7];
        assert_eq!(percentile(&xs, 0.5), Some(0.5));
        // sorted: .1 .3 .5 .7 .9; h = 4 * .25 = 1 -> .3
        assert_eq!(percentile(&xs, 0.25), Some(0.3));
        let ys = [1.0f64, 2.0, 3.0, 4.0];
        // h = 3 * .25 = .75 -> 1 + .75
        assert!((percentile(&ys, 0.25).unwrap() - 1.75).abs() < 1e-15);
        assert_eq!(percentile::<f64>(&[], 0.5), None);
    }

    #[test]
    fn mean_works_for_f32() {
        assert_eq!(mean(&[1.0f32, 2.0, 3.0]), Some(2.0));
    }
}
