//! Floating point scalar abstraction shared by the analytic modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the analytic code is generic over: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Absolute slack for ordering and identity checks.
    ///
    /// The requested `base` tolerance is widened to a few ulps of one so the
    /// same checks remain meaningful in single precision.
    fn slack(base: f64) -> Self {
        let floor = Self::epsilon() * Self::of(64.0);
        Self::of(base).max(floor)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `|a - b| <= tol * max(|a|, |b|)`, with `tol` widened by [`Scalar::slack`].
pub fn rel_close<T: Scalar>(a: T, b: T, tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= T::slack(tol) * scale
}

pub(crate) fn sum<T: Scalar>(it: impl IntoIterator<Item = T>) -> T {
    it.into_iter().fold(T::zero(), |acc, v| acc + v)
}

pub(crate) fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}
