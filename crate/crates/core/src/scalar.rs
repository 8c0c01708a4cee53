use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating point scalar the numerics are generic over: f32 or f64.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an f64 literal, panicking only for unrepresentable constants.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `lo, lo + h, ..., hi` with `n` points.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    assert!(n >= 2, "linspace needs at least two points");
    let h = (hi - lo) / T::from_usize_lossy(n - 1);
    let mut v: Vec<T> = (0..n).map(|i| lo + h * T::from_usize_lossy(i)).collect();
    v[n - 1] = hi;
    v
}

/// `n` points geometrically spaced between `lo > 0` and `hi`.
pub fn geomspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(T::exp).collect()
}
