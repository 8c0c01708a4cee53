use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parameters of `g(x) = x^b cos(pi / x^c)` with `b = s + s^2/eta`, `c = s/eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams<T> {
    pub s: T,
    pub eta: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> OscillatorParams<T> {
    pub fn new(s: T, eta: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidInput(format!("s = {s} must lie in (0, 1)")));
        }
        if !(eta > T::zero() && eta < T::one() - s) {
            return Err(Error::InvalidInput(format!("eta = {eta} must lie in (0, 1 - s)")));
        }
        Ok(Self { s, eta, b: s + s * s / eta, c: s / eta })
    }
}

/// `g(0) = 0`, `g(x) = x^b cos(pi / x^c)` on `(0, 1]`.
pub fn oscillator<T: Real>(params: &OscillatorParams<T>, x: T) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::Domain { value: x.as_f64(), lo: 0.0, hi: 1.0 });
    }
    Ok(eval(params, x))
}

#[inline]
pub(crate) fn eval<T: Real>(params: &OscillatorParams<T>, x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    if x == T::one() {
        return -T::one();
    }
    x.powf(params.b) * (T::PI() / x.powf(params.c)).cos()
}

/// `x_k = k^{-1/c}`, `k = 1..=n`, where `cos(pi / x^c) = ±1`.
pub fn oscillator_extrema<T: Real>(params: &OscillatorParams<T>, n: usize) -> Vec<T> {
    let e = -T::one() / params.c;
    (1..=n).map(|k| T::from_usize_lossy(k).powf(e)).collect()
}

/// `|g(x_{k+1}) - g(x_k)| = x_{k+1}^b + x_k^b`, `k = 1..=n`, from `g(x_k) = (-1)^k x_k^b`.
pub fn extrema_amplitudes<T: Real>(params: &OscillatorParams<T>, n: usize) -> Vec<T> {
    let xs = oscillator_extrema(params, n + 1);
    xs.windows(2).map(|w| w[1].powf(params.b) + w[0].powf(params.b)).collect()
}
