use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampled::SampledFunction;
use crate::scalar::Real;

/// Gagliardo seminorm `(∬ |u(x)-u(y)|^p / |x-y|^{1+sp} dx dy)^{1/p}` over the sampled
/// range, by the trapezoidal product rule with the diagonal `x = y` (the band closer than one
/// grid spacing) left out.
pub fn gagliardo_seminorm<T: Real>(f: &SampledFunction<T>, s: T, p: T) -> Result<T> {
    Ok(gagliardo_seminorms(f, &[s], p)?[0])
}

/// Seminorms for several `s` sharing one pass over the sample pairs when the grid is uniform.
pub fn gagliardo_seminorms<T: Real>(f: &SampledFunction<T>, s: &[T], p: T) -> Result<Vec<T>> {
    if s.iter().any(|&v| !(v > T::zero() && v < T::one())) {
        return Err(Error::InvalidInput("every s must lie in (0, 1)".into()));
    }
    if !(p >= T::one()) {
        return Err(Error::InvalidInput(format!("p = {p} must be >= 1")));
    }
    let integrals = if f.is_uniform() { uniform_integrals(f, s, p) } else { general_integrals(f, s, p) };
    Ok(integrals.into_iter().map(|v| v.powf(T::one() / p)).collect())
}

fn trapezoid_weights<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let half = T::lit(0.5);
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { T::zero() };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { T::zero() };
            half * (left + right)
        })
        .collect()
}

#[inline]
fn pow_abs<T: Real>(d: T, p: T) -> T {
    if p == T::one() {
        d.abs()
    } else {
        d.abs().powf(p)
    }
}

/// On a uniform grid the kernel depends on the index offset only, so
/// `I(s) = 2 sum_k (k h)^{-(1+sp)} D_k` with `D_k = sum_i w_i w_{i+k} |u_i - u_{i+k}|^p`.
fn uniform_integrals<T: Real>(f: &SampledFunction<T>, s: &[T], p: T) -> Vec<T> {
    let x = f.abscissae();
    let u = f.values();
    let n = x.len();
    let h = (f.end() - f.start()) / T::from_usize_lossy(n - 1);
    let w = trapezoid_weights(x);
    let structure: Vec<T> = (1..n)
        .into_par_iter()
        .map(|k| (0..n - k).fold(T::zero(), |acc, i| acc + w[i] * w[i + k] * pow_abs(u[i] - u[i + k], p)))
        .collect();
    let two = T::lit(2.0);
    s.iter()
        .map(|&sv| {
            let e = -(T::one() + sv * p);
            structure
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (k, &d)| acc + d * (T::from_usize_lossy(k + 1) * h).powf(e))
                * two
        })
        .collect()
}

fn general_integrals<T: Real>(f: &SampledFunction<T>, s: &[T], p: T) -> Vec<T> {
    let x = f.abscissae();
    let u = f.values();
    let n = x.len();
    let w = trapezoid_weights(x);
    let two = T::lit(2.0);
    s.iter()
        .map(|&sv| {
            let e = -(T::one() + sv * p);
            let rows: Vec<T> = (0..n)
                .into_par_iter()
                .map(|i| {
                    (i + 1..n)
                        .fold(T::zero(), |acc, j| acc + w[i] * w[j] * pow_abs(u[i] - u[j], p) * (x[j] - x[i]).powf(e))
                })
                .collect();
            rows.into_iter().fold(T::zero(), |a, b| a + b) * two
        })
        .collect()
}
