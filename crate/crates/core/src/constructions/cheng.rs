use std::sync::Arc;

use super::oscillator::{eval, oscillator_extrema, OscillatorParams};
use crate::error::{Error, Result};
use crate::flux::Flux;
use crate::scalar::{geomspace, Real};
use crate::transport::{characteristic_flow, Transition};

/// Flows certified by [`select_delta`] keep every difference quotient above this.
pub const MONOTONICITY_MARGIN: f64 = 1e-6;
/// Time samples of `[0, T]` checked by [`select_delta`].
pub const DELTA_TIME_SAMPLES: usize = 32;
const DEFAULT_GRID_POINTS: usize = 20_000;
const SUBDIVISIONS: usize = 8;
const MAX_HALVINGS: usize = 1100;

/// Initial data `ū` for `x < 0`, `ū + δ g(x)` on `[0, 1]`, `ū - δ` for `x > 1`.
///
/// When `ū` sits on the boundary of the flux domain the oscillation is folded to the
/// inside: `ū + sign·δ|g(x)|`, with `sign` pointing into the domain.
#[derive(Debug, Clone)]
pub struct ChengData<T> {
    pub flux: Flux<T>,
    pub base_state: T,
    pub delta: T,
    pub params: OscillatorParams<T>,
    pub target_t: T,
    /// Time up to which the sampled flow stays monotone with the margin.
    pub certified_t_delta: T,
    /// Smallest difference quotient of the flow seen over the checked times.
    pub monotonicity_margin: T,
    /// `None` in the interior; `Some(±1)` for the one-sided boundary variant.
    pub boundary_sign: Option<T>,
    pub y_grid: Vec<T>,
}

impl<T: Real> ChengData<T> {
    /// The transition part of the data on its certification grid.
    pub fn transition(&self) -> Transition<T> {
        let (u, d, p, sign) = (self.base_state, self.delta, self.params, self.boundary_sign);
        let rule = Arc::new(move |x: T| profile(u, d, &p, sign, x));
        Transition::with_y_grid(rule, self.y_grid.clone()).expect("certification grid is valid")
    }
}

#[inline]
fn profile<T: Real>(base: T, delta: T, params: &OscillatorParams<T>, sign: Option<T>, x: T) -> T {
    let x = x.max(T::zero()).min(T::one());
    match sign {
        None => base + delta * eval(params, x),
        Some(s) => base + s * delta * eval(params, x).abs(),
    }
}

pub fn cheng_initial_data<T: Real>(data: &ChengData<T>, x: T) -> T {
    let x = if x < T::zero() {
        T::zero()
    } else if x > T::one() {
        T::one()
    } else {
        x
    };
    profile(data.base_state, data.delta, &data.params, data.boundary_sign, x)
}

/// Grid of `[0, 1]` following the accumulation of the `x_k = k^{-1/c}` at 0: each
/// `[x_{k+1}, x_k]` is cut into equal pieces, then a geometric tail runs down towards 0.
pub fn cheng_grid<T: Real>(params: &OscillatorParams<T>, points: usize) -> Vec<T> {
    let points = points.max(200);
    let tail = points / 5;
    let k = (points - tail) / SUBDIVISIONS;
    let xs = oscillator_extrema(params, k);
    let mut grid = Vec::with_capacity(points + 2);
    grid.push(T::zero());
    let x_last = xs[xs.len() - 1];
    grid.extend(geomspace(x_last * T::lit(1e-12), x_last, tail + 1).into_iter().take(tail));
    for w in xs.windows(2).rev() {
        let (lo, hi) = (w[1], w[0]);
        for j in 0..SUBDIVISIONS {
            grid.push(lo + (hi - lo) * T::from_usize_lossy(j) / T::from_usize_lossy(SUBDIVISIONS));
        }
    }
    grid.push(T::one());
    grid.dedup();
    grid
}

/// Halves `δ` from the largest value keeping the data inside the flux domain until the
/// sampled characteristic flow has every difference quotient above the margin for all
/// sampled times in `[0, T]`.
pub fn select_delta<T: Real>(
    flux: &Flux<T>,
    base_state: T,
    params: OscillatorParams<T>,
    target_t: T,
) -> Result<ChengData<T>> {
    if !(target_t >= T::zero()) || !target_t.is_finite() {
        return Err(Error::InvalidInput(format!("target time {target_t} must be finite and >= 0")));
    }
    let k = flux.domain();
    k.check(base_state)?;
    let (room_lo, room_hi) = (base_state - k.lo(), k.hi() - base_state);
    let (mut delta, boundary_sign) = if room_lo > T::zero() && room_hi > T::zero() {
        (room_lo.min(room_hi), None)
    } else if room_lo == T::zero() {
        (room_hi, Some(T::one()))
    } else {
        (room_lo, Some(-T::one()))
    };
    let y_grid = cheng_grid(&params, DEFAULT_GRID_POINTS);
    let margin = T::lit(MONOTONICITY_MARGIN);
    let times: Vec<T> = (0..DELTA_TIME_SAMPLES)
        .map(|j| target_t * T::from_usize_lossy(j) / T::from_usize_lossy(DELTA_TIME_SAMPLES - 1))
        .collect();
    for _ in 0..MAX_HALVINGS {
        let data = ChengData {
            flux: flux.clone(),
            base_state,
            delta,
            params,
            target_t,
            certified_t_delta: T::zero(),
            monotonicity_margin: T::zero(),
            boundary_sign,
            y_grid: y_grid.clone(),
        };
        let u0 = |y: T| cheng_initial_data(&data, y);
        let mut worst = T::infinity();
        let mut ok = true;
        for &t in &times {
            let flow = characteristic_flow(flux, u0, t, &y_grid)?;
            worst = worst.min(flow.min_slope);
            if !(flow.min_slope > margin) {
                ok = false;
                break;
            }
        }
        if ok {
            // the quotients are affine in t: 1 + t q_i, so the margin holds until
            // (1 - margin) / max(-q_i)
            let a: Vec<T> = y_grid.iter().map(|&y| flux.raw_derivative(u0(y), 1)).collect();
            let steepest = y_grid
                .windows(2)
                .zip(a.windows(2))
                .map(|(y, a)| -(a[1] - a[0]) / (y[1] - y[0]))
                .fold(T::zero(), T::max);
            let certified = if steepest > T::zero() { (T::one() - margin) / steepest } else { T::infinity() };
            return Ok(ChengData { certified_t_delta: certified, monotonicity_margin: worst, ..data });
        }
        delta = delta / T::lit(2.0);
        if !(delta > T::min_positive_value()) {
            break;
        }
    }
    Err(Error::NoAdmissibleDelta { delta: delta.as_f64() })
}
