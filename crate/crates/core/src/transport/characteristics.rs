use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::Flux;
use crate::sampled::SampledFunction;
use crate::scalar::{linspace, Real};

/// Default inversion tolerance, in units of `x`.
pub const INVERSION_TOL: f64 = 1e-10;
pub const INVERSION_MAX_ITER: usize = 200;
/// A flow counts as monotone only when every difference quotient exceeds this.
pub const MONOTONE_MARGIN: f64 = 1e-10;

/// Scalar evaluation rule shared between threads.
pub type Rule<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// The characteristic map `theta_t(y) = y + t a(u0(y))` sampled on `y_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicFlow<T> {
    pub y_grid: Vec<T>,
    pub theta: Vec<T>,
    pub time: T,
    pub monotone: bool,
    pub min_slope: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult<T> {
    pub solution: SampledFunction<T>,
    pub time: T,
    pub inversion_tol: T,
    pub max_inversion_residual: T,
}

fn check_grid<T: Real>(y: &[T]) -> Result<()> {
    if y.len() < 2 {
        return Err(Error::InvalidInput("grid needs at least two points".into()));
    }
    if y.iter().any(|v| !v.is_finite()) || y.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

pub fn characteristic_flow<T: Real>(
    flux: &Flux<T>,
    u0: impl Fn(T) -> T,
    t: T,
    y_grid: &[T],
) -> Result<CharacteristicFlow<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("time {t} must be finite and >= 0")));
    }
    check_grid(y_grid)?;
    let a = y_grid.iter().map(|&y| flux.speed(u0(y))).collect::<Result<Vec<T>>>()?;
    let theta = y_grid.iter().zip(&a).map(|(&y, &a)| y + t * a).collect();
    // 1 + t Δa/Δy rather than Δθ/Δy: θ is rounded at its own magnitude, which swamps
    // grid spacings far below it
    let min_slope = y_grid
        .windows(2)
        .zip(a.windows(2))
        .map(|(y, a)| T::one() + t * ((a[1] - a[0]) / (y[1] - y[0])))
        .fold(T::infinity(), T::min);
    Ok(CharacteristicFlow {
        y_grid: y_grid.to_vec(),
        theta,
        time: t,
        monotone: min_slope > T::lit(MONOTONE_MARGIN),
        min_slope,
    })
}

/// `1 / max(0, sup -Δ[a(u0)]/Δy)` over the grid; infinite when `a∘u0` never decreases.
pub fn shock_time<T: Real>(flux: &Flux<T>, u0: impl Fn(T) -> T, y_grid: &[T]) -> Result<T> {
    check_grid(y_grid)?;
    let a = y_grid.iter().map(|&y| flux.speed(u0(y))).collect::<Result<Vec<T>>>()?;
    let worst =
        y_grid.windows(2).zip(a.windows(2)).map(|(y, a)| -(a[1] - a[0]) / (y[1] - y[0])).fold(T::zero(), T::max);
    Ok(if worst > T::zero() { T::one() / worst } else { T::infinity() })
}

/// Cell `k` with `theta[k] <= x <= theta[k+1]` and the linear-interpolation preimage.
fn locate<T: Real>(flow: &CharacteristicFlow<T>, x: T) -> Result<(usize, T)> {
    if !flow.monotone {
        return Err(Error::NonMonotone);
    }
    let n = flow.theta.len();
    let (lo, hi) = (flow.theta[0], flow.theta[n - 1]);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfRange { x: x.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let i = flow.theta.partition_point(|&v| v <= x);
    if i == n {
        return Ok((n - 2, flow.y_grid[n - 1]));
    }
    let k = i - 1;
    if x == flow.theta[k] {
        return Ok((k, flow.y_grid[k]));
    }
    let (t0, t1) = (flow.theta[k], flow.theta[k + 1]);
    let (y0, y1) = (flow.y_grid[k], flow.y_grid[k + 1]);
    Ok((k, y0 + (x - t0) / (t1 - t0) * (y1 - y0)))
}

/// Preimage of `x` under the sampled flow, linear between grid cells.
pub fn invert_flow<T: Real>(flow: &CharacteristicFlow<T>, x: T) -> Result<T> {
    locate(flow, x).map(|(_, y)| y)
}

/// Preimage under the exact map `theta`, starting from the sampled flow and bisecting inside
/// the bracketing cell. Returns the point and its residual `|theta(y) - x|`.
fn invert_exact<T: Real>(flow: &CharacteristicFlow<T>, theta: impl Fn(T) -> T, x: T, tol: T) -> Result<(T, T)> {
    let (k, guess) = locate(flow, x)?;
    let r = (theta(guess) - x).abs();
    if r <= tol {
        return Ok((guess, r));
    }
    let (mut a, mut b) = (flow.y_grid[k], flow.y_grid[k + 1]);
    let mut best = (guess, r);
    for _ in 0..INVERSION_MAX_ITER {
        let m = (a + b) / T::lit(2.0);
        if m <= a || m >= b {
            break;
        }
        let g = theta(m) - x;
        if g.abs() < best.1 {
            best = (m, g.abs());
        }
        if g.abs() <= tol {
            break;
        }
        if g < T::zero() {
            a = m;
        } else {
            b = m;
        }
    }
    for y in [a, b] {
        let r = (theta(y) - x).abs();
        if r < best.1 {
            best = (y, r);
        }
    }
    Ok(best)
}

fn inversion_tol<T: Real>(theta: &[T]) -> T {
    let scale = theta.iter().fold(T::one(), |m, v| m.max(v.abs()));
    T::lit(INVERSION_TOL).max(T::epsilon() * scale * T::lit(64.0))
}

/// Initial data that varies only on `[lo, hi]` and is constant outside, with the sampling
/// used to check the characteristic flow over the transition.
#[derive(Clone)]
pub struct Transition<T> {
    rule: Rule<T>,
    lo: T,
    hi: T,
    left: T,
    right: T,
    y_grid: Vec<T>,
}

impl<T: Real> Transition<T> {
    /// Constant states are `rule(lo)` to the left and `rule(hi)` to the right.
    pub fn new(rule: Rule<T>, lo: T, hi: T, samples: usize) -> Result<Self> {
        if !(hi > lo) || samples < 2 {
            return Err(Error::InvalidInput("transition needs lo < hi and at least two samples".into()));
        }
        Self::with_y_grid(rule, linspace(lo, hi, samples))
    }

    /// Uses an explicit grid; its ends delimit the transition.
    pub fn with_y_grid(rule: Rule<T>, y_grid: Vec<T>) -> Result<Self> {
        check_grid(&y_grid)?;
        let (lo, hi) = (y_grid[0], y_grid[y_grid.len() - 1]);
        let (left, right) = (rule(lo), rule(hi));
        Ok(Self { rule, lo, hi, left, right, y_grid })
    }

    pub fn eval(&self, y: T) -> T {
        if y < self.lo {
            self.left
        } else if y > self.hi {
            self.right
        } else {
            (self.rule)(y)
        }
    }

    pub fn support(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn left(&self) -> T {
        self.left
    }

    pub fn right(&self) -> T {
        self.right
    }

    pub fn y_grid(&self) -> &[T] {
        &self.y_grid
    }

    pub fn rule(&self) -> &Rule<T> {
        &self.rule
    }
}

impl<T: fmt::Debug> fmt::Debug for Transition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transition")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("left", &self.left)
            .field("right", &self.right)
            .field("samples", &self.y_grid.len())
            .finish()
    }
}

/// Continuous solution at time `t` on `x_grid`: `u0` pulled back through the flow on its
/// image, the constant states outside it.
pub fn evolve_continuous<T: Real>(
    flux: &Flux<T>,
    u0: &Transition<T>,
    t: T,
    x_grid: &[T],
) -> Result<EvolutionResult<T>> {
    flux.speed(u0.left())?;
    flux.speed(u0.right())?;
    let flow = characteristic_flow(flux, |y| u0.eval(y), t, u0.y_grid())?;
    if !flow.monotone {
        return Err(Error::ShockReached { time: t.as_f64() });
    }
    let tol = inversion_tol(&flow.theta);
    if t == T::zero() {
        let values = x_grid.iter().map(|&x| u0.eval(x)).collect();
        return Ok(EvolutionResult {
            solution: SampledFunction::new(x_grid.to_vec(), values)?,
            time: t,
            inversion_tol: tol,
            max_inversion_residual: T::zero(),
        });
    }
    let theta = |y: T| y + t * flux.raw_derivative((u0.rule)(y), 1);
    let (first, last) = (flow.theta[0], flow.theta[flow.theta.len() - 1]);
    let mut worst = T::zero();
    let mut values = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let v = if x < first {
            u0.left()
        } else if x > last {
            u0.right()
        } else {
            let (y, r) = invert_exact(&flow, theta, x, tol)?;
            worst = worst.max(r);
            (u0.rule)(y)
        };
        values.push(v);
    }
    Ok(EvolutionResult {
        solution: SampledFunction::new(x_grid.to_vec(), values)?,
        time: t,
        inversion_tol: tol,
        max_inversion_residual: worst,
    })
}

/// Continuous solution for initial data periodic with `period`, at any points `x_grid`.
/// The flow is sampled with `samples_per_period` points per period over every period whose
/// characteristics reach `[0, period]`; each `x` is reduced modulo the period first.
pub fn evolve_periodic<T: Real>(
    flux: &Flux<T>,
    u0: impl Fn(T) -> T,
    period: T,
    t: T,
    x_grid: &[T],
    samples_per_period: usize,
) -> Result<EvolutionResult<T>> {
    if !(period > T::zero()) || samples_per_period < 2 {
        return Err(Error::InvalidInput("period must be positive with at least two samples".into()));
    }
    check_grid(x_grid)?;
    let h = period / T::from_usize_lossy(samples_per_period);
    let one_period: Vec<T> = (0..samples_per_period).map(|j| T::from_usize_lossy(j) * h).collect();
    let amax = one_period
        .iter()
        .map(|&y| flux.speed(u0(y)).map(T::abs))
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .fold(T::zero(), T::max);
    if t == T::zero() {
        let values = x_grid.iter().map(|&x| u0(x)).collect();
        let tol = T::lit(INVERSION_TOL);
        return Ok(EvolutionResult {
            solution: SampledFunction::new(x_grid.to_vec(), values)?,
            time: t,
            inversion_tol: tol,
            max_inversion_residual: T::zero(),
        });
    }
    let reach = t * amax;
    let first = (-reach / h).floor() - T::lit(2.0);
    let last = ((period + reach) / h).ceil() + T::lit(2.0);
    let count = (last - first).to_usize().ok_or_else(|| Error::InvalidInput("grid too large".into()))? + 1;
    let y_grid: Vec<T> = (0..count).map(|j| (first + T::from_usize_lossy(j)) * h).collect();
    let flow = characteristic_flow(flux, &u0, t, &y_grid)?;
    if !flow.monotone {
        return Err(Error::ShockReached { time: t.as_f64() });
    }
    let tol = inversion_tol(&flow.theta);
    let theta = |y: T| y + t * flux.raw_derivative(u0(y), 1);
    let mut worst = T::zero();
    let mut values = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let reduced = x - (x / period).floor() * period;
        let (y, r) = invert_exact(&flow, theta, reduced, tol)?;
        worst = worst.max(r);
        values.push(u0(y));
    }
    Ok(EvolutionResult {
        solution: SampledFunction::new(x_grid.to_vec(), values)?,
        time: t,
        inversion_tol: tol,
        max_inversion_residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::Interval;

    fn burgers() -> Flux<f64> {
        Flux::burgers(Interval::new(-2.0, 2.0).unwrap())
    }

    #[test]
    fn flow_examples() {
        let y = linspace(0.0, 1.0, 11);
        let f = characteristic_flow(&burgers(), |y| y, 1.0, &y).unwrap();
        assert!(f.monotone);
        for (a, b) in f.theta.iter().zip(&y) {
            assert_eq!(*a, 2.0 * b);
        }
        let f = characteristic_flow(&burgers(), |y| -y, 1.0, &y).unwrap();
        assert!(!f.monotone && f.theta.iter().all(|&v| v == 0.0));
        let f =
            characteristic_flow(&Flux::cubic(Interval::new(-1.0, 1.0).unwrap()), |y: f64| y.sin(), 0.0, &y).unwrap();
        assert_eq!((f.theta.clone(), f.min_slope), (y.clone(), 1.0));
    }

    #[test]
    fn flow_rejects_values_outside_domain() {
        let y = linspace(0.0, 1.0, 5);
        assert!(matches!(characteristic_flow(&burgers(), |y| 3.0 + y, 0.5, &y), Err(Error::Domain { .. })));
    }

    #[test]
    fn shock_time_examples() {
        let y = linspace(-1.0, 1.0, 101);
        assert_eq!(shock_time(&burgers(), |y| -y, &y).unwrap(), 1.0);
        let y = linspace(0.0, 2.0 * std::f64::consts::PI, 2001);
        assert!((shock_time(&burgers(), f64::sin, &y).unwrap() - 1.0).abs() < 0.02);
        assert!(shock_time(&burgers(), |y: f64| y.tanh(), &linspace(-1.0, 1.0, 51)).unwrap().is_infinite());
    }

    #[test]
    fn inversion_examples() {
        let y = linspace(0.0, 1.0, 11);
        let f = characteristic_flow(&burgers(), |y| y, 1.0, &y).unwrap();
        assert!((invert_flow(&f, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let id = characteristic_flow(&burgers(), |y| y, 0.0, &y).unwrap();
        assert!((invert_flow(&id, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(invert_flow(&f, 2.5), Err(Error::OutOfRange { .. })));
        let bad = characteristic_flow(&burgers(), |y| -y, 1.0, &y).unwrap();
        assert_eq!(invert_flow(&bad, 0.0), Err(Error::NonMonotone));
    }

    #[test]
    fn evolve_examples() {
        let ramp = Transition::new(Arc::new(|y: f64| y), 0.0, 1.0, 101).unwrap();
        let r = evolve_continuous(&burgers(), &ramp, 1.0, &[-1.0, 0.5, 1.0, 3.0]).unwrap();
        assert_eq!(r.solution.values()[0], 0.0);
        assert!((r.solution.values()[1] - 0.25).abs() < 1e-10);
        assert!((r.solution.values()[2] - 0.5).abs() < 1e-10);
        assert_eq!(r.solution.values()[3], 1.0);
        assert!(r.max_inversion_residual <= r.inversion_tol);

        let wave = Transition::new(Arc::new(|y: f64| 0.5 * (3.0 * y).sin()), 0.0, 1.0, 301).unwrap();
        let x = linspace(-0.5, 1.5, 77);
        let r = evolve_continuous(&burgers(), &wave, 0.0, &x).unwrap();
        for (&xi, &v) in x.iter().zip(r.solution.values()) {
            assert_eq!(v, wave.eval(xi));
        }

        let focus = Transition::new(Arc::new(|y: f64| -y), 0.0, 1.0, 11).unwrap();
        assert!(matches!(evolve_continuous(&burgers(), &focus, 1.0, &[0.0, 1.0]), Err(Error::ShockReached { .. })));
    }

    #[test]
    fn periodic_evolution_solves_implicit_relation() {
        let u0 = |y: f64| 0.3 * (2.0 * std::f64::consts::PI * y).sin();
        let x = linspace(0.0, 1.0, 201);
        let t = 0.4;
        let r = evolve_periodic(&burgers(), u0, 1.0, t, &x, 512).unwrap();
        // u = u0(x - t u)
        for (&xi, &u) in x.iter().zip(r.solution.values()) {
            assert!((u - u0(xi - t * u)).abs() < 1e-9);
        }
        assert!(evolve_periodic(&burgers(), u0, 1.0, 0.6, &x, 512).is_err());
        // periodicity: a window many periods long reuses the same characteristics
        let far: Vec<f64> = x.iter().map(|v| v + 37.0).collect();
        let r2 = evolve_periodic(&burgers(), u0, 1.0, t, &far, 512).unwrap();
        for (a, b) in r.solution.values().iter().zip(r2.solution.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
