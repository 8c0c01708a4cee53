use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flux::{Flux, Interval};
use crate::numerics::sign_change_roots;
use crate::sampled::SampledFunction;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Zero-gradient ghost cells.
    Outflow,
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GodunovConfig<T> {
    pub dx: T,
    pub cfl: T,
    pub domain: Interval<T>,
    pub boundary: Boundary,
    /// Ceiling on the number of time steps.
    pub max_steps: usize,
}

impl<T: Real> GodunovConfig<T> {
    pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

    pub fn new(dx: T, cfl: T, domain: Interval<T>, boundary: Boundary) -> Result<Self> {
        if !(dx > T::zero()) || !(dx <= domain.width()) {
            return Err(Error::InvalidInput(format!("dx = {dx} must lie in (0, domain width]")));
        }
        if !(cfl > T::zero() && cfl < T::one()) {
            return Err(Error::InvalidInput(format!("cfl = {cfl} must lie in (0, 1)")));
        }
        Ok(Self { dx, cfl, domain, boundary, max_steps: Self::DEFAULT_MAX_STEPS })
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    /// Number of cells; the spacing actually used is `domain width / cells`.
    pub fn cells(&self) -> usize {
        (self.domain.width() / self.dx).round().to_usize().unwrap_or(1).max(1)
    }

    /// Cell centres.
    pub fn centres(&self) -> Vec<T> {
        let n = self.cells();
        let h = self.domain.width() / T::from_usize_lossy(n);
        (0..n).map(|i| self.domain.lo() + (T::from_usize_lossy(i) + T::lit(0.5)) * h).collect()
    }
}

/// Solver state summary at an output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T> {
    pub t: T,
    pub min: T,
    pub max: T,
    /// `sum u_i dx`, accumulated left to right.
    pub mass: T,
    /// `sum |u_i| dx`, the scale for conservation checks.
    pub abs_mass: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GodunovRun<T> {
    pub solution: SampledFunction<T>,
    pub frames: Vec<Frame<T>>,
    pub steps: usize,
}

/// Godunov's flux `min_{[ul,ur]} f` for `ul <= ur` and `max_{[ur,ul]} f` otherwise,
/// using the sign changes of `f'` inside the interval.
struct NumericalFlux<'a, T> {
    flux: &'a Flux<T>,
    critical: Vec<T>,
}

impl<'a, T: Real> NumericalFlux<'a, T> {
    fn new(flux: &'a Flux<T>) -> Self {
        let d = flux.domain();
        let critical = sign_change_roots(|u| flux.raw_derivative(u, 1), d.lo(), d.hi(), 4001);
        Self { flux, critical }
    }

    #[inline]
    fn eval(&self, ul: T, ur: T) -> T {
        let f = |u| self.flux.raw_derivative(u, 0);
        let (lo, hi, take_min) = if ul <= ur { (ul, ur, true) } else { (ur, ul, false) };
        let pick = |a: T, b: T| if take_min { a.min(b) } else { a.max(b) };
        let mut best = pick(f(ul), f(ur));
        let start = self.critical.partition_point(|&c| c <= lo);
        for &c in self.critical[start..].iter().take_while(|&&c| c < hi) {
            best = pick(best, f(c));
        }
        best
    }
}

fn frame<T: Real>(t: T, u: &[T], dx: T) -> Frame<T> {
    let (mut min, mut max, mut mass, mut abs_mass) = (T::infinity(), T::neg_infinity(), T::zero(), T::zero());
    for &v in u {
        min = min.min(v);
        max = max.max(v);
        mass = mass + v;
        abs_mass = abs_mass + v.abs();
    }
    Frame { t, min, max, mass: mass * dx, abs_mass: abs_mass * dx }
}

const PARALLEL_THRESHOLD: usize = 4096;

/// First-order Godunov evolution of `u0` (sampled at the cell centres, constant beyond its
/// ends) to `t_end`, recording `frames` equally spaced diagnostic frames after the initial one.
pub fn godunov_run<T: Real>(
    flux: &Flux<T>,
    u0: &SampledFunction<T>,
    t_end: T,
    config: &GodunovConfig<T>,
    frames: usize,
) -> Result<GodunovRun<T>> {
    if !(t_end >= T::zero()) || !t_end.is_finite() {
        return Err(Error::InvalidInput(format!("t_end = {t_end} must be finite and >= 0")));
    }
    let frames = frames.max(1);
    let centres = config.centres();
    let n = centres.len();
    let dx = config.domain.width() / T::from_usize_lossy(n);
    let mut u: Vec<T> = centres
        .iter()
        .map(|&x| {
            if x <= u0.start() {
                u0.values()[0]
            } else if x >= u0.end() {
                u0.values()[u0.len() - 1]
            } else {
                u0.interpolate(x).expect("inside sampled range")
            }
        })
        .collect();
    for &v in &u {
        flux.domain().check(v)?;
    }

    let numerical = NumericalFlux::new(flux);
    let interfaces = match config.boundary {
        Boundary::Periodic => n,
        Boundary::Outflow => n + 1,
    };
    // interface k sits between cells k-1 and k (periodic: between k-1 mod n and k)
    let left_of = |k: usize| match config.boundary {
        Boundary::Periodic => (k + n - 1) % n,
        Boundary::Outflow => k.saturating_sub(1),
    };
    let right_of = |k: usize| match config.boundary {
        Boundary::Periodic => k,
        Boundary::Outflow => k.min(n - 1),
    };
    let mut fluxes = vec![T::zero(); interfaces];
    let mut out = vec![frame(T::zero(), &u, dx)];
    let mut t = T::zero();
    let mut steps = 0usize;
    for k in 1..=frames {
        let target = if k == frames { t_end } else { t_end * T::from_usize_lossy(k) / T::from_usize_lossy(frames) };
        while t < target {
            steps += 1;
            if steps > config.max_steps {
                return Err(Error::StepTooSmall { steps: config.max_steps });
            }
            let amax = u.iter().fold(T::zero(), |m, &v| m.max(flux.raw_derivative(v, 1).abs()));
            let remaining = target - t;
            let dt = if amax > T::zero() { (config.cfl * dx / amax).min(remaining) } else { remaining };
            let ratio = dt / dx;
            {
                let u = &u;
                let calc = |i: usize| numerical.eval(u[left_of(i)], u[right_of(i)]);
                if n >= PARALLEL_THRESHOLD {
                    (0..interfaces).into_par_iter().map(calc).collect_into_vec(&mut fluxes);
                } else {
                    fluxes.iter_mut().enumerate().for_each(|(i, f)| *f = calc(i));
                }
            }
            for (i, v) in u.iter_mut().enumerate() {
                let right = match config.boundary {
                    Boundary::Periodic => fluxes[(i + 1) % n],
                    Boundary::Outflow => fluxes[i + 1],
                };
                *v = *v - ratio * (right - fluxes[i]);
            }
            t = if dt >= remaining { target } else { t + dt };
        }
        out.push(frame(t, &u, dx));
    }
    Ok(GodunovRun { solution: SampledFunction::new(centres, u)?, frames: out, steps })
}

/// Entropy solution at `t_end` on the cell centres of `config`.
pub fn godunov_solve<T: Real>(
    flux: &Flux<T>,
    u0: &SampledFunction<T>,
    t_end: T,
    config: &GodunovConfig<T>,
) -> Result<SampledFunction<T>> {
    godunov_run(flux, u0, t_end, config, 1).map(|r| r.solution)
}

/// `t,min,max,mass` rows, optionally preceded by a `#` comment line.
pub fn write_diagnostics_csv<T: Real, W: Write>(frames: &[Frame<T>], out: W, comment: Option<&str>) -> Result<()> {
    let mut out = out;
    let io = |e: std::io::Error| Error::InvalidInput(format!("i/o: {e}"));
    if let Some(c) = comment {
        writeln!(out, "# {c}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let c = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record(["t", "min", "max", "mass"]).map_err(c)?;
    for f in frames {
        w.write_record([f.t.to_string(), f.min.to_string(), f.max.to_string(), f.mass.to_string()]).map_err(c)?;
    }
    w.flush().map_err(io)
}
