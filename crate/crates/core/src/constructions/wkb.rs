use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flux::{Flux, Interval};
use crate::sampled::SampledFunction;
use crate::scalar::{linspace, Real};
use crate::transport::{evolve_periodic, godunov_solve, shock_time, Boundary, GodunovConfig, Rule};

const DEFAULT_PROFILE_SAMPLES: usize = 4096;
/// Derivatives below this fraction of the largest Taylor coefficient count as zero.
const TAYLOR_ZERO_TOL: f64 = 1e-10;

/// High-frequency data `ū + ε U0(x / ε^d)` around a state `ū` where the flux has
/// degeneracy `d`, with the profile equation `U_t + b (U^{1+d})_θ = 0`.
#[derive(Clone)]
pub struct WkbConfig<T> {
    pub flux: Flux<T>,
    pub base_state: T,
    pub d: usize,
    /// `f'(ū)`.
    pub lambda: T,
    /// `f^{(1+d)}(ū) / (1+d)!`.
    pub b_coeff: T,
    /// Period-1 profile `U0`.
    pub profile_u0: Rule<T>,
    pub epsilons: Vec<T>,
    /// Final time, below the profile shock time.
    pub t_final: T,
    /// Samples per period for the profile's characteristic flow.
    pub profile_samples: usize,
}

impl<T: fmt::Debug> fmt::Debug for WkbConfig<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WkbConfig")
            .field("flux", &self.flux)
            .field("base_state", &self.base_state)
            .field("d", &self.d)
            .field("lambda", &self.lambda)
            .field("b_coeff", &self.b_coeff)
            .field("epsilons", &self.epsilons)
            .field("t_final", &self.t_final)
            .finish()
    }
}

/// First `d >= 1` with `f^{(1+d)}(u) != 0`, and the Taylor coefficient there.
fn local_degeneracy<T: Real>(flux: &Flux<T>, u: T) -> Result<(usize, T)> {
    let kmax = flux.max_order().min(24);
    let mut coeffs = Vec::new();
    let mut factorial = T::one();
    for j in 1..=kmax {
        factorial = factorial * T::from_usize_lossy(j);
        if j >= 2 {
            coeffs.push((j - 1, flux.derivative(u, j)? / factorial));
        }
    }
    let scale = coeffs.iter().fold(T::zero(), |m, &(_, c)| m.max(c.abs()));
    if !(scale > T::zero()) || !scale.is_finite() {
        return Err(Error::InvalidInput(format!("flux has no finite nonlinear term at {u}")));
    }
    coeffs
        .into_iter()
        .find(|&(_, c)| c.abs() > T::lit(TAYLOR_ZERO_TOL) * scale)
        .ok_or_else(|| Error::InvalidInput("flux has no nonlinear term".into()))
}

impl<T: Real> WkbConfig<T> {
    /// Derives `d`, `λ` and `b` from the flux at `base_state` and validates the profile.
    /// `t_final` defaults to half the profile shock time.
    pub fn new(
        flux: Flux<T>,
        base_state: T,
        profile_u0: Rule<T>,
        epsilons: Vec<T>,
        t_final: Option<T>,
    ) -> Result<Self> {
        flux.domain().check(base_state)?;
        if epsilons.is_empty() || epsilons.iter().any(|&e| !(e > T::zero() && e <= T::one())) {
            return Err(Error::InvalidInput("epsilons must be a non-empty list in (0, 1]".into()));
        }
        let (d, b_coeff) = local_degeneracy(&flux, base_state)?;
        let lambda = flux.speed(base_state)?;
        let mut cfg = Self {
            flux,
            base_state,
            d,
            lambda,
            b_coeff,
            profile_u0,
            epsilons,
            t_final: T::zero(),
            profile_samples: DEFAULT_PROFILE_SAMPLES,
        };
        let (lo, hi) = cfg.profile_range();
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput("profile must be finite".into()));
        }
        for &e in &cfg.epsilons {
            cfg.flux.domain().check(base_state + e * lo)?;
            cfg.flux.domain().check(base_state + e * hi)?;
        }
        let shock = cfg.profile_shock_time()?;
        cfg.t_final = match t_final {
            Some(t) if !(t >= T::zero() && t < shock) => {
                return Err(Error::InvalidInput(format!("final time {t} must lie in [0, {shock})")));
            }
            Some(t) => t,
            None if shock.is_finite() => shock / T::lit(2.0),
            None => T::one(),
        };
        Ok(cfg)
    }

    /// `A sin(2πθ)`.
    pub fn sine_profile(amplitude: T) -> Rule<T> {
        Arc::new(move |theta: T| amplitude * (T::lit(2.0) * T::PI() * theta).sin())
    }

    /// Largest amplitude keeping `ū + ε A sin` inside the flux domain for every `ε <= 1`.
    pub fn default_amplitude(flux: &Flux<T>, base_state: T) -> T {
        let k = flux.domain();
        (base_state - k.lo()).min(k.hi() - base_state)
    }

    fn theta_samples(&self) -> Vec<T> {
        linspace(T::zero(), T::one(), self.profile_samples + 1)
    }

    /// Smallest and largest sampled profile value.
    pub fn profile_range(&self) -> (T, T) {
        self.theta_samples()
            .into_iter()
            .map(|t| (self.profile_u0)(t))
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// First crossing time of the profile characteristics.
    pub fn profile_shock_time(&self) -> Result<T> {
        let flux = profile_flux(self)?;
        shock_time(&flux, |t| (self.profile_u0)(t), &self.theta_samples())
    }

    /// Phase `x - λt`.
    pub fn phase(&self, t: T, x: T) -> T {
        x - self.lambda * t
    }

    /// Spatial period `ε^d`.
    pub fn period(&self, eps: T) -> T {
        eps.powi(self.d as i32)
    }

    fn check_eps(&self, eps: T) -> Result<()> {
        let listed = self.epsilons.iter().any(|&e| (e - eps).abs() <= T::lit(1e-12) * e);
        if !listed {
            return Err(Error::InvalidInput(format!("epsilon {eps} is not in the configured list")));
        }
        Ok(())
    }
}

/// `b U^{1+d}` on the profile range (padded).
pub fn profile_flux<T: Real>(config: &WkbConfig<T>) -> Result<Flux<T>> {
    let (lo, hi) = config.profile_range();
    let pad = (hi - lo) * T::lit(0.05) + T::lit(1e-3);
    let mut coeffs = vec![T::zero(); config.d + 2];
    coeffs[config.d + 1] = config.b_coeff;
    Flux::polynomial(coeffs, Interval::new(lo - pad, hi + pad)?)
}

pub fn wkb_initial<T: Real>(config: &WkbConfig<T>, eps: T, x: T) -> Result<T> {
    config.check_eps(eps)?;
    let v = config.base_state + eps * (config.profile_u0)(x / config.period(eps));
    config.flux.domain().check(v)?;
    Ok(v)
}

/// Profile `U(t, ·)` by characteristics of the profile equation.
pub fn profile_evolve<T: Real>(config: &WkbConfig<T>, t: T, theta_grid: &[T]) -> Result<SampledFunction<T>> {
    let flux = profile_flux(config)?;
    let shock = config.profile_shock_time()?;
    if t >= shock {
        return Err(Error::ShockReached { time: shock.as_f64() });
    }
    let u0 = |th: T| (config.profile_u0)(th);
    Ok(evolve_periodic(&flux, u0, T::one(), t, theta_grid, config.profile_samples)?.solution)
}

/// `ū + ε U(t, (x - λt)/ε^d)`.
pub fn wkb_reconstruct<T: Real>(config: &WkbConfig<T>, eps: T, t: T, x_grid: &[T]) -> Result<SampledFunction<T>> {
    config.check_eps(eps)?;
    let period = config.period(eps);
    let theta: Vec<T> = x_grid.iter().map(|&x| config.phase(t, x) / period).collect();
    let profile = profile_evolve(config, t, &theta)?;
    let values = profile.values().iter().map(|&u| config.base_state + eps * u).collect();
    SampledFunction::new(x_grid.to_vec(), values)
}

/// Finite-volume settings for [`wkb_residual`]: the grid is one spatial period `ε^d` with
/// periodic boundaries, so the resolution is given per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbSolver<T> {
    pub cells_per_period: usize,
    pub cfl: T,
}

impl<T: Real> Default for WkbSolver<T> {
    fn default() -> Self {
        Self { cells_per_period: 4096, cfl: T::lit(0.9) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbResidual<T> {
    pub l1: T,
    pub linf: T,
    /// `l1 / (ε · period)`.
    pub relative: T,
}

/// Distance between the Godunov solution of the full equation started from the
/// high-frequency data and the reconstruction, over one period.
pub fn wkb_residual<T: Real>(config: &WkbConfig<T>, eps: T, t: T, solver: &WkbSolver<T>) -> Result<WkbResidual<T>> {
    config.check_eps(eps)?;
    if !(t >= T::zero() && t <= config.t_final) {
        return Err(Error::InvalidInput(format!("time {t} must lie in [0, {}]", config.t_final)));
    }
    let period = config.period(eps);
    let cells = solver.cells_per_period.max(2);
    let dx = period / T::from_usize_lossy(cells);
    let gcfg = GodunovConfig::new(dx, solver.cfl, Interval::new(T::zero(), period)?, Boundary::Periodic)?;
    let centres = gcfg.centres();
    let init = centres.iter().map(|&x| wkb_initial(config, eps, x)).collect::<Result<Vec<T>>>()?;
    let u0 = SampledFunction::new(centres.clone(), init)?;
    let solved = godunov_solve(&config.flux, &u0, t, &gcfg)?;
    let approx = wkb_reconstruct(config, eps, t, &centres)?;
    let (mut l1, mut linf) = (T::zero(), T::zero());
    for (&a, &b) in solved.values().iter().zip(approx.values()) {
        let e = (a - b).abs();
        l1 = l1 + e;
        linf = linf.max(e);
    }
    let l1 = l1 * dx;
    Ok(WkbResidual { l1, linf, relative: l1 / (eps * period) })
}

/// `ε U(t, x/ε^p)` where `U` is the Godunov entropy solution of `U_t + (|U|^{1+p})_θ = 0`
/// with period-1 data `U0`, computed on `cells` cells and interpolated periodically.
pub fn powerlaw_oscillation<T: Real>(
    p: T,
    eps: T,
    profile_u0: &Rule<T>,
    t: T,
    x_grid: &[T],
    cells: usize,
) -> Result<SampledFunction<T>> {
    if !(p >= T::one()) {
        return Err(Error::InvalidInput(format!("p = {p} must be >= 1")));
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidInput(format!("epsilon {eps} must be positive")));
    }
    let scale = eps.powf(p);
    if t == T::zero() {
        let values = x_grid.iter().map(|&x| eps * profile_u0(x / scale)).collect();
        return SampledFunction::new(x_grid.to_vec(), values);
    }
    let cells = cells.max(2);
    let gcfg = GodunovConfig::new(
        T::one() / T::from_usize_lossy(cells),
        T::lit(0.9),
        Interval::new(T::zero(), T::one())?,
        Boundary::Periodic,
    )?;
    let centres = gcfg.centres();
    let init: Vec<T> = centres.iter().map(|&th| profile_u0(th)).collect();
    let (lo, hi) = init.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    let pad = (hi - lo) * T::lit(0.05) + T::lit(1e-3);
    let flux = Flux::power_law(T::one() + p, Interval::new(lo - pad, hi + pad)?)?;
    let profile = godunov_solve(&flux, &SampledFunction::new(centres, init)?, t, &gcfg)?;
    let u = profile.values();
    let n = u.len();
    let nf = T::from_usize_lossy(n);
    let values = x_grid
        .iter()
        .map(|&x| {
            let theta = x / scale;
            let q = (theta - theta.floor()) * nf - T::lit(0.5);
            let i = q.floor();
            let frac = q - i;
            let i = i.to_i64().unwrap_or(0).rem_euclid(n as i64) as usize;
            let (a, b) = (u[i], u[(i + 1) % n]);
            eps * (a + frac * (b - a))
        })
        .collect();
    SampledFunction::new(x_grid.to_vec(), values)
}
