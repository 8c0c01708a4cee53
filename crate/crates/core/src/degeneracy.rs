//! Three measurements of how nonlinear a flux is:
//!
//! * the order `d` of the first non-vanishing derivative of `f'` (maximized over `K`),
//! * the sublevel-set exponent `alpha` of `v -> tau + xi f'(v)` over unit directions,
//! * the Hölder exponent `p` of the inverse of `f'`: `inf |a(u) - a(v)| / |u - v|^p > 0`.
//!
//! For smooth fluxes the first two agree through `alpha = 1/d`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flux::Flux;
use crate::numerics::{bisect, fit_line, sign_change_roots};
use crate::scalar::{geomspace, linspace, Real};

/// `d` together with a state where it is attained; `d = None` means `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothDegeneracy<T> {
    pub d: Option<usize>,
    pub base_state: T,
}

/// Degeneracy points of `f`: zeros of `f''`, including touching zeros (found as zeros of
/// `f'''` where `|f''|` is negligible).
pub fn degeneracy_points<T: Real>(flux: &Flux<T>, grid_size: usize, zero_tol: T) -> Vec<T> {
    let dom = flux.domain();
    let f2 = |u: T| flux.raw_derivative(u, 2);
    let mut pts = sign_change_roots(f2, dom.lo(), dom.hi(), grid_size);
    if flux.max_order() >= 3 {
        let scale = linspace(dom.lo(), dom.hi(), grid_size)
            .into_iter()
            .map(|u| f2(u).abs())
            .filter(|v| v.is_finite())
            .fold(T::zero(), T::max);
        for r in sign_change_roots(|u| flux.raw_derivative(u, 3), dom.lo(), dom.hi(), grid_size) {
            if f2(r).abs() <= zero_tol * scale {
                pts.push(r);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    pts.dedup();
    pts
}

/// `d = max_u min{k >= 1 : f^{(1+k)}(u) != 0}` on a grid of `K` refined by the degeneracy
/// points. A derivative counts as zero when `|f^{(1+k)}(u)| <= zero_tol * max_K |f^{(1+k)}|`.
pub fn smooth_degeneracy<T: Real>(
    flux: &Flux<T>,
    kmax: usize,
    grid_size: usize,
    zero_tol: T,
) -> Result<SmoothDegeneracy<T>> {
    if kmax == 0 {
        return Err(Error::InvalidInput("kmax must be >= 1".into()));
    }
    if flux.max_order() < kmax + 1 {
        return Err(Error::OrderUnsupported { order: kmax + 1, max: flux.max_order() });
    }
    if grid_size < 3 {
        return Err(Error::InvalidInput("grid_size must be >= 3".into()));
    }
    let dom = flux.domain();
    let mut grid = linspace(dom.lo(), dom.hi(), grid_size);
    grid.extend(degeneracy_points(flux, grid_size, zero_tol));
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();

    let scales: Vec<T> = (1..=kmax)
        .map(|k| {
            grid.iter().map(|&u| flux.raw_derivative(u, 1 + k).abs()).filter(|v| v.is_finite()).fold(T::zero(), T::max)
        })
        .collect();

    let mut best: Option<(Option<usize>, T)> = None;
    for &u in &grid {
        let m = (1..=kmax).find(|&k| {
            let v = flux.raw_derivative(u, 1 + k).abs();
            !v.is_finite() || v > zero_tol * scales[k - 1]
        });
        let better = match best {
            None => true,
            Some((Some(bd), _)) => m.is_none_or(|k| k > bd),
            Some((None, _)) => false,
        };
        if better {
            best = Some((m, u));
        }
    }
    let (d, base_state) = best.expect("non-empty grid");
    Ok(SmoothDegeneracy { d, base_state })
}

/// A unit direction `(tau, xi)` and a level `delta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LptProbe<T> {
    tau: T,
    xi: T,
    delta: T,
}

impl<T: Real> LptProbe<T> {
    /// Normalizes `(tau, xi)` onto the unit circle.
    pub fn new(tau: T, xi: T, delta: T) -> Result<Self> {
        let r = tau.hypot(xi);
        if !(r > T::zero()) || !(delta > T::zero()) {
            return Err(Error::InvalidInput("probe needs a nonzero direction and delta > 0".into()));
        }
        Ok(Self { tau: tau / r, xi: xi / r, delta })
    }

    pub fn tau(&self) -> T {
        self.tau
    }
    pub fn xi(&self) -> T {
        self.xi
    }
    pub fn delta(&self) -> T {
        self.delta
    }
}

/// Splits `K` into pieces on which `f'` is monotone, so sublevel sets of `tau + xi f'`
/// are intervals on each piece.
struct MonotonePieces<'a, T> {
    flux: &'a Flux<T>,
    breaks: Vec<T>,
}

impl<'a, T: Real> MonotonePieces<'a, T> {
    fn new(flux: &'a Flux<T>, resolution: usize) -> Self {
        let dom = flux.domain();
        let mut breaks = vec![dom.lo()];
        breaks.extend(
            sign_change_roots(|u| flux.raw_derivative(u, 2), dom.lo(), dom.hi(), resolution)
                .into_iter()
                .filter(|&r| r > dom.lo() && r < dom.hi()),
        );
        breaks.push(dom.hi());
        breaks.dedup();
        Self { flux, breaks }
    }

    fn measure(&self, probe: &LptProbe<T>) -> T {
        let g = |v: T| probe.tau + probe.xi * self.flux.raw_derivative(v, 1);
        let delta = probe.delta;
        self.breaks
            .windows(2)
            .map(|w| {
                let above = positive_part(|v| g(v) + delta, w[0], w[1]);
                let below = positive_part(|v| delta - g(v), w[0], w[1]);
                match (above, below) {
                    (Some((a0, a1)), Some((b0, b1))) => (a1.min(b1) - a0.max(b0)).max(T::zero()),
                    _ => T::zero(),
                }
            })
            .sum()
    }
}

/// `{v in [a, b] : h(v) > 0}` for monotone `h`, as a closed interval up to measure zero.
fn positive_part<T: Real>(h: impl Fn(T) -> T, a: T, b: T) -> Option<(T, T)> {
    let (ha, hb) = (h(a), h(b));
    match (ha > T::zero(), hb > T::zero()) {
        (true, true) => Some((a, b)),
        (false, false) => None,
        (true, false) => Some((a, bisect(&h, a, b, 200))),
        (false, true) => Some((bisect(&h, a, b, 200), b)),
    }
}

/// Lebesgue measure of `{v in K : |tau + xi f'(v)| < delta}`.
pub fn lpt_measure<T: Real>(flux: &Flux<T>, probe: &LptProbe<T>, resolution: usize) -> Result<T> {
    if resolution < 1000 {
        return Err(Error::InvalidInput("resolution must be >= 1000".into()));
    }
    Ok(MonotonePieces::new(flux, resolution).measure(probe))
}

/// Unit directions on the circle: `n` equispaced angles plus both axes.
pub fn sample_directions<T: Real>(n: usize) -> Vec<(T, T)> {
    let mut dirs: Vec<(T, T)> = (0..n)
        .map(|j| {
            let phi = 2.0 * PI * j as f64 / n as f64;
            (T::lit(phi.cos()), T::lit(phi.sin()))
        })
        .collect();
    dirs.push((T::one(), T::zero()));
    dirs.push((T::zero(), T::one()));
    dirs
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFit<T> {
    /// Fitted exponent `alpha` in `measure ~ C delta^alpha`.
    pub alpha: T,
    /// Fitted constant `C`; not certified.
    pub intercept: T,
    pub r_squared: T,
}

/// Fits `log m(delta) = alpha log delta + log C` where `m(delta)` is the worst measure over
/// `directions` sampled unit directions. Saturated (`= |K|`) and empty measures are dropped.
pub fn lpt_alpha<T: Real>(flux: &Flux<T>, deltas: &[T], directions: usize, resolution: usize) -> Result<AlphaFit<T>> {
    if deltas.len() < 4 || deltas.iter().any(|d| !(*d > T::zero())) {
        return Err(Error::InvalidInput("need at least 4 positive deltas".into()));
    }
    let (dmin, dmax) = deltas.iter().fold((T::infinity(), T::zero()), |(a, b), &d| (a.min(d), b.max(d)));
    if dmax / dmin < T::lit(100.0 * (1.0 - 1e-9)) {
        return Err(Error::InvalidInput("deltas must span at least two decades".into()));
    }
    if resolution < 1000 {
        return Err(Error::InvalidInput("resolution must be >= 1000".into()));
    }
    let pieces = MonotonePieces::new(flux, resolution);
    let dirs = sample_directions::<T>(directions);
    let full = flux.domain().width() * (T::one() - T::lit(1e-12));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &delta in deltas {
        let worst = dirs.iter().map(|&(tau, xi)| pieces.measure(&LptProbe { tau, xi, delta })).fold(T::zero(), T::max);
        if worst > T::zero() && worst < full {
            xs.push(delta.ln());
            ys.push(worst.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::FitDegenerate("every measure is empty or saturated".into()));
    }
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::FitDegenerate("collinear deltas".into()))?;
    Ok(AlphaFit { alpha: fit.slope, intercept: fit.intercept.exp(), r_squared: fit.r_squared })
}

/// Quotient threshold below which `inf |a(u)-a(v)|/|u-v|^p` is treated as zero.
pub const HOLDER_THRESHOLD: f64 = 1e-8;
/// Largest exponent tried before declaring the Hölder degeneracy infinite.
pub const HOLDER_P_MAX: f64 = 16.0;

/// Smallest `p` in `[1, 16]` with `min_{grid pairs} |a(u)-a(v)|/|u-v|^p > 1e-8`, to `p_tol`;
/// `None` for `+inf`.
///
/// The grid is uniform plus points clustered geometrically (down to `1e-300`) around every
/// degeneracy point and both ends of `K`, which is where the infimum is approached.
pub fn holder_degeneracy<T: Real>(flux: &Flux<T>, grid_size: usize, p_tol: T) -> Result<Option<T>> {
    if grid_size < 100 {
        return Err(Error::InvalidInput("grid_size must be >= 100".into()));
    }
    let grid = holder_grid(flux, grid_size);
    let a: Vec<T> = grid.iter().map(|&u| flux.raw_derivative(u, 1)).collect();
    // a non-injective wave speed has a zero quotient somewhere between the samples
    let increasing = a.windows(2).all(|w| w[1] > w[0]);
    let decreasing = a.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Ok(None);
    }

    // ln Q_pair(p) = ln|a_i - a_j| - p ln|u_i - u_j|: a family of lines in p.
    let mut lines = Vec::with_capacity(grid.len() * (grid.len() - 1) / 2);
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            let num = (a[j] - a[i]).abs();
            if num == T::zero() {
                return Ok(None);
            }
            lines.push((num.ln(), (grid[j] - grid[i]).ln()));
        }
    }
    let log_thr = T::lit(HOLDER_THRESHOLD.ln());
    let passes = |p: T| lines.iter().all(|&(ln_num, ln_d)| ln_num - p * ln_d > log_thr);

    let (mut lo, mut hi) = (T::one(), T::lit(HOLDER_P_MAX));
    if passes(lo) {
        return Ok(Some(lo));
    }
    if !passes(hi) {
        return Ok(None);
    }
    while hi - lo > p_tol {
        let mid = (lo + hi) / T::lit(2.0);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Evaluation grid of [`holder_degeneracy`].
pub fn holder_grid<T: Real>(flux: &Flux<T>, grid_size: usize) -> Vec<T> {
    let dom = flux.domain();
    let mut grid = linspace(dom.lo(), dom.hi(), grid_size);
    let mut centers = degeneracy_points(flux, grid_size, T::lit(1e-10));
    centers.push(dom.lo());
    centers.push(dom.hi());
    let offsets = geomspace(T::lit(1e-300), T::lit(1e-1), 600);
    for c in centers {
        let ac = flux.raw_derivative(c, 1);
        for &o in &offsets {
            for x in [c - o, c + o] {
                // points whose speed underflows to the centre's are indistinguishable from it
                let gap = (flux.raw_derivative(x, 1) - ac).abs();
                if dom.contains(x) && gap.is_finite() && gap > T::min_positive_value() {
                    grid.push(x);
                }
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    grid
}

/// All three degeneracies with the default resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport<T> {
    pub d: Option<usize>,
    pub base_state: T,
    pub alpha_fit: Option<T>,
    pub alpha_intercept: Option<T>,
    pub p_holder: Option<T>,
    /// `|alpha d - 1| <= 0.1` whenever both are available (vacuously true otherwise).
    pub consistent: bool,
}

#[derive(Debug, Clone)]
pub struct ReportSettings<T> {
    pub kmax: usize,
    pub grid_size: usize,
    pub zero_tol: T,
    pub deltas: Vec<T>,
    pub directions: usize,
    pub resolution: usize,
    pub holder_grid: usize,
    pub p_tol: T,
}

impl<T: Real> Default for ReportSettings<T> {
    fn default() -> Self {
        Self {
            kmax: 8,
            grid_size: 401,
            zero_tol: T::lit(1e-10),
            deltas: geomspace(T::lit(1e-4), T::lit(1e-2), 9),
            directions: 64,
            resolution: 2000,
            holder_grid: 201,
            p_tol: T::lit(1e-3),
        }
    }
}

pub fn degeneracy_report<T: Real>(flux: &Flux<T>) -> Result<DegeneracyReport<T>> {
    degeneracy_report_with(flux, &ReportSettings::default())
}

pub fn degeneracy_report_with<T: Real>(flux: &Flux<T>, cfg: &ReportSettings<T>) -> Result<DegeneracyReport<T>> {
    let kmax = cfg.kmax.min(flux.max_order().saturating_sub(1)).max(1);
    let smooth = smooth_degeneracy(flux, kmax, cfg.grid_size, cfg.zero_tol)?;
    let (alpha_fit, alpha_intercept) = match lpt_alpha(flux, &cfg.deltas, cfg.directions, cfg.resolution) {
        Ok(fit) => (Some(fit.alpha), Some(fit.intercept)),
        Err(Error::FitDegenerate(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let p_holder = holder_degeneracy(flux, cfg.holder_grid, cfg.p_tol)?;
    let consistent = match (smooth.d, alpha_fit) {
        (Some(d), Some(alpha)) => (alpha * T::from_usize_lossy(d) - T::one()).abs() <= T::lit(0.1),
        _ => true,
    };
    Ok(DegeneracyReport {
        d: smooth.d,
        base_state: smooth.base_state,
        alpha_fit,
        alpha_intercept,
        p_holder,
        consistent,
    })
}
