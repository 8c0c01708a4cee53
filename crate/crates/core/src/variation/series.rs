//! Partial sums `sum_{k<=n} a_k^q` of variation series and a convergent/divergent verdict.
//!
//! Infinite partitions are never formed; a series is judged from an increasing truncation.

use crate::error::{Error, Result};
use crate::numerics::{fit_line, log_log_fit, LineFit};
use crate::scalar::Real;

/// Amplitudes `k -> a_k` (k = 1..=n), exponent `q >= 1`, truncation `n >= 2`.
pub struct SeriesProbe<T, F> {
    pub amplitude: F,
    pub q: T,
    pub n: usize,
}

impl<T: Real, F: Fn(usize) -> T> SeriesProbe<T, F> {
    pub fn new(amplitude: F, q: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("truncation must be >= 2".into()));
        }
        if !(q >= T::one()) {
            return Err(Error::InvalidInput(format!("exponent q = {q} must be >= 1")));
        }
        Ok(Self { amplitude, q, n })
    }
}

/// Running sums `S_n = sum_{k<=n} a_k^q`, `n = 1..=N`.
pub fn partial_variation_series<T: Real, F: Fn(usize) -> T>(probe: &SeriesProbe<T, F>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(probe.n);
    let mut acc = T::zero();
    for k in 1..=probe.n {
        let a = (probe.amplitude)(k);
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidInput(format!("amplitude a_{k} = {a} must be finite and positive")));
        }
        acc = acc + a.powf(probe.q);
        if !acc.is_finite() {
            return Err(Error::Overflow(k));
        }
        out.push(acc);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthModel {
    /// `S_n = L + K n^{1-gamma}` with `gamma > 1`.
    PowerTail,
    /// `S_n = L + K r^n`.
    GeometricTail,
    /// `S_n = e + c ln n`.
    Logarithmic,
    /// `S_n = e + c n^{1-gamma}` with `gamma < 1`.
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthClass<T> {
    pub verdict: Verdict,
    pub model: GrowthModel,
    /// Limit for convergent models; `c` (logarithmic) or the exponent `1 - gamma` (power).
    pub limit_or_rate: T,
    /// Coefficient of determination of the chosen model for `S_n`.
    pub fit_quality: T,
    /// Decay exponent `gamma` of the increments `S_n - S_{n-1} ~ n^{-gamma}`, when fitted.
    pub tail_exponent: Option<T>,
    /// `(S_N - S_{N/10}) / |S_N|`.
    pub last_decade_increase: T,
}

/// Minimum number of partial sums accepted.
pub const MIN_SERIES_LEN: usize = 20;
/// Fits below this quality are inconclusive.
pub const MIN_FIT_QUALITY: f64 = 0.95;
/// Convergence additionally requires the last decade to add less than this fraction.
pub const MAX_LAST_DECADE_INCREASE: f64 = 0.02;
/// Increments below this fraction of the partial sum are rounding noise and not fitted.
pub const RESOLVED_INCREMENT: f64 = 1e-9;
/// With fewer resolved increments than this the tail counts as exhausted.
pub const MIN_RESOLVED_INCREMENTS: usize = 10;
/// Increment exponents within this margin of 1 are not accepted as a summable tail.
pub const TAIL_EXPONENT_MARGIN: f64 = 0.05;

struct Candidate<T> {
    verdict: Verdict,
    model: GrowthModel,
    value: T,
    quality: T,
}

/// Classifies partial sums as convergent or divergent by fitting bounded models
/// (power or geometric tail) and unbounded ones (logarithmic or power growth) to the last
/// decade `n >= N/10`, keeping the best fit.
pub fn classify_growth<T: Real>(partial_sums: &[T]) -> Result<GrowthClass<T>> {
    let n_total = partial_sums.len();
    if n_total < MIN_SERIES_LEN {
        return Err(Error::InvalidInput(format!("need at least {MIN_SERIES_LEN} partial sums")));
    }
    if partial_sums.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("partial sums must be finite".into()));
    }
    let s = |n: usize| partial_sums[n - 1];
    let first = (n_total / 10).max(2);
    let last = s(n_total);
    let last_decade_increase = (last - s(first)) / last.abs().max(T::min_positive_value());

    let ns = log_spaced(first, n_total, 200);
    let nf: Vec<T> = ns.iter().map(|&n| T::from_usize_lossy(n)).collect();
    let sums: Vec<T> = ns.iter().map(|&n| s(n)).collect();
    let incs: Vec<(T, T)> = ns
        .iter()
        .filter(|&&n| s(n) - s(n - 1) > T::lit(RESOLVED_INCREMENT) * s(n).abs())
        .map(|&n| (T::from_usize_lossy(n), s(n) - s(n - 1)))
        .collect();

    if incs.len() < MIN_RESOLVED_INCREMENTS {
        // the tail adds nothing at this precision
        return Ok(GrowthClass {
            verdict: Verdict::Convergent,
            model: GrowthModel::GeometricTail,
            limit_or_rate: last,
            fit_quality: T::one(),
            tail_exponent: None,
            last_decade_increase,
        });
    }

    let (inc_n, inc_a): (Vec<T>, Vec<T>) = incs.iter().copied().unzip();
    let power_inc = log_log_fit(&inc_n, &inc_a);
    let gamma = power_inc.map(|f| -f.slope);
    let mut candidates = Vec::new();

    if let Some(g) = gamma {
        if g > T::one() + T::lit(TAIL_EXPONENT_MARGIN) {
            let reg: Vec<T> = nf.iter().map(|&n| n.powf(T::one() - g)).collect();
            if let Some(f) = fit_line(&reg, &sums) {
                candidates.push(Candidate {
                    verdict: Verdict::Convergent,
                    model: GrowthModel::PowerTail,
                    value: f.intercept,
                    quality: f.r_squared,
                });
            }
        } else if g < T::one() - T::lit(TAIL_EXPONENT_MARGIN) {
            let rate = T::one() - g;
            let reg: Vec<T> = nf.iter().map(|&n| n.powf(rate)).collect();
            if let Some(f) = fit_line(&reg, &sums) {
                candidates.push(Candidate {
                    verdict: Verdict::Divergent,
                    model: GrowthModel::Power,
                    value: rate,
                    quality: f.r_squared,
                });
            }
        }
    }

    if let Some(geo) = fit_line(&inc_n, &inc_a.iter().map(|a| a.ln()).collect::<Vec<_>>()) {
        let r = geo.slope.exp();
        if r < T::one() {
            let reg: Vec<T> = nf.iter().map(|&n| (geo.slope * n).exp()).collect();
            let quality = fit_line(&reg, &sums).map(|f| f.r_squared).unwrap_or(T::zero());
            let last_inc = s(n_total) - s(n_total - 1);
            let limit = last + last_inc.max(T::zero()) * r / (T::one() - r);
            candidates.push(Candidate {
                verdict: Verdict::Convergent,
                model: GrowthModel::GeometricTail,
                value: limit,
                quality,
            });
        }
    }

    let ln_n: Vec<T> = nf.iter().map(|n| n.ln()).collect();
    if let Some(LineFit { slope, r_squared, .. }) = fit_line(&ln_n, &sums) {
        candidates.push(Candidate {
            verdict: Verdict::Divergent,
            model: GrowthModel::Logarithmic,
            value: slope,
            quality: r_squared,
        });
    }

    let pick = |allow_convergent: bool| {
        candidates
            .iter()
            .filter(|c| allow_convergent || c.verdict == Verdict::Divergent)
            .max_by(|a, b| a.quality.partial_cmp(&b.quality).expect("finite quality"))
    };
    let best = pick(true).ok_or_else(|| Error::Inconclusive("no model could be fitted".into()))?;
    let gate_ok = last_decade_increase < T::lit(MAX_LAST_DECADE_INCREASE);
    if best.verdict == Verdict::Convergent && !gate_ok {
        return Err(Error::Inconclusive(format!(
            "best fit is a bounded tail (R^2 = {}) but the last decade still adds {} (>= {MAX_LAST_DECADE_INCREASE})",
            best.quality, last_decade_increase
        )));
    }
    if best.quality < T::lit(MIN_FIT_QUALITY) {
        return Err(Error::Inconclusive(format!("best fit quality {} < {MIN_FIT_QUALITY}", best.quality)));
    }
    Ok(GrowthClass {
        verdict: best.verdict,
        model: best.model,
        limit_or_rate: best.value,
        fit_quality: best.quality,
        tail_exponent: gamma,
        last_decade_increase,
    })
}

/// About `count` distinct integers spread geometrically over `[lo, hi]`.
fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .map(|n| n.clamp(lo, hi))
        .collect();
    out.dedup();
    out
}
