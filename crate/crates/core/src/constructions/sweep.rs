use std::io::Write;

use super::wkb::{wkb_reconstruct, WkbConfig};
use crate::error::{Error, Result};
use crate::numerics::log_log_fit;
use crate::sampled::SampledFunction;
use crate::scalar::{linspace, Real};
use crate::variation::{gagliardo_seminorms, tv_s};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow<T> {
    pub epsilon: T,
    pub s_prime: T,
    /// `W^{s',1}` Gagliardo seminorm on `[0, 1]`.
    pub gagliardo: T,
    /// `TV^{s'}` of the samples.
    pub tvs: T,
}

/// Slopes of `log value` against `log ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSlope<T> {
    pub s_prime: T,
    pub gagliardo_slope: T,
    pub gagliardo_fit_quality: T,
    pub tvs_slope: T,
    pub tvs_fit_quality: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport<T> {
    /// Sorted by `ε`, then `s'`.
    pub rows: Vec<ScalingRow<T>>,
    /// One entry per `s'` whose values are all positive.
    pub slopes: Vec<ScalingSlope<T>>,
}

impl<T: Real> ScalingReport<T> {
    pub fn slope_for(&self, s_prime: T) -> Option<&ScalingSlope<T>> {
        self.slopes.iter().find(|s| s.s_prime == s_prime)
    }

    /// `epsilon,s_prime,gagliardo,tvs`.
    pub fn write_rows_csv<W: Write>(&self, out: W, comment: Option<&str>) -> Result<()> {
        let rows = self.rows.iter().map(|r| vec![r.epsilon, r.s_prime, r.gagliardo, r.tvs]);
        write_table(out, comment, &["epsilon", "s_prime", "gagliardo", "tvs"], rows)
    }

    /// `s_prime,gagliardo_slope,gagliardo_r2,tvs_slope,tvs_r2`.
    pub fn write_slopes_csv<W: Write>(&self, out: W, comment: Option<&str>) -> Result<()> {
        let rows = self
            .slopes
            .iter()
            .map(|s| vec![s.s_prime, s.gagliardo_slope, s.gagliardo_fit_quality, s.tvs_slope, s.tvs_fit_quality]);
        write_table(out, comment, &["s_prime", "gagliardo_slope", "gagliardo_r2", "tvs_slope", "tvs_r2"], rows)
    }
}

fn write_table<T: Real, W: Write>(
    mut out: W,
    comment: Option<&str>,
    header: &[&str],
    rows: impl Iterator<Item = Vec<T>>,
) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidInput(format!("i/o: {e}"));
    let c = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    if let Some(text) = comment {
        writeln!(out, "# {text}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(c)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(c)?;
    }
    w.flush().map_err(io)
}

/// For every configured `ε` and every `s'`, the Gagliardo `W^{s',1}` seminorm and `TV^{s'}`
/// of the reconstruction at time `t` on the window `[0, 1]`, sampled with
/// `points_per_period` points per spatial period `ε^d`; then the log-log slopes in `ε`.
pub fn sobolev_scaling_sweep<T: Real>(
    config: &WkbConfig<T>,
    s_primes: &[T],
    t: T,
    points_per_period: usize,
) -> Result<ScalingReport<T>> {
    if s_primes.is_empty() || s_primes.iter().any(|&s| !(s > T::zero() && s < T::one())) {
        return Err(Error::InvalidInput("every s' must lie in (0, 1)".into()));
    }
    if !(t >= T::zero() && t <= config.t_final) {
        return Err(Error::InvalidInput(format!("time {t} must lie in [0, {}]", config.t_final)));
    }
    if points_per_period < 2 {
        return Err(Error::InvalidInput("need at least two points per period".into()));
    }
    let mut eps = config.epsilons.clone();
    eps.sort_by(|a, b| a.partial_cmp(b).expect("finite epsilon"));
    let mut s_sorted = s_primes.to_vec();
    s_sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite s'"));

    let mut rows = Vec::new();
    for &e in &eps {
        let intervals = (T::from_usize_lossy(points_per_period) / config.period(e))
            .ceil()
            .to_usize()
            .ok_or_else(|| Error::InvalidInput("window grid too large".into()))?;
        let x = linspace(T::zero(), T::one(), intervals + 1);
        let u: SampledFunction<T> = wkb_reconstruct(config, e, t, &x)?;
        let g = gagliardo_seminorms(&u, &s_sorted, T::one())?;
        for (&s, &gv) in s_sorted.iter().zip(&g) {
            rows.push(ScalingRow { epsilon: e, s_prime: s, gagliardo: gv, tvs: tv_s(&u, s)?.value });
        }
    }

    let mut slopes = Vec::new();
    if eps.len() >= 2 {
        for &s in &s_sorted {
            let sel: Vec<&ScalingRow<T>> = rows.iter().filter(|r| r.s_prime == s).collect();
            let le: Vec<T> = sel.iter().map(|r| r.epsilon).collect();
            let gv: Vec<T> = sel.iter().map(|r| r.gagliardo).collect();
            let tv: Vec<T> = sel.iter().map(|r| r.tvs).collect();
            if let (Some(gf), Some(tf)) = (log_log_fit(&le, &gv), log_log_fit(&le, &tv)) {
                slopes.push(ScalingSlope {
                    s_prime: s,
                    gagliardo_slope: gf.slope,
                    gagliardo_fit_quality: gf.r_squared,
                    tvs_slope: tf.slope,
                    tvs_fit_quality: tf.r_squared,
                });
            }
        }
    }
    Ok(ScalingReport { rows, slopes })
}
