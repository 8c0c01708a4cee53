//! One pipeline per experiment kind. Each writes its CSVs and appends its checks; a check
//! that could not be evaluated is recorded as failed.

use conslaw_core::constructions::{
    cheng_grid, cheng_initial_data, extrema_amplitudes, oscillator, select_delta, sobolev_scaling_sweep, wkb_residual,
    WkbSolver, MONOTONICITY_MARGIN,
};
use conslaw_core::degeneracy::{degeneracy_report_with, ReportSettings};
use conslaw_core::flux::{Flux, Interval};
use conslaw_core::numerics::log_log_fit;
use conslaw_core::sampled::{l1_distance, SampledFunction};
use conslaw_core::transport::{characteristic_flow, evolve_continuous, godunov_solve, Boundary, GodunovConfig};
use conslaw_core::variation::{
    classify_growth, partial_variation_series, tv_s, tv_s_bruteforce, GrowthModel, SeriesProbe, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{
    ChengParams, DegeneracyParams, Expect, ExperimentConfig, OracleParams, Params, SweepParams, VariationParams,
    WkbParams,
};
use crate::output::{CheckResult, CsvSink};

/// What stopped a pipeline, and at which stage.
#[derive(Debug)]
pub enum Failure {
    Run(String),
    Write(String),
}

impl Failure {
    pub fn stage(&self) -> &'static str {
        match self {
            Failure::Run(_) => "run",
            Failure::Write(_) => "write",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Run(m) | Failure::Write(m) => m,
        }
    }
}

impl From<conslaw_core::Error> for Failure {
    fn from(e: conslaw_core::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Write(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn show(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "none".into())
}

pub fn run(cfg: &ExperimentConfig, seed: u64, sink: &mut CsvSink, checks: &mut Vec<CheckResult>) -> Outcome {
    match &cfg.params {
        Params::Degeneracy(p) => degeneracy(cfg.flux.as_ref().expect("validated flux"), p, sink, checks),
        Params::Variation(p) => variation(p, sink, checks),
        Params::Cheng(p) => cheng(cfg.flux.as_ref().expect("validated flux"), p, sink, checks),
        Params::Wkb(p) => wkb(p, sink, checks),
        Params::Sweep(p) => sweep(p, sink, checks),
        Params::OracleCheck(p) => oracle(p, seed, sink, checks),
    }
}

fn degeneracy(flux: &Flux<f64>, p: &DegeneracyParams, sink: &mut CsvSink, checks: &mut Vec<CheckResult>) -> Outcome {
    let settings = ReportSettings {
        kmax: p.kmax,
        grid_size: p.grid_size,
        directions: p.directions,
        resolution: p.resolution,
        holder_grid: p.holder_grid,
        ..ReportSettings::default()
    };
    let rep = degeneracy_report_with(flux, &settings)?;
    sink.table(
        "degeneracy.csv",
        &["d", "base_state", "alpha_fit", "alpha_intercept", "p_holder", "consistent"],
        [[
            rep.d.map(|d| d.to_string()).unwrap_or_default(),
            num(rep.base_state),
            opt(rep.alpha_fit),
            opt(rep.alpha_intercept),
            opt(rep.p_holder),
            rep.consistent.to_string(),
        ]],
    )?;
    if let Some(d) = p.expect_d {
        checks.push(CheckResult::new(
            "d",
            rep.d == Some(d),
            format!("d = {}, expected {d}", rep.d.map(|d| d.to_string()).unwrap_or_else(|| "none".into())),
        ));
    }
    if let Some(a) = p.expect_alpha {
        let pass = rep.alpha_fit.is_some_and(|v| (v - a).abs() <= p.alpha_tol);
        checks.push(CheckResult::new(
            "alpha",
            pass,
            format!("alpha = {}, expected {a} ± {}", show(rep.alpha_fit), p.alpha_tol),
        ));
    }
    if let Some(e) = p.expect_p {
        let pass = rep.p_holder.is_some_and(|v| (v - e).abs() <= p.p_tol * e.abs());
        checks.push(CheckResult::new(
            "p_holder",
            pass,
            format!("p = {}, expected {e} within {}%", show(rep.p_holder), p.p_tol * 100.0),
        ));
    }
    Ok(())
}

fn variation(p: &VariationParams, sink: &mut CsvSink, checks: &mut Vec<CheckResult>) -> Outcome {
    let osc = p.oscillator;
    let grid = cheng_grid(&osc, p.samples);
    let values = grid.iter().map(|&x| oscillator(&osc, x)).collect::<Result<Vec<f64>, _>>()?;
    let g = SampledFunction::new(grid, values)?;
    let tvs = p.tv_exponents.iter().map(|&s| tv_s(&g, s)).collect::<Result<Vec<_>, _>>()?;
    sink.table(
        "variation_tvs.csv",
        &["s", "p", "value", "partition_points"],
        tvs.iter().map(|r| [num(r.s), num(r.p), num(r.value), r.partition.len().to_string()]),
    )?;

    let amps = extrema_amplitudes(&osc, p.terms);
    let mut series_rows = Vec::new();
    let mut growth_rows = Vec::new();
    for (i, &q) in p.q.iter().enumerate() {
        let sums = partial_variation_series(&SeriesProbe::new(|k: usize| amps[k - 1], q, p.terms)?)?;
        series_rows.extend(sums.iter().enumerate().map(|(k, &v)| [num(q), (k + 1).to_string(), num(v)]));
        let growth = classify_growth(&sums);
        let row = match &growth {
            Ok(c) => [
                num(q),
                format!("{:?}", c.verdict).to_lowercase(),
                format!("{:?}", c.model).to_lowercase(),
                num(c.limit_or_rate),
                num(c.fit_quality),
                opt(c.tail_exponent),
                num(c.last_decade_increase),
                String::new(),
            ],
            Err(e) => {
                let mut r: [String; 8] = Default::default();
                r[0] = num(q);
                r[1] = "inconclusive".into();
                r[7] = e.to_string();
                r
            }
        };
        growth_rows.push(row);
        if let Some(&want) = p.expect.get(i) {
            let (pass, detail) = match &growth {
                Ok(c) => {
                    let verdict_ok = match want {
                        Expect::Convergent => c.verdict == Verdict::Convergent,
                        Expect::Divergent => {
                            c.verdict == Verdict::Divergent
                                && (c.model != GrowthModel::Logarithmic || c.fit_quality >= p.min_quality)
                        }
                    };
                    (verdict_ok, format!("{:?}/{:?}, R2 = {}", c.verdict, c.model, c.fit_quality))
                }
                Err(e) => (false, e.to_string()),
            };
            checks.push(CheckResult::new(format!("verdict q={q}"), pass, format!("{detail}; expected {want:?}")));
        }
        if let Some(&tail) = p.expect_tail.get(i) {
            let got = growth.as_ref().ok().and_then(|c| c.tail_exponent);
            let pass = got.is_some_and(|v| (v - tail).abs() <= p.tail_tol);
            checks.push(CheckResult::new(
                format!("tail q={q}"),
                pass,
                format!("tail = {}, expected {tail} ± {}", show(got), p.tail_tol),
            ));
        }
    }
    sink.table("series.csv", &["q", "n", "partial_sum"], series_rows)?;
    sink.table(
        "growth.csv",
        &["q", "verdict", "model", "limit_or_rate", "fit_quality", "tail_exponent", "last_decade_increase", "error"],
        growth_rows,
    )?;
    Ok(())
}

fn cheng(flux: &Flux<f64>, p: &ChengParams, sink: &mut CsvSink, checks: &mut Vec<CheckResult>) -> Outcome {
    let data = select_delta(flux, p.base_state, p.oscillator, p.target_t)?;
    sink.table(
        "cheng_delta.csv",
        &["delta", "boundary_sign", "target_t", "certified_t_delta", "monotonicity_margin"],
        [[
            num(data.delta),
            opt(data.boundary_sign),
            num(p.target_t),
            num(data.certified_t_delta),
            num(data.monotonicity_margin),
        ]],
    )?;
    checks.push(CheckResult::new(
        "certified",
        data.certified_t_delta >= p.target_t,
        format!("delta = {}, certified up to {}", data.delta, data.certified_t_delta),
    ));

    let transition = data.transition();
    let u0 = |y: f64| cheng_initial_data(&data, y);
    let initial: Vec<f64> = data.y_grid.iter().map(|&y| u0(y)).collect();
    let initial_fn = SampledFunction::from_values(initial.clone())?;
    let mut time_rows = Vec::new();
    for &t in &p.times {
        let flow = characteristic_flow(flux, u0, t, &data.y_grid)?;
        let moved = evolve_continuous(flux, &transition, t, &flow.theta)?;
        let mut identity = moved.solution.values() == initial.as_slice();
        for &s in &p.tv_exponents {
            let (a, b) = (tv_s(&initial_fn, s)?.value, tv_s(&moved.solution, s)?.value);
            identity &= a == b;
            time_rows.push([num(t), num(s), num(flow.min_slope), num(a), num(b)]);
        }
        checks.push(CheckResult::new(
            format!("monotone t={t}"),
            flow.min_slope > MONOTONICITY_MARGIN,
            format!("min slope {}", flow.min_slope),
        ));
        checks.push(CheckResult::new(
            format!("identity t={t}"),
            identity,
            "transported values and TV^s match the initial ones",
        ));
    }
    sink.table("cheng_times.csv", &["t", "s", "min_slope", "tvs_initial", "tvs_transported"], time_rows)?;

    let window = Interval::new(p.window.0, p.window.1)?;
    let jobs: Vec<(f64, f64)> =
        p.times.iter().filter(|&&t| t > 0.0).flat_map(|&t| p.dx.iter().map(move |&h| (t, h))).collect();
    let errors = jobs
        .par_iter()
        .map(|&(t, h)| -> Result<(usize, f64), conslaw_core::Error> {
            let g = GodunovConfig::new(h, p.cfl, window, Boundary::Outflow)?;
            let centres = g.centres();
            let init = SampledFunction::from_fn(centres.clone(), u0)?;
            let numerical = godunov_solve(flux, &init, t, &g)?;
            let exact = evolve_continuous(flux, &transition, t, &centres)?;
            Ok((g.cells(), l1_distance(&numerical, &exact.solution)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    sink.table(
        "cheng_convergence.csv",
        &["t", "dx", "cells", "l1"],
        jobs.iter().zip(&errors).map(|(&(t, h), &(n, e))| [num(t), num(h), n.to_string(), num(e)]),
    )?;
    if p.dx.len() >= 2 {
        let mut order_rows = Vec::new();
        for (k, chunk) in errors.chunks(p.dx.len()).enumerate() {
            let t = jobs[k * p.dx.len()].0;
            let l1: Vec<f64> = chunk.iter().map(|&(_, e)| e).collect();
            let fit = log_log_fit(&p.dx, &l1);
            let order = fit.map(|f| f.slope);
            let mut by_dx: Vec<(f64, f64)> = p.dx.iter().copied().zip(l1.iter().copied()).collect();
            by_dx.sort_by(|a, b| b.0.total_cmp(&a.0));
            let decreasing = by_dx.windows(2).all(|w| w[1].1 < w[0].1);
            order_rows.push([num(t), opt(order), opt(fit.map(|f| f.r_squared))]);
            checks.push(CheckResult::new(
                format!("order t={t}"),
                decreasing && order.is_some_and(|o| o >= p.min_order),
                format!("L1 {l1:?}, order {} (>= {})", show(order), p.min_order),
            ));
        }
        sink.table("cheng_orders.csv", &["t", "order", "r_squared"], order_rows)?;
    }
    Ok(())
}

fn wkb(p: &WkbParams, sink: &mut CsvSink, checks: &mut Vec<CheckResult>) -> Outcome {
    let solver = WkbSolver { cells_per_period: p.cells_per_period, cfl: p.cfl };
    let mut eps = p.wkb.epsilons.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    let residuals = eps.par_iter().map(|&e| wkb_residual(&p.wkb, e, p.t, &solver)).collect::<Result<Vec<_>, _>>()?;
    sink.table(
        "wkb.csv",
        &["epsilon", "period", "l1", "linf", "relative"],
        eps.iter()
            .zip(&residuals)
            .map(|(&e, r)| [num(e), num(p.wkb.period(e)), num(r.l1), num(r.linf), num(r.relative)]),
    )?;
    let rel: Vec<f64> = residuals.iter().map(|r| r.relative).collect();
    let decreasing = rel.windows(2).all(|w| w[1] < w[0]);
    if eps.len() >= 2 {
        let fit = log_log_fit(&eps, &rel);
        sink.table(
            "wkb_fit.csv",
            &["d", "b", "t", "amplitude", "slope", "r_squared"],
            [[
                p.wkb.d.to_string(),
                num(p.wkb.b_coeff),
                num(p.t),
                num(p.amplitude),
                opt(fit.map(|f| f.slope)),
                opt(fit.map(|f| f.r_squared)),
            ]],
        )?;
        let slope = fit.map(|f| f.slope);
        checks.push(CheckResult::new("residual decreasing", decreasing, format!("relative L1 {rel:?}")));
        checks.push(CheckResult::new(
            "residual slope",
            slope.is_some_and(|s| s >= p.min_slope),
            format!("slope {} (>= {})", show(slope), p.min_slope),
        ));
    }
    Ok(())
}

fn sweep(p: &SweepParams, sink: &mut CsvSink, checks: &mut Vec<CheckResult>) -> Outcome {
    let report = sobolev_scaling_sweep(&p.wkb, &p.s_primes, p.t, p.points_per_period)?;
    let comment = sink.comment().to_string();
    let write = |e: conslaw_core::Error| Failure::Write(e.to_string());
    report.write_rows_csv(sink.raw("sweep_rows.csv")?, Some(&comment)).map_err(write)?;
    report.write_slopes_csv(sink.raw("sweep_slopes.csv")?, Some(&comment)).map_err(write)?;
    for ((&s, &want), &tol) in p.s_primes.iter().zip(&p.expect_slopes).zip(&p.slope_tol) {
        let got = report.slope_for(s).map(|r| r.gagliardo_slope);
        checks.push(CheckResult::new(
            format!("slope s'={s}"),
            got.is_some_and(|g| (g - want).abs() <= tol),
            format!("gagliardo slope {}, expected {want} ± {tol}", show(got)),
        ));
    }
    Ok(())
}

fn oracle(p: &OracleParams, seed: u64, sink: &mut CsvSink, checks: &mut Vec<CheckResult>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(p.cases);
    let mut mismatches = 0;
    for case in 0..p.cases {
        let len = rng.gen_range(2..=p.max_len);
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-64i32..=64) as f64 / 64.0).collect();
        let s = p.s[case % p.s.len()];
        let f = SampledFunction::from_values(values.clone())?;
        let dp = tv_s(&f, s)?;
        let brute = tv_s_bruteforce(&f, s)?;
        let equal = dp.value == brute && dp.reevaluate(&values) == dp.value;
        mismatches += usize::from(!equal);
        let joined: Vec<String> = values.iter().map(|&v| num(v)).collect();
        rows.push([
            case.to_string(),
            len.to_string(),
            num(s),
            num(dp.value),
            num(brute),
            equal.to_string(),
            joined.join(" "),
        ]);
    }
    sink.table("oracle.csv", &["case", "len", "s", "dp", "brute", "equal", "values"], rows)?;
    checks.push(CheckResult::new(
        "dp equals brute force",
        mismatches == 0,
        format!("{} cases, {mismatches} mismatches", p.cases),
    ));
    Ok(())
}
