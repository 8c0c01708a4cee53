use std::sync::Arc;

use conslaw_core::constructions::{
    cheng_initial_data, extrema_amplitudes, oscillator, oscillator_extrema, powerlaw_oscillation, profile_evolve,
    select_delta, wkb_initial, wkb_reconstruct, OscillatorParams, WkbConfig,
};
use conslaw_core::flux::{Flux, Interval};
use conslaw_core::numerics::log_log_fit;
use conslaw_core::sampled::{l1_distance, SampledFunction};
use conslaw_core::scalar::linspace;
use conslaw_core::transport::{characteristic_flow, evolve_continuous, godunov_solve, Boundary, GodunovConfig};
use conslaw_core::variation::{classify_growth, partial_variation_series, tv_s, GrowthModel, SeriesProbe, Verdict};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = OscillatorParams<f64>> {
    (0.05f64..0.9, 0.01f64..0.99).prop_map(|(s, frac)| OscillatorParams::new(s, frac * (1.0 - s)).unwrap())
}

proptest! {
    #[test]
    fn exponents_are_linked(p in params()) {
        prop_assert!((p.b - p.s * (1.0 + p.c)).abs() <= 1e-14 * p.b.max(1.0));
    }

    #[test]
    fn critical_smoothness_balances_the_exponents(d in 2usize..8, frac in 0.01f64..0.99) {
        let s = 1.0 / d as f64;
        let p = OscillatorParams::new(s, frac * (1.0 - s)).unwrap();
        prop_assert!((p.b * d as f64 - (1.0 + p.c)).abs() <= 1e-12 * (1.0 + p.c));
    }

    #[test]
    fn oscillator_hits_its_extrema(p in params(), k in 1usize..50) {
        let x = oscillator_extrema(&p, k)[k - 1];
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let g: f64 = oscillator(&p, x).unwrap();
        prop_assert!((g - sign * x.powf(p.b)).abs() <= 1e-9 * x.powf(p.b));
    }

    #[test]
    fn oscillator_is_bounded_by_its_envelope(p in params(), x in 0.0f64..=1.0) {
        let g: f64 = oscillator(&p, x).unwrap();
        prop_assert!(g.abs() <= x.powf(p.b) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fast_decay_converges_and_critical_exponent_diverges(s in 0.1f64..0.3, frac in 0.0f64..1.0) {
        // eta in [s, 1 - s): the tail exponent 1 + eta/s stays >= 2; slower cases need far
        // longer truncations to be decided
        let eta = s + frac * (1.0 - 2.0 * s - 1e-3);
        let p = OscillatorParams::new(s, eta).unwrap();
        let n = 10_000;
        let amps = extrema_amplitudes(&p, n);
        let sums = |q: f64| partial_variation_series(&SeriesProbe::new(|k: usize| amps[k - 1], q, n).unwrap()).unwrap();

        let g = classify_growth(&sums(1.0 / s)).unwrap();
        prop_assert_eq!(g.verdict, Verdict::Convergent);
        let tail = g.tail_exponent.unwrap_or(f64::INFINITY);
        prop_assert!(tail.is_infinite() || (tail - (1.0 + eta / s)).abs() <= 0.1, "tail {}", tail);

        let g = classify_growth(&sums(1.0 / (s + eta))).unwrap();
        prop_assert_eq!(g.verdict, Verdict::Divergent);
        prop_assert_eq!(g.model, GrowthModel::Logarithmic);
    }
}

#[test]
fn cheng_data_is_continuous_at_the_junctions() {
    let flux = Flux::cubic(Interval::new(-1.0, 1.0).unwrap());
    let p = OscillatorParams::new(0.5, 0.25).unwrap();
    let data = select_delta(&flux, 0.2, p, 0.5).unwrap();
    assert_eq!(cheng_initial_data(&data, 0.0), 0.2);
    assert_eq!(cheng_initial_data(&data, -1e-9), 0.2);
    assert_eq!(cheng_initial_data(&data, 1.0), 0.2 - data.delta);
    assert_eq!(cheng_initial_data(&data, 1.0 + 1e-9), 0.2 - data.delta);
    assert!(data.delta > 0.0 && data.delta <= 0.8);
}

#[test]
fn longer_targets_need_smaller_amplitudes() {
    let flux = Flux::cubic(Interval::new(-1.0, 1.0).unwrap());
    let p = OscillatorParams::new(0.5, 0.25).unwrap();
    let deltas: Vec<f64> = [0.1, 1.0, 10.0].iter().map(|&t| select_delta(&flux, 0.0, p, t).unwrap().delta).collect();
    assert!(deltas.windows(2).all(|w| w[1] <= w[0]), "{deltas:?}");
    for &t in &[0.1, 1.0, 10.0] {
        let data = select_delta(&flux, 0.0, p, t).unwrap();
        assert!(data.certified_t_delta >= t);
        let flow = characteristic_flow(&flux, |y| cheng_initial_data(&data, y), t, &data.y_grid).unwrap();
        assert!(flow.monotone);
    }
}

#[test]
fn boundary_state_folds_the_oscillation_inwards() {
    let flux = Flux::power_law(2.5, Interval::new(0.0, 1.0).unwrap()).unwrap();
    let p = OscillatorParams::new(0.4, 0.3).unwrap();
    let data = select_delta(&flux, 0.0, p, 1.0).unwrap();
    assert_eq!(data.boundary_sign, Some(1.0));
    assert!(data.y_grid.iter().all(|&y| cheng_initial_data(&data, y) >= 0.0));
}

#[test]
fn transported_cheng_data_keeps_its_variation() {
    let flux = Flux::cubic(Interval::new(-1.0, 1.0).unwrap());
    let p = OscillatorParams::new(0.5, 0.25).unwrap();
    let data = select_delta(&flux, 0.0, p, 1.0).unwrap();
    let u0 = |y: f64| cheng_initial_data(&data, y);
    let flow = characteristic_flow(&flux, u0, 1.0, &data.y_grid).unwrap();
    let moved = evolve_continuous(&flux, &data.transition(), 1.0, &flow.theta).unwrap();
    let initial = SampledFunction::from_values(data.y_grid.iter().map(|&y| u0(y)).collect()).unwrap();
    for s in [0.25, 0.5, 0.75] {
        assert_eq!(tv_s(&moved.solution, s).unwrap().value, tv_s(&initial, s).unwrap().value);
    }
}

fn quadratic_config(eps: Vec<f64>) -> WkbConfig<f64> {
    let flux = Flux::polynomial(vec![0.0, 0.0, 1.0], Interval::new(-1.0, 1.0).unwrap()).unwrap();
    WkbConfig::new(flux, 0.0, WkbConfig::sine_profile(0.5), eps, None).unwrap()
}

#[test]
fn reconstruction_starts_from_the_initial_data() {
    let cfg = quadratic_config(vec![0.5, 0.1]);
    assert_eq!((cfg.d, cfg.b_coeff, cfg.lambda), (1, 1.0, 0.0));
    let x = linspace(0.0, 1.0, 333);
    for &eps in &[0.5, 0.1] {
        let r = wkb_reconstruct(&cfg, eps, 0.0, &x).unwrap();
        for (&xi, &v) in x.iter().zip(r.values()) {
            assert!((v - wkb_initial(&cfg, eps, xi).unwrap()).abs() <= 1e-13);
        }
    }
}

#[test]
fn profile_matches_finite_volumes_before_the_shock() {
    let cfg = quadratic_config(vec![1.0]);
    let t = cfg.t_final;
    let profile = Flux::polynomial(vec![0.0, 0.0, 1.0], Interval::new(-0.6, 0.6).unwrap()).unwrap();
    let dxs = [1.0 / 250.0, 1.0 / 500.0, 1.0 / 1000.0, 1.0 / 2000.0];
    let mut errors = Vec::new();
    for &dx in &dxs {
        let g = GodunovConfig::new(dx, 0.9, Interval::new(0.0, 1.0).unwrap(), Boundary::Periodic).unwrap();
        let centres = g.centres();
        let init = SampledFunction::from_fn(centres.clone(), |x| (cfg.profile_u0)(x)).unwrap();
        let numerical = godunov_solve(&profile, &init, t, &g).unwrap();
        let exact = profile_evolve(&cfg, t, &centres).unwrap();
        errors.push(l1_distance(&numerical, &exact).unwrap());
    }
    let order = log_log_fit(&dxs, &errors).unwrap().slope;
    assert!(order >= 0.8, "errors {errors:?}, order {order}");
}

#[test]
fn powerlaw_oscillation_is_the_rescaled_full_solution() {
    let profile: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
        Arc::new(|th: f64| 0.4 * (2.0 * std::f64::consts::PI * th).sin() + 0.1);
    let cells = 400;
    let t = 0.8;
    for &eps in &[0.5, 0.125] {
        let g =
            GodunovConfig::new(eps / cells as f64, 0.9, Interval::new(0.0, eps).unwrap(), Boundary::Periodic).unwrap();
        let centres = g.centres();
        let init = SampledFunction::from_fn(centres.clone(), |x| eps * profile(x / eps)).unwrap();
        let flux = Flux::power_law(2.0, Interval::new(-eps, eps).unwrap()).unwrap();
        let direct = godunov_solve(&flux, &init, t, &g).unwrap();
        let scaled = powerlaw_oscillation(1.0, eps, &profile, t, &centres, cells).unwrap();
        let gap = direct.values().iter().zip(scaled.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-10 * eps, "eps {eps}: gap {gap}");
    }
}
