use conslaw_core::degeneracy::{holder_degeneracy, holder_grid, lpt_alpha, lpt_measure, smooth_degeneracy, LptProbe};
use conslaw_core::flux::{Flux, Interval};
use conslaw_core::scalar::geomspace;
use proptest::prelude::*;

fn unit() -> Interval<f64> {
    Interval::new(-1.0, 1.0).unwrap()
}

fn any_flux() -> impl Strategy<Value = Flux<f64>> {
    prop_oneof![
        Just(Flux::burgers(unit())),
        Just(Flux::cubic(unit())),
        (1.5f64..4.0).prop_map(|e| Flux::power_law(e, unit()).unwrap()),
        prop::collection::vec(-1.0f64..1.0, 3..6).prop_map(|c| Flux::polynomial(c, unit()).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lpt_measure_grows_with_delta_and_is_bounded(
        flux in any_flux(),
        angle in 0.0f64..std::f64::consts::TAU,
        d1 in 1e-4f64..0.5,
        factor in 1.0f64..4.0,
    ) {
        let (tau, xi) = (angle.cos(), angle.sin());
        let small = lpt_measure(&flux, &LptProbe::new(tau, xi, d1).unwrap(), 1000).unwrap();
        let large = lpt_measure(&flux, &LptProbe::new(tau, xi, d1 * factor).unwrap(), 1000).unwrap();
        prop_assert!(small <= large + 1e-12);
        prop_assert!(large <= flux.domain().width() + 1e-12);
        prop_assert!(small >= 0.0);
    }

    #[test]
    fn smooth_degeneracy_ignores_linear_terms(
        coeffs in prop::collection::vec(-1.0f64..1.0, 3..7),
        slope in -3.0f64..3.0,
        offset in -3.0f64..3.0,
    ) {
        let flux = Flux::polynomial(coeffs, unit()).unwrap();
        let a = smooth_degeneracy(&flux, 6, 201, 1e-10).unwrap();
        let b = smooth_degeneracy(&flux.add_linear(slope, offset), 6, 201, 1e-10).unwrap();
        prop_assert_eq!(a.d, b.d);
    }

    #[test]
    fn derivatives_match_finite_differences(
        coeffs in prop::collection::vec(-2.0f64..2.0, 2..8),
        e in 1.0f64..5.0,
    ) {
        let poly = Flux::polynomial(coeffs, unit()).unwrap();
        prop_assert!(poly.derivative_consistency(4, 101).unwrap() < 1e-5);
        let power = Flux::power_law(e, unit()).unwrap();
        prop_assert!(power.derivative_consistency(3, 101).unwrap() < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn finite_holder_exponent_means_monotone_speed(flux in any_flux()) {
        if holder_degeneracy(&flux, 120, 1e-2).unwrap().is_some() {
            let a: Vec<f64> = holder_grid(&flux, 120).iter().map(|&u| flux.speed(u).unwrap()).collect();
            let up = a.windows(2).all(|w| w[1] > w[0]);
            let down = a.windows(2).all(|w| w[1] < w[0]);
            prop_assert!(up || down);
        }
    }
}

#[test]
fn alpha_times_d_is_one_for_convex_families() {
    let deltas = geomspace(1e-4, 1e-2, 9);
    let mut fluxes = vec![Flux::burgers(unit())];
    for alpha in [1.0, 2.0, 3.0] {
        fluxes.push(Flux::power_law(1.0 + alpha, unit()).unwrap());
    }
    for flux in fluxes {
        let d = smooth_degeneracy(&flux, 8, 401, 1e-10).unwrap().d.unwrap() as f64;
        let alpha = lpt_alpha(&flux, &deltas, 64, 2000).unwrap().alpha;
        assert!((0.9..=1.1).contains(&(alpha * d)), "{flux:?}: alpha {alpha} d {d}");
    }
}

#[test]
fn nonconvex_speed_has_infinite_holder_exponent() {
    // f' = 3u^2 is not injective on [-1, 1]
    assert_eq!(holder_degeneracy(&Flux::cubic(unit()), 150, 1e-3).unwrap(), None);
    let shifted = Flux::cubic(Interval::new(0.1, 1.0).unwrap());
    assert!(holder_degeneracy(&shifted, 150, 1e-3).unwrap().is_some());
}
