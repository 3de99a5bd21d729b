mod common;

use common::{bundled, cases};
use proptest::prelude::*;
use spectrum_core::market::{MarketConfig, Tariff};
use spectrum_core::nash::NashOptions;
use spectrum_core::{
    check_supermodularity, find_equilibrium, find_equilibrium_with, verify_equilibrium, Bandwidth, MarketMode,
};

fn market() -> impl Strategy<Value = MarketConfig<f64>> {
    (common::mode(), prop::collection::vec(0.2f64..4.0, 1..=3), 0usize..=2, 0.2f64..6.0, 0.0f64..0.95).prop_map(
        |(mode, b, entrants, w, alpha)| {
            let entrants = if mode == MarketMode::Exclusive { 1 } else { entrants };
            MarketConfig::linear(mode, &b, entrants, Bandwidth::Finite(w), alpha).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn converged_equilibria_are_certified(config in market()) {
        let eq = find_equilibrium(&config).unwrap();
        prop_assume!(eq.converged);
        prop_assert!(eq.eps_ne <= 1e-7);
        // Independent re-check of the returned profile.
        prop_assert!(verify_equilibrium(&config, &eq.prices).unwrap() <= 1e-7);
    }

    #[test]
    fn larger_band_earns_more(b in prop::collection::vec(0.1f64..5.0, 2..=4), w in 0.1f64..10.0, alpha in 0.0f64..0.95) {
        let config = bundled(&b, 0, w, alpha);
        let eq = find_equilibrium(&config).unwrap();
        prop_assert!(eq.converged);
        for i in 0..b.len() {
            for j in 0..b.len() {
                if b[i] > b[j] {
                    prop_assert!(eq.welfare.profits[i] >= eq.welfare.profits[j] - 1e-9);
                }
            }
        }
    }

    #[test]
    fn identical_providers_price_alike(m in 2usize..=5, b_total in 0.2f64..5.0, w in 0.1f64..10.0, alpha in 0.0f64..0.95) {
        let config = MarketConfig::symmetric(m, b_total, Bandwidth::Finite(w), alpha).unwrap();
        let eq = find_equilibrium(&config).unwrap();
        let prices = spectrum_core::nash::single_prices(&eq.prices);
        let mean = prices.iter().sum::<f64>() / m as f64;
        prop_assert!(prices.iter().all(|p| (p - mean).abs() <= 1e-7));
    }

    #[test]
    fn unlicensed_prices_collapse(b in prop::collection::vec(0.2f64..4.0, 1..=2), entrants in 0usize..=2, w in 0.2f64..6.0) {
        prop_assume!(b.len() + entrants >= 2);
        let config = MarketConfig::linear(MarketMode::Unbundled, &b, entrants, Bandwidth::Finite(w), 0.0).unwrap();
        let opts = NashOptions { pin_unlicensed: false, ..NashOptions::default() };
        let eq = find_equilibrium_with(&config, &opts).unwrap();
        prop_assert!(eq.converged);
        for (i, t) in eq.prices.tariffs.iter().enumerate() {
            match *t {
                Tariff::Split { unlicensed, .. } => prop_assert!(unlicensed <= 1e-6),
                Tariff::Single(p) if !config.providers[i].is_incumbent() => prop_assert!(p <= 1e-6),
                Tariff::Single(_) => {}
            }
        }
    }

    #[test]
    fn complements_climb_monotonically(b in prop::collection::vec(0.1f64..5.0, 1..=5), w in 0.1f64..10.0, alpha in 0.0f64..0.99) {
        let config = bundled(&b, 0, w, alpha);
        prop_assert!(check_supermodularity(&config).unwrap());
        let opts = NashOptions { pin_unlicensed: false, ..NashOptions::default() };
        let eq = find_equilibrium_with(&config, &opts).unwrap();
        prop_assert!(eq.converged && eq.monotone);
    }
}

#[test]
fn exclusive_spot_value() {
    let config = MarketConfig::linear(MarketMode::Exclusive, &[1.0], 1, Bandwidth::Finite(1.0), 0.0).unwrap();
    let eq = find_equilibrium(&config).unwrap();
    for p in spectrum_core::nash::single_prices(&eq.prices) {
        assert!((p - 1.0 / 3.0).abs() < 1e-7);
    }
}
