// Shared generators for the integration suites.
#![allow(dead_code)]

use proptest::prelude::*;
use spectrum_core::market::{MarketConfig, PriceProfile};
use spectrum_core::{Bandwidth, MarketMode};

#[derive(Clone, Debug)]
pub struct Case {
    pub config: MarketConfig<f64>,
    pub prices: PriceProfile<f64>,
}

pub fn mode() -> impl Strategy<Value = MarketMode> {
    prop_oneof![Just(MarketMode::Bundled), Just(MarketMode::Unbundled), Just(MarketMode::Exclusive)]
}

/// Random linear market with random prices in `[0, 1]` on every slot.
pub fn linear_case() -> impl Strategy<Value = Case> {
    (
        mode(),
        prop::collection::vec(0.1f64..5.0, 1..=4),
        0usize..=2,
        0.1f64..10.0,
        0.0f64..0.99,
        prop::collection::vec(0.0f64..1.0, 12),
    )
        .prop_map(|(mode, b, entrants, w, alpha, seeds)| {
            let entrants = if mode == MarketMode::Exclusive { 1 } else { entrants };
            let config = MarketConfig::linear(mode, &b, entrants, Bandwidth::Finite(w), alpha).unwrap();
            let mut prices = PriceProfile::zeros(&config);
            for (slot, p) in config.slots().into_iter().zip(seeds) {
                prices.set(slot, p);
            }
            Case { config, prices }
        })
}

pub fn bundled(b: &[f64], entrants: usize, w: f64, alpha: f64) -> MarketConfig<f64> {
    MarketConfig::linear(MarketMode::Bundled, b, entrants, Bandwidth::Finite(w), alpha).unwrap()
}

/// Proptest settings without the regression file, which needs a `src/` next
/// to the test binary.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}
