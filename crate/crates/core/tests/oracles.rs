//! Closed forms against the numeric equilibrium engine.

mod common;

use common::{bundled, cases};
use proptest::prelude::*;
use spectrum_core::market::{MarketConfig, Share, Tariff};
use spectrum_core::nash::single_prices;
use spectrum_core::oracle::{
    band_expansion_equivalent, exclusive_use_equilibrium, monopoly_alpha_star, monopoly_combined, one_v_one_winf,
    symmetric_bundled_equilibrium, unbundled_1v1_equilibrium,
};
use spectrum_core::{find_equilibrium, Bandwidth, MarketMode, Rational};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn exclusive_use(b in 0.1f64..5.0, w in 0.1f64..10.0) {
        let cf = exclusive_use_equilibrium(b, w).unwrap();
        let config = MarketConfig::linear(MarketMode::Exclusive, &[b], 1, Bandwidth::Finite(w), 0.0).unwrap();
        let eq = find_equilibrium(&config).unwrap();
        for (i, p) in single_prices(&eq.prices).into_iter().enumerate() {
            prop_assert!(close(p, cf.prices[i], 1e-6));
            prop_assert!(close(eq.solution.alloc.mass(i), cf.masses[i], 1e-6));
        }
    }

    #[test]
    fn unbundled_pair(b in 0.1f64..5.0, w in 0.1f64..10.0) {
        let cf = unbundled_1v1_equilibrium(b, w).unwrap();
        let config = MarketConfig::linear(MarketMode::Unbundled, &[b], 1, Bandwidth::Finite(w), 0.0).unwrap();
        let eq = find_equilibrium(&config).unwrap();
        let Tariff::Split { licensed, unlicensed } = eq.prices.tariffs[0] else { panic!("split tariff expected") };
        prop_assert!(close(licensed, cf.prices[0], 1e-6));
        prop_assert!(close(unlicensed, 0.0, 1e-6));
        prop_assert!(close(single_prices(&eq.prices)[1], 0.0, 1e-6));
        let Share::Split { licensed: xl, .. } = eq.solution.alloc.shares[0] else { panic!("split share expected") };
        prop_assert!(close(xl, cf.masses[0], 1e-6));
        prop_assert!(close(eq.solution.alloc.unlicensed_load(&config), cf.masses[1], 1e-6));
    }

    #[test]
    fn symmetric_incumbents(m in 2usize..=6, b_total in 0.2f64..5.0, w in 0.1f64..10.0, alpha in 0.0f64..0.95) {
        let cf = symmetric_bundled_equilibrium(m, b_total, w, alpha).unwrap();
        let config = MarketConfig::symmetric(m, b_total, Bandwidth::Finite(w), alpha).unwrap();
        let eq = find_equilibrium(&config).unwrap();
        for (i, p) in single_prices(&eq.prices).into_iter().enumerate() {
            prop_assert!(close(p, cf.prices[i], 1e-6));
            prop_assert!(close(eq.solution.alloc.mass(i), cf.masses[i], 1e-6));
        }
        prop_assert!(close(eq.welfare.social_welfare, cf.social_welfare, 1e-6));
    }

    #[test]
    fn unbounded_band_pair(b in 0.1f64..5.0, alpha in 0.0f64..0.95) {
        let cf = one_v_one_winf(b, alpha).unwrap();
        for w in [Bandwidth::Infinite, Bandwidth::Finite(1e8)] {
            let config = MarketConfig::linear(MarketMode::Bundled, &[b], 1, w, alpha).unwrap();
            let eq = find_equilibrium(&config).unwrap();
            for (i, p) in single_prices(&eq.prices).into_iter().enumerate() {
                prop_assert!(close(p, cf.prices[i], 1e-6), "{:?} price {i}: {p} vs {}", w, cf.prices[i]);
                prop_assert!(close(eq.solution.alloc.mass(i), cf.masses[i], 1e-6));
            }
        }
    }

    #[test]
    fn exclusive_beats_unbundled_for_incumbent(b in 1i64..60, w in 1i64..60) {
        let (b, w) = (Rational::new(b, 10), Rational::new(w, 10));
        let ex = exclusive_use_equilibrium(b, w).unwrap();
        let un = unbundled_1v1_equilibrium(b, w).unwrap();
        prop_assert!(ex.profits[0] >= un.profits[0]);
    }

    #[test]
    fn small_alpha_beats_exclusive_welfare(b in 0.1f64..5.0, w in 0.1f64..10.0) {
        let ex = exclusive_use_equilibrium(b, w).unwrap();
        let eq = find_equilibrium(&bundled(&[b], 1, w, 1e-3)).unwrap();
        prop_assert!(eq.welfare.consumer_surplus > ex.consumer_surplus);
        prop_assert!(eq.welfare.social_welfare > ex.social_welfare);
    }

    #[test]
    fn welfare_rises_from_zero_alpha(b in 0.1f64..5.0, w in 0.1f64..10.0) {
        // With a large licensed band welfare can peak well before alpha = 0.02;
        // the slope at zero stays positive everywhere.
        let h = 1e-4;
        let at = |alpha: f64| find_equilibrium(&bundled(&[b], 1, w, alpha)).unwrap().welfare;
        let (f0, f1, f2) = (at(0.0), at(h), at(2.0 * h));
        let slope = |a: f64, b: f64, c: f64| (-3.0 * a + 4.0 * b - c) / (2.0 * h);
        prop_assert!(slope(f0.consumer_surplus, f1.consumer_surplus, f2.consumer_surplus) > 0.0);
        prop_assert!(slope(f0.social_welfare, f1.social_welfare, f2.social_welfare) > 0.0);
    }

    #[test]
    fn many_entrants_match_unbundled(b in 0.1f64..5.0, w in 0.1f64..10.0, entrants in 2usize..=3) {
        let un = unbundled_1v1_equilibrium(b, w).unwrap();
        let alpha0 = un.extra("alpha0").unwrap();
        for alpha in [0.2, 0.5, 0.8] {
            let eq = find_equilibrium(&bundled(&[b], entrants, w, alpha)).unwrap();
            if alpha <= alpha0 - 1e-3 {
                prop_assert!(close(eq.welfare.profits[0], un.profits[0], 1e-6));
                prop_assert!(close(eq.welfare.social_welfare, un.social_welfare, 1e-6));
                prop_assert!(close(eq.welfare.consumer_surplus, un.consumer_surplus, 1e-6));
            } else if alpha >= alpha0 + 1e-3 {
                // Past alpha0 the incumbent's own unlicensed traffic already
                // fills the band and the entrants are priced out, as with one.
                let single = find_equilibrium(&bundled(&[b], 1, w, alpha)).unwrap();
                prop_assert!(close(eq.welfare.profits[0], single.welfare.profits[0], 1e-6));
                prop_assert!(eq.welfare.profits[0] <= un.profits[0] + 1e-9);
                prop_assert!((1..=entrants).all(|j| eq.solution.alloc.mass(j) <= 1e-6));
            }
        }
    }

    #[test]
    fn symmetric_welfare_grows_with_band(m in 2usize..=6, b_total in 0.1f64..5.0, alpha in 0.0f64..0.95) {
        let mut prev: Option<spectrum_core::ClosedFormResult> = None;
        for w in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let cf = symmetric_bundled_equilibrium(m, b_total, w, alpha).unwrap();
            if let Some(p) = &prev {
                prop_assert!(cf.profits[0] >= p.profits[0] - 1e-15);
                prop_assert!(cf.consumer_surplus >= p.consumer_surplus - 1e-15);
                prop_assert!(cf.social_welfare >= p.social_welfare - 1e-15);
            }
            prev = Some(cf);
        }
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn monopoly_never_beats_merged_band(b in 0.1f64..5.0, w in 0.1f64..10.0) {
        let merged = monopoly_combined(b, w).unwrap().profits[0];
        for k in 0..=100 {
            let eq = find_equilibrium(&bundled(&[b], 0, w, k as f64 / 100.0)).unwrap();
            prop_assert!(eq.welfare.profits[0] <= merged + 1e-9);
        }
        let star = monopoly_alpha_star(b, w).unwrap();
        let eq = find_equilibrium(&bundled(&[b], 0, w, star)).unwrap();
        prop_assert!(close(eq.welfare.profits[0], merged, 1e-7));
    }

    #[test]
    fn bundling_crosses_unbundled_at_alpha0(b in 0.3f64..4.0, w in 0.3f64..4.0) {
        let un = unbundled_1v1_equilibrium(b, w).unwrap();
        let alpha0 = un.extra("alpha0").unwrap();
        prop_assume!(alpha0 > 0.1 && alpha0 < 0.89);
        let at = find_equilibrium(&bundled(&[b], 1, w, alpha0)).unwrap();
        prop_assert!(close(at.welfare.profits[0], un.profits[0], 1e-5));
        prop_assert!(at.welfare.profits[1] <= 1e-6);
        let below = find_equilibrium(&bundled(&[b], 1, w, alpha0 - 0.1)).unwrap();
        prop_assert!(below.welfare.profits[1] > 0.0);
        prop_assert!(below.welfare.profits[0] > un.profits[0]);
        let above = find_equilibrium(&bundled(&[b], 1, w, alpha0 + 0.1)).unwrap();
        prop_assert!(above.welfare.profits[1] <= 1e-6);
    }

    #[test]
    fn band_expansion_reproduces_bundling(b in prop::collection::vec(0.2f64..4.0, 1..=3), alpha in 0.0f64..0.9, square in any::<bool>()) {
        let mut config = MarketConfig::linear(MarketMode::Bundled, &b, 0, Bandwidth::Infinite, alpha).unwrap();
        if square {
            config.congestion = spectrum_core::CongestionFunction::Power { k: 1.0, p: 2.0 };
        }
        let expanded = band_expansion_equivalent(&config, alpha).unwrap();
        let lhs = find_equilibrium(&config).unwrap();
        let rhs = find_equilibrium(&expanded).unwrap();
        for i in 0..b.len() {
            prop_assert!(close(single_prices(&lhs.prices)[i], single_prices(&rhs.prices)[i], 1e-6));
            prop_assert!(close(lhs.solution.alloc.mass(i), rhs.solution.alloc.mass(i), 1e-6));
        }
    }
}

#[test]
fn crossing_point_for_unit_bands() {
    let un = unbundled_1v1_equilibrium(Rational::from_integer(1), Rational::from_integer(1)).unwrap();
    assert_eq!(un.extra("alpha0"), Some(Rational::new(5, 7)));
    assert_eq!(un.profits[0], Rational::new(1, 24));
}

#[test]
fn finite_band_approaches_scaled_band() {
    let c = MarketConfig::linear(MarketMode::Bundled, &[1.0, 2.0], 0, Bandwidth::Finite(1e8), 0.5).unwrap();
    let scaled = MarketConfig::linear(MarketMode::Bundled, &[4.0, 8.0], 0, Bandwidth::Infinite, 0.0).unwrap();
    let (a, b) = (find_equilibrium(&c).unwrap(), find_equilibrium(&scaled).unwrap());
    for i in 0..2 {
        assert!(close(single_prices(&a.prices)[i], single_prices(&b.prices)[i], 1e-4));
        assert!(close(a.solution.alloc.mass(i), b.solution.alloc.mass(i), 1e-4));
    }
}
