use spectrum_core::market::MarketConfig;
use spectrum_core::nash::NashOptions;
use spectrum_core::{
    compute_b_threshold, optimize_alpha, profit_optimal_alpha_winf, welfare_gap, Bandwidth, Multiplicity, Objective,
};

fn profit_optimal_welfare(m: usize, b_total: f64, w: f64) -> f64 {
    let template = MarketConfig::symmetric(m, b_total, Bandwidth::Finite(w), 0.0).unwrap();
    let r = optimize_alpha(&template, Objective::Profit, &NashOptions::default()).unwrap();
    assert!(r.failures.is_empty());
    r.equilibrium.welfare.social_welfare
}

#[test]
fn welfare_trend_in_provider_count_flips_with_band() {
    let small: Vec<f64> = [2, 4, 8, 16].iter().map(|&m| profit_optimal_welfare(m, 1.0, 1e6)).collect();
    assert!(small.windows(2).all(|w| w[1] < w[0]), "{small:?}");
    let large: Vec<f64> = [2, 4, 8, 16].iter().map(|&m| profit_optimal_welfare(m, 4.0, 1e6)).collect();
    assert!(large.windows(2).all(|w| w[1] > w[0]), "{large:?}");
}

#[test]
fn gap_approaches_quarter() {
    let opts = NashOptions::default();
    let gaps: Vec<f64> = [2, 8, 32]
        .iter()
        .map(|&m| welfare_gap(Multiplicity::Finite(m), 1.0, Bandwidth::Finite(1e6), &opts).unwrap())
        .collect();
    assert!(gaps.windows(2).all(|g| (0.25 - g[1]).abs() < (0.25 - g[0]).abs()), "{gaps:?}");
}

#[test]
fn finite_band_gap_stays_below_quarter() {
    let opts = NashOptions::default();
    for m in [2, 5, 10] {
        for b_total in [1.0, 3.0] {
            for w in [1.0, 1e6] {
                let g = welfare_gap(Multiplicity::Finite(m), b_total, Bandwidth::Finite(w), &opts).unwrap();
                assert!((-1e-9..=0.25 + 1e-6).contains(&g), "M={m} B_t={b_total} W={w}: {g}");
            }
        }
    }
}

#[test]
fn unbounded_band_optimum_matches_numeric_search() {
    let opts = NashOptions::default();
    for m in [2, 3, 5] {
        for b_total in [1.0, 2.0, 4.0] {
            let closed = profit_optimal_alpha_winf(Multiplicity::Finite(m), b_total).unwrap();
            let template = MarketConfig::symmetric(m, b_total, Bandwidth::Finite(1e8), 0.0).unwrap();
            let numeric = optimize_alpha(&template, Objective::Profit, &opts).unwrap();
            assert!((closed.alpha_star - numeric.alpha_star).abs() <= 5e-3, "M={m} B_t={b_total}");
            assert!((closed.per_sp_profit - numeric.value).abs() <= 1e-6);
        }
    }
}

#[test]
fn threshold_falls_towards_two() {
    let mut prev = f64::INFINITY;
    for m in [2, 3, 4, 8, 16, 100] {
        let b: f64 = compute_b_threshold(Multiplicity::Finite(m)).unwrap();
        // Independent check: 1/B_th maximises the unbounded-band profit
        // k (k + t) / ((2k + t)^2 (1 + k)) over the effective inverse band k.
        let t = (m as f64 - 1.0) / m as f64;
        let f = |k: f64| k * (k + t) / ((2.0 * k + t).powi(2) * (1.0 + k));
        let (mut lo, mut hi) = (1e-6, 10.0);
        for _ in 0..200 {
            let (a, c) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if f(a) < f(c) {
                lo = a
            } else {
                hi = c
            }
        }
        assert!((b - 2.0 / (lo + hi)).abs() < 1e-6, "M={m}: {b} vs {}", 2.0 / (lo + hi));
        assert!(b < prev && b > 2.0);
        prev = b;
    }
    assert_eq!(compute_b_threshold::<f64>(Multiplicity::Infinite).unwrap(), 2.0);
}

#[test]
fn unbounded_gap_closed_form() {
    let opts = NashOptions::default();
    for b_total in [0.5, 1.0, 2.0, 4.0] {
        let g: f64 = welfare_gap(Multiplicity::Infinite, b_total, Bandwidth::Infinite, &opts).unwrap();
        assert_eq!(g, 1.0 / (2.0 + f64::max(2.0, b_total)));
    }
}
