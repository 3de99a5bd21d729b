//! Closed-form equilibria for the linear family `P(q) = 1 - q`, `g(x) = x`.
//!
//! Everything except the band-expansion helpers is generic over [`Field`], so
//! the formulas evaluate exactly over [`crate::Rational`].

use crate::error::{Error, Result};
use crate::market::{linear_consumer_surplus, Bandwidth, CongestionFunction, MarketConfig, MarketMode, Role};
use crate::scalar::{Field, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormResult<F> {
    /// Announced prices in provider order; split tariffs list licensed first.
    pub prices: Vec<F>,
    pub masses: Vec<F>,
    pub profits: Vec<F>,
    pub total_mass: F,
    pub consumer_surplus: F,
    pub social_welfare: F,
    /// Name of the formula that produced the numbers.
    pub formula: &'static str,
    /// Named by-products such as thresholds or alternative readings.
    pub extra: Vec<(&'static str, F)>,
}

impl<F: Field> ClosedFormResult<F> {
    fn compose(formula: &'static str, prices: Vec<F>, masses: Vec<F>, profits: Vec<F>, total: F) -> Self {
        let cs = linear_consumer_surplus(F::one(), total.clone());
        let sw = profits.iter().cloned().fold(cs.clone(), |acc, p| acc + p);
        Self {
            prices,
            masses,
            profits,
            total_mass: total,
            consumer_surplus: cs,
            social_welfare: sw,
            formula,
            extra: Vec::new(),
        }
    }

    pub fn extra(&self, name: &str) -> Option<F> {
        self.extra.iter().find(|(n, _)| *n == name).map(|(_, v)| v.clone())
    }

    /// Converts every number with `f`, e.g. from exact rationals to floats.
    pub fn map<G, M: Fn(&F) -> G>(&self, f: M) -> ClosedFormResult<G> {
        ClosedFormResult {
            prices: self.prices.iter().map(&f).collect(),
            masses: self.masses.iter().map(&f).collect(),
            profits: self.profits.iter().map(&f).collect(),
            total_mass: f(&self.total_mass),
            consumer_surplus: f(&self.consumer_surplus),
            social_welfare: f(&self.social_welfare),
            formula: self.formula,
            extra: self.extra.iter().map(|(n, v)| (*n, f(v))).collect(),
        }
    }
}

fn positive<F: Field>(name: &str, v: &F) -> Result<()> {
    if *v > F::zero() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive, got {v:?}")))
    }
}

fn unit_interval_open<F: Field>(alpha: &F) -> Result<()> {
    if *alpha >= F::zero() && *alpha < F::one() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("alpha must lie in [0, 1), got {alpha:?}")))
    }
}

/// Unbundled monopoly: one provider selling over the merged band `B + W`.
pub fn monopoly_combined<F: Field>(b: F, w: F) -> Result<ClosedFormResult<F>> {
    positive("B", &b)?;
    positive("W", &w)?;
    let s = b + w;
    let two = F::int(2);
    let x = s.clone() / (two.clone() * (F::one() + s));
    let p = F::one() / two;
    let profit = p.clone() * x.clone();
    Ok(ClosedFormResult::compose("monopoly over merged band", vec![p], vec![x.clone()], vec![profit], x))
}

/// Bundling fraction at which the bundled monopoly matches the merged band.
pub fn monopoly_alpha_star<F: Field>(b: F, w: F) -> Result<F> {
    positive("B", &b)?;
    if w < F::zero() {
        return Err(Error::InvalidConfig("W must be nonnegative".into()));
    }
    Ok(w.clone() / (b + w))
}

/// Incumbent on `B`, entrant holding `W` exclusively.
pub fn exclusive_use_equilibrium<F: Field>(b: F, w: F) -> Result<ClosedFormResult<F>> {
    positive("B", &b)?;
    positive("W", &w)?;
    let (one, two, three, four) = (F::one(), F::int(2), F::int(3), F::int(4));
    let den = four.clone() + four.clone() * b.clone() + four * w.clone() + three * b.clone() * w.clone();
    let p1 = (two.clone() + two.clone() * b.clone() + w.clone()) / den.clone();
    let p2 = (two.clone() + b.clone() + two * w.clone()) / den;
    let spread = one.clone() + b.clone() + w.clone();
    let x1 = b.clone() * (one.clone() + w.clone()) / spread.clone() * p1.clone();
    let x2 = w * (one + b) / spread * p2.clone();
    let profits = vec![p1.clone() * x1.clone(), p2.clone() * x2.clone()];
    let total = x1.clone() + x2.clone();
    Ok(ClosedFormResult::compose("exclusive use equilibrium", vec![p1, p2], vec![x1, x2], profits, total))
}

/// Incumbent with split tariffs against one entrant, unlicensed price zero.
///
/// `masses` holds the licensed mass and the whole unlicensed load; `extra`
/// carries `alpha0 = x_u / (x_u + x_l)`.
pub fn unbundled_1v1_equilibrium<F: Field>(b: F, w: F) -> Result<ClosedFormResult<F>> {
    positive("B", &b)?;
    positive("W", &w)?;
    let one = F::one();
    let xl = b.clone() / (F::int(2) * (b.clone() + one.clone() + w.clone()));
    let xu = w.clone() * (one.clone() - xl.clone()) / (one.clone() + w.clone());
    let p = (one.clone() - xl.clone()) / (one + w) - xl.clone() / b;
    let profit = p.clone() * xl.clone();
    let total = xl.clone() + xu.clone();
    let alpha0 = xu.clone() / total.clone();
    let mut out = ClosedFormResult::compose(
        "unbundled incumbent and entrant",
        vec![p, F::zero(), F::zero()],
        vec![xl, xu],
        vec![profit, F::zero()],
        total,
    );
    out.extra.push(("alpha0", alpha0));
    Ok(out)
}

/// Symmetric bundled equilibrium of `m` incumbents sharing `b_total`.
///
/// The price is the closed form; the per-provider mass solves the symmetric
/// Wardrop condition at that price. `extra` records the printed aggregate
/// mass expression under both readings of its bandwidth symbol.
pub fn symmetric_bundled_equilibrium<F: Field>(m: usize, b_total: F, w: F, alpha: F) -> Result<ClosedFormResult<F>> {
    if m < 2 {
        return Err(Error::InvalidConfig("need at least two incumbents".into()));
    }
    positive("B_t", &b_total)?;
    positive("W", &w)?;
    unit_interval_open(&alpha)?;
    let one = F::one();
    let mf = F::from_usize(m).expect("provider count fits the field");
    let t = (mf.clone() - one.clone()) / mf.clone();
    let beta = (one.clone() - alpha.clone()) * (one.clone() - alpha.clone());
    let a2 = alpha.clone() * alpha;
    let den =
        F::int(2) * beta.clone() * w.clone() + t.clone() * (a2.clone() * b_total.clone() + b_total.clone() * w.clone());
    let p = beta.clone() * w.clone() / den.clone();
    let own = beta.clone() * mf.clone() / b_total.clone();
    let shared = one.clone() + a2.clone() / w.clone();
    let x = (one.clone() - p.clone()) / (own + mf.clone() * shared);
    let total = mf.clone() * x.clone();
    let printed = |band: F| {
        band * w.clone() / den.clone()
            * (t.clone()
                + beta.clone() * w.clone()
                    / (mf.clone()
                        * (beta.clone() * w.clone() + a2.clone() * b_total.clone() + b_total.clone() * w.clone())))
    };
    let q_total_band = printed(b_total.clone());
    let q_share_band = printed(b_total.clone() / mf.clone());
    let mut out = ClosedFormResult::compose(
        "symmetric bundled incumbents",
        vec![p.clone(); m],
        vec![x.clone(); m],
        vec![p * x; m],
        total,
    );
    out.extra.push(("q_printed_total_band", q_total_band));
    out.extra.push(("q_printed_share_band", q_share_band));
    Ok(out)
}

/// Bundled incumbent against one entrant as the unlicensed band grows without bound.
///
/// The incumbent terms are the published limits; the entrant terms follow
/// from the same best-response pair.
pub fn one_v_one_winf<F: Field>(b: F, alpha: F) -> Result<ClosedFormResult<F>> {
    positive("B", &b)?;
    unit_interval_open(&alpha)?;
    let one = F::one();
    let beta = (one.clone() - alpha.clone()) * (one - alpha);
    let den = F::int(4) * beta.clone() + F::int(3) * b.clone();
    let p1 = beta.clone() / den.clone();
    let x1 = b.clone() / den.clone();
    let p2 = F::int(2) * beta.clone() / den.clone();
    let x2 = F::int(2) * (beta + b) / den;
    let profits = vec![p1.clone() * x1.clone(), p2.clone() * x2.clone()];
    let total = x1.clone() + x2.clone();
    Ok(ClosedFormResult::compose(
        "bundled incumbent and entrant, unbounded band",
        vec![p1, p2],
        vec![x1, x2],
        profits,
        total,
    ))
}

/// Licensed-band multiplier that reproduces bundling over an unbounded
/// unlicensed band when `g(x) = k x^p`: `(1 - alpha)^(-(p + 1) / p)`.
pub fn band_expansion_factor<T: Real>(p: T, alpha: T) -> Result<T> {
    if !(alpha >= T::zero() && alpha < T::one()) {
        return Err(Error::InvalidConfig(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(p >= T::one()) {
        return Err(Error::InvalidConfig(format!("congestion exponent must be at least 1, got {p}")));
    }
    Ok((T::one() - alpha).powf(-(p + T::one()) / p))
}

/// The incumbents-only market without unlicensed traffic whose equilibria
/// match bundling at `alpha` over an unbounded band.
pub fn band_expansion_equivalent<T: Real>(config: &MarketConfig<T>, alpha: T) -> Result<MarketConfig<T>> {
    config.validate()?;
    if config.mode != MarketMode::Bundled || config.providers.iter().any(|p| p.role != Role::Incumbent) {
        return Err(Error::Unsupported("band expansion covers bundled incumbents only".into()));
    }
    if !config.unlicensed.is_infinite() {
        return Err(Error::Unsupported("band expansion needs an unbounded unlicensed band".into()));
    }
    let exponent = match config.congestion {
        CongestionFunction::Linear { .. } => T::one(),
        CongestionFunction::Power { p, .. } => p,
    };
    let factor = band_expansion_factor(exponent, alpha)?;
    let mut out = config.clone();
    for p in &mut out.providers {
        p.licensed = p.licensed * factor;
    }
    out.alpha = T::zero();
    out.unlicensed = Bandwidth::Infinite;
    out.validate()?;
    Ok(out)
}

/// Slope of the bundled incumbent's equilibrium profit in `alpha` at zero,
/// against one entrant with `B` and `W`. Positive iff `4 + 4W - 3BW > 0`.
///
/// Equal to `p1' x1 + p1 x1'` at zero; the leading factor is the price
/// numerator `2 + 2B + W`.
pub fn exclusive_profit_slope_at_zero<F: Field>(b: F, w: F) -> Result<F> {
    positive("B", &b)?;
    positive("W", &w)?;
    let (one, two, three, four) = (F::one(), F::int(2), F::int(3), F::int(4));
    let spread = one.clone() + b.clone() + w.clone();
    let den =
        four.clone() + four.clone() * b.clone() + four.clone() * w.clone() + three.clone() * b.clone() * w.clone();
    let num = b.clone()
        * (one + w.clone())
        * (two.clone() + two.clone() * b.clone() + w.clone())
        * (two * spread.clone() * (four.clone() + four * w.clone() - three * b * w));
    Ok(num / (spread * den.clone() * den.clone() * den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn monopoly_values() {
        assert_eq!(monopoly_combined(r(1, 1), r(1, 1)).unwrap().profits[0], r(1, 6));
        assert_eq!(monopoly_combined(r(1, 1), r(3, 1)).unwrap().profits[0], r(1, 5));
        assert!(monopoly_combined(r(0, 1), r(1, 1)).is_err());
        assert_eq!(monopoly_alpha_star(r(1, 1), r(1, 1)).unwrap(), r(1, 2));
        assert_eq!(monopoly_alpha_star(r(3, 1), r(1, 1)).unwrap(), r(1, 4));
        assert_eq!(monopoly_alpha_star(r(3, 1), r(0, 1)).unwrap(), r(0, 1));
    }

    #[test]
    fn exclusive_values() {
        let e = exclusive_use_equilibrium(r(1, 1), r(1, 1)).unwrap();
        assert_eq!(e.prices, vec![r(1, 3), r(1, 3)]);
        assert_eq!(e.masses, vec![r(2, 9), r(2, 9)]);
        assert_eq!(e.profits, vec![r(2, 27), r(2, 27)]);
        assert_eq!(e.social_welfare, r(20, 81));
        let e = exclusive_use_equilibrium(r(3, 1), r(1, 1)).unwrap();
        assert_eq!(e.prices, vec![r(9, 29), r(7, 29)]);
    }

    #[test]
    fn unbundled_values() {
        let u = unbundled_1v1_equilibrium(r(1, 1), r(1, 1)).unwrap();
        assert_eq!(u.prices[0], r(1, 4));
        assert_eq!(u.masses, vec![r(1, 6), r(5, 12)]);
        assert_eq!(u.profits[0], r(1, 24));
        assert_eq!(u.extra("alpha0"), Some(r(5, 7)));
    }

    #[test]
    fn symmetric_values() {
        let s = symmetric_bundled_equilibrium(2, r(2, 1), r(1, 1), r(0, 1)).unwrap();
        assert_eq!(s.prices[0], r(1, 3));
        assert_eq!(s.masses[0], r(2, 9));
        assert_eq!(s.extra("q_printed_total_band"), Some(s.total_mass));
        assert_ne!(s.extra("q_printed_share_band"), Some(s.total_mass));
        assert!(symmetric_bundled_equilibrium(2, r(2, 1), r(1, 1), r(1, 1)).is_err());
    }

    #[test]
    fn printed_mass_reading_holds_off_the_easy_point() {
        for (m, bt, w, a) in
            [(3, r(1, 1), r(1, 2), r(3, 10)), (5, r(4, 1), r(4, 1), r(7, 10)), (2, r(1, 1), r(3, 1), r(1, 2))]
        {
            let s = symmetric_bundled_equilibrium(m, bt, w, a).unwrap();
            assert_eq!(s.extra("q_printed_total_band"), Some(s.total_mass));
        }
    }

    #[test]
    fn unbounded_band_values() {
        let o = one_v_one_winf(r(1, 1), r(0, 1)).unwrap();
        assert_eq!((o.prices[0], o.masses[0], o.profits[0]), (r(1, 7), r(1, 7), r(1, 49)));
        assert_eq!(one_v_one_winf(r(2, 1), r(0, 1)).unwrap().profits[0], r(1, 50));
        let a = 1.0 - 3f64.sqrt() / 2.0;
        assert!((one_v_one_winf(1.0, a).unwrap().profits[0] - 1.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn expansion_factor() {
        assert!((band_expansion_factor(1.0f64, 0.5).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(band_expansion_factor(2.5, 0.0).unwrap(), 1.0);
        assert!((band_expansion_factor(2.0, 0.5).unwrap() - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn slope_sign_follows_boundary() {
        for (b, w) in [(r(1, 1), r(1, 1)), (r(3, 1), r(1, 1)), (r(2, 1), r(4, 1)), (r(1, 1), r(4, 1))] {
            let slope = exclusive_profit_slope_at_zero(b, w).unwrap();
            let inside = b < r(4, 3) * (Rational::from_integer(1) + w) / w;
            assert_eq!(slope > r(0, 1), inside);
        }
    }

    // The published limits of dp1/dalpha and dx1/dalpha, combined by the product rule.
    fn product_rule_slope(b: Rational, w: Rational) -> Rational {
        let one = Rational::from_integer(1);
        let n = |k: i64| Rational::from_integer(k);
        let den = n(4) + n(4) * b + n(4) * w + n(3) * b * w;
        let p1 = (n(2) + n(2) * b + w) / den;
        let x1 = b * (one + w) / (one + b + w) * p1;
        let dp = -(n(4) * (one + w) + b * b * (n(8) + n(9) * w) + b * (n(12) + n(17) * w + n(6) * w * w)) / (den * den);
        let dx = b
            * (one + w)
            * (b * b * (n(8) + n(3) * w) + b * (n(20) + n(19) * w) + n(4) * (n(3) + n(5) * w + n(2) * w * w))
            / ((one + b + w) * den * den);
        dp * x1 + p1 * dx
    }

    #[test]
    fn slope_matches_product_rule() {
        assert_eq!(exclusive_profit_slope_at_zero(r(1, 1), r(1, 1)).unwrap(), r(4, 135));
        for (b, w) in [(r(1, 2), r(3, 1)), (r(3, 1), r(1, 2)), (r(2, 1), r(2, 1)), (r(7, 3), r(5, 4))] {
            assert_eq!(exclusive_profit_slope_at_zero(b, w).unwrap(), product_rule_slope(b, w));
        }
    }
}
