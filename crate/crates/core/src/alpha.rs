//! Choice of the bundling fraction on top of the pricing equilibrium.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{Bandwidth, MarketConfig, MarketMode};
use crate::nash::{find_equilibrium_with, find_symmetric_equilibrium, EquilibriumResult, NashOptions};
use crate::scalar::Real;
use crate::search::{bisect, golden_max};

/// Largest unlicensed band used by the numeric path.
pub const W_CAP: f64 = 1e8;
/// Upper end of the `alpha` grid; `alpha = 1` itself is excluded. Much
/// closer to one the bundled link's own congestion, `(1 - alpha)^2 / B` per
/// unit mass, is lost to rounding and neither Wardrop solver certifies.
pub const ALPHA_TOP: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Objective {
    /// Profit of the first provider (per provider in symmetric markets).
    Profit,
    /// Social welfare.
    Welfare,
}

/// Number of incumbents, possibly unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Multiplicity {
    Finite(usize),
    Infinite,
}

impl Multiplicity {
    /// `(M - 1) / M`
    pub fn crowding<T: Real>(self) -> Result<T> {
        match self {
            Multiplicity::Finite(m) if m >= 2 => Ok(T::lit((m - 1) as f64) / T::lit(m as f64)),
            Multiplicity::Finite(m) => Err(Error::InvalidConfig(format!("need at least two incumbents, got {m}"))),
            Multiplicity::Infinite => Ok(T::one()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaResult<T> {
    pub alpha_star: T,
    pub value: T,
    /// Grid points that produced a converged equilibrium, with their values.
    pub samples: Vec<(T, T)>,
    /// Grid points excluded because the inner equilibrium failed.
    pub failures: Vec<T>,
    pub equilibrium: EquilibriumResult<T>,
}

fn symmetric<T: Real>(config: &MarketConfig<T>) -> bool {
    let first = config.providers[0];
    config.mode == MarketMode::Bundled
        && config.providers.len() >= 2
        && config.providers.iter().all(|p| p.role == first.role && p.licensed == first.licensed)
}

/// Equilibrium of `template` at `alpha`, through the symmetric solver when
/// all providers are identical.
pub fn equilibrium_at<T: Real>(
    template: &MarketConfig<T>,
    alpha: T,
    opts: &NashOptions<T>,
) -> Result<EquilibriumResult<T>> {
    let config = template.with_alpha(alpha)?;
    if symmetric(&config) {
        find_symmetric_equilibrium(&config, opts)
    } else {
        find_equilibrium_with(&config, opts)
    }
}

fn objective_value<T: Real>(eq: &EquilibriumResult<T>, objective: Objective) -> T {
    match objective {
        Objective::Profit => eq.welfare.profits[0],
        Objective::Welfare => eq.welfare.social_welfare,
    }
}

/// Maximises `objective` over `alpha` by a 201-point grid and a golden
/// refinement of the best grid cell. Ties go to the lowest `alpha`.
pub fn optimize_alpha<T: Real>(
    template: &MarketConfig<T>,
    objective: Objective,
    opts: &NashOptions<T>,
) -> Result<AlphaResult<T>> {
    template.validate()?;
    if template.mode != MarketMode::Bundled {
        return Err(Error::InvalidConfig("alpha only matters for bundled markets".into()));
    }
    let mut template = template.clone();
    let cap = T::lit(W_CAP);
    template.unlicensed = match template.unlicensed {
        Bandwidth::Finite(w) => Bandwidth::Finite(w.min(cap)),
        Bandwidth::Infinite => Bandwidth::Finite(cap),
    };
    let n = 201;
    let grid: Vec<T> = (0..n)
        .map(|k| if k + 1 == n { T::lit(ALPHA_TOP) } else { T::lit(k as f64) / T::lit((n - 1) as f64) })
        .collect();
    let mut samples = Vec::with_capacity(n);
    let mut failures = Vec::new();
    let mut best: Option<(usize, T, EquilibriumResult<T>)> = None;
    for (k, &alpha) in grid.iter().enumerate() {
        match equilibrium_at(&template, alpha, opts) {
            Ok(eq) if eq.converged => {
                let v = objective_value(&eq, objective);
                samples.push((alpha, v));
                if best.as_ref().is_none_or(|(_, bv, _)| v > *bv) {
                    best = Some((k, v, eq));
                }
            }
            _ => failures.push(alpha),
        }
    }
    let (k, mut value, mut equilibrium) = best.ok_or(Error::NoAdmissibleAlpha)?;
    let mut alpha_star = grid[k];
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(n - 1)];
    let mut refined: Option<(T, T, EquilibriumResult<T>)> = None;
    let (_, v) = golden_max(
        |alpha| match equilibrium_at(&template, alpha, opts) {
            Ok(eq) if eq.converged => {
                let v = objective_value(&eq, objective);
                if refined.as_ref().is_none_or(|(_, rv, _)| v > *rv) {
                    refined = Some((alpha, v, eq));
                }
                v
            }
            _ => T::neg_infinity(),
        },
        lo,
        hi,
        T::tol(1e-6, 64.0),
        200,
    );
    if v > value {
        if let Some((ra, rv, eq)) = refined.filter(|r| r.1 >= v) {
            alpha_star = ra;
            value = rv;
            equilibrium = eq;
        }
    }
    Ok(AlphaResult { alpha_star, value, samples, failures, equilibrium })
}

/// `B_th = 1 / k*` where `k*` solves `-2k^3 - 3t k^2 + t^2 = 0` on `[t/2, 1/2]`,
/// `t = (M - 1) / M`.
pub fn compute_b_threshold<T: Real>(m: Multiplicity) -> Result<T> {
    if m == Multiplicity::Infinite {
        return Ok(T::lit(2.0));
    }
    let t: T = m.crowding()?;
    let cubic = |k: T| -(T::lit(2.0) * k * k * k) - T::lit(3.0) * t * k * k + t * t;
    let (lo, hi) = bisect(|k| -cubic(k), t / T::lit(2.0), T::lit(0.5), T::tol(1e-12, 4.0), 200);
    Ok(T::lit(2.0) / (lo + hi))
}

/// Profit-optimal common `alpha` of symmetric incumbents over an unbounded band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WinfOptimum<T> {
    pub alpha_star: T,
    /// `(1 - alpha*)^2 / B_t`
    pub k_star: T,
    pub b_threshold: T,
    pub price: T,
    pub total_mass: T,
    /// Zero when the number of incumbents is unbounded.
    pub per_sp_mass: T,
    pub per_sp_profit: T,
    pub aggregate_profit: T,
    pub social_welfare: T,
}

pub fn profit_optimal_alpha_winf<T: Real>(m: Multiplicity, b_total: T) -> Result<WinfOptimum<T>> {
    if !(b_total > T::zero() && b_total.is_finite()) {
        return Err(Error::InvalidConfig(format!("B_t must be positive, got {b_total}")));
    }
    let t: T = m.crowding()?;
    let b_threshold = compute_b_threshold::<T>(m)?;
    let (alpha_star, k) = if b_total <= b_threshold {
        (T::one() - (b_total / b_threshold).sqrt(), b_threshold.recip())
    } else {
        (T::zero(), b_total.recip())
    };
    let price = k / (T::lit(2.0) * k + t);
    let total_mass = (T::one() - price) / (T::one() + k);
    let aggregate_profit = price * total_mass;
    let (per_sp_mass, per_sp_profit) = match m {
        Multiplicity::Finite(n) => {
            let n = T::lit(n as f64);
            (total_mass / n, aggregate_profit / n)
        }
        Multiplicity::Infinite => (T::zero(), T::zero()),
    };
    Ok(WinfOptimum {
        alpha_star,
        k_star: k,
        b_threshold,
        price,
        total_mass,
        per_sp_mass,
        per_sp_profit,
        aggregate_profit,
        social_welfare: total_mass * total_mass / T::lit(2.0) + aggregate_profit,
    })
}

/// Profit-optimal `alpha` and profit for one incumbent against one entrant
/// over an unbounded band.
pub fn one_v_one_alpha_star_winf<T: Real>(b: T) -> Result<(T, T)> {
    if !(b > T::zero()) {
        return Err(Error::InvalidConfig(format!("B must be positive, got {b}")));
    }
    if b <= T::lit(4.0) / T::lit(3.0) {
        Ok((T::one() - (T::lit(3.0) * b).sqrt() / T::lit(2.0), T::one() / T::lit(48.0)))
    } else {
        let d = T::lit(4.0) + T::lit(3.0) * b;
        Ok((T::zero(), b / (d * d)))
    }
}

/// Both ends of a welfare gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapReport<T> {
    pub gap: T,
    pub profit_alpha: T,
    /// Social welfare at the profit-optimal `alpha`.
    pub profit_welfare: T,
    /// Welfare-optimal `alpha`; one (the limit) over an unbounded band.
    pub welfare_alpha: T,
    pub welfare_value: T,
}

/// Social welfare at the welfare-optimal `alpha` minus that at the
/// profit-optimal `alpha`, for `m` symmetric incumbents sharing `b_total`.
pub fn welfare_gap<T: Real>(m: Multiplicity, b_total: T, w: Bandwidth<T>, opts: &NashOptions<T>) -> Result<T> {
    Ok(welfare_gap_report(m, b_total, w, opts)?.gap)
}

/// [`welfare_gap`] with the two optima it compares.
///
/// An unbounded band uses the closed forms, where the welfare optimum is
/// `1/2` in the limit `alpha -> 1`; a finite band runs two numeric
/// optimisations.
pub fn welfare_gap_report<T: Real>(
    m: Multiplicity,
    b_total: T,
    w: Bandwidth<T>,
    opts: &NashOptions<T>,
) -> Result<GapReport<T>> {
    match (m, w) {
        (_, Bandwidth::Infinite) => {
            let opt = profit_optimal_alpha_winf(m, b_total)?;
            let half = T::lit(0.5);
            let gap = match m {
                Multiplicity::Infinite => (T::lit(2.0) + b_total.max(T::lit(2.0))).recip(),
                Multiplicity::Finite(_) => half - opt.social_welfare,
            };
            Ok(GapReport {
                gap,
                profit_alpha: opt.alpha_star,
                profit_welfare: opt.social_welfare,
                welfare_alpha: T::one(),
                welfare_value: half,
            })
        }
        (Multiplicity::Infinite, Bandwidth::Finite(_)) => {
            Err(Error::Unsupported("unbounded incumbent count needs an unbounded band".into()))
        }
        (Multiplicity::Finite(n), Bandwidth::Finite(width)) => {
            let template = MarketConfig::symmetric(n, b_total, Bandwidth::Finite(width.min(T::lit(W_CAP))), T::zero())?;
            let welfare = optimize_alpha(&template, Objective::Welfare, opts)?;
            let profit = optimize_alpha(&template, Objective::Profit, opts)?;
            let profit_welfare = profit.equilibrium.welfare.social_welfare;
            Ok(GapReport {
                gap: welfare.value - profit_welfare,
                profit_alpha: profit.alpha_star,
                profit_welfare,
                welfare_alpha: welfare.alpha_star,
                welfare_value: welfare.value,
            })
        }
    }
}
