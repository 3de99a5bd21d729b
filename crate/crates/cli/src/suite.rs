//! The acceptance criteria as runnable checks.
//!
//! Every criterion reports one or more measured quantities next to the
//! tolerance it must meet. Mutation mode perturbs the reference constants of
//! one criterion so the harness itself can be seen to fail.

use std::cell::RefCell;
use std::time::Instant;

use anyhow::{ensure, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use spectrum_core::market::{Allocation, Delivered, PriceProfile, Share, Tariff};
use spectrum_core::nash::single_prices;
use spectrum_core::oracle;
use spectrum_core::{
    check_supermodularity, delivered_price, find_equilibrium_with, optimize_alpha, solve_wardrop,
    wardrop_linear_direct, welfare_gap, Bandwidth, EquilibriumResult, MarketConfig, MarketMode, Multiplicity,
    NashOptions, Objective, Rational,
};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub runtime_s: f64,
    pub budget_s: Option<f64>,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
}

impl CriterionReport {
    /// The check closest to (or furthest past) its tolerance.
    pub fn worst(&self) -> Option<&Check> {
        let ratio = |c: &Check| {
            if c.passed && c.measured <= 0.0 {
                0.0
            } else if c.tolerance > 0.0 {
                c.measured / c.tolerance
            } else if c.measured > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        };
        self.checks.iter().max_by(|a, b| {
            (!a.passed, ratio(a)).partial_cmp(&(!b.passed, ratio(b))).unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let budget = self.budget_s.map(|b| format!(" (budget {b}s)")).unwrap_or_default();
        let what = match (&self.error, self.worst()) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(c)) => format!(
                "{} checks, worst {}: {:.3e} vs tol {:.1e}",
                self.checks.len(),
                c.label,
                c.measured,
                c.tolerance
            ),
            (None, None) => "no checks".into(),
        };
        format!("{verdict} {} {:<26} {what} [{:.3}s{budget}]", self.id, self.name, self.runtime_s)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    /// Substring of a criterion id or name.
    pub filter: Option<String>,
    /// Criterion id whose reference constants get perturbed.
    pub mutate: Option<String>,
}

/// State shared by the criteria of one run.
pub struct Context {
    mutate: Option<String>,
    opts: NashOptions,
    current: RefCell<&'static str>,
    eps: RefCell<Vec<(&'static str, f64)>>,
}

impl Context {
    fn mutated(&self) -> bool {
        self.mutate.as_deref() == Some(*self.current.borrow())
    }

    /// `x`, or `x + rel * max(|x|, 1e-3)` when this criterion is mutated.
    fn reference(&self, x: f64, rel: f64) -> f64 {
        if self.mutated() {
            x + rel * x.abs().max(1e-3)
        } else {
            x
        }
    }

    fn solve(&self, config: &MarketConfig) -> Result<EquilibriumResult> {
        let eq = find_equilibrium_with(config, &self.opts)?;
        self.record(&eq);
        Ok(eq)
    }

    fn record(&self, eq: &EquilibriumResult) {
        if eq.converged {
            self.eps.borrow_mut().push((*self.current.borrow(), eq.eps_ne));
        }
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    /// `measured <= tolerance`.
    fn at_most(&mut self, label: impl Into<String>, measured: f64, tolerance: f64) {
        self.0.push(Check { label: label.into(), measured, tolerance, passed: measured <= tolerance });
    }

    /// `|value - reference| <= tolerance`.
    fn close(&mut self, label: impl Into<String>, value: f64, reference: f64, tolerance: f64) {
        self.at_most(label, (value - reference).abs(), tolerance);
    }

    /// A yes/no condition, measured as 0 (held) or 1 (violated).
    fn holds(&mut self, label: impl Into<String>, ok: bool) {
        self.at_most(label, if ok { 0.0 } else { 1.0 }, 0.0);
    }
}

type Run = fn(&Context, &mut Checks) -> Result<()>;

pub struct Criterion {
    pub id: &'static str,
    pub name: &'static str,
    pub budget_s: Option<f64>,
    run: Run,
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, budget_s, run: Run| Criterion { id, name, budget_s, run };
    vec![
        c("c01", "exclusive-closed-form", Some(1.0), c01),
        c("c02", "profit-optimal-alpha", Some(30.0), c02),
        c("c03", "welfare-gap", Some(120.0), c03),
        c("c04", "unbundled-crossing", None, c04),
        c("c05", "monopoly-dominance", None, c05),
        c("c06", "slope-boundary", None, c06),
        c("c07", "supermodularity", None, c07),
        c("c08", "band-expansion", None, c08),
        c("c09", "symmetric-formula", None, c09),
        c("c10", "band-monotonicity", None, c10),
        c("c11", "unlicensed-price-collapse", None, c11),
        c("c12", "property-suite", None, c12),
    ]
}

impl Criterion {
    pub fn matches(&self, filter: &str) -> bool {
        self.id.contains(filter) || self.name.contains(filter)
    }
}

pub fn run_suite(options: &SuiteOptions) -> Vec<CriterionReport> {
    let ctx = Context {
        mutate: options.mutate.clone(),
        opts: NashOptions::from_env(),
        current: RefCell::new(""),
        eps: RefCell::new(Vec::new()),
    };
    criteria()
        .into_iter()
        .filter(|c| options.filter.as_deref().is_none_or(|f| c.matches(f)))
        .map(|c| {
            *ctx.current.borrow_mut() = c.id;
            let mut checks = Checks::default();
            let start = Instant::now();
            let outcome = (c.run)(&ctx, &mut checks);
            let runtime_s = start.elapsed().as_secs_f64();
            let error = outcome.err().map(|e| format!("{e:#}"));
            let in_budget = c.budget_s.is_none_or(|b| runtime_s < b);
            let passed = error.is_none() && in_budget && !checks.0.is_empty() && checks.0.iter().all(|k| k.passed);
            CriterionReport { id: c.id, name: c.name, passed, checks: checks.0, runtime_s, budget_s: c.budget_s, error }
        })
        .collect()
}

fn linear(mode: MarketMode, b: &[f64], entrants: usize, w: f64, alpha: f64) -> Result<MarketConfig> {
    Ok(MarketConfig::linear(mode, b, entrants, Bandwidth::Finite(w), alpha)?)
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn c01(ctx: &Context, k: &mut Checks) -> Result<()> {
    let exact = oracle::exclusive_use_equilibrium(Rational::from_integer(1), Rational::from_integer(1))?;
    k.holds("closed form gives p = 1/3", exact.prices == vec![Rational::new(1, 3); 2]);
    k.holds("closed form gives profit = 2/27", exact.profits == vec![Rational::new(2, 27); 2]);
    let eq = ctx.solve(&linear(MarketMode::Exclusive, &[1.0], 1, 1.0, 0.0)?)?;
    let p = ctx.reference(1.0 / 3.0, 0.01);
    let profit = ctx.reference(2.0 / 27.0, 0.01);
    for (i, price) in single_prices(&eq.prices).into_iter().enumerate() {
        k.close(format!("p{}", i + 1), price, p, 1e-6);
        k.close(format!("profit{}", i + 1), eq.welfare.profits[i], profit, 1e-6);
    }
    Ok(())
}

fn c02(ctx: &Context, k: &mut Checks) -> Result<()> {
    let alpha_ref = ctx.reference(1.0 - 3f64.sqrt() / 2.0, 0.05);
    let profit_ref = ctx.reference(1.0 / 48.0, 0.05);
    let r = optimize_alpha(&linear(MarketMode::Bundled, &[1.0], 1, 1e6, 0.0)?, Objective::Profit, &ctx.opts)?;
    ctx.record(&r.equilibrium);
    k.close("alpha*(B=1)", r.alpha_star, alpha_ref, 1e-3);
    k.close("profit(B=1)", r.value, profit_ref, 1e-4);
    let r = optimize_alpha(&linear(MarketMode::Bundled, &[2.0], 1, 1e6, 0.0)?, Objective::Profit, &ctx.opts)?;
    ctx.record(&r.equilibrium);
    k.at_most("alpha*(B=2)", r.alpha_star, ctx.reference(1e-3, -2.0));
    k.close("profit(B=2)", r.value, ctx.reference(0.02, 0.05), 1e-4);
    Ok(())
}

fn c03(ctx: &Context, k: &mut Checks) -> Result<()> {
    for b_total in [0.5, 1.0, 2.0, 4.0] {
        let g = welfare_gap(Multiplicity::Infinite, b_total, Bandwidth::Infinite, &ctx.opts)?;
        let expected = ctx.reference(1.0 / (2.0 + f64::max(2.0, b_total)), 0.01);
        k.close(format!("closed gap B_t={b_total}"), g, expected, 0.0);
    }
    let g = welfare_gap(Multiplicity::Finite(200), 1.0, Bandwidth::Finite(1e6), &ctx.opts)?;
    k.close("gap M=200 W=1e6", g, ctx.reference(0.25, 0.1), 2e-2);
    Ok(())
}

fn c04(ctx: &Context, k: &mut Checks) -> Result<()> {
    let one = Rational::from_integer(1);
    let un = oracle::unbundled_1v1_equilibrium(one, one)?;
    let alpha0 = un.extra("alpha0").expect("unbundled oracle reports alpha0");
    k.holds("alpha0 = 5/7", alpha0 == Rational::new(5, 7));
    k.holds("unbundled profit = 1/24", un.profits[0] == Rational::new(1, 24));
    let at = ctx.solve(&linear(MarketMode::Bundled, &[1.0], 1, 1.0, to_f64(alpha0))?)?;
    k.close("incumbent profit at alpha0", at.welfare.profits[0], ctx.reference(1.0 / 24.0, 0.01), 1e-5);
    let mid = ctx.solve(&linear(MarketMode::Bundled, &[1.0], 1, 1.0, 0.5)?)?;
    // Entrant profit must exceed 1e-4: measured as the shortfall below it.
    k.at_most("entrant profit shortfall at 0.5", ctx.reference(1e-4, 200.0) - mid.welfare.profits[1], 0.0);
    let high = ctx.solve(&linear(MarketMode::Bundled, &[1.0], 1, 1.0, 0.8)?)?;
    k.at_most("entrant profit at 0.8", high.welfare.profits[1], ctx.reference(1e-6, -2.0));
    Ok(())
}

fn c05(ctx: &Context, k: &mut Checks) -> Result<()> {
    for (b, w) in [(1.0, 1.0), (3.0, 1.0)] {
        let bound = oracle::monopoly_combined(b, w)?.profits[0];
        let literal = (b + w) / (4.0 * (1.0 + b + w));
        k.close(format!("merged-band profit formula ({b},{w})"), bound, literal, 1e-15);
        if b == 1.0 {
            k.close("merged-band profit (1,1) = 1/6", bound, 1.0 / 6.0, 1e-15);
        }
        let bound = ctx.reference(bound, 0.01);
        let mut excess = f64::NEG_INFINITY;
        for i in 0..=100 {
            let eq = ctx.solve(&linear(MarketMode::Bundled, &[b], 0, w, i as f64 / 100.0)?)?;
            excess = excess.max(eq.welfare.profits[0] - bound);
        }
        k.at_most(format!("max excess over bound ({b},{w})"), excess, 1e-9);
        let star = oracle::monopoly_alpha_star(b, w)?;
        let eq = ctx.solve(&linear(MarketMode::Bundled, &[b], 0, w, star)?)?;
        k.close(format!("profit at W/(B+W) ({b},{w})"), eq.welfare.profits[0], bound, 1e-7);
    }
    Ok(())
}

fn c06(ctx: &Context, k: &mut Checks) -> Result<()> {
    let h = 1e-4;
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for b in [1.0, 4.0 / 3.0, 2.0, 3.0] {
        for w in [0.5, 1.0, 2.0, 4.0] {
            let boundary = ctx.reference(4.0 * (1.0 + w) / (3.0 * w), 0.15);
            if (b - boundary).abs() <= 0.05 {
                continue;
            }
            let profit = |alpha: f64| -> Result<f64> {
                Ok(ctx.solve(&linear(MarketMode::Bundled, &[b], 1, w, alpha)?)?.welfare.profits[0])
            };
            // alpha cannot go below zero, so use the one-sided second-order stencil.
            let slope = (-3.0 * profit(0.0)? + 4.0 * profit(h)? - profit(2.0 * h)?) / (2.0 * h);
            checked += 1;
            if (slope > 0.0) != (b < boundary) {
                mismatches += 1;
            }
        }
    }
    ensure!(checked > 0, "every grid point was excluded");
    k.at_most(format!("sign mismatches of {checked}"), mismatches as f64, 0.0);
    Ok(())
}

fn c07(ctx: &Context, k: &mut Checks) -> Result<()> {
    let expected = !ctx.mutated();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut wrong = 0usize;
    for _ in 0..200 {
        let m = rng.gen_range(1..=5);
        let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..=5.0)).collect();
        let w = rng.gen_range(0.1..=10.0);
        let alpha = rng.gen_range(0.0..=0.99);
        if check_supermodularity(&linear(MarketMode::Bundled, &b, 0, w, alpha)?)? != expected {
            wrong += 1;
        }
    }
    k.at_most("configs without strategic complements", wrong as f64, 0.0);
    Ok(())
}

fn c08(ctx: &Context, k: &mut Checks) -> Result<()> {
    let factor = oracle::band_expansion_factor(1.0, 0.5)?;
    k.close("expansion factor at alpha=0.5", factor, 4.0, 1e-15);
    let factor = ctx.reference(factor, 0.05);
    let eq = ctx.solve(&linear(MarketMode::Bundled, &[1.0, 2.0], 0, 1e8, 0.5)?)?;
    let scaled = MarketConfig::linear(MarketMode::Bundled, &[factor, 2.0 * factor], 0, Bandwidth::Infinite, 0.0)?;
    let reference = ctx.solve(&scaled)?;
    let (p, q) = (single_prices(&eq.prices), single_prices(&reference.prices));
    let mut worst_p: f64 = 0.0;
    let mut worst_x: f64 = 0.0;
    for i in 0..2 {
        worst_p = worst_p.max((p[i] - q[i]).abs());
        worst_x = worst_x.max((eq.solution.alloc.mass(i) - reference.solution.alloc.mass(i)).abs());
    }
    k.at_most("price gap", worst_p, 1e-4);
    k.at_most("mass gap", worst_x, 1e-4);
    Ok(())
}

fn c09(ctx: &Context, k: &mut Checks) -> Result<()> {
    let mut worst: f64 = 0.0;
    for m in [2usize, 3, 5] {
        for b_total in [1.0, 2.0, 4.0] {
            for w in [0.5, 1.0, 4.0] {
                for alpha in [0.0, 0.3, 0.7] {
                    let cf = oracle::symmetric_bundled_equilibrium(m, b_total, w, alpha)?;
                    let price = ctx.reference(cf.prices[0], 0.01);
                    let eq = ctx.solve(&MarketConfig::symmetric(m, b_total, Bandwidth::Finite(w), alpha)?)?;
                    for p in single_prices(&eq.prices) {
                        worst = worst.max((p - price).abs());
                    }
                }
            }
        }
    }
    k.at_most("max price gap over 81 points", worst, 1e-6);
    Ok(())
}

fn c10(ctx: &Context, k: &mut Checks) -> Result<()> {
    let step = ctx.reference(0.0, 50.0);
    let mut prev: Option<[f64; 3]> = None;
    let mut drops = [0.0f64; 3];
    for w in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let eq = ctx.solve(&MarketConfig::symmetric(3, 2.0, Bandwidth::Finite(w), 0.4)?)?;
        let now = [eq.welfare.profits[0], eq.welfare.consumer_surplus, eq.welfare.social_welfare];
        if let Some(before) = prev {
            for i in 0..3 {
                drops[i] = drops[i].max(before[i] + step - now[i]);
            }
        }
        prev = Some(now);
    }
    for (label, d) in ["per-SP profit", "CS", "SW"].iter().zip(drops) {
        k.at_most(format!("largest {label} decrease"), d, 1e-9);
    }
    Ok(())
}

fn c11(ctx: &Context, k: &mut Checks) -> Result<()> {
    let config = linear(MarketMode::Unbundled, &[1.0], 1, 1.0, 0.0)?;
    let opts = NashOptions { pin_unlicensed: false, ..ctx.opts.clone() };
    let eq = find_equilibrium_with(&config, &opts)?;
    ctx.record(&eq);
    k.holds("unconstrained iteration converged", eq.converged);
    let Tariff::Split { unlicensed, .. } = eq.prices.tariffs[0] else {
        anyhow::bail!("incumbent should quote two prices")
    };
    let bound = ctx.reference(1e-6, -2.0);
    k.at_most("incumbent unlicensed price", unlicensed, bound);
    k.at_most("entrant price", single_prices(&eq.prices)[1], bound);
    Ok(())
}

/// Random linear market with a random price on every slot.
fn random_case(rng: &mut ChaCha8Rng) -> Result<(MarketConfig, PriceProfile<f64>)> {
    let mode = [MarketMode::Bundled, MarketMode::Unbundled, MarketMode::Exclusive][rng.gen_range(0..3)];
    let m = rng.gen_range(1..=4);
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..5.0)).collect();
    let entrants = if mode == MarketMode::Exclusive { 1 } else { rng.gen_range(0..=2) };
    let config = linear(mode, &b, entrants, rng.gen_range(0.1..10.0), rng.gen_range(0.0..0.99))?;
    let mut prices = PriceProfile::zeros(&config);
    for slot in config.slots() {
        prices.set(slot, rng.gen_range(0.0..1.0));
    }
    Ok((config, prices))
}

/// Largest `|min(x, d - P(Q) - shift)|` over every band of every provider.
fn complementarity(
    config: &MarketConfig,
    prices: &PriceProfile<f64>,
    alloc: &Allocation<f64>,
    shift: f64,
) -> Result<f64> {
    let level = config.demand.eval(alloc.total()) + shift;
    let mut worst: f64 = 0.0;
    for i in 0..config.providers.len() {
        let pairs = match (delivered_price(config, prices, alloc, i)?, alloc.shares[i]) {
            (Delivered::Split { licensed, unlicensed }, Share::Split { licensed: xl, unlicensed: xu }) => {
                vec![(xl, licensed), (xu, unlicensed)]
            }
            (d, s) => vec![(s.total(), d.best())],
        };
        for (x, d) in pairs {
            worst = worst.max(x.min(d - level).abs());
        }
    }
    Ok(worst)
}

fn share_gap(a: &Allocation<f64>, b: &Allocation<f64>) -> f64 {
    a.shares
        .iter()
        .zip(&b.shares)
        .map(|(x, y)| match (*x, *y) {
            (Share::Split { licensed: l0, unlicensed: u0 }, Share::Split { licensed: l1, unlicensed: u1 }) => {
                (l0 - l1).abs().max((u0 - u1).abs())
            }
            _ => (x.total() - y.total()).abs(),
        })
        .fold(0.0, f64::max)
}

fn c12(ctx: &Context, k: &mut Checks) -> Result<()> {
    let shift = ctx.reference(0.0, 1e-3);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst_c, mut worst_x) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let (config, prices) = random_case(&mut rng)?;
        let a = solve_wardrop(&config, &prices)?;
        let b = wardrop_linear_direct(&config, &prices)?;
        worst_c = worst_c.max(complementarity(&config, &prices, &a.alloc, shift)?);
        worst_x = worst_x.max(share_gap(&a.alloc, &b.alloc));
    }
    k.at_most("complementarity residual (500 configs)", worst_c, 1e-9);
    k.at_most("level-set vs active-set gap (500 configs)", worst_x, 1e-8);
    let eps = ctx.eps.borrow();
    let worst = eps.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    k.at_most(format!("eps_ne over {} equilibria from earlier criteria", eps.len()), worst, 1e-7);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_by_id_or_name() {
        let names: Vec<_> = criteria().into_iter().filter(|c| c.matches("c02")).map(|c| c.id).collect();
        assert_eq!(names, vec!["c02"]);
        assert!(criteria().iter().any(|c| c.matches("band-expansion")));
    }

    #[test]
    fn mutation_breaks_the_mutated_criterion_only() {
        let opts = SuiteOptions { filter: Some("c01".into()), mutate: Some("c01".into()) };
        let r = run_suite(&opts);
        assert_eq!(r.len(), 1);
        assert!(!r[0].passed);
        let opts = SuiteOptions { filter: Some("c01".into()), mutate: Some("c09".into()) };
        assert!(run_suite(&opts)[0].passed);
    }
}
