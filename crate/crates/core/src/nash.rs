//! Price competition: best responses, tatonnement and equilibrium checks.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::market::{
    welfare_report, Bandwidth, InverseDemand, MarketConfig, MarketMode, PriceProfile, Slot, SlotBand, Tariff,
    WelfareReport,
};
use crate::scalar::Real;
use crate::search::{golden_max, refine_increasing};
use crate::wardrop::{linear_network, solve_network, solve_wardrop, tangent, Network, WardropSolution, TOL_ACTIVE};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NashOptions<T> {
    pub max_rounds: usize,
    /// Sup-norm price change that ends the tatonnement.
    pub price_tol: T,
    /// Largest certified unilateral gain accepted as an equilibrium.
    pub ne_tol: T,
    /// Fix unlicensed prices at zero first when several providers share `W`.
    pub pin_unlicensed: bool,
    /// Rerun from the all-choke-price profile and report a different limit.
    pub probe_multiplicity: bool,
    /// Uniform grid points scanned before local refinement.
    pub scan_points: usize,
}

impl<T: Real> Default for NashOptions<T> {
    fn default() -> Self {
        Self {
            max_rounds: 500,
            price_tol: T::tol(1e-8, 16.0),
            ne_tol: T::tol(1e-7, 64.0),
            pin_unlicensed: true,
            probe_multiplicity: false,
            scan_points: 16,
        }
    }
}

impl<T: Real> NashOptions<T> {
    /// Defaults, with `SPECTRUM_EQ_MAXITER` overriding the round cap.
    pub fn from_env() -> Self {
        let mut opts = Self::default();
        if let Some(n) = std::env::var("SPECTRUM_EQ_MAXITER").ok().and_then(|v| v.trim().parse().ok()) {
            opts.max_rounds = n;
        }
        opts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BestResponse<T> {
    pub price: T,
    pub profit: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumResult<T> {
    pub prices: PriceProfile<T>,
    pub solution: WardropSolution<T>,
    pub welfare: WelfareReport<T>,
    /// Largest unilateral profit gain found by [`verify_equilibrium`].
    pub eps_ne: T,
    pub rounds: usize,
    pub converged: bool,
    /// Every round raised (or kept) every price.
    pub monotone: bool,
    pub pinned_unlicensed: bool,
    /// A different limit reached from the all-choke-price start, if probed.
    pub alternate: Option<PriceProfile<T>>,
}

/// Profit of one provider as a function of one of its prices.
struct Deviation<'a, T> {
    config: &'a MarketConfig<T>,
    base: PriceProfile<T>,
    slot: Slot,
    linear: bool,
}

impl<'a, T: Real> Deviation<'a, T> {
    fn new(config: &'a MarketConfig<T>, prices: &PriceProfile<T>, slot: Slot) -> Self {
        Self { config, base: prices.clone(), slot, linear: config.congestion.linear_slope().is_some() }
    }

    fn state(&self, price: T) -> Result<(Network<T>, Vec<T>)> {
        let prices = self.base.with(self.slot, price);
        let net = Network::build(self.config, &prices, Some(self.slot.provider))?;
        let y = if self.linear {
            match linear_network(self.config, &net) {
                Ok((y, _)) => y,
                Err(_) => solve_network(self.config, &net)?.0,
            }
        } else {
            solve_network(self.config, &net)?.0
        };
        Ok((net, y))
    }

    fn profit(&self, price: T) -> Result<T> {
        let (net, y) = self.state(price)?;
        Ok(net.revenue(&y, self.slot.provider))
    }

    /// Own-price derivative of profit; a stand-in `-1` when the slot is idle.
    fn derivative(&self, price: T) -> Result<Option<T>> {
        let (net, y) = self.state(price)?;
        let provider = self.slot.provider;
        let target = net
            .links
            .iter()
            .position(|lk| lk.provider == provider && slot_matches(lk.band, self.slot.band))
            .expect("slot has a link");
        if net.link_mass(&y, target) <= T::lit(TOL_ACTIVE) {
            return Ok(Some(-T::one()));
        }
        let Some(dy) = tangent(self.config, &net, &y, target) else {
            return Ok(None);
        };
        let mut d = net.link_mass(&y, target);
        for (l, lk) in net.links.iter().enumerate() {
            if lk.provider == provider {
                d = d + lk.p * dy[net.link_group[l]];
            }
        }
        Ok(Some(d))
    }
}

fn slot_matches(link: SlotBand, slot: SlotBand) -> bool {
    link == slot || (slot == SlotBand::Single && link != SlotBand::Unlicensed)
}

/// Profit-maximising price for `slot` with every other price held fixed.
///
/// A coarse scan brackets the optimum, which is then located from the sign
/// change of the profit derivative, or by golden section when the derivative
/// is not available. Flat profit returns the smallest maximising price.
pub fn best_response<T: Real>(
    config: &MarketConfig<T>,
    prices: &PriceProfile<T>,
    slot: Slot,
) -> Result<BestResponse<T>> {
    best_response_with(config, prices, slot, &NashOptions::default())
}

fn best_response_with<T: Real>(
    config: &MarketConfig<T>,
    prices: &PriceProfile<T>,
    slot: Slot,
    opts: &NashOptions<T>,
) -> Result<BestResponse<T>> {
    prices.validate(config)?;
    if slot.provider >= config.providers.len() {
        return Err(Error::InvalidConfig(format!("no provider {}", slot.provider)));
    }
    let dev = Deviation::new(config, prices, slot);
    let top = config.demand.choke_price();
    let n = opts.scan_points.max(3);
    let step = top / T::lit((n - 1) as f64);
    let grid: Vec<T> = (0..n).map(|k| if k + 1 == n { top } else { step * T::lit(k as f64) }).collect();
    let mut values = Vec::with_capacity(n);
    for &p in &grid {
        values.push(dev.profit(p)?);
    }
    let mut best_k = 0;
    for k in 1..n {
        if values[k] > values[best_k] {
            best_k = k;
        }
    }
    let lo = grid[best_k.saturating_sub(1)];
    let hi = grid[(best_k + 1).min(n - 1)];

    let mut candidates: Vec<(T, T)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let current = prices.get(slot);
    candidates.push((current, dev.profit(current)?));

    let mut failure: Option<Error> = None;
    let d_lo = dev.derivative(lo)?;
    let d_hi = dev.derivative(hi)?;
    let xtol = top * T::epsilon() * T::lit(8.0);
    let polished = match (d_lo, d_hi) {
        (Some(a), Some(b)) if a > T::zero() && b < T::zero() => {
            root_of_derivative(&dev, lo, hi, a, b, xtol, &mut failure)
        }
        _ => None,
    };
    match polished {
        Some(p) => candidates.push((p, dev.profit(p)?)),
        None => {
            let (x, v) = golden_max(
                |p| match dev.profit(p) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        T::neg_infinity()
                    }
                },
                lo,
                hi,
                top * T::tol(1e-9, 16.0),
                200,
            );
            candidates.push((x, v));
            let delta = top * T::tol(1e-7, 64.0);
            let (a, b) = ((x - delta).max(T::zero()), (x + delta).min(top));
            if let (Some(da), Some(db)) = (dev.derivative(a)?, dev.derivative(b)?) {
                if da > T::zero() && db < T::zero() {
                    if let Some(p) = root_of_derivative(&dev, a, b, da, db, xtol, &mut failure) {
                        candidates.push((p, dev.profit(p)?));
                    }
                }
            }
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let mut best = candidates[0];
    for &(p, v) in &candidates[1..] {
        if v > best.1 || (v == best.1 && p < best.0) {
            best = (p, v);
        }
    }
    let at_zero = values[0];
    if best.1 - at_zero <= T::tol(1e-13, 4.0) * at_zero.abs().max(T::one()) {
        best = (T::zero(), at_zero);
    }
    Ok(BestResponse { price: best.0, profit: best.1 })
}

fn root_of_derivative<T: Real>(
    dev: &Deviation<'_, T>,
    lo: T,
    hi: T,
    d_lo: T,
    d_hi: T,
    xtol: T,
    failure: &mut Option<Error>,
) -> Option<T> {
    let mut unavailable = false;
    let bracket = refine_increasing(
        |p| match dev.derivative(p) {
            Ok(Some(d)) => -d,
            Ok(None) => {
                unavailable = true;
                T::zero()
            }
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        },
        lo,
        hi,
        -d_lo,
        -d_hi,
        xtol,
        T::zero(),
        200,
    );
    if unavailable || failure.is_some() {
        None
    } else {
        Some(bracket.root())
    }
}

fn slot_profit<T: Real>(config: &MarketConfig<T>, prices: &PriceProfile<T>, provider: usize) -> Result<T> {
    let slot = Slot { provider, band: SlotBand::Single };
    Deviation::new(config, prices, slot).profit(prices.get(slot))
}

/// Best unilateral improvement of provider `i`; both prices move for split tariffs.
fn provider_gain<T: Real>(
    config: &MarketConfig<T>,
    prices: &PriceProfile<T>,
    i: usize,
    opts: &NashOptions<T>,
) -> Result<T> {
    let current = slot_profit(config, prices, i)?;
    if !config.is_split(i) {
        let br = best_response_with(config, prices, Slot { provider: i, band: SlotBand::Single }, opts)?;
        return Ok(br.profit - current);
    }
    let mut trial = prices.clone();
    let mut value = current;
    for _ in 0..50 {
        let before = trial.clone();
        for band in [SlotBand::Licensed, SlotBand::Unlicensed] {
            let slot = Slot { provider: i, band };
            let br = best_response_with(config, &trial, slot, opts)?;
            if br.profit > value {
                trial.set(slot, br.price);
                value = br.profit;
            }
        }
        if trial.distance(&before) <= T::tol(1e-12, 16.0) {
            break;
        }
    }
    Ok(value - current)
}

/// Certified `eps`: the largest unilateral profit gain over all providers.
///
/// Providers with identical role, band and tariff are checked once.
pub fn verify_equilibrium<T: Real>(config: &MarketConfig<T>, prices: &PriceProfile<T>) -> Result<T> {
    verify_with(config, prices, &NashOptions::default())
}

fn verify_with<T: Real>(config: &MarketConfig<T>, prices: &PriceProfile<T>, opts: &NashOptions<T>) -> Result<T> {
    config.validate()?;
    prices.validate(config)?;
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut eps = T::zero();
    for (i, provider) in config.providers.iter().enumerate() {
        let key = format!("{:?}|{:?}|{:?}", provider.role, provider.licensed, prices.tariffs[i]);
        if seen.insert(key, ()).is_some() {
            continue;
        }
        eps = eps.max(provider_gain(config, prices, i, opts)?);
    }
    Ok(eps)
}

struct Tatonnement<T> {
    prices: PriceProfile<T>,
    rounds: usize,
    converged: bool,
    monotone: bool,
}

fn iterate<T: Real>(
    config: &MarketConfig<T>,
    start: PriceProfile<T>,
    slots: &[Slot],
    opts: &NashOptions<T>,
) -> Result<Tatonnement<T>> {
    let mut prices = start;
    let mut monotone = true;
    let slack = T::tol(1e-9, 64.0);
    for round in 1..=opts.max_rounds {
        let before = prices.clone();
        for &slot in slots {
            let br = best_response_with(config, &prices, slot, opts)?;
            if br.price < prices.get(slot) - slack {
                monotone = false;
            }
            prices.set(slot, br.price);
        }
        if prices.distance(&before) < opts.price_tol {
            return Ok(Tatonnement { prices, rounds: round, converged: true, monotone });
        }
    }
    Ok(Tatonnement { prices, rounds: opts.max_rounds, converged: false, monotone })
}

fn assemble<T: Real>(
    config: &MarketConfig<T>,
    run: Tatonnement<T>,
    eps_ne: T,
    opts: &NashOptions<T>,
    pinned: bool,
    alternate: Option<PriceProfile<T>>,
) -> Result<EquilibriumResult<T>> {
    let solution = solve_wardrop(config, &run.prices)?;
    let welfare = welfare_report(config, &run.prices, &solution.alloc)?;
    Ok(EquilibriumResult {
        converged: run.converged && eps_ne <= opts.ne_tol,
        prices: run.prices,
        solution,
        welfare,
        eps_ne,
        rounds: run.rounds,
        monotone: run.monotone,
        pinned_unlicensed: pinned,
        alternate,
    })
}

/// Round-robin best-response iteration from the zero profile.
pub fn find_equilibrium<T: Real>(config: &MarketConfig<T>) -> Result<EquilibriumResult<T>> {
    find_equilibrium_with(config, &NashOptions::from_env())
}

pub fn find_equilibrium_with<T: Real>(config: &MarketConfig<T>, opts: &NashOptions<T>) -> Result<EquilibriumResult<T>> {
    config.validate()?;
    let slots = config.slots();
    let zero = PriceProfile::zeros(config);
    let mut pinned = false;
    let mut outcome = None;
    if opts.pin_unlicensed && config.mode == MarketMode::Unbundled && config.providers.len() >= 2 {
        let free: Vec<Slot> = slots
            .iter()
            .copied()
            .filter(|s| {
                s.band != SlotBand::Unlicensed
                    && !(s.band == SlotBand::Single && !config.providers[s.provider].is_incumbent())
            })
            .collect();
        let run = iterate(config, zero.clone(), &free, opts)?;
        let eps = verify_with(config, &run.prices, opts)?;
        if run.converged && eps <= opts.ne_tol {
            pinned = true;
            outcome = Some((run, eps));
        }
    }
    let (run, eps) = match outcome {
        Some(found) => found,
        None => {
            let run = iterate(config, zero, &slots, opts)?;
            let eps = verify_with(config, &run.prices, opts)?;
            (run, eps)
        }
    };
    let alternate = if opts.probe_multiplicity {
        let top = PriceProfile::uniform(config, config.demand.choke_price());
        let other = iterate(config, top, &slots, opts)?;
        (other.converged && other.prices.distance(&run.prices) > T::tol(1e-6, 64.0)).then_some(other.prices)
    } else {
        None
    };
    assemble(config, run, eps, opts, pinned, alternate)
}

/// Symmetric equilibrium of identical providers as the fixed point of the
/// common best response, found by bracketed root finding.
pub fn find_symmetric_equilibrium<T: Real>(
    config: &MarketConfig<T>,
    opts: &NashOptions<T>,
) -> Result<EquilibriumResult<T>> {
    config.validate()?;
    let first = config.providers[0];
    if config.mode != MarketMode::Bundled
        || config.providers.iter().any(|p| p.role != first.role || p.licensed != first.licensed)
    {
        return Err(Error::Unsupported("symmetric solve needs identical bundled providers".into()));
    }
    let slot = Slot { provider: 0, band: SlotBand::Single };
    let top = config.demand.choke_price();
    let mut evaluations = 0usize;
    let mut failure: Option<Error> = None;
    let mut gap = |p: T| -> T {
        evaluations += 1;
        match best_response_with(config, &PriceProfile::uniform(config, p), slot, opts) {
            Ok(br) => p - br.price,
            Err(e) => {
                failure.get_or_insert(e);
                T::zero()
            }
        }
    };
    let g_lo = gap(T::zero());
    let g_hi = gap(top);
    let bracket = refine_increasing(&mut gap, T::zero(), top, g_lo, g_hi, top * T::tol(1e-14, 8.0), T::zero(), 200);
    if let Some(e) = failure {
        return Err(e);
    }
    let prices = PriceProfile::uniform(config, bracket.root());
    let eps = verify_with(config, &prices, opts)?;
    let run = Tatonnement { prices, rounds: evaluations, converged: true, monotone: true };
    assemble(config, run, eps, opts, false, None)
}

/// Whether the linear bundled incumbents-only game has strategic
/// complements: the inverse of `diag(k2 (1-alpha)^2 / B_i) + (k1 + k2 alpha^2 / W) 11^T`
/// is positive on the diagonal and negative elsewhere.
pub fn check_supermodularity<T: Real>(config: &MarketConfig<T>) -> Result<bool> {
    config.validate()?;
    let k2 = config
        .congestion
        .linear_slope()
        .ok_or_else(|| Error::Unsupported("supermodularity test needs linear congestion".into()))?;
    let InverseDemand::Linear { slope: k1, .. } = config.demand;
    if config.mode != MarketMode::Bundled || config.entrants() > 0 {
        return Err(Error::Unsupported("supermodularity test covers bundled incumbents only".into()));
    }
    let alpha = config.alpha;
    let keep = T::one() - alpha;
    let common = k1
        + match config.unlicensed {
            Bandwidth::Finite(w) => k2 * alpha * alpha / w,
            Bandwidth::Infinite => T::zero(),
        };
    let n = config.providers.len();
    let matrix: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { k2 * keep * keep / config.providers[i].licensed + common } else { common })
                .collect()
        })
        .collect();
    for j in 0..n {
        let unit: Vec<T> = (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect();
        let col = linalg::solve(matrix.clone(), unit)?;
        for (i, &v) in col.iter().enumerate() {
            let ok = if i == j { v > T::zero() } else { v < T::zero() };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Convenience: one price per provider from a tariff list.
pub fn single_prices<T: Real>(profile: &PriceProfile<T>) -> Vec<T> {
    profile
        .tariffs
        .iter()
        .map(|t| match *t {
            Tariff::Single(p) => p,
            Tariff::Split { licensed, .. } => licensed,
        })
        .collect()
}
