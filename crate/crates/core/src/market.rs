//! Market description, delivered prices and welfare accounting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};

/// Congestion cost `g` applied to the load per unit bandwidth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CongestionFunction<T> {
    /// `g(x) = k x`
    Linear { k: T },
    /// `g(x) = k x^p`, `p >= 1`
    Power { k: T, p: T },
}

impl<T: Real> CongestionFunction<T> {
    /// `g(x) = x`
    pub fn unit() -> Self {
        Self::Linear { k: T::one() }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Linear { k } if k > T::zero() && k.is_finite() => Ok(()),
            Self::Power { k, p } if k > T::zero() && k.is_finite() && p >= T::one() && p.is_finite() => Ok(()),
            _ => Err(Error::InvalidConfig(format!("congestion parameters out of range: {self:?}"))),
        }
    }

    pub fn eval(&self, x: T) -> T {
        let x = x.max(T::zero());
        match *self {
            Self::Linear { k } => k * x,
            Self::Power { k, p } => k * x.powf(p),
        }
    }

    pub fn derivative(&self, x: T) -> T {
        let x = x.max(T::zero());
        match *self {
            Self::Linear { k } => k,
            Self::Power { k, p } => {
                if p == T::one() {
                    k
                } else {
                    k * p * x.powf(p - T::one())
                }
            }
        }
    }

    /// Inverse on `[0, inf)`; nonpositive arguments map to zero.
    pub fn inverse(&self, y: T) -> T {
        if y <= T::zero() {
            return T::zero();
        }
        match *self {
            Self::Linear { k } => y / k,
            Self::Power { k, p } => (y / k).powf(p.recip()),
        }
    }

    /// Slope `k` when `g` is linear (including `Power` with `p = 1`).
    pub fn linear_slope(&self) -> Option<T> {
        match *self {
            Self::Linear { k } => Some(k),
            Self::Power { k, p } if p == T::one() => Some(k),
            Self::Power { .. } => None,
        }
    }
}

/// Inverse demand `P(q)`: the delivered price at which mass `q` buys service.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum InverseDemand<T> {
    /// `P(q) = A - k1 q` on `[0, A/k1]`, zero beyond.
    Linear { intercept: T, slope: T },
}

impl<T: Real> InverseDemand<T> {
    /// `P(q) = 1 - q`
    pub fn unit() -> Self {
        Self::Linear { intercept: T::one(), slope: T::one() }
    }

    pub fn validate(&self) -> Result<()> {
        let Self::Linear { intercept, slope } = *self;
        if intercept > T::zero() && slope > T::zero() && intercept.is_finite() && slope.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("demand parameters out of range: {self:?}")))
        }
    }

    pub fn eval(&self, q: T) -> T {
        let Self::Linear { intercept, slope } = *self;
        (intercept - slope * q.max(T::zero())).max(T::zero())
    }

    /// `P'(q)` inside the domain.
    pub fn derivative(&self, _q: T) -> T {
        let Self::Linear { slope, .. } = *self;
        -slope
    }

    /// Mass demanded at delivered price `price`, i.e. `P^{-1}` clamped to the domain.
    pub fn quantity(&self, price: T) -> T {
        let Self::Linear { intercept, slope } = *self;
        ((intercept - price) / slope).max(T::zero()).min(intercept / slope)
    }

    /// `P(0)`
    pub fn choke_price(&self) -> T {
        let Self::Linear { intercept, .. } = *self;
        intercept
    }

    /// `A / k1`
    pub fn max_quantity(&self) -> T {
        let Self::Linear { intercept, slope } = *self;
        intercept / slope
    }

    /// `int_0^Q P(q) dq`
    pub fn integral(&self, q: T) -> T {
        let Self::Linear { intercept, slope } = *self;
        let q = q.max(T::zero()).min(self.max_quantity());
        intercept * q - slope * q * q / T::lit(2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    Incumbent,
    Entrant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Provider<T> {
    pub id: usize,
    pub role: Role,
    /// Licensed bandwidth `B_i`; zero for entrants.
    pub licensed: T,
}

impl<T: Real> Provider<T> {
    pub fn incumbent(id: usize, licensed: T) -> Self {
        Self { id, role: Role::Incumbent, licensed }
    }

    pub fn entrant(id: usize) -> Self {
        Self { id, role: Role::Entrant, licensed: T::zero() }
    }

    pub fn is_incumbent(&self) -> bool {
        self.role == Role::Incumbent
    }
}

/// Width of the unlicensed band.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Bandwidth<T> {
    Finite(T),
    /// Symbolic `W -> inf`: shared congestion is identically zero.
    Infinite,
}

impl<T: Real> Bandwidth<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Self::Finite(w) => Some(w),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MarketMode {
    /// Incumbents sell one bundle over both bands.
    Bundled,
    /// Separate licensed and unlicensed prices.
    Unbundled,
    /// The `W` band is licensed to the single entrant.
    Exclusive,
}

impl std::str::FromStr for MarketMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bundled" => Ok(Self::Bundled),
            "unbundled" => Ok(Self::Unbundled),
            "exclusive" => Ok(Self::Exclusive),
            other => Err(Error::InvalidConfig(format!("unknown market mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarketConfig<T> {
    pub providers: Vec<Provider<T>>,
    pub unlicensed: Bandwidth<T>,
    /// Fraction of time bundled customers spend on the unlicensed band.
    /// Ignored outside [`MarketMode::Bundled`].
    pub alpha: T,
    pub mode: MarketMode,
    pub demand: InverseDemand<T>,
    pub congestion: CongestionFunction<T>,
}

impl<T: Real> MarketConfig<T> {
    pub fn new(
        providers: Vec<Provider<T>>,
        unlicensed: Bandwidth<T>,
        alpha: T,
        mode: MarketMode,
        demand: InverseDemand<T>,
        congestion: CongestionFunction<T>,
    ) -> Result<Self> {
        let config = Self { providers, unlicensed, alpha, mode, demand, congestion };
        config.validate()?;
        Ok(config)
    }

    /// Linear family `P(q) = 1 - q`, `g(x) = x` with incumbents listed first.
    pub fn linear(
        mode: MarketMode,
        licensed: &[T],
        entrants: usize,
        unlicensed: Bandwidth<T>,
        alpha: T,
    ) -> Result<Self> {
        let mut providers: Vec<Provider<T>> =
            licensed.iter().enumerate().map(|(id, &b)| Provider::incumbent(id, b)).collect();
        let offset = providers.len();
        providers.extend((0..entrants).map(|j| Provider::entrant(offset + j)));
        Self::new(providers, unlicensed, alpha, mode, InverseDemand::unit(), CongestionFunction::unit())
    }

    /// `m` identical incumbents sharing total licensed bandwidth `b_total`.
    pub fn symmetric(m: usize, b_total: T, unlicensed: Bandwidth<T>, alpha: T) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("need at least one incumbent".into()));
        }
        let share = b_total / T::lit(m as f64);
        Self::linear(MarketMode::Bundled, &vec![share; m], 0, unlicensed, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if self.providers.is_empty() {
            return Err(Error::InvalidConfig("market has no providers".into()));
        }
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(Error::InvalidConfig(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if let Bandwidth::Finite(w) = self.unlicensed {
            if !(w > T::zero() && w.is_finite()) {
                return Err(Error::InvalidConfig(format!("unlicensed bandwidth {w} must be positive")));
            }
        }
        for p in &self.providers {
            match p.role {
                Role::Incumbent if !(p.licensed > T::zero() && p.licensed.is_finite()) => {
                    return Err(Error::InvalidConfig(format!("incumbent {} needs positive licensed bandwidth", p.id)))
                }
                Role::Entrant if p.licensed != T::zero() => {
                    return Err(Error::InvalidConfig(format!("entrant {} cannot hold licensed spectrum", p.id)))
                }
                _ => {}
            }
        }
        if self.mode == MarketMode::Exclusive {
            if self.entrants() != 1 {
                return Err(Error::InvalidConfig("exclusive use needs exactly one entrant".into()));
            }
            if self.unlicensed.is_infinite() {
                return Err(Error::InvalidConfig("exclusive use needs a finite band".into()));
            }
        }
        self.demand.validate()?;
        self.congestion.validate()
    }

    pub fn incumbents(&self) -> usize {
        self.providers.iter().filter(|p| p.is_incumbent()).count()
    }

    pub fn entrants(&self) -> usize {
        self.providers.len() - self.incumbents()
    }

    pub fn with_alpha(&self, alpha: T) -> Result<Self> {
        let mut next = self.clone();
        next.alpha = alpha;
        next.validate()?;
        Ok(next)
    }

    pub fn with_unlicensed(&self, unlicensed: Bandwidth<T>) -> Result<Self> {
        let mut next = self.clone();
        next.unlicensed = unlicensed;
        next.validate()?;
        Ok(next)
    }

    pub fn with_mode(&self, mode: MarketMode) -> Result<Self> {
        let mut next = self.clone();
        next.mode = mode;
        next.validate()?;
        Ok(next)
    }

    /// Whether provider `i` quotes separate licensed and unlicensed prices.
    pub fn is_split(&self, i: usize) -> bool {
        self.mode == MarketMode::Unbundled && self.providers[i].is_incumbent()
    }

    /// Every price slot in round-robin order.
    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::with_capacity(self.providers.len() * 2);
        for i in 0..self.providers.len() {
            if self.is_split(i) {
                out.push(Slot { provider: i, band: SlotBand::Licensed });
                out.push(Slot { provider: i, band: SlotBand::Unlicensed });
            } else {
                out.push(Slot { provider: i, band: SlotBand::Single });
            }
        }
        out
    }

    /// Shared congestion `g(L / W)`; zero when `W` is infinite.
    pub fn shared_congestion(&self, load: T) -> T {
        match self.unlicensed {
            Bandwidth::Finite(w) => self.congestion.eval(load / w),
            Bandwidth::Infinite => T::zero(),
        }
    }
}

/// Which of a provider's prices a slot refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SlotBand {
    /// The only price of a bundled, exclusive or unlicensed-only provider.
    Single,
    Licensed,
    Unlicensed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Slot {
    pub provider: usize,
    pub band: SlotBand,
}

/// Prices announced by one provider.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Tariff<T> {
    Single(T),
    Split { licensed: T, unlicensed: T },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceProfile<T> {
    pub tariffs: Vec<Tariff<T>>,
}

impl<T: Real> PriceProfile<T> {
    /// Every slot priced at `price`.
    pub fn uniform(config: &MarketConfig<T>, price: T) -> Self {
        let tariffs = (0..config.providers.len())
            .map(|i| {
                if config.is_split(i) {
                    Tariff::Split { licensed: price, unlicensed: price }
                } else {
                    Tariff::Single(price)
                }
            })
            .collect();
        Self { tariffs }
    }

    pub fn zeros(config: &MarketConfig<T>) -> Self {
        Self::uniform(config, T::zero())
    }

    /// One price per provider (bundled, exclusive, or unbundled entrants only).
    pub fn single(prices: &[T]) -> Self {
        Self { tariffs: prices.iter().map(|&p| Tariff::Single(p)).collect() }
    }

    pub fn get(&self, slot: Slot) -> T {
        match (self.tariffs[slot.provider], slot.band) {
            (Tariff::Single(p), _) => p,
            (Tariff::Split { licensed, .. }, SlotBand::Licensed | SlotBand::Single) => licensed,
            (Tariff::Split { unlicensed, .. }, SlotBand::Unlicensed) => unlicensed,
        }
    }

    pub fn set(&mut self, slot: Slot, price: T) {
        match (&mut self.tariffs[slot.provider], slot.band) {
            (Tariff::Single(p), _) => *p = price,
            (Tariff::Split { licensed, .. }, SlotBand::Licensed | SlotBand::Single) => *licensed = price,
            (Tariff::Split { unlicensed, .. }, SlotBand::Unlicensed) => *unlicensed = price,
        }
    }

    pub fn with(&self, slot: Slot, price: T) -> Self {
        let mut next = self.clone();
        next.set(slot, price);
        next
    }

    pub fn values(&self) -> Vec<T> {
        self.tariffs
            .iter()
            .flat_map(|t| match *t {
                Tariff::Single(p) => vec![p],
                Tariff::Split { licensed, unlicensed } => vec![licensed, unlicensed],
            })
            .collect()
    }

    /// Largest slot-wise absolute difference.
    pub fn distance(&self, other: &Self) -> T {
        self.values().into_iter().zip(other.values()).fold(T::zero(), |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn validate(&self, config: &MarketConfig<T>) -> Result<()> {
        if self.tariffs.len() != config.providers.len() {
            return Err(Error::InvalidPrices(format!(
                "{} tariffs for {} providers",
                self.tariffs.len(),
                config.providers.len()
            )));
        }
        let cap = config.demand.choke_price();
        for (i, t) in self.tariffs.iter().enumerate() {
            if matches!(t, Tariff::Split { .. }) != config.is_split(i) {
                return Err(Error::InvalidPrices(format!("tariff shape mismatch for provider {i}")));
            }
            let ok = |p: T| p >= T::zero() && p <= cap;
            let fine = match *t {
                Tariff::Single(p) => ok(p),
                Tariff::Split { licensed, unlicensed } => ok(licensed) && ok(unlicensed),
            };
            if !fine {
                return Err(Error::InvalidPrices(format!("price of provider {i} outside [0, {cap}]")));
            }
        }
        Ok(())
    }
}

/// Customer mass served by one provider.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Share<T> {
    Single(T),
    Split { licensed: T, unlicensed: T },
}

impl<T: Real> Share<T> {
    pub fn total(&self) -> T {
        match *self {
            Share::Single(x) => x,
            Share::Split { licensed, unlicensed } => licensed + unlicensed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Allocation<T> {
    pub shares: Vec<Share<T>>,
}

impl<T: Real> Allocation<T> {
    pub fn single(masses: &[T]) -> Self {
        Self { shares: masses.iter().map(|&x| Share::Single(x)).collect() }
    }

    pub fn mass(&self, i: usize) -> T {
        self.shares[i].total()
    }

    /// Total served mass `Q`.
    pub fn total(&self) -> T {
        self.shares.iter().fold(T::zero(), |acc, s| acc + s.total())
    }

    /// Load `L` carried by the shared unlicensed band.
    pub fn unlicensed_load(&self, config: &MarketConfig<T>) -> T {
        let mut load = T::zero();
        for (p, s) in config.providers.iter().zip(&self.shares) {
            load = load
                + match (config.mode, p.role, *s) {
                    (MarketMode::Bundled, Role::Incumbent, s) => config.alpha * s.total(),
                    (MarketMode::Bundled, Role::Entrant, s) => s.total(),
                    (MarketMode::Unbundled, _, Share::Split { unlicensed, .. }) => unlicensed,
                    (MarketMode::Unbundled, Role::Entrant, Share::Single(x)) => x,
                    (MarketMode::Unbundled, Role::Incumbent, Share::Single(_)) => T::zero(),
                    (MarketMode::Exclusive, _, _) => T::zero(),
                };
        }
        load
    }

    pub fn validate(&self, config: &MarketConfig<T>) -> Result<()> {
        if self.shares.len() != config.providers.len() {
            return Err(Error::InvalidAllocation(format!(
                "{} shares for {} providers",
                self.shares.len(),
                config.providers.len()
            )));
        }
        for (i, s) in self.shares.iter().enumerate() {
            if matches!(s, Share::Split { .. }) != config.is_split(i) {
                return Err(Error::InvalidAllocation(format!("share shape mismatch for provider {i}")));
            }
            let ok = match *s {
                Share::Single(x) => x >= T::zero(),
                Share::Split { licensed, unlicensed } => licensed >= T::zero() && unlicensed >= T::zero(),
            };
            if !ok {
                return Err(Error::InvalidAllocation(format!("negative mass for provider {i}")));
            }
        }
        Ok(())
    }
}

/// Delivered price seen by a provider's customers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Delivered<T> {
    Single(T),
    /// Unbundled incumbent: one delivered price per band.
    Split {
        licensed: T,
        unlicensed: T,
    },
}

impl<T: Real> Delivered<T> {
    /// The lowest delivered price the provider offers.
    pub fn best(&self) -> T {
        match *self {
            Delivered::Single(d) => d,
            Delivered::Split { licensed, unlicensed } => licensed.min(unlicensed),
        }
    }
}

fn licensed_band<T: Real>(config: &MarketConfig<T>, i: usize) -> Result<T> {
    let b = config.providers[i].licensed;
    if b > T::zero() {
        Ok(b)
    } else {
        Err(Error::ZeroLicensedBand { provider: i })
    }
}

/// Announced price plus the congestion experienced by provider `i`'s customers.
///
/// With `W = Infinite` the shared term is taken at its limit, zero.
pub fn delivered_price<T: Real>(
    config: &MarketConfig<T>,
    prices: &PriceProfile<T>,
    alloc: &Allocation<T>,
    i: usize,
) -> Result<Delivered<T>> {
    prices.validate(config)?;
    alloc.validate(config)?;
    if i >= config.providers.len() {
        return Err(Error::InvalidConfig(format!("no provider {i}")));
    }
    let g = &config.congestion;
    let shared = config.shared_congestion(alloc.unlicensed_load(config));
    let provider = &config.providers[i];
    let out = match (config.mode, provider.role) {
        (MarketMode::Bundled, Role::Incumbent) => {
            let b = licensed_band(config, i)?;
            let a = config.alpha;
            let keep = T::one() - a;
            Delivered::Single(prices.get(single(i)) + keep * g.eval(keep * alloc.mass(i) / b) + a * shared)
        }
        (MarketMode::Bundled, Role::Entrant) | (MarketMode::Unbundled, Role::Entrant) => {
            Delivered::Single(prices.get(single(i)) + shared)
        }
        (MarketMode::Unbundled, Role::Incumbent) => {
            let b = licensed_band(config, i)?;
            let (xl, _) = match alloc.shares[i] {
                Share::Split { licensed, unlicensed } => (licensed, unlicensed),
                Share::Single(x) => (x, T::zero()),
            };
            Delivered::Split {
                licensed: prices.get(Slot { provider: i, band: SlotBand::Licensed }) + g.eval(xl / b),
                unlicensed: prices.get(Slot { provider: i, band: SlotBand::Unlicensed }) + shared,
            }
        }
        (MarketMode::Exclusive, Role::Incumbent) => {
            let b = licensed_band(config, i)?;
            Delivered::Single(prices.get(single(i)) + g.eval(alloc.mass(i) / b))
        }
        (MarketMode::Exclusive, Role::Entrant) => {
            let w = config
                .unlicensed
                .finite()
                .ok_or_else(|| Error::InvalidConfig("exclusive use needs a finite band".into()))?;
            Delivered::Single(prices.get(single(i)) + g.eval(alloc.mass(i) / w))
        }
    };
    Ok(out)
}

fn single(i: usize) -> Slot {
    Slot { provider: i, band: SlotBand::Single }
}

/// `CS = int_0^Q P(q) - P(Q) dq`.
pub fn consumer_surplus<T: Real>(demand: &InverseDemand<T>, quantity: T) -> Result<T> {
    let max = demand.max_quantity();
    if !(quantity >= T::zero() && quantity <= max) {
        return Err(Error::OutOfDomain { quantity: quantity.as_f64(), max: max.as_f64() });
    }
    let InverseDemand::Linear { slope, .. } = *demand;
    Ok(linear_consumer_surplus(slope, quantity))
}

/// `k1 Q^2 / 2`, valid in any field.
pub fn linear_consumer_surplus<F: Field>(slope: F, quantity: F) -> F {
    slope * quantity.clone() * quantity / F::int(2)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WelfareReport<T> {
    pub profits: Vec<T>,
    pub total_mass: T,
    pub consumer_surplus: T,
    pub social_welfare: T,
    /// `P(Q)` at the allocation.
    pub delivered_price: T,
}

impl<T: Real> WelfareReport<T> {
    pub fn total_profit(&self) -> T {
        self.profits.iter().fold(T::zero(), |acc, &p| acc + p)
    }
}

pub fn profit<T: Real>(tariff: &Tariff<T>, share: &Share<T>) -> T {
    match (*tariff, *share) {
        (Tariff::Single(p), s) => p * s.total(),
        (Tariff::Split { licensed: pl, unlicensed: pu }, Share::Split { licensed, unlicensed }) => {
            pl * licensed + pu * unlicensed
        }
        (Tariff::Split { licensed, .. }, Share::Single(x)) => licensed * x,
    }
}

/// Profits, consumer surplus and social welfare of an allocation.
pub fn welfare_report<T: Real>(
    config: &MarketConfig<T>,
    prices: &PriceProfile<T>,
    alloc: &Allocation<T>,
) -> Result<WelfareReport<T>> {
    prices.validate(config)?;
    alloc.validate(config)?;
    let profits: Vec<T> = prices.tariffs.iter().zip(&alloc.shares).map(|(t, s)| profit(t, s)).collect();
    let max = config.demand.max_quantity();
    let mut total = alloc.total();
    // Solver round-off may land a hair past the choke quantity.
    if total > max && total <= max * (T::one() + T::tol(1e-12, 16.0)) {
        total = max;
    }
    let cs = consumer_surplus(&config.demand, total)?;
    let sw = profits.iter().fold(cs, |acc, &p| acc + p);
    Ok(WelfareReport {
        profits,
        total_mass: total,
        consumer_surplus: cs,
        social_welfare: sw,
        delivered_price: config.demand.eval(total),
    })
}
