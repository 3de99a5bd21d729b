//! Customer allocation for fixed prices.
//!
//! Every provider is reduced to one or more links. A link carries price `p`
//! and delivered price `p + a g(b y) + w g(L / W)` where `y` is its mass and
//! `L` the shared unlicensed load. Links with `a = 0` only see the shared
//! band. Identical links are merged into groups that split mass equally.
//!
//! The solver works on the common delivered level `lambda = P(Q)`: for a
//! fixed level the shared load is the root of a monotone scalar equation,
//! and total supply minus demand is increasing in `lambda`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::market::{Allocation, Bandwidth, MarketConfig, MarketMode, PriceProfile, Role, Share, Slot, SlotBand};
use crate::scalar::Real;
use crate::search::{refine_increasing, Bracket};

/// Masses at or below this are treated as zero.
pub const TOL_ACTIVE: f64 = 1e-10;
/// Complementarity tolerance.
pub const TOL_RESIDUAL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WardropSolution<T> {
    pub alloc: Allocation<T>,
    /// Common delivered price `P(Q)`.
    pub delivered: T,
    /// Per-provider complementarity violation (zero is exact).
    pub residuals: Vec<T>,
    pub iterations: usize,
    /// Providers with zero mass whose delivered price equals `P(Q)`.
    pub ties: Vec<usize>,
}

impl<T: Real> WardropSolution<T> {
    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r))
    }

    pub fn total(&self) -> T {
        self.alloc.total()
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Link<T> {
    pub provider: usize,
    pub band: SlotBand,
    pub p: T,
    pub a: T,
    pub b: T,
    pub w: T,
}

#[derive(Clone, Debug)]
pub(crate) struct Group<T> {
    pub p: T,
    pub a: T,
    pub b: T,
    pub w: T,
    /// Number of links in the group, as a scalar.
    pub m: T,
}

impl<T: Real> Group<T> {
    fn pure(&self) -> bool {
        self.a == T::zero()
    }
}

/// Links and their grouping for one price profile.
#[derive(Clone, Debug)]
pub(crate) struct Network<T> {
    pub links: Vec<Link<T>>,
    pub groups: Vec<Group<T>>,
    pub link_group: Vec<usize>,
}

impl<T: Real> Network<T> {
    /// Builds links for `prices`; links of provider `isolate` keep their own groups.
    pub fn build(config: &MarketConfig<T>, prices: &PriceProfile<T>, isolate: Option<usize>) -> Result<Self> {
        let links = links(config, prices)?;
        let mut order: Vec<usize> = (0..links.len()).filter(|&l| Some(links[l].provider) != isolate).collect();
        let key = |l: &Link<T>| [l.w, l.a, l.b, l.p];
        order.sort_by(|&x, &y| {
            key(&links[x]).partial_cmp(&key(&links[y])).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y))
        });
        let mut groups: Vec<Group<T>> = Vec::new();
        let mut link_group = vec![usize::MAX; links.len()];
        let mut last: Option<[T; 4]> = None;
        for &l in &order {
            let k = key(&links[l]);
            if last == Some(k) {
                let g = groups.len() - 1;
                groups[g].m = groups[g].m + T::one();
            } else {
                let lk = &links[l];
                groups.push(Group { p: lk.p, a: lk.a, b: lk.b, w: lk.w, m: T::one() });
                last = Some(k);
            }
            link_group[l] = groups.len() - 1;
        }
        for (l, lk) in links.iter().enumerate() {
            if Some(lk.provider) == isolate {
                groups.push(Group { p: lk.p, a: lk.a, b: lk.b, w: lk.w, m: T::one() });
                link_group[l] = groups.len() - 1;
            }
        }
        Ok(Self { links, groups, link_group })
    }

    pub fn link_mass(&self, y: &[T], l: usize) -> T {
        y[self.link_group[l]]
    }

    /// Revenue of provider `i` under per-group masses `y`.
    pub fn revenue(&self, y: &[T], i: usize) -> T {
        self.links
            .iter()
            .enumerate()
            .filter(|(_, lk)| lk.provider == i)
            .fold(T::zero(), |acc, (l, lk)| acc + lk.p * y[self.link_group[l]])
    }

    fn total(&self, y: &[T]) -> T {
        self.groups.iter().zip(y).fold(T::zero(), |acc, (g, &v)| acc + g.m * v)
    }

    fn load(&self, y: &[T]) -> T {
        self.groups.iter().zip(y).fold(T::zero(), |acc, (g, &v)| acc + g.m * g.w * v)
    }
}

fn links<T: Real>(config: &MarketConfig<T>, prices: &PriceProfile<T>) -> Result<Vec<Link<T>>> {
    config.validate()?;
    prices.validate(config)?;
    let one = T::one();
    let zero = T::zero();
    let mut out = Vec::with_capacity(config.providers.len() + config.incumbents());
    for (i, provider) in config.providers.iter().enumerate() {
        let single = Slot { provider: i, band: SlotBand::Single };
        let shared = |band: SlotBand, p: T| Link { provider: i, band, p, a: zero, b: zero, w: one };
        let band = provider.licensed;
        match (config.mode, provider.role) {
            (MarketMode::Bundled, Role::Incumbent) => {
                let keep = one - config.alpha;
                if keep == zero {
                    out.push(shared(SlotBand::Single, prices.get(single)));
                } else {
                    out.push(Link {
                        provider: i,
                        band: SlotBand::Single,
                        p: prices.get(single),
                        a: keep,
                        b: keep / band,
                        w: config.alpha,
                    });
                }
            }
            (MarketMode::Bundled, Role::Entrant) | (MarketMode::Unbundled, Role::Entrant) => {
                out.push(shared(SlotBand::Single, prices.get(single)));
            }
            (MarketMode::Unbundled, Role::Incumbent) => {
                let lic = Slot { provider: i, band: SlotBand::Licensed };
                let unl = Slot { provider: i, band: SlotBand::Unlicensed };
                out.push(Link {
                    provider: i,
                    band: SlotBand::Licensed,
                    p: prices.get(lic),
                    a: one,
                    b: one / band,
                    w: zero,
                });
                out.push(shared(SlotBand::Unlicensed, prices.get(unl)));
            }
            (MarketMode::Exclusive, Role::Incumbent) => {
                out.push(Link {
                    provider: i,
                    band: SlotBand::Single,
                    p: prices.get(single),
                    a: one,
                    b: one / band,
                    w: zero,
                });
            }
            (MarketMode::Exclusive, Role::Entrant) => {
                let w = config
                    .unlicensed
                    .finite()
                    .ok_or_else(|| Error::InvalidConfig("exclusive use needs a finite band".into()))?;
                out.push(Link {
                    provider: i,
                    band: SlotBand::Single,
                    p: prices.get(single),
                    a: one,
                    b: one / w,
                    w: zero,
                });
            }
        }
    }
    Ok(out)
}

/// Per-group masses at one delivered level.
struct Supply<T> {
    y: Vec<T>,
    total: T,
}

struct Solver<'a, T> {
    config: &'a MarketConfig<T>,
    net: &'a Network<T>,
    cap: Vec<T>,
    /// Cheapest price among pure groups and the groups attaining it.
    cheapest: Option<(T, Vec<usize>, T)>,
    evaluations: usize,
}

impl<'a, T: Real> Solver<'a, T> {
    fn new(config: &'a MarketConfig<T>, net: &'a Network<T>) -> Self {
        let qmax = config.demand.max_quantity();
        let cap = net.groups.iter().map(|g| qmax / g.m).collect();
        let mut cheapest: Option<(T, Vec<usize>, T)> = None;
        for (v, g) in net.groups.iter().enumerate() {
            if !g.pure() {
                continue;
            }
            match &mut cheapest {
                Some((p, members, count)) if g.p == *p => {
                    members.push(v);
                    *count = *count + g.m;
                }
                Some((p, _, _)) if g.p > *p => {}
                _ => cheapest = Some((g.p, vec![v], g.m)),
            }
        }
        Self { config, net, cap, cheapest, evaluations: 0 }
    }

    fn own_mass(&self, v: usize, level: T, mu: T) -> T {
        let g = &self.net.groups[v];
        let slack = (level - g.p - g.w * mu) / g.a;
        (self.config.congestion.inverse(slack) / g.b).min(self.cap[v])
    }

    fn shared_cost(&self, load: T, w: T) -> T {
        self.config.congestion.eval(load / w)
    }

    /// `L - sum m w y(level, g(L / W))` over non-pure groups.
    fn load_gap(&self, level: T, load: T, w: T) -> T {
        let mu = self.shared_cost(load, w);
        let mut carried = T::zero();
        for (v, g) in self.net.groups.iter().enumerate() {
            if !g.pure() && g.w > T::zero() {
                carried = carried + g.m * g.w * self.own_mass(v, level, mu);
            }
        }
        load - carried
    }

    fn supply(&mut self, level: T) -> Supply<T> {
        self.evaluations += 1;
        let n = self.net.groups.len();
        let mut y = vec![T::zero(); n];
        // Shared cost at the load fixed point. When the non-pure masses are
        // steep in it (bundling fraction near one) a point root is not
        // accurate enough, so the masses are blended across the final bracket.
        let mut costs = (T::zero(), T::zero(), T::one());
        if let Bandwidth::Finite(w) = self.config.unlicensed {
            let zero_gap = self.load_gap(level, T::zero(), w);
            let upper = -zero_gap;
            let mut base = T::zero();
            if upper > T::zero() {
                let f_hi = self.load_gap(level, upper, w);
                let xtol = upper * T::epsilon() * T::lit(4.0);
                let br = refine_increasing(
                    |l| self.load_gap(level, l, w),
                    T::zero(),
                    upper,
                    zero_gap,
                    f_hi,
                    xtol,
                    T::zero(),
                    200,
                );
                base = br.root();
                costs = (self.shared_cost(br.lo, w), self.shared_cost(br.hi, w), br.theta());
            }
            if let Some((p_min, members, count)) = &self.cheapest {
                if level > *p_min {
                    let pure_load = w * self.config.congestion.inverse(level - *p_min);
                    if pure_load > base {
                        let excess = self.load_gap(level, pure_load, w).max(T::zero());
                        let mu = level - *p_min;
                        costs = (mu, mu, T::one());
                        let each = excess / *count;
                        for &v in members {
                            y[v] = each;
                        }
                    }
                }
            }
        }
        let (mu_lo, mu_hi, theta) = costs;
        for (v, g) in self.net.groups.iter().enumerate() {
            if !g.pure() {
                y[v] = if mu_lo == mu_hi {
                    self.own_mass(v, level, mu_lo)
                } else {
                    theta * self.own_mass(v, level, mu_lo) + (T::one() - theta) * self.own_mass(v, level, mu_hi)
                };
            }
        }
        let total = self.net.total(&y);
        Supply { y, total }
    }

    fn solve(&mut self) -> Result<Vec<T>> {
        let demand = self.config.demand;
        let top = demand.choke_price();
        let mut hi = top;
        if self.config.unlicensed.is_infinite() {
            if let Some((p_min, members, count)) = self.cheapest.clone() {
                if p_min < top {
                    let mut s = self.supply(p_min);
                    let gap = demand.quantity(p_min) - s.total;
                    if gap >= T::zero() {
                        let each = gap / count;
                        for &v in &members {
                            s.y[v] = each;
                        }
                        return Ok(s.y);
                    }
                    hi = p_min;
                }
            }
        }
        let lo_s = self.supply(T::zero());
        let f_lo = lo_s.total - demand.quantity(T::zero());
        let hi_s = self.supply(hi);
        let f_hi = hi_s.total - demand.quantity(hi);
        if f_lo >= T::zero() {
            return Ok(lo_s.y);
        }
        if f_hi <= T::zero() {
            return Ok(hi_s.y);
        }
        let xtol = top * T::epsilon() * T::lit(4.0);
        let bracket: Bracket<T> = refine_increasing(
            |level| {
                let s = self.supply(level);
                s.total - demand.quantity(level)
            },
            T::zero(),
            hi,
            f_lo,
            f_hi,
            xtol,
            T::zero(),
            400,
        );
        let a = self.supply(bracket.lo);
        if bracket.hi == bracket.lo {
            return Ok(a.y);
        }
        let b = self.supply(bracket.hi);
        let theta = bracket.theta();
        Ok(a.y.iter().zip(&b.y).map(|(&u, &v)| theta * u + (T::one() - theta) * v).collect())
    }
}

pub(crate) fn solve_network<T: Real>(config: &MarketConfig<T>, net: &Network<T>) -> Result<(Vec<T>, usize)> {
    let mut solver = Solver::new(config, net);
    let y = solver.solve()?;
    Ok((y, solver.evaluations))
}

/// Active-set solve of the linear system for linear demand and congestion.
pub(crate) fn linear_network<T: Real>(config: &MarketConfig<T>, net: &Network<T>) -> Result<(Vec<T>, usize)> {
    let k = config
        .congestion
        .linear_slope()
        .ok_or_else(|| Error::Unsupported("direct solve needs linear congestion".into()))?;
    let crate::market::InverseDemand::Linear { intercept, slope: k1 } = config.demand;
    let kw = match config.unlicensed {
        Bandwidth::Finite(w) => k / w,
        Bandwidth::Infinite => T::zero(),
    };
    let groups = &net.groups;
    let n = groups.len();
    let cheapest_pure = (0..n)
        .filter(|&v| groups[v].pure())
        .min_by(|&u, &v| groups[u].p.partial_cmp(&groups[v].p).unwrap_or(std::cmp::Ordering::Equal));
    let mut active: Vec<bool> =
        (0..n).map(|v| if groups[v].pure() { Some(v) == cheapest_pure } else { groups[v].p < intercept }).collect();
    let tol = T::tol(TOL_RESIDUAL, 64.0) * intercept.max(T::one());
    let mut y = vec![T::zero(); n];
    for round in 0..(4 * n + 4) {
        let idx: Vec<usize> = (0..n).filter(|&v| active[v]).collect();
        y = vec![T::zero(); n];
        if !idx.is_empty() {
            let mat: Vec<Vec<T>> = idx
                .iter()
                .map(|&v| {
                    let gv = &groups[v];
                    idx.iter()
                        .map(|&u| {
                            let gu = &groups[u];
                            let own = if u == v { k * gv.a * gv.b } else { T::zero() };
                            own + gu.m * (k1 + kw * gv.w * gu.w)
                        })
                        .collect()
                })
                .collect();
            let rhs: Vec<T> = idx.iter().map(|&v| intercept - groups[v].p).collect();
            let sol = linalg::solve(mat, rhs)?;
            for (&v, &s) in idx.iter().zip(&sol) {
                y[v] = s;
            }
        }
        let negative: Vec<usize> = (0..n).filter(|&v| active[v] && y[v] < T::zero()).collect();
        if !negative.is_empty() {
            for v in negative {
                active[v] = false;
            }
            continue;
        }
        let level = config.demand.eval(net.total(&y));
        let mu = kw * net.load(&y);
        let violated = (0..n)
            .filter(|&v| !active[v])
            .filter(|&v| !(groups[v].pure() && active.iter().enumerate().any(|(u, &on)| on && groups[u].pure())))
            .map(|v| (v, level - (groups[v].p + groups[v].w * mu)))
            .filter(|&(_, gap)| gap > tol)
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal));
        match violated {
            Some((v, _)) => active[v] = true,
            None => return Ok((y, round + 1)),
        }
    }
    let sol = finish(config, net, y, 4 * n + 4)?;
    Err(Error::WardropNonConvergence { iterations: sol.iterations, max_residual: sol.max_residual().as_f64() })
}

/// Delivered price of every group at per-group masses `y`.
pub(crate) fn group_delivered<T: Real>(config: &MarketConfig<T>, net: &Network<T>, y: &[T]) -> Vec<T> {
    let mu = config.shared_congestion(net.load(y));
    net.groups
        .iter()
        .zip(y)
        .map(|(g, &v)| {
            let own = if g.pure() { T::zero() } else { g.a * config.congestion.eval(g.b * v) };
            g.p + own + g.w * mu
        })
        .collect()
}

pub(crate) fn finish<T: Real>(
    config: &MarketConfig<T>,
    net: &Network<T>,
    y: Vec<T>,
    iterations: usize,
) -> Result<WardropSolution<T>> {
    let y: Vec<T> = y.into_iter().map(|v| v.max(T::zero())).collect();
    let total = net.total(&y);
    let level = config.demand.eval(total);
    let delivered = group_delivered(config, net, &y);
    let tol_active = T::lit(TOL_ACTIVE);
    let tol = T::tol(TOL_RESIDUAL, 64.0) * config.demand.choke_price().max(T::one());
    let n = config.providers.len();
    let mut residuals = vec![T::zero(); n];
    let mut active = vec![false; n];
    let mut touching = vec![false; n];
    for (l, lk) in net.links.iter().enumerate() {
        let v = net.link_group[l];
        let gap = delivered[v] - level;
        let r = if y[v] > tol_active { gap.abs() } else { (-gap).max(T::zero()) };
        residuals[lk.provider] = residuals[lk.provider].max(r);
        if y[v] > tol_active {
            active[lk.provider] = true;
        } else if gap.abs() <= tol {
            touching[lk.provider] = true;
        }
    }
    let ties = (0..n).filter(|&i| !active[i] && touching[i]).collect();
    let mut shares: Vec<Share<T>> = (0..n)
        .map(|i| {
            if config.is_split(i) {
                Share::Split { licensed: T::zero(), unlicensed: T::zero() }
            } else {
                Share::Single(T::zero())
            }
        })
        .collect();
    for (l, lk) in net.links.iter().enumerate() {
        let v = y[net.link_group[l]];
        match (&mut shares[lk.provider], lk.band) {
            (Share::Single(x), _) => *x = v,
            (Share::Split { unlicensed, .. }, SlotBand::Unlicensed) => *unlicensed = v,
            (Share::Split { licensed, .. }, _) => *licensed = v,
        }
    }
    let solution = WardropSolution { alloc: Allocation { shares }, delivered: level, residuals, iterations, ties };
    if solution.max_residual() > tol {
        return Err(Error::WardropNonConvergence { iterations, max_residual: solution.max_residual().as_f64() });
    }
    Ok(solution)
}

/// Wardrop allocation for fixed prices.
///
/// Accepts `W = Infinite`, where shared congestion vanishes and unlicensed-only
/// providers act as a perfectly elastic supply at their price.
///
/// With linear congestion, an allocation that fails certification is retried
/// with the active-set solve. This matters for bundling fractions within about
/// `1e-5` of one, where the level-set masses come from dividing by the
/// vanishing own congestion and inherit its rounding.
pub fn solve_wardrop<T: Real>(config: &MarketConfig<T>, prices: &PriceProfile<T>) -> Result<WardropSolution<T>> {
    let net = Network::build(config, prices, None)?;
    let (y, iterations) = solve_network(config, &net)?;
    match finish(config, &net, y, iterations) {
        Err(e @ Error::WardropNonConvergence { .. }) if config.congestion.linear_slope().is_some() => {
            match linear_network(config, &net) {
                Ok((y, extra)) => finish(config, &net, y, iterations + extra).map_err(|_| e),
                Err(_) => Err(e),
            }
        }
        other => other,
    }
}

/// Exact allocation for linear demand and congestion by active-set enumeration.
pub fn wardrop_linear_direct<T: Real>(
    config: &MarketConfig<T>,
    prices: &PriceProfile<T>,
) -> Result<WardropSolution<T>> {
    let net = Network::build(config, prices, None)?;
    let (y, iterations) = linear_network(config, &net)?;
    finish(config, &net, y, iterations)
}

/// Per-group mass response `dy / dp_l` to the price of link `l`.
///
/// Only links in active groups respond. Returns `None` when the response is
/// not unique, which happens with several active unlicensed-only groups.
pub(crate) fn tangent<T: Real>(config: &MarketConfig<T>, net: &Network<T>, y: &[T], l: usize) -> Option<Vec<T>> {
    let tol_active = T::lit(TOL_ACTIVE);
    let n = net.groups.len();
    let idx: Vec<usize> = (0..n).filter(|&v| y[v] > tol_active).collect();
    let target = net.link_group[l];
    if !idx.contains(&target) {
        return Some(vec![T::zero(); n]);
    }
    if idx.iter().filter(|&&v| net.groups[v].pure()).count() > 1 {
        return None;
    }
    let g = &config.congestion;
    let k1 = -config.demand.derivative(net.total(y));
    let shared = match config.unlicensed {
        Bandwidth::Finite(w) => g.derivative(net.load(y) / w) / w,
        Bandwidth::Infinite => T::zero(),
    };
    let mat: Vec<Vec<T>> = idx
        .iter()
        .map(|&v| {
            let gv = &net.groups[v];
            idx.iter()
                .map(|&u| {
                    let gu = &net.groups[u];
                    let own = if u == v && !gv.pure() { gv.a * gv.b * g.derivative(gv.b * y[v]) } else { T::zero() };
                    own + gu.m * (gv.w * gu.w * shared + k1)
                })
                .collect()
        })
        .collect();
    let rhs: Vec<T> = idx.iter().map(|&v| if v == target { -T::one() } else { T::zero() }).collect();
    let sol = linalg::solve(mat, rhs).ok()?;
    let mut out = vec![T::zero(); n];
    for (&v, &s) in idx.iter().zip(&sol) {
        out[v] = s;
    }
    Some(out)
}

/// `dx_i / dp_i` at a Wardrop allocation, holding the other prices fixed.
///
/// For bundled incumbents-only markets this evaluates the closed-form ratio
/// of products of `a_j = (1-alpha)^2/B_j g'((1-alpha)x_j/B_j)` and
/// `b = alpha^2/W g'(alpha Q/W) - P'(Q)` over the active providers; other
/// markets use the linearised Wardrop system directly.
pub fn price_sensitivity<T: Real>(
    config: &MarketConfig<T>,
    prices: &PriceProfile<T>,
    solution: &WardropSolution<T>,
    i: usize,
) -> Result<T> {
    config.validate()?;
    prices.validate(config)?;
    solution.alloc.validate(config)?;
    if i >= config.providers.len() {
        return Err(Error::InvalidConfig(format!("no provider {i}")));
    }
    let tol_active = T::lit(TOL_ACTIVE);
    if solution.alloc.mass(i) <= tol_active {
        return Err(Error::ProviderInactive { provider: i });
    }
    if config.mode == MarketMode::Bundled && config.entrants() == 0 {
        return Ok(bundled_sensitivity(config, solution, i));
    }
    let net = Network::build(config, prices, Some(i))?;
    let mut y = vec![T::zero(); net.groups.len()];
    for (l, lk) in net.links.iter().enumerate() {
        let m = match solution.alloc.shares[lk.provider] {
            Share::Single(x) => x,
            Share::Split { licensed, unlicensed } => match lk.band {
                SlotBand::Unlicensed => unlicensed,
                _ => licensed,
            },
        };
        y[net.link_group[l]] = m;
    }
    let l = net
        .links
        .iter()
        .position(|lk| lk.provider == i && lk.band != SlotBand::Unlicensed)
        .ok_or(Error::ProviderInactive { provider: i })?;
    let dy = tangent(config, &net, &y, l).ok_or(Error::Singular)?;
    Ok(dy[net.link_group[l]])
}

fn bundled_sensitivity<T: Real>(config: &MarketConfig<T>, solution: &WardropSolution<T>, i: usize) -> T {
    let g = &config.congestion;
    let alpha = config.alpha;
    let keep = T::one() - alpha;
    let q = solution.alloc.total();
    let tol_active = T::lit(TOL_ACTIVE);
    let active: Vec<usize> = (0..config.providers.len()).filter(|&j| solution.alloc.mass(j) > tol_active).collect();
    let coef = |j: usize| {
        let band = config.providers[j].licensed;
        keep * keep / band * g.derivative(keep * solution.alloc.mass(j) / band)
    };
    let a: Vec<T> = active.iter().map(|&j| coef(j)).collect();
    let shared = match config.unlicensed {
        Bandwidth::Finite(w) => alpha * alpha / w * g.derivative(alpha * q / w),
        Bandwidth::Infinite => T::zero(),
    };
    let b = shared - config.demand.derivative(q);
    let pos = active.iter().position(|&j| j == i).expect("active provider");
    if a.iter().all(|&v| v > T::zero()) {
        let others = a.iter().enumerate().filter(|&(j, _)| j != pos).fold(T::zero(), |s, (_, &v)| s + v.recip());
        return -(T::one() + b * others) / (a[pos] + b * (T::one() + a[pos] * others));
    }
    let prod =
        |skip: &[usize]| a.iter().enumerate().filter(|(j, _)| !skip.contains(j)).fold(T::one(), |acc, (_, &v)| acc * v);
    let n = a.len();
    let num = prod(&[]) + b * (0..n).fold(T::zero(), |s, j| s + prod(&[j]));
    let den = prod(&[pos]) + b * (0..n).filter(|&j| j != pos).fold(T::zero(), |s, j| s + prod(&[pos, j]));
    -den / num
}
