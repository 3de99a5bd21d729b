//! Equilibrium engine for price competition between wireless service
//! providers that bundle licensed and unlicensed spectrum.
//!
//! Customers pick the provider with the lowest delivered price (announced
//! price plus congestion) and settle in a Wardrop equilibrium; providers set
//! prices in a Nash game on top of that. The crate computes both layers, the
//! welfare accounting, closed forms for the linear family, and the choice of
//! the bundling fraction `alpha`.
//!
//! All solver code is generic over [`Real`]; the closed forms in [`oracle`]
//! are generic over [`Field`] and evaluate exactly over [`Rational`]. The
//! aliases below fix the scalar to `f64`.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alpha;
pub mod error;
pub mod linalg;
pub mod market;
pub mod nash;
pub mod oracle;
pub mod scalar;
pub mod search;
pub mod wardrop;

pub use alpha::{
    compute_b_threshold, one_v_one_alpha_star_winf, optimize_alpha, profit_optimal_alpha_winf, welfare_gap,
    welfare_gap_report, Multiplicity, Objective,
};
pub use error::{Error, Result};
pub use market::{consumer_surplus, delivered_price, welfare_report, MarketMode, Role, Slot, SlotBand};
pub use nash::{
    best_response, check_supermodularity, find_equilibrium, find_equilibrium_with, find_symmetric_equilibrium,
    verify_equilibrium,
};
pub use scalar::{Field, Real};
pub use wardrop::{price_sensitivity, solve_wardrop, wardrop_linear_direct};

/// Exact rational scalar for the closed-form oracles.
pub type Rational = num_rational::Ratio<i64>;

pub type Bandwidth = market::Bandwidth<f64>;
pub type CongestionFunction = market::CongestionFunction<f64>;
pub type InverseDemand = market::InverseDemand<f64>;
pub type Provider = market::Provider<f64>;
pub type MarketConfig = market::MarketConfig<f64>;
pub type Tariff = market::Tariff<f64>;
pub type Share = market::Share<f64>;
pub type PriceProfile = market::PriceProfile<f64>;
pub type Allocation = market::Allocation<f64>;
pub type Delivered = market::Delivered<f64>;
pub type WelfareReport = market::WelfareReport<f64>;
pub type WardropSolution = wardrop::WardropSolution<f64>;
pub type NashOptions = nash::NashOptions<f64>;
pub type BestResponse = nash::BestResponse<f64>;
pub type EquilibriumResult = nash::EquilibriumResult<f64>;
pub type ClosedFormResult = oracle::ClosedFormResult<f64>;
pub type ExactClosedForm = oracle::ClosedFormResult<Rational>;
pub type AlphaResult = alpha::AlphaResult<f64>;
pub type WinfOptimum = alpha::WinfOptimum<f64>;
pub type GapReport = alpha::GapReport<f64>;

/// Single-precision aliases for the types most often used outside the crate.
pub type MarketConfig32 = market::MarketConfig<f32>;
pub type PriceProfile32 = market::PriceProfile<f32>;
pub type WardropSolution32 = wardrop::WardropSolution<f32>;
