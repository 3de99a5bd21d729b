use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid market configuration: {0}")]
    InvalidConfig(String),

    #[error("price profile does not match the market: {0}")]
    InvalidPrices(String),

    #[error("allocation does not match the market: {0}")]
    InvalidAllocation(String),

    #[error("provider {provider} has no licensed band")]
    ZeroLicensedBand { provider: usize },

    #[error("quantity {quantity} outside demand domain [0, {max}]")]
    OutOfDomain { quantity: f64, max: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("provider {provider} serves no customers")]
    ProviderInactive { provider: usize },

    #[error("singular linear system")]
    Singular,

    #[error("Wardrop solver did not converge after {iterations} iterations (max residual {max_residual:e})")]
    WardropNonConvergence { iterations: usize, max_residual: f64 },

    #[error("no admissible alpha: every evaluation failed")]
    NoAdmissibleAlpha,
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::InvalidPrices(_) => "invalid_prices",
            Error::InvalidAllocation(_) => "invalid_allocation",
            Error::ZeroLicensedBand { .. } => "zero_licensed_band",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::Unsupported(_) => "unsupported",
            Error::ProviderInactive { .. } => "provider_inactive",
            Error::Singular => "singular",
            Error::WardropNonConvergence { .. } => "wardrop_nonconvergence",
            Error::NoAdmissibleAlpha => "no_admissible_alpha",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
