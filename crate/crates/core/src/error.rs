use thiserror::Error;

/// Errors raised by the transforms, samplers and solvers in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The law has zero, negative or undefined mean, so `x dF(x) / E X` is meaningless.
    #[error("cannot size bias {what}: mean is {mean} (must be finite and positive)")]
    NotSizeBiasable { what: String, mean: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid Levy measure: {0}")]
    InvalidMeasure(String),

    #[error("unknown family `{0}`; use the generic transform on an atoms/grid/empirical representation instead")]
    UnknownFamily(String),

    #[error("moment of order {order} diverges for {what}")]
    MomentDivergent { what: String, order: u32 },

    #[error("{0} is not supported for this representation")]
    Unsupported(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("all weights are zero: {0}")]
    ZeroWeights(String),

    #[error(
        "Levy measure has infinite activity (mu((0,inf)) = inf) and no truncation was requested; pass trunc_eps > 0"
    )]
    InfiniteActivity,

    #[error("characteristic function vanishes on the whole grid")]
    VanishingCharFn,

    #[error("enumeration of {count} subsets exceeds the budget of {budget}; use Monte Carlo mode")]
    BudgetExceeded { count: f64, budget: f64 },

    #[error("mixed representations: {0}")]
    MixedKinds(String),

    #[error("malformed literal: {0}")]
    Literal(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn check_unit_open(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in (0, 1)",
        })
    }
}

pub(crate) fn check_unit_closed(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}
