use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{quantity} = {value} is outside the domain ({requirement})")]
    Domain {
        quantity: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("overflow while computing {0}")]
    Overflow(&'static str),

    #[error("series not converged at order {order}: last/peak term ratio {ratio:e}")]
    NonConvergence { order: usize, ratio: f64 },

    #[error("loss of precision: correction term {magnitude:e} exceeds {limit:e}")]
    LossOfPrecision { magnitude: f64, limit: f64 },

    #[error("error budget exceeded: value {value}, estimate {estimate:e} > budget {budget:e}")]
    BudgetExceeded {
        value: f64,
        estimate: f64,
        budget: f64,
    },

    #[error("contour passes within {distance:e} of the gamma pole at s = {pole}")]
    ContourMisplaced { pole: f64, distance: f64 },

    #[error("contour truncated at |t| = {cutoff} with integrand ratio {ratio:e}")]
    ContourTruncated { cutoff: f64, ratio: f64 },

    #[error("no Meijer-G normalization matches at x = {x} (bare residual {bare:e}, scaled residual {scaled:e})")]
    AmbiguousNormalization { x: f64, bare: f64, scaled: f64 },

    #[error("integral diverges: integrand decays like u^{exponent}")]
    Divergent { exponent: f64 },

    #[error("unsupported Meijer G parameters: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, requirement: &'static str) -> Self {
        Error::Domain {
            quantity,
            value,
            requirement,
        }
    }

    /// True for errors that signal an exhausted numerical budget rather than bad input.
    pub fn is_budget_failure(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. }
                | Error::NonConvergence { .. }
                | Error::ContourTruncated { .. }
                | Error::LossOfPrecision { .. }
                | Error::Overflow(_)
        )
    }
}

/// A computed value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub(crate) fn check(self, budget: f64) -> Result<Self> {
        if self.error <= budget {
            Ok(self)
        } else {
            Err(Error::BudgetExceeded {
                value: self.value,
                estimate: self.error,
                budget,
            })
        }
    }
}
