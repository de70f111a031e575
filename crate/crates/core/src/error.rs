use std::fmt;

use serde::Serialize;

/// Why a point of the parameter space cannot be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Infeasibility {
    /// The source-coding rate needed for distortion `D` exceeds what the
    /// main channel can carry: `rate > lambda * capacity`.
    Transmissibility { rate: f64, lambda: f64, capacity: f64 },
    /// Rate floor of Γ above the cost-constrained capacity of the main channel.
    RateAboveCapacity { rate: f64, capacity: f64 },
    /// Cost budget below the cheapest input letter.
    CostBelowMinimum { budget: f64, minimum: f64 },
    /// Target distortion below the smallest attainable distortion.
    DistortionBelowMinimum { target: f64, minimum: f64 },
    /// A systematic code sends `U` itself, whose average cost exceeds the budget.
    SourceCostAboveBudget { cost: f64, budget: f64 },
}

impl Infeasibility {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Infeasibility::Transmissibility { .. } => "transmissibility",
            Infeasibility::RateAboveCapacity { .. } => "rate_above_capacity",
            Infeasibility::CostBelowMinimum { .. } => "cost_below_minimum",
            Infeasibility::DistortionBelowMinimum { .. } => "distortion_below_minimum",
            Infeasibility::SourceCostAboveBudget { .. } => "source_cost_above_budget",
        }
    }
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Transmissibility { rate, lambda, capacity } => write!(
                f,
                "transmissibility violated: R_U|V(D) = {rate} > lambda * C = {lambda} * {capacity}"
            ),
            Infeasibility::RateAboveCapacity { rate, capacity } => {
                write!(f, "rate floor {rate} exceeds capacity {capacity}")
            }
            Infeasibility::CostBelowMinimum { budget, minimum } => {
                write!(f, "cost budget {budget} below minimum letter cost {minimum}")
            }
            Infeasibility::DistortionBelowMinimum { target, minimum } => {
                write!(f, "distortion {target} below minimum attainable {minimum}")
            }
            Infeasibility::SourceCostAboveBudget { cost, budget } => {
                write!(f, "systematic code needs E phi(U) = {cost} <= Q = {budget}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid distortion measure: {0}")]
    InvalidDistortion(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("infeasible: {0}")]
    Infeasible(Infeasibility),
    #[error("outside the decomposition regime: {0}")]
    Regime(String),
    #[error("no feasible candidate at grid resolution {0}")]
    InfeasibleAtResolution(f64),
    #[error("enumeration guard exceeded: {0}")]
    GuardExceeded(String),
}

impl Error {
    pub fn infeasible_code(&self) -> Option<&'static str> {
        match self {
            Error::Infeasible(why) => Some(why.code()),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
