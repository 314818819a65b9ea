//! Expected Downside Risk analytics.
//!
//! Empirical return distributions and their downside measures, a
//! loss-averse utility model with its risk-neutral solvers, Monte Carlo
//! efficiency frontiers, leverage under margin calls, a toy AS-AD price path
//! and the statistical procedures used to test the measures on data.

// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod empirics;
pub mod equilibrium;
pub mod error;
pub mod frontier;
pub mod leverage;
pub mod returns;
pub mod risk;
pub mod roots;
pub mod stats;
pub mod synthetic;
pub mod utility;

pub use error::{Error, Result};
pub use returns::{
    aggregate_periods, empirical_quantile, load_returns_csv, read_returns_csv, Atom, EmpiricalDistribution,
    Granularity, InputMode, PeriodSpec, ReturnSeries,
};
pub use risk::{
    beta_measures, conditional_value_at_risk, expected_downside_risk, gaussian_edr, prospect, risk_report,
    value_at_risk, DownsideRisk, RiskReport,
};
pub use utility::{KtUtilityParams, RiskNeutralPoint};
