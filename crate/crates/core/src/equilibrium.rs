//! Value-weighted required returns and a linear AS-AD price path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::neumaier_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestorView {
    pub invested_value: f64,
    pub required_return: f64,
}

/// `sum(v_i r_i) / sum(v_i)`.
pub fn aggregate_required_return(views: &[InvestorView]) -> Result<f64> {
    if views.is_empty() {
        return Err(Error::EmptyResult("no investor views".into()));
    }
    if let Some(v) = views
        .iter()
        .find(|v| !(v.invested_value > 0.0 && v.invested_value.is_finite()))
    {
        return Err(Error::domain(format!(
            "invested value {} must be positive",
            v.invested_value
        )));
    }
    let total = neumaier_sum(views.iter().map(|v| v.invested_value));
    let weighted = neumaier_sum(views.iter().map(|v| v.invested_value * v.required_return));
    let r = weighted / total;
    // keep the result inside the input range despite rounding
    let (lo, hi) = views.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v.required_return), hi.max(v.required_return))
    });
    Ok(r.clamp(lo, hi))
}

/// Linear supply `P = s Q + s0` and demand `P = d Q + d0`, both growing at
/// `growth_rate` per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsAdSpec {
    pub supply_slope: f64,
    pub supply_intercept: f64,
    pub demand_slope: f64,
    pub demand_intercept: f64,
    pub growth_rate: f64,
    pub horizon: f64,
    pub steps: usize,
}

impl AsAdSpec {
    /// `P_S = 2Q`, `P_D = 5 - 2Q`.
    pub fn textbook(growth_rate: f64, horizon: f64, steps: usize) -> Self {
        Self {
            supply_slope: 2.0,
            supply_intercept: 0.0,
            demand_slope: -2.0,
            demand_intercept: 5.0,
            growth_rate,
            horizon,
            steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub t: f64,
    pub q: f64,
    pub p: f64,
}

/// Equilibrium `(Q, P)` of the unscaled curves.
pub fn as_ad_equilibrium(spec: &AsAdSpec) -> Result<(f64, f64)> {
    if spec.supply_slope == spec.demand_slope {
        return Err(Error::NoEquilibrium("supply and demand are parallel".into()));
    }
    if !(spec.supply_slope > 0.0 && spec.demand_slope < 0.0) {
        return Err(Error::domain("supply must slope up and demand down"));
    }
    let q = (spec.demand_intercept - spec.supply_intercept) / (spec.supply_slope - spec.demand_slope);
    let p = spec.supply_slope * q + spec.supply_intercept;
    if !(q > 0.0 && p > 0.0) {
        return Err(Error::NoEquilibrium(format!("curves meet at Q = {q}, P = {p}")));
    }
    Ok((q, p))
}

/// Equilibrium at `t_i = i * horizon / steps` for `i = 0..=steps`.
///
/// Scaling both curves by `e^{g t}` leaves `Q` fixed and gives `P(t) = P(0) e^{g t}`.
pub fn as_ad_price_path(spec: &AsAdSpec) -> Result<Vec<PricePoint>> {
    if !(spec.horizon >= 0.0 && spec.horizon.is_finite()) {
        return Err(Error::domain(format!("horizon {} must be non-negative", spec.horizon)));
    }
    if spec.steps == 0 {
        return Err(Error::domain("steps must be positive"));
    }
    let (q, p0) = as_ad_equilibrium(spec)?;
    Ok((0..=spec.steps)
        .map(|i| {
            let t = i as f64 * spec.horizon / spec.steps as f64;
            PricePoint {
                t,
                q,
                p: p0 * (spec.growth_rate * t).exp(),
            }
        })
        .collect())
}
