//! Tail and downside risk measures.
//!
//! VaR and CVaR are expressed in return space: a lower number is a worse
//! outcome, so `cvar <= var` always holds. Expected Downside Risk (EDR) is the
//! conditional mean of outcomes at or below the expected return; Prospect is
//! the conditional mean of outcomes strictly above it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::{neumaier_sum, EmpiricalDistribution, ReturnSeries};

/// `sqrt(2 / pi)`, the exact downside coefficient of a normal distribution.
pub const GAUSSIAN_EDR_COEFFICIENT: f64 = 0.797_884_560_802_865_4;

/// Lower `alpha`-quantile of the return distribution.
pub fn value_at_risk(dist: &EmpiricalDistribution, alpha: f64) -> Result<f64> {
    dist.quantile(alpha)
}

/// Probability-weighted mean of the outcomes at or below `value_at_risk`.
pub fn conditional_value_at_risk(dist: &EmpiricalDistribution, alpha: f64) -> Result<f64> {
    let var = value_at_risk(dist, alpha)?;
    Ok(tail_mean(dist, var).0)
}

/// `(mean, mass)` of the outcomes `<= cutoff`.
fn tail_mean(dist: &EmpiricalDistribution, cutoff: f64) -> (f64, f64) {
    let tail = dist.atoms().iter().take_while(|a| a.outcome <= cutoff);
    let mass = neumaier_sum(tail.clone().map(|a| a.probability));
    let weighted = neumaier_sum(tail.map(|a| a.probability * a.outcome));
    // A mean of values <= cutoff cannot exceed it; clamp away rounding.
    ((weighted / mass).min(cutoff), mass)
}

/// Cutoff used to decide whether an outcome sits at or below the mean.
///
/// Outcomes within a relative `1e-12` of the mean count as equal to it so
/// that rounding in the mean cannot move an atom across the boundary.
fn mean_cutoff(dist: &EmpiricalDistribution, mean: f64) -> f64 {
    let scale = dist.min().abs().max(dist.max().abs());
    mean + 1e-12 * scale
}

/// EDR together with the probability mass that defines it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownsideRisk {
    pub edr: f64,
    pub alpha_below: f64,
}

/// Mean of the outcomes at or below the expected return, and their mass.
pub fn expected_downside_risk(dist: &EmpiricalDistribution) -> DownsideRisk {
    let mean = dist.mean();
    let (edr, alpha_below) = tail_mean(dist, mean_cutoff(dist, mean));
    // The lowest atom is never above the mean, so the tail is non-empty.
    DownsideRisk {
        edr: edr.min(mean),
        alpha_below: alpha_below.min(1.0),
    }
}

/// Prospect: `(E - alpha * EDR) / (1 - alpha)`, the mean of the outcomes
/// above the expected return.
pub fn prospect(dist: &EmpiricalDistribution) -> Result<f64> {
    let mean = dist.mean();
    let DownsideRisk { edr, alpha_below } = expected_downside_risk(dist);
    let above = 1.0 - alpha_below;
    if above <= 1e-15 {
        return Err(Error::UndefinedProspect);
    }
    Ok((mean - alpha_below * edr) / above)
}

/// Closed-form EDR of a normal distribution, `mean - sqrt(2/pi) * sigma`.
pub fn gaussian_edr(mean: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::domain(format!("sigma {sigma} must be non-negative")));
    }
    Ok(mean - GAUSSIAN_EDR_COEFFICIENT * sigma)
}

/// A `(probability level, value)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtLevel {
    pub alpha: f64,
    pub value: f64,
}

/// Summary risk statistics of one return series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub label: String,
    pub n: usize,
    #[serde(rename = "mean")]
    pub expected_return: f64,
    pub volatility: f64,
    pub semivariance: f64,
    pub edr: f64,
    /// Undefined when every observation equals the mean.
    pub prospect: Option<f64>,
    pub alpha_below: f64,
    #[serde(rename = "var")]
    pub var_at: Option<AtLevel>,
    #[serde(rename = "cvar")]
    pub cvar_at: Option<AtLevel>,
}

impl RiskReport {
    pub const CSV_HEADER: [&'static str; 10] = [
        "label",
        "n",
        "mean",
        "volatility",
        "semivariance",
        "edr",
        "prospect",
        "alpha_below",
        "var",
        "cvar",
    ];

    /// Fields in `CSV_HEADER` order; undefined values are empty.
    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.label.clone(),
            self.n.to_string(),
            self.expected_return.to_string(),
            self.volatility.to_string(),
            self.semivariance.to_string(),
            self.edr.to_string(),
            opt(self.prospect),
            self.alpha_below.to_string(),
            opt(self.var_at.map(|a| a.value)),
            opt(self.cvar_at.map(|a| a.value)),
        ]
    }
}

/// Risk report without VaR/CVaR.
pub fn risk_report(series: &ReturnSeries) -> Result<RiskReport> {
    risk_report_at(series, None)
}

/// Risk report with VaR and CVaR at `alpha` when given.
pub fn risk_report_at(series: &ReturnSeries, alpha: Option<f64>) -> Result<RiskReport> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData { required: 2, actual: n });
    }
    let values = series.values();
    let mean = neumaier_sum(values.iter().copied()) / n as f64;
    let variance = neumaier_sum(values.iter().map(|r| (r - mean) * (r - mean))) / n as f64;
    let semivariance = neumaier_sum(values.iter().map(|r| {
        let s = (r - mean).min(0.0);
        s * s
    })) / n as f64;

    let dist = series.distribution();
    let downside = expected_downside_risk(&dist);
    let prospect = match prospect(&dist) {
        Ok(p) => Some(p),
        Err(Error::UndefinedProspect) => None,
        Err(e) => return Err(e),
    };
    let (var_at, cvar_at) = match alpha {
        Some(alpha) => (
            Some(AtLevel {
                alpha,
                value: value_at_risk(&dist, alpha)?,
            }),
            Some(AtLevel {
                alpha,
                value: conditional_value_at_risk(&dist, alpha)?,
            }),
        ),
        None => (None, None),
    };
    Ok(RiskReport {
        label: series.label().to_string(),
        n,
        expected_return: mean,
        volatility: variance.sqrt(),
        semivariance,
        edr: downside.edr,
        prospect,
        alpha_below: downside.alpha_below,
        var_at,
        cvar_at,
    })
}

/// Ordinary and downside beta of an asset against a market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Betas {
    pub beta: f64,
    pub downside_beta: f64,
}

/// `beta = cov(a, m) / var(m)`; downside beta uses the co-semivariance
/// `E[min(a - mu_a, 0) min(m - mu_m, 0)] / E[min(m - mu_m, 0)^2]`.
pub fn beta_measures(asset: &ReturnSeries, market: &ReturnSeries) -> Result<Betas> {
    if asset.len() != market.len() {
        return Err(Error::Alignment(format!(
            "{} has {} observations, {} has {}",
            asset.label(),
            asset.len(),
            market.label(),
            market.len()
        )));
    }
    if !asset.aligned_with(market) {
        return Err(Error::Alignment(format!(
            "{} and {} have different dates",
            asset.label(),
            market.label()
        )));
    }
    if asset.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: asset.len(),
        });
    }
    let n = asset.len() as f64;
    let (a, m) = (asset.values(), market.values());
    let mu_a = neumaier_sum(a.iter().copied()) / n;
    let mu_m = neumaier_sum(m.iter().copied()) / n;
    let cov = neumaier_sum(a.iter().zip(m).map(|(x, y)| (x - mu_a) * (y - mu_m))) / n;
    let var_m = neumaier_sum(m.iter().map(|y| (y - mu_m) * (y - mu_m))) / n;
    let co_semi = neumaier_sum(a.iter().zip(m).map(|(x, y)| (x - mu_a).min(0.0) * (y - mu_m).min(0.0))) / n;
    let semi_m = neumaier_sum(m.iter().map(|y| (y - mu_m).min(0.0).powi(2))) / n;
    if var_m <= 0.0 {
        return Err(Error::UndefinedBeta("market variance is zero".into()));
    }
    if semi_m <= 0.0 {
        return Err(Error::UndefinedBeta("market has no downside mass".into()));
    }
    Ok(Betas {
        beta: cov / var_m,
        downside_beta: co_semi / semi_m,
    })
}
