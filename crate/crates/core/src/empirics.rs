//! Volatility event study, quantile-conditioned t-test curve and
//! cross-sectional risk-return regressions.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::{aggregate_periods, bucket_periods, Granularity, PeriodSpec, ReturnSeries};
use crate::risk::{beta_measures, risk_report};
use crate::stats::{ols_fit, student_t_test_tail, RegressionResult, Tail};

/// Minimum number of periods for the event study.
pub const MIN_EVENT_PERIODS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Event {
    /// Period return above the 90th percentile.
    Jump,
    /// Period return at or below the 10th percentile.
    Fall,
}

impl Event {
    pub fn as_str(self) -> &'static str {
        match self {
            Event::Jump => "jump",
            Event::Fall => "fall",
        }
    }
}

/// Sign of the return in the period after the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Up,
    Down,
    /// Both trends pooled.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStudyResult {
    pub label: String,
    pub event: Event,
    pub trend: Trend,
    pub granularity: Granularity,
    /// Mean of `ln(vol_{t+1} / vol_t)` over the events.
    pub mean_vol_change: f64,
    pub p_value: f64,
    pub n_events: usize,
}

fn row_label(event: Event, trend: Trend, g: Granularity) -> String {
    let (e, g) = (event.as_str(), g.as_str());
    match trend {
        Trend::Up => format!("Volatility change after price {e} in {g} uptrend"),
        Trend::Down => format!("Volatility change after price {e} in {g} downtrend"),
        Trend::All => format!("Avg vol change after price {e} {g}"),
    }
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// One event period and what followed it.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Observation {
    event: Event,
    next_return: f64,
    vol_change: f64,
}

fn event_observations(daily: &ReturnSeries, granularity: Granularity) -> Result<Vec<Observation>> {
    if granularity == Granularity::Yearly {
        return Err(Error::domain("event study needs weekly or monthly periods"));
    }
    let buckets = bucket_periods(daily, granularity);
    if buckets.len() < MIN_EVENT_PERIODS {
        return Err(Error::InsufficientData {
            required: MIN_EVENT_PERIODS,
            actual: buckets.len(),
        });
    }
    let period = aggregate_periods(daily, PeriodSpec::disjoint(granularity))?;
    let returns = period.values();
    let dist = period.distribution();
    let low = dist.quantile(0.1)?;
    let high = dist.quantile(0.9)?;
    let vols: Vec<Option<f64>> = buckets
        .iter()
        .map(|b| {
            if b.values.len() < 2 {
                return None;
            }
            let v = population_std(&b.values);
            (v > 0.0).then_some(v)
        })
        .collect();

    let mut out = Vec::new();
    for t in 0..returns.len() - 1 {
        let event = if returns[t] <= low {
            Event::Fall
        } else if returns[t] > high {
            Event::Jump
        } else {
            continue;
        };
        if let (Some(v0), Some(v1)) = (vols[t], vols[t + 1]) {
            out.push(Observation {
                event,
                next_return: returns[t + 1],
                vol_change: (v1 / v0).ln(),
            });
        }
    }
    Ok(out)
}

fn summarize(
    obs: &[Observation],
    event: Event,
    trend: Trend,
    granularity: Granularity,
    tail: Tail,
) -> Option<EventStudyResult> {
    let changes: Vec<f64> = obs
        .iter()
        .filter(|o| o.event == event)
        .filter(|o| match trend {
            Trend::Up => o.next_return > 0.0,
            Trend::Down => o.next_return < 0.0,
            Trend::All => true,
        })
        .map(|o| o.vol_change)
        .collect();
    let test = student_t_test_tail(&changes, tail).ok()?;
    Some(EventStudyResult {
        label: row_label(event, trend, granularity),
        event,
        trend,
        granularity,
        mean_vol_change: test.mean,
        p_value: test.p_value,
        n_events: test.n,
    })
}

/// Log volatility changes after extreme periods, split by the sign of the
/// following period, with a t-test of a zero mean for each row.
///
/// Rows come in the order jump/up, jump/down, fall/up, fall/down, jump/all,
/// fall/all. Rows with fewer than two events or no dispersion are omitted.
pub fn event_study_volatility(daily: &ReturnSeries, granularity: Granularity) -> Result<Vec<EventStudyResult>> {
    event_study_volatility_tail(daily, granularity, Tail::Two)
}

/// [`event_study_volatility`] with a chosen alternative hypothesis.
pub fn event_study_volatility_tail(
    daily: &ReturnSeries,
    granularity: Granularity,
    tail: Tail,
) -> Result<Vec<EventStudyResult>> {
    let obs = event_observations(daily, granularity)?;
    let order = [
        (Event::Jump, Trend::Up),
        (Event::Jump, Trend::Down),
        (Event::Fall, Trend::Up),
        (Event::Fall, Trend::Down),
        (Event::Jump, Trend::All),
        (Event::Fall, Trend::All),
    ];
    Ok(order
        .iter()
        .filter_map(|&(e, t)| summarize(&obs, e, t, granularity, tail))
        .collect())
}

/// Monthly and weekly results laid out as one table: the trend rows for
/// monthly then weekly periods, followed by the pooled rows.
pub fn event_study_table(daily: &ReturnSeries, tail: Tail) -> Result<Vec<EventStudyResult>> {
    let monthly = event_study_volatility_tail(daily, Granularity::Monthly, tail)?;
    let weekly = event_study_volatility_tail(daily, Granularity::Weekly, tail)?;
    let trend_rows = |rows: &[EventStudyResult]| -> Vec<EventStudyResult> {
        rows.iter().filter(|r| r.trend != Trend::All).cloned().collect()
    };
    let pooled =
        |rows: &[EventStudyResult], e: Event| rows.iter().find(|r| r.trend == Trend::All && r.event == e).cloned();
    let mut out = trend_rows(&monthly);
    out.extend(trend_rows(&weekly));
    for e in [Event::Jump, Event::Fall] {
        out.extend(pooled(&monthly, e));
        out.extend(pooled(&weekly, e));
    }
    Ok(out)
}

/// Daily log changes `ln(L_t / L_{t-1})` of a level series, dated at `t`.
pub fn log_changes(label: impl Into<String>, dates: &[NaiveDate], levels: &[f64]) -> Result<ReturnSeries> {
    if dates.len() != levels.len() {
        return Err(Error::domain("dates and levels differ in length"));
    }
    if levels.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: levels.len(),
        });
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::domain(format!("level {l} must be positive")));
    }
    let values = levels.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    ReturnSeries::new(label, dates[1..].to_vec(), values)
}

/// How index days are selected for each probability level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Index return at or below the alpha-quantile.
    #[default]
    Cumulative,
    /// Index return above the previous level's quantile and at or below this one.
    Bucket,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePoint {
    pub alpha: f64,
    pub threshold: f64,
    pub n_selected: usize,
    pub mean: Option<f64>,
    /// `None` when fewer than two days are selected or they do not vary.
    pub p_value: Option<f64>,
}

/// t-test of the companion changes on days selected by index-return quantiles.
///
/// `alphas` must be strictly increasing in `(0, 1]`.
pub fn quantile_ttest_curve(
    index_returns: &ReturnSeries,
    companion_changes: &ReturnSeries,
    alphas: &[f64],
    selection: Selection,
) -> Result<Vec<QuantilePoint>> {
    if !index_returns.aligned_with(companion_changes) {
        return Err(Error::Alignment(format!(
            "{} and {} have different dates",
            index_returns.label(),
            companion_changes.label()
        )));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
        return Err(Error::domain(format!("alpha {a} outside (0, 1]")));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("alphas must be strictly increasing"));
    }
    let dist = index_returns.distribution();
    let thresholds = alphas.iter().map(|&a| dist.quantile(a)).collect::<Result<Vec<_>>>()?;
    let idx = index_returns.values();
    let comp = companion_changes.values();
    Ok((0..alphas.len())
        .into_par_iter()
        .map(|i| {
            let upper = thresholds[i];
            let lower = match selection {
                Selection::Bucket if i > 0 => thresholds[i - 1],
                _ => f64::NEG_INFINITY,
            };
            let chosen: Vec<f64> = idx
                .iter()
                .zip(comp)
                .filter(|(r, _)| **r > lower && **r <= upper)
                .map(|(_, c)| *c)
                .collect();
            let test = student_t_test_tail(&chosen, Tail::Two).ok();
            QuantilePoint {
                alpha: alphas[i],
                threshold: upper,
                n_selected: chosen.len(),
                mean: test.map(|t| t.mean),
                p_value: test.map(|t| t.p_value),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Volatility,
    Semivariance,
    Beta,
    DownsideBeta,
    Edr,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Volatility,
        Measure::Semivariance,
        Measure::Beta,
        Measure::DownsideBeta,
        Measure::Edr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Volatility => "volatility",
            Measure::Semivariance => "semivariance",
            Measure::Beta => "beta",
            Measure::DownsideBeta => "downside_beta",
            Measure::Edr => "edr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionResult {
    pub measure: Measure,
    pub regression: RegressionResult,
    /// Labels of assets whose measure could not be computed.
    pub excluded: Vec<String>,
}

/// Regresses each asset's mean overlapping yearly return on a risk measure
/// of those same yearly returns.
pub fn cross_section_regression(
    assets: &[ReturnSeries],
    market: &ReturnSeries,
    measure: Measure,
) -> Result<CrossSectionResult> {
    if assets.len() < 3 {
        return Err(Error::InsufficientData {
            required: 3,
            actual: assets.len(),
        });
    }
    let market_yearly = match measure {
        Measure::Beta | Measure::DownsideBeta => Some(aggregate_periods(market, PeriodSpec::overlapping_yearly())?),
        _ => None,
    };
    let points: Vec<(String, Result<(f64, f64)>)> = assets
        .par_iter()
        .map(|asset| {
            let point = (|| {
                let yearly = aggregate_periods(asset, PeriodSpec::overlapping_yearly())?;
                let report = risk_report(&yearly)?;
                let x = match measure {
                    Measure::Volatility => report.volatility,
                    Measure::Semivariance => report.semivariance,
                    Measure::Edr => report.edr,
                    Measure::Beta | Measure::DownsideBeta => {
                        let betas = beta_measures(&yearly, market_yearly.as_ref().expect("market prepared"))?;
                        if measure == Measure::Beta {
                            betas.beta
                        } else {
                            betas.downside_beta
                        }
                    }
                };
                Ok((x, report.expected_return))
            })();
            (asset.label().to_string(), point)
        })
        .collect();

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for (label, p) in points {
        match p {
            Ok((x, y)) => {
                xs.push(x);
                ys.push(y);
            }
            Err(_) => excluded.push(label),
        }
    }
    let regression = ols_fit(&xs, &ys)?;
    Ok(CrossSectionResult {
        measure,
        regression,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::returns::business_days;

    fn series(values: Vec<f64>) -> ReturnSeries {
        ReturnSeries::from_values("s", values).unwrap()
    }

    #[test]
    fn labels_follow_table_layout() {
        assert_eq!(
            row_label(Event::Fall, Trend::Down, Granularity::Monthly),
            "Volatility change after price fall in monthly downtrend"
        );
        assert_eq!(
            row_label(Event::Jump, Trend::All, Granularity::Weekly),
            "Avg vol change after price jump weekly"
        );
    }

    #[test]
    fn event_study_needs_enough_periods() {
        let s = series(vec![0.001; 200]);
        assert!(matches!(
            event_study_volatility(&s, Granularity::Monthly),
            Err(Error::InsufficientData { .. })
        ));
        assert!(event_study_volatility(&s, Granularity::Yearly).is_err());
    }

    #[test]
    fn log_changes_of_levels() {
        let d = business_days(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), 3);
        let s = log_changes("v", &d, &[10.0, 20.0, 10.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.values()[0] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(s.dates()[0], d[1]);
        assert!(log_changes("v", &d, &[10.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn quantile_curve_full_sample_and_sizes() {
        let idx = series((0..100).map(|i| ((i * 37) % 100) as f64 / 1000.0 - 0.05).collect());
        let comp = series((0..100).map(|i| ((i * 11) % 7) as f64 / 100.0 - 0.03).collect());
        let alphas = [0.1, 0.25, 0.5, 1.0];
        let curve = quantile_ttest_curve(&idx, &comp, &alphas, Selection::Cumulative).unwrap();
        assert!(curve.windows(2).all(|w| w[1].n_selected >= w[0].n_selected));
        let full = crate::stats::student_t_test(comp.values()).unwrap();
        assert_eq!(curve[3].n_selected, 100);
        assert_eq!(curve[3].p_value, Some(full.p_value));

        let buckets = quantile_ttest_curve(&idx, &comp, &alphas, Selection::Bucket).unwrap();
        assert_eq!(buckets.iter().map(|p| p.n_selected).sum::<usize>(), 100);
    }

    #[test]
    fn quantile_curve_validation() {
        let a = series(vec![0.01, 0.02, 0.03]);
        let b = ReturnSeries::from_values("b", vec![0.01, 0.02]).unwrap();
        assert!(matches!(
            quantile_ttest_curve(&a, &b, &[0.5], Selection::Cumulative),
            Err(Error::Alignment(_))
        ));
        assert!(quantile_ttest_curve(&a, &a, &[0.0], Selection::Cumulative).is_err());
        assert!(quantile_ttest_curve(&a, &a, &[0.5, 0.2], Selection::Cumulative).is_err());
        // one selected day: reported without a p-value
        let c = quantile_ttest_curve(&a, &a, &[0.2], Selection::Cumulative).unwrap();
        assert_eq!(c[0].n_selected, 1);
        assert_eq!(c[0].p_value, None);
    }

    #[test]
    fn cross_section_identical_assets_is_singular() {
        let values: Vec<f64> = (0..600).map(|i| ((i % 13) as f64 - 6.0) / 500.0 + 0.0005).collect();
        let assets: Vec<ReturnSeries> = (0..4)
            .map(|i| series(values.clone()).with_label(format!("a{i}")))
            .collect();
        assert!(matches!(
            cross_section_regression(&assets, &assets[0], Measure::Edr),
            Err(Error::SingularDesign(_))
        ));
        assert!(cross_section_regression(&assets[..2], &assets[0], Measure::Edr).is_err());
    }
}
