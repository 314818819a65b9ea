//! Seeded synthetic return data for tests, fixtures and benchmarks.

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::Result;
use crate::returns::{aggregate_periods, business_days, PeriodSpec, ReturnSeries};
use crate::risk::risk_report;
use crate::roots::bisect_secant;

const FLOOR: f64 = -0.99;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date")
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(mu: f64, sigma: f64) -> Normal<f64> {
    Normal::new(mu, sigma).expect("finite parameters")
}

/// First day of `n` consecutive months from January 2000.
pub fn month_starts(n: usize) -> Vec<NaiveDate> {
    (0..n)
        .map(|i| NaiveDate::from_ymd_opt(2000 + (i / 12) as i32, (i % 12) as u32 + 1, 1).expect("valid date"))
        .collect()
}

/// `n` iid normal samples.
pub fn normal_samples(n: usize, mu: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let d = normal(mu, sigma);
    let mut r = rng(seed);
    (0..n).map(|_| d.sample(&mut r)).collect()
}

/// iid normal daily returns on business days from 2000-01-03.
pub fn iid_daily(label: &str, n_days: usize, mu: f64, sigma: f64, seed: u64) -> Result<ReturnSeries> {
    let values = normal_samples(n_days, mu, sigma, seed)
        .into_iter()
        .map(|v| v.max(FLOOR))
        .collect();
    ReturnSeries::new(label, business_days(start(), n_days), values)
}

/// Three assets with `n_obs` common observations: a low-risk and a
/// medium-risk normal asset and a high-return asset with occasional crashes.
pub fn three_asset_universe(n_obs: usize, seed: u64) -> Result<Vec<ReturnSeries>> {
    let mut r = rng(seed);
    let dates = business_days(start(), n_obs);
    let low = normal(0.04, 0.05);
    let mid = normal(0.08, 0.15);
    let body = normal(0.16, 0.10);
    let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n_obs)).collect();
    for _ in 0..n_obs {
        cols[0].push(low.sample(&mut r).max(FLOOR));
        cols[1].push(mid.sample(&mut r).max(FLOOR));
        let crash = r.random::<f64>() < 0.1;
        let v: f64 = body.sample(&mut r) - if crash { 0.45 } else { 0.0 };
        cols[2].push(v.max(FLOOR));
    }
    ["low", "mid", "crash"]
        .iter()
        .zip(cols)
        .map(|(l, v)| ReturnSeries::new(*l, dates.clone(), v))
        .collect()
}

/// Daily returns over `n_months` calendar months. Every month with index
/// `5 (mod 10)` drifts down by 2% a day. A month whose compounded return is
/// at or below -20% is followed by a month with twice its daily volatility;
/// otherwise daily volatility is 1%.
pub fn volatility_regime(n_months: usize, seed: u64) -> Result<ReturnSeries> {
    const CRASH: f64 = -0.2;
    let mut r = rng(seed);
    let first = start();
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut d = first;
    let mut month = 0;
    let mut sigma = 0.01;
    let mut growth = 1.0;
    loop {
        let m = ((d.year() - first.year()) * 12) as usize + d.month0() as usize;
        if m != month {
            sigma = if growth - 1.0 <= CRASH { 2.0 * sigma } else { 0.01 };
            growth = 1.0;
            month = m;
        }
        if month >= n_months {
            break;
        }
        if d.weekday().num_days_from_monday() < 5 {
            let drift = if month % 10 == 5 { -0.02 } else { 0.0 };
            let z: f64 = r.sample(StandardNormal);
            let v = (drift + sigma * z).max(FLOOR);
            growth *= 1.0 + v;
            dates.push(d);
            values.push(v);
        }
        d = d.succ_opt().expect("date in range");
    }
    ReturnSeries::new("regime", dates, values)
}

/// Index returns and a companion series `-coupling * index + noise` on the
/// same business days.
pub fn index_with_companion(n_days: usize, coupling: f64, seed: u64) -> Result<(ReturnSeries, ReturnSeries)> {
    let mut r = rng(seed);
    let idx = normal(0.0003, 0.01);
    let noise = normal(0.0, 0.03);
    let mut a = Vec::with_capacity(n_days);
    let mut b = Vec::with_capacity(n_days);
    for _ in 0..n_days {
        let x: f64 = idx.sample(&mut r);
        a.push(x.max(FLOOR));
        b.push((-coupling * x + noise.sample(&mut r)).max(FLOOR));
    }
    let dates = business_days(start(), n_days);
    Ok((
        ReturnSeries::new("index", dates.clone(), a)?,
        ReturnSeries::new("companion", dates, b)?,
    ))
}

/// Linear pricing rule `E = intercept + slope * EDR` for a cross-section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdrPricing {
    pub intercept: f64,
    pub slope: f64,
    /// Standard deviation of the pricing error per asset.
    pub noise: f64,
}

/// Monthly asset returns whose overlapping yearly returns satisfy `pricing`
/// up to the per-asset noise, plus a normal market series.
///
/// Shocks are split normal with independent downside and upside scales, so
/// EDR and volatility rank the assets differently. Each asset's monthly drift
/// is solved so that its realized yearly mean and EDR sit on the pricing line.
pub fn edr_cross_section(
    n_assets: usize,
    n_months: usize,
    pricing: EdrPricing,
    seed: u64,
) -> Result<(Vec<ReturnSeries>, ReturnSeries)> {
    let dates = month_starts(n_months);
    let mut r = rng(seed);
    let market_values = (0..n_months).map(|_| normal(0.008, 0.04).sample(&mut r)).collect();
    let market = ReturnSeries::new("market", dates.clone(), market_values)?;
    let err = normal(0.0, pricing.noise.max(f64::MIN_POSITIVE));

    let mut assets = Vec::with_capacity(n_assets);
    for i in 0..n_assets {
        let down = r.random_range(0.01..0.08);
        let up = r.random_range(0.01..0.12);
        let shocks: Vec<f64> = (0..n_months)
            .map(|_| {
                let z: f64 = r.sample(StandardNormal);
                if z < 0.0 {
                    z * down
                } else {
                    z * up
                }
            })
            .collect();
        let target = pricing.intercept + if pricing.noise > 0.0 { err.sample(&mut r) } else { 0.0 };
        let label = format!("asset{i:03}");
        let build = |mu: f64| -> Result<ReturnSeries> {
            let v = shocks.iter().map(|s| (mu + s).max(FLOOR)).collect();
            ReturnSeries::new(label.clone(), dates.clone(), v)
        };
        let gap = |mu: f64| -> f64 {
            let Ok(series) = build(mu) else { return f64::NAN };
            let Ok(yearly) = aggregate_periods(&series, PeriodSpec::overlapping_yearly()) else {
                return f64::NAN;
            };
            match risk_report(&yearly) {
                Ok(rep) => rep.expected_return - pricing.slope * rep.edr - target,
                Err(_) => f64::NAN,
            }
        };
        let mu = bisect_secant(gap, -0.05, 0.10, 1e-12)?;
        assets.push(build(mu)?);
    }
    Ok((assets, market))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(normal_samples(10, 0.0, 1.0, 3), normal_samples(10, 0.0, 1.0, 3));
        let a = three_asset_universe(50, 1).unwrap();
        let b = three_asset_universe(50, 1).unwrap();
        assert_eq!(a, b);
        assert!(a[0].aligned_with(&a[2]));
    }

    #[test]
    fn regime_covers_requested_months() {
        let s = volatility_regime(24, 5).unwrap();
        let last = *s.dates().last().unwrap();
        assert_eq!((last.year(), last.month()), (2001, 12));
    }

    #[test]
    fn month_starts_roll_over() {
        let d = month_starts(14);
        assert_eq!(d[12], NaiveDate::from_ymd_opt(2001, 1, 1).unwrap());
    }
}
