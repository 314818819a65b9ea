//! Regenerates the bundled fixtures:
//!
//! ```text
//! cargo run -p edr-cli --example make_fixtures -- crates/cli/fixtures
//! ```

use std::fs;
use std::path::Path;

use edr_core::synthetic::{self, EdrPricing};
use edr_core::ReturnSeries;

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn write_series(path: &Path, header: &str, dates: &[String], values: &[f64]) -> Res<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", header])?;
    for (d, v) in dates.iter().zip(values) {
        w.write_record([d.clone(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn dates(s: &ReturnSeries) -> Vec<String> {
    s.dates().iter().map(|d| d.to_string()).collect()
}

fn returns(path: &Path, s: &ReturnSeries) -> Res<()> {
    write_series(path, "return", &dates(s), s.values())
}

/// Compounds returns into levels starting from `base`, one level per date.
fn levels(base: f64, growth: impl Iterator<Item = f64>) -> Vec<f64> {
    growth
        .scan(base, |level, g| {
            *level *= g;
            // round so the files stay readable; the loaders accept any precision
            Some((*level * 1e6).round() / 1e6)
        })
        .collect()
}

fn main() -> Res<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "crates/cli/fixtures".into());
    let out = Path::new(&out);
    fs::create_dir_all(out.join("assets"))?;
    fs::create_dir_all(out.join("xsection"))?;

    for s in synthetic::three_asset_universe(250, 1)? {
        returns(&out.join("assets").join(format!("{}.csv", s.label())), &s)?;
    }

    let regime = synthetic::volatility_regime(120, 7)?;
    let prices = levels(100.0, regime.values().iter().map(|r| 1.0 + r));
    write_series(&out.join("regime_prices.csv"), "close", &dates(&regime), &prices)?;

    let (index, companion) = synthetic::index_with_companion(2500, 3.0, 3)?;
    let prices = levels(100.0, index.values().iter().map(|r| 1.0 + r));
    write_series(&out.join("index_prices.csv"), "close", &dates(&index), &prices)?;
    let vol = levels(20.0, companion.values().iter().map(|c| c.exp()));
    write_series(&out.join("companion_levels.csv"), "level", &dates(&companion), &vol)?;

    let pricing = EdrPricing {
        intercept: 0.15,
        slope: 0.56,
        noise: 0.01,
    };
    let (assets, market) = synthetic::edr_cross_section(20, 120, pricing, 11)?;
    for s in &assets {
        returns(&out.join("xsection").join(format!("{}.csv", s.label())), s)?;
    }
    returns(&out.join("market.csv"), &market)?;

    let mut w = csv::Writer::from_path(out.join("views.csv"))?;
    w.write_record(["invested_value", "required_return"])?;
    for (v, r) in [(1000.0, 0.04), (250.0, 0.09), (4000.0, 0.06), (50.0, 0.15)] {
        w.write_record([f64::to_string(&v), f64::to_string(&r)])?;
    }
    w.flush()?;
    Ok(())
}
