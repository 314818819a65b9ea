//! Return series ingestion, period aggregation and empirical distributions.
//!
//! All returns are simple periodic returns. Where a loss-space quantity is
//! needed elsewhere the mapping is `loss = -return`; everything in this crate
//! stays in return space.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when comparing a running cumulative probability with a level.
const CUMULATIVE_SLACK: f64 = 1e-12;

/// A dated sequence of simple returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    label: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::domain(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::EmptyResult("return series has no observations".into()));
        }
        for (i, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::Ordering {
                    line: i + 2,
                    date: w[1].to_string(),
                    previous: w[0].to_string(),
                });
            }
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= -1.0) {
            return Err(Error::domain(format!("return {bad} is not above -1")));
        }
        Ok(Self {
            label: label.into(),
            dates,
            values,
        })
    }

    /// Builds a series on consecutive business days starting 2000-01-03.
    pub fn from_values(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
        Self::new(label, business_days(start, values.len()), values)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a series holds at least one observation.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Compounded return over the whole span.
    pub fn compounded(&self) -> f64 {
        compound(&self.values)
    }

    /// Uniform empirical distribution over the observations.
    pub fn distribution(&self) -> EmpiricalDistribution {
        EmpiricalDistribution::from_samples(&self.values).expect("series values are finite and non-empty")
    }

    pub fn aligned_with(&self, other: &ReturnSeries) -> bool {
        self.dates == other.dates
    }
}

/// `n` weekdays starting at `start` (rolled forward if it falls on a weekend).
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

pub(crate) fn compound(values: &[f64]) -> f64 {
    values.iter().fold(1.0, |acc, r| acc * (1.0 + r)) - 1.0
}

/// One outcome of a discrete distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub outcome: f64,
    pub probability: f64,
}

/// Discrete distribution with strictly ascending outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    atoms: Vec<Atom>,
}

impl EmpiricalDistribution {
    /// Builds a distribution from `(outcome, probability)` pairs.
    ///
    /// Pairs are sorted and equal outcomes merged. Probabilities must lie in
    /// `[0, 1]` and sum to one within `1e-12`.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = pairs
            .into_iter()
            .map(|(outcome, probability)| Atom { outcome, probability })
            .collect();
        if atoms.is_empty() {
            return Err(Error::EmptyResult("distribution has no atoms".into()));
        }
        for a in &atoms {
            if !a.outcome.is_finite() {
                return Err(Error::domain(format!("outcome {} is not finite", a.outcome)));
            }
            if !(0.0..=1.0).contains(&a.probability) {
                return Err(Error::domain(format!("probability {} outside [0, 1]", a.probability)));
            }
        }
        let total = neumaier_sum(atoms.iter().map(|a| a.probability));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        atoms.sort_by(|a, b| a.outcome.total_cmp(&b.outcome));
        Ok(Self {
            atoms: merge_equal(atoms),
        })
    }

    /// Uniform distribution over samples; repeated values are merged.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyResult("no samples".into()));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample {bad} is not finite")));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut atoms: Vec<Atom> = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i + 1;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            atoms.push(Atom {
                outcome: sorted[i],
                probability: (j - i) as f64 / n,
            });
            i = j;
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        neumaier_sum(self.atoms.iter().map(|a| a.outcome * a.probability))
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        neumaier_sum(
            self.atoms
                .iter()
                .map(|a| a.probability * (a.outcome - m) * (a.outcome - m)),
        )
    }

    pub fn min(&self) -> f64 {
        self.atoms[0].outcome
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].outcome
    }

    /// Applies `f` to every outcome. `f` must be strictly increasing.
    pub fn map_outcomes(&self, f: impl Fn(f64) -> f64) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                outcome: f(a.outcome),
                probability: a.probability,
            })
            .collect();
        Self {
            atoms: merge_equal(atoms),
        }
    }

    /// Lower empirical quantile: the smallest outcome whose cumulative
    /// probability reaches `alpha`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("alpha {alpha} outside (0, 1]")));
        }
        let mut cum = 0.0;
        for a in &self.atoms {
            cum += a.probability;
            if cum >= alpha - CUMULATIVE_SLACK {
                return Ok(a.outcome);
            }
        }
        Ok(self.max())
    }
}

/// Lower empirical quantile of `dist` at probability `alpha`.
pub fn empirical_quantile(dist: &EmpiricalDistribution, alpha: f64) -> Result<f64> {
    dist.quantile(alpha)
}

fn merge_equal(sorted: Vec<Atom>) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(sorted.len());
    for a in sorted {
        match out.last_mut() {
            Some(last) if last.outcome == a.outcome => last.probability += a.probability,
            _ => out.push(a),
        }
    }
    out
}

pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Weekly,
    Monthly,
    Yearly,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Weekly => "weekly",
            Granularity::Monthly => "monthly",
            Granularity::Yearly => "yearly",
        }
    }

    fn key(self, d: NaiveDate) -> (i32, u32) {
        match self {
            Granularity::Weekly => {
                let w = d.iso_week();
                (w.year(), w.week())
            }
            Granularity::Monthly => (d.year(), d.month()),
            Granularity::Yearly => (d.year(), 0),
        }
    }
}

/// Aggregation window definition. Weeks are ISO weeks, months calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodSpec {
    pub granularity: Granularity,
    /// Overlapping 12-month windows; only valid with yearly granularity.
    pub overlap: bool,
}

impl PeriodSpec {
    pub fn disjoint(granularity: Granularity) -> Self {
        Self {
            granularity,
            overlap: false,
        }
    }

    pub fn overlapping_yearly() -> Self {
        Self {
            granularity: Granularity::Yearly,
            overlap: true,
        }
    }
}

/// Observations falling in one calendar period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodBucket {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub values: Vec<f64>,
}

impl PeriodBucket {
    pub fn compounded(&self) -> f64 {
        compound(&self.values)
    }
}

/// Groups observations into disjoint calendar periods, in date order.
pub fn bucket_periods(series: &ReturnSeries, granularity: Granularity) -> Vec<PeriodBucket> {
    let mut out: Vec<PeriodBucket> = Vec::new();
    let mut current_key = None;
    for (&d, &v) in series.dates.iter().zip(&series.values) {
        let key = granularity.key(d);
        if current_key == Some(key) {
            let b = out.last_mut().expect("bucket open");
            b.end = d;
            b.values.push(v);
        } else {
            current_key = Some(key);
            out.push(PeriodBucket {
                start: d,
                end: d,
                values: vec![v],
            });
        }
    }
    out
}

/// Compounds returns over calendar windows.
///
/// Each output observation is dated at the last input date of its window.
/// Overlapping yearly mode first compounds calendar months and then emits a
/// trailing 12-month return ending at every month from the twelfth onwards.
pub fn aggregate_periods(series: &ReturnSeries, spec: PeriodSpec) -> Result<ReturnSeries> {
    if spec.overlap && spec.granularity != Granularity::Yearly {
        return Err(Error::domain(
            "overlapping windows are only defined for yearly granularity",
        ));
    }
    let (dates, values): (Vec<NaiveDate>, Vec<f64>) = if spec.overlap {
        let months = bucket_periods(series, Granularity::Monthly);
        months
            .windows(12)
            .map(|w| {
                let growth = w.iter().fold(1.0, |acc, b| acc * (1.0 + b.compounded()));
                (w[11].end, growth - 1.0)
            })
            .unzip()
    } else {
        bucket_periods(series, spec.granularity)
            .into_iter()
            .filter(|b| !b.values.is_empty())
            .map(|b| (b.end, b.compounded()))
            .unzip()
    };
    if values.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no complete {} windows in {}",
            spec.granularity.as_str(),
            series.label
        )));
    }
    ReturnSeries::new(series.label.clone(), dates, values)
}

/// How the numeric column of an input file is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    Prices,
    Returns,
}

/// Loads a two-column `date,value` CSV file. The label is the file stem.
pub fn load_returns_csv(path: impl AsRef<Path>, mode: InputMode) -> Result<ReturnSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    read_returns_csv(file, label, mode)
}

/// Parses `date,value` rows from any reader.
///
/// A first row whose fields do not parse is treated as a header.
pub fn read_returns_csv(reader: impl Read, label: impl Into<String>, mode: InputMode) -> Result<ReturnSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<(usize, NaiveDate, f64)> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(idx + 1),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(idx + 1);
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d");
        let value = record[1].parse::<f64>();
        if idx == 0 && value.is_err() {
            // header row
            continue;
        }
        match (date, value) {
            (Ok(d), Ok(v)) if v.is_finite() => rows.push((line, d, v)),
            (Ok(_), Ok(v)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("value {v} is not finite"),
                })
            }
            (Err(e), _) => {
                return Err(Error::Parse {
                    line,
                    message: format!("bad date {:?}: {e}", &record[0]),
                })
            }
            (_, Err(e)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("bad number {:?}: {e}", &record[1]),
                })
            }
        }
    }
    for w in rows.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::Ordering {
                line: w[1].0,
                date: w[1].1.to_string(),
                previous: w[0].1.to_string(),
            });
        }
    }
    let label = label.into();
    match mode {
        InputMode::Returns => {
            if let Some((line, _, v)) = rows.iter().find(|r| r.2 <= -1.0) {
                return Err(Error::domain(format!("line {line}: return {v} is not above -1")));
            }
            let (dates, values) = rows.into_iter().map(|(_, d, v)| (d, v)).unzip();
            ReturnSeries::new(label, dates, values)
        }
        InputMode::Prices => {
            if let Some((line, _, p)) = rows.iter().find(|r| r.2 <= 0.0) {
                return Err(Error::domain(format!("line {line}: price {p} is not positive")));
            }
            if rows.len() < 2 {
                return Err(Error::InsufficientData {
                    required: 2,
                    actual: rows.len(),
                });
            }
            let (dates, values) = rows.windows(2).map(|w| (w[1].1, w[1].2 / w[0].2 - 1.0)).unzip();
            ReturnSeries::new(label, dates, values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn five_atoms() -> EmpiricalDistribution {
        EmpiricalDistribution::from_samples(&[-0.10, -0.02, 0.01, 0.03, 0.05]).unwrap()
    }

    #[test]
    fn returns_mode_passes_values_through() {
        let s = read_returns_csv("2020-01-02,0.01\n".as_bytes(), "x", InputMode::Returns).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.values(), &[0.01]);
    }

    #[test]
    fn prices_mode_computes_simple_returns() {
        let csv = "date,price\n2020-01-01,100\n2020-01-02,102\n2020-01-03,96.9\n";
        let s = read_returns_csv(csv.as_bytes(), "p", InputMode::Prices).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.values()[0] - 0.02).abs() < 1e-15);
        assert!((s.values()[1] + 0.05).abs() < 1e-15);
        assert_eq!(s.dates()[0], d(2020, 1, 2));
    }

    #[test]
    fn negative_price_is_domain_error() {
        let csv = "2020-01-01,100\n2020-01-02,-5\n";
        let err = read_returns_csv(csv.as_bytes(), "p", InputMode::Prices).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let csv = "date,value\n2020-01-01,0.1\n2020-01-02,abc\n";
        match read_returns_csv(csv.as_bytes(), "x", InputMode::Returns) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_increasing_dates_rejected() {
        let csv = "2020-01-02,0.1\n2020-01-02,0.2\n";
        assert!(matches!(
            read_returns_csv(csv.as_bytes(), "x", InputMode::Returns),
            Err(Error::Ordering { line: 2, .. })
        ));
    }

    #[test]
    fn return_at_total_loss_rejected() {
        assert!(ReturnSeries::from_values("x", vec![0.1, -1.0]).is_err());
    }

    #[test]
    fn quantile_examples() {
        let dist = five_atoms();
        assert_eq!(dist.quantile(0.2).unwrap(), -0.10);
        assert_eq!(dist.quantile(1.0).unwrap(), 0.05);
        assert_eq!(dist.quantile(0.5).unwrap(), 0.01);
        assert!(dist.quantile(0.0).is_err());
        assert!(dist.quantile(1.5).is_err());
    }

    #[test]
    fn distribution_merges_equal_outcomes() {
        let dist = EmpiricalDistribution::new([(0.1, 0.25), (-0.1, 0.5), (0.1, 0.25)]).unwrap();
        assert_eq!(dist.len(), 2);
        assert_eq!(dist.atoms()[1].probability, 0.5);
        assert!(EmpiricalDistribution::new([(0.1, 0.5)]).is_err());
    }

    #[test]
    fn weekly_aggregation_compounds() {
        // Monday and Tuesday of the same ISO week.
        let s = ReturnSeries::new("w", vec![d(2024, 1, 1), d(2024, 1, 2)], vec![0.01, 0.01]).unwrap();
        let agg = aggregate_periods(&s, PeriodSpec::disjoint(Granularity::Weekly)).unwrap();
        assert_eq!(agg.len(), 1);
        assert!((agg.values()[0] - 0.0201).abs() < 1e-15);
    }

    #[test]
    fn zero_returns_aggregate_to_zero() {
        let s = ReturnSeries::from_values("z", vec![0.0; 60]).unwrap();
        for g in [Granularity::Weekly, Granularity::Monthly, Granularity::Yearly] {
            let agg = aggregate_periods(&s, PeriodSpec::disjoint(g)).unwrap();
            assert!(agg.values().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn overlapping_yearly_counts_windows() {
        let dates: Vec<NaiveDate> = (0..24).map(|i| d(2010 + i / 12, (i % 12) as u32 + 1, 28)).collect();
        let s = ReturnSeries::new("m", dates, vec![0.01; 24]).unwrap();
        let agg = aggregate_periods(&s, PeriodSpec::overlapping_yearly()).unwrap();
        assert_eq!(agg.len(), 13);
        assert!((agg.values()[0] - (1.01f64.powi(12) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn overlap_requires_yearly() {
        let s = ReturnSeries::from_values("m", vec![0.01; 10]).unwrap();
        let spec = PeriodSpec {
            granularity: Granularity::Monthly,
            overlap: true,
        };
        assert!(aggregate_periods(&s, spec).is_err());
    }

    #[test]
    fn too_short_for_a_year_is_empty_result() {
        let s = ReturnSeries::from_values("m", vec![0.01; 30]).unwrap();
        assert!(matches!(
            aggregate_periods(&s, PeriodSpec::overlapping_yearly()),
            Err(Error::EmptyResult(_))
        ));
    }

    #[test]
    fn business_days_skip_weekends() {
        let days = business_days(d(2024, 1, 5), 3);
        assert_eq!(days, vec![d(2024, 1, 5), d(2024, 1, 8), d(2024, 1, 9)]);
    }
}
