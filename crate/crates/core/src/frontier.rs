//! Random long-only portfolios, Pareto frontiers and optimal choices on them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::ReturnSeries;
use crate::risk::{risk_report, RiskReport};
use crate::roots::bisect_secant;
use crate::utility::{risk_neutral_amplitude, risk_neutral_point, utility_score, KtUtilityParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSample {
    pub weights: Vec<f64>,
    pub series: ReturnSeries,
    pub report: RiskReport,
}

/// Draws a weight vector uniformly from the simplex.
///
/// Every portfolio index gets its own ChaCha stream, so a sample does not
/// depend on how the work is split across threads.
pub fn simplex_weights(n_assets: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let draws: Vec<f64> = (0..n_assets).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.iter().map(|d| d / total).collect()
}

/// Portfolio returns `sum_i w_i r_i` on each date.
pub fn portfolio_series(assets: &[ReturnSeries], weights: &[f64], label: impl Into<String>) -> Result<ReturnSeries> {
    if assets.len() != weights.len() {
        return Err(Error::domain(format!(
            "{} weights for {} assets",
            weights.len(),
            assets.len()
        )));
    }
    let first = &assets[0];
    let values = (0..first.len())
        .map(|t| assets.iter().zip(weights).map(|(a, w)| w * a.values()[t]).sum())
        .collect();
    ReturnSeries::new(label, first.dates().to_vec(), values)
}

fn check_universe(assets: &[ReturnSeries]) -> Result<()> {
    if assets.len() < 2 {
        return Err(Error::domain(format!("need at least 2 assets, got {}", assets.len())));
    }
    let first = &assets[0];
    for a in &assets[1..] {
        if !a.aligned_with(first) {
            return Err(Error::Alignment(format!(
                "{} and {} have different dates",
                first.label(),
                a.label()
            )));
        }
    }
    Ok(())
}

/// `n` random long-only portfolios of `assets`, each with its risk report.
pub fn sample_portfolios(assets: &[ReturnSeries], n: usize, seed: u64) -> Result<Vec<PortfolioSample>> {
    check_universe(assets)?;
    if n == 0 {
        return Err(Error::domain("portfolio count must be positive"));
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let weights = simplex_weights(assets.len(), seed, i as u64);
            let series = portfolio_series(assets, &weights, format!("p{i}"))?;
            let report = risk_report(&series)?;
            Ok(PortfolioSample {
                weights,
                series,
                report,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontierSpace {
    /// Volatility on the risk axis; lower is safer.
    Sigma,
    /// EDR on the risk axis; higher is safer.
    Edr,
}

impl FrontierSpace {
    pub fn as_str(self) -> &'static str {
        match self {
            FrontierSpace::Sigma => "sigma",
            FrontierSpace::Edr => "edr",
        }
    }

    /// Risk as a cost: smaller is safer in both spaces.
    fn cost(self, risk_coord: f64) -> f64 {
        match self {
            FrontierSpace::Sigma => risk_coord,
            FrontierSpace::Edr => -risk_coord,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub space: FrontierSpace,
    pub risk_coord: f64,
    pub expected_return: f64,
    pub portfolio_index: usize,
}

impl FrontierPoint {
    pub fn from_sample(sample: &PortfolioSample, index: usize, space: FrontierSpace) -> Self {
        let risk_coord = match space {
            FrontierSpace::Sigma => sample.report.volatility,
            FrontierSpace::Edr => sample.report.edr,
        };
        Self {
            space,
            risk_coord,
            expected_return: sample.report.expected_return,
            portfolio_index: index,
        }
    }
}

/// Whether `a` dominates `b`: at least as safe and as rewarding, one strictly.
pub fn dominates(a: &FrontierPoint, b: &FrontierPoint) -> bool {
    let (ca, cb) = (a.space.cost(a.risk_coord), a.space.cost(b.risk_coord));
    ca <= cb && a.expected_return >= b.expected_return && (ca < cb || a.expected_return > b.expected_return)
}

/// Non-dominated subset of `points`, sorted by `risk_coord` ascending.
///
/// All points must share one space. Exact duplicates of a frontier point are
/// kept since neither dominates the other.
pub fn pareto_frontier(points: &[FrontierPoint]) -> Vec<FrontierPoint> {
    let Some(space) = points.first().map(|p| p.space) else {
        return Vec::new();
    };
    let mut order: Vec<&FrontierPoint> = points.iter().collect();
    order.sort_by(|a, b| {
        space
            .cost(a.risk_coord)
            .total_cmp(&space.cost(b.risk_coord))
            .then(b.expected_return.total_cmp(&a.expected_return))
            .then(a.portfolio_index.cmp(&b.portfolio_index))
    });
    let mut kept: Vec<FrontierPoint> = Vec::new();
    for p in order {
        match kept.last() {
            None => kept.push(*p),
            Some(last) => {
                let duplicate = last.risk_coord == p.risk_coord && last.expected_return == p.expected_return;
                if p.expected_return > last.expected_return || duplicate {
                    kept.push(*p);
                }
            }
        }
    }
    if space == FrontierSpace::Edr {
        kept.reverse();
        // restore index order among exact duplicates
        kept.sort_by(|a, b| {
            a.risk_coord
                .total_cmp(&b.risk_coord)
                .then(b.expected_return.total_cmp(&a.expected_return))
                .then(a.portfolio_index.cmp(&b.portfolio_index))
        });
    }
    kept
}

/// Pareto frontier of the sampled portfolios in `space`.
pub fn efficiency_frontier(samples: &[PortfolioSample], space: FrontierSpace) -> Vec<FrontierPoint> {
    let points: Vec<FrontierPoint> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| FrontierPoint::from_sample(s, i, space))
        .collect();
    pareto_frontier(&points)
}

/// Frontier point maximizing the mean-EDR utility; ties go to the higher EDR.
pub fn optimal_risk_averse(frontier: &[FrontierPoint], a: f64) -> Result<FrontierPoint> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("a = {a} must be positive")));
    }
    let mut best: Option<(f64, FrontierPoint)> = None;
    for p in frontier {
        let u = utility_score(a, p.expected_return, p.risk_coord)?;
        best = match best {
            Some((bu, bp)) if bu > u || (bu == u && bp.risk_coord >= p.risk_coord) => Some((bu, bp)),
            _ => Some((u, *p)),
        };
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::NoOptimum("empty frontier".into()))
}

/// Where the risk-neutral curve sits relative to the frontier when they do not cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The curve is above the frontier over its whole span.
    CurveAbove,
    /// The frontier is above the curve over its whole span.
    CurveBelow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSeekingChoice {
    pub point: FrontierPoint,
    /// `c1` of the crossing, when the curves cross.
    pub c1: Option<f64>,
    pub intersection_edr: Option<f64>,
    pub intersection_return: Option<f64>,
    pub boundary: Option<Boundary>,
}

/// Piecewise-linear `E(EDR)` through frontier points, flat beyond the ends.
struct FrontierCurve {
    knots: Vec<(f64, f64)>,
}

impl FrontierCurve {
    fn new(frontier: &[FrontierPoint]) -> Self {
        let mut knots: Vec<(f64, f64)> = frontier.iter().map(|p| (p.risk_coord, p.expected_return)).collect();
        knots.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        knots.dedup_by(|b, a| a.0 == b.0);
        Self { knots }
    }

    fn eval(&self, edr: f64) -> f64 {
        let k = &self.knots;
        if edr <= k[0].0 {
            return k[0].1;
        }
        if edr >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|p| p.0 <= edr);
        let (x0, y0) = k[i - 1];
        let (x1, y1) = k[i];
        y0 + (y1 - y0) * (edr - x0) / (x1 - x0)
    }
}

const CROSSING_TOL: f64 = 1e-12;

/// Frontier point chosen by a loss-averse investor after the prior loss in
/// `params`: where the risk-neutral curve meets the frontier in EDR space.
///
/// With coincident curves the crossing is taken at `c1 = x`. When the curves
/// do not cross, the maximum-return frontier point is returned (restricted to
/// the curve's EDR span if the frontier lies above it) with `boundary` set.
pub fn optimal_risk_seeking(frontier: &[FrontierPoint], params: &KtUtilityParams) -> Result<RiskSeekingChoice> {
    if frontier.is_empty() {
        return Err(Error::NoOptimum("empty frontier".into()));
    }
    let x = params.prior_loss();
    if !(x > 0.0) {
        return Err(Error::DegenerateReference(format!(
            "reference {} is not a loss; use the risk-averse optimum",
            params.reference
        )));
    }
    let base = risk_neutral_amplitude(params)?;
    let curve = FrontierCurve::new(frontier);
    let rnc = |c1: f64| -> Result<(f64, f64)> {
        let p = risk_neutral_point(params, &base, c1)?;
        Ok((p.edr_coordinate, p.expected_return))
    };
    let gap = |c1: f64| -> Result<f64> {
        let (edr, e) = rnc(c1)?;
        Ok(e - curve.eval(edr))
    };

    let max_e = |lo: f64, hi: f64| {
        frontier
            .iter()
            .filter(|p| p.risk_coord >= lo && p.risk_coord <= hi)
            .fold(None, |best: Option<FrontierPoint>, p| match best {
                Some(b)
                    if b.expected_return > p.expected_return
                        || (b.expected_return == p.expected_return && b.risk_coord >= p.risk_coord) =>
                {
                    Some(b)
                }
                _ => Some(*p),
            })
    };
    let boundary = |point: FrontierPoint, side| RiskSeekingChoice {
        point,
        c1: None,
        intersection_edr: None,
        intersection_return: None,
        boundary: Some(side),
    };

    let g_hi = gap(x)?;
    let c_star = if g_hi.abs() <= CROSSING_TOL {
        x
    } else if g_hi < 0.0 {
        let point = max_e(-base.amplitude, x)
            .or_else(|| max_e(f64::NEG_INFINITY, f64::INFINITY))
            .expect("non-empty frontier");
        return Ok(boundary(point, Boundary::CurveBelow));
    } else {
        let g_lo = gap(0.0)?;
        if g_lo > CROSSING_TOL {
            let point = max_e(f64::NEG_INFINITY, f64::INFINITY).expect("non-empty frontier");
            return Ok(boundary(point, Boundary::CurveAbove));
        }
        if g_lo >= 0.0 {
            0.0
        } else {
            // gap() can only fail outside [0, x]; the closure maps failures to NaN
            bisect_secant(|c| gap(c).unwrap_or(f64::NAN), 0.0, x, CROSSING_TOL)?
        }
    };

    let (edr, e) = rnc(c_star)?;
    let point = frontier
        .iter()
        .fold(None, |best: Option<(f64, FrontierPoint)>, p| {
            let d = (p.risk_coord - edr).hypot(p.expected_return - e);
            match best {
                Some((bd, bp)) if bd < d || (bd == d && bp.expected_return >= p.expected_return) => Some((bd, bp)),
                _ => Some((d, *p)),
            }
        })
        .map(|(_, p)| p)
        .expect("non-empty frontier");
    Ok(RiskSeekingChoice {
        point,
        c1: Some(c_star),
        intersection_edr: Some(edr),
        intersection_return: Some(e),
        boundary: None,
    })
}
