//! One function per subcommand, each returning the table it emits.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use edr_core::empirics::{self, Measure, Selection};
use edr_core::equilibrium::{self, AsAdSpec, InvestorView};
use edr_core::frontier::{self, FrontierPoint, FrontierSpace, PortfolioSample};
use edr_core::leverage::{self, LeverageSpec, PowerFrontierSpec};
use edr_core::risk::{risk_report_at, RiskReport};
use edr_core::stats::Tail;
use edr_core::utility::{self, IsoCase, KtUtilityParams, RiskNeutralCurve, RncState};
use edr_core::{
    aggregate_periods, beta_measures, empirical_quantile, gaussian_edr, load_returns_csv, synthetic, Granularity,
    InputMode, PeriodSpec, ReturnSeries,
};
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

/// Shared state for one invocation.
pub struct Context {
    pub seed: u64,
    pub data_dir: Option<PathBuf>,
}

impl Context {
    /// Relative paths resolve against the data directory when one is set.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        match &self.data_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    /// Files named directly plus the `*.csv` files of named directories,
    /// each directory listed in name order.
    fn expand(&self, inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
        let mut out = Vec::new();
        for p in inputs {
            let p = self.resolve(p);
            if p.is_dir() {
                let mut files: Vec<PathBuf> = fs::read_dir(&p)
                    .map_err(|e| CliError::io(&p, e))?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                    .collect();
                files.sort();
                if files.is_empty() {
                    return Err(CliError::params(format!("no .csv files in {}", p.display())));
                }
                out.extend(files);
            } else {
                out.push(p);
            }
        }
        Ok(out)
    }

    fn load(&self, path: &Path, mode: Mode) -> CliResult<ReturnSeries> {
        load_returns_csv(self.resolve(path), mode.into()).map_err(CliError::from)
    }

    fn load_all(&self, inputs: &[PathBuf], mode: Mode) -> CliResult<Vec<ReturnSeries>> {
        self.expand(inputs)?
            .iter()
            .map(|p| load_returns_csv(p, mode.into()).map_err(CliError::from))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Prices,
    Returns,
}

impl From<Mode> for InputMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Prices => InputMode::Prices,
            Mode::Returns => InputMode::Returns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Period {
    Weekly,
    Monthly,
    Yearly,
    OverlappingYearly,
}

impl From<Period> for PeriodSpec {
    fn from(p: Period) -> Self {
        match p {
            Period::Weekly => PeriodSpec::disjoint(Granularity::Weekly),
            Period::Monthly => PeriodSpec::disjoint(Granularity::Monthly),
            Period::Yearly => PeriodSpec::disjoint(Granularity::Yearly),
            Period::OverlappingYearly => PeriodSpec::overlapping_yearly(),
        }
    }
}

fn finite(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::params(format!("--{name} must be finite")))
    }
}

fn probability(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(CliError::params(format!("--{name} = {v} outside (0, 1]")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> CliResult<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::params(format!("--{name} must be at least {min}")))
    }
}

// ---------------------------------------------------------------- risk

#[derive(Debug, Args)]
pub struct RiskArgs {
    /// Return or price files, or directories of them.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Returns)]
    pub mode: Mode,
    /// Aggregate to this period before measuring.
    #[arg(long, value_enum)]
    pub period: Option<Period>,
    /// Tail probability for VaR and CVaR.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Extra empirical quantile columns.
    #[arg(long, value_delimiter = ',')]
    pub quantile: Vec<f64>,
    /// Market series for beta and downside beta columns.
    #[arg(long)]
    pub market: Option<PathBuf>,
}

pub fn risk(ctx: &Context, args: &RiskArgs) -> CliResult<Table> {
    if let Some(a) = args.alpha {
        probability("alpha", a)?;
    }
    for &q in &args.quantile {
        if !(0.0..=1.0).contains(&q) {
            return Err(CliError::params(format!("--quantile {q} outside [0, 1]")));
        }
    }
    let period = |s: ReturnSeries| -> CliResult<ReturnSeries> {
        match args.period {
            Some(p) => Ok(aggregate_periods(&s, p.into())?),
            None => Ok(s),
        }
    };
    let market = match &args.market {
        Some(m) => Some(period(ctx.load(m, args.mode)?)?),
        None => None,
    };

    let mut header: Vec<String> = RiskReport::CSV_HEADER.iter().map(|s| s.to_string()).collect();
    header.push("gaussian_edr".into());
    header.extend(args.quantile.iter().map(|q| format!("q{q}")));
    if market.is_some() {
        header.extend(["beta".to_string(), "downside_beta".to_string()]);
    }
    let mut table = Table::new(header);
    for series in ctx.load_all(&args.input, args.mode)? {
        let series = period(series)?;
        let rep = risk_report_at(&series, args.alpha)?;
        let mut row: Vec<Cell> = vec![
            rep.label.as_str().into(),
            rep.n.into(),
            rep.expected_return.into(),
            rep.volatility.into(),
            rep.semivariance.into(),
            rep.edr.into(),
            rep.prospect.into(),
            rep.alpha_below.into(),
            rep.var_at.map(|v| v.value).into(),
            rep.cvar_at.map(|v| v.value).into(),
        ];
        row.push(gaussian_edr(rep.expected_return, rep.volatility)?.into());
        let dist = series.distribution();
        for &q in &args.quantile {
            row.push(empirical_quantile(&dist, q)?.into());
        }
        if let Some(m) = &market {
            let b = beta_measures(&series, m)?;
            row.extend([b.beta.into(), b.downside_beta.into()]);
        }
        table.push(row);
    }
    Ok(table)
}

// ---------------------------------------------------------------- frontier

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Sigma,
    Edr,
}

impl From<Space> for FrontierSpace {
    fn from(s: Space) -> Self {
        match s {
            Space::Sigma => FrontierSpace::Sigma,
            Space::Edr => FrontierSpace::Edr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pick {
    /// Best mean-EDR utility for CARA `a`.
    Averse,
    /// Crossing with the risk-neutral curve after a prior loss.
    Seeking,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    /// Aligned asset files; a seeded three-asset universe when omitted.
    #[arg(long, short, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Returns)]
    pub mode: Mode,
    /// Number of random long-only portfolios.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Space::Edr)]
    pub space: Space,
    /// Observations in the synthetic universe.
    #[arg(long, default_value_t = 250)]
    pub synthetic_obs: usize,
    /// Emit every sampled portfolio instead of the frontier.
    #[arg(long)]
    pub all: bool,
    /// Emit a single chosen portfolio.
    #[arg(long, value_enum)]
    pub pick: Option<Pick>,
    /// CARA risk aversion for --pick.
    #[arg(long)]
    pub a: Option<f64>,
    /// Prior loss for --pick seeking.
    #[arg(long)]
    pub loss: Option<f64>,
    #[arg(long, default_value_t = utility::DEFAULT_LOSS_AVERSION)]
    pub lambda: f64,
}

fn weight_cells(sample: &PortfolioSample) -> impl Iterator<Item = Cell> + '_ {
    sample.weights.iter().map(|&w| Cell::Num(w))
}

pub fn frontier(ctx: &Context, args: &FrontierArgs) -> CliResult<Table> {
    at_least("n", args.n, 1)?;
    let assets = if args.input.is_empty() {
        at_least("synthetic-obs", args.synthetic_obs, 2)?;
        synthetic::three_asset_universe(args.synthetic_obs, ctx.seed)?
    } else {
        ctx.load_all(&args.input, args.mode)?
    };
    let space: FrontierSpace = args.space.into();
    let params = match args.pick {
        Some(_) if space != FrontierSpace::Edr => {
            return Err(CliError::params("--pick works on the EDR frontier; use --space edr"))
        }
        Some(Pick::Averse) => {
            let a = args.a.ok_or_else(|| CliError::params("--pick averse needs --a"))?;
            if !(a > 0.0 && a.is_finite()) {
                return Err(CliError::params(format!("--a = {a} must be positive")));
            }
            None
        }
        Some(Pick::Seeking) => {
            let a = args.a.ok_or_else(|| CliError::params("--pick seeking needs --a"))?;
            let loss = args
                .loss
                .ok_or_else(|| CliError::params("--pick seeking needs --loss"))?;
            if !(loss > 0.0 && loss.is_finite()) {
                return Err(CliError::params(format!("--loss = {loss} must be positive")));
            }
            Some(KtUtilityParams::new(a, args.lambda, -loss)?)
        }
        None => None,
    };

    let samples = frontier::sample_portfolios(&assets, args.n, ctx.seed)?;
    let labels: Vec<String> = assets.iter().map(|a| format!("w_{}", a.label())).collect();

    if let Some(pick) = args.pick {
        let front = frontier::efficiency_frontier(&samples, space);
        let mut header: Vec<String> = [
            "choice",
            "portfolio_index",
            "edr",
            "expected_return",
            "c1",
            "intersection_edr",
            "intersection_return",
            "boundary",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(labels);
        let mut table = Table::new(header);
        let (point, extra): (FrontierPoint, [Cell; 4]) = match (pick, params) {
            (Pick::Averse, _) => {
                let a = args.a.unwrap_or_default();
                (
                    frontier::optimal_risk_averse(&front, a)?,
                    [Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty],
                )
            }
            (Pick::Seeking, Some(p)) => {
                let c = frontier::optimal_risk_seeking(&front, &p)?;
                let boundary = c.boundary.map(|b| match b {
                    frontier::Boundary::CurveAbove => "curve_above",
                    frontier::Boundary::CurveBelow => "curve_below",
                });
                (
                    c.point,
                    [
                        c.c1.into(),
                        c.intersection_edr.into(),
                        c.intersection_return.into(),
                        boundary.into(),
                    ],
                )
            }
            (Pick::Seeking, None) => unreachable!("parameters validated above"),
        };
        let choice = match pick {
            Pick::Averse => "risk_averse",
            Pick::Seeking => "risk_seeking",
        };
        let mut row = vec![
            choice.into(),
            point.portfolio_index.into(),
            point.risk_coord.into(),
            point.expected_return.into(),
        ];
        row.extend(extra);
        row.extend(weight_cells(&samples[point.portfolio_index]));
        table.push(row);
        return Ok(table);
    }

    let mut header: Vec<String> = ["space", "risk_coord", "expected_return", "portfolio_index"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(labels);
    let mut table = Table::new(header);
    let points: Vec<FrontierPoint> = if args.all {
        samples
            .iter()
            .enumerate()
            .map(|(i, s)| FrontierPoint::from_sample(s, i, space))
            .collect()
    } else {
        frontier::efficiency_frontier(&samples, space)
    };
    for p in points {
        let mut row = vec![
            p.space.as_str().into(),
            p.risk_coord.into(),
            p.expected_return.into(),
            p.portfolio_index.into(),
        ];
        row.extend(weight_cells(&samples[p.portfolio_index]));
        table.push(row);
    }
    Ok(table)
}

// ---------------------------------------------------------------- rnc

#[derive(Debug, Args)]
pub struct RncArgs {
    /// CARA risk aversion.
    #[arg(long)]
    pub a: f64,
    /// Prior loss, e.g. 0.05.
    #[arg(long)]
    pub loss: f64,
    #[arg(long, default_value_t = utility::DEFAULT_LOSS_AVERSION)]
    pub lambda: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Emit the value function on this many points instead of the curve.
    #[arg(long)]
    pub value_grid: Option<usize>,
    /// Half-width of the value-function grid around zero.
    #[arg(long, default_value_t = 0.25)]
    pub value_range: f64,
}

pub fn rnc(args: &RncArgs) -> CliResult<Table> {
    if !(args.loss > 0.0 && args.loss.is_finite()) {
        return Err(CliError::params(format!("--loss = {} must be positive", args.loss)));
    }
    let params = KtUtilityParams::new(args.a, args.lambda, -args.loss)?;

    if let Some(n) = args.value_grid {
        at_least("value-grid", n, 2)?;
        let r = finite("value-range", args.value_range)?;
        if r <= 0.0 {
            return Err(CliError::params("--value-range must be positive"));
        }
        let mut table = Table::new(["w", "value"]);
        for i in 0..n {
            let w = -r + 2.0 * r * i as f64 / (n - 1) as f64;
            table.push(vec![w.into(), utility::kt_value(&params, w).into()]);
        }
        return Ok(table);
    }

    at_least("points", args.points, 2)?;
    let curve = utility::trace_risk_neutral_curve(&params, args.points)?;
    if let Some(gap) = curve.gaps.first() {
        return Err(
            CliError::new(crate::error::EXIT_COMPUTE, "curve_gap", gap.message.clone())
                .with("c1", gap.c1)
                .with("gaps", curve.gaps.len()),
        );
    }
    let mut header: Vec<&str> = RiskNeutralCurve::CSV_HEADER.to_vec();
    header.push("slope");
    let mut table = Table::new(header);
    for p in &curve.points {
        let state = RncState {
            c: curve.x,
            d: curve.y,
            x: p.expected_return,
            y: p.c2,
        };
        table.push(vec![
            p.expected_return.into(),
            p.c2.into(),
            p.amplitude.into(),
            p.variance.into(),
            p.edr_coordinate.into(),
            p.prospect_coordinate.into(),
            utility::rnc_slope(&params, state).ok().into(),
        ]);
    }
    Ok(table)
}

// ---------------------------------------------------------------- isoutil

#[derive(Debug, Args)]
pub struct IsoArgs {
    /// CARA risk aversion values.
    #[arg(long, required = true, value_delimiter = ',')]
    pub a: Vec<f64>,
    /// Expected returns.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub e: Vec<f64>,
    /// EDR values.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub edr: Vec<f64>,
}

pub fn isoutil(args: &IsoArgs) -> CliResult<Table> {
    let mut table = Table::new([
        "a",
        "e",
        "edr",
        "case",
        "slope",
        "curvature",
        "curvature_exact",
        "utility",
    ]);
    for &a in &args.a {
        for &e in &args.e {
            for &edr in &args.edr {
                finite("e", e)?;
                finite("edr", edr)?;
                let case = utility::iso_case(a, e, edr)?;
                let (slope, curv, exact) = if case == IsoCase::Singular {
                    (None, None, None)
                } else {
                    (
                        Some(utility::iso_utility_slope(a, e, edr)?.slope),
                        Some(utility::iso_utility_curvature(a, e, edr)?),
                        Some(utility::iso_utility_curvature_exact(a, e, edr)?),
                    )
                };
                table.push(vec![
                    a.into(),
                    e.into(),
                    edr.into(),
                    case.as_str().into(),
                    slope.into(),
                    curv.into(),
                    exact.into(),
                    utility::utility_score(a, e, edr)?.into(),
                ]);
            }
        }
    }
    Ok(table)
}

// ---------------------------------------------------------------- calibrate

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Survival fractions; the standard grid when omitted.
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
    /// Expected returns; 1% to 20% when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub e: Vec<f64>,
}

pub fn calibrate(args: &CalibrateArgs) -> CliResult<Table> {
    let xs = if args.x.is_empty() {
        utility::CALIBRATION_X.to_vec()
    } else {
        args.x.clone()
    };
    let es = if args.e.is_empty() {
        utility::calibration_returns()
    } else {
        args.e.clone()
    };
    for &e in &es {
        finite("e", e)?;
    }
    let rows = utility::calibration_table(&xs, &es)?.csv_rows();
    let mut it = rows.into_iter();
    let mut table = Table::new(it.next().unwrap_or_default());
    for row in it {
        let mut cells = row.into_iter();
        let mut out = vec![Cell::Text(cells.next().unwrap_or_default())];
        out.extend(cells.map(Cell::Decimal));
        table.push(out);
    }
    Ok(table)
}

// ---------------------------------------------------------------- leverage

#[derive(Debug, Args)]
pub struct LeverageArgs {
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Returns)]
    pub mode: Mode,
    #[arg(long, value_enum)]
    pub period: Option<Period>,
    /// Borrowed amount per unit of equity.
    #[arg(long)]
    pub x_lev: f64,
    /// Financing rate on the borrowed amount.
    #[arg(long, default_value_t = 0.0)]
    pub rc: f64,
    /// Margin fraction kept at liquidation.
    #[arg(long)]
    pub m: f64,
}

pub fn leverage(ctx: &Context, args: &LeverageArgs) -> CliResult<Table> {
    let spec = LeverageSpec::new(args.x_lev, args.rc, args.m)?;
    let mut table = Table::new([
        "label",
        "e_lev",
        "plain_leverage_term",
        "financing_cost",
        "tail_probability",
        "tail_cvar",
        "floor",
        "truncation_gain",
        "gap_vs_first",
    ]);
    let mut first = None;
    for s in ctx.load_all(&args.input, args.mode)? {
        let s = match args.period {
            Some(p) => aggregate_periods(&s, p.into())?,
            None => s,
        };
        let dist = s.distribution();
        let b = leverage::leveraged_expected_return(&dist, &spec);
        let gap = first.as_ref().map(|f| leverage::dominance_gap(f, &dist, &spec));
        table.push(vec![
            s.label().into(),
            b.e_lev.into(),
            b.plain_leverage_term.into(),
            b.financing_cost.into(),
            b.tail_probability.into(),
            b.tail_cvar.into(),
            b.floor.into(),
            b.truncation_gain.into(),
            gap.into(),
        ]);
        first.get_or_insert(dist);
    }
    Ok(table)
}

// ---------------------------------------------------------------- power-frontier

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Exponent of the frontier, in (0, 1).
    #[arg(long)]
    pub alpha_exp: f64,
    /// Volatility shift.
    #[arg(long)]
    pub beta: f64,
    /// Level of the frontier.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub leverage: f64,
}

pub fn power_frontier(args: &PowerArgs) -> CliResult<Table> {
    let spec = PowerFrontierSpec::new(args.alpha_exp, args.beta, args.gamma, args.a, args.leverage)?;
    let o = leverage::power_frontier_optimum(&spec)?;
    let mut table = Table::new([
        "alpha_exp",
        "beta",
        "gamma",
        "a",
        "leverage",
        "sigma_opt",
        "expected_return_opt",
        "sigma_lev_literal",
        "sigma_lev_fixedpoint",
    ]);
    table.push(vec![
        spec.alpha_exp.into(),
        spec.beta_shift.into(),
        spec.gamma_level.into(),
        spec.a.into(),
        spec.leverage.into(),
        o.sigma_opt.into(),
        spec.expected_return(o.sigma_opt).into(),
        o.sigma_lev_literal.into(),
        o.sigma_lev_fixedpoint.into(),
    ]);
    Ok(table)
}

// ---------------------------------------------------------------- aggregate

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// CSV with columns invested_value,required_return.
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Deserialize)]
struct ViewRow {
    invested_value: f64,
    required_return: f64,
}

pub fn aggregate(ctx: &Context, args: &AggregateArgs) -> CliResult<Table> {
    let path = ctx.resolve(&args.input);
    let file = fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut views = Vec::new();
    for (i, row) in rdr.deserialize::<ViewRow>().enumerate() {
        let row = row.map_err(|e| {
            CliError::new(crate::error::EXIT_DATA, "parse", e.to_string())
                .with("path", path.display().to_string())
                .with("line", i + 2)
        })?;
        views.push(InvestorView {
            invested_value: row.invested_value,
            required_return: row.required_return,
        });
    }
    let r = equilibrium::aggregate_required_return(&views)?;
    let total: f64 = views.iter().map(|v| v.invested_value).sum();
    let mut table = Table::new(["n", "total_invested", "required_return"]);
    table.push(vec![views.len().into(), total.into(), r.into()]);
    Ok(table)
}

// ---------------------------------------------------------------- asad

#[derive(Debug, Args)]
pub struct AsadArgs {
    /// Growth rate of both curves per unit time.
    #[arg(long, default_value_t = 0.03, allow_hyphen_values = true)]
    pub growth: f64,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub supply_slope: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub supply_intercept: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub demand_slope: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub demand_intercept: f64,
}

pub fn asad(args: &AsadArgs) -> CliResult<Table> {
    let spec = AsAdSpec {
        supply_slope: finite("supply-slope", args.supply_slope)?,
        supply_intercept: finite("supply-intercept", args.supply_intercept)?,
        demand_slope: finite("demand-slope", args.demand_slope)?,
        demand_intercept: finite("demand-intercept", args.demand_intercept)?,
        growth_rate: finite("growth", args.growth)?,
        horizon: args.horizon,
        steps: at_least("steps", args.steps, 1)?,
    };
    let mut table = Table::new(["t", "Q", "P"]);
    for pt in equilibrium::as_ad_price_path(&spec)? {
        table.push(vec![pt.t.into(), pt.q.into(), pt.p.into()]);
    }
    Ok(table)
}

// ---------------------------------------------------------------- empirics

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Two,
    Lower,
    Upper,
}

impl From<TailArg> for Tail {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Two => Tail::Two,
            TailArg::Lower => Tail::Lower,
            TailArg::Upper => Tail::Upper,
        }
    }
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Daily index prices or returns.
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Prices)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = TailArg::Two)]
    pub tail: TailArg,
}

pub fn empirics_table1(ctx: &Context, args: &Table1Args) -> CliResult<Table> {
    let daily = ctx.load(&args.input, args.mode)?;
    let mut table = Table::new([
        "label",
        "event",
        "trend",
        "granularity",
        "mean_vol_change",
        "p_value",
        "n_events",
    ]);
    for r in empirics::event_study_table(&daily, args.tail.into())? {
        let trend = match r.trend {
            empirics::Trend::Up => "up",
            empirics::Trend::Down => "down",
            empirics::Trend::All => "all",
        };
        table.push(vec![
            r.label.as_str().into(),
            r.event.as_str().into(),
            trend.into(),
            r.granularity.as_str().into(),
            r.mean_vol_change.into(),
            r.p_value.into(),
            r.n_events.into(),
        ]);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompanionKind {
    /// Index levels; converted to log changes.
    Levels,
    /// Changes used as given.
    Changes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectionArg {
    Cumulative,
    Bucket,
}

#[derive(Debug, Args)]
pub struct VixArgs {
    /// Daily index prices or returns.
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Prices)]
    pub index_mode: Mode,
    /// Companion series, e.g. a volatility index.
    #[arg(long)]
    pub companion: PathBuf,
    #[arg(long, value_enum, default_value_t = CompanionKind::Levels)]
    pub companion_kind: CompanionKind,
    /// Strictly increasing probability grid; 0.05 to 1 by 0.05 when omitted.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SelectionArg::Cumulative)]
    pub selection: SelectionArg,
    #[arg(long, value_enum, default_value_t = TailArg::Two)]
    pub tail: TailArg,
}

pub fn empirics_vixcurve(ctx: &Context, args: &VixArgs) -> CliResult<Table> {
    let index = ctx.load(&args.index, args.index_mode)?;
    let companion = match args.companion_kind {
        CompanionKind::Changes => ctx.load(&args.companion, Mode::Returns)?,
        CompanionKind::Levels => {
            let path = ctx.resolve(&args.companion);
            let levels = read_levels(&path)?;
            empirics::log_changes(levels.label(), levels.dates(), levels.values())?
        }
    };
    let alphas = if args.alphas.is_empty() {
        (1..=20).map(|i| i as f64 / 20.0).collect()
    } else {
        args.alphas.clone()
    };
    let selection = match args.selection {
        SelectionArg::Cumulative => Selection::Cumulative,
        SelectionArg::Bucket => Selection::Bucket,
    };
    let mut table = Table::new(["alpha", "threshold", "n_selected", "mean", "p_value"]);
    let tail: Tail = args.tail.into();
    for p in empirics::quantile_ttest_curve(&index, &companion, &alphas, selection)? {
        let p_value = match (tail, p.mean, p.p_value) {
            (Tail::Two, _, pv) => pv,
            (t, Some(m), Some(pv)) => Some(one_sided(t, m, pv)),
            _ => None,
        };
        table.push(vec![
            p.alpha.into(),
            p.threshold.into(),
            p.n_selected.into(),
            p.mean.into(),
            p_value.into(),
        ]);
    }
    Ok(table)
}

/// One-sided p-value from a two-sided one and the sign of the mean.
fn one_sided(tail: Tail, mean: f64, two_sided: f64) -> f64 {
    let agrees = match tail {
        Tail::Upper => mean > 0.0,
        Tail::Lower => mean < 0.0,
        Tail::Two => return two_sided,
    };
    if agrees {
        two_sided / 2.0
    } else {
        1.0 - two_sided / 2.0
    }
}

/// Levels as a raw series: the returns loader with no transformation.
fn read_levels(path: &Path) -> CliResult<ReturnSeries> {
    let s = load_returns_csv(path, InputMode::Returns)?;
    if let Some(v) = s.values().iter().find(|v| **v <= 0.0) {
        return Err(
            CliError::new(crate::error::EXIT_DATA, "domain", format!("level {v} is not positive"))
                .with("path", path.display().to_string()),
        );
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    All,
    Volatility,
    Semivariance,
    Beta,
    DownsideBeta,
    Edr,
}

#[derive(Debug, Args)]
pub struct CrossSectionArgs {
    /// Asset files or directories of them.
    #[arg(long, short, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub market: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Returns)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = MeasureArg::All)]
    pub measure: MeasureArg,
}

pub fn empirics_crosssection(ctx: &Context, args: &CrossSectionArgs) -> CliResult<Table> {
    let market_path = ctx.resolve(&args.market);
    let files: Vec<PathBuf> = ctx
        .expand(&args.input)?
        .into_iter()
        .filter(|p| *p != market_path)
        .collect();
    let assets = files
        .iter()
        .map(|p| load_returns_csv(p, args.mode.into()).map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    let market = load_returns_csv(&market_path, args.mode.into())?;
    let measures: Vec<Measure> = match args.measure {
        MeasureArg::All => Measure::ALL.to_vec(),
        MeasureArg::Volatility => vec![Measure::Volatility],
        MeasureArg::Semivariance => vec![Measure::Semivariance],
        MeasureArg::Beta => vec![Measure::Beta],
        MeasureArg::DownsideBeta => vec![Measure::DownsideBeta],
        MeasureArg::Edr => vec![Measure::Edr],
    };
    let mut table = Table::new([
        "measure",
        "coefficient",
        "p_value",
        "r_squared",
        "intercept",
        "std_error",
        "t_stat",
        "n",
        "excluded",
    ]);
    for m in measures {
        let r = empirics::cross_section_regression(&assets, &market, m)?;
        let g = r.regression;
        table.push(vec![
            m.as_str().into(),
            g.coefficient.into(),
            g.coef_p_value.into(),
            g.r_squared.into(),
            g.intercept.into(),
            g.std_error.into(),
            g.t_stat.into(),
            g.n.into(),
            r.excluded.join(";").into(),
        ]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_follows_the_sign() {
        assert_eq!(one_sided(Tail::Upper, 0.3, 0.04), 0.02);
        assert_eq!(one_sided(Tail::Lower, 0.3, 0.04), 0.98);
        assert_eq!(one_sided(Tail::Two, 0.3, 0.04), 0.04);
    }

    #[test]
    fn relative_paths_use_data_dir() {
        let ctx = Context {
            seed: 1,
            data_dir: Some(PathBuf::from("/data")),
        };
        assert_eq!(ctx.resolve(Path::new("a.csv")), PathBuf::from("/data/a.csv"));
        assert_eq!(ctx.resolve(Path::new("/x/a.csv")), PathBuf::from("/x/a.csv"));
    }
}
