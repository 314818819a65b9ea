//! Loss-averse exponential value function and the solvers built on it.
//!
//! The value function is CARA on gains, `1 - exp(-a w)`, and the mirrored
//! curve scaled by the loss-aversion multiplier on losses. After a prior loss
//! `x` an investor stays risk seeking on fair two-outcome gambles until the
//! utility gained on the upside equals the utility lost on the downside:
//!
//! ```text
//! U(y) - U(-x) = U(-x) - U(-2x - y)
//! ```
//!
//! The gain leg `y` of that gamble is the risk-neutral amplitude; repeating
//! the construction for a gamble with expected return `c1` in `[0, x]` traces
//! the risk-neutral curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{bisect_secant, expand_upper};

pub const DEFAULT_LOSS_AVERSION: f64 = 2.25;

/// Squared normal downside coefficient used by the EDR utility pipeline.
///
/// The utility, slope and curvature formulas carry the rounded `0.8`; the
/// exact `sqrt(2/pi)` only appears in [`crate::risk::gaussian_edr`].
pub const EDR_SIGMA_COEFFICIENT_SQ: f64 = 0.64;

/// Absolute tolerance on roots of the risk-neutral equations.
const ROOT_TOL: f64 = 1e-13;
const BRACKET_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KtUtilityParams {
    /// Constant absolute risk aversion.
    pub a: f64,
    /// Loss-aversion multiplier.
    pub lambda: f64,
    /// Reference-point return, e.g. `-0.05` after a 5% loss.
    pub reference: f64,
}

impl KtUtilityParams {
    pub fn new(a: f64, lambda: f64, reference: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!("risk aversion a = {a} must be positive")));
        }
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("loss aversion {lambda} must be at least 1")));
        }
        if !reference.is_finite() {
            return Err(Error::domain("reference must be finite"));
        }
        Ok(Self { a, lambda, reference })
    }

    /// Default loss aversion with the reference point at `-prior_loss`.
    pub fn after_loss(a: f64, prior_loss: f64) -> Result<Self> {
        Self::new(a, DEFAULT_LOSS_AVERSION, -prior_loss)
    }

    /// The prior loss `x = -reference`.
    pub fn prior_loss(&self) -> f64 {
        -self.reference
    }

    fn gain_utility(&self, w: f64) -> f64 {
        -(-self.a * w).exp_m1()
    }
}

/// Value function: `1 - e^{-aw}` for gains, `-lambda (1 - e^{aw})` for losses.
pub fn kt_value(params: &KtUtilityParams, w: f64) -> f64 {
    if w >= 0.0 {
        params.gain_utility(w)
    } else {
        -params.lambda * params.gain_utility(-w)
    }
}

/// Residual of the indifference condition for a fair gamble around `-u`
/// whose gain leg ends at `v`: `U(v) - 2U(-u) + U(-2u - v)`.
fn indifference_residual(params: &KtUtilityParams, u: f64, v: f64) -> f64 {
    kt_value(params, v) - 2.0 * kt_value(params, -u) + kt_value(params, -2.0 * u - v)
}

/// Solves the indifference condition for the gain leg `v >= 0` given the
/// remaining loss `u >= 0`.
fn gain_leg(params: &KtUtilityParams, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let f = |v: f64| indifference_residual(params, u, v);
    let hi = expand_upper(f, 0.0, 10.0, BRACKET_LIMIT).map_err(|_| {
        Error::NoRealSolution(format!(
            "a = {}, lambda = {}, loss = {u}: utility gains never offset the loss",
            params.a, params.lambda
        ))
    })?;
    bisect_secant(f, 0.0, hi, ROOT_TOL)
}

/// Fair gamble at which a loss-averse investor becomes risk neutral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralAmplitude {
    /// Prior loss.
    pub x: f64,
    /// Gain leg beyond break-even.
    pub y: f64,
    /// Half-spread `x + y` of the gamble around the reference point.
    pub amplitude: f64,
}

/// Solves `U(y) = -2 lambda U(x) + lambda U(2x + y)` for `y`.
pub fn risk_neutral_amplitude(params: &KtUtilityParams) -> Result<RiskNeutralAmplitude> {
    let x = params.prior_loss();
    if x < 0.0 {
        return Err(Error::domain(format!(
            "reference {} is a gain; the amplitude needs a prior loss",
            params.reference
        )));
    }
    let y = gain_leg(params, x)?;
    Ok(RiskNeutralAmplitude { x, y, amplitude: x + y })
}

/// One point of the risk-neutral curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralPoint {
    /// `c1`, the gamble's expected return.
    pub expected_return: f64,
    /// `c2`, the reduction of the gain leg.
    pub c2: f64,
    /// `x + y - c1 - c2`.
    pub amplitude: f64,
    pub variance: f64,
    /// EDR of the gamble paying `c1 +/- amplitude` with equal probability.
    pub edr_coordinate: f64,
    /// Prospect of the same gamble.
    pub prospect_coordinate: f64,
}

impl RiskNeutralPoint {
    fn new(x: f64, y: f64, c1: f64, c2: f64) -> Self {
        let amplitude = (x - c1) + (y - c2);
        let prospect = c1 + amplitude;
        // Inverting E = a EDR + (1 - a) Pr at a = 0.5.
        let edr = (c1 - 0.5 * prospect) / 0.5;
        Self {
            expected_return: c1,
            c2,
            amplitude,
            variance: amplitude * amplitude,
            edr_coordinate: edr,
            prospect_coordinate: prospect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGap {
    pub index: usize,
    pub c1: f64,
    pub message: String,
}

/// A traced risk-neutral curve from `c1 = 0` to `c1 = x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskNeutralCurve {
    pub params: KtUtilityParams,
    pub x: f64,
    pub y: f64,
    pub points: Vec<RiskNeutralPoint>,
    pub gaps: Vec<CurveGap>,
}

impl RiskNeutralCurve {
    pub const CSV_HEADER: [&'static str; 6] = ["c1", "c2", "amplitude", "variance", "edr", "prospect"];
}

/// Residual of `U(y - c2) = lambda U(2x - 2c1 + y - c2) - 2 lambda U(x - c1)`.
pub fn risk_neutral_residual(params: &KtUtilityParams, x: f64, y: f64, c1: f64, c2: f64) -> f64 {
    let l = params.lambda;
    let u = |w: f64| params.gain_utility(w);
    u(y - c2) - l * u(2.0 * x - 2.0 * c1 + y - c2) + 2.0 * l * u(x - c1)
}

/// The risk-neutral point for expected return `c1` in `[0, x]`.
pub fn risk_neutral_point(params: &KtUtilityParams, base: &RiskNeutralAmplitude, c1: f64) -> Result<RiskNeutralPoint> {
    let (x, y) = (base.x, base.y);
    if !(0.0..=x).contains(&c1) {
        return Err(Error::domain(format!("c1 = {c1} outside [0, {x}]")));
    }
    let c2 = if c1 == 0.0 {
        0.0
    } else if c1 == x {
        y
    } else {
        // Same indifference equation with the remaining loss x - c1.
        y - gain_leg(params, x - c1)?
    };
    Ok(RiskNeutralPoint::new(x, y, c1, c2))
}

/// Traces the curve on `n_points` evenly spaced values of `c1` in `[0, x]`.
pub fn trace_risk_neutral_curve(params: &KtUtilityParams, n_points: usize) -> Result<RiskNeutralCurve> {
    if n_points < 2 {
        return Err(Error::domain("a curve needs at least two points"));
    }
    let base = risk_neutral_amplitude(params)?;
    let x = base.x;
    let step = x / (n_points - 1) as f64;
    let results: Vec<(usize, f64, Result<RiskNeutralPoint>)> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let c1 = if i == n_points - 1 { x } else { i as f64 * step };
            (i, c1, risk_neutral_point(params, &base, c1))
        })
        .collect();
    let mut points = Vec::with_capacity(n_points);
    let mut gaps = Vec::new();
    for (index, c1, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => gaps.push(CurveGap {
                index,
                c1,
                message: e.to_string(),
            }),
        }
    }
    Ok(RiskNeutralCurve {
        params: *params,
        x,
        y: base.y,
        points,
        gaps,
    })
}

/// State `(c, d, x, y)` of the implicit curve: `c`, `d` are the prior loss
/// and its gain leg, `x`, `y` the current `c1`, `c2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RncState {
    pub c: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
}

/// `dy/dx` along the risk-neutral curve by implicit differentiation:
///
/// ```text
///         2L e^{-a(2c+d-2x-y)} - 2L e^{-a(c-x)}
/// dy/dx = -------------------------------------
///          e^{-a(d-y)} - L e^{-a(2c+d-2x-y)}
/// ```
pub fn rnc_slope(params: &KtUtilityParams, s: RncState) -> Result<f64> {
    let (a, l) = (params.a, params.lambda);
    let both = (-a * (2.0 * s.c + s.d - 2.0 * s.x - s.y)).exp();
    let loss = (-a * (s.c - s.x)).exp();
    let gain = (-a * (s.d - s.y)).exp();
    let den = gain - l * both;
    if den.abs() < 1e-14 {
        return Err(Error::SingularSlope(format!("denominator {den} vanishes")));
    }
    Ok((2.0 * l * both - 2.0 * l * loss) / den)
}

/// Regime of the iso-utility curve in EDR/E(r) space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsoCase {
    /// `k > 1`: slope above one.
    Steep,
    /// `k = 1`: no finite slope.
    Singular,
    /// `k < 1`: negative slope.
    Normal,
}

impl IsoCase {
    pub fn as_str(self) -> &'static str {
        match self {
            IsoCase::Steep => "steep",
            IsoCase::Singular => "singular",
            IsoCase::Normal => "normal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoSlope {
    pub k: f64,
    pub slope: f64,
    pub case: IsoCase,
}

fn iso_k(a: f64, e: f64, edr: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("a = {a} must be positive")));
    }
    if e < edr {
        return Err(Error::domain(format!("expected return {e} below EDR {edr}")));
    }
    Ok(a / EDR_SIGMA_COEFFICIENT_SQ * (e - edr))
}

/// Classifies `(a, E, EDR)` by `k = (a / 0.64)(E - EDR)`.
pub fn iso_case(a: f64, e: f64, edr: f64) -> Result<IsoCase> {
    let k = iso_k(a, e, edr)?;
    Ok(if (k - 1.0).abs() <= 1e-12 {
        IsoCase::Singular
    } else if k > 1.0 {
        IsoCase::Steep
    } else {
        IsoCase::Normal
    })
}

/// Slope `dE/dEDR = -k / (1 - k)` of the iso-utility curve through `(EDR, E)`.
pub fn iso_utility_slope(a: f64, e: f64, edr: f64) -> Result<IsoSlope> {
    let k = iso_k(a, e, edr)?;
    let case = iso_case(a, e, edr)?;
    if case == IsoCase::Singular {
        return Err(Error::SingularSlope(format!(
            "k = {k} at a = {a}, E = {e}, EDR = {edr}"
        )));
    }
    Ok(IsoSlope {
        k,
        slope: -k / (1.0 - k),
        case,
    })
}

/// Second derivative as stated for the EDR pipeline: `(a/0.64) / (1 - k)^2`.
///
/// Differentiating the iso-utility curve directly gives
/// [`iso_utility_curvature_exact`]; both are positive whenever `k < 1`.
pub fn iso_utility_curvature(a: f64, e: f64, edr: f64) -> Result<f64> {
    let k = iso_k(a, e, edr)?;
    if (k - 1.0).abs() <= 1e-12 {
        return Err(Error::SingularSlope(format!("k = {k}")));
    }
    Ok(a / EDR_SIGMA_COEFFICIENT_SQ / ((1.0 - k) * (1.0 - k)))
}

/// `d2E/dEDR2` along a constant-utility path: `(a/0.64) / (1 - k)^3`.
pub fn iso_utility_curvature_exact(a: f64, e: f64, edr: f64) -> Result<f64> {
    let k = iso_k(a, e, edr)?;
    if (k - 1.0).abs() <= 1e-12 {
        return Err(Error::SingularSlope(format!("k = {k}")));
    }
    Ok(a / EDR_SIGMA_COEFFICIENT_SQ / (1.0 - k).powi(3))
}

/// Mean-EDR utility `E - (0.5 / 0.64) a (E - EDR)^2`.
pub fn utility_score(a: f64, e: f64, edr: f64) -> Result<f64> {
    if e < edr {
        return Err(Error::domain(format!("expected return {e} below EDR {edr}")));
    }
    Ok(e - 0.5 / EDR_SIGMA_COEFFICIENT_SQ * a * (e - edr) * (e - edr))
}

/// Risk aversion implied by indifference between losing `(1 - x) E` and
/// gaining `E`: `a = ln(1.25 / (e^{-E} (e^{1-x} - 1)))`.
pub fn calibrate_risk_aversion(x: f64, e: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("survival fraction {x} outside (0, 1)")));
    }
    let a = (1.25f64).ln() + e - (1.0 - x).exp_m1().ln();
    if !(a > 0.0) {
        return Err(Error::CalibrationOutOfRange { value: a });
    }
    Ok(a)
}

/// Survival fractions of the standard calibration grid.
pub const CALIBRATION_X: [f64; 6] = [0.5, 0.667, 0.8, 0.9, 0.92, 0.95];

/// Expected returns 1%..20% of the standard calibration grid.
pub fn calibration_returns() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub x_values: Vec<f64>,
    pub returns: Vec<f64>,
    /// `cells[row][col]` for `returns[row]`, `x_values[col]`.
    pub cells: Vec<Vec<f64>>,
}

pub fn calibration_table(x_values: &[f64], returns: &[f64]) -> Result<CalibrationTable> {
    let cells = returns
        .iter()
        .map(|&e| {
            x_values
                .iter()
                .map(|&x| calibrate_risk_aversion(x, e))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CalibrationTable {
        x_values: x_values.to_vec(),
        returns: returns.to_vec(),
        cells,
    })
}

impl CalibrationTable {
    /// Rows laid out as `x/E(r),50%,66.70%,...` then `1%,0.665896,...`.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut header = vec!["x/E(r)".to_string()];
        header.extend(self.x_values.iter().map(|&x| percent_label(x)));
        let mut rows = vec![header];
        for (e, cells) in self.returns.iter().zip(&self.cells) {
            let mut row = vec![percent_label(*e)];
            row.extend(cells.iter().map(|v| trim_fixed(*v, 6)));
            rows.push(row);
        }
        rows
    }
}

fn percent_label(v: f64) -> String {
    let pct = v * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}%", pct.round() as i64)
    } else {
        format!("{pct:.2}%")
    }
}

fn trim_fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, x: f64) -> KtUtilityParams {
        KtUtilityParams::after_loss(a, x).unwrap()
    }

    #[test]
    fn kt_value_examples() {
        let p = params(5.0, 0.0);
        assert!((kt_value(&p, 0.05) - 0.221_199_216_928_595).abs() < 1e-12);
        assert_eq!(kt_value(&p, 0.0), 0.0);
        assert!((kt_value(&p, -0.05) + 2.25 * 0.221_199_216_928_595).abs() < 1e-12);
    }

    #[test]
    fn kt_value_loss_mirror() {
        let p = KtUtilityParams::new(3.0, 2.25, 0.0).unwrap();
        for w in [0.001, 0.05, 0.3, 2.0] {
            assert_eq!(kt_value(&p, -w), -p.lambda * kt_value(&p, w));
        }
    }

    #[test]
    fn kt_value_shape_on_grid() {
        let p = KtUtilityParams::new(4.0, 2.25, 0.0).unwrap();
        let h = 0.01;
        let grid: Vec<f64> = (-50..=50).map(|i| i as f64 * h).collect();
        for w in grid.windows(3) {
            let (a, b, c) = (kt_value(&p, w[0]), kt_value(&p, w[1]), kt_value(&p, w[2]));
            assert!(b > a && c > b);
            let second = a - 2.0 * b + c;
            if w[0] >= 0.0 {
                assert!(second < 0.0, "concave on gains at {}", w[1]);
            } else if w[2] <= 0.0 {
                assert!(second > 0.0, "convex on losses at {}", w[1]);
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(KtUtilityParams::new(0.0, 2.25, 0.0).is_err());
        assert!(KtUtilityParams::new(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn amplitude_anchor() {
        let s = risk_neutral_amplitude(&params(5.0, 0.05)).unwrap();
        assert!((s.y - 0.0718).abs() < 5e-4, "y = {}", s.y);
        assert!((s.amplitude - 0.122).abs() < 5e-4);
        // frozen from an independent scalar root solve
        assert!((s.y - 0.071_870_215_250_460_68).abs() < 1e-10);
    }

    #[test]
    fn amplitude_zero_loss() {
        let s = risk_neutral_amplitude(&params(5.0, 0.0)).unwrap();
        assert_eq!(s.y, 0.0);
    }

    #[test]
    fn amplitude_a2_against_grid_scan() {
        let p = params(2.0, 0.05);
        let s = risk_neutral_amplitude(&p).unwrap();
        // brute force: locate the sign change of the residual on a fine grid
        let f = |y: f64| indifference_residual(&p, 0.05, y);
        let mut prev = f(0.0);
        let mut found = None;
        for i in 1..=200_000 {
            let y = i as f64 * 1e-6;
            let cur = f(y);
            if prev > 0.0 && cur <= 0.0 {
                found = Some(y);
                break;
            }
            prev = cur;
        }
        let grid = found.expect("grid sign change");
        assert!((s.y - grid).abs() <= 1e-6);
        assert!((s.y - 0.0122).abs() < 1e-4);
    }

    #[test]
    fn amplitude_no_solution_for_large_loss() {
        assert!(matches!(
            risk_neutral_amplitude(&params(10.0, 0.05)),
            Err(Error::NoRealSolution(_))
        ));
    }

    #[test]
    fn amplitude_grows_with_risk_aversion() {
        let ys: Vec<f64> = [0.5, 1.0, 2.0, 5.0]
            .iter()
            .map(|&a| risk_neutral_amplitude(&params(a, 0.05)).unwrap().y)
            .collect();
        assert!(ys.windows(2).all(|w| w[1] > w[0]), "{ys:?}");
        let tiny = risk_neutral_amplitude(&params(1e-3, 0.05)).unwrap().y;
        assert!(tiny < 1e-4);
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let curve = trace_risk_neutral_curve(&params(5.0, 0.05), 101).unwrap();
        assert!(curve.gaps.is_empty());
        let first = curve.points.first().unwrap();
        let last = curve.points.last().unwrap();
        assert_eq!(first.c2, 0.0);
        assert!((first.variance - 0.122f64.powi(2)).abs() < 2e-4);
        assert_eq!(last.expected_return, 0.05);
        assert_eq!(last.variance, 0.0);
        assert!(curve.points.windows(2).all(|w| w[1].variance < w[0].variance));
        for p in &curve.points {
            assert!((p.edr_coordinate + p.prospect_coordinate - 2.0 * p.expected_return).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_midpoint_against_dense_scan() {
        let p = params(5.0, 0.05);
        let base = risk_neutral_amplitude(&p).unwrap();
        let point = risk_neutral_point(&p, &base, 0.025).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        let steps = (base.y / 1e-6) as usize;
        for i in 0..=steps {
            let c2 = i as f64 * 1e-6;
            let r = risk_neutral_residual(&p, base.x, base.y, 0.025, c2).abs();
            if r < best.0 {
                best = (r, c2);
            }
        }
        assert!((point.c2 - best.1).abs() <= 1e-6);
        assert!((point.c2 - 0.063_436_009_199_408_41).abs() < 1e-9);
    }

    #[test]
    fn curve_needs_two_points() {
        assert!(trace_risk_neutral_curve(&params(5.0, 0.05), 1).is_err());
    }

    #[test]
    fn slope_at_endpoints() {
        let p = params(5.0, 0.05);
        let base = risk_neutral_amplitude(&p).unwrap();
        let end = rnc_slope(
            &p,
            RncState {
                c: 0.05,
                d: base.y,
                x: 0.05,
                y: base.y,
            },
        )
        .unwrap();
        assert!(end.abs() < 1e-15);
        let start = rnc_slope(
            &p,
            RncState {
                c: 0.05,
                d: base.y,
                x: 0.0,
                y: 0.0,
            },
        )
        .unwrap();
        // evaluated independently in double precision
        assert!((start - 6.280_895_207_994_102).abs() < 1e-9);
    }

    #[test]
    fn slope_matches_central_differences() {
        let p = params(5.0, 0.05);
        let curve = trace_risk_neutral_curve(&p, 1001).unwrap();
        for w in curve.points.windows(3) {
            let fd = (w[2].c2 - w[0].c2) / (w[2].expected_return - w[0].expected_return);
            let s = rnc_slope(
                &p,
                RncState {
                    c: curve.x,
                    d: curve.y,
                    x: w[1].expected_return,
                    y: w[1].c2,
                },
            )
            .unwrap();
            assert!((s - fd).abs() < 1e-3, "slope {s} vs fd {fd}");
        }
    }

    #[test]
    fn slope_positive_wherever_solvable() {
        for a in [0.5, 5.0, 10.0] {
            for gap in [0.01, 0.5, 1.0] {
                let p = params(a, gap);
                let Ok(base) = risk_neutral_amplitude(&p) else { continue };
                // d(d - y)/d(c - x) equals dy/dx; evaluate just inside the curve
                let c1 = 0.5 * gap;
                let pt = risk_neutral_point(&p, &base, c1).unwrap();
                let s = rnc_slope(
                    &p,
                    RncState {
                        c: gap,
                        d: base.y,
                        x: c1,
                        y: pt.c2,
                    },
                )
                .unwrap();
                assert!(s > 0.0, "a = {a}, gap = {gap}: slope {s}");
            }
        }
    }

    #[test]
    fn iso_slope_examples() {
        let s = iso_utility_slope(3.0, 0.1, 0.0).unwrap();
        assert!((s.k - 0.46875).abs() < 1e-15);
        assert!((s.slope + 0.882_352_941_176_470_6).abs() < 1e-12);
        assert_eq!(s.case, IsoCase::Normal);

        let s = iso_utility_slope(3.0, 0.5, 0.0).unwrap();
        assert!((s.k - 2.34375).abs() < 1e-15);
        assert!((s.slope - 1.744_186_046_511_628).abs() < 1e-12);
        assert_eq!(s.case, IsoCase::Steep);

        let s = iso_utility_slope(3.0, 0.05, 0.05).unwrap();
        assert_eq!(s.slope, 0.0);
        assert_eq!(s.case, IsoCase::Normal);

        // k = 1 exactly: (3 / 0.64) * 0.64 / 3
        let e = 0.64 / 3.0;
        assert!(matches!(iso_utility_slope(3.0, e, 0.0), Err(Error::SingularSlope(_))));
        assert_eq!(iso_case(3.0, e, 0.0).unwrap(), IsoCase::Singular);
    }

    #[test]
    fn iso_curvature_examples() {
        let c = iso_utility_curvature(3.0, 0.1, 0.0).unwrap();
        assert!((c - 16.608_996_539_792_386).abs() < 1e-9);
    }

    /// Expected return on the iso-utility curve through `u0` at `edr`.
    fn iso_path(a: f64, u0: f64, edr: f64) -> f64 {
        let c = 0.5 / 0.64 * a;
        let g = (1.0 - (1.0 - 4.0 * c * (u0 - edr)).sqrt()) / (2.0 * c);
        edr + g
    }

    #[test]
    fn iso_geometry_matches_finite_differences() {
        let (a, e, edr) = (3.0, 0.1, 0.0);
        let u0 = utility_score(a, e, edr).unwrap();
        let h = 1e-4;
        let fd_slope = (iso_path(a, u0, edr + h) - iso_path(a, u0, edr - h)) / (2.0 * h);
        let slope = iso_utility_slope(a, e, edr).unwrap().slope;
        assert!(((fd_slope - slope) / slope).abs() < 1e-3);

        let fd_curv = (iso_path(a, u0, edr + h) - 2.0 * iso_path(a, u0, edr) + iso_path(a, u0, edr - h)) / (h * h);
        let exact = iso_utility_curvature_exact(a, e, edr).unwrap();
        assert!(((fd_curv - exact) / exact).abs() < 1e-3, "{fd_curv} vs {exact}");
    }

    #[test]
    fn utility_score_examples() {
        assert!((utility_score(3.0, 0.1, 0.0).unwrap() - 0.076_562_5).abs() < 1e-15);
        assert_eq!(utility_score(3.0, 0.07, 0.07).unwrap(), 0.07);
        assert!(utility_score(3.0, 0.0, 0.1).is_err());
        // Gaussian asset: agrees with E - a sigma^2 / 2 up to the 0.8 rounding
        let (mu, sigma, a) = (0.08, 0.15, 3.0);
        let edr = crate::risk::gaussian_edr(mu, sigma).unwrap();
        let u = utility_score(a, mu, edr).unwrap();
        let mv = mu - 0.5 * a * sigma * sigma;
        let rounding = 0.5 * a * sigma * sigma * ((2.0 / std::f64::consts::PI) / 0.64 - 1.0);
        assert!((u - (mv - rounding)).abs() < 1e-12);
    }

    #[test]
    fn calibration_examples() {
        assert!((calibrate_risk_aversion(0.5, 0.01).unwrap() - 0.665896).abs() < 1e-5);
        assert!((calibrate_risk_aversion(0.95, 0.20).unwrap() - 3.393772).abs() < 1e-5);
        let step = calibrate_risk_aversion(0.8, 0.06).unwrap() - calibrate_risk_aversion(0.8, 0.05).unwrap();
        assert!((step - 0.01).abs() < 1e-12);
        assert!(calibrate_risk_aversion(1.0, 0.1).is_err());
        assert!(matches!(
            calibrate_risk_aversion(0.01, -1.0),
            Err(Error::CalibrationOutOfRange { .. })
        ));
    }

    #[test]
    fn calibration_csv_layout() {
        let t = calibration_table(&CALIBRATION_X, &calibration_returns()).unwrap();
        let rows = t.csv_rows();
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[0].join(","), "x/E(r),50%,66.70%,80%,90%,92%,95%");
        assert_eq!(rows[1][0], "1%");
        assert_eq!(rows[1][1], "0.665896");
        assert_eq!(rows[1][2], "1.16164");
    }
}
