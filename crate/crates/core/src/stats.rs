//! Student t distribution, one-sample t-test and simple OLS.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::neumaier_sum;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const CF_TOL: f64 = 1e-12;
const CF_MAX_ITER: usize = 10_000;
const CF_TINY: f64 = 1e-300;

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_TOL {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// CDF of Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// `P(|T| >= |t|)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    #[default]
    Two,
    /// Alternative: the mean is below zero.
    Lower,
    /// Alternative: the mean is above zero.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub mean: f64,
    pub t: f64,
    pub df: usize,
    pub p_value: f64,
    pub n: usize,
}

/// Two-sided one-sample t-test of a zero mean.
pub fn student_t_test(values: &[f64]) -> Result<TTest> {
    student_t_test_tail(values, Tail::Two)
}

/// One-sample t-test of a zero mean against the given alternative.
pub fn student_t_test_tail(values: &[f64], tail: Tail) -> Result<TTest> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData { required: 2, actual: n });
    }
    let mean = neumaier_sum(values.iter().copied()) / n as f64;
    let ss = neumaier_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    if values.iter().all(|&v| v == values[0]) || ss == 0.0 {
        return Err(Error::DegenerateTest("sample variance is zero".into()));
    }
    let df = n - 1;
    let se = (ss / df as f64 / n as f64).sqrt();
    let t = mean / se;
    let p_value = match tail {
        Tail::Two => student_t_two_sided(t, df as f64),
        Tail::Lower => student_t_cdf(t, df as f64),
        Tail::Upper => student_t_cdf(-t, df as f64),
    };
    Ok(TTest {
        mean,
        t,
        df,
        p_value: p_value.clamp(0.0, 1.0),
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficient: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub t_stat: f64,
    /// Two-sided, `n - 2` degrees of freedom.
    pub coef_p_value: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Least squares fit of `y = intercept + coefficient * x`.
pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::domain(format!("{} x values for {} y values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData { required: 3, actual: n });
    }
    let nf = n as f64;
    let mx = neumaier_sum(x.iter().copied()) / nf;
    let my = neumaier_sum(y.iter().copied()) / nf;
    let sxx = neumaier_sum(x.iter().map(|v| (v - mx) * (v - mx)));
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sxx <= 16.0 * nf * (f64::EPSILON * scale).powi(2) {
        return Err(Error::SingularDesign("x has no variance".into()));
    }
    let sxy = neumaier_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let coefficient = sxy / sxx;
    let intercept = my - coefficient * mx;
    let ssr = neumaier_sum(x.iter().zip(y).map(|(a, b)| {
        let e = b - intercept - coefficient * a;
        e * e
    }));
    let sst = neumaier_sum(y.iter().map(|v| (v - my) * (v - my)));
    let r_squared = if sst == 0.0 {
        1.0
    } else {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    };
    let df = (n - 2) as f64;
    let std_error = (ssr / df / sxx).sqrt();
    let (t_stat, coef_p_value) = if std_error == 0.0 {
        if coefficient == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(coefficient), 0.0)
        }
    } else {
        let t = coefficient / std_error;
        (t, student_t_two_sided(t, df))
    };
    Ok(RegressionResult {
        coefficient,
        intercept,
        std_error,
        t_stat,
        coef_p_value,
        r_squared,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(100.5) - 361.435_540_467_777_57).abs() < 1e-10);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x and I_x(a, 1) = x^a
        for x in [0.1, 0.5, 0.9] {
            assert!((regularized_incomplete_beta(1.0, 1.0, x) - x).abs() < 1e-13);
            assert!((regularized_incomplete_beta(3.0, 1.0, x) - x.powi(3)).abs() < 1e-13);
        }
    }

    // Reference probabilities frozen from an independent t distribution implementation.
    #[test]
    fn t_cdf_reference_values() {
        assert!((student_t_cdf(-1.3, 3.0) - 0.142_233_754_363_948_47).abs() < 1e-12);
        assert!((student_t_two_sided(2.5, 7.0) - 0.040_992_218_585_752_874).abs() < 1e-12);
        assert_eq!(student_t_cdf(0.0, 5.0), 0.5);
        // one degree of freedom is Cauchy
        let t: f64 = 2.0;
        assert!((student_t_cdf(t, 1.0) - (0.5 + t.atan() / std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn t_test_examples() {
        let r = student_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(r.mean, 3.0);
        assert!((r.t - 4.242_640_687_119_285).abs() < 1e-12);
        assert!((r.p_value - 0.013_235_599_563_682_695).abs() < 1e-12);
        assert_eq!(r.df, 4);

        let r = student_t_test(&[-1.0, 1.0]).unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.p_value, 1.0);

        assert!(matches!(
            student_t_test(&[0.3, 0.3, 0.3]),
            Err(Error::DegenerateTest(_))
        ));
        assert!(student_t_test(&[1.0]).is_err());
    }

    #[test]
    fn one_sided_halves_two_sided() {
        let v = [0.5, 1.2, -0.1, 0.9, 0.4];
        let two = student_t_test(&v).unwrap().p_value;
        let up = student_t_test_tail(&v, Tail::Upper).unwrap().p_value;
        let down = student_t_test_tail(&v, Tail::Lower).unwrap().p_value;
        assert!((up - two / 2.0).abs() < 1e-12);
        assert!((up + down - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_perfect_fit() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let r = ols_fit(&x, &y).unwrap();
        assert!((r.coefficient - 2.0).abs() < 1e-12);
        assert!((r.intercept - 1.0).abs() < 1e-12);
        assert!((r.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ols_hand_dataset() {
        // normal equations by hand: n=5, sum x=10, sum y=14, sum xx=30, sum xy=38
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 2.0, 2.0, 4.0, 5.0];
        let r = ols_fit(&x, &y).unwrap();
        let det = 5.0 * 30.0 - 10.0 * 10.0;
        let slope = (5.0 * 38.0 - 10.0 * 14.0) / det;
        let intercept = (30.0 * 14.0 - 10.0 * 38.0) / det;
        assert!((r.coefficient - slope).abs() < 1e-12);
        assert!((r.intercept - intercept).abs() < 1e-12);
        // SSR = 0.8, SST = 10.8
        assert!((r.r_squared - (1.0 - 0.8 / 10.8)).abs() < 1e-12);
    }

    #[test]
    fn ols_singular_design() {
        assert!(matches!(
            ols_fit(&[0.1, 0.1, 0.1, 0.1], &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::SingularDesign(_))
        ));
        assert!(ols_fit(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }
}
