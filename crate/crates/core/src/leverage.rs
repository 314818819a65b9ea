//! Leveraged expected returns with a margin-call floor, and the optimum of a
//! power-law frontier with and without leverage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::returns::{neumaier_sum, EmpiricalDistribution};
use crate::roots::{bisect_secant, expand_upper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeverageSpec {
    /// Borrowed fraction; the position is `1 + x_lev` times equity.
    pub x_lev: f64,
    /// Borrowing rate per period.
    pub r_c: f64,
    /// Margin fraction; the position is liquidated at a return of `-1 + m`.
    pub m: f64,
}

impl LeverageSpec {
    pub fn new(x_lev: f64, r_c: f64, m: f64) -> Result<Self> {
        if !(x_lev >= 0.0 && x_lev.is_finite()) {
            return Err(Error::domain(format!("x_lev = {x_lev} must be non-negative")));
        }
        if !(r_c >= 0.0 && r_c.is_finite()) {
            return Err(Error::domain(format!("r_c = {r_c} must be non-negative")));
        }
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::domain(format!("margin m = {m} outside (0, 1)")));
        }
        Ok(Self { x_lev, r_c, m })
    }

    pub fn floor(&self) -> f64 {
        -1.0 + self.m
    }
}

/// Leveraged expected return and its decomposition.
///
/// `e_lev = plain_leverage_term - financing_cost + truncation_gain`, where the
/// gain is `tail_probability * (floor - tail_cvar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeverageBreakdown {
    pub e_lev: f64,
    /// `E_P (1 + x_lev)`.
    pub plain_leverage_term: f64,
    /// `r_c x_lev`, charged whether or not the floor is hit.
    pub financing_cost: f64,
    /// Mass of leveraged outcomes strictly below the floor.
    pub tail_probability: f64,
    /// Mean leveraged outcome below the floor; `None` for an empty tail.
    pub tail_cvar: Option<f64>,
    pub floor: f64,
    pub truncation_gain: f64,
}

impl LeverageBreakdown {
    /// The right-hand side of the decomposition.
    pub fn decomposed(&self) -> f64 {
        self.plain_leverage_term - self.financing_cost + self.truncation_gain
    }
}

/// `E[max(r (1 + x), -1 + m)] - r_c x` over the unleveraged distribution.
pub fn leveraged_expected_return(dist: &EmpiricalDistribution, spec: &LeverageSpec) -> LeverageBreakdown {
    let scale = 1.0 + spec.x_lev;
    let floor = spec.floor();
    let financing_cost = spec.r_c * spec.x_lev;
    let leveraged = || dist.atoms().iter().map(move |a| (a.outcome * scale, a.probability));

    let truncated = neumaier_sum(leveraged().map(|(r, p)| r.max(floor) * p));
    let plain_leverage_term = dist.mean() * scale;

    let tail = || leveraged().filter(|&(r, _)| r < floor);
    let tail_probability = neumaier_sum(tail().map(|(_, p)| p));
    let (tail_cvar, truncation_gain) = if tail_probability > 0.0 {
        let cvar = neumaier_sum(tail().map(|(r, p)| r * p)) / tail_probability;
        (Some(cvar), tail_probability * (floor - cvar))
    } else {
        (None, 0.0)
    };

    LeverageBreakdown {
        e_lev: truncated - financing_cost,
        plain_leverage_term,
        financing_cost,
        tail_probability,
        tail_cvar,
        floor,
        truncation_gain,
    }
}

/// `e_lev(B) - e_lev(A)`; positive when `B` wins under leverage.
pub fn dominance_gap(dist_a: &EmpiricalDistribution, dist_b: &EmpiricalDistribution, spec: &LeverageSpec) -> f64 {
    leveraged_expected_return(dist_b, spec).e_lev - leveraged_expected_return(dist_a, spec).e_lev
}

/// Frontier `E = (sigma - beta)^alpha + gamma` and an investor with CARA `a`
/// holding `leverage` times equity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFrontierSpec {
    pub alpha_exp: f64,
    pub beta_shift: f64,
    /// Level of the frontier; does not move the optimum.
    pub gamma_level: f64,
    pub a: f64,
    pub leverage: f64,
}

impl PowerFrontierSpec {
    pub fn new(alpha_exp: f64, beta_shift: f64, gamma_level: f64, a: f64, leverage: f64) -> Result<Self> {
        if !(alpha_exp > 0.0 && alpha_exp < 1.0) {
            return Err(Error::domain(format!("exponent {alpha_exp} outside (0, 1)")));
        }
        if !(beta_shift > 0.0 && beta_shift.is_finite()) {
            return Err(Error::domain(format!("beta {beta_shift} must be positive")));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::domain(format!("a = {a} must be positive")));
        }
        if !(leverage >= 1.0 && leverage.is_finite()) {
            return Err(Error::domain(format!("leverage {leverage} must be at least 1")));
        }
        if !gamma_level.is_finite() {
            return Err(Error::domain("gamma must be finite"));
        }
        Ok(Self {
            alpha_exp,
            beta_shift,
            gamma_level,
            a,
            leverage,
        })
    }

    /// `E(sigma)` on the frontier.
    pub fn expected_return(&self, sigma: f64) -> f64 {
        (sigma - self.beta_shift).powf(self.alpha_exp) + self.gamma_level
    }

    /// `sigma - alpha (sigma - beta)^(alpha - 1) / (scale a)`.
    pub fn residual(&self, sigma: f64, scale: f64) -> f64 {
        sigma - self.alpha_exp * (sigma - self.beta_shift).powf(self.alpha_exp - 1.0) / (scale * self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptimum {
    pub sigma_opt: f64,
    /// `sigma_opt / L`.
    pub sigma_lev_literal: f64,
    /// Root of `sigma = alpha (sigma - beta)^(alpha - 1) / (L a)`.
    pub sigma_lev_fixedpoint: f64,
}

fn solve_first_order(spec: &PowerFrontierSpec, scale: f64) -> Result<f64> {
    let beta = spec.beta_shift;
    let f = |s: f64| spec.residual(s, scale);
    let mut offset = beta * 1e-3;
    let lo = loop {
        let lo = (beta + offset).max(beta.next_up());
        if f(lo) < 0.0 {
            break lo;
        }
        offset *= 1e-3;
        if lo == beta.next_up() {
            return Err(Error::NoOptimum(format!(
                "first-order condition has no root above beta = {beta}"
            )));
        }
    };
    let hi = expand_upper(f, lo, beta + 1.0, 1e12)
        .map_err(|_| Error::NoOptimum("first-order condition has no finite root".into()))?;
    bisect_secant(f, lo, hi, 1e-14)
}

/// Optimal volatility on the power frontier, unleveraged and leveraged.
pub fn power_frontier_optimum(spec: &PowerFrontierSpec) -> Result<PowerOptimum> {
    let sigma_opt = solve_first_order(spec, 1.0)?;
    let sigma_lev_fixedpoint = if spec.leverage == 1.0 {
        sigma_opt
    } else {
        solve_first_order(spec, spec.leverage)?
    };
    Ok(PowerOptimum {
        sigma_opt,
        sigma_lev_literal: sigma_opt / spec.leverage,
        sigma_lev_fixedpoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(f64, f64)]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(LeverageSpec::new(-0.1, 0.0, 0.5).is_err());
        assert!(LeverageSpec::new(1.0, -0.01, 0.5).is_err());
        assert!(LeverageSpec::new(1.0, 0.0, 0.0).is_err());
        assert!(LeverageSpec::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn hand_truncation_example() {
        let p = dist(&[(-0.6, 0.05), (-0.4, 0.05), (0.1, 0.9)]);
        let spec = LeverageSpec::new(1.0, 0.02, 0.5).unwrap();
        let b = leveraged_expected_return(&p, &spec);
        assert!((b.e_lev - 0.11).abs() < 1e-15, "{}", b.e_lev);
        assert_eq!(b.floor, -0.5);
        assert!((b.tail_probability - 0.1).abs() < 1e-15);
        assert!((b.tail_cvar.unwrap() + 1.0).abs() < 1e-15);
        assert!((b.truncation_gain - 0.05).abs() < 1e-15);
        assert!((b.decomposed() - b.e_lev).abs() < 1e-15);
    }

    #[test]
    fn no_leverage_no_tail() {
        let p = dist(&[(-0.1, 0.5), (0.2, 0.5)]);
        let spec = LeverageSpec::new(0.0, 0.05, 0.5).unwrap();
        let b = leveraged_expected_return(&p, &spec);
        assert_eq!(b.e_lev, p.mean());
        assert_eq!(b.tail_cvar, None);
        assert_eq!(b.truncation_gain, 0.0);
    }

    #[test]
    fn dominance_gap_examples() {
        let a = dist(&[(-0.2, 0.5), (0.3, 0.5)]);
        let b = dist(&[(-0.9, 0.1), (0.15, 0.9)]);
        let spec = LeverageSpec::new(1.0, 0.0, 0.5).unwrap();
        assert!((dominance_gap(&a, &b, &spec) - 0.12).abs() < 1e-15);
        assert_eq!(dominance_gap(&a, &a, &spec), 0.0);

        // floor near total loss: B's tail is still cut at -1
        let spec = LeverageSpec::new(1.0, 0.0, 1e-9).unwrap();
        let gap = dominance_gap(&a, &b, &spec);
        let untruncated = (b.mean() - a.mean()) * 2.0;
        let residual = 0.1 * (-1.0 + 1e-9 + 1.8);
        assert!((gap - (untruncated + residual)).abs() < 1e-12);
    }

    #[test]
    fn power_optimum_examples() {
        let spec = PowerFrontierSpec::new(0.5, 0.1, 0.0, 4.0, 2.0).unwrap();
        let o = power_frontier_optimum(&spec).unwrap();
        let cubic = |s: f64, c: f64| s * s * s - 0.1 * s * s - c;
        assert!(cubic(o.sigma_opt, 0.015625).abs() < 1e-12);
        assert!((o.sigma_opt - 0.288_164_759_330_346_85).abs() < 1e-10);
        assert!((o.sigma_lev_fixedpoint - 0.198_819_434_727_665_83).abs() < 1e-10);
        assert!(cubic(o.sigma_lev_fixedpoint, 0.003_906_25).abs() < 1e-12);
        assert!(spec.residual(o.sigma_opt, 1.0).abs() < 1e-9);
        assert!(o.sigma_lev_literal < o.sigma_opt && o.sigma_lev_fixedpoint < o.sigma_opt);

        let flat = PowerFrontierSpec { leverage: 1.0, ..spec };
        let o = power_frontier_optimum(&flat).unwrap();
        assert_eq!(o.sigma_lev_literal, o.sigma_opt);
        assert_eq!(o.sigma_lev_fixedpoint, o.sigma_opt);
    }

    #[test]
    fn power_spec_validation() {
        assert!(PowerFrontierSpec::new(1.0, 0.1, 0.0, 4.0, 2.0).is_err());
        assert!(PowerFrontierSpec::new(0.5, 0.0, 0.0, 4.0, 2.0).is_err());
        assert!(PowerFrontierSpec::new(0.5, 0.1, 0.0, 4.0, 0.5).is_err());
    }

    #[test]
    fn gamma_does_not_move_optimum() {
        let a = PowerFrontierSpec::new(0.3, 0.05, 0.0, 2.0, 3.0).unwrap();
        let b = PowerFrontierSpec { gamma_level: 0.4, ..a };
        assert_eq!(power_frontier_optimum(&a).unwrap(), power_frontier_optimum(&b).unwrap());
    }
}
