//! Densities, distribution functions and quantiles for the standard normal,
//! chi-squared and Student-t laws.

pub mod special;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::roots::{bisect_increasing, expand_down_positive, expand_up, Tolerance};
use special::{beta_reg_xy, gamma_p, gamma_q, ln_gamma};

/// Largest accepted degrees of freedom.
pub const MAX_DF: u32 = 1_000_000;

/// Bisection stops at this relative bracket width before the Newton polish.
const QUANTILE_WIDTH: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistributionKind {
    StdNormal,
    ChiSquared(u32),
    StudentT(u32),
}

impl DistributionKind {
    pub fn chi_squared(df: u32) -> Result<Self> {
        check_df(df)?;
        Ok(DistributionKind::ChiSquared(df))
    }

    pub fn student_t(df: u32) -> Result<Self> {
        check_df(df)?;
        Ok(DistributionKind::StudentT(df))
    }

    fn validate(self) -> Result<Self> {
        match self {
            DistributionKind::StdNormal => {}
            DistributionKind::ChiSquared(df) | DistributionKind::StudentT(df) => check_df(df)?,
        }
        Ok(self)
    }

    fn is_symmetric(self) -> bool {
        !matches!(self, DistributionKind::ChiSquared(_))
    }
}

fn check_df(df: u32) -> Result<()> {
    if (1..=MAX_DF).contains(&df) {
        Ok(())
    } else {
        Err(domain(format!("degrees of freedom {df} outside [1, {MAX_DF}]")))
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("non-finite argument {x}")))
    }
}

/// A probability together with the point carrying that much lower-tail mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub probability: f64,
    pub value: f64,
}

impl Quantile {
    pub fn of(kind: DistributionKind, probability: f64) -> Result<Self> {
        Ok(Quantile { probability, value: quantile(kind, probability)? })
    }
}

pub fn pdf(kind: DistributionKind, x: f64) -> Result<f64> {
    kind.validate()?;
    check_finite(x)?;
    Ok(match kind {
        DistributionKind::StdNormal => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
        DistributionKind::ChiSquared(df) => {
            if x <= 0.0 {
                return Err(domain(format!("chi-squared density needs x > 0, got {x}")));
            }
            let k = 0.5 * df as f64;
            ((k - 1.0) * x.ln() - 0.5 * x - k * 2f64.ln() - ln_gamma(k)).exp()
        }
        DistributionKind::StudentT(df) => {
            let nu = df as f64;
            let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
            (ln_norm - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp()
        }
    })
}

/// Lower-tail probability. Chi-squared mass below zero is zero.
pub fn cdf(kind: DistributionKind, x: f64) -> Result<f64> {
    kind.validate()?;
    check_finite(x)?;
    Ok(cdf_unchecked(kind, x))
}

pub(crate) fn cdf_unchecked(kind: DistributionKind, x: f64) -> f64 {
    match kind {
        DistributionKind::StdNormal => {
            let half_sq = 0.5 * x * x;
            if x < 0.0 {
                0.5 * gamma_q(0.5, half_sq)
            } else {
                1.0 - 0.5 * gamma_q(0.5, half_sq)
            }
        }
        DistributionKind::ChiSquared(df) => {
            if x <= 0.0 {
                0.0
            } else {
                gamma_p(0.5 * df as f64, 0.5 * x)
            }
        }
        DistributionKind::StudentT(df) => {
            let nu = df as f64;
            let t2 = x * x;
            let tail = if t2.is_infinite() {
                0.0
            } else {
                let denom = nu + t2;
                0.5 * beta_reg_xy(0.5 * nu, 0.5, nu / denom, t2 / denom)
            };
            if x < 0.0 {
                tail
            } else {
                1.0 - tail
            }
        }
    }
}

/// Inverse CDF by bracket expansion from the median, bisection, then one
/// Newton step.
pub fn quantile(kind: DistributionKind, p: f64) -> Result<f64> {
    kind.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("probability {p} outside (0, 1)")));
    }
    let f = |x: f64| cdf_unchecked(kind, x);

    let (lo, hi) = if kind.is_symmetric() {
        if p == 0.5 {
            return Ok(0.0);
        }
        if p > 0.5 {
            expand_up(f, p, 1.0, 2.0, 0.0)?
        } else {
            // mirror: x with F(x) = p is -y with F(y) = 1 - p, but bracket
            // directly to keep the lower tail accurate
            let (inner, outer) = expand_up(|y| 1.0 - f(-y), 1.0 - p, 1.0, 2.0, 0.0)?;
            (-outer, -inner)
        }
    } else {
        let df = match kind {
            DistributionKind::ChiSquared(df) => df as f64,
            _ => unreachable!(),
        };
        let median = df * (1.0 - 2.0 / (9.0 * df)).powi(3);
        if f(median) < p {
            expand_up(f, p, 2.0 * median, 2.0, median)?
        } else {
            expand_down_positive(f, p, median, 2.0)?
        }
    };

    let (lo, hi) = bisect_increasing(f, p, lo, hi, Tolerance::relative(QUANTILE_WIDTH));
    let mut q = 0.5 * (lo + hi);
    let resid = f(q) - p;
    if resid != 0.0 {
        if let Ok(dens) = pdf(kind, q) {
            if dens > 0.0 {
                let polished = q - resid / dens;
                if polished >= lo && polished <= hi && (f(polished) - p).abs() <= resid.abs() {
                    q = polished;
                }
            }
        }
    }
    Ok(q)
}
