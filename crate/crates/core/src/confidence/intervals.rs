//! The interval builders.

use serde::Serialize;

use super::construction::{Construction, Prepared};
use super::eta::chi2_equal_tails;
use super::{ConfidenceDomain, EstimatorKind};
use crate::error::{domain, Result};
use crate::measurement::{Sample, TwoSample};

/// A confidence domain together with the constants used to build it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub domain: ConfidenceDomain,
    /// For the known-scale mean cone, its slice at the declared scale.
    pub slice: Option<ConfidenceDomain>,
    pub constants: Vec<(&'static str, f64)>,
}

fn build(construction: Construction, gamma: f64, x: &Sample, y: Option<&Sample>) -> Result<Interval> {
    let prepared = Prepared::new(construction, gamma, x.len(), y.map_or(0, Sample::len))?;
    Ok(Interval {
        domain: prepared.domain(x, y)?,
        slice: None,
        constants: prepared.constants().to_vec(),
    })
}

/// Cone `|mu - mean(x)| <= (z / sqrt(n)) sigma`; with `sigma` declared,
/// also its slice `mean(x) +- sigma z / sqrt(n)`.
pub fn interval_mean_known_sigma(x: &Sample, gamma: f64, sigma: Option<f64>) -> Result<Interval> {
    let mut out = build(Construction::MeanKnownSigma, gamma, x, None)?;
    if let Some(sigma) = sigma {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("scale {sigma} must be positive")));
        }
        if let ConfidenceDomain::MeanCone { center, slope } = out.domain {
            let hw = sigma * slope;
            out.slice = Some(ConfidenceDomain::ThetaInterval { lo: center - hw, hi: center + hw });
            out.constants.push(("half_width", hw));
        }
    }
    Ok(out)
}

/// Band `S e^{-2 eta} / a <= sigma^2 <= S e^{2 eta} / a` where `a` is the
/// estimator's divisor and `eta` solves the log-scale threshold equation.
pub fn interval_variance(x: &Sample, gamma: f64, estimator: EstimatorKind) -> Result<Interval> {
    build(Construction::Variance(estimator), gamma, x, None)
}

/// Equal-tails band `S / chi_inf <= sigma^2 <= S / chi0`.
pub fn interval_variance_alpha_point(x: &Sample, gamma: f64) -> Result<Interval> {
    build(Construction::VarianceAlphaPoint, gamma, x, None)
}

/// The estimator scale `c = sqrt(chi0 chi_inf) / n` under which the
/// log-scale band coincides with the equal-tails band.
pub fn alpha_point_reconciliation_c(gamma: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(domain("reconciliation needs n >= 2"));
    }
    let (chi0, chi_inf) = chi2_equal_tails(gamma, n - 1)?;
    Ok((chi0 * chi_inf).sqrt() / n as f64)
}

/// Interval for `mu1 - mu2` centred at `mean(x) - mean(y)` with half-width
/// `sqrt(sigma1^2/n + sigma2^2/m) z`.
pub fn interval_mean_diff(ts: &TwoSample, gamma: f64, sigma1: f64, sigma2: f64) -> Result<Interval> {
    build(Construction::MeanDiff { sigma1, sigma2 }, gamma, &ts.x, Some(&ts.y))
}

/// `mean(x) +- (sigma'(x) / sqrt(n)) t` with `t` the Student point at
/// `n - 1` degrees of freedom.
pub fn interval_mean_t(x: &Sample, gamma: f64) -> Result<Interval> {
    build(Construction::MeanT, gamma, x, None)
}
