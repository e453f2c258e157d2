//! Thresholds `eta`: the smallest radius whose pulled-back ball carries
//! probability `gamma`.
//!
//! All coverage functions here are continuous and strictly increasing in
//! `eta`, so the infimum is the unique root and bisection finds it. The
//! returned value is the upper end of the final bracket, which keeps the
//! achieved coverage at or above `gamma` up to rounding.

use serde::{Deserialize, Serialize};

use super::Antiderivative;
use crate::error::{check_gamma, domain, Result};
use crate::measurement::NormalState;
use crate::roots::{bisect_increasing, expand_up, Tolerance};
use crate::specfun::{cdf_unchecked, quantile, DistributionKind};

/// Bracket width at which the threshold bisection stops.
const ETA_WIDTH: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaThreshold {
    pub eta: f64,
    pub gamma: f64,
    /// Whether the threshold varies with the state it was computed for.
    pub depends_on_state: bool,
}

/// Upper-tail standard normal point: `Phi^{-1}((1 + gamma) / 2)`.
pub(crate) fn z_two_sided(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    quantile(DistributionKind::StdNormal, 0.5 * (1.0 + gamma))
}

pub(crate) fn t_two_sided(gamma: f64, df: usize) -> Result<f64> {
    check_gamma(gamma)?;
    quantile(DistributionKind::student_t(df as u32)?, 0.5 * (1.0 + gamma))
}

/// Equal-tails chi-squared points `(chi0, chi_inf)` with mass `(1 - gamma)/2`
/// in each tail.
pub(crate) fn chi2_equal_tails(gamma: f64, df: usize) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    let kind = DistributionKind::chi_squared(df as u32)?;
    Ok((quantile(kind, 0.5 * (1.0 - gamma))?, quantile(kind, 0.5 * (1.0 + gamma))?))
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(domain(format!("sample size {n} below the minimum {min}")))
    } else {
        Ok(())
    }
}

/// Solves `coverage(eta) = gamma` for an increasing `coverage` with
/// `coverage(0) = 0`.
fn solve_threshold<F>(mut coverage: F, gamma: f64, start: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = expand_up(&mut coverage, gamma, start, 2.0, 0.0)?;
    let (_, hi) = bisect_increasing(&mut coverage, gamma, lo, hi, Tolerance::absolute(ETA_WIDTH));
    Ok(hi)
}

/// Mean semi-distance with known scale: `eta = (sigma / sqrt(n)) z`.
pub fn eta_mean_known_sigma(gamma: f64, n: usize, sigma: f64) -> Result<EtaThreshold> {
    check_n(n, 1)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain(format!("scale {sigma} must be positive")));
    }
    let z = z_two_sided(gamma)?;
    Ok(EtaThreshold { eta: sigma / (n as f64).sqrt() * z, gamma, depends_on_state: true })
}

/// Probability that `S/sigma^2` lands in `[a e^{-2 eta}, a e^{2 eta}]`.
pub(crate) fn log_sigma_coverage(kind: DistributionKind, a: f64, eta: f64) -> f64 {
    let w = (2.0 * eta).exp();
    cdf_unchecked(kind, a * w) - cdf_unchecked(kind, a / w)
}

/// Log-scale semi-distance: the unique `eta > 0` with
/// `F(a e^{2 eta}) - F(a e^{-2 eta}) = gamma` for `F` the chi-squared law
/// with `n - 1` degrees of freedom.
///
/// `a` is the divisor of the scale estimate: `n` for the maximum likelihood
/// estimate, `n - 1` for the unbiased one, `c n` for the scaled one. The
/// result depends on `gamma`, `n` and `a` only.
pub fn eta_log_sigma(gamma: f64, n: usize, df_scale: f64) -> Result<EtaThreshold> {
    check_gamma(gamma)?;
    check_n(n, 2)?;
    if !(df_scale > 0.0 && df_scale.is_finite()) {
        return Err(domain(format!("df scale {df_scale} must be positive")));
    }
    let kind = DistributionKind::chi_squared((n - 1) as u32)?;
    let eta = solve_threshold(|e| log_sigma_coverage(kind, df_scale, e), gamma, 0.25)?;
    Ok(EtaThreshold { eta, gamma, depends_on_state: false })
}

/// Student-t threshold: `t` point with `n - 1` degrees of freedom.
pub fn eta_mean_t(gamma: f64, n: usize) -> Result<EtaThreshold> {
    check_n(n, 2)?;
    Ok(EtaThreshold { eta: t_two_sided(gamma, n - 1)?, gamma, depends_on_state: false })
}

/// Difference of two means with known scales:
/// `eta = sqrt(sigma1^2/n + sigma2^2/m) z`.
pub fn eta_mean_diff(gamma: f64, n: usize, m: usize, sigma1: f64, sigma2: f64) -> Result<EtaThreshold> {
    check_n(n, 1)?;
    check_n(m, 1)?;
    for s in [sigma1, sigma2] {
        if !(s > 0.0 && s.is_finite()) {
            return Err(domain(format!("scale {s} must be positive")));
        }
    }
    let z = z_two_sided(gamma)?;
    let se = (sigma1 * sigma1 / n as f64 + sigma2 * sigma2 / m as f64).sqrt();
    Ok(EtaThreshold { eta: se * z, gamma, depends_on_state: true })
}

/// Threshold for the semi-distance `|H(s1) - H(s2)|` on the maximum
/// likelihood scale estimate, at a given state.
///
/// The event `|H(sigma_hat) - H(sigma)| <= eta` is the interval
/// `sigma_hat in [H^{-1}(H(sigma) - eta), H^{-1}(H(sigma) + eta)]`, and
/// `n sigma_hat^2 / sigma^2` is chi-squared with `n - 1` degrees of
/// freedom, so each coverage evaluation costs two inversions of `H` and two
/// CDF calls.
pub fn eta_generic(gamma: f64, n: usize, h: &Antiderivative, state: &NormalState) -> Result<EtaThreshold> {
    check_gamma(gamma)?;
    check_n(n, 2)?;
    let kind = DistributionKind::chi_squared((n - 1) as u32)?;
    let sigma = state.sigma();
    let nf = n as f64;
    let h0 = h.eval(sigma);
    if !h0.is_finite() {
        return Err(domain(format!("H({sigma}) is not finite")));
    }

    let mut failure = None;
    let mut coverage = |eta: f64| -> f64 {
        let limits = h.inverse(h0 - eta, sigma).and_then(|lo| Ok((lo, h.inverse(h0 + eta, sigma)?)));
        match limits {
            Ok((lo, hi)) => {
                let r_lo = lo / sigma;
                let r_hi = hi / sigma;
                let upper = if hi.is_infinite() { 1.0 } else { cdf_unchecked(kind, nf * r_hi * r_hi) };
                upper - cdf_unchecked(kind, nf * r_lo * r_lo)
            }
            Err(e) => {
                failure.get_or_insert(e);
                // force termination of the search
                f64::INFINITY
            }
        }
    };

    let start = (h.eval(sigma * 1.1) - h0).abs().max(f64::MIN_POSITIVE);
    let eta = solve_threshold(&mut coverage, gamma, start);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(EtaThreshold { eta: eta?, gamma, depends_on_state: true })
}
