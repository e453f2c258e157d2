//! Interval constructions with their thresholds precomputed.
//!
//! A [`Prepared`] construction fixes `gamma` and the sample sizes, computes
//! every state-free constant once, and then maps measured values to
//! confidence domains cheaply. This is what the coverage simulation runs in
//! its inner loop.
//!
//! [`Prepared::semi_distance_test`] evaluates the defining inequality
//! `d(E(x), pi(omega)) <= eta_omega` directly from the semi-distance and the
//! estimator, independent of the closed-form domain, so that the two can be
//! checked against each other.

use serde::{Deserialize, Serialize};

use super::eta::{chi2_equal_tails, eta_log_sigma, eta_mean_diff, eta_mean_known_sigma, t_two_sided, z_two_sided};
use super::{ConfidenceDomain, EstimatorKind, Point, SemiDistance};
use crate::error::{check_gamma, domain, Error, Result};
use crate::measurement::{NormalState, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Construction {
    /// Mean cone from `|mu1 - mu2|`, sample mean estimator.
    MeanKnownSigma,
    /// Variance band from `|ln s1 - ln s2|` with the given scale estimator.
    Variance(EstimatorKind),
    /// Equal-tails chi-squared band.
    VarianceAlphaPoint,
    /// Student-t interval for the mean.
    MeanT,
    /// Interval for `mu1 - mu2` with known scales.
    MeanDiff { sigma1: f64, sigma2: f64 },
}

impl Construction {
    pub fn is_two_sample(&self) -> bool {
        matches!(self, Construction::MeanDiff { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Construction::MeanKnownSigma => "mean-known-sigma",
            Construction::Variance(_) => "variance",
            Construction::VarianceAlphaPoint => "variance-alpha-point",
            Construction::MeanT => "mean-t",
            Construction::MeanDiff { .. } => "mean-diff",
        }
    }
}

/// The state a measurement was drawn from (a pair for two-sample problems).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrueState {
    Single(NormalState),
    Pair(NormalState, NormalState),
}

#[derive(Debug, Clone)]
pub struct Prepared {
    construction: Construction,
    gamma: f64,
    n: usize,
    m: usize,
    kind: PreparedKind,
    constants: Vec<(&'static str, f64)>,
}

#[derive(Debug, Clone, Copy)]
enum PreparedKind {
    Cone { slope: f64 },
    Band { coef_lo: f64, coef_hi: f64, df_scale: f64, eta: f64 },
    Student { factor: f64, t: f64 },
    Diff { half_width: f64 },
}

impl Prepared {
    /// `m` is the second sample size and is ignored except for
    /// [`Construction::MeanDiff`].
    pub fn new(construction: Construction, gamma: f64, n: usize, m: usize) -> Result<Self> {
        check_gamma(gamma)?;
        if n == 0 {
            return Err(domain("sample size must be at least 1"));
        }
        let nf = n as f64;
        let (kind, constants) = match construction {
            Construction::MeanKnownSigma => {
                let z = z_two_sided(gamma)?;
                let slope = z / nf.sqrt();
                (PreparedKind::Cone { slope }, vec![("z", z), ("slope", slope)])
            }
            Construction::Variance(est) => {
                let est = est.validate()?;
                if n < 2 {
                    return Err(domain("variance band needs n >= 2"));
                }
                let a = est.df_scale(n);
                let eta = eta_log_sigma(gamma, n, a)?.eta;
                let coef_lo = (-2.0 * eta).exp() / a;
                let coef_hi = (2.0 * eta).exp() / a;
                (
                    PreparedKind::Band { coef_lo, coef_hi, df_scale: a, eta },
                    vec![
                        ("eta", eta),
                        ("exp_neg_eta", (-eta).exp()),
                        ("exp_eta", eta.exp()),
                        ("df_scale", a),
                        ("coef_lo", coef_lo),
                        ("coef_hi", coef_hi),
                    ],
                )
            }
            Construction::VarianceAlphaPoint => {
                if n < 2 {
                    return Err(domain("variance band needs n >= 2"));
                }
                let (chi0, chi_inf) = chi2_equal_tails(gamma, n - 1)?;
                // the same band read as a scaled estimator with c n = sqrt(chi0 chi_inf)
                let a = (chi0 * chi_inf).sqrt();
                let eta = eta_log_sigma(gamma, n, a)?.eta;
                (
                    PreparedKind::Band { coef_lo: 1.0 / chi_inf, coef_hi: 1.0 / chi0, df_scale: a, eta },
                    vec![
                        ("chi2_lo", chi0),
                        ("chi2_hi", chi_inf),
                        ("coef_lo", 1.0 / chi_inf),
                        ("coef_hi", 1.0 / chi0),
                        ("c", a / nf),
                    ],
                )
            }
            Construction::MeanT => {
                if n < 2 {
                    return Err(domain("t interval needs n >= 2"));
                }
                let t = t_two_sided(gamma, n - 1)?;
                (PreparedKind::Student { factor: t / nf.sqrt(), t }, vec![("t", t)])
            }
            Construction::MeanDiff { sigma1, sigma2 } => {
                let z = z_two_sided(gamma)?;
                let half_width = eta_mean_diff(gamma, n, m, sigma1, sigma2)?.eta;
                (PreparedKind::Diff { half_width }, vec![("z", z), ("half_width", half_width)])
            }
        };
        Ok(Prepared { construction, gamma, n, m, kind, constants })
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn constants(&self) -> &[(&'static str, f64)] {
        &self.constants
    }

    fn check_sizes(&self, x: &Sample, y: Option<&Sample>) -> Result<()> {
        if x.len() != self.n {
            return Err(domain(format!("expected {} values, got {}", self.n, x.len())));
        }
        if self.construction.is_two_sample() {
            match y {
                Some(y) if y.len() == self.m => {}
                Some(y) => return Err(domain(format!("expected {} second values, got {}", self.m, y.len()))),
                None => return Err(domain("two-sample construction needs a second sample")),
            }
        }
        Ok(())
    }

    /// The confidence domain for measured values `x` (and `y`).
    pub fn domain(&self, x: &Sample, y: Option<&Sample>) -> Result<ConfidenceDomain> {
        self.check_sizes(x, y)?;
        Ok(match self.kind {
            PreparedKind::Cone { slope } => ConfidenceDomain::MeanCone { center: x.mean(), slope },
            PreparedKind::Band { coef_lo, coef_hi, .. } => {
                let s = nonzero_sumsq(x)?;
                ConfidenceDomain::VarianceBand { lo: coef_lo * s, hi: coef_hi * s }
            }
            PreparedKind::Student { factor, .. } => {
                nonzero_sumsq(x)?;
                let sd = x.unbiased_sigma()?;
                let c = x.mean();
                ConfidenceDomain::ThetaInterval { lo: c - factor * sd, hi: c + factor * sd }
            }
            PreparedKind::Diff { half_width } => {
                let c = x.mean() - y.expect("checked").mean();
                ConfidenceDomain::ThetaInterval { lo: c - half_width, hi: c + half_width }
            }
        })
    }

    /// The quantity `pi(omega)` this construction targets.
    pub fn quantity(&self, truth: &TrueState) -> Result<Point> {
        match (self.construction, truth) {
            (Construction::MeanDiff { .. }, TrueState::Pair(a, b)) => Ok(Point::Theta(a.mu() - b.mu())),
            (Construction::MeanT, TrueState::Single(s)) => Ok(Point::Theta(s.mu())),
            (Construction::MeanDiff { .. }, _) | (_, TrueState::Pair(..)) => {
                Err(domain("true state shape does not match the construction"))
            }
            (_, TrueState::Single(s)) => Ok(Point::State(*s)),
        }
    }

    pub fn covers(&self, x: &Sample, y: Option<&Sample>, truth: &TrueState) -> Result<bool> {
        self.domain(x, y)?.contains(&self.quantity(truth)?)
    }

    /// `(d(E(x), pi(omega)), eta_omega)` from the semi-distance definition.
    pub fn semi_distance_test(&self, x: &Sample, y: Option<&Sample>, truth: &TrueState) -> Result<(f64, f64)> {
        self.check_sizes(x, y)?;
        match (self.kind, truth) {
            (PreparedKind::Cone { .. }, TrueState::Single(omega)) => {
                // the scale component of E(x) is irrelevant to |mu1 - mu2| and is
                // zero when n = 1
                let estimate = NormalState::new(x.mean(), x.mle_sigma().max(f64::MIN_POSITIVE))?;
                let d = SemiDistance::MeanAbs.on_states(&estimate, omega)?;
                let eta = eta_mean_known_sigma(self.gamma, self.n, omega.sigma())?.eta;
                Ok((d, eta))
            }
            (PreparedKind::Band { df_scale, eta, .. }, TrueState::Single(omega)) => {
                nonzero_sumsq(x)?;
                let sigma_hat = (x.sumsq() / df_scale).sqrt();
                let estimate = NormalState::new(x.mean(), sigma_hat)?;
                Ok((SemiDistance::LogSigma.on_states(&estimate, omega)?, eta))
            }
            (PreparedKind::Student { t, .. }, TrueState::Single(omega)) => {
                Ok((SemiDistance::StudentizedMean.on_reals(x, x.mean(), omega.mu())?, t))
            }
            (PreparedKind::Diff { .. }, TrueState::Pair(a, b)) => {
                let y = y.expect("checked");
                let (s1, s2) = match self.construction {
                    Construction::MeanDiff { sigma1, sigma2 } => (sigma1, sigma2),
                    _ => unreachable!(),
                };
                let eta = eta_mean_diff(self.gamma, self.n, self.m, s1, s2)?.eta;
                let d = SemiDistance::Absolute.on_reals(x, x.mean() - y.mean(), a.mu() - b.mu())?;
                Ok((d, eta))
            }
            _ => Err(domain("true state shape does not match the construction")),
        }
    }
}

fn nonzero_sumsq(x: &Sample) -> Result<f64> {
    let s = x.sumsq();
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::Degenerate("sum of squared deviations is zero".into()))
    }
}
