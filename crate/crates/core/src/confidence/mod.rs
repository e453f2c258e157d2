//! Semi-distances, thresholds and confidence domains.
//!
//! For a state `omega` the threshold `eta` is the smallest radius such that
//! the estimate falls within semi-distance `eta` of the quantity `pi(omega)`
//! with probability at least `gamma`. The confidence domain of a measured
//! value `x` is then every `pi(omega)` whose own threshold reaches the
//! estimate `E(x)`. Each builder in [`intervals`] resolves that set into a
//! closed form; [`construction`] keeps the semi-distance route alongside it
//! so the two can be compared.

pub mod construction;
pub mod eta;
pub mod intervals;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measurement::{NormalState, Sample};

pub use construction::{Construction, Prepared, TrueState};
pub use eta::{eta_generic, eta_log_sigma, eta_mean_diff, eta_mean_known_sigma, eta_mean_t, EtaThreshold};
pub use intervals::{
    alpha_point_reconciliation_c, interval_mean_diff, interval_mean_known_sigma, interval_mean_t,
    interval_variance, interval_variance_alpha_point, Interval,
};

/// Which scale estimate accompanies the sample mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// `sqrt(S/n)`
    Mle,
    /// `sqrt(S/(n-1))`
    Unbiased,
    /// `sqrt(S/(c n))`
    Scaled(f64),
}

impl EstimatorKind {
    pub fn validate(self) -> Result<Self> {
        match self {
            EstimatorKind::Scaled(c) if !(c > 0.0 && c.is_finite()) => {
                Err(domain(format!("estimator scale c = {c} must be positive")))
            }
            _ => Ok(self),
        }
    }

    /// The divisor of `S` inside the square root.
    pub fn df_scale(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            EstimatorKind::Mle => n,
            EstimatorKind::Unbiased => n - 1.0,
            EstimatorKind::Scaled(c) => c * n,
        }
    }

    pub fn sigma(self, sample: &Sample) -> f64 {
        (sample.sumsq() / self.df_scale(sample.len())).sqrt()
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::Mle => f.write_str("mle"),
            EstimatorKind::Unbiased => f.write_str("unbiased"),
            EstimatorKind::Scaled(c) => write!(f, "scaled:{c}"),
        }
    }
}

/// A strictly increasing antiderivative `H` of a positive weight `h` on
/// `(0, inf)`, defining `d((mu1, s1), (mu2, s2)) = |H(s2) - H(s1)|`.
#[derive(Clone)]
pub struct Antiderivative(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl Antiderivative {
    pub fn new(h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Antiderivative(Arc::new(h))
    }

    /// `H = ln`, i.e. weight `1/sigma`.
    pub fn log() -> Self {
        Antiderivative::new(f64::ln)
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        (self.0)(sigma)
    }

    /// Solves `H(s) = v` for `s > 0`, searching outward from `around`.
    ///
    /// Values below (above) everything `H` reaches on the representable
    /// positive reals map to `0` (`inf`). A NaN or a non-increasing step
    /// seen while bracketing is reported as [`Error::Bracket`].
    pub fn inverse(&self, v: f64, around: f64) -> Result<f64> {
        // search in t = ln(s / around); H(around * e^t) is increasing in t
        let g = |t: f64| self.eval(around * t.exp());
        let g0 = g(0.0);
        if g0.is_nan() {
            return Err(Error::Bracket(format!("H({around}) is NaN")));
        }
        if g0 == v {
            return Ok(around);
        }
        let up = v > g0;
        let mut inner = 0.0;
        let mut last = g0;
        let mut step = 1.0f64;
        let outer = loop {
            let t = if up { inner + step } else { inner - step };
            // e^t leaves the positive normal range past |t| ~ 708
            if t.abs() > 700.0 {
                return Ok(if up { f64::INFINITY } else { 0.0 });
            }
            let gv = g(t);
            if gv.is_nan() {
                return Err(Error::Bracket(format!("H is NaN at {}", around * t.exp())));
            }
            // equal values far out are float saturation; a flat first step
            // or any reversal means H is not increasing
            let reversed = if up { gv < last } else { gv > last };
            if reversed || (gv == last && step == 1.0) {
                return Err(Error::Bracket("H is not strictly increasing".into()));
            }
            if (up && gv >= v) || (!up && gv <= v) {
                break t;
            }
            last = gv;
            inner = t;
            step *= 2.0;
        };
        let (mut lo, mut hi) = if up { (inner, outer) } else { (outer, inner) };
        while hi - lo > 1e-15 * lo.abs().max(hi.abs()).max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(around * (0.5 * (lo + hi)).exp())
    }
}

impl fmt::Debug for Antiderivative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Antiderivative(..)")
    }
}

/// The semi-distances used by the builders.
#[derive(Debug, Clone)]
pub enum SemiDistance {
    /// `|mu1 - mu2|` on states.
    MeanAbs,
    /// `|ln sigma1 - ln sigma2|` on states.
    LogSigma,
    /// `|H(sigma2) - H(sigma1)|` on states.
    Integral(Antiderivative),
    /// `|t1 - t2| / (sigma'(x) / sqrt(n))` on the real line; depends on the
    /// measured sample through its unbiased scale.
    StudentizedMean,
    /// `|t1 - t2|` on the real line.
    Absolute,
}

impl SemiDistance {
    pub fn on_states(&self, a: &NormalState, b: &NormalState) -> Result<f64> {
        match self {
            SemiDistance::MeanAbs => Ok((a.mu() - b.mu()).abs()),
            SemiDistance::LogSigma => Ok((a.sigma().ln() - b.sigma().ln()).abs()),
            SemiDistance::Integral(h) => Ok((h.eval(b.sigma()) - h.eval(a.sigma())).abs()),
            _ => Err(domain("this semi-distance acts on real quantities, not states")),
        }
    }

    /// Distance between two real quantities given the measured sample
    /// (ignored by [`SemiDistance::Absolute`]).
    pub fn on_reals(&self, x: &Sample, a: f64, b: f64) -> Result<f64> {
        match self {
            SemiDistance::Absolute => Ok((a - b).abs()),
            SemiDistance::StudentizedMean => {
                let sd = x.unbiased_sigma()?;
                if sd == 0.0 {
                    return Err(Error::Degenerate("studentized distance needs a non-constant sample".into()));
                }
                Ok((a - b).abs() / (sd / (x.len() as f64).sqrt()))
            }
            _ => Err(domain("this semi-distance acts on states, not real quantities")),
        }
    }
}

/// A value of the target quantity: a whole state or a real feature of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    State(NormalState),
    Theta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum ConfidenceDomain {
    /// `{(mu, sigma) : |mu - center| <= slope * sigma}`
    MeanCone { center: f64, slope: f64 },
    /// `{(mu, sigma) : lo <= sigma^2 <= hi}`
    VarianceBand { lo: f64, hi: f64 },
    /// `{theta : lo <= theta <= hi}`
    ThetaInterval { lo: f64, hi: f64 },
}

impl ConfidenceDomain {
    pub fn contains(&self, p: &Point) -> Result<bool> {
        match (self, p) {
            (ConfidenceDomain::MeanCone { center, slope }, Point::State(s)) => {
                Ok((s.mu() - center).abs() <= slope * s.sigma())
            }
            (ConfidenceDomain::VarianceBand { lo, hi }, Point::State(s)) => {
                let v = s.sigma() * s.sigma();
                Ok(*lo <= v && v <= *hi)
            }
            (ConfidenceDomain::ThetaInterval { lo, hi }, Point::Theta(t)) => Ok(*lo <= *t && *t <= *hi),
            _ => Err(domain("point does not live in this domain's space")),
        }
    }

    /// `true` when every point of `self` also lies in `other`.
    pub fn is_subset_of(&self, other: &ConfidenceDomain) -> bool {
        use ConfidenceDomain::*;
        match (self, other) {
            (MeanCone { center: c1, slope: s1 }, MeanCone { center: c2, slope: s2 }) => c1 == c2 && s1 <= s2,
            (VarianceBand { lo: l1, hi: h1 }, VarianceBand { lo: l2, hi: h2 })
            | (ThetaInterval { lo: l1, hi: h1 }, ThetaInterval { lo: l2, hi: h2 }) => l2 <= l1 && h1 <= h2,
            _ => false,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ConfidenceDomain::MeanCone { .. } => "mean_cone",
            ConfidenceDomain::VarianceBand { .. } => "variance_band",
            ConfidenceDomain::ThetaInterval { .. } => "theta_interval",
        }
    }
}
