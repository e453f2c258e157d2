//! Maximum likelihood for the normal family under a constraint set.
//!
//! The inferred state maximizes the density of the observed sample over the
//! admissible states. Three constraint sets are supported: the full state
//! space, a known scale, and a known location. When the maximizing scale
//! would be zero the supremum is not attained inside the state space and an
//! [`Error::Degenerate`] is returned instead.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::measurement::{NormalState, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConstraintSet {
    Full,
    FixedSigma(f64),
    FixedMu(f64),
}

impl ConstraintSet {
    pub fn contains(&self, state: &NormalState) -> bool {
        match *self {
            ConstraintSet::Full => true,
            ConstraintSet::FixedSigma(s) => state.sigma() == s,
            ConstraintSet::FixedMu(m) => state.mu() == m,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub state: NormalState,
    pub log_likelihood: f64,
}

/// `-n ln(sqrt(2 pi) sigma) - sum (x_k - mu)^2 / (2 sigma^2)`.
pub fn log_likelihood(sample: &Sample, state: &NormalState) -> f64 {
    let n = sample.len() as f64;
    let (mu, sigma) = (state.mu(), state.sigma());
    let ss: f64 = sample.values().iter().map(|x| (x - mu) * (x - mu)).sum();
    -n * ((2.0 * PI).sqrt() * sigma).ln() - ss / (2.0 * sigma * sigma)
}

/// Log-likelihood for raw parameters; rejects `sigma <= 0`.
pub fn log_likelihood_at(sample: &Sample, mu: f64, sigma: f64) -> Result<f64> {
    let state = NormalState::new(mu, sigma)?;
    Ok(log_likelihood(sample, &state))
}

pub fn mle(sample: &Sample, k: ConstraintSet) -> Result<MleResult> {
    let n = sample.len() as f64;
    let state = match k {
        ConstraintSet::Full => {
            let sigma = sample.mle_sigma();
            if sigma == 0.0 {
                return Err(Error::Degenerate("constant sample has no maximum likelihood scale".into()));
            }
            NormalState::new(sample.mean(), sigma)?
        }
        ConstraintSet::FixedSigma(sigma1) => {
            if !(sigma1 > 0.0 && sigma1.is_finite()) {
                return Err(domain(format!("fixed scale {sigma1} must be positive")));
            }
            NormalState::new(sample.mean(), sigma1)?
        }
        ConstraintSet::FixedMu(mu1) => {
            if !mu1.is_finite() {
                return Err(domain(format!("fixed location {mu1} is not finite")));
            }
            let ss: f64 = sample.values().iter().map(|x| (x - mu1) * (x - mu1)).sum();
            if ss == 0.0 {
                return Err(Error::Degenerate(format!("every value equals the fixed location {mu1}")));
            }
            NormalState::new(mu1, (ss / n).sqrt())?
        }
    };
    Ok(MleResult { log_likelihood: log_likelihood(sample, &state), state })
}
