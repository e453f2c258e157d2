//! Confidence domains for the normal measurement model.
//!
//! A confidence domain is assembled from three ingredients: an estimator
//! mapping measured values to a parameter space, a quantity selecting the
//! parameter feature of interest, and a semi-distance on that space. For
//! every state the threshold `eta` is the smallest radius whose ball
//! (pulled back through the estimator) carries probability at least `gamma`;
//! the domain for a measured value is the set of quantities within their
//! threshold of the estimate.
//!
//! Modules:
//!
//! * [`specfun`]: gamma/beta special functions, distribution CDFs and
//!   quantile inversion.
//! * [`measurement`]: states, samples, sample statistics, simulation.
//! * [`estimation`]: maximum likelihood under constraint sets.
//! * [`confidence`]: semi-distances, thresholds and the interval builders.
//! * [`coverage`]: Monte Carlo frequency checks of the coverage guarantee.
//! * [`cli`]: the command-line front end.

pub mod cli;
pub mod confidence;
pub mod coverage;
pub mod error;
pub mod estimation;
pub mod measurement;
pub mod rng;
pub mod roots;
pub mod specfun;

pub use error::{Error, Result};
