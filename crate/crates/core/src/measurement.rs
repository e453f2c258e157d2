//! The normal measurement model: states, samples and the statistics whose
//! laws define the image observables of the sample mean and the sum of
//! squared deviations.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::NormalStream;
use crate::specfun::{cdf_unchecked, DistributionKind};

/// A point `(mu, sigma)` of the state space, `sigma > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalState {
    mu: f64,
    sigma: f64,
}

impl NormalState {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(domain(format!("location {mu} is not finite")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain(format!("scale {sigma} must be positive and finite")));
        }
        Ok(NormalState { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Probability that a single measurement lands in `event`.
    pub fn prob(&self, event: &IntervalUnion) -> f64 {
        event
            .parts()
            .iter()
            .map(|&(a, b)| std_normal_mass((a - self.mu) / self.sigma, (b - self.mu) / self.sigma))
            .sum()
    }
}

/// Measured values `x = (x_1, ..., x_n)`, all finite, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("sample is empty"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("sample contains non-finite value {bad}")));
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Parses the line format shared with the CLI: one decimal float per
    /// line, blank lines and `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("not a number: {line:?}") })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: i + 1, msg: format!("non-finite value {line:?}") });
            }
            values.push(v);
        }
        Sample::new(values)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Sum of squared deviations from the sample mean.
    pub fn sumsq(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|x| (x - m) * (x - m)).sum()
    }

    /// Maximum likelihood scale `sqrt(S/n)`.
    pub fn mle_sigma(&self) -> f64 {
        (self.sumsq() / self.len() as f64).sqrt()
    }

    /// `sqrt(S/(n-1))`; needs `n >= 2`.
    pub fn unbiased_sigma(&self) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(domain("unbiased scale needs at least two values"));
        }
        Ok((self.sumsq() / (n - 1) as f64).sqrt())
    }

    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        Sample { values }
    }
}

/// Values from two independent normal measurements (sizes `n` and `m`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSample {
    pub x: Sample,
    pub y: Sample,
}

impl TwoSample {
    pub fn new(x: Sample, y: Sample) -> Self {
        TwoSample { x, y }
    }

    pub fn swapped(&self) -> Self {
        TwoSample { x: self.y.clone(), y: self.x.clone() }
    }
}

/// A finite union of closed intervals, kept sorted and disjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    parts: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(mut parts: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &parts {
            if a.is_nan() || b.is_nan() || a > b {
                return Err(domain(format!("invalid interval [{a}, {b}]")));
            }
        }
        parts.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
        for (a, b) in parts {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(IntervalUnion { parts: merged })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        IntervalUnion::new(vec![(a, b)])
    }

    pub fn parts(&self) -> &[(f64, f64)] {
        &self.parts
    }
}

fn std_normal_mass(a: f64, b: f64) -> f64 {
    let phi = |x: f64| cdf_unchecked(DistributionKind::StdNormal, x);
    // difference taken in whichever tail keeps both terms small
    if a > 0.0 {
        phi(-a) - phi(-b)
    } else {
        phi(b) - phi(a)
    }
}

/// `n` independent draws from the normal law at `state`, reproducible from
/// `seed`.
pub fn simulate_measurement(state: NormalState, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    let mut stream = NormalStream::new(seed);
    Ok(simulate_with(&mut stream, state, n))
}

pub(crate) fn simulate_with(stream: &mut NormalStream, state: NormalState, n: usize) -> Sample {
    Sample::from_values_unchecked((0..n).map(|_| stream.normal(state.mu, state.sigma)).collect())
}

/// Probability that the sample mean of `n` draws at `state` lies in `[a, b]`.
pub fn image_prob_mean(state: NormalState, n: usize, a: f64, b: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("sample size must be at least 1"));
    }
    if a.is_nan() || b.is_nan() || a > b {
        return Err(domain(format!("invalid interval [{a}, {b}]")));
    }
    let scale = (n as f64).sqrt() / state.sigma;
    Ok(std_normal_mass((a - state.mu) * scale, (b - state.mu) * scale))
}

/// Probability that the sum of squared deviations of `n` draws at `state`
/// lies in `[a, b]`; `S/sigma^2` is chi-squared with `n - 1` degrees of
/// freedom, so the location plays no role.
pub fn image_prob_sumsq(state: NormalState, n: usize, a: f64, b: f64) -> Result<f64> {
    if n < 2 {
        return Err(domain("sum of squares law needs n >= 2"));
    }
    if a.is_nan() || b.is_nan() || a < 0.0 || a > b {
        return Err(domain(format!("invalid interval [{a}, {b}] (need 0 <= a <= b)")));
    }
    let kind = DistributionKind::chi_squared((n - 1) as u32)?;
    let s2 = state.sigma * state.sigma;
    Ok(cdf_unchecked(kind, b / s2) - cdf_unchecked(kind, a / s2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn means() {
        assert_eq!(s(&[1.0, 2.0, 3.0]).mean(), 2.0);
        assert_eq!(s(&[3.5; 7]).mean(), 3.5);
        assert!((s(&[0.2, -0.4, 1.1, 0.7]).mean() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn sums_of_squares_and_scales() {
        assert_eq!(s(&[1.0, 2.0, 3.0]).sumsq(), 2.0);
        assert_eq!(s(&[-2.0; 4]).sumsq(), 0.0);
        assert_eq!(s(&[0.0, 4.0]).sumsq(), 8.0);

        assert!((s(&[1.0, 2.0, 3.0]).mle_sigma() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(s(&[5.0; 3]).mle_sigma(), 0.0);
        assert_eq!(s(&[0.0, 4.0]).mle_sigma(), 2.0);

        assert_eq!(s(&[1.0, 2.0, 3.0]).unbiased_sigma().unwrap(), 1.0);
        assert!((s(&[0.0, 4.0]).unbiased_sigma().unwrap() - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(s(&[1.5; 5]).unbiased_sigma().unwrap(), 0.0);
        assert!(s(&[1.0]).unbiased_sigma().is_err());
    }

    #[test]
    fn construction_errors() {
        assert!(Sample::new(vec![]).is_err());
        assert!(Sample::new(vec![1.0, f64::NAN]).is_err());
        assert!(NormalState::new(0.0, 0.0).is_err());
        assert!(NormalState::new(0.0, -1.0).is_err());
        assert!(NormalState::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn parse_line_format() {
        let sample = Sample::parse("# header\n1.0\n\n  2.5 \n# c\n-3e-1\n").unwrap();
        assert_eq!(sample.values(), &[1.0, 2.5, -0.3]);
        assert!(matches!(Sample::parse("1\nabc\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Sample::parse("inf\n"), Err(Error::Parse { line: 1, .. })));
        assert!(Sample::parse("# nothing\n\n").is_err());
    }

    #[test]
    fn simulation_is_deterministic_and_centred() {
        let st = NormalState::new(0.0, 1.0).unwrap();
        let a = simulate_measurement(st, 100_000, 11).unwrap();
        let b = simulate_measurement(st, 100_000, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.mean().abs() < 4.0 / (1e5f64).sqrt());
        let one = simulate_measurement(NormalState::new(3.0, 0.1).unwrap(), 1, 5).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one.values()[0].is_finite());
        assert!(simulate_measurement(st, 0, 1).is_err());
    }

    #[test]
    fn image_mean_probabilities() {
        let st = NormalState::new(0.0, 1.0).unwrap();
        let z = 1.959_963_984_540_054;
        assert!((image_prob_mean(st, 1, -z, z).unwrap() - 0.95).abs() < 1e-12);
        assert!((image_prob_mean(st, 4, -1e6, 1e6).unwrap() - 1.0).abs() < 1e-12);
        let st = NormalState::new(1.5, 2.0).unwrap();
        let b = 0.7;
        let n = 9;
        let sym = image_prob_mean(st, n, 1.5 - b, 1.5 + b).unwrap();
        let phi = cdf_unchecked(DistributionKind::StdNormal, 3.0 * b / 2.0);
        assert!((sym - (2.0 * phi - 1.0)).abs() < 1e-14);
        assert!(image_prob_mean(st, 3, 1.0, 0.0).is_err());
    }

    #[test]
    fn image_sumsq_probabilities() {
        let st = NormalState::new(0.0, 1.0).unwrap();
        let p = image_prob_sumsq(st, 3, 0.0506, 7.378).unwrap();
        assert!((p - 0.95).abs() < 1e-4);
        assert!((image_prob_sumsq(st, 5, 0.0, 1e6).unwrap() - 1.0).abs() < 1e-12);
        let moved = NormalState::new(-40.0, 1.0).unwrap();
        assert_eq!(image_prob_sumsq(moved, 3, 0.0506, 7.378).unwrap(), p);
        assert!(image_prob_sumsq(st, 1, 0.0, 1.0).is_err());
        assert!(image_prob_sumsq(st, 3, -1.0, 1.0).is_err());
    }

    #[test]
    fn interval_union_merges_and_sums() {
        let u = IntervalUnion::new(vec![(2.0, 3.0), (-1.0, 0.5), (0.0, 1.0)]).unwrap();
        assert_eq!(u.parts(), &[(-1.0, 1.0), (2.0, 3.0)]);
        let st = NormalState::new(0.0, 1.0).unwrap();
        let whole = IntervalUnion::interval(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((st.prob(&whole) - 1.0).abs() < 1e-15);
        assert!(IntervalUnion::interval(1.0, 0.0).is_err());
    }
}
