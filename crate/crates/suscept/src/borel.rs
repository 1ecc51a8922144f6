//! The Borel distribution Bo(lambda): the law of the total progeny of a
//! Galton-Watson branching process with Poisson(lambda) offspring, and the
//! limit law of the component containing a fixed vertex in G(n, lambda/n).
//!
//! Point masses are computed in log-space (j^{j-1}/j! overflows f64 near
//! j = 150 otherwise). Moments come from the moment polynomials:
//! E beta^m = p_{m+1}(1/(1-lambda)), and the size-biased variant satisfies
//! E bhat^m = (1-lambda) p_{m+2}(1/(1-lambda)).

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::families::{FamilyError, PolyCache};

/// Relative term threshold for adaptive series truncation (double precision
/// floor).
pub const SERIES_EPS: f64 = 1e-16;

/// Default safety margin subtracted from the mgf convergence bound.
pub const MGF_MARGIN: f64 = 0.01;

/// Default cap on total progeny before the sampler aborts.
pub const DEFAULT_TRUNCATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum BorelError {
    #[error("lambda must lie strictly inside (0, 1), got {0}")]
    LambdaOutOfRange(f64),
    #[error("argument j must be at least {min}, got {j}")]
    SupportOutOfRange { j: u64, min: u64 },
    #[error("t = {t} exceeds the convergence-safe bound {bound} for lambda = {lambda}")]
    MgfArgumentOutOfRange { t: f64, bound: f64, lambda: f64 },
    #[error(
        "branching-process sample exceeded the truncation cap {cap}; \
         the draw is pathological, retry or raise the cap"
    )]
    TruncationExceeded { cap: u64 },
    #[error("truncation cap must be at least 1")]
    InvalidTruncationCap,
    #[error(transparent)]
    Family(#[from] FamilyError),
}

fn check_lambda(lambda: f64) -> Result<(), BorelError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(BorelError::LambdaOutOfRange(lambda));
    }
    Ok(())
}

/// ln(j!) by direct summation. Exact enough for the tolerances used here
/// (accumulated rounding stays below 1e-11 relative for j <= 1e5).
fn ln_factorial(j: u64) -> f64 {
    (2..=j).map(|i| (i as f64).ln()).sum()
}

/// P(beta = j) = j^{j-1}/j! * lambda^{j-1} * e^{-j lambda}, j >= 1.
pub fn pmf(lambda: f64, j: u64) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    if j < 1 {
        return Err(BorelError::SupportOutOfRange { j, min: 1 });
    }
    let jf = j as f64;
    let log_p = (jf - 1.0) * jf.ln() - ln_factorial(j) + (jf - 1.0) * lambda.ln() - jf * lambda;
    Ok(log_p.exp())
}

/// P(beta' + beta'' = j) = 2 j^{j-3}/(j-2)! * lambda^{j-2} * e^{-j lambda}
/// for two independent Bo(lambda) variables, j >= 2.
pub fn pair_pmf(lambda: f64, j: u64) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    if j < 2 {
        return Err(BorelError::SupportOutOfRange { j, min: 2 });
    }
    let jf = j as f64;
    let log_p = 2f64.ln() + (jf - 3.0) * jf.ln() - ln_factorial(j - 2) + (jf - 2.0) * lambda.ln()
        - jf * lambda;
    Ok(log_p.exp())
}

/// P(bhat = j) = j P(beta = j) / E beta = (1-lambda) j P(beta = j), the
/// size-biased law.
pub fn size_biased_pmf(lambda: f64, j: u64) -> Result<f64, BorelError> {
    Ok((1.0 - lambda) * j as f64 * pmf(lambda, j)?)
}

/// E beta^m = p_{m+1}(1/(1-lambda)); m = 0 gives 1.
pub fn moment(lambda: f64, m: u64) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    if m == 0 {
        return Ok(1.0);
    }
    let mut cache = PolyCache::new();
    moment_with(&mut cache, lambda, m)
}

pub(crate) fn moment_with(cache: &mut PolyCache, lambda: f64, m: u64) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    if m == 0 {
        return Ok(1.0);
    }
    Ok(cache.p(m + 1)?.eval_f64(1.0 / (1.0 - lambda)))
}

/// Cumulants: kappa_1 = 1/(1-lambda) and kappa_m = lambda E beta^m for m >= 2.
pub fn cumulant(lambda: f64, m: u64) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    if m == 0 {
        return Err(BorelError::SupportOutOfRange { j: 0, min: 1 });
    }
    if m == 1 {
        return Ok(1.0 / (1.0 - lambda));
    }
    Ok(lambda * moment(lambda, m)?)
}

/// E bhat^m = E beta^{m+1} / E beta = (1-lambda) p_{m+2}(1/(1-lambda)).
pub fn size_biased_moment(lambda: f64, m: u64) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    if m == 0 {
        return Ok(1.0);
    }
    let mut cache = PolyCache::new();
    size_biased_moment_with(&mut cache, lambda, m)
}

pub(crate) fn size_biased_moment_with(
    cache: &mut PolyCache,
    lambda: f64,
    m: u64,
) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    if m == 0 {
        return Ok(1.0);
    }
    Ok((1.0 - lambda) * cache.p(m + 2)?.eval_f64(1.0 / (1.0 - lambda)))
}

/// Parameters for exact sampling of Bo(lambda).
#[derive(Debug, Clone, Copy)]
pub struct BorelParams {
    pub lambda: f64,
    pub truncation_cap: u64,
}

impl BorelParams {
    pub fn new(lambda: f64) -> Result<Self, BorelError> {
        Self::with_cap(lambda, DEFAULT_TRUNCATION_CAP)
    }

    pub fn with_cap(lambda: f64, truncation_cap: u64) -> Result<Self, BorelError> {
        check_lambda(lambda)?;
        if truncation_cap < 1 {
            return Err(BorelError::InvalidTruncationCap);
        }
        Ok(BorelParams {
            lambda,
            truncation_cap,
        })
    }
}

/// Poisson(lambda) by inversion. Only used for lambda < 1, where e^{-lambda}
/// cannot underflow and the expected loop length is tiny.
fn sample_poisson(lambda: f64, rng: &mut impl Rng) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut prob = (-lambda).exp();
    let mut acc = prob;
    while u > acc {
        k += 1;
        prob *= lambda / k as f64;
        acc += prob;
    }
    k
}

/// Total progeny of the branching process: the queue-free walk keeps only a
/// counter of pending individuals. Errors if the total exceeds the cap.
pub fn sample(params: &BorelParams, rng: &mut impl Rng) -> Result<u64, BorelError> {
    let mut pending = 1u64;
    let mut total = 0u64;
    while pending > 0 {
        pending -= 1;
        total += 1;
        if total > params.truncation_cap {
            return Err(BorelError::TruncationExceeded {
                cap: params.truncation_cap,
            });
        }
        pending += sample_poisson(params.lambda, rng);
    }
    Ok(total)
}

/// Tabulated pmf, moments, cumulants and size-biased moments for one lambda.
#[derive(Debug, Clone, Serialize)]
pub struct BorelMomentTable {
    pub lambda: f64,
    /// P(beta = j) for j = 1..=jmax.
    pub pmf: Vec<f64>,
    /// E beta^m for m = 0..=mmax.
    pub moments: Vec<f64>,
    /// kappa_m for m = 1..=mmax.
    pub cumulants: Vec<f64>,
    /// E bhat^m for m = 0..=mmax.
    pub size_biased_moments: Vec<f64>,
}

impl BorelMomentTable {
    pub fn compute(lambda: f64, jmax: u64, mmax: u64) -> Result<Self, BorelError> {
        check_lambda(lambda)?;
        let mut cache = PolyCache::new();
        let pmf = (1..=jmax)
            .map(|j| pmf(lambda, j))
            .collect::<Result<Vec<_>, _>>()?;
        let moments = (0..=mmax)
            .map(|m| moment_with(&mut cache, lambda, m))
            .collect::<Result<Vec<_>, _>>()?;
        let cumulants = (1..=mmax)
            .map(|m| -> Result<f64, BorelError> {
                if m == 1 {
                    Ok(1.0 / (1.0 - lambda))
                } else {
                    Ok(lambda * moment_with(&mut cache, lambda, m)?)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let size_biased_moments = (0..=mmax)
            .map(|m| size_biased_moment_with(&mut cache, lambda, m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BorelMomentTable {
            lambda,
            pmf,
            moments,
            cumulants,
            size_biased_moments,
        })
    }
}

/// Largest t for which the mgf series converges: t < lambda - 1 - ln lambda.
pub fn mgf_bound(lambda: f64) -> f64 {
    lambda - 1.0 - lambda.ln()
}

/// Checks the functional equation ln psi(t) = lambda psi(t) - lambda + t for
/// the moment generating function psi(t) = E e^{t beta}, computed by
/// adaptively truncated series. Returns the absolute residual.
pub fn mgf_residual(lambda: f64, t: f64) -> Result<f64, BorelError> {
    mgf_residual_with_margin(lambda, t, MGF_MARGIN)
}

pub fn mgf_residual_with_margin(lambda: f64, t: f64, margin: f64) -> Result<f64, BorelError> {
    check_lambda(lambda)?;
    let bound = mgf_bound(lambda) - margin;
    if t > bound {
        return Err(BorelError::MgfArgumentOutOfRange { t, bound, lambda });
    }
    let mut psi = 0.0;
    let mut log_fact = 0.0;
    let mut j = 1u64;
    loop {
        let jf = j as f64;
        log_fact += jf.ln(); // ln(j!) built incrementally
        let log_term =
            (jf - 1.0) * jf.ln() - log_fact + (jf - 1.0) * lambda.ln() - jf * lambda + t * jf;
        let term = log_term.exp();
        psi += term;
        // the summand decays geometrically once past its peak; stop when it
        // stops mattering
        if j > 8 && term < SERIES_EPS * psi {
            break;
        }
        j += 1;
    }
    Ok((psi.ln() - (lambda * psi - lambda + t)).abs())
}
