//! The polynomial families behind the component-moment asymptotics.
//!
//! All families live in one memoized cache:
//!
//! * `p_k` — moment polynomials: the mean of the k-th component-size moment
//!   at relative density nt is asymptotically n * p_k(1/(1-nt)). Built by
//!   the linear recursion p_{k+1} = x p_k + (x^3 - x^2) p_k', seeded with
//!   p_2(x) = x.
//! * `q_k` — the reduced form p_k = x^k q_k, built independently by the
//!   quadratic recursion q_k'(x) = 1/2 sum_{l=2}^{k-2} C(k,l) q_{l+1} q_{k+1-l}
//!   anchored by q_k(1) = 1. The two routes must agree coefficient for
//!   coefficient; tests cross-check them.
//! * `hp_{k,l}` — covariance polynomials: hp_{k,l} = p_{k+l} - p_{k+1} p_{l+1} / x.
//! * `pi_k` — one-vertex increment: pi_k = p_k + (x^2 - x) p_k' = p_{k+1} / x.
//! * `r_m` — moment-generating-function derivative polynomials; r_0 = 1 and
//!   r_{m+1} = x r_m + (x^3 - x^2) r_m'. Identity: r_m = p_{m+1} for m >= 1.
//! * `px_k`, `py_k` — quadratic-variation drift polynomials for the scaled
//!   martingale fluctuations: px_k = x^2 sum 1/2 C(k,l) C(k,m) q_{l+m+1} q_{2k+1-l-m},
//!   py_k' = px_k / x^2 with py_k(1) = 0.
//!
//! The p, q, pi, hp and r families provably have integer coefficients and the
//! cache asserts as much after construction. py_k does not (py_4 already has
//! denominator 3), so no integrality is enforced for px/py.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::One;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::poly::{binomial, double_factorial, PolyError, Polynomial};

/// Indices above this take deliberately long to compute (coefficients grow
/// like (2k-5)!!); the cache refuses them unless constructed with a larger
/// explicit bound.
pub const DEFAULT_MAX_INDEX: u64 = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("{family}_{index} is not defined: index must be at least {min}")]
    IndexBelowRange {
        family: &'static str,
        index: u64,
        min: u64,
    },
    #[error(
        "index {index} exceeds the cache bound {max}; construct the cache \
         with a larger bound to allow it"
    )]
    IndexAboveBound { index: u64, max: u64 },
    #[error("construction of {family}_{index} failed: {source}")]
    Construction {
        family: &'static str,
        index: u64,
        source: PolyError,
    },
}

/// Memoized builder for every polynomial family. Queries are deterministic:
/// repeated calls return identical coefficient lists.
#[derive(Debug, Default)]
pub struct PolyCache {
    max_index: u64,
    p: BTreeMap<u64, Polynomial>,
    q: BTreeMap<u64, Polynomial>,
    hp: BTreeMap<(u64, u64), Polynomial>,
    pi: BTreeMap<u64, Polynomial>,
    r: BTreeMap<u64, Polynomial>,
    px: BTreeMap<u64, Polynomial>,
    py: BTreeMap<u64, Polynomial>,
}

impl PolyCache {
    pub fn new() -> Self {
        Self::with_max_index(DEFAULT_MAX_INDEX)
    }

    /// Explicit override of the index guardrail.
    pub fn with_max_index(max_index: u64) -> Self {
        PolyCache {
            max_index,
            ..Default::default()
        }
    }

    fn check_range(&self, family: &'static str, index: u64, min: u64) -> Result<(), FamilyError> {
        if index < min {
            return Err(FamilyError::IndexBelowRange { family, index, min });
        }
        if index > self.max_index {
            return Err(FamilyError::IndexAboveBound {
                index,
                max: self.max_index,
            });
        }
        Ok(())
    }

    /// p_k for k >= 2, by the linear recursion.
    pub fn p(&mut self, k: u64) -> Result<Polynomial, FamilyError> {
        self.check_range("p", k, 2)?;
        for j in 2..=k {
            if self.p.contains_key(&j) {
                continue;
            }
            let poly = if j == 2 {
                Polynomial::x()
            } else {
                let prev = &self.p[&(j - 1)];
                let shift = Polynomial::from_int_coeffs(&[0, 0, -1, 1]); // x^3 - x^2
                &(&Polynomial::x() * prev) + &(&shift * &prev.derivative())
            };
            debug_assert_eq!(poly.degree(), Some((2 * j - 3) as usize));
            assert!(
                poly.has_integer_coeffs(),
                "p_{j} must have integer coefficients"
            );
            self.p.insert(j, poly);
        }
        Ok(self.p[&k].clone())
    }

    /// q_k for k >= 3, by the quadratic recursion with anchor q_k(1) = 1.
    pub fn q(&mut self, k: u64) -> Result<Polynomial, FamilyError> {
        self.check_range("q", k, 3)?;
        for j in 3..=k {
            if self.q.contains_key(&j) {
                continue;
            }
            // q_j' = 1/2 sum_{l=2}^{j-2} C(j,l) q_{l+1} q_{j+1-l}; all the
            // indices l+1 and j+1-l lie in [3, j-1], so lower entries exist.
            let mut rhs = Polynomial::zero();
            for l in 2..=j.saturating_sub(2) {
                let c = BigRational::new(binomial(j, l), BigInt::from(2));
                let term = &self.q[&(l + 1)] * &self.q[&(j + 1 - l)];
                rhs = &rhs + &term.scale(&c);
            }
            let anti = rhs.antiderivative();
            let constant = BigRational::one() - anti.eval_i64(1);
            let poly = &anti + &Polynomial::constant(constant);
            debug_assert_eq!(
                poly.degree().unwrap_or(0),
                (j - 3) as usize,
                "q_{j} must have degree {}",
                j - 3
            );
            assert!(
                poly.has_integer_coeffs(),
                "q_{j} must have integer coefficients"
            );
            self.q.insert(j, poly);
        }
        Ok(self.q[&k].clone())
    }

    /// Covariance polynomial hp_{k,l} = p_{k+l} - p_{k+1} p_{l+1} / x, for
    /// k, l >= 2. Symmetric in (k, l).
    pub fn hp(&mut self, k: u64, l: u64) -> Result<Polynomial, FamilyError> {
        self.check_range("hp", k, 2)?;
        self.check_range("hp", l, 2)?;
        self.check_range("hp", k + l, 4)?;
        let key = (k.min(l), k.max(l));
        if let Some(poly) = self.hp.get(&key) {
            return Ok(poly.clone());
        }
        let sum = self.p(k + l)?;
        let prod = &self.p(k + 1)? * &self.p(l + 1)?;
        let quotient = prod
            .div_xpow(1)
            .map_err(|source| FamilyError::Construction {
                family: "hp",
                index: k + l,
                source,
            })?;
        let poly = &sum - &quotient;
        debug_assert_eq!(poly.degree(), Some((2 * k + 2 * l - 3) as usize));
        assert!(
            poly.has_integer_coeffs(),
            "hp_{k},{l} must have integer coefficients"
        );
        self.hp.insert(key, poly.clone());
        Ok(poly)
    }

    /// One-vertex increment pi_k = p_k + (x^2 - x) p_k' for k >= 2; must also
    /// equal p_{k+1} / x exactly.
    pub fn pi(&mut self, k: u64) -> Result<Polynomial, FamilyError> {
        self.check_range("pi", k, 2)?;
        if let Some(poly) = self.pi.get(&k) {
            return Ok(poly.clone());
        }
        let pk = self.p(k)?;
        let shift = Polynomial::from_int_coeffs(&[0, -1, 1]); // x^2 - x
        let direct = &pk + &(&shift * &pk.derivative());
        let via_division =
            self.p(k + 1)?
                .div_xpow(1)
                .map_err(|source| FamilyError::Construction {
                    family: "pi",
                    index: k,
                    source,
                })?;
        assert_eq!(
            direct, via_division,
            "the two constructions of pi_{k} disagree"
        );
        debug_assert_eq!(direct.degree(), Some((2 * k - 2) as usize));
        self.pi.insert(k, direct.clone());
        Ok(direct)
    }

    /// r_m for m >= 0: r_0 = 1, r_{m+1} = x r_m + (x^3 - x^2) r_m'.
    pub fn r(&mut self, m: u64) -> Result<Polynomial, FamilyError> {
        self.check_range("r", m, 0)?;
        for j in 0..=m {
            if self.r.contains_key(&j) {
                continue;
            }
            let poly = if j == 0 {
                Polynomial::one()
            } else {
                let prev = &self.r[&(j - 1)];
                let shift = Polynomial::from_int_coeffs(&[0, 0, -1, 1]);
                &(&Polynomial::x() * prev) + &(&shift * &prev.derivative())
            };
            assert!(
                poly.has_integer_coeffs(),
                "r_{j} must have integer coefficients"
            );
            self.r.insert(j, poly);
        }
        Ok(self.r[&m].clone())
    }

    /// Quadratic-variation drift polynomial
    /// px_k = x^2 sum_{l,m=1}^{k-1} 1/2 C(k,l) C(k,m) q_{l+m+1} q_{2k+1-l-m},
    /// of degree 2k - 2, for k >= 2.
    pub fn px(&mut self, k: u64) -> Result<Polynomial, FamilyError> {
        self.check_range("px", k, 2)?;
        // q indices reach 2k - 1
        self.check_range("px", 2 * k - 1, 3)?;
        if let Some(poly) = self.px.get(&k) {
            return Ok(poly.clone());
        }
        let mut sum = Polynomial::zero();
        for l in 1..k {
            for m in 1..k {
                let c = BigRational::new(binomial(k, l) * binomial(k, m), BigInt::from(2));
                let term = &self.q(l + m + 1)? * &self.q(2 * k + 1 - l - m)?;
                sum = &sum + &term.scale(&c);
            }
        }
        let poly = sum.mul_xpow(2);
        debug_assert_eq!(poly.degree(), Some((2 * k - 2) as usize));
        self.px.insert(k, poly.clone());
        Ok(poly)
    }

    /// py_k, defined by py_k'(x) = px_k(x) / x^2 and py_k(1) = 0; degree 2k - 3.
    pub fn py(&mut self, k: u64) -> Result<Polynomial, FamilyError> {
        self.check_range("py", k, 2)?;
        if let Some(poly) = self.py.get(&k) {
            return Ok(poly.clone());
        }
        let integrand = self
            .px(k)?
            .div_xpow(2)
            .map_err(|source| FamilyError::Construction {
                family: "py",
                index: k,
                source,
            })?;
        let anti = integrand.antiderivative();
        let constant = -anti.eval_i64(1);
        let poly = &anti + &Polynomial::constant(constant);
        debug_assert_eq!(poly.degree(), Some((2 * k - 3) as usize));
        self.py.insert(k, poly.clone());
        Ok(poly)
    }
}

/// Leading coefficient of hp_{k,l}:
/// c_{k,l} = (2k+2l-5)!! - (2k-3)!! (2l-3)!!, with (-1)!! = 1.
pub fn leading_constant_c(k: u64, l: u64) -> BigInt {
    double_factorial(2 * (k + l) as i64 - 5)
        - double_factorial(2 * k as i64 - 3) * double_factorial(2 * l as i64 - 3)
}

/// One row of the asymptotic-variance conjecture comparison.
#[derive(Debug, Clone)]
pub struct ConjectureEntry {
    pub k: u64,
    pub l: u64,
    /// The asymptotic variance/covariance polynomial qm_{k,l} obtained from
    /// the martingale route, stored verbatim as stated.
    pub stated: Polynomial,
    /// hp_{k,l} from the covariance route.
    pub computed: Polynomial,
    /// (power, stated coefficient, computed coefficient) wherever they differ.
    pub diffs: Vec<(usize, BigRational, BigRational)>,
}

impl ConjectureEntry {
    pub fn identical(&self) -> bool {
        self.diffs.is_empty()
    }
}

/// Compares the stated asymptotic-variance polynomials qm_2, qm_3 and
/// qm_{2,3} against hp_{2,2}, hp_{3,3} and hp_{2,3}. The qm_2 entry differs
/// from hp_{2,2} in the x^4 term; the comparison reports the discrepancy
/// verbatim and makes no pass/fail judgment.
pub fn conjecture_report(cache: &mut PolyCache) -> Result<Vec<ConjectureEntry>, FamilyError> {
    let stated: [(u64, u64, Polynomial); 3] = [
        (2, 2, Polynomial::from_int_coeffs(&[0, 0, 0, 0, 0, 2])),
        (
            3,
            3,
            Polynomial::from_int_coeffs(&[0, 0, 0, 0, 0, 0, -24, 126, -198, 96]),
        ),
        (
            2,
            3,
            Polynomial::from_int_coeffs(&[0, 0, 0, 0, 0, 6, -18, 12]),
        ),
    ];
    let mut entries = Vec::new();
    for (k, l, stated) in stated {
        let computed = cache.hp(k, l)?;
        let top = stated
            .degree()
            .unwrap_or(0)
            .max(computed.degree().unwrap_or(0));
        let diffs = (0..=top)
            .filter_map(|i| {
                let a = stated.coeff(i);
                let b = computed.coeff(i);
                (a != b).then_some((i, a, b))
            })
            .collect();
        entries.push(ConjectureEntry {
            k,
            l,
            stated,
            computed,
            diffs,
        });
    }
    Ok(entries)
}
