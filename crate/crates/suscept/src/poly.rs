//! Dense univariate polynomials with exact rational coefficients.
//!
//! Coefficients are stored from degree 0 upward and kept canonical: the
//! highest stored coefficient is nonzero, and the zero polynomial has an
//! empty coefficient list. All arithmetic is exact over `BigRational`, so
//! recursions that antidifferentiate (and therefore pass through transient
//! denominators) lose nothing.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    /// Division by x^power left a nonzero remainder.
    #[error("polynomial is not divisible by x^{power}: coefficient of x^{offending} is nonzero")]
    InexactDivision { power: usize, offending: usize },
}

/// Dense univariate polynomial over the rationals, canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial::constant(BigRational::one())
    }

    /// The monomial x.
    pub fn x() -> Self {
        Polynomial::monomial(BigRational::one(), 1)
    }

    pub fn constant(c: BigRational) -> Self {
        Polynomial { coeffs: vec![c] }.into_canonical()
    }

    pub fn constant_i64(c: i64) -> Self {
        Polynomial::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// c * x^power.
    pub fn monomial(c: BigRational, power: usize) -> Self {
        if c.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![BigRational::zero(); power + 1];
        coeffs[power] = c;
        Polynomial { coeffs }
    }

    /// Builds from coefficients listed from degree 0 upward.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        Polynomial { coeffs }.into_canonical()
    }

    /// Convenience constructor from integer coefficients, degree 0 upward.
    pub fn from_int_coeffs(coeffs: &[i64]) -> Self {
        Polynomial::from_coeffs(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    fn into_canonical(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of x^i (zero beyond the stored range).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Coefficients from degree 0 upward (canonical, no trailing zeros).
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn leading_coeff(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    /// True when every coefficient has denominator 1.
    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplies by x^power (shifts coefficients up).
    pub fn mul_xpow(&self, power: usize) -> Self {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![BigRational::zero(); power];
        coeffs.extend(self.coeffs.iter().cloned());
        Polynomial { coeffs }
    }

    /// Exact division by x^power; errors if any lower coefficient is nonzero.
    pub fn div_xpow(&self, power: usize) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Ok(Polynomial::zero());
        }
        for (i, c) in self.coeffs.iter().take(power).enumerate() {
            if !c.is_zero() {
                return Err(PolyError::InexactDivision {
                    power,
                    offending: i,
                });
            }
        }
        if self.coeffs.len() <= power {
            return Ok(Polynomial::zero());
        }
        Ok(Polynomial {
            coeffs: self.coeffs[power..].to_vec(),
        })
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect();
        Polynomial { coeffs }.into_canonical()
    }

    /// Antiderivative with constant term 0.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(BigRational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / BigRational::from_integer(BigInt::from(i + 1)));
        }
        Polynomial { coeffs }.into_canonical()
    }

    /// Exact evaluation by Horner's scheme.
    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_i64(&self, x: i64) -> BigRational {
        self.eval(&BigRational::from_integer(BigInt::from(x)))
    }

    /// Floating evaluation by Horner's scheme.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// Coefficients as decimal strings from degree 0 upward ("a/b" when the
    /// coefficient is not an integer).
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rational_string).collect()
    }
}

fn rational_string(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Canonical text rendering: descending powers, explicit signs, caret
/// exponents, e.g. "3x^5 - 2x^4". The zero polynomial renders as "0".
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_part = if mag.is_one() && i > 0 {
                None
            } else if mag.denom().is_one() {
                Some(mag.numer().to_string())
            } else {
                Some(format!("({}/{})", mag.numer(), mag.denom()))
            };
            match (coeff_part, i) {
                (None, 1) => write!(f, "x")?,
                (None, _) => write!(f, "x^{i}")?,
                (Some(s), 0) => write!(f, "{s}")?,
                (Some(s), 1) => write!(f, "{s}x")?,
                (Some(s), _) => write!(f, "{s}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) + rhs.coeff(i));
        }
        Polynomial { coeffs }.into_canonical()
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(self.coeff(i) - rhs.coeff(i));
        }
        Polynomial { coeffs }.into_canonical()
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }.into_canonical()
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

/// Exact binomial coefficient C(n, k).
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Double factorial n!! with the convention n!! = 1 for n <= 0 (covers the
/// (-1)!! = 1 case).
pub fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut i = n;
    while i > 1 {
        acc *= BigInt::from(i);
        i -= 2;
    }
    acc
}

/// Factorial n!.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}
