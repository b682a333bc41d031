//! Finite Laurent polynomials `Σ c_e z^e`, `e ∈ ℤ`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Laurent {
    terms: BTreeMap<i32, Complex64>,
}

impl Laurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Complex64, e: i32) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::default() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    /// Sum of `(coefficient, exponent)` pairs; repeated exponents add up.
    pub fn from_terms(terms: impl IntoIterator<Item = (Complex64, i32)>) -> Self {
        let mut out = Self::zero();
        for (c, e) in terms {
            out.add_term(c, e);
        }
        out
    }

    /// `c_3 z^{-3} + c_4 z^{-4} + ...` from `[c_3, c_4, ...]`.
    pub fn from_negative_tail(coeffs: &[Complex64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, c)| (*c, -(i as i32) - 3)))
    }

    fn add_term(&mut self, c: Complex64, e: i32) {
        let v = self.terms.entry(e).or_default();
        *v += c;
        if *v == Complex64::default() {
            self.terms.remove(&e);
        }
    }

    /// Nonzero terms as `(exponent, coefficient)`, ascending in the exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn coeff(&self, e: i32) -> Complex64 {
        self.terms.get(&e).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_power(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_power(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    /// The single term of a monomial, or `None`.
    pub fn as_monomial(&self) -> Option<(Complex64, i32)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(e, c)| (*c, *e))
        } else {
            None
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z == Complex64::default() && self.min_power().is_some_and(|e| e < 0) {
            return Err(Error::ZeroDivisor { z });
        }
        Ok(self.terms.iter().map(|(e, c)| c * z.powi(*e)).sum())
    }

    /// Division, allowed only by a nonzero monomial.
    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        let (c, e) = rhs
            .as_monomial()
            .ok_or_else(|| Error::Parse("division is only supported by a single nonzero term".into()))?;
        Ok(Self { terms: self.terms.iter().map(|(k, v)| (k - e, v / c)).collect() })
    }

    /// Integer power; negative exponents require a monomial.
    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return Self::constant(Complex64::new(1.0, 0.0)).checked_div(&self.powi(-n)?);
        }
        let mut acc = Self::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            acc = &acc * self;
        }
        Ok(acc)
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: Self) -> Laurent {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(c, e);
        }
        out
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: Self) -> Laurent {
        self + &(-rhs)
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: Self) -> Laurent {
        let mut out = Laurent::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                out.add_term(x * y, a + b);
            }
        }
        out
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        Laurent { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}
