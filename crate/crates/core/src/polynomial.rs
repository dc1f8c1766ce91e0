//! Dense univariate polynomials with complex coefficients.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::complex::{pair_vec, real, C64};

/// `coeffs[i]` multiplies `x^i`. The trailing coefficient is nonzero unless
/// the list is empty (the zero polynomial).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    #[serde(with = "pair_vec")]
    coeffs: Vec<C64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| real(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(real(1.0))
    }

    /// `c · x^d`.
    pub fn monomial(d: usize, c: C64) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); d + 1];
        coeffs[d] = c;
        Self::new(coeffs)
    }

    /// `x`.
    pub fn x() -> Self {
        Self::monomial(1, real(1.0))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial counted as degree 0.
    pub fn degree_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> C64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// The polynomial `x ↦ self(x + a)`.
    pub fn shift(&self, a: C64) -> Self {
        let mut out: Vec<C64> = Vec::with_capacity(self.coeffs.len());
        for &c in self.coeffs.iter().rev() {
            // out ← out·(x + a) + c
            let mut next = vec![C64::new(0.0, 0.0); out.len() + 1];
            for (i, &o) in out.iter().enumerate() {
                next[i + 1] += o;
                next[i] += o * a;
            }
            next[0] += c;
            out = next;
        }
        Self::new(out)
    }

    /// Largest coefficient modulus, zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ |c_i| x^i`, a monotone majorant of `|self|` on `x ≥ 1`.
    pub fn abs_majorant(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.norm())
    }

    /// Drops trailing coefficients with modulus at most `tol`.
    pub fn trimmed(mut self, tol: f64) -> Self {
        while self.coeffs.last().is_some_and(|c| c.norm() <= tol) {
            self.coeffs.pop();
        }
        self
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(real(-1.0))
    }
}
