//! Complex numbers stored as `(ln|z|, arg z)`.
//!
//! Coefficients such as `φ(λ)^N` and `φ(λ)^{-N/m}` leave the `f64` range for
//! the `N` the constructions need; their products do not.

// inherent float methods need std; libm covers no_std builds
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;
use core::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::complex::{wrap_phase, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    /// `ln|z|`; `-∞` for zero.
    pub log_mag: f64,
    /// `arg z` in `(-π, π]`.
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: Self = Self { log_mag: f64::NEG_INFINITY, phase: 0.0 };
    pub const ONE: Self = Self { log_mag: 0.0, phase: 0.0 };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self { log_mag, phase: wrap_phase(phase) }
    }

    pub fn from_complex(z: C64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        Self { log_mag: z.norm().ln(), phase: z.arg() }
    }

    pub fn from_real(x: f64) -> Self {
        if x >= 0.0 {
            Self::new(x.ln(), 0.0)
        } else {
            Self::new((-x).ln(), PI)
        }
    }

    /// `e^w` for complex `w`.
    pub fn exp(w: C64) -> Self {
        Self::new(w.re, w.im)
    }

    /// Principal logarithm as a complex number (`-∞` real part for zero).
    pub fn ln(self) -> C64 {
        C64::new(self.log_mag, self.phase)
    }

    pub fn to_complex(self) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        polar(self.log_mag.exp(), self.phase)
    }

    /// `|z|`, possibly infinite or zero after `exp`.
    pub fn norm(self) -> f64 {
        self.log_mag.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn powi(self, n: u64) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag * n as f64, self.phase * n as f64)
    }

    /// `z^x` for real `x`, principal branch.
    pub fn powf(self, x: f64) -> Self {
        if self.is_zero() {
            return if x == 0.0 { Self::ONE } else { Self::ZERO };
        }
        Self::new(self.log_mag * x, self.phase * x)
    }

    /// Principal `m`-th root.
    pub fn root(self, m: u32) -> Self {
        self.powf(1.0 / m as f64)
    }

    pub fn inv(self) -> Self {
        Self::new(-self.log_mag, -self.phase)
    }

    /// Scales by `e^{-shift}` before converting, for sums rescaled by their
    /// largest log-magnitude.
    pub fn to_complex_shifted(self, shift: f64) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        polar((self.log_mag - shift).exp(), self.phase)
    }

    /// Sum, computed relative to the larger magnitude. Exact opposites
    /// cancel to zero.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Self) -> Self {
        if self.log_mag == other.log_mag && wrap_phase(self.phase - other.phase + PI).abs() <= 4.0 * f64::EPSILON {
            return Self::ZERO;
        }
        sum([self, other])
    }
}

/// `r·e^{iθ}`, exact on the real axis.
fn polar(r: f64, theta: f64) -> C64 {
    if theta == 0.0 {
        C64::new(r, 0.0)
    } else if theta == PI {
        C64::new(-r, 0.0)
    } else {
        C64::from_polar(r, theta)
    }
}

/// Sum of many terms, rescaled by the largest log-magnitude.
pub fn sum<I: IntoIterator<Item = LogComplex>>(terms: I) -> LogComplex {
    let mut items: alloc::vec::Vec<LogComplex> = terms.into_iter().filter(|t| !t.is_zero()).collect();
    let Some(shift) = items.iter().map(|t| t.log_mag).reduce(f64::max) else {
        return LogComplex::ZERO;
    };
    if items.len() == 1 {
        return items.pop().unwrap();
    }
    let total: C64 = items.iter().map(|t| t.to_complex_shifted(shift)).sum();
    let out = LogComplex::from_complex(total);
    if out.is_zero() {
        out
    } else {
        LogComplex::new(out.log_mag + shift, out.phase)
    }
}

impl Mul for LogComplex {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl Div for LogComplex {
    type Output = Self;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self * rhs.inv()
    }
}

impl Neg for LogComplex {
    type Output = Self;

    fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self::new(self.log_mag, self.phase + PI)
    }
}

impl From<C64> for LogComplex {
    fn from(z: C64) -> Self {
        Self::from_complex(z)
    }
}
