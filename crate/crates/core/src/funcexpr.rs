//! Symbolic entire functions used as operator symbols.
//!
//! Trees are built through smart constructors that fold constants, merge
//! products of exponentials and collect like terms, so that repeated
//! differentiation of the usual symbols (`cos`, `e^z − 2`, `P(e^{az})`, ...)
//! stays small.

// inherent float methods need std; libm covers no_std builds
#[allow(unused_imports)]
use num_traits::Float;
use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;


use crate::complex::{c64, real, C64};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;

/// `|φ(z)|` below this is treated as a zero of φ by [`log_second_derivative`].
pub const ZERO_VALUE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionExpr {
    Const(C64),
    /// `a·z + b`
    Affine { a: C64, b: C64 },
    Exp(Box<FunctionExpr>),
    Sin(Box<FunctionExpr>),
    Cos(Box<FunctionExpr>),
    /// `P(inner)`
    Poly(Polynomial, Box<FunctionExpr>),
    Sum(Vec<FunctionExpr>),
    Product(Vec<FunctionExpr>),
    Scale(C64, Box<FunctionExpr>),
    /// `outer(a·z + b)`
    Compose { outer: Box<FunctionExpr>, a: C64, b: C64 },
}

use FunctionExpr::*;

const ZERO: C64 = c64(0.0, 0.0);
const ONE: C64 = c64(1.0, 0.0);

impl FunctionExpr {
    /// The identity `z`.
    pub fn z() -> Self {
        Affine { a: ONE, b: ZERO }
    }

    pub fn constant(c: C64) -> Self {
        Const(c)
    }

    pub fn affine(a: C64, b: C64) -> Self {
        if a == ZERO {
            Const(b)
        } else {
            Affine { a, b }
        }
    }

    pub fn exp(inner: FunctionExpr) -> Self {
        match inner {
            Const(c) => Const(c.exp()),
            other => Exp(Box::new(other)),
        }
    }

    pub fn sin(inner: FunctionExpr) -> Self {
        match inner {
            Const(c) => Const(c.sin()),
            other => Sin(Box::new(other)),
        }
    }

    pub fn cos(inner: FunctionExpr) -> Self {
        match inner {
            Const(c) => Const(c.cos()),
            other => Cos(Box::new(other)),
        }
    }

    /// `P(inner)`; folds constant and affine cases.
    pub fn poly(p: Polynomial, inner: FunctionExpr) -> Self {
        match p.degree() {
            None => Const(ZERO),
            Some(0) => Const(p.coeff(0)),
            Some(1) => Self::sum(vec![Self::scaled(p.coeff(1), inner), Const(p.coeff(0))]),
            _ => match inner {
                Const(c) => Const(p.eval(c)),
                other => Poly(p, Box::new(other)),
            },
        }
    }

    /// `outer(a·z + b)`.
    pub fn compose_affine(outer: FunctionExpr, a: C64, b: C64) -> Self {
        match outer {
            Const(c) => Const(c),
            Affine { a: a2, b: b2 } => Self::affine(a2 * a, a2 * b + b2),
            other if a == ONE && b == ZERO => other,
            other => Compose { outer: Box::new(other), a, b },
        }
    }

    pub fn scaled(c: C64, e: FunctionExpr) -> Self {
        if c == ZERO {
            return Const(ZERO);
        }
        if c == ONE {
            return e;
        }
        match e {
            Const(d) => Const(c * d),
            Scale(d, inner) => Self::scaled(c * d, *inner),
            Affine { a, b } => Self::affine(c * a, c * b),
            other => Scale(c, Box::new(other)),
        }
    }

    /// Flattened sum with constants folded and like terms collected.
    pub fn sum(items: Vec<FunctionExpr>) -> Self {
        let mut flat = Vec::new();
        flatten_sum(items, &mut flat);

        let mut constant = ZERO;
        let mut linear: Option<(C64, C64)> = None;
        let mut collected: Vec<(C64, FunctionExpr)> = Vec::new();
        for item in flat {
            match item {
                Const(c) => constant += c,
                Affine { a, b } => {
                    let (la, lb) = linear.unwrap_or((ZERO, ZERO));
                    linear = Some((la + a, lb + b));
                }
                other => {
                    let (coef, base) = split_scale(other);
                    match collected.iter_mut().find(|(_, b)| *b == base) {
                        Some((c, _)) => *c += coef,
                        None => collected.push((coef, base)),
                    }
                }
            }
        }

        let mut out: Vec<FunctionExpr> = collected
            .into_iter()
            .filter(|(c, _)| *c != ZERO)
            .map(|(c, b)| Self::scaled(c, b))
            .collect();
        match linear {
            Some((a, b)) => {
                let lin = Self::affine(a, b + constant);
                if lin != Const(ZERO) {
                    out.push(lin);
                }
            }
            None if constant != ZERO => out.push(Const(constant)),
            None => {}
        }
        match out.len() {
            0 => Const(ZERO),
            1 => out.pop().unwrap(),
            _ => Sum(out),
        }
    }

    /// Flattened product; scalars are pulled out and exponentials merged.
    pub fn product(items: Vec<FunctionExpr>) -> Self {
        let mut flat = Vec::new();
        flatten_product(items, &mut flat);

        let mut coef = ONE;
        let mut exponent: Option<FunctionExpr> = None;
        let mut rest = Vec::new();
        for item in flat {
            let (c, base) = split_scale(item);
            coef *= c;
            match base {
                Const(c) => coef *= c,
                Exp(inner) => {
                    exponent = Some(match exponent {
                        None => *inner,
                        Some(prev) => Self::sum(vec![prev, *inner]),
                    });
                }
                other => rest.push(other),
            }
        }
        if coef == ZERO {
            return Const(ZERO);
        }
        let mut factors = Vec::with_capacity(rest.len() + 1);
        if let Some(e) = exponent {
            factors.push(Self::exp(e));
        }
        factors.extend(rest);
        // a folded exp(constant) may have turned into a constant
        let mut out = Vec::with_capacity(factors.len());
        for f in factors {
            match f {
                Const(c) => coef *= c,
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Const(coef),
            1 => Self::scaled(coef, out.pop().unwrap()),
            _ => Self::scaled(coef, Product(out)),
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Const(c) => *c,
            Affine { a, b } => a * z + b,
            Exp(g) => g.eval(z).exp(),
            Sin(g) => g.eval(z).sin(),
            Cos(g) => g.eval(z).cos(),
            Poly(p, g) => p.eval(g.eval(z)),
            Sum(items) => items.iter().map(|f| f.eval(z)).sum(),
            Product(items) => items.iter().map(|f| f.eval(z)).product(),
            Scale(c, g) => c * g.eval(z),
            Compose { outer, a, b } => outer.eval(a * z + b),
        }
    }

    fn derivative_once(&self) -> FunctionExpr {
        match self {
            Const(_) => Const(ZERO),
            Affine { a, .. } => Const(*a),
            Exp(g) => Self::product(vec![g.derivative_once(), self.clone()]),
            Sin(g) => Self::product(vec![g.derivative_once(), Self::cos((**g).clone())]),
            Cos(g) => Self::scaled(
                real(-1.0),
                Self::product(vec![g.derivative_once(), Self::sin((**g).clone())]),
            ),
            Poly(p, g) => Self::product(vec![
                g.derivative_once(),
                Self::poly(p.derivative(), (**g).clone()),
            ]),
            Sum(items) => Self::sum(items.iter().map(|f| f.derivative_once()).collect()),
            Product(items) => {
                let terms = (0..items.len())
                    .map(|i| {
                        let factors = items
                            .iter()
                            .enumerate()
                            .map(|(j, f)| if i == j { f.derivative_once() } else { f.clone() })
                            .collect();
                        Self::product(factors)
                    })
                    .collect();
                Self::sum(terms)
            }
            Scale(c, g) => Self::scaled(*c, g.derivative_once()),
            Compose { outer, a, b } => {
                Self::scaled(*a, Self::compose_affine(outer.derivative_once(), *a, *b))
            }
        }
    }

    /// Symbolic derivative of the given order; order 0 returns a clone.
    pub fn derivative(&self, order: usize) -> FunctionExpr {
        let mut out = self.clone();
        for _ in 0..order {
            out = out.derivative_once();
        }
        out
    }

    /// Taylor coefficients `φ^{(k)}(0)/k!` for `k = 0..=order`.
    pub fn taylor(&self, order: usize) -> Vec<C64> {
        let mut out = Vec::with_capacity(order + 1);
        let mut d = self.clone();
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                d = d.derivative_once();
                fact *= k as f64;
            }
            out.push(d.eval(ZERO) / fact);
        }
        out
    }

    /// Number of nodes, used to keep an eye on derivative growth.
    pub fn size(&self) -> usize {
        1 + match self {
            Const(_) | Affine { .. } => 0,
            Exp(g) | Sin(g) | Cos(g) | Poly(_, g) | Scale(_, g) => g.size(),
            Compose { outer, .. } => outer.size(),
            Sum(items) | Product(items) => items.iter().map(FunctionExpr::size).sum(),
        }
    }
}

fn flatten_sum(items: Vec<FunctionExpr>, out: &mut Vec<FunctionExpr>) {
    for item in items {
        match item {
            Sum(inner) => flatten_sum(inner, out),
            Scale(c, inner) if matches!(*inner, Sum(_)) => {
                let Sum(parts) = *inner else { unreachable!() };
                let scaled = parts.into_iter().map(|p| FunctionExpr::scaled(c, p)).collect();
                flatten_sum(scaled, out);
            }
            other => out.push(other),
        }
    }
}

fn flatten_product(items: Vec<FunctionExpr>, out: &mut Vec<FunctionExpr>) {
    for item in items {
        match item {
            Product(inner) => flatten_product(inner, out),
            Scale(c, inner) if matches!(*inner, Product(_)) => {
                out.push(Const(c));
                flatten_product(vec![*inner], out);
            }
            other => out.push(other),
        }
    }
}

fn split_scale(e: FunctionExpr) -> (C64, FunctionExpr) {
    match e {
        Scale(c, inner) => (c, *inner),
        other => (ONE, other),
    }
}

/// φ together with its first two derivatives, differentiated once up front.
#[derive(Debug, Clone)]
pub struct Jet {
    pub f: FunctionExpr,
    pub d1: FunctionExpr,
    pub d2: FunctionExpr,
}

impl Jet {
    pub fn new(f: &FunctionExpr) -> Self {
        let d1 = f.derivative(1);
        let d2 = d1.derivative(1);
        Self { f: f.clone(), d1, d2 }
    }

    /// `h''(z) = (φ''φ − φ'²)/φ²` for any local logarithm `h` of φ.
    pub fn log_second_derivative(&self, z: C64) -> Result<C64> {
        let f = self.f.eval(z);
        if f.norm() < ZERO_VALUE_FLOOR {
            return Err(Error::ZeroValue { at: z });
        }
        let r1 = self.d1.eval(z) / f;
        let r2 = self.d2.eval(z) / f;
        Ok(r2 - r1 * r1)
    }
}

/// See [`Jet::log_second_derivative`].
pub fn log_second_derivative(expr: &FunctionExpr, z: C64) -> Result<C64> {
    Jet::new(expr).log_second_derivative(z)
}

/// Largest `|φ|` on `|z| = r` and a point attaining it. `grid` equispaced
/// angles (from 0) are sampled and the best one is refined by golden-section
/// search between its neighbours. Grids below 64 points are raised to 64.
pub fn max_modulus_point(expr: &FunctionExpr, r: f64, grid: usize) -> (C64, f64) {
    max_modulus_point_about(expr, ZERO, r, grid)
}

/// Same as [`max_modulus_point`] on the circle `|z − center| = r`.
pub fn max_modulus_point_about(expr: &FunctionExpr, center: C64, r: f64, grid: usize) -> (C64, f64) {
    let grid = grid.max(64);
    if r == 0.0 {
        return (center, expr.eval(center).norm());
    }
    let at = |theta: f64| expr.eval(center + C64::from_polar(r, theta)).norm();
    let step = TAU / grid as f64;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..grid {
        let theta = step * k as f64;
        let m = at(theta);
        if m > best.1 {
            best = (theta, m);
        }
    }
    let (mut lo, mut hi) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (at(x1), at(x2));
    for _ in 0..40 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = at(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = at(x1);
        }
    }
    let (theta, m) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    if m > best.1 {
        best = (theta, m);
    }
    (center + C64::from_polar(r, best.0), best.1)
}

/// `M(r) = max |φ|` on `|z| = r`, sampled on `grid` points.
pub fn max_modulus(expr: &FunctionExpr, r: f64, grid: usize) -> f64 {
    max_modulus_point(expr, r, grid).1
}

pub const DEFAULT_MAX_MODULUS_GRID: usize = 512;
pub const DEFAULT_EXP_MULTIPLE_SAMPLES: usize = 50;
pub const DEFAULT_EXP_MULTIPLE_TOL: f64 = 1e-8;

/// Deterministic, roughly uniform points of the disk `|z| ≤ radius`
/// (a Vogel spiral).
pub fn disk_samples(n: usize, radius: f64) -> Vec<C64> {
    let golden = core::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|k| {
            let r = radius * ((k as f64 + 0.5) / n as f64).sqrt();
            C64::from_polar(r, golden * k as f64)
        })
        .collect()
}

/// `true` iff `|h''| < tol` at every sample of `|z| ≤ 2` where `|φ| > 1e-8`.
pub fn is_exponential_multiple(expr: &FunctionExpr, samples: usize, tol: f64) -> bool {
    let jet = Jet::new(expr);
    disk_samples(samples.max(20), 2.0).into_iter().all(|z| {
        if jet.f.eval(z).norm() <= 1e-8 {
            return true;
        }
        match jet.log_second_derivative(z) {
            Ok(h2) => h2.norm() < tol,
            Err(_) => true,
        }
    })
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(c) => write_complex(f, *c),
            Affine { a, b } => {
                if *a != ONE {
                    write_complex(f, *a)?;
                    f.write_str("*")?;
                }
                f.write_str("z")?;
                if *b != ZERO {
                    f.write_str("+")?;
                    write_complex(f, *b)?;
                }
                Ok(())
            }
            Exp(g) => write!(f, "exp({g})"),
            Sin(g) => write!(f, "sin({g})"),
            Cos(g) => write!(f, "cos({g})"),
            Poly(p, g) => {
                f.write_str("poly(")?;
                for (i, c) in p.coeffs().iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_complex(f, *c)?;
                }
                write!(f, ")∘({g})")
            }
            Sum(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
            Product(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "({item})")?;
                }
                Ok(())
            }
            Scale(c, g) => {
                write_complex(f, *c)?;
                write!(f, "*({g})")
            }
            Compose { outer, a, b } => {
                write!(f, "({outer})∘(")?;
                write!(f, "{}", Affine { a: *a, b: *b })?;
                f.write_str(")")
            }
        }
    }
}

fn write_complex(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "({:?})", c.re)
    } else if c.re == 0.0 {
        write!(f, "({:?}*i)", c.im)
    } else {
        write!(f, "({:?}+{:?}*i)", c.re, c.im)
    }
}

/// The three symbols that recur throughout: `cos z`, `e^z − 2` and
/// `2e^{−z} + sin z`.
pub mod examples {
    use super::*;

    pub fn cos() -> FunctionExpr {
        FunctionExpr::cos(FunctionExpr::z())
    }

    pub fn exp_minus_two() -> FunctionExpr {
        FunctionExpr::sum(vec![FunctionExpr::exp(FunctionExpr::z()), Const(real(-2.0))])
    }

    pub fn two_exp_neg_plus_sin() -> FunctionExpr {
        FunctionExpr::sum(vec![
            FunctionExpr::scaled(real(2.0), FunctionExpr::exp(FunctionExpr::affine(real(-1.0), ZERO))),
            FunctionExpr::sin(FunctionExpr::z()),
        ])
    }

    /// `c·e^{a z}`.
    pub fn exp_multiple(c: C64, a: C64) -> FunctionExpr {
        FunctionExpr::scaled(c, FunctionExpr::exp(FunctionExpr::affine(a, ZERO)))
    }

    /// `P(e^{a z})`, the translation composition symbol.
    pub fn poly_of_exp(p: Polynomial, a: C64) -> FunctionExpr {
        FunctionExpr::poly(p, FunctionExpr::exp(FunctionExpr::affine(a, ZERO)))
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(cos().eval(ZERO), ONE);
        assert!(close(exp_minus_two().eval(real(3.0f64.ln())), ONE, 1e-15));
        assert_eq!(two_exp_neg_plus_sin().eval(ZERO), real(2.0));
    }

    #[test]
    fn derivative_examples() {
        let sin = FunctionExpr::sin(FunctionExpr::z());
        assert_eq!(sin.derivative(1).eval(ZERO), ONE);
        assert_eq!(exp_minus_two().derivative(1).eval(ZERO), ONE);
        assert_eq!(cos().derivative(2).eval(ZERO), real(-1.0));
        assert_eq!(cos().derivative(0), cos());
    }

    #[test]
    fn log_second_derivative_examples() {
        let e = exp_multiple(real(3.0), c64(0.5, -1.0));
        for z in [ZERO, c64(1.0, 2.0), c64(-0.3, 0.7)] {
            assert!(log_second_derivative(&e, z).unwrap().norm() < 1e-14);
        }
        assert!(close(log_second_derivative(&cos(), ZERO).unwrap(), real(-1.0), 1e-15));
        let h = log_second_derivative(&exp_minus_two(), real(3.0f64.ln())).unwrap();
        assert!(close(h, real(-6.0), 1e-12), "{h}");
    }

    #[test]
    fn log_second_derivative_rejects_zeros() {
        let z0 = real(core::f64::consts::FRAC_PI_2);
        // cos(π/2) ≈ 6e-17
        assert!(matches!(
            log_second_derivative(&cos(), z0),
            Err(Error::ZeroValue { .. })
        ));
    }

    #[test]
    fn max_modulus_examples() {
        assert_eq!(max_modulus(&cos(), 0.0, 512), 1.0);
        assert!((max_modulus(&cos(), 1.0, 512) - 1.0f64.cosh()).abs() < 1e-3);
        assert_eq!(max_modulus(&exp_minus_two(), 0.0, 512), 1.0);
    }

    #[test]
    fn max_modulus_grid_refinement_is_monotone() {
        for f in [cos(), exp_minus_two(), two_exp_neg_plus_sin()] {
            for r in [0.5, 1.0, 2.0, 3.0] {
                let coarse = max_modulus(&f, r, 256);
                let fine = max_modulus(&f, r, 512);
                assert!(fine >= coarse);
                assert!(fine - coarse < 1e-6 * (1.0 + fine), "{f} r={r}: {coarse} vs {fine}");
            }
        }
    }

    #[test]
    fn exponential_multiple_detection() {
        assert!(is_exponential_multiple(&exp_multiple(real(3.0), real(2.0)), 50, 1e-8));
        assert!(!is_exponential_multiple(&cos(), 50, 0.5));
        assert!(!is_exponential_multiple(&exp_minus_two(), 50, 1e-8));
        assert!(!is_exponential_multiple(&two_exp_neg_plus_sin(), 50, 1e-8));
    }

    #[test]
    fn taylor_examples() {
        let t = cos().taylor(4);
        let expect = [1.0, 0.0, -0.5, 0.0, 1.0 / 24.0];
        for (a, b) in t.iter().zip(expect) {
            assert!(close(*a, real(b), 1e-15));
        }
        let t = exp_minus_two().taylor(2);
        assert_eq!(t, vec![real(-1.0), ONE, real(0.5)]);
        let t = two_exp_neg_plus_sin().taylor(1);
        assert_eq!(t, vec![real(2.0), real(-1.0)]);
    }

    #[test]
    fn high_order_derivatives_stay_small() {
        let p = Polynomial::from_real(&[-0.8, 0.3, 1.0]);
        let f = poly_of_exp(p, real(-(2.0f64.ln())));
        let d = f.derivative(40);
        assert!(d.size() < 200, "size {}", d.size());
        let f = FunctionExpr::product(vec![cos(), FunctionExpr::exp(FunctionExpr::z())]);
        assert!(f.derivative(30).size() < 200);
        assert_eq!(cos().taylor(64).len(), 65);
    }

    #[test]
    fn poly_of_exp_derivative_matches_chain_rule() {
        let p = Polynomial::from_real(&[-2.0, 1.0, 0.5]);
        let a = c64(0.3, -0.2);
        let f = poly_of_exp(p.clone(), a);
        let z = c64(0.4, 0.9);
        let w = (a * z).exp();
        let expect = p.derivative().eval(w) * a * w;
        assert!(close(f.derivative(1).eval(z), expect, 1e-13));
    }

    #[test]
    fn compose_affine_derivative() {
        let f = FunctionExpr::compose_affine(cos(), real(2.0), real(1.0));
        let z = c64(0.2, 0.1);
        let expect = -(real(2.0) * z + real(1.0)).sin() * 2.0;
        assert!(close(f.derivative(1).eval(z), expect, 1e-14));
    }
}
