//! Finite combinations of multiplicative eigenvectors `E(λ)` and the diagonal
//! action of `T` on them.
//!
//! `E(λ)E(μ) = E(λ+μ)` and `T E(λ) = φ(λ) E(λ)`, so products and operator
//! powers are exact bookkeeping on frequencies and coefficients. Vectors are
//! only turned into functions when a distance is needed.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::complex::{c64, C64};
use crate::error::{Error, Result};
use crate::funcexpr::FunctionExpr;
use crate::logcomplex::{self, LogComplex};

/// Frequencies closer than `MERGE_TOL·(1+|λ|)` are treated as equal.
pub const MERGE_TOL: f64 = 1e-12;

/// Below this `|φ(λ)|` the eigenvalue is treated as zero.
pub const PHI_ZERO: f64 = 1e-300;

pub const DEFAULT_CIRCLE_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub freq: C64,
    pub coef: LogComplex,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    re_lambda: f64,
    im_lambda: f64,
    log_mag: f64,
    phase: f64,
}

/// `Σ coef·E(freq)` with pairwise separated frequencies and no zero
/// coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpCombination {
    terms: Vec<Term>,
}

impl Serialize for ExpCombination {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|t| TermRecord {
                re_lambda: t.freq.re,
                im_lambda: t.freq.im,
                log_mag: t.coef.log_mag,
                phase: t.coef.phase,
            })
            .collect();
        records.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExpCombination {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(d)?;
        // stored verbatim so that a round trip is bit-exact
        let terms = records
            .into_iter()
            .map(|r| Term {
                freq: c64(r.re_lambda, r.im_lambda),
                coef: LogComplex { log_mag: r.log_mag, phase: r.phase },
            })
            .collect();
        Ok(Self { terms })
    }
}

fn same_freq(a: C64, b: C64) -> bool {
    (a - b).norm() <= MERGE_TOL * (1.0 + a.norm().max(b.norm()))
}

impl ExpCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `coef·E(freq)`.
    pub fn single(freq: C64, coef: C64) -> Self {
        Self::single_log(freq, LogComplex::from_complex(coef))
    }

    pub fn single_log(freq: C64, coef: LogComplex) -> Self {
        let mut out = Self::zero();
        out.push(freq, coef);
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (C64, C64)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (f, c) in terms {
            out.push(f, LogComplex::from_complex(c));
        }
        out
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coef·E(freq)`, coalescing with a stored frequency within the
    /// merge tolerance.
    pub fn push(&mut self, freq: C64, coef: LogComplex) {
        if coef.is_zero() {
            return;
        }
        if let Some(i) = self.terms.iter().position(|t| same_freq(t.freq, freq)) {
            let merged = self.terms[i].coef.add(coef);
            if merged.is_zero() {
                self.terms.remove(i);
            } else {
                self.terms[i].coef = merged;
            }
        } else {
            self.terms.push(Term { freq, coef });
        }
    }

    /// Coefficient stored at `freq`, zero if absent.
    pub fn coef_at(&self, freq: C64) -> LogComplex {
        self.terms
            .iter()
            .find(|t| same_freq(t.freq, freq))
            .map_or(LogComplex::ZERO, |t| t.coef)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.freq, t.coef);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-LogComplex::ONE))
    }

    pub fn scale(&self, s: LogComplex) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|t| Term { freq: t.freq, coef: t.coef * s }).collect() }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.scale(LogComplex::from_complex(s))
    }

    /// Product of vectors: frequencies add, coefficients multiply.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.freq + b.freq, a.coef * b.coef);
            }
        }
        out
    }

    /// `self^n`; `n = 0` gives `E(0)`.
    pub fn power(&self, n: u32) -> Self {
        let mut out = Self::single_log(C64::new(0.0, 0.0), LogComplex::ONE);
        for _ in 0..n {
            out = out.multiply(self);
        }
        out
    }

    /// Largest coefficient log-magnitude, `-∞` for the zero vector.
    pub fn max_log_mag(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.log_mag).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// How `E(λ)` is realised as a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    /// `E(λ)(z) = e^{λz}` on `ℂ`.
    TranslationExp,
    /// `E(λ)(z) = z^λ` on `Re z > 0`, principal branch.
    DilationPower,
}

impl Kernel {
    fn log_kernel(self, freq: C64, z: C64) -> Result<C64> {
        match self {
            Kernel::TranslationExp => Ok(freq * z),
            Kernel::DilationPower => {
                if z.re <= 0.0 {
                    return Err(Error::DomainError { at: z });
                }
                Ok(freq * z.ln())
            }
        }
    }

    /// `Σ coef·E(freq)(z)`.
    pub fn eval(self, a: &ExpCombination, z: C64) -> Result<C64> {
        let logs = a
            .terms
            .iter()
            .map(|t| Ok(t.coef * LogComplex::exp(self.log_kernel(t.freq, z)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(logcomplex::sum(logs).to_complex())
    }

    /// `sup |a|` over the sample points of one circle.
    pub fn circle_sup(self, a: &ExpCombination, circle: &Circle, spec: &MetricSpec) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for z in spec.sample_points(circle) {
            let v = self.eval(a, z)?.norm();
            if v.is_nan() {
                return Ok(f64::INFINITY);
            }
            sup = sup.max(v);
        }
        Ok(sup)
    }

    /// Norm-like size `d(a, 0)`.
    pub fn metric_norm(self, a: &ExpCombination, spec: &MetricSpec) -> Result<f64> {
        let mut total = 0.0;
        for (circle, w) in spec.circles.iter().zip(&spec.weights) {
            total += w * self.circle_sup(a, circle, spec)?.min(1.0);
        }
        Ok(total)
    }

    pub fn metric_distance(self, a: &ExpCombination, b: &ExpCombination, spec: &MetricSpec) -> Result<f64> {
        self.metric_norm(&a.sub(b), spec)
    }
}

#[derive(Debug, Clone)]
pub struct EigenModel {
    pub phi: FunctionExpr,
    pub kernel: Kernel,
}

/// A circle `|z − center| = radius` on which a seminorm is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    #[serde(with = "crate::complex::pair")]
    pub center: C64,
    pub radius: f64,
}

/// `d(f, g) = Σ_i w_i · min(1, sup_{circle i} |f − g|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub circles: Vec<Circle>,
    pub weights: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    DEFAULT_CIRCLE_SAMPLES
}

impl MetricSpec {
    pub fn new(circles: Vec<Circle>, weights: Vec<f64>) -> Result<Self> {
        let spec = Self { circles, weights, samples: DEFAULT_CIRCLE_SAMPLES };
        spec.validate()?;
        Ok(spec)
    }

    /// Circles `|z| = r` for each radius.
    pub fn centered(radii: &[f64], weights: &[f64]) -> Result<Self> {
        let circles = radii.iter().map(|&radius| Circle { center: C64::new(0.0, 0.0), radius }).collect();
        Self::new(circles, weights.to_vec())
    }

    /// Radii 1 and 2 about the origin with weights 1/2 and 1/4.
    pub fn default_translation() -> Self {
        Self::centered(&[1.0, 2.0], &[0.5, 0.25]).unwrap()
    }

    /// The circle `|z − 2| = 1/2` with weight 1/2, inside `Re z > 0`.
    pub fn default_dilation() -> Self {
        Self::new(vec_one(Circle { center: c64(2.0, 0.0), radius: 0.5 }), vec_one(0.5)).unwrap()
    }

    pub fn default_for(kernel: Kernel) -> Self {
        match kernel {
            Kernel::TranslationExp => Self::default_translation(),
            Kernel::DilationPower => Self::default_dilation(),
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.circles.is_empty() || self.circles.len() != self.weights.len() {
            return Err(Error::InvalidInput("metric needs one weight per circle".into()));
        }
        if self.weights.iter().any(|&w| !(w > 0.0)) || self.weights.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::InvalidInput("metric weights must be positive with sum ≤ 1".into()));
        }
        if self.circles.iter().any(|c| !(c.radius > 0.0)) || self.samples < 8 {
            return Err(Error::InvalidInput("metric circles need positive radii and ≥ 8 samples".into()));
        }
        Ok(())
    }

    pub fn sample_points(&self, circle: &Circle) -> impl Iterator<Item = C64> + '_ {
        let c = *circle;
        let n = self.samples;
        (0..n).map(move |k| c.center + C64::from_polar(c.radius, TAU * k as f64 / n as f64))
    }
}

fn vec_one<T>(x: T) -> Vec<T> {
    alloc::vec![x]
}

/// `E(λ)` with its eigenvalue cached as a logarithm, so `T^N` costs one
/// multiplication per term.
#[derive(Debug, Clone)]
pub struct Prepared {
    terms: Vec<(Term, LogComplex)>,
    phi_zero: Vec<C64>,
}

impl Prepared {
    /// `T^N` applied to the prepared vector.
    pub fn at(&self, n: u64) -> ExpCombination {
        let mut out = ExpCombination::zero();
        for (t, phi) in &self.terms {
            out.push(t.freq, t.coef * phi.powi(n));
        }
        out
    }

    /// Frequencies whose eigenvalue is below [`PHI_ZERO`]; those terms vanish
    /// for `N ≥ 1`.
    pub fn phi_zero(&self) -> &[C64] {
        &self.phi_zero
    }
}

impl EigenModel {
    pub fn new(phi: FunctionExpr, kernel: Kernel) -> Self {
        Self { phi, kernel }
    }

    pub fn eigenvalue(&self, freq: C64) -> C64 {
        self.phi.eval(freq)
    }

    pub fn prepare(&self, a: &ExpCombination) -> Prepared {
        let mut phi_zero = Vec::new();
        let terms = a
            .terms
            .iter()
            .map(|t| {
                let value = self.phi.eval(t.freq);
                let phi = if value.norm() < PHI_ZERO {
                    phi_zero.push(t.freq);
                    LogComplex::ZERO
                } else {
                    LogComplex::from_complex(value)
                };
                (*t, phi)
            })
            .collect();
        Prepared { terms, phi_zero }
    }

    /// `T^N a`, each coefficient multiplied by `φ(λ)^N` in log form.
    pub fn apply_t_power(&self, a: &ExpCombination, n: u64) -> ExpCombination {
        self.prepare(a).at(n)
    }

    /// The vector as a function value at `z`.
    pub fn eval_at(&self, a: &ExpCombination, z: C64) -> Result<C64> {
        self.kernel.eval(a, z)
    }

    pub fn circle_sup(&self, a: &ExpCombination, circle: &Circle, spec: &MetricSpec) -> Result<f64> {
        self.kernel.circle_sup(a, circle, spec)
    }

    pub fn metric_norm(&self, a: &ExpCombination, spec: &MetricSpec) -> Result<f64> {
        self.kernel.metric_norm(a, spec)
    }

    pub fn metric_distance(&self, a: &ExpCombination, b: &ExpCombination, spec: &MetricSpec) -> Result<f64> {
        self.kernel.metric_distance(a, b, spec)
    }

    /// `Σ_k t_k D^k` applied to the degree-`order` Taylor truncation of `a`,
    /// evaluated at `z`; `t` are the Taylor coefficients of φ.
    pub fn series_action_at(&self, a: &ExpCombination, taylor: &[C64], z: C64) -> C64 {
        let order = taylor.len() - 1;
        // A_n = Σ coef·λ^n, so that a(z) ≈ Σ A_n z^n / n!
        let moments: Vec<C64> = (0..=order)
            .map(|n| a.terms.iter().map(|t| t.coef.to_complex() * t.freq.powu(n as u32)).sum())
            .collect();
        let mut total = C64::new(0.0, 0.0);
        for (k, tk) in taylor.iter().enumerate() {
            // D^k of the truncation: Σ_{n ≥ k} A_n z^{n−k}/(n−k)!
            let mut inner = C64::new(0.0, 0.0);
            let mut zpow = C64::new(1.0, 0.0);
            for (j, moment) in moments.iter().enumerate().skip(k) {
                let i = j - k;
                if i > 0 {
                    zpow = zpow * z / i as f64;
                }
                inner += moment * zpow;
            }
            total += tk * inner;
        }
        total
    }

    /// `sup_{|z|=r} |T a − T_series a|` over 256 points, where the series
    /// action uses Taylor coefficients of φ up to `order`.
    pub fn taylor_oracle_check(&self, a: &ExpCombination, order: usize, r: f64) -> Result<f64> {
        if self.kernel != Kernel::TranslationExp {
            return Err(Error::InvalidInput("series oracle needs the translation kernel".into()));
        }
        let taylor = self.phi.taylor(order);
        let exact = self.apply_t_power(a, 1);
        let mut sup: f64 = 0.0;
        for k in 0..DEFAULT_CIRCLE_SAMPLES {
            let z = C64::from_polar(r, TAU * k as f64 / DEFAULT_CIRCLE_SAMPLES as f64);
            let diff = self.eval_at(&exact, z)? - self.series_action_at(a, &taylor, z);
            sup = sup.max(diff.norm());
        }
        Ok(sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::real;
    use crate::funcexpr::examples;
    use alloc::vec;

    fn trans(phi: FunctionExpr) -> EigenModel {
        EigenModel::new(phi, Kernel::TranslationExp)
    }

    fn coef(a: &ExpCombination, f: C64) -> C64 {
        a.coef_at(f).to_complex()
    }

    #[test]
    fn multiplication_adds_frequencies() {
        let p = ExpCombination::single(real(1.0), real(1.0)).multiply(&ExpCombination::single(real(2.0), real(1.0)));
        assert_eq!(p.len(), 1);
        assert!((coef(&p, real(3.0)) - real(1.0)).norm() < 1e-15);

        let (l, m) = (c64(0.3, 0.1), c64(-0.2, 0.5));
        let a = ExpCombination::from_terms([(l, real(1.0)), (m, real(1.0))]);
        let sq = a.multiply(&a);
        assert_eq!(sq.len(), 3);
        assert!((coef(&sq, l + l) - real(1.0)).norm() < 1e-14);
        assert!((coef(&sq, l + m) - real(2.0)).norm() < 1e-14);
        assert!((coef(&sq, m + m) - real(1.0)).norm() < 1e-14);
    }

    #[test]
    fn near_duplicate_frequencies_merge() {
        let nu = c64(0.7, 0.2);
        let mut a = ExpCombination::single(nu, real(1.0));
        let b = ExpCombination::single(c64(0.5, 0.2), real(1.0))
            .multiply(&ExpCombination::single(c64(0.2 + 5e-14, 0.0), real(1.0)));
        a = a.add(&b);
        assert_eq!(a.len(), 1);
        assert!((coef(&a, nu) - real(2.0)).norm() < 1e-14);
        assert!(a.sub(&a).is_empty());
    }

    #[test]
    fn t_power_examples() {
        let m = trans(examples::cos());
        let one = ExpCombination::single(real(0.0), real(1.0));
        assert_eq!(m.apply_t_power(&one, 17), one);
        let a = ExpCombination::single(real(core::f64::consts::FRAC_PI_3), real(1.0));
        let out = m.apply_t_power(&a, 2);
        assert!((coef(&out, real(core::f64::consts::FRAC_PI_3)) - real(0.25)).norm() < 1e-15);

        let m = trans(examples::exp_minus_two());
        let a = ExpCombination::single(real(3.0f64.ln()), real(1.0));
        let out = m.apply_t_power(&a, 5);
        assert!((coef(&out, real(3.0f64.ln())) - real(1.0)).norm() < 1e-14);
    }

    #[test]
    fn t_power_flags_zero_eigenvalues() {
        let m = trans(examples::exp_minus_two());
        let a = ExpCombination::single(real(2.0f64.ln()), real(1.0));
        let prep = m.prepare(&a);
        // e^{ln 2} − 2 rounds to exactly zero
        assert_eq!(prep.phi_zero().len(), 1);
        assert!(prep.at(1).is_empty());
        assert_eq!(prep.at(0), a);
    }

    #[test]
    fn eval_examples() {
        let m = trans(examples::cos());
        let one = ExpCombination::single(real(0.0), real(1.0));
        assert_eq!(m.eval_at(&one, c64(3.0, -2.0)).unwrap(), real(1.0));
        let a = ExpCombination::from_terms([(real(1.0), real(1.0)), (real(-1.0), real(1.0))]);
        let e = core::f64::consts::E;
        assert!((m.eval_at(&a, real(1.0)).unwrap() - real(e + 1.0 / e)).norm() < 1e-14);

        let d = EigenModel::new(examples::cos(), Kernel::DilationPower);
        let sq = ExpCombination::single(real(2.0), real(1.0));
        assert!((d.eval_at(&sq, real(3.0)).unwrap() - real(9.0)).norm() < 1e-13);
        assert_eq!(d.eval_at(&sq, real(-1.0)), Err(Error::DomainError { at: real(-1.0) }));
    }

    #[test]
    fn metric_examples() {
        let m = trans(examples::cos());
        let unit = MetricSpec::centered(&[1.0], &[1.0]).unwrap();
        let one = ExpCombination::single(real(0.0), real(1.0));
        assert_eq!(m.metric_distance(&one, &one, &unit).unwrap(), 0.0);
        assert_eq!(m.metric_distance(&one, &ExpCombination::zero(), &unit).unwrap(), 1.0);
        let a = ExpCombination::single(real(1.0), real(1.0));
        let b = ExpCombination::single(real(1.0 + 1e-6), real(1.0));
        assert!(m.metric_distance(&a, &b, &unit).unwrap() <= 3e-6);
    }

    #[test]
    fn metric_rejects_bad_weights() {
        assert!(MetricSpec::centered(&[1.0, 2.0], &[0.8, 0.5]).is_err());
        assert!(MetricSpec::centered(&[1.0], &[0.5, 0.5]).is_err());
        assert!(MetricSpec::centered(&[0.0], &[0.5]).is_err());
    }

    #[test]
    fn taylor_oracle_examples() {
        let m = trans(examples::cos());
        let a = ExpCombination::single(real(0.5), real(1.0));
        assert!(m.taylor_oracle_check(&a, 30, 1.0).unwrap() < 1e-10);
        let b = ExpCombination::single(real(2.0), real(1.0));
        let coarse = m.taylor_oracle_check(&b, 10, 1.0).unwrap();
        let fine = m.taylor_oracle_check(&b, 40, 1.0).unwrap();
        assert!(fine < coarse);

        let m = trans(examples::exp_minus_two());
        let one = ExpCombination::single(real(0.0), real(1.0));
        for order in [0, 5, 20] {
            assert!(m.taylor_oracle_check(&one, order, 1.0).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let a = ExpCombination::from_terms([(c64(0.1, 0.2), c64(1.0 / 3.0, -2.0)), (real(-0.7), real(1e-200))])
            .scale(LogComplex::new(900.0, 0.3));
        let text = serde_json::to_string(&a).unwrap();
        let back: ExpCombination = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        assert!(text.contains("re_lambda"));
    }

    #[test]
    fn power_matches_repeated_multiplication() {
        let a = ExpCombination::from_terms(vec![(c64(0.1, 0.0), real(0.5)), (c64(0.0, 0.3), real(-1.0))]);
        let cube = a.power(3);
        let direct = a.multiply(&a).multiply(&a);
        assert_eq!(cube.len(), direct.len());
        for t in direct.terms() {
            assert!((cube.coef_at(t.freq).to_complex() - t.coef.to_complex()).norm() < 1e-14);
        }
    }
}
