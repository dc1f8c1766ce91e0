//! Polynomial-geometric sequences `u_k = Σ_j Q_j(k) λ_j^k` in `ℓ¹(ℕ)` under
//! the Cauchy product and polynomials of the backward shift.
//!
//! Products are computed in closed form:
//!
//! * equal bases: `Σ_{j≤k} Q(j)R(k−j)` expands into power sums `S_p(k)`;
//! * distinct bases: `(Qλ^k) ⋆ (μ^k) = (Rλ^k) + B(μ^k)` where
//!   `R(k) − (μ/λ)R(k−1) = Q(k)` and `B = Q(0) − R(0)`. A general `R(k)μ^k`
//!   is first rewritten in the basis `C(k+i, i)μ^k = (μ^k)^{⋆(i+1)}`.
//!
//! A term with base 0 is `Q(0)δ₀` and is stored with a constant polynomial.

use alloc::vec;
use alloc::vec::Vec;

// inherent float methods need std; libm covers no_std builds
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::complex::{binomial, c64, real, C64};
use crate::error::{Error, Result};
use crate::faulhaber;
use crate::logcomplex::LogComplex;
use crate::polynomial::Polynomial;

/// Bases closer than this (and not equal) are a collision.
pub const BASE_TOL: f64 = 1e-12;

const ZERO: C64 = c64(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyGeomTerm {
    pub coeffs: Polynomial,
    #[serde(with = "crate::complex::pair")]
    pub base: C64,
}

/// `Σ_j Q_j(k) λ_j^k` with distinct bases in the open unit disk.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyGeomCombination {
    terms: Vec<PolyGeomTerm>,
}

fn near(a: C64, b: C64) -> bool {
    (a - b).norm() <= BASE_TOL
}

fn canonical(q: Polynomial, base: C64) -> Polynomial {
    if base == ZERO {
        Polynomial::constant(q.eval(ZERO))
    } else {
        q
    }
}

impl PolyGeomCombination {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `(Q(k) λ^k)`; requires `|λ| < 1`.
    pub fn term(q: Polynomial, base: C64) -> Result<Self> {
        let mut out = Self::zero();
        out.push(q, base)?;
        Ok(out)
    }

    /// `c·(λ^k)`.
    pub fn geometric(c: C64, base: C64) -> Result<Self> {
        Self::term(Polynomial::constant(c), base)
    }

    /// `c·(k^d λ^k)`.
    pub fn monomial(d: usize, c: C64, base: C64) -> Result<Self> {
        Self::term(Polynomial::monomial(d, c), base)
    }

    pub fn terms(&self) -> &[PolyGeomTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Checks the representation invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            if !(t.base.norm() < 1.0) {
                return Err(Error::InvalidInput("bases must satisfy |λ| < 1".into()));
            }
            for u in &self.terms[..i] {
                if near(u.base, t.base) {
                    return Err(Error::BaseCollision { first: u.base, second: t.base });
                }
            }
        }
        Ok(())
    }

    /// Adds `(Q(k)λ^k)`, merging into an equal base. A base within the
    /// tolerance of a stored one but not equal to it is a collision.
    pub fn push(&mut self, q: Polynomial, base: C64) -> Result<()> {
        if !(base.norm() < 1.0) {
            return Err(Error::InvalidInput("bases must satisfy |λ| < 1".into()));
        }
        let q = canonical(q, base);
        if q.is_zero() {
            return Ok(());
        }
        match self.terms.iter().position(|t| near(t.base, base)) {
            Some(i) if self.terms[i].base != base => {
                Err(Error::BaseCollision { first: self.terms[i].base, second: base })
            }
            Some(i) => {
                let sum = &self.terms[i].coeffs + &q;
                if sum.is_zero() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].coeffs = sum;
                }
                Ok(())
            }
            None => {
                self.terms.push(PolyGeomTerm { coeffs: q, base });
                Ok(())
            }
        }
    }

    /// Polynomial attached to `base`, zero if absent.
    pub fn coeffs_at(&self, base: C64) -> Polynomial {
        self.terms
            .iter()
            .find(|t| t.base == base)
            .map_or_else(Polynomial::zero, |t| t.coeffs.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.coeffs.clone(), t.base)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(real(-1.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == ZERO {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| PolyGeomTerm { coeffs: t.coeffs.scale(s), base: t.base })
                .collect(),
        }
    }

    /// Largest polynomial degree over all terms.
    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.coeffs.degree_or_zero()).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        for a in &self.terms {
            for b in &other.terms {
                if a.base != b.base && near(a.base, b.base) {
                    return Err(Error::BaseCollision { first: a.base, second: b.base });
                }
            }
        }
        Ok(())
    }
}

/// `Σ_{j=0}^{k} Q(j) R(k−j)` as a polynomial in `k`.
fn equal_base_convolution(q: &Polynomial, r: &Polynomial) -> Polynomial {
    let (Some(dq), Some(dr)) = (q.degree(), r.degree()) else {
        return Polynomial::zero();
    };
    let sums = faulhaber::power_sum_polys(dq + dr);
    let mut out = Polynomial::zero();
    // R(k−j) = Σ_i r_i Σ_t C(i,t) k^{i−t} (−j)^t
    for (i, &ri) in r.coeffs().iter().enumerate() {
        if ri == ZERO {
            continue;
        }
        for t in 0..=i {
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            let c = ri * binomial(i, t) * sign;
            // Σ_j Q(j) j^t = Σ_q q_q S_{q+t}(k)
            let mut inner = Polynomial::zero();
            for (qi, &qc) in q.coeffs().iter().enumerate() {
                if qc != ZERO {
                    inner = &inner + &sums[qi + t].scale(qc);
                }
            }
            out = &out + &(&inner * &Polynomial::monomial(i - t, c));
        }
    }
    out
}

/// `Q(k) − Q(k−1)`.
fn backward_difference(q: &Polynomial) -> Polynomial {
    q - &q.shift(real(-1.0))
}

/// Returns `(R, B)` with `(Q(k)λ^k) ⋆ (μ^k) = (R(k)λ^k) + B(μ^k)`, `λ ≠ μ`,
/// both nonzero.
fn distinct_base_geometric(q: &Polynomial, lambda: C64, mu: C64) -> (Polynomial, C64) {
    let c = mu / lambda;
    let one_minus = real(1.0) - c;
    let ratio = -c / one_minus;
    // R = (1/(1−c)) Σ_n (−c/(1−c))^n ∇^n Q
    let mut r = Polynomial::zero();
    let mut diff = q.clone();
    let mut factor = real(1.0) / one_minus;
    while !diff.is_zero() {
        r = &r + &diff.scale(factor);
        diff = backward_difference(&diff);
        factor *= ratio;
    }
    let b = q.eval(ZERO) - r.eval(ZERO);
    (r, b)
}

/// Coefficients `β_i` with `R(k) = Σ_i β_i C(k+i, i)`.
fn binomial_basis(r: &Polynomial) -> Vec<C64> {
    let Some(d) = r.degree() else {
        return Vec::new();
    };
    // C(k+i, i) = (k+1)(k+2)…(k+i)/i!
    let basis: Vec<Polynomial> = (0..=d)
        .scan(Polynomial::one(), |acc, i| {
            let current = acc.clone();
            let next = &*acc * &Polynomial::new(vec![real((i + 1) as f64), real(1.0)]);
            *acc = next.scale(real(1.0 / (i + 1) as f64));
            Some(current)
        })
        .collect();
    let mut rest = r.clone();
    let mut beta = vec![ZERO; d + 1];
    for i in (0..=d).rev() {
        let lead = rest.coeff(i) / basis[i].coeff(i);
        beta[i] = lead;
        rest = &rest - &basis[i].scale(lead);
        rest = Polynomial::new(rest.coeffs().iter().take(i).copied().collect());
    }
    beta
}

/// `x ⋆ (μ^k)` for a whole combination.
fn star_geometric(x: &PolyGeomCombination, mu: C64) -> Result<PolyGeomCombination> {
    let mut out = PolyGeomCombination::zero();
    for t in &x.terms {
        if t.base == ZERO {
            // c·δ₀ is c times the unit
            out.push(Polynomial::constant(t.coeffs.coeff(0)), mu)?;
        } else if mu == ZERO {
            out.push(t.coeffs.clone(), t.base)?;
        } else if t.base == mu {
            out.push(equal_base_convolution(&t.coeffs, &Polynomial::one()), mu)?;
        } else {
            let (r, b) = distinct_base_geometric(&t.coeffs, t.base, mu);
            out.push(r, t.base)?;
            out.push(Polynomial::constant(b), mu)?;
        }
    }
    Ok(out)
}

/// `x ⋆ (R(k)μ^k)`.
fn star_term(x: &PolyGeomCombination, r: &Polynomial, mu: C64) -> Result<PolyGeomCombination> {
    let mut out = PolyGeomCombination::zero();
    if mu == ZERO {
        return Ok(x.scale(r.coeff(0)));
    }
    // equal-base parts go through the power-sum formula directly
    let mut rest = PolyGeomCombination::zero();
    for t in &x.terms {
        if t.base == mu {
            out.push(equal_base_convolution(&t.coeffs, r), mu)?;
        } else {
            rest.push(t.coeffs.clone(), t.base)?;
        }
    }
    if rest.is_empty() {
        return Ok(out);
    }
    // R(k)μ^k = Σ_i β_i (μ^k)^{⋆(i+1)}
    let beta = binomial_basis(r);
    let mut power = rest;
    for b in beta {
        power = star_geometric(&power, mu)?;
        if b != ZERO {
            out = out.add(&power.scale(b))?;
        }
    }
    Ok(out)
}

/// Cauchy product `(a ⋆ b)_k = Σ_{j≤k} a_j b_{k−j}` in closed form.
pub fn star(a: &PolyGeomCombination, b: &PolyGeomCombination) -> Result<PolyGeomCombination> {
    a.check_compatible(b)?;
    let mut out = PolyGeomCombination::zero();
    for t in &b.terms {
        out = out.add(&star_term(a, &t.coeffs, t.base)?)?;
    }
    Ok(out)
}

/// `a^{⋆n}`; `n = 0` gives `δ₀`.
pub fn star_power(a: &PolyGeomCombination, n: u32) -> Result<PolyGeomCombination> {
    let mut out = PolyGeomCombination::geometric(real(1.0), ZERO)?;
    for _ in 0..n {
        out = star(&out, a)?;
    }
    Ok(out)
}

/// `u_0, …, u_{K−1}`.
pub fn to_sequence(a: &PolyGeomCombination, len: usize) -> Vec<C64> {
    let mut out = vec![ZERO; len];
    for t in &a.terms {
        if t.base == ZERO {
            if let Some(first) = out.first_mut() {
                *first += t.coeffs.coeff(0);
            }
            continue;
        }
        let mut pow = real(1.0);
        for (k, slot) in out.iter_mut().enumerate() {
            *slot += t.coeffs.eval(real(k as f64)) * pow;
            pow *= t.base;
        }
    }
    out
}

/// Direct `O(K²)` Cauchy product truncated to the input length.
pub fn star_oracle(x: &[C64], y: &[C64]) -> Vec<C64> {
    let n = x.len().min(y.len());
    (0..n)
        .map(|k| (0..=k).map(|j| x[j] * y[k - j]).sum())
        .collect()
}

/// `P(B)` on one polynomial: `Q ↦ Σ_n α_n λ^n Q(k+n)`.
fn pb_poly(p: &Polynomial, q: &Polynomial, base: C64) -> Polynomial {
    let mut out = Polynomial::zero();
    let mut pow = real(1.0);
    for (n, &alpha) in p.coeffs().iter().enumerate() {
        if n > 0 {
            pow *= base;
        }
        if alpha != ZERO && pow != ZERO {
            out = &out + &q.shift(real(n as f64)).scale(alpha * pow);
        }
    }
    out
}

/// `P(B)a`, with `B` the backward shift.
pub fn apply_pb(p: &Polynomial, a: &PolyGeomCombination) -> PolyGeomCombination {
    PolyGeomCombination {
        terms: a
            .terms
            .iter()
            .map(|t| PolyGeomTerm { coeffs: canonical(pb_poly(p, &t.coeffs, t.base), t.base), base: t.base })
            .filter(|t| !t.coeffs.is_zero())
            .collect(),
    }
}

/// `P(B)^N a` by `N` applications of [`apply_pb`]. Each term is iterated
/// with its eigenvalue `P(λ)` divided out and `P(λ)^N` applied once at the end
/// in log form.
pub fn apply_pb_power(p: &Polynomial, a: &PolyGeomCombination, n: u64) -> PolyGeomCombination {
    let mut out = PolyGeomCombination::zero();
    for t in &a.terms {
        let eig = p.eval(t.base);
        let (normalized, scale) = if eig == ZERO {
            (p.clone(), LogComplex::ONE)
        } else {
            (p.scale(eig.inv()), LogComplex::from_complex(eig).powi(n))
        };
        let mut q = t.coeffs.clone();
        for _ in 0..n {
            q = pb_poly(&normalized, &q, t.base);
            if q.is_zero() {
                break;
            }
        }
        let q = canonical(q.scale(scale.to_complex()), t.base);
        if !q.is_zero() {
            out.terms.push(PolyGeomTerm { coeffs: q, base: t.base });
        }
    }
    out
}

/// `‖a‖₁ = Σ_k |u_k|`, summed until a rigorous tail bound drops below `tol`.
///
/// For `k ≥ K` and `Q̂(x) = Σ|q_i|x^i`, `Q̂(k+1)/Q̂(k) ≤ (1 + 1/K)^d`, so the tail
/// of one term is at most `Q̂(K)|λ|^K / (1 − |λ|(1 + 1/K)^d)`. The result lies
/// in `[true − tol, true]`.
pub fn l1_norm(a: &PolyGeomCombination, tol: f64) -> f64 {
    let mut k_star = 1usize;
    for t in &a.terms {
        let lam = t.base.norm();
        if lam == 0.0 {
            continue;
        }
        let d = t.coeffs.degree_or_zero();
        let k = ((2 * d).max(20) as f64 / (1.0 - lam)).ceil() as usize;
        k_star = k_star.max(k);
    }
    let tail = |k: usize| -> f64 {
        a.terms
            .iter()
            .filter(|t| t.base != ZERO)
            .map(|t| {
                let lam = t.base.norm();
                let d = t.coeffs.degree_or_zero() as i32;
                let rho = lam * (1.0 + 1.0 / k as f64).powi(d);
                if rho >= 1.0 {
                    return f64::INFINITY;
                }
                t.coeffs.abs_majorant(k as f64) * lam.powi(k as i32) / (1.0 - rho)
            })
            .sum()
    };
    let mut total = 0.0;
    let mut k = 0usize;
    let mut limit = k_star;
    loop {
        let seq = window(a, k, limit);
        total += seq.iter().map(|u| u.norm()).sum::<f64>();
        k = limit;
        if tail(k) < tol || k > 50_000_000 {
            return total;
        }
        limit *= 2;
    }
}

/// `u_k` for `k ∈ [from, to)`.
fn window(a: &PolyGeomCombination, from: usize, to: usize) -> Vec<C64> {
    let mut out = vec![ZERO; to - from];
    for t in &a.terms {
        if t.base == ZERO {
            if from == 0 && to > 0 {
                out[0] += t.coeffs.coeff(0);
            }
            continue;
        }
        let mut pow = t.base.powi(from as i32);
        for (i, slot) in out.iter_mut().enumerate() {
            *slot += t.coeffs.eval(real((from + i) as f64)) * pow;
            pow *= t.base;
        }
    }
    out
}

/// `A_{d,N,s}` for `0 ≤ s ≤ d`, `0 ≤ N ≤ N_max`, defined by
/// `P(B)^N (k^d λ^k) = Σ_s P(λ)^{N+s−d} A_{d,N,s} (k^s λ^k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ACoeffTable {
    pub p: Polynomial,
    #[serde(with = "crate::complex::pair")]
    pub lambda: C64,
    pub d: usize,
    pub n_max: usize,
    /// Row-major: `values[N·(d+1) + s]`.
    #[serde(with = "crate::complex::pair_vec")]
    values: Vec<C64>,
}

impl ACoeffTable {
    pub fn get(&self, n: usize, s: usize) -> C64 {
        self.values[n * (self.d + 1) + s]
    }

    /// `A_{d,N,s} / N^{d−s}`.
    pub fn normalized(&self, n: usize, s: usize) -> C64 {
        self.get(n, s) / (n as f64).powi((self.d - s) as i32)
    }
}

/// Builds the table from `A_{N+1,s} = A_{N,s} + Σ_{r>s} P(λ)^{r−s−1} A_{N,r} Q_{r,s}(λ)`,
/// where `P(B)(k^r λ^k) = Σ_s Q_{r,s}(λ)(k^s λ^k)` is read off [`apply_pb`].
pub fn a_coeff_table(p: &Polynomial, lambda: C64, d: usize, n_max: usize) -> Result<ACoeffTable> {
    if d > 8 {
        return Err(Error::InvalidInput("A-table degree limited to d ≤ 8".into()));
    }
    let pl = p.eval(lambda);
    let hyp = lambda * pl * p.derivative().eval(lambda);
    if hyp.norm() <= 1e-14 {
        return Err(Error::HypothesisViolation("λP(λ)P'(λ) = 0".into()));
    }
    let q: Vec<Polynomial> = (0..=d)
        .map(|r| {
            let mono = PolyGeomCombination { terms: vec![PolyGeomTerm { coeffs: Polynomial::monomial(r, real(1.0)), base: lambda }] };
            apply_pb(p, &mono).coeffs_at(lambda)
        })
        .collect();
    let pl_pow: Vec<C64> = (0..=d).map(|e| pl.powi(e as i32)).collect();
    let width = d + 1;
    let mut values = vec![ZERO; (n_max + 1) * width];
    values[d] = real(1.0);
    for n in 0..n_max {
        for s in 0..=d {
            let mut next = values[n * width + s];
            for r in s + 1..=d {
                next += pl_pow[r - s - 1] * values[n * width + r] * q[r].coeff(s);
            }
            values[(n + 1) * width + s] = next;
        }
    }
    Ok(ACoeffTable { p: p.clone(), lambda, d, n_max, values })
}

/// `A_{d,N,s}/N^{d−s}` at the largest `N` of `n_pairs`, with the relative
/// change from the previous one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaEstimate {
    #[serde(with = "crate::complex::pair")]
    pub value: C64,
    pub relative_change: f64,
    pub n: usize,
}

pub fn omega_estimate(table: &ACoeffTable, s: usize, n_pairs: &[usize]) -> Result<OmegaEstimate> {
    if s >= table.d {
        return Err(Error::InvalidInput("ω estimate needs s < d".into()));
    }
    let Some(&last) = n_pairs.last() else {
        return Err(Error::InvalidInput("ω estimate needs at least one N".into()));
    };
    if last > table.n_max || last == 0 || n_pairs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("N values must increase, be positive and stay within the table".into()));
    }
    let value = table.normalized(last, s);
    let relative_change = match n_pairs.len() {
        1 => f64::INFINITY,
        k => {
            let prev = table.normalized(n_pairs[k - 2], s);
            (value - prev).norm() / value.norm()
        }
    };
    Ok(OmegaEstimate { value, relative_change, n: last })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo(c: f64, b: f64) -> PolyGeomCombination {
        PolyGeomCombination::geometric(real(c), real(b)).unwrap()
    }

    fn close_seq(a: &[C64], b: &[C64], tol: f64) {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).norm() <= tol, "entry {k}: {x} vs {y}");
        }
    }

    #[test]
    fn distinct_base_case() {
        let p = star(&geo(1.0, 0.5), &geo(1.0, 0.25)).unwrap();
        assert!((p.coeffs_at(real(0.5)).coeff(0) - real(2.0)).norm() < 1e-14);
        assert!((p.coeffs_at(real(0.25)).coeff(0) - real(-1.0)).norm() < 1e-14);
        assert_eq!(p.coeffs_at(real(0.5)).degree(), Some(0));
        let oracle = star_oracle(&to_sequence(&geo(1.0, 0.5), 60), &to_sequence(&geo(1.0, 0.25), 60));
        close_seq(&to_sequence(&p, 60), &oracle, 1e-12);
    }

    #[test]
    fn equal_base_cases() {
        let p = star(&geo(1.0, 0.5), &geo(1.0, 0.5)).unwrap();
        let q = p.coeffs_at(real(0.5));
        assert_eq!(q, Polynomial::from_real(&[1.0, 1.0]));

        let k = PolyGeomCombination::monomial(1, real(1.0), real(0.5)).unwrap();
        let p = star(&k, &geo(1.0, 0.5)).unwrap();
        let q = p.coeffs_at(real(0.5));
        assert!((&q - &Polynomial::from_real(&[0.0, 0.5, 0.5])).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn sequence_examples() {
        assert_eq!(to_sequence(&geo(1.0, 0.5), 3), vec![real(1.0), real(0.5), real(0.25)]);
        let kp1 = PolyGeomCombination::term(Polynomial::from_real(&[1.0, 1.0]), real(0.5)).unwrap();
        assert_eq!(to_sequence(&kp1, 3), vec![real(1.0), real(1.0), real(0.75)]);
        let two = geo(2.0, 0.5).sub(&geo(1.0, 0.25)).unwrap();
        assert_eq!(to_sequence(&two, 2), vec![real(1.0), real(0.75)]);
    }

    #[test]
    fn oracle_examples() {
        let d = vec![real(1.0), ZERO, ZERO];
        assert_eq!(star_oracle(&d, &d), d);
        let ones = vec![real(1.0), real(1.0)];
        assert_eq!(star_oracle(&ones, &ones), vec![real(1.0), real(2.0)]);
        let g = to_sequence(&geo(1.0, 0.5), 40);
        let kp1 = PolyGeomCombination::term(Polynomial::from_real(&[1.0, 1.0]), real(0.5)).unwrap();
        close_seq(&star_oracle(&g, &g), &to_sequence(&kp1, 40), 1e-14);
    }

    #[test]
    fn delta_is_the_unit() {
        let delta = PolyGeomCombination::geometric(real(3.0), ZERO).unwrap();
        let x = PolyGeomCombination::term(Polynomial::from_real(&[1.0, -2.0]), c64(0.3, 0.4)).unwrap();
        let p = star(&delta, &x).unwrap();
        assert_eq!(p, x.scale(real(3.0)));
        let q = star(&x, &delta).unwrap();
        close_seq(&to_sequence(&q, 10), &to_sequence(&x.scale(real(3.0)), 10), 1e-14);
    }

    #[test]
    fn collisions_are_rejected() {
        let a = geo(1.0, 0.5);
        let b = geo(1.0, 0.5 + 1e-13);
        assert!(matches!(star(&a, &b), Err(Error::BaseCollision { .. })));
        assert!(matches!(a.add(&b), Err(Error::BaseCollision { .. })));
        assert!(PolyGeomCombination::geometric(real(1.0), real(1.0)).is_err());
    }

    #[test]
    fn pb_examples() {
        let two_x = Polynomial::from_real(&[0.0, 2.0]);
        assert_eq!(apply_pb(&two_x, &geo(1.0, 0.5)), geo(1.0, 0.5));
        let k = PolyGeomCombination::monomial(1, real(1.0), real(0.5)).unwrap();
        let out = apply_pb(&two_x, &k);
        assert_eq!(out.coeffs_at(real(0.5)), Polynomial::from_real(&[1.0, 1.0]));
        let x2 = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let lam = c64(0.3, -0.2);
        let out = apply_pb(&x2, &PolyGeomCombination::geometric(real(1.0), lam).unwrap());
        assert!((out.coeffs_at(lam).coeff(0) - lam * lam).norm() < 1e-16);
    }

    #[test]
    fn pb_power_examples() {
        let two_x = Polynomial::from_real(&[0.0, 2.0]);
        let g = geo(1.0, 0.5);
        assert_eq!(apply_pb_power(&two_x, &g, 1000), g);
        let k = PolyGeomCombination::monomial(1, real(1.0), real(0.5)).unwrap();
        assert_eq!(apply_pb_power(&two_x, &k, 0), k);
        let out = apply_pb_power(&two_x, &k, 3);
        // A_{1,3,1} = 1, A_{1,3,0} = 3 and P(λ) = 1
        assert!((&out.coeffs_at(real(0.5)) - &Polynomial::from_real(&[3.0, 1.0])).max_abs_coeff() < 1e-14);
        let direct = apply_pb(&two_x, &apply_pb(&two_x, &apply_pb(&two_x, &k)));
        assert!((&out.coeffs_at(real(0.5)) - &direct.coeffs_at(real(0.5))).max_abs_coeff() < 1e-14);
    }

    #[test]
    fn l1_examples() {
        assert!((l1_norm(&geo(1.0, 0.5), 1e-12) - 2.0).abs() < 1e-12);
        let two = geo(2.0, 0.5).sub(&geo(1.0, 0.25)).unwrap();
        assert!((l1_norm(&two, 1e-12) - 8.0 / 3.0).abs() < 1e-12);
        let kp1 = PolyGeomCombination::term(Polynomial::from_real(&[1.0, 1.0]), real(0.5)).unwrap();
        assert!((l1_norm(&kp1, 1e-12) - 4.0).abs() < 1e-12);
        let slow = PolyGeomCombination::monomial(3, real(1.0), real(0.99)).unwrap();
        let total = l1_norm(&slow, 1e-6);
        // Σ k³x^k = x(1+4x+x²)/(1−x)⁴
        let x: f64 = 0.99;
        let exact = x * (1.0 + 4.0 * x + x * x) / (1.0 - x).powi(4);
        assert!((total - exact).abs() <= 1e-6 * exact.max(1.0), "{total} vs {exact}");
        assert_eq!(l1_norm(&PolyGeomCombination::geometric(real(-2.0), ZERO).unwrap(), 1e-9), 2.0);
    }

    #[test]
    fn a_table_examples() {
        let two_x = Polynomial::from_real(&[0.0, 2.0]);
        let t = a_coeff_table(&two_x, real(0.5), 1, 3).unwrap();
        assert_eq!(t.get(3, 1), real(1.0));
        assert_eq!(t.get(3, 0), real(3.0));

        let p = Polynomial::from_real(&[0.0, 1.0, 1.0]);
        let lam = real(0.4);
        let t = a_coeff_table(&p, lam, 2, 2).unwrap();
        let mono = PolyGeomCombination::monomial(2, real(1.0), lam).unwrap();
        let twice = apply_pb(&p, &apply_pb(&p, &mono)).coeffs_at(lam);
        let pl = p.eval(lam);
        // P(λ)^{N+s−d} A_{d,N,s} with N = 2, s = 0, d = 2
        assert!((twice.coeff(0) - t.get(2, 0)).norm() < 1e-13);
        assert!((twice.coeff(1) - pl * t.get(2, 1)).norm() < 1e-13);
        assert!((twice.coeff(2) - pl * pl).norm() < 1e-13);
    }

    #[test]
    fn a_table_rejects_degenerate_points() {
        let p = Polynomial::from_real(&[0.0, 1.0, 1.0]);
        assert!(matches!(a_coeff_table(&p, ZERO, 2, 4), Err(Error::HypothesisViolation(_))));
        assert!(matches!(a_coeff_table(&p, real(-0.5), 2, 4), Err(Error::HypothesisViolation(_))));
    }

    #[test]
    fn omega_examples() {
        let p = Polynomial::from_real(&[0.5, -0.3, 0.8]);
        let lam = c64(0.2, 0.3);
        let t = a_coeff_table(&p, lam, 1, 100).unwrap();
        let exact = lam * p.derivative().eval(lam);
        for n in [1, 7, 100] {
            let est = omega_estimate(&t, 0, &[n]).unwrap();
            assert!((est.value - exact).norm() < 1e-13 * exact.norm());
        }

        let two_x = Polynomial::from_real(&[0.0, 2.0]);
        let t = a_coeff_table(&two_x, real(0.5), 2, 4000).unwrap();
        let est = omega_estimate(&t, 1, &[2000, 4000]).unwrap();
        assert!((est.value - real(2.0)).norm() < 1e-12);
        assert!(est.relative_change < 1e-12);
        let est = omega_estimate(&t, 0, &[2000, 4000]).unwrap();
        assert!(est.relative_change < 1e-2);
    }
}
