//! Power-sum polynomials `S_p(k) = Σ_{j=0}^{k} j^p` with exact rational
//! coefficients.
//!
//! Uses the telescoping identity `Σ_{i=0}^{p} C(p+1, i) S_i(k) = (k+1)^{p+1}`,
//! so every `S_p` follows from the lower ones without floating point.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::complex::real;
use crate::polynomial::Polynomial;

pub type Q128 = Ratio<i128>;

/// Largest exponent for which the recursion stays inside `i128`.
pub const MAX_EXPONENT: usize = 24;

fn binomial_i128(n: usize, k: usize) -> i128 {
    let mut out: i128 = 1;
    for i in 0..k {
        out = out * (n - i) as i128 / (i + 1) as i128;
    }
    out
}

/// Coefficients of `S_p` for every `p ≤ max_p`; `table[p][i]` multiplies `k^i`.
/// `0^0 = 1`, so `S_0(k) = k + 1`.
///
/// # Panics
/// If `max_p > MAX_EXPONENT`.
pub fn power_sum_table(max_p: usize) -> Vec<Vec<Q128>> {
    assert!(max_p <= MAX_EXPONENT, "power sums limited to p ≤ {MAX_EXPONENT}");
    let zero = Q128::from_integer(0);
    let mut table: Vec<Vec<Q128>> = Vec::with_capacity(max_p + 1);
    for p in 0..=max_p {
        // (k+1)^{p+1}
        let mut coeffs: Vec<Q128> = (0..=p + 1)
            .map(|i| Q128::from_integer(binomial_i128(p + 1, i)))
            .collect();
        for (i, lower) in table.iter().enumerate() {
            let c = Q128::from_integer(binomial_i128(p + 1, i));
            for (slot, &a) in coeffs.iter_mut().zip(lower) {
                *slot -= c * a;
            }
        }
        let denom = Q128::from_integer(p as i128 + 1);
        for slot in coeffs.iter_mut() {
            *slot /= denom;
        }
        while coeffs.len() > 1 && *coeffs.last().unwrap() == zero {
            coeffs.pop();
        }
        table.push(coeffs);
    }
    table
}

/// Exact coefficients of `S_p`.
pub fn power_sum_coeffs(p: usize) -> Vec<Q128> {
    power_sum_table(p).pop().unwrap_or_else(|| vec![Q128::from_integer(1)])
}

pub fn to_f64(q: Q128) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// `S_p` cast to a complex polynomial in `k`.
pub fn power_sum_poly(p: usize) -> Polynomial {
    Polynomial::new(power_sum_coeffs(p).into_iter().map(|q| real(to_f64(q))).collect())
}

/// All of `S_0..=S_max_p` as complex polynomials.
pub fn power_sum_polys(max_p: usize) -> Vec<Polynomial> {
    power_sum_table(max_p)
        .into_iter()
        .map(|c| Polynomial::new(c.into_iter().map(|q| real(to_f64(q))).collect()))
        .collect()
}
