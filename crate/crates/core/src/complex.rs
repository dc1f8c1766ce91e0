//! Small helpers around `num_complex::Complex<f64>`.

// inherent float methods need std; libm covers no_std builds
#[allow(unused_imports)]
use num_traits::Float;
use core::f64::consts::PI;

use num_complex::Complex;

pub type C64 = Complex<f64>;

#[inline]
pub const fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[inline]
pub const fn real(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Reduces an angle to `(-π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let two_pi = 2.0 * PI;
    let mut t = theta % two_pi;
    if t <= -PI {
        t += two_pi;
    } else if t > PI {
        t -= two_pi;
    }
    t
}

/// `e^{iθ}`.
#[inline]
pub fn cis(theta: f64) -> C64 {
    c64(theta.cos(), theta.sin())
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Serializes a complex number as a `[re, im]` pair.
pub mod pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Serializes a list of complex numbers as a list of `[re, im]` pairs.
pub mod pair_vec {
    use super::C64;
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(zs: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = zs.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs = <Vec<[f64; 2]>>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_phase_stays_in_half_open_interval() {
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(7.5) - (7.5 - 2.0 * PI)).abs() < 1e-15);
        for k in -50..50 {
            let t = wrap_phase(0.37 * k as f64);
            assert!(t > -PI && t <= PI);
        }
    }

    #[test]
    fn binomial_small_table() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(7, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(factorial(5), 120.0);
    }
}
