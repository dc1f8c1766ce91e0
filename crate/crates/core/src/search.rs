//! Parameter searches for the constructions in [`crate::engine`].
//!
//! Every search scans in a fixed order (directions from angle 0, radii on a
//! geometric grid with factor 1.05) and returns the first candidate whose
//! [`Certificate`] holds. Results keep the inputs their certificate was
//! computed from, so `recertify` can re-evaluate it under another
//! [`Sampling`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

// inherent float methods need std; libm covers no_std builds
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, Sampling};
use crate::complex::{cis, real, C64};
use crate::error::{Error, Result};
use crate::funcexpr::{
    disk_samples, is_exponential_multiple, max_modulus, max_modulus_point, FunctionExpr, Jet,
    DEFAULT_EXP_MULTIPLE_SAMPLES, DEFAULT_EXP_MULTIPLE_TOL, DEFAULT_MAX_MODULUS_GRID,
};
use crate::polynomial::Polynomial;

pub const SCAN_DIRECTIONS: usize = 256;
pub const RADIAL_FACTOR: f64 = 1.05;
/// Samples of a ray segment `(0, ρ]·w`.
pub const RAY_SAMPLES: usize = 512;
pub const SEGMENT_DIRECTIONS: usize = 32;
pub const SEGMENT_SAMPLES: usize = 64;
/// Boundary samples of a small ball.
pub const BALL_SAMPLES: usize = 16;
pub const MAX_HALVINGS: usize = 40;
pub const LEVEL_SPACING: f64 = 1e-3;
pub const DISK_CLEARANCE: f64 = 1e-3;
pub const LEVEL_TOL: f64 = 1e-10;
pub const NONDEGENERACY: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);

fn modulus(phi: &FunctionExpr, z: C64) -> f64 {
    phi.eval(z).norm()
}

/// Maximum that propagates NaN, so a NaN sample fails its predicate.
fn sup<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(f64::NEG_INFINITY, |acc, x| if x.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(x) })
}

fn inf<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(f64::INFINITY, |acc, x| if x.is_nan() || acc.is_nan() { f64::NAN } else { acc.min(x) })
}

/// `t_min·factor^j` for all `j` with the value at most `t_max`.
fn geometric(t_min: f64, t_max: f64, factor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = t_min;
    while t <= t_max {
        out.push(t);
        t *= factor;
    }
    out
}

/// Center plus boundary points of `B(center, radius)`.
fn ball_points(center: C64, radius: f64, sampling: &Sampling, salt: u64) -> Vec<C64> {
    let mut pts = vec![center];
    pts.extend(sampling.angles(BALL_SAMPLES, salt).into_iter().map(|t| center + C64::from_polar(radius, t)));
    pts
}

/// Center, boundary and a few interior points; used where a minimum of `|φ|`
/// is wanted and the minimum modulus principle needs the absence of zeros.
fn filled_ball_points(center: C64, radius: f64, sampling: &Sampling, salt: u64) -> Vec<C64> {
    let mut pts = ball_points(center, radius, sampling, salt);
    pts.extend(disk_samples(BALL_SAMPLES * sampling.density, radius).into_iter().map(|z| center + z));
    pts
}

fn summary(cert: &Certificate) -> String {
    let failing: Vec<String> = cert.failures().map(|p| format!("{} (margin {:.3e})", p.name, p.margin)).collect();
    if failing.is_empty() {
        String::from("all predicates hold")
    } else {
        format!("failing: {}", failing.join("; "))
    }
}

fn better(best: &mut Option<Certificate>, cand: Certificate) {
    let keep = match best {
        Some(b) => cand.failures().count() < b.failures().count()
            || (cand.failures().count() == b.failures().count() && cand.min_margin() > b.min_margin()),
        None => true,
    };
    if keep {
        *best = Some(cand);
    }
}

fn not_found(what: &str, best: Option<Certificate>) -> Error {
    match best {
        Some(c) => Error::NotFound(format!("{what}; best partial certificate '{}': {}", c.subject, summary(&c))),
        None => Error::NotFound(String::from(what)),
    }
}

fn exponential_check(phi: &FunctionExpr) -> Result<()> {
    if is_exponential_multiple(phi, DEFAULT_EXP_MULTIPLE_SAMPLES, DEFAULT_EXP_MULTIPLE_TOL) {
        Err(Error::ExponentialLike)
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------- segments

/// A segment `[w1, w2]` on which `log|φ|` is strictly convex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentWitness {
    #[serde(with = "crate::complex::pair")]
    pub w1: C64,
    #[serde(with = "crate::complex::pair")]
    pub w2: C64,
    pub require_large: bool,
    /// Minimum of `g''` over the samples, `g(s) = log|φ(w1 + s(w2 − w1))|`.
    pub convexity_margin: f64,
    /// `min |φ|` on the segment minus 1.
    pub modulus_margin: f64,
    pub certificate: Certificate,
}

impl SegmentWitness {
    /// `w1 + s(w2 − w1)`.
    pub fn point(&self, s: f64) -> C64 {
        self.w1 + (self.w2 - self.w1) * s
    }

    pub fn recertify(&self, phi: &FunctionExpr, sampling: &Sampling) -> Certificate {
        certify_segment(&Jet::new(phi), self.w1, self.w2, self.require_large, sampling).0
    }
}

/// Returns the certificate, `min g''` and `min |φ|`.
fn certify_segment(jet: &Jet, w1: C64, w2: C64, require_large: bool, sampling: &Sampling) -> (Certificate, f64, f64) {
    let v = w2 - w1;
    let len = v.norm();
    let mut s = vec![0.0];
    s.extend(sampling.unit_interval(SEGMENT_SAMPLES - 1, 21));
    let mut g2 = Vec::with_capacity(s.len());
    let mut mods = Vec::with_capacity(s.len());
    for &t in &s {
        let p = w1 + v * t;
        mods.push(modulus(&jet.f, p));
        g2.push(match jet.log_second_derivative(p) {
            Ok(h2) => (h2 * v * v).re,
            Err(_) => f64::NAN,
        });
    }
    let min_g2 = inf(g2.iter().copied());
    let min_mod = inf(mods.iter().copied());
    let mut c = Certificate::new("convex segment");
    c.at_least("|w2 − w1|", len, NONDEGENERACY, 1);
    // normalised by |w2 − w1|² so the margin does not vanish with the length
    c.greater("min g''/|w2 − w1|² on the segment", min_g2 / (len * len), 0.0, s.len());
    if require_large {
        c.greater("min |φ| on the segment", min_mod, 1.0, s.len());
    }
    (c, min_g2, min_mod)
}

/// Unit direction `v` (up to sign) maximising `Re(h''·v²)`.
fn convex_direction(h2: C64) -> C64 {
    (0..SEGMENT_DIRECTIONS)
        .map(|k| cis(PI * k as f64 / SEGMENT_DIRECTIONS as f64))
        .max_by(|a, b| (h2 * a * a).re.total_cmp(&(h2 * b * b).re))
        .unwrap_or(C64::new(1.0, 0.0))
}

/// Finds `w1, w2 ∈ B(w0, δ)` with `log|φ|` strictly convex on `[w1, w2]`
/// and, if `require_large`, `|φ| > 1` there.
pub fn find_convex_segment(phi: &FunctionExpr, w0: C64, delta: f64, require_large: bool) -> Result<SegmentWitness> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("δ must be positive, got {delta}")));
    }
    if modulus(phi, w0) == 0.0 {
        return Err(Error::ZeroValue { at: w0 });
    }
    let jet = Jet::new(phi);
    let mut candidates = vec![w0];
    candidates.extend(disk_samples(256, delta / 2.0).into_iter().map(|z| w0 + z));
    let mut largest_h2: f64 = 0.0;
    for w1 in candidates {
        let Ok(h2) = jet.log_second_derivative(w1) else { continue };
        largest_h2 = largest_h2.max(h2.norm());
        if h2.norm() < NONDEGENERACY || (require_large && modulus(phi, w1) <= 1.0) {
            continue;
        }
        let dir = convex_direction(h2);
        let mut t = delta / 2.0;
        while t > 1e-9 {
            let w2 = w1 + dir * t;
            let (certificate, min_g2, min_mod) = certify_segment(&jet, w1, w2, require_large, &Sampling::default());
            if certificate.holds() {
                return Ok(SegmentWitness {
                    w1,
                    w2,
                    require_large,
                    convexity_margin: min_g2,
                    modulus_margin: min_mod - 1.0,
                    certificate,
                });
            }
            t *= 0.5;
        }
    }
    if largest_h2 < 1e-10 {
        Err(Error::ExponentialLike)
    } else {
        Err(Error::NoSegment)
    }
}

// ------------------------------------------------------ small eigenvalues

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum W0Method {
    /// `|φ(0)| < 1`: `M(r0) = 1` and `r1 = (r0 + r0/ρ)/2`.
    Bisection { r0: f64, r1: f64 },
    /// `|φ(0)| = 1`: `|φ|` first exceeds 1 at `crossing` along direction
    /// number `direction` of [`SCAN_DIRECTIONS`].
    RaySearch { direction: usize, crossing: f64 },
}

/// A point `w0` with `|φ(w0)| > 1` and `|φ(r·w0)| < 1` for `r ∈ (0, ρ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallEigenW0 {
    #[serde(with = "crate::complex::pair")]
    pub w0: C64,
    pub rho: f64,
    pub method: W0Method,
    pub certificate: Certificate,
}

impl SmallEigenW0 {
    pub fn recertify(&self, phi: &FunctionExpr, sampling: &Sampling) -> Certificate {
        certify_small_eigen(phi, self.w0, self.rho, sampling)
    }
}

pub fn certify_small_eigen(phi: &FunctionExpr, w0: C64, rho: f64, sampling: &Sampling) -> Certificate {
    let mut c = Certificate::new("small eigenvalue point");
    c.greater("|φ(w0)|", modulus(phi, w0), 1.0, 1);
    let rs = sampling.unit_interval(RAY_SAMPLES, 11);
    let worst = sup(rs.iter().map(|&s| modulus(phi, w0 * (rho * s))));
    c.less("max |φ(r·w0)| for 0 < r ≤ ρ", worst, 1.0, rs.len());
    c
}

pub fn find_small_eigen_w0(phi: &FunctionExpr, rho: f64) -> Result<SmallEigenW0> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidInput(format!("ρ must lie in (0, 1), got {rho}")));
    }
    let at0 = modulus(phi, ZERO);
    if (at0 - 1.0).abs() <= 1e-12 {
        ray_search(phi, rho)
    } else if at0 < 1.0 {
        bisection_search(phi, rho)
    } else {
        Err(Error::NotFound(format!("|φ(0)| = {at0} > 1, so no point has |φ| < 1 near 0")))
    }
}

fn bisection_search(phi: &FunctionExpr, rho: f64) -> Result<SmallEigenW0> {
    let m = |r: f64| max_modulus(phi, r, DEFAULT_MAX_MODULUS_GRID);
    let mut hi = 1.0;
    let mut doublings = 0;
    while m(hi) <= 1.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 50 {
            return Err(Error::NotFound(String::from("max |φ| stays ≤ 1 up to radius 2^50")));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if m(mid) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r0 = 0.5 * (lo + hi);
    let r1 = 0.5 * (r0 + r0 / rho);
    let (w0, _) = max_modulus_point(phi, r1, DEFAULT_MAX_MODULUS_GRID);
    let certificate = certify_small_eigen(phi, w0, rho, &Sampling::default());
    if !certificate.holds() {
        return Err(not_found("bisection point fails its certificate", Some(certificate)));
    }
    Ok(SmallEigenW0 { w0, rho, method: W0Method::Bisection { r0, r1 }, certificate })
}

/// First `t` of `grid` with `f(t) > 1`, refined by bisection. `None` if
/// there is none or `f` already exceeds 1 at the first grid point.
fn first_exceedance(grid: &[f64], f: impl Fn(f64) -> f64) -> Option<f64> {
    let j = grid.iter().position(|&t| f(t) > 1.0)?;
    if j == 0 {
        return None;
    }
    let (mut lo, mut hi) = (grid[j - 1], grid[j]);
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn ray_search(phi: &FunctionExpr, rho: f64) -> Result<SmallEigenW0> {
    let grid = geometric(1e-3, 50.0, RADIAL_FACTOR);
    let mut best = None;
    for k in 0..SCAN_DIRECTIONS {
        let dir = cis(TAU * k as f64 / SCAN_DIRECTIONS as f64);
        let Some(crossing) = first_exceedance(&grid, |t| modulus(phi, dir * t)) else { continue };
        let w0 = dir * (crossing * (1.0 + 1.0 / rho) / 2.0);
        let certificate = certify_small_eigen(phi, w0, rho, &Sampling::default());
        if certificate.holds() {
            return Ok(SmallEigenW0 { w0, rho, method: W0Method::RaySearch { direction: k, crossing }, certificate });
        }
        better(&mut best, certificate);
    }
    Err(not_found("no admissible direction among 256 up to radius 50", best))
}

// ------------------------------------------------------- (n, d) schedules

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleStrategy {
    /// `b = w0/m`, `a = εw0/m` from a small eigenvalue point.
    CorollaryReduction,
    /// `a = kπ`, `b = kπ + π/(2m)`.
    PeriodicSchedule,
}

/// Points `a, b` with `|φ(mb)| > 1` and `|φ(db + (n−d)a)| < 1` for every
/// other `1 ≤ n ≤ m`, `0 ≤ d ≤ n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    #[serde(with = "crate::complex::pair")]
    pub a: C64,
    #[serde(with = "crate::complex::pair")]
    pub b: C64,
    pub m: u32,
    pub strategy: ScheduleStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_eigen: Option<SmallEigenW0>,
    pub certificate: Certificate,
}

impl ScheduleParams {
    /// `mb`, the point where `|φ| > 1`.
    pub fn w0(&self) -> C64 {
        self.b * self.m as f64
    }

    pub fn recertify(&self, phi: &FunctionExpr) -> Certificate {
        certify_schedule_grid(phi, self.a, self.b, self.m)
    }
}

pub fn schedule_point_name(n: u32, d: u32) -> String {
    format!("|φ(db+(n−d)a)| at n={n}, d={d}")
}

pub fn certify_schedule_grid(phi: &FunctionExpr, a: C64, b: C64, m: u32) -> Certificate {
    let mut c = Certificate::new("(n, d) schedule grid");
    for n in 1..=m {
        for d in 0..=n {
            let v = modulus(phi, b * d as f64 + a * (n - d) as f64);
            if n == m && d == m {
                c.greater(schedule_point_name(n, d), v, 1.0, 1);
            } else {
                c.less(schedule_point_name(n, d), v, 1.0, 1);
            }
        }
    }
    c
}

pub fn find_schedule_params(phi: &FunctionExpr, m: u32, strategy: ScheduleStrategy) -> Result<ScheduleParams> {
    if m == 0 {
        return Err(Error::InvalidInput(String::from("m must be at least 1")));
    }
    exponential_check(phi)?;
    let mf = m as f64;
    match strategy {
        ScheduleStrategy::CorollaryReduction => {
            let eps = 1.0 / (2.0 * mf * (mf + 1.0));
            let rho = (mf - 1.0) / mf + mf * eps;
            let small = find_small_eigen_w0(phi, rho)?;
            let b = small.w0 / mf;
            let a = small.w0 * (eps / mf);
            let certificate = certify_schedule_grid(phi, a, b, m);
            if !certificate.holds() {
                return Err(not_found("corollary reduction grid fails", Some(certificate)));
            }
            Ok(ScheduleParams { a, b, m, strategy, k: None, epsilon: Some(eps), small_eigen: Some(small), certificate })
        }
        ScheduleStrategy::PeriodicSchedule => {
            let mut best = None;
            for k in 1..=64u32 {
                let a = real(k as f64 * PI);
                let b = a + PI / (2.0 * mf);
                let certificate = certify_schedule_grid(phi, a, b, m);
                if certificate.holds() {
                    return Ok(ScheduleParams { a, b, m, strategy, k: Some(k), epsilon: None, small_eigen: None, certificate });
                }
                better(&mut best, certificate);
            }
            Err(not_found("periodic schedule fails for k = 1..=64", best))
        }
    }
}

/// A radius `δ` with the certificate of the ball conditions it satisfies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaWitness {
    pub delta: f64,
    pub certificate: Certificate,
}

pub fn certify_schedule_delta(phi: &FunctionExpr, a: C64, b: C64, m: u32, delta: f64, sampling: &Sampling) -> Certificate {
    let mut c = Certificate::new("(n, d) schedule balls");
    let w0 = b * m as f64;
    let pts = filled_ball_points(w0, delta, sampling, 31);
    c.greater("min |φ| on B(mb, δ)", inf(pts.iter().map(|&z| modulus(phi, z))), 1.0, pts.len());
    for n in 1..=m {
        for d in 0..=n {
            if n == m && d == m {
                continue;
            }
            let center = b * d as f64 + a * (n - d) as f64;
            let radius = delta * (d as f64 / m as f64 + (n - d) as f64);
            let pts = ball_points(center, radius, sampling, 32);
            c.less(
                format!("max |φ| on ∂B(db+(n−d)a, δ(d/m+n−d)) at n={n}, d={d}"),
                sup(pts.iter().map(|&z| modulus(phi, z))),
                1.0,
                pts.len(),
            );
        }
    }
    c
}

/// Ball version of the schedule: `|φ| > 1` on `B(mb, δ)` and `|φ| < 1` on
/// `B(db+(n−d)a, δ(d/m + n−d))`.
pub fn find_schedule_delta(phi: &FunctionExpr, params: &ScheduleParams) -> Result<DeltaWitness> {
    let scale = params.w0().norm();
    let mut delta = if scale > 0.0 { scale / 10.0 } else { 0.1 };
    let mut best = None;
    for _ in 0..MAX_HALVINGS {
        let certificate = certify_schedule_delta(phi, params.a, params.b, params.m, delta, &Sampling::default());
        if certificate.holds() {
            return Ok(DeltaWitness { delta, certificate });
        }
        better(&mut best, certificate);
        delta *= 0.5;
    }
    Err(not_found("no δ after 40 halvings", best))
}

// ------------------------------------------------------- large eigenvalues

/// `z0, w0 = ρ·z0` with `|φ| < 1` on `(0, z0]`, `|φ(w0)| > 1`,
/// `|φ(w0)| > |φ(dw0)|^{1/d}` for `2 ≤ d ≤ m`, and `|φ|` increasing from
/// `w0` in the direction `z0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeEigenParams {
    #[serde(with = "crate::complex::pair")]
    pub z0: C64,
    #[serde(with = "crate::complex::pair")]
    pub w0: C64,
    pub m: u32,
    pub certificate: Certificate,
}

impl LargeEigenParams {
    pub fn recertify(&self, phi: &FunctionExpr, sampling: &Sampling) -> Certificate {
        certify_large_eigen(phi, self.z0, self.w0, self.m, sampling)
    }
}

pub fn certify_large_eigen(phi: &FunctionExpr, z0: C64, w0: C64, m: u32, sampling: &Sampling) -> Certificate {
    let jet = Jet::new(phi);
    let mut c = ray_certificate(phi, z0, sampling);
    c.extend(point_certificate(&jet, z0, w0, m));
    c
}

fn ray_certificate(phi: &FunctionExpr, z0: C64, sampling: &Sampling) -> Certificate {
    let mut c = Certificate::new("large eigenvalue pair");
    let rs = sampling.unit_interval(RAY_SAMPLES, 41);
    c.less("max |φ| on (0, z0]", sup(rs.iter().map(|&s| modulus(phi, z0 * s))), 1.0, rs.len());
    c
}

fn point_certificate(jet: &Jet, z0: C64, w0: C64, m: u32) -> Certificate {
    let mut c = Certificate::new("large eigenvalue pair");
    let f = jet.f.eval(w0);
    let top = f.norm();
    c.greater("|φ(w0)|", top, 1.0, 1);
    for d in 2..=m {
        let v = modulus(&jet.f, w0 * d as f64).powf(1.0 / d as f64);
        c.less(format!("|φ({d}·w0)|^(1/{d}) against |φ(w0)|"), v, top, 1);
    }
    let slope = (f.conj() * jet.d1.eval(w0) * z0).re / top;
    c.greater("d/dt |φ(w0 + t·z0)| at t = 0", slope, 0.0, 1);
    c
}

/// Directions in which `|φ|` decreases from `|φ(0)|`, read off the first
/// nonvanishing Taylor coefficient.
fn descent_directions(phi: &FunctionExpr) -> Vec<C64> {
    let taylor = phi.taylor(16);
    let Some(p) = (1..taylor.len()).find(|&k| taylor[k].norm() > 1e-12) else { return Vec::new() };
    let base = taylor[0].arg() + PI - taylor[p].arg();
    (0..p).map(|k| cis((base + TAU * k as f64) / p as f64)).collect()
}

pub fn find_large_eigen_params(phi: &FunctionExpr, m: u32, growth_asserted: bool) -> Result<LargeEigenParams> {
    if !growth_asserted {
        return Err(Error::PreconditionNotAsserted(String::from(
            "φ must have subexponential growth with φ′(0) ≠ 0 or order below 1/2",
        )));
    }
    if m == 0 {
        return Err(Error::InvalidInput(String::from("m must be at least 1")));
    }
    let at0 = modulus(phi, ZERO);
    if (at0 - 1.0).abs() > 1e-12 {
        return Err(Error::HypothesisViolation(format!("|φ(0)| = {at0}, expected 1")));
    }
    let jet = Jet::new(phi);
    let mut directions = descent_directions(phi);
    directions.extend((0..SCAN_DIRECTIONS).map(|k| cis(TAU * k as f64 / SCAN_DIRECTIONS as f64)));
    let grid = geometric(1e-3, 200.0, RADIAL_FACTOR);
    let mut best = None;
    for dir in directions {
        let Some(j) = grid.iter().position(|&t| modulus(phi, dir * t) >= 1.0) else { continue };
        if j == 0 {
            continue;
        }
        let z0 = dir * (grid[j] / 2.0);
        let ray = ray_certificate(phi, z0, &Sampling::default());
        if !ray.holds() {
            better(&mut best, ray);
            continue;
        }
        let start = grid[j];
        let factor = (200.0 / start).powf(1.0 / 4095.0);
        let mut s = start;
        for _ in 0..4096 {
            let w0 = dir * s;
            s *= factor;
            let point = point_certificate(&jet, z0, w0, m);
            if point.holds() {
                let mut certificate = ray.clone();
                certificate.extend(point);
                return Ok(LargeEigenParams { z0, w0, m, certificate });
            }
            better(&mut best, point);
        }
    }
    Err(not_found("no (z0, w0) up to ray radius 200 on 4096 grid points", best))
}

/// `γ1 ∈ (0, z0/m)` and `δ` for the large-eigenvalue construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gamma1Delta {
    #[serde(with = "crate::complex::pair")]
    pub gamma1: C64,
    pub delta: f64,
    pub certificate: Certificate,
}

impl Gamma1Delta {
    pub fn recertify(&self, phi: &FunctionExpr, params: &LargeEigenParams, sampling: &Sampling) -> Certificate {
        certify_gamma1_delta(phi, params.w0, params.m, self.gamma1, self.delta, sampling)
    }
}

fn gamma1_pointwise(phi: &FunctionExpr, w0: C64, m: u32, gamma1: C64) -> Certificate {
    let mut c = Certificate::new("γ1 and δ");
    let mf = m as f64;
    let top = modulus(phi, w0 + gamma1 * (mf - 1.0));
    c.greater("|φ(w0+(m−1)γ1)|", top, 1.0, 1);
    for d in 2..=m {
        for s in 0..=(m - d) {
            let v = modulus(phi, w0 * d as f64 + gamma1 * s as f64).powf(1.0 / d as f64);
            c.less(format!("|φ({d}w0+{s}γ1)|^(1/{d}) against |φ(w0+(m−1)γ1)|"), v, top, 1);
        }
    }
    for s in 0..m.saturating_sub(1) {
        let v = modulus(phi, w0 + gamma1 * s as f64);
        c.less(format!("|φ(w0+{s}γ1)| against |φ(w0+(m−1)γ1)|"), v, top, 1);
    }
    c
}

/// Name of the uniform condition for `(d, s)`; `(1, m−1)` never appears.
pub fn gamma1_uniform_name(d: u32, s: u32) -> String {
    format!("max |φ|^(1/{d}) on ∂B({d}w0+{s}γ1, {}δ) against min |φ| on ∂B(w0+(m−1)γ1, δ)", d + 1)
}

pub fn certify_gamma1_delta(phi: &FunctionExpr, w0: C64, m: u32, gamma1: C64, delta: f64, sampling: &Sampling) -> Certificate {
    let mut c = gamma1_pointwise(phi, w0, m, gamma1);
    let center = w0 + gamma1 * (m as f64 - 1.0);
    let pts = filled_ball_points(center, delta, sampling, 51);
    let bottom = inf(pts.iter().map(|&z| modulus(phi, z)));
    c.greater("min |φ| on B(w0+(m−1)γ1, δ)", bottom, 1.0, pts.len());
    for d in 1..=m {
        for s in 0..=(m - d) {
            if d == 1 && s == m - 1 {
                continue;
            }
            let pts = ball_points(w0 * d as f64 + gamma1 * s as f64, (d + 1) as f64 * delta, sampling, 52);
            let v = sup(pts.iter().map(|&z| modulus(phi, z).powf(1.0 / d as f64)));
            c.less(gamma1_uniform_name(d, s), v, bottom, pts.len());
        }
    }
    c
}

pub fn find_gamma1_delta(phi: &FunctionExpr, params: &LargeEigenParams) -> Result<Gamma1Delta> {
    let (z0, w0, m) = (params.z0, params.w0, params.m);
    let mut best = None;
    // largest first: the strict margins shrink to 0 with γ1
    for k in 0..MAX_HALVINGS {
        let gamma1 = z0 * (0.9 * 0.5f64.powi(k as i32) / m as f64);
        let pointwise = gamma1_pointwise(phi, w0, m, gamma1);
        if !pointwise.holds() {
            better(&mut best, pointwise);
            continue;
        }
        let mut delta = z0.norm() / 10.0;
        for _ in 0..MAX_HALVINGS {
            let certificate = certify_gamma1_delta(phi, w0, m, gamma1, delta, &Sampling::default());
            if certificate.holds() {
                return Ok(Gamma1Delta { gamma1, delta, certificate });
            }
            better(&mut best, certificate);
            delta *= 0.5;
        }
    }
    Err(not_found("no (γ1, δ) after 40 halvings", best))
}

// ------------------------------------------------------------- powers

/// Data for the single-power construction: `|φ| < 1` on
/// `B(a, (m−1)/m·|w0 − a| + δ)` and `|φ| > 1` on `B(w0, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowersParams {
    #[serde(with = "crate::complex::pair")]
    pub a: C64,
    #[serde(with = "crate::complex::pair")]
    pub w0: C64,
    pub m: u32,
    pub delta: f64,
    pub certificate: Certificate,
}

impl PowersParams {
    pub fn recertify(&self, phi: &FunctionExpr, sampling: &Sampling) -> Certificate {
        certify_powers(phi, self.a, self.w0, self.m, self.delta, sampling)
    }
}

pub fn certify_powers(phi: &FunctionExpr, a: C64, w0: C64, m: u32, delta: f64, sampling: &Sampling) -> Certificate {
    let mut c = Certificate::new("powers");
    let radius = (m as f64 - 1.0) / m as f64 * (w0 - a).norm() + delta;
    let mut pts = vec![a];
    pts.extend(sampling.angles(4 * BALL_SAMPLES, 61).into_iter().map(|t| a + C64::from_polar(radius, t)));
    c.less("max |φ| on ∂B(a, (m−1)/m·|w0−a| + δ)", sup(pts.iter().map(|&z| modulus(phi, z))), 1.0, pts.len());
    let pts = filled_ball_points(w0, delta, sampling, 62);
    c.greater("min |φ| on B(w0, δ)", inf(pts.iter().map(|&z| modulus(phi, z))), 1.0, pts.len());
    c
}

pub fn find_powers_params(phi: &FunctionExpr, m: u32) -> Result<PowersParams> {
    if m == 0 {
        return Err(Error::InvalidInput(String::from("m must be at least 1")));
    }
    let mut a = ZERO;
    let mut lowest = modulus(phi, ZERO);
    for i in 1..=16 {
        for k in 0..64 {
            let z = C64::from_polar(0.25 * i as f64, TAU * k as f64 / 64.0);
            let v = modulus(phi, z);
            if v < lowest {
                lowest = v;
                a = z;
            }
        }
    }
    if !(lowest < 1.0) {
        return Err(Error::NotFound(String::from("|φ| ≥ 1 on the polar grid of radius 4")));
    }
    let rho = ((m as f64 - 1.0) / m as f64).max(0.5);
    let shifted = FunctionExpr::compose_affine(phi.clone(), C64::new(1.0, 0.0), a);
    let w0 = a + find_small_eigen_w0(&shifted, rho)?.w0;
    let mut delta = (w0 - a).norm() / 10.0;
    let mut best = None;
    for _ in 0..MAX_HALVINGS {
        let certificate = certify_powers(phi, a, w0, m, delta, &Sampling::default());
        if certificate.holds() {
            return Ok(PowersParams { a, w0, m, delta, certificate });
        }
        better(&mut best, certificate);
        delta *= 0.5;
    }
    Err(not_found("no δ after 40 halvings", best))
}

/// Range of `c` for which `c·w0` (up to `2δ`) carries frequencies of the
/// multi-generator expansion that are not on the ray of `w0`.
pub fn multigen_tube(plan: &MultiIndexPlan) -> (f64, f64) {
    let b1 = plan.beta1() as f64;
    let q = (b1 - 1.0) / b1;
    let lo = (1.0 - plan.epsilon) / (2.0 * b1);
    let hi = (1.0 - plan.eta * plan.epsilon).max(q * (1.0 - plan.epsilon) + plan.l as f64 * plan.epsilon);
    (lo, hi)
}

pub fn certify_multigen_delta(phi: &FunctionExpr, w0: C64, plan: &MultiIndexPlan, delta: f64, sampling: &Sampling) -> Certificate {
    let mut c = Certificate::new("multi-generator balls");
    let pts = filled_ball_points(w0, delta, sampling, 71);
    c.greater("min |φ| on B(w0, δ)", inf(pts.iter().map(|&z| modulus(phi, z))), 1.0, pts.len());
    let (lo, hi) = multigen_tube(plan);
    let mut cs = vec![lo];
    cs.extend(sampling.unit_interval(2 * SEGMENT_SAMPLES, 72).into_iter().map(|s| lo + (hi - lo) * s));
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for &t in &cs {
        let pts = ball_points(w0 * t, 2.0 * delta, sampling, 73);
        count += pts.len();
        worst = sup([worst, sup(pts.iter().map(|&z| modulus(phi, z)))]);
    }
    c.less("max |φ| on ∂B(c·w0, 2δ) for c in the tube", worst, 1.0, count);
    c
}

pub fn find_multigen_delta(phi: &FunctionExpr, w0: C64, plan: &MultiIndexPlan) -> Result<DeltaWitness> {
    let mut delta = w0.norm() / 10.0;
    let mut best = None;
    for _ in 0..MAX_HALVINGS {
        let certificate = certify_multigen_delta(phi, w0, plan, delta, &Sampling::default());
        if certificate.holds() {
            return Ok(DeltaWitness { delta, certificate });
        }
        better(&mut best, certificate);
        delta *= 0.5;
    }
    Err(not_found("no δ after 40 halvings", best))
}

// ------------------------------------------------------------ level sets

/// Points of the disk with `|P(λ)| = 1` (Λ1) and `|P(λ)| < 1` (Λ2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSets {
    #[serde(with = "crate::complex::pair_vec")]
    pub lambda1: Vec<C64>,
    #[serde(with = "crate::complex::pair_vec")]
    pub lambda2: Vec<C64>,
    pub certificate: Certificate,
}

impl LevelSets {
    pub fn recertify(&self, p: &Polynomial) -> Certificate {
        certify_level_sets(p, &self.lambda1, &self.lambda2)
    }
}

const RADIAL_STEPS: usize = 400;
const LEVEL_DIRECTIONS: usize = 1024;

fn disk_limit() -> f64 {
    1.0 - DISK_CLEARANCE
}

fn min_spacing(points: &[C64]) -> f64 {
    let mut out = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            out = out.min((a - b).norm());
        }
    }
    out
}

fn nondegeneracy(dp: &Polynomial, z: C64) -> f64 {
    (z * dp.eval(z)).norm()
}

pub fn certify_level_sets(p: &Polynomial, lambda1: &[C64], lambda2: &[C64]) -> Certificate {
    let dp = p.derivative();
    let mut c = Certificate::new("level sets");
    for (label, pts) in [("Λ1", lambda1), ("Λ2", lambda2)] {
        if pts.is_empty() {
            continue;
        }
        let n = pts.len();
        if label == "Λ1" {
            c.less(
                "max ||P(λ)| − 1| on Λ1",
                sup(pts.iter().map(|&z| (p.eval(z).norm() - 1.0).abs())),
                LEVEL_TOL,
                n,
            );
            // the bound itself is below the strictness margin
            if let Some(last) = c.predicates.last_mut() {
                last.tolerance = true;
            }
        } else {
            c.less("max |P(λ)| on Λ2", sup(pts.iter().map(|&z| p.eval(z).norm())), disk_limit(), n);
        }
        c.at_least(format!("min |λP′(λ)| on {label}"), inf(pts.iter().map(|&z| nondegeneracy(&dp, z))), NONDEGENERACY, n);
        c.at_most(format!("max |λ| on {label}"), sup(pts.iter().map(|z| z.norm())), disk_limit(), n);
        if n > 1 {
            c.at_least(format!("min spacing on {label}"), min_spacing(pts), LEVEL_SPACING, n);
        }
    }
    c
}

/// The `i`-th scan angle: bit-reversed order over 1024 equispaced angles,
/// so early directions are spread around the circle.
fn level_angle(i: usize) -> f64 {
    let bits = LEVEL_DIRECTIONS.trailing_zeros();
    let rev = (i as u32).reverse_bits() >> (32 - bits);
    TAU * rev as f64 / LEVEL_DIRECTIONS as f64
}

/// First point of the ray at angle `theta` inside `|λ| ≤ 1 − 1e−3` where
/// `|P|` crosses 1, refined until `||P| − 1| < 1e−10`.
pub fn level_crossing_on_ray(p: &Polynomial, theta: f64) -> Option<C64> {
    let dir = cis(theta);
    let f = |r: f64| p.eval(dir * r).norm() - 1.0;
    let step = disk_limit() / RADIAL_STEPS as f64;
    let mut prev = f(0.0);
    for k in 1..=RADIAL_STEPS {
        let r = step * k as f64;
        let cur = f(r);
        if prev == 0.0 && k > 1 {
            return Some(dir * (r - step));
        }
        if prev.signum() != cur.signum() && cur != 0.0 || cur == 0.0 {
            let (mut lo, mut hi) = (r - step, r);
            let below = prev < 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (f(mid) < 0.0) == below {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * hi {
                    break;
                }
            }
            let r = if f(lo).abs() < f(hi).abs() { lo } else { hi };
            return (f(r).abs() < LEVEL_TOL).then(|| dir * r);
        }
        prev = cur;
    }
    None
}

/// Middle sample of the first run along the ray where `|P| < 1 − 1e−3`.
pub fn low_point_on_ray(p: &Polynomial, theta: f64) -> Option<C64> {
    let dir = cis(theta);
    let step = disk_limit() / RADIAL_STEPS as f64;
    let low = |k: usize| p.eval(dir * (step * k as f64)).norm() < disk_limit() - 1e-9;
    let start = (1..=RADIAL_STEPS).find(|&k| low(k))?;
    let end = (start..=RADIAL_STEPS).take_while(|&k| low(k)).last()?;
    Some(dir * (step * ((start + end) / 2) as f64))
}

pub fn sample_level_sets(p: &Polynomial, n1: usize, n2: usize) -> Result<LevelSets> {
    let values: Vec<f64> = disk_samples(10_000, disk_limit()).into_iter().map(|z| p.eval(z).norm()).collect();
    if !(values.iter().any(|&v| v < 1.0) && values.iter().any(|&v| v > 1.0)) {
        return Err(Error::NoCrossing);
    }
    let dp = p.derivative();
    let admissible = |z: C64, chosen: &[C64]| {
        nondegeneracy(&dp, z) >= NONDEGENERACY
            && z.norm() <= disk_limit()
            && chosen.iter().all(|c| (c - z).norm() >= LEVEL_SPACING)
    };
    let mut lambda1 = Vec::with_capacity(n1);
    let mut lambda2 = Vec::with_capacity(n2);
    for i in 0..LEVEL_DIRECTIONS {
        if lambda1.len() >= n1 && lambda2.len() >= n2 {
            break;
        }
        let theta = level_angle(i);
        if lambda1.len() < n1 {
            if let Some(z) = level_crossing_on_ray(p, theta).filter(|&z| admissible(z, &lambda1)) {
                lambda1.push(z);
            }
        }
        if lambda2.len() < n2 {
            if let Some(z) = low_point_on_ray(p, theta).filter(|&z| admissible(z, &lambda2)) {
                lambda2.push(z);
            }
        }
    }
    if lambda1.len() < n1 || lambda2.len() < n2 {
        return Err(Error::NotFound(format!(
            "found {} of {n1} level points and {} of {n2} interior points",
            lambda1.len(),
            lambda2.len()
        )));
    }
    let certificate = certify_level_sets(p, &lambda1, &lambda2);
    if !certificate.holds() {
        return Err(not_found("level set samples fail", Some(certificate)));
    }
    Ok(LevelSets { lambda1, lambda2, certificate })
}

// ------------------------------------------------------- multi-indices

/// Combinatorial data for products `u^α` over a finite set `A` of
/// multi-indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiIndexPlan {
    /// `A` after the coordinate permutation, padded to a common length.
    pub set: Vec<Vec<u32>>,
    /// Coordinate `i` of the plan is coordinate `permutation[i]` of the input.
    pub permutation: Vec<usize>,
    /// Lexicographic maximum of `set`.
    pub beta: Vec<u32>,
    /// Zero-based coordinates `i ≥ 1` with `β_i ≠ 0`.
    pub i_beta: Vec<usize>,
    pub omega: Vec<Vec<u32>>,
    /// Weights on `i_beta`, in the same order.
    pub rho_i: Vec<f64>,
    pub eta: f64,
    pub epsilon: f64,
    pub rho: f64,
    /// Largest total degree in `A`.
    pub l: u32,
    /// `I_β` is empty; the construction only needs the first generator.
    pub single_variable: bool,
    pub certificate: Certificate,
}

impl MultiIndexPlan {
    pub fn beta1(&self) -> u32 {
        self.beta[0]
    }

    /// Maps a multi-index of the input coordinates to plan coordinates.
    pub fn permute(&self, alpha: &[u32]) -> Vec<u32> {
        self.permutation.iter().map(|&j| alpha.get(j).copied().unwrap_or(0)).collect()
    }

    pub fn recertify(&self) -> Certificate {
        certify_multiindex(self)
    }
}

/// `{α ∈ A : α1 = β1, α ≠ β}` together with the box points `α ≤ β` that are
/// strictly below `β` in some coordinate of `I_β`.
pub fn omega_set(set: &[Vec<u32>], beta: &[u32], i_beta: &[usize]) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = set.iter().filter(|a| a[0] == beta[0] && a.as_slice() != beta).cloned().collect();
    if !i_beta.is_empty() {
        let mut cur = vec![0u32; beta.len()];
        loop {
            if i_beta.iter().any(|&i| cur[i] < beta[i]) {
                out.push(cur.clone());
            }
            // odometer over the box Π[0, β_i]
            let mut i = 0;
            while i < beta.len() && cur[i] == beta[i] {
                cur[i] = 0;
                i += 1;
            }
            if i == beta.len() {
                break;
            }
            cur[i] += 1;
        }
    }
    out.sort();
    out.dedup();
    out
}

fn weighted_load(alpha: &[u32], beta: &[u32], i_beta: &[usize], rho_i: &[f64]) -> f64 {
    i_beta.iter().zip(rho_i).map(|(&i, &r)| r * alpha[i] as f64 / beta[i] as f64).sum()
}

fn eta_of(omega: &[Vec<u32>], beta: &[u32], i_beta: &[usize], rho_i: &[f64]) -> f64 {
    1.0 - sup(omega.iter().map(|a| weighted_load(a, beta, i_beta, rho_i)))
}

/// Compositions of `total` into `parts` positive integers.
fn compositions(total: usize, parts: usize, out: &mut Vec<Vec<f64>>, cur: &mut Vec<f64>) {
    if parts == 1 {
        cur.push(total as f64);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for first in 1..=(total - parts + 1) {
        cur.push(first as f64);
        compositions(total - first, parts - 1, out, cur);
        cur.pop();
    }
}

fn optimise_weights(omega: &[Vec<u32>], beta: &[u32], i_beta: &[usize]) -> Vec<f64> {
    let k = i_beta.len();
    let normalise = |v: Vec<f64>| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let mut candidates = vec![vec![1.0; k]];
    for r in [0.5, 0.25, 0.125, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        candidates.push((0..k).map(|i| r.powi(i as i32)).collect());
        candidates.push((0..k).map(|i| r.powi((k - 1 - i) as i32)).collect());
    }
    let grid = match k {
        0 => 0,
        1..=4 => 12,
        5..=6 => 6,
        _ => 0,
    };
    if grid >= k && k > 0 {
        compositions(grid, k, &mut candidates, &mut Vec::new());
    }
    let score = |w: &[f64]| eta_of(omega, beta, i_beta, w);
    let mut best = candidates
        .into_iter()
        .map(normalise)
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .unwrap_or_default();
    let mut best_score = score(&best);
    let mut step = 0.25;
    let mut rounds = 0;
    while step > 1e-12 && rounds < 10_000 {
        rounds += 1;
        let mut improved = false;
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let mut cand = best.clone();
                let moved = step * cand[i];
                cand[i] -= moved;
                cand[j] += moved;
                let s = score(&cand);
                if s > best_score + 1e-15 {
                    best = cand;
                    best_score = s;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    normalise(best)
}

pub fn certify_multiindex(plan: &MultiIndexPlan) -> Certificate {
    let mut c = Certificate::new("multi-index plan");
    let b1 = plan.beta1() as f64;
    if !plan.single_variable {
        let total: f64 = plan.rho_i.iter().sum();
        c.at_most("|Σρ_i − 1|", (total - 1.0).abs(), 1e-12, plan.rho_i.len());
        c.greater("min ρ_i", inf(plan.rho_i.iter().copied()), 0.0, plan.rho_i.len());
        let load = sup(plan.omega.iter().map(|a| weighted_load(a, &plan.beta, &plan.i_beta, &plan.rho_i)));
        c.less("max over Ω of Σρ_i·α_i/β_i", load, 1.0 - plan.eta, plan.omega.len());
    }
    c.greater("η", plan.eta, 0.0, 1);
    c.greater("ε", plan.epsilon, 0.0, 1);
    c.greater("ρ against (1−ε)(β1−1)/β1 + Lε", plan.rho, (1.0 - plan.epsilon) * (b1 - 1.0) / b1 + plan.l as f64 * plan.epsilon, 1);
    c.greater("ρ against 1 − ηε", plan.rho, 1.0 - plan.eta * plan.epsilon, 1);
    c.less("ρ", plan.rho, 1.0, 1);
    c
}

pub fn find_multiindex_params(a: &[Vec<u32>]) -> Result<MultiIndexPlan> {
    if a.is_empty() {
        return Err(Error::Infeasible(String::from("A is empty")));
    }
    let dim = a.iter().map(Vec::len).max().unwrap_or(0);
    let mut padded: Vec<Vec<u32>> = a
        .iter()
        .map(|alpha| {
            let mut v = alpha.clone();
            v.resize(dim, 0);
            v
        })
        .collect();
    if let Some(zero) = padded.iter().find(|v| v.iter().all(|&x| x == 0)) {
        return Err(Error::Infeasible(format!("A contains the zero multi-index {zero:?}")));
    }
    padded.sort();
    padded.dedup();
    let lead = (0..dim).find(|&j| padded.iter().any(|v| v[j] != 0)).unwrap_or(0);
    let mut permutation: Vec<usize> = vec![lead];
    permutation.extend((0..dim).filter(|&j| j != lead));
    let mut set: Vec<Vec<u32>> = padded.iter().map(|v| permutation.iter().map(|&j| v[j]).collect()).collect();
    set.sort();
    let beta = set.last().cloned().unwrap_or_default();
    if beta[0] == 0 {
        return Err(Error::Infeasible(String::from("β1 = 0 after permutation")));
    }
    let i_beta: Vec<usize> = (1..dim).filter(|&i| beta[i] != 0).collect();
    let omega = omega_set(&set, &beta, &i_beta);
    let l = set.iter().map(|v| v.iter().sum::<u32>()).max().unwrap_or(0);
    let single_variable = i_beta.is_empty();
    let (rho_i, eta_max) = if single_variable {
        (Vec::new(), 1.0)
    } else {
        let w = optimise_weights(&omega, &beta, &i_beta);
        let e = eta_of(&omega, &beta, &i_beta, &w);
        (w, e)
    };
    if !(eta_max > 1e-8) {
        return Err(Error::Infeasible(format!("internal error: optimal η = {eta_max} is not positive")));
    }
    let eta = (eta_max - 1e-8).min(1.0 - 1e-6);
    let b1 = beta[0] as f64;
    let q = (b1 - 1.0) / b1;
    let epsilon = (0.5 * (1.0 / b1) / (eta / 2.0 + l as f64 - q)).min(1e-2);
    let rho = 1.0 - eta * epsilon / 2.0;
    let mut plan = MultiIndexPlan {
        set,
        permutation,
        beta,
        i_beta,
        omega,
        rho_i,
        eta,
        epsilon,
        rho,
        l,
        single_variable,
        certificate: Certificate::default(),
    };
    plan.certificate = certify_multiindex(&plan);
    if single_variable {
        plan.certificate.note("single-variable path: I_β is empty");
    }
    if !plan.certificate.holds() {
        return Err(Error::Infeasible(format!("internal error: plan certificate fails: {}", summary(&plan.certificate))));
    }
    Ok(plan)
}
