//! Machine-checked records of the sampled strict inequalities behind a
//! parameter choice.
//!
//! A [`Certificate`] is a flat list of [`Predicate`]s, each reduced to a
//! single worst-case value compared against a bound. Searches build their
//! certificates through a [`Sampling`], so the same predicates can be
//! re-evaluated later on a denser, randomly shifted sample set.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Every strict inequality must hold by at least this much.
pub const MIN_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Less,
    Greater,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub relation: Relation,
    /// Worst value over the samples (max for `Less`, min for `Greater`).
    pub value: f64,
    pub bound: f64,
    /// Signed slack; positive when the inequality holds.
    pub margin: f64,
    /// Number of points the worst case was taken over.
    pub samples: usize,
    /// Tolerance checks (`at_most`/`at_least`) only need a non-negative margin.
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub tolerance: bool,
}

impl Predicate {
    pub fn holds(&self) -> bool {
        if self.tolerance {
            self.margin >= 0.0
        } else {
            self.margin >= MIN_MARGIN
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub subject: String,
    pub predicates: Vec<Predicate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(subject: impl Into<String>) -> Self {
        Self { subject: subject.into(), ..Self::default() }
    }

    /// Records `value < bound`; `value` should already be the sample maximum.
    pub fn less(&mut self, name: impl Into<String>, value: f64, bound: f64, samples: usize) {
        self.push(name.into(), Relation::Less, value, bound, samples, false);
    }

    /// Records `value > bound`; `value` should already be the sample minimum.
    pub fn greater(&mut self, name: impl Into<String>, value: f64, bound: f64, samples: usize) {
        self.push(name.into(), Relation::Greater, value, bound, samples, false);
    }

    /// Records the tolerance check `value ≤ bound`.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64, samples: usize) {
        self.push(name.into(), Relation::Less, value, bound, samples, true);
    }

    /// Records the tolerance check `value ≥ bound`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64, samples: usize) {
        self.push(name.into(), Relation::Greater, value, bound, samples, true);
    }

    fn push(&mut self, name: String, relation: Relation, value: f64, bound: f64, samples: usize, tolerance: bool) {
        let margin = match relation {
            Relation::Less => bound - value,
            Relation::Greater => value - bound,
        };
        // NaN must never count as a pass
        let margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
        self.predicates.push(Predicate { name, relation, value, bound, margin, samples, tolerance });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn holds(&self) -> bool {
        self.predicates.iter().all(Predicate::holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Predicate> {
        self.predicates.iter().filter(|p| !p.holds())
    }

    /// Smallest margin, `+∞` when there are no predicates.
    pub fn min_margin(&self) -> f64 {
        self.predicates.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// Whether every predicate of `self` has a same-named predicate in
    /// `other` with the same verdict.
    pub fn same_verdicts(&self, other: &Certificate) -> bool {
        self.predicates.len() == other.predicates.len()
            && self
                .predicates
                .iter()
                .zip(&other.predicates)
                .all(|(a, b)| a.name == b.name && a.holds() == b.holds())
    }

    pub fn extend(&mut self, other: Certificate) {
        self.predicates.extend(other.predicates);
        self.notes.extend(other.notes);
    }
}

/// Sample placement for certificate predicates.
///
/// The default places points on a fixed grid. A seeded sampling multiplies
/// the density and jitters the points, which is how certificates are
/// revalidated from scratch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub density: usize,
    pub seed: Option<u64>,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { density: 1, seed: None }
    }
}

impl Sampling {
    /// Twice the density, jittered by `seed`.
    pub fn revalidation(seed: u64) -> Self {
        Self { density: 2, seed: Some(seed) }
    }

    pub fn with_density(density: usize) -> Self {
        Self { density: density.max(1), seed: None }
    }

    fn rng(&self, salt: u64) -> Option<ChaCha8Rng> {
        self.seed.map(|s| ChaCha8Rng::seed_from_u64(s ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }

    /// `n·density` points of `(0, 1]`, always including `1`. Jittered points
    /// stay in the upper half of their cell so none lands next to 0.
    pub fn unit_interval(&self, n: usize, salt: u64) -> Vec<f64> {
        let m = n * self.density;
        let mut rng = self.rng(salt);
        let mut out: Vec<f64> = (0..m)
            .map(|k| {
                let offset = match rng.as_mut() {
                    Some(r) => 1.0 - 0.5 * r.random::<f64>(),
                    None => 1.0,
                };
                (k as f64 + offset) / m as f64
            })
            .collect();
        if out.last() != Some(&1.0) {
            out.push(1.0);
        }
        out
    }

    /// `n·density` angles in `[0, 2π)`, equispaced, rotated by a random
    /// offset when seeded.
    pub fn angles(&self, n: usize, salt: u64) -> Vec<f64> {
        let m = n * self.density;
        let shift = self.rng(salt).map_or(0.0, |mut r| r.random::<f64>());
        (0..m).map(|k| TAU * (k as f64 + shift) / m as f64).collect()
    }
}
