//! Witness constructions and the `N`-search.
//!
//! Each construction turns the parameters found by [`crate::search`] into
//! generators `u_i(N)`: a fixed part taken from the (relocated) `U` centers
//! plus terms whose coefficients `c_j(N)` are chosen so that one designated
//! term of `T^N(u^m)` (or `T^N(u^β)`) reproduces the relocated `V` center.
//! `N` is then scanned until every membership condition holds with
//! distance below `0.9·radius`, and the winner is rechecked with 4× metric
//! sampling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

// inherent float methods need std; libm covers no_std builds
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::complex::{factorial, C64};
use crate::eigenmodel::{EigenModel, ExpCombination, Kernel, MetricSpec, PHI_ZERO};
use crate::error::{Error, Result};
use crate::logcomplex::LogComplex;
use crate::polynomial::Polynomial;
use crate::search::{
    find_convex_segment, find_gamma1_delta, find_large_eigen_params, find_multigen_delta, find_multiindex_params,
    find_powers_params, find_schedule_delta, find_schedule_params, find_small_eigen_w0, level_crossing_on_ray,
    low_point_on_ray, sample_level_sets, MultiIndexPlan, ScheduleStrategy, SegmentWitness, DISK_CLEARANCE, LEVEL_TOL,
    NONDEGENERACY,
};
use crate::shiftalg::{a_coeff_table, apply_pb_power, l1_norm, omega_estimate, star_power, PolyGeomCombination};

pub const DEFAULT_N_MAX_EIGEN: u64 = 100_000;
pub const DEFAULT_N_MAX_SHIFT: u64 = 3_000;
/// Distances must be below this fraction of the radius to certify.
pub const CERTIFY_FRACTION: f64 = 0.9;
/// Metric sample multiplier for the recheck at the certified `N`.
pub const RECHECK_DENSITY: usize = 4;
/// Tolerance of the surviving-term identity `T^N v = V-center`.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Tail tolerance of `ℓ¹` norms; distances add it to stay conservative.
pub const L1_TOL: f64 = 1e-12;
/// Relative change allowed in the `ω` estimate for `m ≥ 3`.
pub const OMEGA_TOL: f64 = 1e-2;

/// Admissible sets are shrunk by this factor so relocated points are interior.
const INTERIOR: f64 = 0.99;
const ONE: LogComplex = LogComplex::ONE;

/// `1, 2, …, 100`, then `n ↦ ⌈1.2n⌉`, always ending at `n_max`.
pub fn n_schedule(n_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n_max.min(100)).collect();
    let mut n = 100u64;
    while n < n_max {
        n = ((n as f64) * 1.2).ceil() as u64;
        out.push(n.min(n_max));
    }
    out
}

// ------------------------------------------------------------- open sets

/// A vector of either model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "terms", rename_all = "snake_case")]
pub enum Vector {
    Eigen(ExpCombination),
    Shift(PolyGeomCombination),
}

impl Vector {
    fn is_zero(&self) -> bool {
        match self {
            Vector::Eigen(a) => a.is_empty(),
            Vector::Shift(a) => a.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetMetric {
    /// Capped circle sups of the function realised through `kernel`.
    Circles { kernel: Kernel, spec: MetricSpec },
    /// The `ℓ¹(ℕ)` norm.
    L1,
}

/// The open ball `{x : d(x, center) < radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenSetSpec {
    pub center: Vector,
    pub radius: f64,
    pub metric: SetMetric,
}

impl OpenSetSpec {
    pub fn eigen(center: ExpCombination, radius: f64, kernel: Kernel, spec: MetricSpec) -> Self {
        Self { center: Vector::Eigen(center), radius, metric: SetMetric::Circles { kernel, spec } }
    }

    /// Ball around `center` in the default metric of `kernel`.
    pub fn eigen_default(center: ExpCombination, radius: f64, kernel: Kernel) -> Self {
        Self::eigen(center, radius, kernel, MetricSpec::default_for(kernel))
    }

    pub fn shift(center: PolyGeomCombination, radius: f64) -> Self {
        Self { center: Vector::Shift(center), radius, metric: SetMetric::L1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!("radius must be positive and finite, got {}", self.radius)));
        }
        match (&self.center, &self.metric) {
            (Vector::Eigen(c), SetMetric::Circles { spec, .. }) => {
                spec.validate()?;
                if c.terms().iter().any(|t| !(t.freq.re.is_finite() && t.freq.im.is_finite() && t.coef.log_mag.is_finite())) {
                    return Err(Error::InvalidInput(String::from("center has non-finite terms")));
                }
                Ok(())
            }
            (Vector::Shift(c), SetMetric::L1) => c.validate(),
            _ => Err(Error::KindMismatch),
        }
    }

    fn denser(&self, factor: usize) -> Self {
        let mut out = self.clone();
        if let SetMetric::Circles { spec, .. } = &mut out.metric {
            spec.samples *= factor;
        }
        out
    }

    fn with_center(&self, center: Vector) -> Self {
        Self { center, ..self.clone() }
    }

    fn eigen_center(&self) -> Result<&ExpCombination> {
        match &self.center {
            Vector::Eigen(c) => Ok(c),
            Vector::Shift(_) => Err(Error::KindMismatch),
        }
    }

    fn shift_center(&self) -> Result<&PolyGeomCombination> {
        match &self.center {
            Vector::Shift(c) => Ok(c),
            Vector::Eigen(_) => Err(Error::KindMismatch),
        }
    }

    fn kernel(&self) -> Result<Kernel> {
        match &self.metric {
            SetMetric::Circles { kernel, .. } => Ok(*kernel),
            SetMetric::L1 => Err(Error::KindMismatch),
        }
    }
}

/// Distance from `x` to the center of `s` and whether it is below the radius.
pub fn certify_membership(x: &Vector, s: &OpenSetSpec) -> Result<(bool, f64)> {
    let d = match (x, &s.center, &s.metric) {
        (Vector::Eigen(x), Vector::Eigen(c), SetMetric::Circles { kernel, spec }) => kernel.metric_distance(x, c, spec)?,
        (Vector::Shift(x), Vector::Shift(c), SetMetric::L1) => {
            let diff = x.sub(c)?;
            if diff.is_empty() {
                0.0
            } else {
                l1_norm(&diff, L1_TOL) + L1_TOL
            }
        }
        _ => return Err(Error::KindMismatch),
    };
    Ok((d < s.radius, d))
}

// ------------------------------------------------------------- generators

/// Recipe for an `N`-dependent coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    /// `c(N) = (num / eig^N)^{1/p}`, principal branch.
    Eigen { num: LogComplex, eig: LogComplex, p: u32 },
    /// `c(N) = (b / (ω·N^{m−1}·eig^{N−m+1}))^{1/m}`, principal branch.
    Shift { b: LogComplex, omega: LogComplex, eig: LogComplex, m: u32 },
}

impl Recipe {
    pub fn at(&self, n: u64) -> LogComplex {
        match *self {
            Recipe::Eigen { num, eig, p } => (num / eig.powi(n)).root(p),
            Recipe::Shift { b, omega, eig, m } => {
                let poly = LogComplex::from_real((n as f64).powi(m as i32 - 1));
                (b / (omega * poly * eig.powf(n as f64 - m as f64 + 1.0))).root(m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermKind {
    /// Coefficient taken from a `U` center.
    Fixed { coef: LogComplex },
    /// The small auxiliary term `ω·E(ρ_i κ/β_i)`.
    Omega { coef: LogComplex },
    /// `c_j(N)` for target index `j`.
    Varying { j: usize, recipe: Recipe },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenTerm {
    /// Frequency `λ` of `E(λ)`, or base `λ` of `(λ^k)`.
    #[serde(with = "crate::complex::pair")]
    pub freq: C64,
    pub kind: TermKind,
}

impl GenTerm {
    fn coef(&self, n: u64) -> LogComplex {
        match self.kind {
            TermKind::Fixed { coef } | TermKind::Omega { coef } => coef,
            TermKind::Varying { recipe, .. } => recipe.at(n),
        }
    }

    fn varying(&self) -> Option<usize> {
        match self.kind {
            TermKind::Varying { j, .. } => Some(j),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub terms: Vec<GenTerm>,
}

impl Generator {
    fn eigen_at(&self, n: u64) -> ExpCombination {
        let mut out = ExpCombination::zero();
        for t in &self.terms {
            out.push(t.freq, t.coef(n));
        }
        out
    }

    fn shift_at(&self, n: u64) -> Result<PolyGeomCombination> {
        let mut out = PolyGeomCombination::zero();
        for t in &self.terms {
            out.push(Polynomial::constant(t.coef(n).to_complex()), t.freq)?;
        }
        Ok(out)
    }
}

// ------------------------------------------------------------- transcript

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    SmallEigen,
    LargeEigen,
    Shift,
    Powers,
    MultiGenerator,
}

/// One membership requirement: `T^N(Π u_i^{α_i})` (or the plain product)
/// must lie in the set named `target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub label: String,
    pub exponent: Vec<u32>,
    pub apply_t: bool,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub role: String,
    pub set: OpenSetSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub n: u64,
    pub condition: String,
    pub distance: f64,
    pub radius: f64,
}

impl Row {
    pub fn inside(&self) -> bool {
        self.distance < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub n: u64,
    /// `c_j(N)` for each varying term, in generator order.
    pub c: Vec<LogComplex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    #[serde(with = "crate::complex::pair")]
    pub original: C64,
    #[serde(with = "crate::complex::pair")]
    pub relocated: C64,
    pub displacement: f64,
}

/// How a target center was moved onto the admissible frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relocation {
    pub role: String,
    pub moves: Vec<Move>,
    /// Distance between the original and the relocated center.
    pub center_shift: f64,
    /// `center_shift > radius/2`.
    pub flagged: bool,
}

/// Per-class decay of the terms of one condition: the largest per-step
/// ratio `|term(N+1)|/|term(N)|` among the class members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermClass {
    pub condition: String,
    pub class: String,
    pub terms: usize,
    pub max_ratio: f64,
    pub surviving: bool,
}

/// A product of generator terms, as `(generator, term)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivingTerm {
    pub factors: Vec<(usize, usize)>,
    pub multiplicity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRow {
    pub condition: String,
    pub n: u64,
    pub distance: f64,
    pub radius: f64,
    pub final_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Certified { n: u64, recheck: Vec<Row> },
    NSearchExhausted { best: Vec<BestRow> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub construction: Construction,
    pub operator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Kernel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<Polynomial>,
    /// `[m]` for single-generator constructions, otherwise the set `A`.
    pub exponents: Vec<Vec<u32>>,
    pub n_max: u64,
    pub sets: Vec<NamedSet>,
    pub certificates: Vec<Certificate>,
    pub relocations: Vec<Relocation>,
    pub generators: Vec<Generator>,
    pub conditions: Vec<Condition>,
    pub term_classes: Vec<TermClass>,
    /// Monomials of the designated surviving term of the target power.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surviving: Vec<SurvivingTerm>,
    pub tested: Vec<u64>,
    pub rows: Vec<Row>,
    pub coefficients: Vec<CoefficientRow>,
    pub outcome: Outcome,
    pub notes: Vec<String>,
}

/// Condition name of the surviving-term identity rows.
pub const IDENTITY_ROW: &str = "surviving term identity";

impl Transcript {
    pub fn is_certified(&self) -> bool {
        matches!(self.outcome, Outcome::Certified { .. })
    }

    pub fn certified_n(&self) -> Option<u64> {
        match self.outcome {
            Outcome::Certified { n, .. } => Some(n),
            Outcome::NSearchExhausted { .. } => None,
        }
    }

    pub fn rows_at(&self, n: u64) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.n == n)
    }

    pub fn rows_for<'a>(&'a self, condition: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.condition == condition)
    }

    pub fn set(&self, role: &str) -> Result<&OpenSetSpec> {
        self.sets
            .iter()
            .find(|s| s.role == role)
            .map(|s| &s.set)
            .ok_or_else(|| Error::InvalidInput(format!("transcript has no set '{role}'")))
    }

    /// Largest coefficient modulus of `T^N(surviving) − V-center` at `n`.
    pub fn identity_residual(&self, model: &EigenModel, n: u64) -> Result<f64> {
        let center = self.set("V")?.eigen_center()?;
        let monos: Vec<Monomial> = self
            .surviving
            .iter()
            .map(|s| monomial(model, &self.generators, s.factors.clone(), s.multiplicity))
            .collect();
        Ok(residual(&monos, &self.generators, center, n))
    }

    /// Recomputes the condition distances at `n` from the recorded
    /// generators and sets.
    pub fn replay(&self, model: &Model, n: u64) -> Result<Vec<Row>> {
        let sets: Vec<(String, OpenSetSpec)> = self.sets.iter().map(|s| (s.role.clone(), s.set.clone())).collect();
        let ctx = Context { model, generators: &self.generators, sets: &sets };
        self.conditions.iter().map(|c| ctx.row(c, n, 1)).collect()
    }
}

/// The operator the distances are computed for.
#[derive(Debug, Clone)]
pub enum Model {
    Eigen(EigenModel),
    Shift(Polynomial),
}

impl Model {
    fn describe(&self) -> String {
        match self {
            Model::Eigen(m) => format!("φ(z) = {}", m.phi),
            Model::Shift(p) => {
                let coeffs: Vec<String> = p.coeffs().iter().map(|c| format!("{c}")).collect();
                format!("P(B) with P coefficients [{}]", coeffs.join(", "))
            }
        }
    }
}

struct Context<'a> {
    model: &'a Model,
    generators: &'a [Generator],
    sets: &'a [(String, OpenSetSpec)],
}

impl Context<'_> {
    fn set(&self, role: &str) -> Result<&OpenSetSpec> {
        self.sets
            .iter()
            .find(|(r, _)| r == role)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::InvalidInput(format!("no set '{role}'")))
    }

    fn vector(&self, c: &Condition, n: u64) -> Result<Vector> {
        match self.model {
            Model::Eigen(model) => {
                let mut prod = ExpCombination::single_log(C64::new(0.0, 0.0), ONE);
                for (g, &e) in self.generators.iter().zip(&c.exponent) {
                    if e > 0 {
                        prod = prod.multiply(&g.eigen_at(n).power(e));
                    }
                }
                Ok(Vector::Eigen(if c.apply_t { model.apply_t_power(&prod, n) } else { prod }))
            }
            Model::Shift(p) => {
                let (g, e) = self
                    .generators
                    .iter()
                    .zip(&c.exponent)
                    .find(|(_, &e)| e > 0)
                    .ok_or_else(|| Error::InvalidInput(String::from("empty exponent")))?;
                let prod = star_power(&g.shift_at(n)?, *e)?;
                Ok(Vector::Shift(if c.apply_t { apply_pb_power(p, &prod, n) } else { prod }))
            }
        }
    }

    fn row(&self, c: &Condition, n: u64, density: usize) -> Result<Row> {
        let set = self.set(&c.target)?;
        let set = if density > 1 { set.denser(density) } else { set.clone() };
        let x = self.vector(c, n)?;
        let distance = if set.center.is_zero() && x.is_zero() { 0.0 } else { certify_membership(&x, &set)?.1 };
        Ok(Row { n, condition: c.label.clone(), distance, radius: set.radius })
    }
}

// ------------------------------------------------------------- expansions

/// One product of generator terms in `Π u_i^{α_i}`, with multiplicity.
struct Monomial {
    freq: C64,
    /// `(generator, term)` per factor.
    factors: Vec<(usize, usize)>,
    multiplicity: LogComplex,
    eig: LogComplex,
}

impl Monomial {
    fn coef(&self, gens: &[Generator], n: u64) -> LogComplex {
        self.factors.iter().fold(self.multiplicity, |acc, &(g, t)| acc * gens[g].terms[t].coef(n))
    }

    fn image(&self, gens: &[Generator], n: u64) -> LogComplex {
        self.coef(gens, n) * self.eig.powi(n)
    }
}

/// Multisets of size `k` from `0..n_terms` with their multinomial counts.
fn multisets(n_terms: usize, k: u32) -> Vec<(Vec<usize>, f64)> {
    fn rec(start: usize, n_terms: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if left == 0 {
            let mut count = factorial(cur.len());
            let mut i = 0;
            while i < cur.len() {
                let j = (i..cur.len()).take_while(|&j| cur[j] == cur[i]).count();
                count /= factorial(j);
                i += j;
            }
            out.push((cur.clone(), count));
            return;
        }
        for t in start..n_terms {
            cur.push(t);
            rec(t, n_terms, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n_terms, k, &mut Vec::new(), &mut out);
    out
}

fn expand(model: &EigenModel, gens: &[Generator], exponent: &[u32]) -> Vec<Monomial> {
    let mut partial: Vec<(Vec<(usize, usize)>, f64)> = vec![(Vec::new(), 1.0)];
    for (g, (gen, &e)) in gens.iter().zip(exponent).enumerate() {
        if e == 0 {
            continue;
        }
        let choices = multisets(gen.terms.len(), e);
        let mut next = Vec::with_capacity(partial.len() * choices.len());
        for (factors, count) in &partial {
            for (pick, c) in &choices {
                let mut f = factors.clone();
                f.extend(pick.iter().map(|&t| (g, t)));
                next.push((f, count * c));
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|(factors, count)| monomial(model, gens, factors, count))
        .collect()
}

fn monomial(model: &EigenModel, gens: &[Generator], factors: Vec<(usize, usize)>, count: f64) -> Monomial {
    let freq = factors.iter().map(|&(g, t)| gens[g].terms[t].freq).fold(C64::new(0.0, 0.0), |a, b| a + b);
    let value = model.eigenvalue(freq);
    let eig = if value.norm() < PHI_ZERO { LogComplex::ZERO } else { LogComplex::from_complex(value) };
    Monomial { freq, factors, multiplicity: LogComplex::from_real(count), eig }
}

fn residual(monos: &[Monomial], gens: &[Generator], center: &ExpCombination, n: u64) -> f64 {
    let mut sum = ExpCombination::zero();
    for m in monos {
        sum.push(m.freq, m.image(gens, n));
    }
    let worst = sum.sub(center).max_log_mag();
    if worst == f64::NEG_INFINITY {
        0.0
    } else {
        worst.exp()
    }
}

/// Per-class decay ratios; the slope of `log|term(N)|` is exactly linear in
/// `N`, so two evaluations give it.
fn decay_classes(
    condition: &str,
    monos: &[Monomial],
    gens: &[Generator],
    classify: &dyn Fn(&Monomial) -> (String, bool),
) -> Vec<TermClass> {
    let mut out: Vec<TermClass> = Vec::new();
    for m in monos {
        let (class, surviving) = classify(m);
        let a = m.image(gens, 1).log_mag;
        let b = m.image(gens, 2).log_mag;
        let ratio = if m.eig.is_zero() { 0.0 } else { (b - a).exp() };
        match out.iter_mut().find(|c| c.class == class) {
            Some(c) => {
                c.terms += 1;
                c.max_ratio = c.max_ratio.max(ratio);
            }
            None => out.push(TermClass { condition: condition.to_string(), class, terms: 1, max_ratio: ratio, surviving }),
        }
    }
    out
}

fn decay_certificate(classes: &[TermClass]) -> Certificate {
    let mut c = Certificate::new("term decay");
    for t in classes.iter().filter(|t| !t.surviving) {
        c.less(format!("{}: {} per-step ratio", t.condition, t.class), t.max_ratio, 1.0, t.terms);
    }
    c
}

// ------------------------------------------------------------- relocation

fn project_segment(seg: &SegmentWitness, z: C64) -> C64 {
    let v = seg.w2 - seg.w1;
    let t = ((z - seg.w1) * v.conj()).re / v.norm_sqr();
    seg.point(t.clamp(0.0, 1.0))
}

fn project_ball(center: C64, radius: f64, z: C64) -> C64 {
    let d = z - center;
    if d.norm() <= radius {
        z
    } else {
        center + d * (radius / d.norm())
    }
}

/// Nearest point of `{t·dir : lo ≤ t ≤ hi}` for a unit `dir`.
fn project_ray(dir: C64, lo: f64, hi: f64, z: C64) -> C64 {
    dir * (z * dir.conj()).re.clamp(lo, hi)
}

/// Moves every frequency of an eigen center through `place`.
fn relocate_eigen(
    role: &str,
    set: &OpenSetSpec,
    place: impl Fn(C64) -> C64,
) -> Result<(ExpCombination, Relocation)> {
    let center = set.eigen_center()?;
    let mut out = ExpCombination::zero();
    let mut moves = Vec::new();
    for t in center.terms() {
        let z = place(t.freq);
        out.push(z, t.coef);
        moves.push(Move { original: t.freq, relocated: z, displacement: (z - t.freq).norm() });
    }
    let (_, center_shift) = certify_membership(&Vector::Eigen(out.clone()), set)?;
    let flagged = center_shift > set.radius / 2.0;
    Ok((out, Relocation { role: role.to_string(), moves, center_shift, flagged }))
}

fn check_w(w: &OpenSetSpec) -> Result<()> {
    if !w.center.is_zero() {
        return Err(Error::WNotCenteredAtZero);
    }
    Ok(())
}

fn eigen_sets(model: &EigenModel, sets: &[&OpenSetSpec]) -> Result<()> {
    for s in sets {
        s.validate()?;
        s.eigen_center()?;
        if s.kernel()? != model.kernel {
            return Err(Error::InvalidInput(String::from("set kernel differs from the model kernel")));
        }
    }
    Ok(())
}

fn fixed_terms(center: &ExpCombination) -> Vec<GenTerm> {
    center.terms().iter().map(|t| GenTerm { freq: t.freq, kind: TermKind::Fixed { coef: t.coef } }).collect()
}

// ------------------------------------------------------------- N-search

struct Run<'a> {
    construction: Construction,
    model: &'a Model,
    exponents: Vec<Vec<u32>>,
    n_max: u64,
    sets: Vec<(String, OpenSetSpec)>,
    certificates: Vec<Certificate>,
    relocations: Vec<Relocation>,
    generators: Vec<Generator>,
    conditions: Vec<Condition>,
    term_classes: Vec<TermClass>,
    /// Monomials of the designated surviving term and the center they must
    /// reproduce.
    identity: Option<(Vec<Monomial>, ExpCombination)>,
    notes: Vec<String>,
}

impl Run<'_> {
    fn identity_residual(&self, n: u64) -> Option<f64> {
        let (monos, center) = self.identity.as_ref()?;
        Some(residual(monos, &self.generators, center, n))
    }

    fn execute(self) -> Result<Transcript> {
        let ctx = Context { model: self.model, generators: &self.generators, sets: &self.sets };
        let mut rows = Vec::new();
        let mut coefficients = Vec::new();
        let mut tested = Vec::new();
        let mut outcome = None;
        for n in n_schedule(self.n_max) {
            tested.push(n);
            let c: Vec<LogComplex> = self
                .generators
                .iter()
                .flat_map(|g| g.terms.iter())
                .filter(|t| t.varying().is_some())
                .map(|t| t.coef(n))
                .collect();
            coefficients.push(CoefficientRow { n, c });
            let mut at_n = Vec::with_capacity(self.conditions.len() + 1);
            for cond in &self.conditions {
                at_n.push(ctx.row(cond, n, 1)?);
            }
            let identity_ok = match self.identity_residual(n) {
                Some(r) => {
                    rows.push(Row { n, condition: IDENTITY_ROW.to_string(), distance: r, radius: IDENTITY_TOL });
                    r < IDENTITY_TOL
                }
                None => true,
            };
            let candidate = identity_ok && at_n.iter().all(|r| r.distance < CERTIFY_FRACTION * r.radius);
            rows.extend(at_n);
            if candidate {
                let recheck = self
                    .conditions
                    .iter()
                    .map(|c| ctx.row(c, n, RECHECK_DENSITY))
                    .collect::<Result<Vec<_>>>()?;
                if recheck.iter().all(Row::inside) {
                    outcome = Some(Outcome::Certified { n, recheck });
                    break;
                }
            }
        }
        let outcome = outcome.unwrap_or_else(|| Outcome::NSearchExhausted { best: best_rows(&self.conditions, &rows) });
        Ok(Transcript {
            construction: self.construction,
            operator: self.model.describe(),
            kernel: match self.model {
                Model::Eigen(m) => Some(m.kernel),
                Model::Shift(_) => None,
            },
            polynomial: match self.model {
                Model::Shift(p) => Some(p.clone()),
                Model::Eigen(_) => None,
            },
            exponents: self.exponents,
            n_max: self.n_max,
            sets: self.sets.into_iter().map(|(role, set)| NamedSet { role, set }).collect(),
            certificates: self.certificates,
            relocations: self.relocations,
            generators: self.generators,
            conditions: self.conditions,
            term_classes: self.term_classes,
            surviving: self.identity.iter().flat_map(|(monos, _)| monos).map(|m| SurvivingTerm {
                factors: m.factors.clone(),
                multiplicity: m.multiplicity.to_complex().re,
            }).collect(),
            tested,
            rows,
            coefficients,
            outcome,
            notes: self.notes,
        })
    }
}

fn best_rows(conditions: &[Condition], rows: &[Row]) -> Vec<BestRow> {
    conditions
        .iter()
        .filter_map(|c| {
            let mine: Vec<&Row> = rows.iter().filter(|r| r.condition == c.label).collect();
            let best = mine.iter().min_by(|a, b| (a.distance / a.radius).total_cmp(&(b.distance / b.radius)))?;
            Some(BestRow {
                condition: c.label.clone(),
                n: best.n,
                distance: best.distance,
                radius: best.radius,
                final_distance: mine.last().map_or(f64::NAN, |r| r.distance),
            })
        })
        .collect()
}

fn require_certificates(certs: &[Certificate]) -> Result<()> {
    for c in certs {
        if !c.holds() {
            let failing: Vec<String> = c.failures().map(|p| p.name.clone()).collect();
            return Err(Error::HypothesisViolation(format!("certificate '{}' fails: {}", c.subject, failing.join("; "))));
        }
    }
    Ok(())
}

fn single(n: u32) -> Vec<u32> {
    vec![n]
}

fn v_classes(m: u32, gens: &[Generator]) -> impl Fn(&Monomial) -> (String, bool) + '_ {
    move |mono: &Monomial| {
        let js: Vec<usize> = mono.factors.iter().filter_map(|&(g, t)| gens[g].terms[t].varying()).collect();
        let d = js.len() as u32;
        if d < m {
            (format!("v1 (d={d} < m)"), false)
        } else if js.iter().all(|&j| j == js[0]) {
            (String::from("v3 (diagonal)"), true)
        } else {
            (String::from("v2 (nondiagonal)"), false)
        }
    }
}

fn w_classes(gens: &[Generator]) -> impl Fn(&Monomial) -> (String, bool) + '_ {
    move |mono: &Monomial| {
        let d = mono.factors.iter().filter(|&&(g, t)| gens[g].terms[t].varying().is_some()).count();
        (format!("d={d}"), false)
    }
}

// ------------------------------------------------------------- constructions

/// Single-generator construction for small eigenvalues: `u ∈ U`,
/// `T^N(u^n) ∈ W` for `n < m` and `T^N(u^m) ∈ V`.
pub fn small_eigen_construct(
    model: &EigenModel,
    u: &OpenSetSpec,
    v: &OpenSetSpec,
    w: &OpenSetSpec,
    m: u32,
    n_max: u64,
    strategy: ScheduleStrategy,
) -> Result<Transcript> {
    eigen_sets(model, &[u, v, w])?;
    check_w(w)?;
    small_eigen_inner(model, u, v, Some(w), m, n_max, strategy, Construction::SmallEigen)
}

#[allow(clippy::too_many_arguments)]
fn small_eigen_inner(
    model: &EigenModel,
    u: &OpenSetSpec,
    v: &OpenSetSpec,
    w: Option<&OpenSetSpec>,
    m: u32,
    n_max: u64,
    strategy: ScheduleStrategy,
    construction: Construction,
) -> Result<Transcript> {
    if m == 0 {
        return Err(Error::InvalidInput(String::from("m must be at least 1")));
    }
    let phi = &model.phi;
    let params = find_schedule_params(phi, m, strategy)?;
    let delta = find_schedule_delta(phi, &params)?;
    let segment = find_convex_segment(phi, params.w0(), delta.delta, true)?;
    let mut certificates = vec![params.certificate.clone()];
    if let Some(s) = &params.small_eigen {
        certificates.push(s.certificate.clone());
    }
    certificates.push(delta.certificate.clone());
    certificates.push(segment.certificate.clone());
    require_certificates(&certificates)?;

    let (v_center, v_reloc) = relocate_eigen("V", v, |z| project_segment(&segment, z))?;
    let (u_center, u_reloc) = relocate_eigen("U", u, |z| project_ball(params.a, INTERIOR * delta.delta, z))?;
    let mf = m as f64;
    let mut terms = fixed_terms(&u_center);
    for (j, t) in v_center.terms().iter().enumerate() {
        let recipe = Recipe::Eigen { num: t.coef, eig: LogComplex::from_complex(phi.eval(t.freq)), p: m };
        terms.push(GenTerm { freq: t.freq / mf, kind: TermKind::Varying { j, recipe } });
    }
    let generators = vec![Generator { name: String::from("u"), terms }];
    let mut sets = vec![
        (String::from("U"), u.with_center(Vector::Eigen(u_center))),
        (String::from("V"), v.with_center(Vector::Eigen(v_center.clone()))),
    ];
    let mut conditions = vec![Condition { label: String::from("u ∈ U"), exponent: single(1), apply_t: false, target: "U".into() }];
    let mut term_classes = Vec::new();
    if let Some(w) = w {
        sets.push((String::from("W"), w.clone()));
        for n in 1..m {
            let label = format!("T^N(u^{n}) ∈ W");
            let monos = expand(model, &generators, &single(n));
            term_classes.extend(decay_classes(&label, &monos, &generators, &w_classes(&generators)));
            conditions.push(Condition { label, exponent: single(n), apply_t: true, target: "W".into() });
        }
    }
    let label = format!("T^N(u^{m}) ∈ V");
    let monos = expand(model, &generators, &single(m));
    let surviving: Vec<Monomial> = {
        let classify = v_classes(m, &generators);
        term_classes.extend(decay_classes(&label, &monos, &generators, &classify));
        monos.into_iter().filter(|mono| classify(mono).1).collect()
    };
    conditions.push(Condition { label, exponent: single(m), apply_t: true, target: "V".into() });
    certificates.push(decay_certificate(&term_classes));

    let mut notes = vec![format!("m-th roots of c_j use the principal branch; strategy {strategy:?}")];
    if let Some(k) = params.k {
        notes.push(format!("periodic schedule k = {k}"));
    }
    let model_ref = Model::Eigen(model.clone());
    Run {
        construction,
        model: &model_ref,
        exponents: vec![single(m)],
        n_max,
        sets,
        certificates,
        relocations: vec![u_reloc, v_reloc],
        generators,
        conditions,
        term_classes,
        identity: Some((surviving, v_center)),
        notes,
    }
    .execute()
}

/// Single-generator construction for large eigenvalues, with
/// `c_j = b_j / (m·a1^{m−1}·φ(λ_j + (m−1)γ1)^N)`.
pub fn large_eigen_construct(
    model: &EigenModel,
    u: &OpenSetSpec,
    v: &OpenSetSpec,
    w: &OpenSetSpec,
    m: u32,
    n_max: u64,
    growth_asserted: bool,
) -> Result<Transcript> {
    eigen_sets(model, &[u, v, w])?;
    check_w(w)?;
    let phi = &model.phi;
    let params = find_large_eigen_params(phi, m, growth_asserted)?;
    let gd = find_gamma1_delta(phi, &params)?;
    let certificates = vec![params.certificate.clone(), gd.certificate.clone()];
    require_certificates(&certificates)?;
    let mf = m as f64;
    let shift = gd.gamma1 * (mf - 1.0);

    let (v_center, v_reloc) =
        relocate_eigen("V", v, |z| project_ball(params.w0, INTERIOR * gd.delta, z - shift) + shift)?;
    let dir = params.z0 / params.z0.norm();
    let hi = INTERIOR * (params.z0.norm() / mf).min(gd.delta / mf);
    let gamma1 = gd.gamma1;
    let (mut u_center, u_reloc) = relocate_eigen("U", u, |z| {
        let on_ray = project_ray(dir, hi / 4.0, hi, z);
        if (z - gamma1).norm() < (z - on_ray).norm() {
            gamma1
        } else {
            on_ray
        }
    })?;
    let mut notes = vec![String::from("coefficients c_j need no root (power 1)")];
    let mut a1 = u_center.coef_at(gamma1);
    if a1.is_zero() {
        a1 = LogComplex::from_real(u.radius / 10.0);
        u_center.push(gamma1, a1);
        notes.push(format!("U center has no E(γ1) term; added {}·E(γ1)", u.radius / 10.0));
    }
    let scale = LogComplex::from_real(mf) * a1.powi(m as u64 - 1);
    let mut terms = fixed_terms(&u_center);
    let gamma1_index = terms.iter().position(|t| t.freq == gamma1);
    for (j, t) in v_center.terms().iter().enumerate() {
        let lambda = t.freq - shift;
        let recipe = Recipe::Eigen { num: t.coef / scale, eig: LogComplex::from_complex(phi.eval(t.freq)), p: 1 };
        terms.push(GenTerm { freq: lambda, kind: TermKind::Varying { j, recipe } });
    }
    let generators = vec![Generator { name: String::from("u"), terms }];
    let mut conditions = vec![Condition { label: String::from("u ∈ U"), exponent: single(1), apply_t: false, target: "U".into() }];
    let mut term_classes = Vec::new();
    for n in 1..m {
        let label = format!("T^N(u^{n}) ∈ W");
        let monos = expand(model, &generators, &single(n));
        term_classes.extend(decay_classes(&label, &monos, &generators, &w_classes(&generators)));
        conditions.push(Condition { label, exponent: single(n), apply_t: true, target: "W".into() });
    }
    let classify = |mono: &Monomial| {
        let d = mono.factors.iter().filter(|&&(_, t)| generators[0].terms[t].varying().is_some()).count();
        let s = mono.factors.iter().filter(|&&(_, t)| Some(t) == gamma1_index).count();
        ((format!("(d={d}, s={s})")), d == 1 && s as u32 == m - 1)
    };
    let label = format!("T^N(u^{m}) ∈ V");
    let monos = expand(model, &generators, &single(m));
    term_classes.extend(decay_classes(&label, &monos, &generators, &classify));
    let surviving: Vec<Monomial> = monos.into_iter().filter(|mono| classify(mono).1).collect();
    conditions.push(Condition { label, exponent: single(m), apply_t: true, target: "V".into() });
    let mut certificates = certificates;
    certificates.push(decay_certificate(&term_classes));
    let model_ref = Model::Eigen(model.clone());
    Run {
        construction: Construction::LargeEigen,
        model: &model_ref,
        exponents: vec![single(m)],
        n_max,
        sets: vec![
            (String::from("U"), u.with_center(Vector::Eigen(u_center))),
            (String::from("V"), v.with_center(Vector::Eigen(v_center.clone()))),
            (String::from("W"), w.clone()),
        ],
        certificates,
        relocations: vec![u_reloc, v_reloc],
        generators,
        conditions,
        term_classes,
        identity: Some((surviving, v_center)),
        notes,
    }
    .execute()
}

/// Single-power construction: only `u ∈ U` and `T^N(u^m) ∈ V`.
pub fn powers_construct(model: &EigenModel, u: &OpenSetSpec, v: &OpenSetSpec, m: u32, n_max: u64) -> Result<Transcript> {
    eigen_sets(model, &[u, v])?;
    if m == 1 {
        return small_eigen_inner(model, u, v, None, 1, n_max, ScheduleStrategy::CorollaryReduction, Construction::Powers);
    }
    let phi = &model.phi;
    let params = find_powers_params(phi, m)?;
    let segment = find_convex_segment(phi, params.w0, params.delta, true)?;
    let mut certificates = vec![params.certificate.clone(), segment.certificate.clone()];
    require_certificates(&certificates)?;
    let mf = m as f64;
    let (v_center, v_reloc) = relocate_eigen("V", v, |z| project_segment(&segment, z))?;
    let (u_center, u_reloc) =
        relocate_eigen("U", u, |z| project_ball(params.a / mf, INTERIOR * params.delta / mf, z))?;
    let mut terms = fixed_terms(&u_center);
    for (j, t) in v_center.terms().iter().enumerate() {
        let recipe = Recipe::Eigen { num: t.coef, eig: LogComplex::from_complex(phi.eval(t.freq)), p: m };
        terms.push(GenTerm { freq: t.freq / mf, kind: TermKind::Varying { j, recipe } });
    }
    let generators = vec![Generator { name: String::from("u"), terms }];
    let label = format!("T^N(u^{m}) ∈ V");
    let monos = expand(model, &generators, &single(m));
    let (term_classes, surviving) = {
        let classify = v_classes(m, &generators);
        let classes = decay_classes(&label, &monos, &generators, &classify);
        let surviving: Vec<Monomial> = monos.into_iter().filter(|mono| classify(mono).1).collect();
        (classes, surviving)
    };
    certificates.push(decay_certificate(&term_classes));
    let model_ref = Model::Eigen(model.clone());
    Run {
        construction: Construction::Powers,
        model: &model_ref,
        exponents: vec![single(m)],
        n_max,
        sets: vec![
            (String::from("U"), u.with_center(Vector::Eigen(u_center))),
            (String::from("V"), v.with_center(Vector::Eigen(v_center.clone()))),
        ],
        certificates,
        relocations: vec![u_reloc, v_reloc],
        generators,
        conditions: vec![
            Condition { label: String::from("u ∈ U"), exponent: single(1), apply_t: false, target: "U".into() },
            Condition { label, exponent: single(m), apply_t: true, target: "V".into() },
        ],
        term_classes,
        identity: Some((surviving, v_center)),
        notes: vec![String::from("m-th roots of c_j use the principal branch")],
    }
    .execute()
}

/// Multi-generator construction over a finite set `A` of multi-indices:
/// `u_i ∈ U_i`, `T^N(u^α) ∈ W` for `α ≠ β` and `T^N(u^β) ∈ V`.
pub fn multi_generator_construct(
    model: &EigenModel,
    a: &[Vec<u32>],
    us: &[OpenSetSpec],
    v: &OpenSetSpec,
    w: &OpenSetSpec,
    n_max: u64,
) -> Result<Transcript> {
    let plan = find_multiindex_params(a)?;
    let dim = plan.permutation.len();
    if us.len() != dim {
        return Err(Error::InvalidInput(format!("{} generator sets given for {dim} coordinates", us.len())));
    }
    let mut all: Vec<&OpenSetSpec> = us.iter().collect();
    all.push(v);
    all.push(w);
    eigen_sets(model, &all)?;
    check_w(w)?;
    // plan coordinate i is input coordinate permutation[i]
    let u_plan: Vec<&OpenSetSpec> = plan.permutation.iter().map(|&j| &us[j]).collect();

    if plan.set.iter().all(|alpha| alpha[1..].iter().all(|&x| x == 0)) {
        let mut t = small_eigen_inner(
            model,
            u_plan[0],
            v,
            Some(w),
            plan.beta1(),
            n_max,
            ScheduleStrategy::CorollaryReduction,
            Construction::MultiGenerator,
        )?;
        t.certificates.insert(0, plan.certificate.clone());
        t.exponents = a.to_vec();
        t.notes.push(format!(
            "A only involves coordinate {} (input numbering): single-variable path with m = β1 = {}; the other generators are their U centers",
            plan.permutation[0] + 1,
            plan.beta1()
        ));
        return Ok(t);
    }

    let phi = &model.phi;
    let small = find_small_eigen_w0(phi, plan.rho)?;
    let w0 = small.w0;
    let delta = find_multigen_delta(phi, w0, &plan)?;
    let segment = find_convex_segment(phi, w0, delta.delta, true)?;
    let mut certificates = vec![
        plan.certificate.clone(),
        small.certificate.clone(),
        delta.certificate.clone(),
        segment.certificate.clone(),
    ];
    require_certificates(&certificates)?;

    let kappa = w0 * plan.epsilon;
    let dir = w0 / w0.norm();
    let (v_center, v_reloc) = relocate_eigen("V", v, |z| project_segment(&segment, z))?;
    let labels: Vec<(String, bool)> = plan
        .set
        .iter()
        .map(|alpha| {
            let is_beta = *alpha == plan.beta;
            let mut orig = vec![0u32; dim];
            for (i, &x) in alpha.iter().enumerate() {
                orig[plan.permutation[i]] = x;
            }
            let parts: Vec<String> = orig.iter().map(|x| x.to_string()).collect();
            (format!("T^N(u^({})) ∈ {}", parts.join(","), if is_beta { "V" } else { "W" }), is_beta)
        })
        .collect();

    // Fixed frequencies go onto [t/4, t]·ŵ0. Scan t downward from ρ|w0|
    // and keep the scale whose slowest non-surviving term decays fastest.
    let place = |t: f64, omega: f64| -> Result<(Vec<ExpCombination>, Vec<Relocation>, Vec<Generator>)> {
        let mut fixed = Vec::new();
        let mut relocations = Vec::new();
        for (i, set) in u_plan.iter().enumerate() {
            let (c, r) = relocate_eigen(&format!("U{}", plan.permutation[i] + 1), set, |z| project_ray(dir, t / 4.0, t, z))?;
            fixed.push(c);
            relocations.push(r);
        }
        let generators = multigen_generators(phi, &plan, &fixed, &v_center, kappa, omega);
        Ok((fixed, relocations, generators))
    };
    let classes_for = |gens: &[Generator]| -> Vec<TermClass> {
        let mut out = Vec::new();
        for (alpha, (label, is_beta)) in plan.set.iter().zip(&labels) {
            let monos = expand(model, gens, alpha);
            out.extend(decay_classes(label, &monos, gens, &|m| {
                let (c, s) = multigen_class(&plan, gens, m);
                (c, s && *is_beta)
            }));
        }
        out
    };
    let worst = |classes: &[TermClass]| classes.iter().filter(|c| !c.surviving).map(|c| c.max_ratio).fold(0.0, f64::max);
    let mut scale = None;
    let mut t = INTERIOR * plan.rho * w0.norm();
    for _ in 0..crate::search::MAX_HALVINGS {
        let (_, _, gens) = place(t, 1.0)?;
        let r = worst(&classes_for(&gens));
        if r < 1.0 - crate::certificate::MIN_MARGIN && scale.is_none_or(|(_, best)| r < best) {
            scale = Some((t, r));
        }
        t *= 0.5;
    }
    let (t, _) = scale.ok_or_else(|| Error::NotFound(String::from("no placement of the fixed frequencies decays")))?;
    let (fixed, _, _) = place(t, 1.0)?;

    // ω: the largest power of 1/2 keeping every u_i with an ω-term well inside U_i
    let mut omega = 1.0;
    for _ in 0..60 {
        let mut ok = true;
        for (k, &i) in plan.i_beta.iter().enumerate() {
            let mut ui = fixed[i].clone();
            ui.push(kappa * (plan.rho_i[k] / plan.beta[i] as f64), LogComplex::from_real(omega));
            let set = u_plan[i].with_center(Vector::Eigen(fixed[i].clone()));
            let (_, d) = certify_membership(&Vector::Eigen(ui), &set)?;
            ok &= d < CERTIFY_FRACTION * set.radius;
        }
        if ok {
            break;
        }
        omega *= 0.5;
    }
    let (fixed, mut relocations, generators) = place(t, omega)?;
    relocations.push(v_reloc);
    let term_classes = classes_for(&generators);
    certificates.push(decay_certificate(&term_classes));

    let mut sets = Vec::new();
    let mut conditions = Vec::new();
    for i in 0..dim {
        let role = format!("U{}", plan.permutation[i] + 1);
        sets.push((role.clone(), u_plan[i].with_center(Vector::Eigen(fixed[i].clone()))));
        let mut e = vec![0u32; dim];
        e[i] = 1;
        conditions.push(Condition { label: format!("{} ∈ {role}", generators[i].name), exponent: e, apply_t: false, target: role });
    }
    sets.push((String::from("V"), v.with_center(Vector::Eigen(v_center.clone()))));
    sets.push((String::from("W"), w.clone()));
    let mut surviving = Vec::new();
    for (alpha, (label, is_beta)) in plan.set.iter().zip(labels) {
        if is_beta {
            surviving = expand(model, &generators, alpha)
                .into_iter()
                .filter(|m| multigen_class(&plan, &generators, m).1)
                .collect();
        }
        let target = if is_beta { "V" } else { "W" };
        conditions.push(Condition { label, exponent: alpha.clone(), apply_t: true, target: target.into() });
    }
    let notes = vec![
        format!(
            "κ = εw0 with ε = {:.6e}, ρ = {:.12}, η = {:.12}, ω = {omega:e}; β1-th roots use the principal branch",
            plan.epsilon, plan.rho, plan.eta
        ),
        format!("fixed frequencies placed on [t/4, t]·w0/|w0| with t = {t:.6e}"),
        format!("coordinate permutation (plan → input): {:?}", plan.permutation),
    ];
    let model_ref = Model::Eigen(model.clone());
    Run {
        construction: Construction::MultiGenerator,
        model: &model_ref,
        exponents: a.to_vec(),
        n_max,
        sets,
        certificates,
        relocations,
        generators,
        conditions,
        term_classes,
        identity: Some((surviving, v_center)),
        notes,
    }
    .execute()
}

fn multigen_generators(
    phi: &crate::funcexpr::FunctionExpr,
    plan: &MultiIndexPlan,
    fixed: &[ExpCombination],
    v_center: &ExpCombination,
    kappa: C64,
    omega: f64,
) -> Vec<Generator> {
    let b1 = plan.beta1();
    let rho_total: f64 = plan.rho_i.iter().sum();
    let beta_weight: u32 = plan.i_beta.iter().map(|&i| plan.beta[i]).sum();
    let omega_pow = LogComplex::from_real(omega).powi(beta_weight as u64);
    let mut generators = Vec::with_capacity(fixed.len());
    for (i, f) in fixed.iter().enumerate() {
        let mut terms = fixed_terms(f);
        if i == 0 {
            for (j, t) in v_center.terms().iter().enumerate() {
                let z = t.freq - kappa * rho_total;
                let recipe =
                    Recipe::Eigen { num: t.coef / omega_pow, eig: LogComplex::from_complex(phi.eval(t.freq)), p: b1 };
                terms.push(GenTerm { freq: z / b1 as f64, kind: TermKind::Varying { j, recipe } });
            }
        } else if let Some(k) = plan.i_beta.iter().position(|&x| x == i) {
            terms.push(GenTerm {
                freq: kappa * (plan.rho_i[k] / plan.beta[i] as f64),
                kind: TermKind::Omega { coef: LogComplex::from_real(omega) },
            });
        }
        generators.push(Generator { name: format!("u{}", plan.permutation[i] + 1), terms });
    }
    generators
}

/// Class of a monomial of `u^α`: how many varying factors it has (and
/// whether they share `j`), and whether it carries the full `ω` product.
fn multigen_class(plan: &MultiIndexPlan, gens: &[Generator], mono: &Monomial) -> (String, bool) {
    let js: Vec<usize> = mono.factors.iter().filter_map(|&(g, t)| gens[g].terms[t].varying()).collect();
    let full = plan.i_beta.iter().all(|&i| {
        let omegas = mono
            .factors
            .iter()
            .filter(|&&(g, t)| g == i && matches!(gens[g].terms[t].kind, TermKind::Omega { .. }))
            .count();
        omegas as u32 == plan.beta[i]
    });
    let head = if (js.len() as u32) < plan.beta1() {
        "t < β1"
    } else if js.iter().all(|&j| j == js[0]) {
        "C^β1 diagonal"
    } else {
        "C^β1 nondiagonal"
    };
    let tail = if full { "full Ω product" } else { "partial Ω product" };
    (format!("{head} × {tail}"), head == "C^β1 diagonal" && full)
}

// ------------------------------------------------------------- shift

/// `ω_{m−1,0}(λ)`, normalised so that `P(B)^N((λ^k)^{⋆m}) ≈ ω N^{m−1} P(λ)^{N−m+1}(λ^k)`.
fn shift_omega(p: &Polynomial, lambda: C64, m: u32) -> Result<(C64, Option<f64>)> {
    match m {
        1 => Ok((C64::new(1.0, 0.0), None)),
        2 => Ok((lambda * p.derivative().eval(lambda), None)),
        _ => {
            let d = (m - 1) as usize;
            let table = a_coeff_table(p, lambda, d, 4000)?;
            let est = omega_estimate(&table, 0, &[2000, 4000])?;
            if est.relative_change > OMEGA_TOL {
                return Err(Error::OmegaUnconverged { relative_change: est.relative_change });
            }
            // (λ^k)^{⋆m} = C(k+m−1, m−1)λ^k has leading coefficient 1/(m−1)!
            Ok((est.value / factorial(d), Some(est.relative_change)))
        }
    }
}

fn nearest(points: &[C64], z: C64) -> Option<C64> {
    points.iter().copied().min_by(|a, b| (a - z).norm().total_cmp(&(b - z).norm()))
}

fn relocate_shift(
    role: &str,
    set: &OpenSetSpec,
    place: impl Fn(C64) -> Result<C64>,
) -> Result<(PolyGeomCombination, Relocation)> {
    let center = set.shift_center()?;
    let mut out = PolyGeomCombination::zero();
    let mut moves = Vec::new();
    for t in center.terms() {
        if t.coeffs.degree_or_zero() > 0 {
            return Err(Error::InvalidInput(format!("{role} center must be a sum of geometric sequences")));
        }
        let z = place(t.base)?;
        out = out.add(&PolyGeomCombination::geometric(t.coeffs.coeff(0), z)?)?;
        moves.push(Move { original: t.base, relocated: z, displacement: (z - t.base).norm() });
    }
    let (_, center_shift) = certify_membership(&Vector::Shift(out.clone()), set)?;
    let flagged = center_shift > set.radius / 2.0;
    Ok((out, Relocation { role: role.to_string(), moves, center_shift, flagged }))
}

/// Backward-shift construction for `P(B)` on `ℓ¹(ℕ)`.
pub fn shift_construct(
    p: &Polynomial,
    u: &OpenSetSpec,
    v: &OpenSetSpec,
    w: &OpenSetSpec,
    m: u32,
    n_max: u64,
) -> Result<Transcript> {
    for s in [u, v, w] {
        s.validate()?;
        s.shift_center()?;
    }
    check_w(w)?;
    if m == 0 {
        return Err(Error::InvalidInput(String::from("m must be at least 1")));
    }
    if p.degree_or_zero() == 0 {
        return Err(Error::InvalidInput(String::from("P must be nonconstant")));
    }
    let levels = sample_level_sets(p, 64, 64)?;
    let mut certificates = vec![levels.certificate.clone()];
    let dp = p.derivative();
    let limit = 1.0 - DISK_CLEARANCE;
    let admissible_low = |z: C64| {
        p.eval(z).norm() < limit - 1e-9 && (z * dp.eval(z)).norm() >= NONDEGENERACY && z.norm() <= limit
    };
    let (u_center, u_reloc) = relocate_shift("U", u, |z| {
        if admissible_low(z) {
            return Ok(z);
        }
        let mut cands = levels.lambda2.clone();
        cands.extend(low_point_on_ray(p, z.arg()));
        nearest(&cands, z).ok_or_else(|| Error::NotFound(String::from("no interior level point")))
    })?;
    let (v_center, v_reloc) = relocate_shift("V", v, |z| {
        let level = (p.eval(z).norm() - 1.0).abs() < LEVEL_TOL;
        if level && (z * dp.eval(z)).norm() >= NONDEGENERACY && z.norm() <= limit {
            return Ok(z);
        }
        let mut cands = levels.lambda1.clone();
        cands.extend(level_crossing_on_ray(p, z.arg()));
        nearest(&cands, z).ok_or_else(|| Error::NotFound(String::from("no level point")))
    })?;

    let mut terms: Vec<GenTerm> = u_center
        .terms()
        .iter()
        .map(|t| GenTerm { freq: t.base, kind: TermKind::Fixed { coef: LogComplex::from_complex(t.coeffs.coeff(0)) } })
        .collect();
    let mut notes = vec![String::from("m-th roots of c_j use the principal branch")];
    let mut omega_cert = Certificate::new("ω estimates");
    for (j, t) in v_center.terms().iter().enumerate() {
        let (omega, change) = shift_omega(p, t.base, m)?;
        if let Some(change) = change {
            omega_cert.less(format!("relative change of ω at λ_{j}"), change, OMEGA_TOL, 2);
        }
        notes.push(format!("ω_(m−1,0)(λ_{j}) = {omega}"));
        let recipe = Recipe::Shift {
            b: LogComplex::from_complex(t.coeffs.coeff(0)),
            omega: LogComplex::from_complex(omega),
            eig: LogComplex::from_complex(p.eval(t.base)),
            m,
        };
        terms.push(GenTerm { freq: t.base, kind: TermKind::Varying { j, recipe } });
    }
    if !omega_cert.predicates.is_empty() {
        certificates.push(omega_cert);
    }
    let generators = vec![Generator { name: String::from("u"), terms }];
    let mut conditions = vec![Condition { label: String::from("u ∈ U"), exponent: single(1), apply_t: false, target: "U".into() }];
    for n in 1..m {
        conditions.push(Condition { label: format!("P(B)^N(u^{n}) ∈ W"), exponent: single(n), apply_t: true, target: "W".into() });
    }
    conditions.push(Condition { label: format!("P(B)^N(u^{m}) ∈ V"), exponent: single(m), apply_t: true, target: "V".into() });
    let model = Model::Shift(p.clone());
    Run {
        construction: Construction::Shift,
        model: &model,
        exponents: vec![single(m)],
        n_max,
        sets: vec![
            (String::from("U"), u.with_center(Vector::Shift(u_center))),
            (String::from("V"), v.with_center(Vector::Shift(v_center))),
            (String::from("W"), w.clone()),
        ],
        certificates,
        relocations: vec![u_reloc, v_reloc],
        generators,
        conditions,
        term_classes: Vec::new(),
        identity: None,
        notes,
    }
    .execute()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{c64, real};
    use crate::funcexpr::{examples, FunctionExpr};

    fn ball(center: ExpCombination, radius: f64) -> OpenSetSpec {
        OpenSetSpec::eigen_default(center, radius, Kernel::TranslationExp)
    }

    #[test]
    fn schedule_shape() {
        let s = n_schedule(150);
        assert_eq!(&s[..3], &[1, 2, 3]);
        assert_eq!(s[99], 100);
        assert_eq!(&s[100..], &[120, 144, 150]);
        assert_eq!(*n_schedule(100_000).last().unwrap(), 100_000);
        assert_eq!(n_schedule(5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn multisets_count_orderings() {
        let ms = multisets(3, 2);
        assert_eq!(ms.len(), 6);
        let total: f64 = ms.iter().map(|(_, c)| c).sum();
        assert_eq!(total, 9.0);
        assert_eq!(multisets(2, 0), vec![(vec![], 1.0)]);
    }

    #[test]
    fn membership_basics() {
        let center = ExpCombination::single(c64(0.3, 0.0), c64(1.0, 0.0));
        let s = ball(center.clone(), 0.1);
        assert_eq!(certify_membership(&Vector::Eigen(center), &s).unwrap(), (true, 0.0));
        let zero = ball(ExpCombination::zero(), 0.5);
        assert_eq!(certify_membership(&Vector::Eigen(ExpCombination::zero()), &zero).unwrap(), (true, 0.0));
        let one = ExpCombination::single(c64(0.0, 0.0), c64(1.0, 0.0));
        let unit = OpenSetSpec::eigen(ExpCombination::zero(), 0.5, Kernel::TranslationExp, MetricSpec::centered(&[1.0], &[1.0]).unwrap());
        let (inside, d) = certify_membership(&Vector::Eigen(one), &unit).unwrap();
        assert!(!inside);
        assert!((d - 1.0).abs() < 1e-15);
        let shift = OpenSetSpec::shift(PolyGeomCombination::zero(), 1.0);
        assert_eq!(certify_membership(&Vector::Eigen(ExpCombination::zero()), &shift), Err(Error::KindMismatch));
    }

    #[test]
    fn w_must_be_centered_at_zero() {
        let model = EigenModel::new(examples::cos(), Kernel::TranslationExp);
        let u = ball(ExpCombination::single(c64(0.01, 0.0), c64(0.7, 0.0)), 0.5);
        let v = ball(ExpCombination::single(c64(3.0, 0.3), c64(1.3, 0.0)), 1e-2);
        let w = ball(ExpCombination::single(c64(0.0, 0.0), c64(0.1, 0.0)), 1e-3);
        let err = small_eigen_construct(&model, &u, &v, &w, 2, 10, ScheduleStrategy::CorollaryReduction).unwrap_err();
        assert_eq!(err, Error::WNotCenteredAtZero);
    }

    #[test]
    fn m_equal_one_cancels_exactly() {
        let model = EigenModel::new(examples::exp_minus_two(), Kernel::TranslationExp);
        let u = ball(ExpCombination::single(c64(0.1, 0.0), c64(0.5, 0.0)), 0.3);
        let v = ball(ExpCombination::single(c64(1.2, 0.0), c64(1.0, 0.0)), 0.05);
        let w = ball(ExpCombination::zero(), 1e-3);
        let t = small_eigen_construct(&model, &u, &v, &w, 1, DEFAULT_N_MAX_EIGEN, ScheduleStrategy::CorollaryReduction).unwrap();
        assert!(t.is_certified(), "{:?}", t.outcome);
        assert!(t.rows_for(IDENTITY_ROW).all(|r| r.distance < 1e-12));
    }

    #[test]
    fn large_eigen_affine_m2() {
        let phi = FunctionExpr::affine(c64(-1.0, 0.0), c64(1.0, 0.0));
        let model = EigenModel::new(phi, Kernel::TranslationExp);
        let u = ball(ExpCombination::single(c64(0.05, 0.0), c64(0.5, 0.0)), 0.5);
        let v = ball(ExpCombination::single(c64(4.0, 0.0), c64(1.0, 0.0)), 0.05);
        let w = ball(ExpCombination::zero(), 1e-2);
        let t = large_eigen_construct(&model, &u, &v, &w, 2, DEFAULT_N_MAX_EIGEN, true).unwrap();
        assert!(t.is_certified(), "{:?}", t.outcome);
        assert!(t.rows_for(IDENTITY_ROW).all(|r| r.distance < IDENTITY_TOL));
        let surviving: Vec<_> = t.term_classes.iter().filter(|c| c.surviving).collect();
        assert_eq!(surviving.len(), 1);
        assert_eq!(surviving[0].class, "(d=1, s=1)");
    }

    #[test]
    fn shift_two_x_m2() {
        let p = Polynomial::from_real(&[0.0, 2.0]);
        let u = OpenSetSpec::shift(PolyGeomCombination::geometric(real(0.5), real(0.3)).unwrap(), 0.1);
        let v = OpenSetSpec::shift(PolyGeomCombination::geometric(real(0.04), real(0.5)).unwrap(), 0.1);
        let w = OpenSetSpec::shift(PolyGeomCombination::zero(), 1e-2);
        let t = shift_construct(&p, &u, &v, &w, 2, DEFAULT_N_MAX_SHIFT).unwrap();
        let n = t.certified_n().expect("certified");
        assert!(n > 1975 && n <= 3000, "n = {n}");
        let recheck = match &t.outcome {
            Outcome::Certified { recheck, .. } => recheck,
            _ => unreachable!(),
        };
        assert!(recheck.iter().all(Row::inside));
    }

    #[test]
    fn shift_matches_banded_matrix_oracle() {
        let p = Polynomial::from_real(&[0.0, 2.0]);
        let u = OpenSetSpec::shift(PolyGeomCombination::geometric(real(0.5), real(0.3)).unwrap(), 0.1);
        let v = OpenSetSpec::shift(PolyGeomCombination::geometric(real(0.04), real(0.5)).unwrap(), 0.1);
        let w = OpenSetSpec::shift(PolyGeomCombination::zero(), 1e-2);
        let t = shift_construct(&p, &u, &v, &w, 2, 30).unwrap();
        let model = Model::Shift(p.clone());
        for n in [1u64, 7, 30] {
            let u_n = t.generators[0].shift_at(n).unwrap();
            let sq = star_power(&u_n, 2).unwrap();
            let image = apply_pb_power(&p, &sq, n);
            const K: usize = 200;
            // P(B)^N = 2^N B^N on sequences
            let mut seq = crate::shiftalg::to_sequence(&sq, K + n as usize);
            for _ in 0..n {
                seq = seq[1..].iter().map(|x| x * 2.0).collect();
            }
            let got = crate::shiftalg::to_sequence(&image, K);
            for k in 0..K {
                assert!((got[k] - seq[k]).norm() <= 1e-8 * (1.0 + seq[k].norm()), "n={n} k={k}");
            }
            assert_eq!(t.replay(&model, n).unwrap(), t.rows_at(n).filter(|r| r.condition != IDENTITY_ROW).cloned().collect::<Vec<_>>());
        }
    }

    #[test]
    fn recipe_cancels_eigenvalue_powers() {
        let eig = LogComplex::from_complex(c64(1.3, 0.4));
        let r = Recipe::Eigen { num: LogComplex::from_complex(c64(2.0, -1.0)), eig, p: 3 };
        let back = r.at(5000).powi(3) * eig.powi(5000);
        assert!((back.to_complex() - c64(2.0, -1.0)).norm() < 1e-10);
    }
}
