//! The four commands, independent of argument parsing.

use std::path::{Path, PathBuf};

use hyperalg_core::certificate::{Certificate, Sampling};
use hyperalg_core::engine::{
    large_eigen_construct, multi_generator_construct, powers_construct, shift_construct, small_eigen_construct,
    Outcome, Transcript, DEFAULT_N_MAX_EIGEN, DEFAULT_N_MAX_SHIFT,
};
use hyperalg_core::search::{
    certify_schedule_delta, find_convex_segment, find_gamma1_delta, find_large_eigen_params, find_multiindex_params,
    find_powers_params, find_schedule_delta, find_schedule_params, find_small_eigen_w0, sample_level_sets,
};
use hyperalg_core::shiftalg::a_coeff_table;
use hyperalg_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, ConstructionKind, Operator, RunConfig, SearchSpec};
use crate::output::{write_csv, write_json, OutputError};
use crate::verify::{run_identities, Poison, VerifyReport};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success = 0,
    IdentityFailure = 1,
    SearchFailure = 2,
    NSearchExhausted = 3,
    ConfigError = 4,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{kind}: {0}", kind = error_kind(.0))]
    Search(Error),
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        CommandError::Search(e)
    }
}

impl CommandError {
    pub fn status(&self) -> Status {
        match self {
            CommandError::Search(_) => Status::SearchFailure,
            _ => Status::ConfigError,
        }
    }
}

/// Stable name of an error variant, used as the `reason` in reports.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::ZeroValue { .. } => "ZeroValue",
        Error::DomainError { .. } => "DomainError",
        Error::BaseCollision { .. } => "BaseCollision",
        Error::HypothesisViolation(_) => "HypothesisViolation",
        Error::ExponentialLike => "ExponentialLike",
        Error::NoSegment => "NoSegment",
        Error::NotFound(_) => "NotFound",
        Error::NoCrossing => "NoCrossing",
        Error::Infeasible(_) => "Infeasible",
        Error::PreconditionNotAsserted(_) => "PreconditionNotAsserted",
        Error::OmegaUnconverged { .. } => "OmegaUnconverged",
        Error::KindMismatch => "KindMismatch",
        Error::WNotCenteredAtZero => "WNotCenteredAtZero",
        Error::Parse { .. } => "Parse",
        Error::InvalidInput(_) => "InvalidInput",
    }
}

/// What a command produced.
#[derive(Debug)]
pub struct Report {
    pub status: Status,
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
}

// ------------------------------------------------------------------ verify

pub fn verify(seed: u64, poison: Option<Poison>, out: &Path) -> Result<(Report, VerifyReport), CommandError> {
    let report = run_identities(seed, poison);
    let path = out.join("verify.json");
    write_json(&path, &report)?;
    let mut summary: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {:<50} max error {:.3e} (tolerance {:.0e}, {} cases)",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_error,
                c.tolerance,
                c.cases
            )
        })
        .collect();
    summary.push(format!("{} identities checked, seed {seed}", report.checks.len()));
    let status = if report.passed { Status::Success } else { Status::IdentityFailure };
    Ok((Report { status, summary, files: vec![path] }, report))
}

// ------------------------------------------------------------------ search

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub seed: u64,
    pub search: SearchSpec,
    pub found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
    pub certificates: Vec<Certificate>,
    /// The same predicates on a denser grid jittered by the seed.
    pub revalidation: Vec<Certificate>,
    pub all_margins_positive: bool,
}

fn run_search(op: &Operator, spec: &SearchSpec, seed: u64) -> Result<(Value, Vec<Certificate>, Vec<Certificate>), CommandError> {
    let reval = Sampling::revalidation(seed);
    Ok(match spec {
        SearchSpec::Schedule { m, strategy } => {
            let phi = op.phi()?;
            let params = find_schedule_params(phi, *m, *strategy)?;
            let delta = find_schedule_delta(phi, &params)?;
            let mut certs = vec![params.certificate.clone()];
            let mut again = vec![params.recertify(phi)];
            if let Some(s) = &params.small_eigen {
                certs.push(s.certificate.clone());
                again.push(s.recertify(phi, &reval));
            }
            certs.push(delta.certificate.clone());
            again.push(certify_schedule_delta(phi, params.a, params.b, *m, delta.delta, &reval));
            (json!({ "params": params, "delta": delta.delta }), certs, again)
        }
        SearchSpec::SmallEigen { rho } => {
            let phi = op.phi()?;
            let w = find_small_eigen_w0(phi, *rho)?;
            let again = vec![w.recertify(phi, &reval)];
            (json!(w), vec![w.certificate.clone()], again)
        }
        SearchSpec::Segment { w0, delta, require_large } => {
            let phi = op.phi()?;
            let s = find_convex_segment(phi, w0.value(), *delta, *require_large)?;
            let again = vec![s.recertify(phi, &reval)];
            (json!(s), vec![s.certificate.clone()], again)
        }
        SearchSpec::LargeEigen { m, growth_asserted } => {
            let phi = op.phi()?;
            let params = find_large_eigen_params(phi, *m, *growth_asserted)?;
            let gd = find_gamma1_delta(phi, &params)?;
            let again = vec![params.recertify(phi, &reval), gd.recertify(phi, &params, &reval)];
            (json!({ "params": params, "gamma1_delta": gd }), vec![params.certificate.clone(), gd.certificate.clone()], again)
        }
        SearchSpec::Powers { m } => {
            let phi = op.phi()?;
            let p = find_powers_params(phi, *m)?;
            let again = vec![p.recertify(phi, &reval)];
            (json!(p), vec![p.certificate.clone()], again)
        }
        SearchSpec::LevelSets { n1, n2 } => {
            let p = op.polynomial()?;
            let sets = sample_level_sets(p, *n1, *n2)?;
            let again = vec![sets.recertify(p)];
            (json!(sets), vec![sets.certificate.clone()], again)
        }
        SearchSpec::MultiIndex { set } => {
            let plan = find_multiindex_params(set)?;
            let again = vec![plan.recertify()];
            (json!(plan), vec![plan.certificate.clone()], again)
        }
    })
}

pub fn search(cfg: &RunConfig, seed: u64, out: &Path) -> Result<(Report, SearchReport), CommandError> {
    let op = cfg.operator()?;
    let spec = cfg.search.clone().ok_or_else(|| ConfigError::Invalid("missing 'search' section".into()))?;
    let report = match run_search(&op, &spec, seed) {
        Ok((result, certificates, revalidation)) => {
            let ok = certificates.iter().chain(&revalidation).all(Certificate::holds);
            SearchReport {
                name: cfg.name.clone(),
                seed,
                search: spec,
                found: true,
                reason: None,
                message: None,
                result,
                certificates,
                revalidation,
                all_margins_positive: ok,
            }
        }
        Err(CommandError::Search(e)) => SearchReport {
            name: cfg.name.clone(),
            seed,
            search: spec,
            found: false,
            reason: Some(error_kind(&e).to_string()),
            message: Some(e.to_string()),
            result: Value::Null,
            certificates: Vec::new(),
            revalidation: Vec::new(),
            all_margins_positive: false,
        },
        Err(e) => return Err(e),
    };
    let path = out.join("certificate.json");
    write_json(&path, &report)?;
    let mut summary = Vec::new();
    if report.found {
        let tagged = report.certificates.iter().map(|c| (c, "")).chain(report.revalidation.iter().map(|c| (c, ", revalidated")));
        for (c, tag) in tagged {
            summary.push(format!(
                "{} {}{tag} ({} predicates, min margin {:.3e})",
                if c.holds() { "PASS" } else { "FAIL" },
                c.subject,
                c.predicates.len(),
                c.min_margin()
            ));
        }
    } else {
        summary.push(format!("search failed: {}", report.message.as_deref().unwrap_or_default()));
    }
    let status = if report.all_margins_positive { Status::Success } else { Status::SearchFailure };
    Ok((Report { status, summary, files: vec![path] }, report))
}

// ------------------------------------------------------------------ demo

#[derive(Debug, Clone, Serialize)]
pub struct DemoOutput<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<&'a str>,
    pub seed: u64,
    pub transcript: &'a Transcript,
}

pub fn construct(cfg: &RunConfig) -> Result<Transcript, CommandError> {
    let op = cfg.operator()?;
    let demo = cfg.demo.as_ref().ok_or_else(|| ConfigError::Invalid("missing 'demo' section".into()))?;
    let us = demo.u.iter().map(|s| s.build(&op)).collect::<Result<Vec<_>, _>>()?;
    let v = demo.v.build(&op)?;
    let w = demo.w.as_ref().map(|s| s.build(&op)).transpose()?;
    let m = demo.m.unwrap_or(1);
    let w_or = || w.clone().ok_or_else(|| ConfigError::Invalid("W is required".into()));
    let transcript = match (&op, demo.construction) {
        (Operator::Shift(p), ConstructionKind::Shift) => {
            shift_construct(p, &us[0], &v, &w_or()?, m, demo.n_max.unwrap_or(DEFAULT_N_MAX_SHIFT))?
        }
        (Operator::Eigen(model), kind) => {
            let n_max = demo.n_max.unwrap_or(DEFAULT_N_MAX_EIGEN);
            match kind {
                ConstructionKind::SmallEigen => small_eigen_construct(model, &us[0], &v, &w_or()?, m, n_max, demo.strategy)?,
                ConstructionKind::LargeEigen => {
                    large_eigen_construct(model, &us[0], &v, &w_or()?, m, n_max, demo.growth_asserted)?
                }
                ConstructionKind::Powers => powers_construct(model, &us[0], &v, m, n_max)?,
                ConstructionKind::MultiGenerator => {
                    let a = demo.multi_indices.as_deref().unwrap_or_default();
                    multi_generator_construct(model, a, &us, &v, &w_or()?, n_max)?
                }
                ConstructionKind::Shift => {
                    return Err(ConfigError::Invalid("the shift construction needs a polynomial operator".into()).into())
                }
            }
        }
        (Operator::Shift(_), _) => {
            return Err(ConfigError::Invalid("a polynomial operator only supports the shift construction".into()).into())
        }
    };
    Ok(transcript)
}

pub fn demo(cfg: &RunConfig, seed: u64, out: &Path) -> Result<(Report, Transcript), CommandError> {
    let transcript = construct(cfg)?;
    let json_path = out.join("transcript.json");
    write_json(&json_path, &DemoOutput { name: cfg.name.as_deref(), seed, transcript: &transcript })?;
    let csv_path = out.join("distances.csv");
    write_csv(
        &csv_path,
        &["n", "condition", "distance", "radius", "inside"],
        transcript.rows.iter().map(|r| {
            vec![r.n.to_string(), r.condition.clone(), format!("{:e}", r.distance), format!("{:e}", r.radius), r.inside().to_string()]
        }),
    )?;
    let mut summary = Vec::new();
    for r in &transcript.relocations {
        summary.push(format!(
            "relocated {} (center moved by {:.3e}{})",
            r.role,
            r.center_shift,
            if r.flagged { ", more than radius/2" } else { "" }
        ));
    }
    let status = match &transcript.outcome {
        Outcome::Certified { n, recheck } => {
            summary.push(format!("certified at N = {n} after testing {} values", transcript.tested.len()));
            for r in recheck {
                summary.push(format!("  {:<28} distance {:.3e} < {:.0e}", r.condition, r.distance, r.radius));
            }
            Status::Success
        }
        Outcome::NSearchExhausted { best } => {
            summary.push(format!("N-search exhausted at N_max = {}", transcript.n_max));
            for b in best {
                summary.push(format!(
                    "  {:<28} best {:.3e} at N = {}, final {:.3e}, radius {:.0e}",
                    b.condition, b.distance, b.n, b.final_distance, b.radius
                ));
            }
            Status::NSearchExhausted
        }
    };
    Ok((Report { status, summary, files: vec![json_path, csv_path] }, transcript))
}

// ------------------------------------------------------------------ asymptotics

/// Relative change of `A_{d,N,s}/N^{d−s}` between `N_max/2` and `N_max`, per `s`.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsSummary {
    pub s: usize,
    pub ratio: [f64; 2],
    pub relative_change: f64,
}

pub fn asymptotics(cfg: &RunConfig, out: &Path) -> Result<(Report, Vec<AsymptoticsSummary>), CommandError> {
    let op = cfg.operator()?;
    let p = op.polynomial()?;
    let spec = cfg.asymptotics.as_ref().ok_or_else(|| ConfigError::Invalid("missing 'asymptotics' section".into()))?;
    if spec.n_max < 2 {
        return Err(ConfigError::Invalid("asymptotics n_max must be at least 2".into()).into());
    }
    let lambda = spec.lambda.value();
    let table = a_coeff_table(p, lambda, spec.d, spec.n_max)?;
    let path = out.join("asymptotics.csv");
    let mut rows = Vec::new();
    for n in 1..=spec.n_max {
        for s in 0..=spec.d {
            let a = table.get(n, s);
            let r = table.normalized(n, s);
            rows.push(vec![n.to_string(), s.to_string(), format!("{:e}", a.re), format!("{:e}", a.im), format!("{:e}", r.re), format!("{:e}", r.im)]);
        }
    }
    write_csv(&path, &["n", "s", "a_re", "a_im", "ratio_re", "ratio_im"], rows.into_iter())?;
    let half = spec.n_max / 2;
    let summaries: Vec<AsymptoticsSummary> = (0..=spec.d)
        .map(|s| {
            let late = table.normalized(spec.n_max, s);
            let early = table.normalized(half, s);
            AsymptoticsSummary { s, ratio: [late.re, late.im], relative_change: (late - early).norm() / late.norm() }
        })
        .collect();
    let summary = summaries
        .iter()
        .map(|x| {
            format!(
                "s = {}: A/N^(d-s) = {:.9} {:+.9}i at N = {}, relative change since N = {half}: {:.3e}",
                x.s, x.ratio[0], x.ratio[1], spec.n_max, x.relative_change
            )
        })
        .collect();
    Ok((Report { status: Status::Success, summary, files: vec![path] }, summaries))
}
