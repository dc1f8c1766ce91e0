use std::time::Instant;

use hyperalg_core::complex::{c64, C64};
use hyperalg_core::eigenmodel::{EigenModel, ExpCombination, Kernel};
use hyperalg_core::engine::{
    large_eigen_construct, multi_generator_construct, Model, powers_construct, small_eigen_construct, OpenSetSpec, Outcome,
    Transcript, DEFAULT_N_MAX_EIGEN, IDENTITY_ROW, IDENTITY_TOL,
};
use hyperalg_core::funcexpr::{examples, FunctionExpr};
use hyperalg_core::polynomial::Polynomial;
use hyperalg_core::search::ScheduleStrategy;

fn ball(kernel: Kernel, freq: C64, coef: f64, radius: f64) -> OpenSetSpec {
    OpenSetSpec::eigen_default(ExpCombination::single(freq, c64(coef, 0.0)), radius, kernel)
}

fn zero_ball(kernel: Kernel, radius: f64) -> OpenSetSpec {
    OpenSetSpec::eigen_default(ExpCombination::zero(), radius, kernel)
}

fn summary(name: &str, t: &Transcript, started: Instant) {
    eprintln!("{name}: {:?} after {:.2?}, {} N tested", t.certified_n(), started.elapsed(), t.tested.len());
    if let Outcome::NSearchExhausted { best } = &t.outcome {
        for b in best {
            eprintln!("  {b:?}");
        }
    }
}

fn assert_identity(t: &Transcript) {
    let rows: Vec<_> = t.rows_for(IDENTITY_ROW).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.distance < IDENTITY_TOL), "identity residual too large");
}

#[test]
fn cos_small_eigen_m2() {
    let started = Instant::now();
    let model = EigenModel::new(examples::cos(), Kernel::TranslationExp);
    let u = ball(Kernel::TranslationExp, c64(0.01, 0.0), 0.7, 0.5);
    let v = ball(Kernel::TranslationExp, c64(2.0, 1.0), 1.3, 1e-2);
    let w = zero_ball(Kernel::TranslationExp, 1e-3);
    let t = small_eigen_construct(&model, &u, &v, &w, 2, DEFAULT_N_MAX_EIGEN, ScheduleStrategy::CorollaryReduction)
        .unwrap();
    summary("cos m=2", &t, started);
    assert!(t.is_certified());
    assert_identity(&t);
    assert!(t.term_classes.iter().filter(|c| !c.surviving).all(|c| c.max_ratio < 1.0));
}

#[test]
fn schedule_example_m2() {
    let started = Instant::now();
    let model = EigenModel::new(examples::two_exp_neg_plus_sin(), Kernel::TranslationExp);
    let u = ball(Kernel::TranslationExp, c64(0.0, 0.0), 0.2, 0.5);
    let v = ball(Kernel::TranslationExp, c64(3.0, 0.0), 1.0, 1e-2);
    let w = zero_ball(Kernel::TranslationExp, 1e-3);
    let t = small_eigen_construct(&model, &u, &v, &w, 2, DEFAULT_N_MAX_EIGEN, ScheduleStrategy::PeriodicSchedule)
        .unwrap();
    summary("2e^-z+sin z m=2", &t, started);
    assert!(t.is_certified());
    assert_identity(&t);
}

#[test]
fn cos_powers_m3() {
    let started = Instant::now();
    let model = EigenModel::new(examples::cos(), Kernel::TranslationExp);
    let u = ball(Kernel::TranslationExp, c64(0.2, 0.0), 0.5, 0.5);
    let v = ball(Kernel::TranslationExp, c64(1.0, 1.0), 1.0, 1e-2);
    let t = powers_construct(&model, &u, &v, 3, DEFAULT_N_MAX_EIGEN).unwrap();
    summary("cos powers m=3", &t, started);
    assert!(t.is_certified());
    assert_identity(&t);
    assert!(t.term_classes.iter().filter(|c| !c.surviving).all(|c| c.max_ratio < 1.0));
}

#[test]
fn affine_large_eigen_m3() {
    let started = Instant::now();
    let model = EigenModel::new(FunctionExpr::affine(c64(-1.0, 0.0), c64(1.0, 0.0)), Kernel::TranslationExp);
    let u = ball(Kernel::TranslationExp, c64(0.0, 0.0), 0.5, 0.5);
    let v = ball(Kernel::TranslationExp, c64(6.0, 0.5), 1.0, 1e-2);
    let w = zero_ball(Kernel::TranslationExp, 1e-3);
    let t = large_eigen_construct(&model, &u, &v, &w, 3, DEFAULT_N_MAX_EIGEN, true).unwrap();
    summary("1-z large m=3", &t, started);
    assert!(t.is_certified());
    assert_identity(&t);
}

#[test]
fn cos_multigen() {
    let started = Instant::now();
    let model = EigenModel::new(examples::cos(), Kernel::TranslationExp);
    let us = [ball(Kernel::TranslationExp, c64(0.0, 0.0), 0.5, 0.5), ball(Kernel::TranslationExp, c64(0.0, 0.0), 0.5, 0.5)];
    let v = ball(Kernel::TranslationExp, c64(2.0, 1.0), 1.0, 1e-2);
    let w = zero_ball(Kernel::TranslationExp, 1e-3);
    let t = multi_generator_construct(&model, &[vec![2, 1], vec![1, 1]], &us, &v, &w, DEFAULT_N_MAX_EIGEN).unwrap();
    summary("cos multigen", &t, started);
    assert!(t.is_certified());
    assert_identity(&t);
    let surviving: Vec<_> = t.term_classes.iter().filter(|c| c.surviving).map(|c| c.class.as_str()).collect();
    assert_eq!(surviving, ["C^β1 diagonal × full Ω product"]);
    assert!(t.term_classes.iter().filter(|c| !c.surviving).all(|c| c.max_ratio < 1.0));
}

#[test]
fn dilation_small_eigen_m2() {
    let started = Instant::now();
    let phi = examples::poly_of_exp(Polynomial::from_real(&[-0.8, 1.0]), c64(0.5f64.ln(), 0.0));
    let model = EigenModel::new(phi, Kernel::DilationPower);
    let u = ball(Kernel::DilationPower, c64(0.0, 0.0), 0.5, 0.5);
    let v = ball(Kernel::DilationPower, c64(1.0, 0.5), 1.0, 1e-2);
    let w = zero_ball(Kernel::DilationPower, 1e-3);
    let t = small_eigen_construct(&model, &u, &v, &w, 2, DEFAULT_N_MAX_EIGEN, ScheduleStrategy::CorollaryReduction)
        .unwrap();
    summary("dilation X-0.8 m=2", &t, started);
    assert!(t.is_certified());
    assert_identity(&t);
}

fn cos_m2() -> (EigenModel, OpenSetSpec, OpenSetSpec, OpenSetSpec) {
    let model = EigenModel::new(examples::cos(), Kernel::TranslationExp);
    let u = ball(Kernel::TranslationExp, c64(0.01, 0.0), 0.7, 0.5);
    let v = ball(Kernel::TranslationExp, c64(2.0, 1.0), 1.3, 1e-2);
    let w = zero_ball(Kernel::TranslationExp, 1e-3);
    (model, u, v, w)
}

#[test]
fn singleton_multi_index_matches_single_generator() {
    let (model, u, v, w) = cos_m2();
    let single = small_eigen_construct(&model, &u, &v, &w, 2, 2000, ScheduleStrategy::CorollaryReduction).unwrap();
    let multi = multi_generator_construct(&model, &[vec![2]], &[u], &v, &w, 2000).unwrap();
    assert_eq!(single.certified_n(), multi.certified_n());
    assert_eq!(single.rows, multi.rows);
    assert_eq!(single.generators, multi.generators);
}

#[test]
fn transcript_replays_and_round_trips() {
    let (model, u, v, w) = cos_m2();
    let t = small_eigen_construct(&model, &u, &v, &w, 2, DEFAULT_N_MAX_EIGEN, ScheduleStrategy::CorollaryReduction)
        .unwrap();
    let n = t.certified_n().unwrap();
    let wrapped = Model::Eigen(model.clone());
    for probe in [1, 57, n] {
        let replayed = t.replay(&wrapped, probe).unwrap();
        let logged: Vec<_> = t.rows_at(probe).filter(|r| r.condition != IDENTITY_ROW).collect();
        assert_eq!(replayed.len(), logged.len());
        for (a, b) in replayed.iter().zip(logged) {
            assert!((a.distance - b.distance).abs() <= 1e-12 * b.distance.abs().max(f64::MIN_POSITIVE));
        }
    }
    let json = serde_json::to_string(&t).unwrap();
    let back: Transcript = serde_json::from_str(&json).unwrap();
    assert_eq!(back, t);
    let again = small_eigen_construct(&model, &u, &v, &w, 2, DEFAULT_N_MAX_EIGEN, ScheduleStrategy::CorollaryReduction)
        .unwrap();
    assert_eq!(serde_json::to_string(&again).unwrap(), json);
}

#[test]
fn surviving_identity_holds_far_beyond_the_certified_n() {
    let (model, u, v, w) = cos_m2();
    let t = small_eigen_construct(&model, &u, &v, &w, 2, DEFAULT_N_MAX_EIGEN, ScheduleStrategy::CorollaryReduction)
        .unwrap();
    assert!(!t.surviving.is_empty());
    for n in [1, 10_000, 100_000] {
        assert!(t.identity_residual(&model, n).unwrap() < IDENTITY_TOL, "n = {n}");
    }
}
