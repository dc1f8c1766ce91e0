use hyperalg_core::complex::{c64, C64};
use hyperalg_core::eigenmodel::{EigenModel, ExpCombination, Kernel, MetricSpec};
use hyperalg_core::funcexpr::examples;
use hyperalg_core::LogComplex;
use proptest::prelude::*;

fn in_disk(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(m, t)| C64::from_polar(m, t))
}

fn combination() -> impl Strategy<Value = ExpCombination> {
    prop::collection::vec((in_disk(2.0), in_disk(3.0)), 1..=4).prop_map(ExpCombination::from_terms)
}

fn translation() -> EigenModel {
    EigenModel::new(examples::two_exp_neg_plus_sin(), Kernel::TranslationExp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_a_homomorphism(a in combination(), b in combination(), zs in prop::collection::vec(in_disk(2.0), 20)) {
        let m = translation();
        let ab = a.multiply(&b);
        for z in zs {
            let lhs = m.eval_at(&ab, z).unwrap();
            let rhs = m.eval_at(&a, z).unwrap() * m.eval_at(&b, z).unwrap();
            // cancellation inside a sum is measured against the termwise size
            let size: f64 = ab.terms().iter().map(|t| (t.coef.to_complex() * (t.freq * z).exp()).norm()).sum();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1e-6 * size), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn diagonal_action_matches_series(a in combination()) {
        let m = EigenModel::new(examples::cos(), Kernel::TranslationExp);
        let err = m.taylor_oracle_check(&a, 40, 1.0).unwrap();
        prop_assert!(err < 1e-8, "{}", err);
    }

    #[test]
    fn powers_compose(a in combination(), n1 in 0u64..5000, n2 in 0u64..5000) {
        let m = EigenModel::new(examples::exp_minus_two(), Kernel::TranslationExp);
        let once = m.apply_t_power(&a, n1 + n2);
        let twice = m.apply_t_power(&m.apply_t_power(&a, n1), n2);
        prop_assert_eq!(once.len(), twice.len());
        for t in once.terms() {
            let u = twice.coef_at(t.freq);
            prop_assert!((t.coef.log_mag - u.log_mag).abs() <= 1e-12 * (1.0 + t.coef.log_mag.abs()));
            let dphase = hyperalg_core::complex::wrap_phase(t.coef.phase - u.phase);
            prop_assert!(dphase.abs() <= 1e-9 * (1 + n1 + n2) as f64);
        }
    }

    #[test]
    fn metric_triangle_inequality(a in combination(), b in combination(), c in combination()) {
        let m = translation();
        let spec = MetricSpec::default_translation();
        let ab = m.metric_distance(&a, &b, &spec).unwrap();
        let bc = m.metric_distance(&b, &c, &spec).unwrap();
        let ac = m.metric_distance(&a, &c, &spec).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(m.metric_distance(&a, &a, &spec).unwrap(), 0.0);
    }

    #[test]
    fn coincident_sums_coalesce(l in in_disk(2.0), m in in_disk(2.0), jitter in -5e-14..5e-14f64) {
        let nu = l + m + c64(jitter, 0.0);
        let existing = ExpCombination::single(nu, c64(1.0, 0.0));
        let product = ExpCombination::single(l, c64(1.0, 0.0)).multiply(&ExpCombination::single(m, c64(1.0, 0.0)));
        let total = existing.add(&product);
        prop_assert_eq!(total.len(), 1);
        prop_assert!((total.coef_at(nu).to_complex() - c64(2.0, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn dilation_kernel_products_are_pointwise() {
    let m = EigenModel::new(examples::cos(), Kernel::DilationPower);
    let a = ExpCombination::from_terms([(c64(0.5, 0.3), c64(1.0, -1.0)), (c64(-1.2, 0.0), c64(0.3, 0.0))]);
    let b = ExpCombination::single(c64(2.0, -0.4), c64(0.0, 2.0));
    for z in [c64(2.0, 0.0), c64(1.6, 0.4), c64(2.3, -0.2)] {
        let lhs = m.eval_at(&a.multiply(&b), z).unwrap();
        let rhs = m.eval_at(&a, z).unwrap() * m.eval_at(&b, z).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }
}

#[test]
fn huge_coefficients_cancel_in_log_space() {
    let m = EigenModel::new(examples::cos(), Kernel::TranslationExp);
    let lam = c64(0.3, 0.1);
    let c = LogComplex::from_complex(m.eigenvalue(lam)).powi(100_000).inv();
    let u = ExpCombination::single_log(lam, c);
    let back = m.apply_t_power(&u, 100_000);
    assert!(back.coef_at(lam).log_mag.abs() < 1e-8);
}
