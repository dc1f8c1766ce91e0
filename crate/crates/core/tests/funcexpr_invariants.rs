use hyperalg_core::complex::{c64, real, C64};
use hyperalg_core::funcexpr::{examples, is_exponential_multiple, max_modulus, FunctionExpr};
use hyperalg_core::parse::parse;
use hyperalg_core::Polynomial;
use proptest::prelude::*;

fn small_complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| c64(a, b))
}

fn expr() -> impl Strategy<Value = FunctionExpr> {
    let leaf = prop_oneof![
        small_complex(2.0).prop_map(FunctionExpr::Const),
        (small_complex(1.0), small_complex(1.0)).prop_map(|(a, b)| FunctionExpr::affine(a, b)),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(FunctionExpr::exp),
            inner.clone().prop_map(FunctionExpr::sin),
            inner.clone().prop_map(FunctionExpr::cos),
            (prop::collection::vec(small_complex(1.0), 1..4), inner.clone())
                .prop_map(|(c, e)| FunctionExpr::poly(Polynomial::new(c), e)),
            prop::collection::vec(inner.clone(), 2..4).prop_map(FunctionExpr::sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(FunctionExpr::product),
            (small_complex(2.0), inner.clone()).prop_map(|(c, e)| FunctionExpr::scaled(c, e)),
            (inner, small_complex(1.0), small_complex(0.5))
                .prop_map(|(e, a, b)| FunctionExpr::compose_affine(e, a, b)),
        ]
    })
}

fn disk_point() -> impl Strategy<Value = C64> {
    (0.0..2.0f64, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_central_difference(e in expr(), zs in prop::collection::vec(disk_point(), 100)) {
        let d = e.derivative(1);
        let h = 1e-6;
        for z in zs {
            let f = e.eval(z);
            let exact = d.eval(z);
            if !(f.norm() < 1e6 && exact.norm() < 1e6) {
                continue;
            }
            let fd = (e.eval(z + h) - e.eval(z - h)) / (2.0 * h);
            let scale = exact.norm().max(1.0).max(1e-3 * f.norm());
            prop_assert!((fd - exact).norm() <= 1e-5 * scale, "{} at {}: {} vs {}", e, z, exact, fd);
        }
    }

    #[test]
    fn evaluation_is_deterministic(e in expr(), z in disk_point()) {
        let a = e.eval(z);
        let b = e.clone().eval(z);
        prop_assert!(a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    }

    #[test]
    fn exponential_multiples_are_detected(c in small_complex(3.0), a in small_complex(2.0)) {
        prop_assume!(c.norm() > 1e-3);
        prop_assert!(is_exponential_multiple(&examples::exp_multiple(c, a), 50, 1e-8));
    }

    #[test]
    fn nonlinear_polynomials_of_exp_are_not(
        coeffs in prop::collection::vec(small_complex(1.0), 3..5),
        a in small_complex(1.0),
    ) {
        let p = Polynomial::new(coeffs);
        prop_assume!(p.coeff(p.degree().unwrap()).norm() > 0.1 && a.norm() > 0.1);
        // only c·X^d is an exponential multiple after composing with exp
        prop_assume!(p.coeffs().iter().filter(|c| c.norm() > 1e-3).count() >= 2);
        prop_assert!(!is_exponential_multiple(&examples::poly_of_exp(p, a), 50, 1e-8));
    }
}

#[test]
fn example_symbols_are_not_exponential_multiples() {
    for f in [examples::cos(), examples::exp_minus_two(), examples::two_exp_neg_plus_sin()] {
        assert!(!is_exponential_multiple(&f, 50, 1e-8), "{f}");
    }
}

#[test]
fn max_modulus_refines_monotonically() {
    for f in [examples::cos(), examples::exp_minus_two(), examples::two_exp_neg_plus_sin()] {
        for k in 0..=30 {
            let r = 0.1 * k as f64;
            let (a, b) = (max_modulus(&f, r, 256), max_modulus(&f, r, 512));
            // equal up to rounding of the refined maximiser
            assert!(b >= a - 4.0 * f64::EPSILON * b && b - a < 1e-6 * (1.0 + b), "{f} r={r}");
        }
    }
}

#[test]
fn parsed_forms_match_constructors() {
    let f = parse("2*exp(-z)+sin(z)").unwrap();
    for k in 0..10 {
        let z = c64(0.3 * k as f64 - 1.0, 0.2 * k as f64 - 0.7);
        let g = examples::two_exp_neg_plus_sin().eval(z);
        assert!((f.eval(z) - g).norm() < 1e-14 * (1.0 + g.norm()));
    }
    assert_eq!(parse("cos(z)").unwrap().eval(real(0.0)), real(1.0));
}
