use hyperalg_core::complex::{c64, real, C64};
use hyperalg_core::shiftalg::{
    a_coeff_table, apply_pb, apply_pb_power, star, star_oracle, to_sequence, PolyGeomCombination,
};
use hyperalg_core::Polynomial;
use proptest::prelude::*;

fn complex_in(r: f64) -> impl Strategy<Value = C64> {
    (0.0..r, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(m, t)| C64::from_polar(m, t))
}

fn poly(max_deg: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(complex_in(1.0), 1..=max_deg + 1).prop_map(Polynomial::new)
}

fn combination() -> impl Strategy<Value = PolyGeomCombination> {
    prop::collection::vec((poly(3), complex_in(0.8)), 1..=3).prop_map(|terms| {
        let mut out = PolyGeomCombination::zero();
        for (q, b) in terms {
            // keep bases apart, as the level-set search does
            if out.terms().iter().all(|t| (t.base - b).norm() >= 1e-3) {
                out.push(q, b).unwrap();
            }
        }
        out
    })
}

fn min_gap(a: &PolyGeomCombination, b: &PolyGeomCombination) -> f64 {
    let bases: Vec<C64> = a.terms().iter().chain(b.terms()).map(|t| t.base).collect();
    let mut gap = f64::INFINITY;
    for (i, x) in bases.iter().enumerate() {
        for y in &bases[..i] {
            if x != y {
                gap = gap.min((x - y).norm());
            }
        }
    }
    gap
}

/// Largest single-term entry `|Q_j(k)λ_j^k|` over the first `len` entries.
fn termwise_max(p: &PolyGeomCombination, len: usize) -> f64 {
    p.terms()
        .iter()
        .flat_map(|t| to_sequence(&PolyGeomCombination::term(t.coeffs.clone(), t.base).unwrap(), len))
        .map(|x| x.norm())
        .fold(0.0, f64::max)
}

fn max_err(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn star_matches_array_convolution(a in combination(), b in combination()) {
        let p = star(&a, &b).unwrap();
        let oracle = star_oracle(&to_sequence(&a, 60), &to_sequence(&b, 60));
        let err = max_err(&to_sequence(&p, 60), &oracle);
        if min_gap(&a, &b) >= 0.2 {
            prop_assert!(err <= 1e-10, "err {}", err);
        }
        // near-equal bases force large cancelling coefficients; rounding
        // stays proportional to their size
        prop_assert!(err <= 64.0 * f64::EPSILON * termwise_max(&p, 60).max(1.0), "err {}", err);
    }

    #[test]
    fn geometric_sequences_are_eigenvectors(p in poly(4), lam in complex_in(0.95)) {
        let g = PolyGeomCombination::geometric(real(1.0), lam).unwrap();
        let out = apply_pb(&p, &g);
        let q = out.coeffs_at(lam);
        prop_assert!(q.degree().unwrap_or(0) == 0);
        prop_assert!((q.coeff(0) - p.eval(lam)).norm() <= 1e-15 * (1.0 + p.max_abs_coeff()));
    }

    #[test]
    fn pb_matches_banded_matrix(p in poly(4), a in combination()) {
        let k = 40;
        let deg = p.degree().unwrap_or(0);
        let long = to_sequence(&a, k + deg);
        let banded: Vec<C64> = (0..k)
            .map(|i| p.coeffs().iter().enumerate().map(|(n, &c)| c * long[i + n]).sum())
            .collect();
        let scale = banded.iter().map(|x| x.norm()).fold(1.0, f64::max);
        prop_assert!(max_err(&to_sequence(&apply_pb(&p, &a), k), &banded) <= 1e-12 * scale);
    }

    #[test]
    fn equal_base_degrees_add(d1 in 0usize..4, d2 in 0usize..4, lam in complex_in(0.9)) {
        prop_assume!(lam.norm() > 1e-6);
        let a = PolyGeomCombination::monomial(d1, real(1.0), lam).unwrap();
        let b = PolyGeomCombination::monomial(d2, real(1.0), lam).unwrap();
        let p = star(&a, &b).unwrap();
        prop_assert_eq!(p.coeffs_at(lam).degree(), Some(d1 + d2 + 1));
    }

    #[test]
    fn iterated_pb_matches_table(p in poly(3), lam in complex_in(0.9), d in 0usize..=3, n in 0u64..=50) {
        let table = match a_coeff_table(&p, lam, d, 50) {
            Ok(t) => t,
            Err(_) => return Ok(()),
        };
        let pl = p.eval(lam);
        let mono = PolyGeomCombination::monomial(d, real(1.0), lam).unwrap();
        let q = apply_pb_power(&p, &mono, n).coeffs_at(lam);
        for s in 0..=d {
            let expect = pl.powf(n as f64 + s as f64 - d as f64) * table.get(n as usize, s);
            let got = q.coeff(s);
            prop_assert!((got - expect).norm() <= 1e-9 * expect.norm().max(1e-300), "s={} got {} expect {}", s, got, expect);
        }
    }
}

#[test]
fn closed_rows_hold_for_long_tables() {
    let p = Polynomial::new(vec![c64(0.1, 0.2), c64(1.3, -0.4), c64(-0.5, 0.7)]);
    let lam = c64(0.35, 0.2);
    let t = a_coeff_table(&p, lam, 5, 4000).unwrap();
    let slope = lam * p.derivative().eval(lam) * 5.0;
    for n in 0..=4000 {
        assert_eq!(t.get(n, 5), real(1.0));
        let expect = slope * n as f64;
        assert!((t.get(n, 4) - expect).norm() <= 1e-12 * expect.norm().max(f64::MIN_POSITIVE));
    }
}
