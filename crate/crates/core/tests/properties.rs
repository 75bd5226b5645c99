use coherent_core::identities::{exchange_fundamental_residual, zeta_series_check};
use coherent_core::special::{binomial, laguerre_assoc, log_gamma_ratio, pochhammer, KahanSum};
use coherent_core::{
    element, generator, ladder_matrices, u_element, w_element, AlgebraKind, AlgebraSpec,
    ElementQuery, C64,
};
use proptest::prelude::*;

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn any_spec() -> impl Strategy<Value = AlgebraSpec> {
    prop_oneof![
        Just(AlgebraSpec::HeisenbergWeyl),
        (0.05f64..4.0).prop_map(|k| AlgebraSpec::Su11 { k }),
        (1u32..12).prop_map(|two_j| AlgebraSpec::Su2 { two_j }),
    ]
}

fn dim_for(spec: &AlgebraSpec, d: usize) -> usize {
    spec.exact_dim().unwrap_or(d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_anti_hermitian(spec in any_spec(), d in 2usize..24, z in complex(2.0), t in -2.0f64..2.0) {
        let g = generator(&spec, dim_for(&spec, d), z, t).unwrap();
        let sum = g.entries() + g.adjoint().entries();
        prop_assert_eq!(sum.iter().map(|x| x.norm()).fold(0.0, f64::max), 0.0);
    }

    #[test]
    fn ladder_commutators_away_from_cutoff(spec in any_spec(), d in 3usize..20) {
        let d = dim_for(&spec, d);
        let l = ladder_matrices(&spec, d).unwrap();
        let raised_adjoint = l.raise.adjoint();
        prop_assert_eq!(raised_adjoint.entries(), l.lower.entries());
        let up = l.diag.commutator(&l.raise);
        let rl = l.raise.commutator(&l.lower);
        let sign = match spec.kind() {
            AlgebraKind::HeisenbergWeyl => 0.0,
            AlgebraKind::Su11 => -2.0,
            AlgebraKind::Su2 => 2.0,
        };
        let inner = if spec.exact_dim().is_some() { d } else { d - 1 };
        for i in 0..inner {
            for j in 0..inner {
                prop_assert!((up.get(i, j) - l.raise.get(i, j)).norm() < 1e-12);
                let want = if spec.kind() == AlgebraKind::HeisenbergWeyl {
                    if i == j { -1.0 } else { 0.0 }
                } else {
                    sign * l.diag.get(i, j).re
                };
                prop_assert!((rl.get(i, j) - want).norm() < 1e-11 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn conjugation_symmetry(spec in any_spec(), n in 0usize..12, m in 0usize..12, z in complex(1.0)) {
        let (n, m) = match spec.exact_dim() {
            Some(d) => (n % d, m % d),
            None => (n, m),
        };
        let a = element(&ElementQuery::new(spec, n, m, z)).unwrap();
        let b = element(&ElementQuery::new(spec, m, n, -z)).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn su2_columns_are_unit_vectors(two_j in 1u32..14, m in 0usize..14, z in complex(2.5)) {
        let m = m % (two_j as usize + 1);
        let mut acc = KahanSum::new();
        for k in 0..=two_j as usize {
            acc.add(w_element(two_j, k, m, z).unwrap().norm_sqr());
        }
        prop_assert!((acc.value() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn hw_diagonal_is_gaussian_times_laguerre(n in 0usize..25, z in complex(2.0)) {
        let x = z.norm_sqr();
        let want = (-x / 2.0).exp() * laguerre_assoc(n as i64, 0, x).unwrap();
        prop_assert!((u_element(n, n, z) - want).norm() <= 1e-12);
    }

    #[test]
    fn su11_generating_series_matches_kappa_form(k in 0.1f64..3.0, n in 0usize..10, m in 0usize..10, z in complex(0.8)) {
        // The zeta series alternates in plain f64, so its rounding scales
        // with the sum of the term magnitudes rather than with the result.
        let chk = zeta_series_check(k, n, m, z).unwrap();
        prop_assert!(chk.residual <= 1e-12, "{:?}", chk);
    }

    #[test]
    fn laguerre_recurrence(n in 1i64..25, alpha in 0i64..10, x in prop::sample::select(vec![0.1, 1.0, 5.0])) {
        let l = |k: i64| laguerre_assoc(k, alpha, x).unwrap();
        let terms = [
            (n + 1) as f64 * l(n + 1),
            (2 * n + 1 + alpha) as f64 - x,
            (n + alpha) as f64 * l(n - 1),
        ];
        let middle = terms[1] * l(n);
        let scale = terms[0].abs().max(middle.abs()).max(terms[2].abs());
        prop_assert!((terms[0] - middle + terms[2]).abs() <= 1e-9 * scale);
    }

    #[test]
    fn laguerre_at_origin_is_binomial(n in 0i64..=30, alpha in 0i64..=30) {
        let want = binomial((n + alpha) as u64, n as u64);
        prop_assert!((laguerre_assoc(n, alpha, 0.0).unwrap() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn gamma_ratio_matches_pochhammer(a in 0.01f64..50.0, k in 0u32..60) {
        let p = pochhammer(a, k);
        prop_assume!(p.is_finite());
        let e = log_gamma_ratio(a, k).unwrap().exp();
        prop_assert!((e - p).abs() <= 1e-12 * p.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn exchange_in_fundamental_rep(a in complex(0.55), b in complex(0.7), c in complex(0.55), su2 in any::<bool>()) {
        let kind = if su2 { AlgebraKind::Su2 } else { AlgebraKind::Su11 };
        let sign = if su2 { 1.0 } else { -1.0 };
        let f = (-b).exp() + sign * a * c * b.exp();
        prop_assume!(f.norm() > 0.1 && f.arg().abs() < 3.0);
        prop_assert!(exchange_fundamental_residual(kind, a, b, c).unwrap() <= 1e-12);
    }
}
