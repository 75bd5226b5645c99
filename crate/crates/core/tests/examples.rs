//! Golden values through the public API. Numbers are either exact or frozen
//! from an independent route (direct products, the 2x2 exponential, or the
//! truncated-exponential oracle).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use approx::assert_relative_eq;
use coherent_core::identities::{
    exchange_params_su11, exchange_params_su2, factorization_check, group_law_check,
};
use coherent_core::special::{falling_factorial, laguerre_assoc, log_gamma_ratio, pochhammer};
use coherent_core::{
    element, expm_antihermitian, frame, generator, ladder_matrices, oracle_element, AlgebraSpec, Error,
    ElementQuery, OracleConfig, TruncatedOperator, C64,
};
use nalgebra::DMatrix;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: C64, b: C64, tol: f64) {
    assert!((a - b).norm() <= tol, "{a} vs {b} (tol {tol})");
}

#[test]
fn laguerre_small_cases() {
    assert_eq!(laguerre_assoc(0, 7, 3.5).unwrap(), 1.0);
    assert_relative_eq!(laguerre_assoc(1, 0, 2.0).unwrap(), -1.0, epsilon = 1e-15);
    assert_relative_eq!(laguerre_assoc(2, 1, 1.0).unwrap(), 0.5, epsilon = 1e-15);
}

#[test]
fn products_and_gamma_ratios() {
    assert_relative_eq!(pochhammer(0.5, 3), 1.875);
    assert_eq!(pochhammer(3.0, 0), 1.0);
    assert_relative_eq!(pochhammer(1.0, 5), 120.0);
    assert_eq!(falling_factorial(4, 2).unwrap(), 12.0);
    assert_eq!(falling_factorial(6, 0).unwrap(), 1.0);
    assert_eq!(falling_factorial(3, 3).unwrap(), 6.0);
    assert_relative_eq!(log_gamma_ratio(0.5, 3).unwrap(), 1.875f64.ln(), max_relative = 1e-14);
    assert_eq!(log_gamma_ratio(2.0, 0).unwrap(), 0.0);
    assert_relative_eq!(log_gamma_ratio(1.0, 10).unwrap(), 15.104_412_573_075_516, max_relative = 1e-14);
}

#[test]
fn ladder_entries() {
    let l = ladder_matrices(&AlgebraSpec::su2(0.5).unwrap(), 2).unwrap();
    close(l.raise.get(1, 0), c(1.0, 0.0), 0.0);
    close(l.raise.get(0, 1), c(0.0, 0.0), 0.0);
    close(l.diag.get(0, 0), c(-0.5, 0.0), 0.0);
    close(l.diag.get(1, 1), c(0.5, 0.0), 0.0);

    let l = ladder_matrices(&AlgebraSpec::HeisenbergWeyl, 3).unwrap();
    close(l.raise.get(1, 0), c(1.0, 0.0), 0.0);
    close(l.raise.get(2, 1), c(2f64.sqrt(), 0.0), 1e-15);

    let l = ladder_matrices(&AlgebraSpec::su11(0.25).unwrap(), 2).unwrap();
    close(l.raise.get(1, 0), c(0.5f64.sqrt(), 0.0), 1e-15);

    assert!(matches!(ladder_matrices(&AlgebraSpec::su2(1.0).unwrap(), 4), Err(Error::DimensionMismatch { .. })));
    assert!(AlgebraSpec::su11(0.0).is_err());
    assert!(AlgebraSpec::su2(0.3).is_err());
}

#[test]
fn generators() {
    let g = generator(&AlgebraSpec::HeisenbergWeyl, 2, c(1.0, 0.0), 0.0).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    assert_eq!(g.entries(), &want);

    let g = generator(&AlgebraSpec::su11(1.0).unwrap(), 5, c(0.0, 0.0), 0.0).unwrap();
    assert_eq!(g.max_abs(), 0.0);

    let g = generator(&AlgebraSpec::su2(0.5).unwrap(), 2, c(0.0, 1.0), 0.0).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    assert_eq!(g.entries(), &want);
}

#[test]
fn frames() {
    let f = frame(&AlgebraSpec::su11(1.0).unwrap(), c(0.0, 0.0)).unwrap();
    assert_eq!(f.kappa, c(0.0, 0.0));
    assert_eq!(f.aux().unwrap(), c(0.0, 0.0));

    let f = frame(&AlgebraSpec::su11(1.0).unwrap(), c(1.0, 0.0)).unwrap();
    close(f.kappa, c(1.175_201_193_643_801_4, 0.0), 1e-15);

    let f = frame(&AlgebraSpec::su2(1.0).unwrap(), c(FRAC_PI_2, 0.0)).unwrap();
    close(f.kappa, c(1.0, 0.0), 1e-15);
    assert!(matches!(f.aux(), Err(Error::Pole(_))));
}

#[test]
fn hw_elements() {
    let hw = AlgebraSpec::HeisenbergWeyl;
    close(element(&ElementQuery::new(hw, 3, 3, c(0.0, 0.0))).unwrap(), c(1.0, 0.0), 1e-15);
    close(element(&ElementQuery::new(hw, 0, 0, c(1.0, 0.0))).unwrap(), c((-0.5f64).exp(), 0.0), 1e-15);
    close(
        element(&ElementQuery::new(hw, 2, 0, c(1.0, 0.0))).unwrap(),
        c((-0.5f64).exp() / 2f64.sqrt(), 0.0),
        1e-15,
    );
}

#[test]
fn su11_elements() {
    let q = ElementQuery::new(AlgebraSpec::su11(0.25).unwrap(), 0, 0, c(0.0, 0.0));
    close(element(&q).unwrap(), c(1.0, 0.0), 1e-15);

    let q = ElementQuery::new(AlgebraSpec::su11(1.0).unwrap(), 0, 0, c(1.0, 0.0));
    close(element(&q).unwrap(), c(1.0 / 1f64.cosh().powi(2), 0.0), 1e-15);

    // Frozen from the oracle (cutoff 66, estimated error 6e-15).
    let q = ElementQuery::new(AlgebraSpec::su11(0.25).unwrap(), 1, 0, c(0.5, 0.0));
    close(element(&q).unwrap(), c(0.307_719_176_458_377_4, 0.0), 1e-13);
}

#[test]
fn su2_elements() {
    let z = c(0.3, -0.4);
    let (r, u) = (z.norm(), z / z.norm());
    let q = ElementQuery::new(AlgebraSpec::su2(0.5).unwrap(), 1, 0, z);
    close(element(&q).unwrap(), u * r.sin(), 1e-15);

    let q = ElementQuery::new(AlgebraSpec::su2(3.0).unwrap(), 0, 0, c(0.0, 0.0));
    close(element(&q).unwrap(), c(1.0, 0.0), 1e-15);

    let q = ElementQuery::new(AlgebraSpec::su2(1.0).unwrap(), 2, 0, c(FRAC_PI_4, 0.0));
    close(element(&q).unwrap(), c(0.5, 0.0), 1e-15);

    let q = ElementQuery::new(AlgebraSpec::su2(0.5).unwrap(), 0, 0, c(1.0, 0.0));
    close(element(&q).unwrap(), c(1f64.cos(), 0.0), 1e-15);
}

#[test]
fn element_rejects_extended_operators() {
    let q = ElementQuery::new(AlgebraSpec::su11(1.0).unwrap(), 0, 0, c(0.2, 0.0)).with_t(0.3);
    assert!(matches!(element(&q), Err(Error::NoClosedForm { .. })));
}

#[test]
fn matrix_exponentials() {
    let id = expm_antihermitian(&TruncatedOperator::zeros(4)).unwrap();
    assert!((id.entries() - DMatrix::identity(4, 4)).norm() == 0.0);

    let g = TruncatedOperator::new(DMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
    ));
    let e = expm_antihermitian(&g).unwrap();
    let (s, co) = 1f64.sin_cos();
    close(e.get(0, 0), c(co, 0.0), 1e-14);
    close(e.get(0, 1), c(-s, 0.0), 1e-14);
    close(e.get(1, 0), c(s, 0.0), 1e-14);

    let g = TruncatedOperator::from_diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]);
    let e = expm_antihermitian(&g).unwrap();
    close(e.get(0, 0), C64::from_polar(1.0, 1.0), 1e-15);
    close(e.get(1, 1), C64::from_polar(1.0, 2.0), 1e-15);

    let bad = TruncatedOperator::from_diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]);
    assert!(matches!(expm_antihermitian(&bad), Err(Error::NotAntiHermitian(_))));
}

#[test]
fn oracle_elements() {
    let cfg = OracleConfig::default();
    let r = oracle_element(&ElementQuery::new(AlgebraSpec::HeisenbergWeyl, 0, 0, c(1.0, 0.0)), &cfg).unwrap();
    close(r.value, c((-0.5f64).exp(), 0.0), 1e-10);
    assert!(r.est_error <= cfg.tol);

    let q = ElementQuery::new(AlgebraSpec::su2(0.5).unwrap(), 1, 0, c(0.7, 0.0));
    close(oracle_element(&q, &cfg).unwrap().value, c(0.7f64.sin(), 0.0), 1e-14);

    let q = ElementQuery::new(AlgebraSpec::su11(0.75).unwrap(), 0, 0, c(0.0, 0.0)).with_t(1.0);
    close(oracle_element(&q, &cfg).unwrap().value, C64::from_polar(1.0, 1.5), 1e-14);
}

#[test]
fn oracle_reports_non_convergence() {
    let cfg = OracleConfig { dim_max: 40, ..OracleConfig::default() };
    let q = ElementQuery::new(AlgebraSpec::su11(2.5).unwrap(), 0, 0, c(1.5, 0.0));
    assert!(matches!(oracle_element(&q, &cfg), Err(Error::NoConvergence { .. })));
}

#[test]
fn exchange_parameter_maps() {
    let p = exchange_params_su11(c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!((p.x, p.z_out), (c(0.0, 0.0), c(0.0, 0.0)));
    close(p.y, c(0.3, 0.0), 1e-15);

    let p = exchange_params_su11(c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)).unwrap();
    close(p.f, c(0.75, 0.0), 1e-15);
    close(p.x, c(2.0 / 3.0, 0.0), 1e-15);
    close(p.z_out, c(2.0 / 3.0, 0.0), 1e-15);
    close(p.y, c(0.287_682_072_451_780_9, 0.0), 1e-15);
    assert!(matches!(
        exchange_params_su11(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        Err(Error::SingularExchange(_))
    ));

    let p = exchange_params_su2(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
    assert_eq!((p.x, p.y, p.z_out), (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
    let p = exchange_params_su2(c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)).unwrap();
    close(p.f, c(1.25, 0.0), 1e-15);
    close(p.x, c(0.4, 0.0), 1e-15);
    close(p.y, c(-0.223_143_551_314_209_76, 0.0), 1e-15);
    assert!(exchange_params_su2(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 1.0)).is_err());
}

#[test]
fn group_law_and_factorization_points() {
    assert_eq!(group_law_check(c(0.0, 0.0), c(0.0, 0.0), 2, 3, 80).unwrap().residual, 0.0);
    assert!(group_law_check(c(0.6, 0.0), c(0.0, 0.3), 1, 2, 80).unwrap().residual <= 1e-10);
    assert!(group_law_check(c(1.0, 0.0), c(-1.0, 0.0), 0, 0, 60).unwrap().residual <= 1e-10);

    assert!(factorization_check(2, 0, c(0.0, 0.0), c(0.7, 0.0), 60).unwrap().residual <= 1e-14);
    assert!(factorization_check(1, 0, c(0.5, 0.0), c(0.5, 0.0), 60).unwrap().residual <= 1e-10);
    assert!(factorization_check(2, 3, c(0.4, 0.2), c(0.3, -0.1), 80).unwrap().residual <= 1e-9);
}
