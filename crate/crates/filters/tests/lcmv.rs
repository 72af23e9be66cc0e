mod common;

use common::{cmat, cvec, pd, rng};
use filters::{lcmv, CMatrix, FilterError};
use num_complex::Complex64;

#[test]
fn identity_weighting_gives_pseudo_inverse() {
    let mut r = rng(10);
    let vd = cmat(6, 2, &mut r);
    let w = lcmv(&vd, &CMatrix::identity(6, 6), 1000.0).unwrap();
    let pinv = (vd.adjoint() * &vd).try_inverse().unwrap() * vd.adjoint();
    assert!((w - &pinv).norm() < 1e-12 * pinv.norm());
}

#[test]
fn single_constraint_is_mvdr() {
    let mut r = rng(11);
    let v = cmat(6, 1, &mut r);
    let rx = pd(6, &mut r);
    let w = lcmv(&v, &rx, 500.0).unwrap();
    let eps = 1e-6 * rx.trace().re / 6.0;
    let loaded = &rx + CMatrix::identity(6, 6) * Complex64::new(eps, 0.0);
    let ri = loaded.try_inverse().unwrap();
    let num = v.adjoint() * &ri;
    let den = (v.adjoint() * &ri * &v)[(0, 0)];
    let expected = num / den;
    assert!((w - &expected).norm() < 1e-10 * expected.norm());
}

#[test]
fn constraint_holds_on_random_instances() {
    let mut r = rng(12);
    for _ in 0..50 {
        let vd = cmat(6, 2, &mut r);
        let rx = pd(6, &mut r);
        let w = lcmv(&vd, &rx, 2000.0).unwrap();
        assert!((w * &vd - CMatrix::identity(2, 2)).norm() < 1e-10);
    }
}

#[test]
fn distortionless_for_model_signals() {
    let mut r = rng(13);
    let vd = cmat(6, 2, &mut r);
    let w = lcmv(&vd, &pd(6, &mut r), 100.0).unwrap();
    let s = cvec(2, &mut r);
    let est = w * (&vd * &s);
    assert!((est - &s).norm() < 1e-10 * s.norm());
}

#[test]
fn rank_deficiency_names_the_frequency() {
    let mut r = rng(14);
    let col = cmat(6, 1, &mut r);
    let mut vd = CMatrix::zeros(6, 2);
    vd.set_column(0, &col.column(0));
    vd.set_column(1, &col.column(0));
    match lcmv(&vd, &CMatrix::identity(6, 6), 1234.5) {
        Err(e @ FilterError::RankDeficient { .. }) => assert!(e.to_string().contains("1234.5")),
        other => panic!("unexpected {other:?}"),
    }
}
