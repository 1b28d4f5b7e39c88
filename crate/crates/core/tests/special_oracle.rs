mod common;

use common::cdf_oracle;
use gaussrisk::special::{std_normal_cdf, std_normal_pdf};

#[test]
fn quadrature_oracle_reproduces_known_values() {
    assert!((cdf_oracle(1.0) - 0.8413447460685429).abs() < 1e-15);
    assert!((cdf_oracle(0.0) - 0.5).abs() < 1e-15);
    let rel = (cdf_oracle(-10.0) - 7.619853024160526e-24).abs() / 7.619853024160526e-24;
    assert!(rel < 1e-12, "{rel}");
}

#[test]
fn cdf_matches_quadrature_on_dense_grid() {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let x = -8.0 + 16.0 * i as f64 / 999.0;
        let got = std_normal_cdf(x).unwrap().value();
        worst = worst.max((got - cdf_oracle(x)).abs());
    }
    assert!(worst <= 1e-12, "worst absolute error {worst:e}");
}

#[test]
fn lower_tail_relative_accuracy() {
    for x in [-12.0, -20.0, -30.0, -37.5] {
        let got = std_normal_cdf(x).unwrap().value();
        let want = cdf_oracle(x);
        assert!(((got - want) / want).abs() < 1e-12, "x={x}: {got:e} vs {want:e}");
    }
}

#[test]
fn complement_symmetry_on_grid() {
    for i in 0..=1600 {
        let x = -8.0 + i as f64 * 0.01;
        let s = std_normal_cdf(x).unwrap().value() + std_normal_cdf(-x).unwrap().value();
        assert!((s - 1.0).abs() <= 1e-12, "x={x}");
    }
}

#[test]
fn saturation_and_documented_values() {
    assert_eq!(std_normal_cdf(41.0f64).unwrap().value(), 1.0);
    assert_eq!(std_normal_cdf(-41.0f64).unwrap().value(), 0.0);
    assert!((std_normal_cdf(10.0f64).unwrap().value() - 1.0).abs() <= 1e-15);
    assert_eq!(std_normal_cdf(0.0f64).unwrap().value(), 0.5);
    assert!((std_normal_pdf(0.0f64).unwrap() - 0.3989422804014327).abs() < 1e-16);
    assert!((std_normal_pdf(1.0f64).unwrap() - 0.24197072451914337).abs() < 1e-16);
    assert_eq!(std_normal_pdf(3.0f64).unwrap(), std_normal_pdf(-3.0f64).unwrap());
    assert!(std_normal_cdf(f64::NAN).is_err());
    assert!(std_normal_pdf(f64::INFINITY).is_err());
}
