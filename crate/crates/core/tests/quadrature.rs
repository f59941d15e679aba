use std::f64::consts::PI;

use nctorus::quadrature::*;
use nctorus::C64;

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    for m in [1usize, 3, 8, 16] {
        let (x, w) = gauss_legendre(m);
        for p in 0..(2 * m) {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
            let want = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-13, "m={m} p={p}");
        }
    }
}

#[test]
fn gauss_interval_and_gegenbauer_mass() {
    let (x, w) = gauss_legendre_interval(6, 1.0, 3.0);
    let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(3)).sum();
    assert!((got - 20.0).abs() < 1e-12);
    // ∫ (1−t²)^{1/2} dt = π/2
    let (_, w) = gauss_gegenbauer(5, 0.5);
    assert!((w.iter().sum::<f64>() - PI / 2.0).abs() < 1e-13);
}

#[test]
fn sphere_areas() {
    assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
    assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
}

fn monomial(x: &[f64], beta: &[usize]) -> f64 {
    x.iter().zip(beta).map(|(x, &b)| x.powi(b as i32)).product()
}

#[test]
fn sphere_rules_reproduce_moments() {
    for n in [2usize, 3, 4] {
        let q = SphereQuadrature::product(n, 6);
        assert!((q.integrate(|_| 1.0) - sphere_area(n)).abs() < 1e-12);
        // all monomials up to degree 8 in each coordinate combination
        let mut beta = vec![0usize; n];
        loop {
            let deg: usize = beta.iter().sum();
            if deg <= q.degree {
                let got = q.integrate(|x| monomial(x, &beta));
                let want = sphere_monomial_moment(&beta);
                assert!((got - want).abs() < 1e-12, "n={n} beta={beta:?}");
            }
            let mut j = 0;
            while j < n {
                beta[j] += 1;
                if beta[j] <= 6 {
                    break;
                }
                beta[j] = 0;
                j += 1;
            }
            if j == n {
                break;
            }
        }
    }
}

#[test]
fn sphere_nodes_are_unit_vectors() {
    let q = SphereQuadrature::standard(4, 5);
    assert_eq!(q.len(), 5 * 5 * 10);
    for x in &q.nodes {
        let r: f64 = x.iter().map(|v| v * v).sum();
        assert!((r - 1.0).abs() < 1e-14);
    }
    assert!(q.weights.iter().all(|&w| w > 0.0));
    assert_eq!(q.doubled().order, 10);
}

#[test]
fn circle_moment_oracle() {
    // ∫ cos^4 = 3π/4
    let q = SphereQuadrature::circle(16);
    assert!((q.integrate(|x| x[0].powi(4)) - 0.75 * PI).abs() < 1e-13);
    assert!((sphere_monomial_moment(&[4, 0]) - 0.75 * PI).abs() < 1e-13);
    assert_eq!(sphere_monomial_moment(&[1, 2]), 0.0);
}

#[test]
fn contour_rule_computes_residues() {
    let spec = ContourSpec::around(1.0, 4.0, 128);
    spec.validate(1.0, 4.0).unwrap();
    // counter-clockwise integral of 1/(λ − 2) is 1, clockwise is −1
    let s: C64 = spec.rule().iter().map(|(l, w)| w / (l - 2.0)).sum();
    assert!((s - C64::new(-1.0, 0.0)).norm() < 1e-12);
    // entire integrand integrates to 0
    let s: C64 = spec.rule().iter().map(|(l, w)| w * l * l).sum();
    assert!(s.norm() < 1e-12);
    // pole outside the contour contributes nothing
    let s: C64 = spec.rule().iter().map(|(l, w)| w / (l + 1.0)).sum();
    assert!(s.norm() < 1e-10);
    // log branch: (2πi)^{-1}∮ λ^{-1/2} (λ − 3)^{-1} dλ = −3^{-1/2} clockwise
    let s: C64 = spec.rule().iter().map(|(l, w)| w * l.powf(-0.5) / (l - 3.0)).sum();
    assert!((s + 3f64.powf(-0.5)).norm() < 1e-10);
}

#[test]
fn contour_validation_rejects_bad_contours() {
    let spec = ContourSpec::around(1.0, 4.0, 64);
    assert!(spec.validate(0.1, 4.0).is_err());
    assert!(spec.validate(1.0, 40.0).is_err());
    let flat = ContourSpec { b: 0.0, ..spec.clone() };
    assert!(flat.validate(1.0, 4.0).is_err());
    assert_eq!(spec.with_nodes(32).rule().len(), 32);
}
