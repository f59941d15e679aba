mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use nctorus::gns::{represent, TruncationBox};
use nctorus::psido::{quantize, ClassicalSymbol, SymbolTerm, DEFAULT_CUTOFF};
use nctorus::quadrature::SphereQuadrature;
use nctorus::spectral::*;
use nctorus::{Element, Error, Theta, C64};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn scalar_sym(t: &Arc<Theta>, terms: &[(f64, &[u32], f64)]) -> ClassicalSymbol {
    let terms = terms.iter().map(|&(c, b, s)| SymbolTerm::new(Element::real(t, c), b.to_vec(), s)).collect();
    ClassicalSymbol::from_terms(t, terms, DEFAULT_CUTOFF).unwrap()
}

fn euclid(t: &Arc<Theta>) -> ScalarSymbol {
    let n = t.n();
    ScalarSymbol::Sym(scalar_sym(t, &[(1.0, &vec![0; n], 1.0)]))
}

fn anisotropic(t: &Arc<Theta>) -> ScalarSymbol {
    ScalarSymbol::Sym(scalar_sym(t, &[(4.0, &[2, 0], 0.0), (1.0, &[0, 2], 0.0)]))
}

fn harmonic(n: usize, c: f64) -> Vec<f64> {
    (0..n).map(|k| c / (k as f64 + 1.0)).collect()
}

#[test]
fn lattice_ball_counts() {
    assert_eq!(lattice_ball(2, 1.0).len(), 4);
    assert_eq!(lattice_ball(2, 2.0).len(), 12);
    assert_eq!(lattice_ball(3, 1.0).len(), 6);
    // brute-force oracle
    let r = 7.3f64;
    let mut brute = 0;
    for a in -8i64..=8 {
        for b in -8i64..=8 {
            let s = (a * a + b * b) as f64;
            if s > 0.0 && s <= r * r {
                brute += 1;
            }
        }
    }
    assert_eq!(lattice_ball(2, r).len(), brute);
}

#[test]
fn counting_function_examples() {
    let t = theta0(2);
    let rho = euclid(&t);
    assert_eq!(counting(&rho, 2.0).unwrap(), 12);
    assert_eq!(counting(&rho, 0.5).unwrap(), 0);
    assert_eq!(counting(&rho, 1.0).unwrap(), 4);
    let sq = ScalarSymbol::Sym(scalar_sym(&t, &[(1.0, &[0, 0], 2.0)]));
    assert!(counting(&sq, 4.0).is_err());
}

#[test]
fn weyl_law_euclidean() {
    let t = theta0(2);
    let quad = SphereQuadrature::standard(2, 64);
    let rep = weyl_fit(&euclid(&t), 200.0, &quad).unwrap();
    assert!((rep.c_quadrature - PI).abs() < 1e-12);
    assert!((rep.c_hat - PI).abs() / PI < 0.01, "c_hat {}", rep.c_hat);
    // Gauss circle problem: error decays at least like λ^{-1}
    assert!(rep.error_exponent < -0.9, "exponent {}", rep.error_exponent);
    assert!(weyl_fit(&euclid(&t), 10.0, &quad).is_err());
}

#[test]
fn weyl_law_anisotropic() {
    let t = theta0(2);
    let quad = SphereQuadrature::standard(2, 128);
    let rho = anisotropic(&t).powf(0.5);
    assert_eq!(rho.degree(), 1.0);
    let rep = weyl_fit(&rho, 200.0, &quad).unwrap();
    // area of the ellipse 4x² + y² ≤ 1
    assert!((rep.c_quadrature - PI / 2.0).abs() < 1e-10);
    assert!((rep.c_hat - rep.c_quadrature).abs() / rep.c_quadrature < 0.02);
}

#[test]
fn weyl_law_three_dimensions() {
    let t = theta0(3);
    let quad = SphereQuadrature::standard(3, 8);
    let rep = weyl_fit(&euclid(&t), 30.0, &quad).unwrap();
    let ball = 4.0 * PI / 3.0;
    assert!((rep.c_quadrature - ball).abs() < 1e-12);
    assert!((rep.c_hat - ball).abs() / ball < 0.02);
}

#[test]
fn weyl_constant_is_dual_to_trace_target() {
    let t = theta0(2);
    let quad = SphereQuadrature::standard(2, 128);
    let rho = anisotropic(&t).powf(0.5);
    let c = weyl_constant(&rho, &quad);
    let dual = TraceSymbol::Scalar(rho.powf(-2.0)).target(&quad);
    assert!((dual.re - c).abs() < 1e-13 && dual.im == 0.0);
}

#[test]
fn singular_values_of_diagonal_operator() {
    let t = theta2();
    let bx = Arc::new(TruncationBox::new(2, 5, 0));
    let p = quantize(&scalar_sym(&t, &[(1.0, &[0, 0], -2.0)]), &bx);
    let s = singular_values(&p, FILL_FRACTION).unwrap();
    assert!(s.descending);
    assert_eq!(s.reliable, bx.dim());
    let mut want: Vec<f64> = bx.modes().iter().map(|m| {
        let r2 = (m[0] * m[0] + m[1] * m[1]) as f64;
        if r2 == 0.0 { 0.0 } else { 1.0 / r2 }
    }).collect();
    want.sort_by(|a, b| b.total_cmp(a));
    for (a, b) in s.values.iter().zip(&want) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn singular_values_of_nondiagonal_operator() {
    let t = theta2();
    let u1 = Element::generator(&t, 0);
    let s = &u1 + &u1.adjoint();
    let bx = Arc::new(TruncationBox::new(2, 6, 1));
    let sv = singular_values(&represent(&s, &bx), FILL_FRACTION).unwrap();
    assert_eq!(sv.values.len(), bx.dim());
    assert_eq!(sv.reliable, (0.25 * bx.dim() as f64).floor() as usize);
    assert!(sv.values.windows(2).all(|w| w[0] >= w[1]));
    assert!(sv.values[0] <= 2.0 + 1e-12 && *sv.values.last().unwrap() >= 0.0);
    // Frobenius norm is the ℓ² norm of the singular values
    let fro: f64 = sv.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((fro - represent(&s, &bx).frobenius()).abs() < 1e-12);
}

#[test]
fn dixmier_harmonic_sequence() {
    let n = 100_000;
    let mu = harmonic(n, 1.0);
    let rep = dixmier_estimate(&mu, (10, n)).unwrap();
    assert!((rep.estimate_slope - 1.0).abs() < 0.005, "slope {}", rep.estimate_slope);
    // (1/log N) H_N = 1 + γ/log N + O(1/N)
    let ln = (n as f64).ln();
    assert!((rep.estimate_logavg - (1.0 + EULER_GAMMA / ln)).abs() < 1e-4);
    // τ_λ ≈ 1 − 1/log λ + γ log log λ / log λ to leading order
    let tau_bias = 1.0 - 1.0 / ln + EULER_GAMMA * ln.ln() / ln;
    assert!((rep.estimate_tau_lambda - tau_bias).abs() < 0.015, "tau {}", rep.estimate_tau_lambda);
    assert!((rep.spread - (rep.estimates().iter().cloned().fold(f64::MIN, f64::max) - rep.estimates().iter().cloned().fold(f64::MAX, f64::min))).abs() < 1e-15);
}

#[test]
fn dixmier_trace_class_sequence_vanishes() {
    let n = 100_000;
    let mu: Vec<f64> = (0..n).map(|k| 1.0 / ((k + 1) as f64).powi(2)).collect();
    let rep = dixmier_estimate(&mu, (1000, n)).unwrap();
    assert!(rep.estimate_slope.abs() < 1e-3);
    let ln = (n as f64).ln();
    assert!((rep.estimate_logavg - PI * PI / 6.0 / ln).abs() < 1e-4);
}

#[test]
fn dixmier_mixture_and_scaling() {
    let n = 100_000;
    let mu: Vec<f64> = (0..n).map(|k| 2.0 / (k + 1) as f64 + 1.0 / ((k + 1) as f64).powi(2)).collect();
    let rep = dixmier_estimate(&mu, (10, n)).unwrap();
    assert!((rep.estimate_slope - 2.0).abs() / 2.0 < 0.01);
    let base = dixmier_estimate(&harmonic(n, 1.0), (10, n)).unwrap();
    let scaled = dixmier_estimate(&harmonic(n, 3.0), (10, n)).unwrap();
    assert!((scaled.estimate_slope - 3.0 * base.estimate_slope).abs() < 1e-12);
}

#[test]
fn dixmier_window_rules() {
    let mu = harmonic(1000, 1.0);
    assert!(matches!(dixmier_estimate(&mu, (10, 40)), Err(Error::WindowTooSmall(_))));
    assert!(matches!(dixmier_estimate(&mu, (10, 2000)), Err(Error::WindowTooSmall(_))));
    let rep = dixmier_estimate(&mu, (1, 100)).unwrap();
    assert_eq!(rep.window, (3, 100));
    // nested windows give consistent estimates
    let big = harmonic(100_000, 1.0);
    let a = dixmier_estimate(&big, (100, 10_000)).unwrap().estimate_slope;
    let b = dixmier_estimate(&big, (100, 100_000)).unwrap().estimate_slope;
    assert!((a - b).abs() < 0.005);
}

#[test]
fn complex_dixmier_splits_parts() {
    let seq: Vec<C64> = (0..1000).map(|k| C64::new(1.0, -2.0) / (k + 1) as f64).collect();
    let c = dixmier_estimate_complex(&seq, (10, 1000)).unwrap();
    let z = c.slope();
    assert!((z.im + 2.0 * z.re).abs() < 1e-12);
}

#[test]
fn trace_theorem_flat_inverse_laplacian() {
    let t = theta2();
    let quad = SphereQuadrature::standard(2, 64);
    let p = TraceSymbol::Classical(scalar_sym(&t, &[(1.0, &[0, 0], -2.0)]));
    let rep = trace_theorem_check(&p, 100_000, 100, &quad).unwrap();
    assert!((rep.target_re - PI).abs() < 1e-13);
    assert!(rep.error / PI < 0.01, "error {}", rep.error);
    assert!(rep.reliable >= 100_000);
    assert!(rep.values >= rep.reliable);
}

#[test]
fn trace_theorem_oscillating_coefficient_vanishes() {
    let t = theta2();
    let quad = SphereQuadrature::standard(2, 64);
    let u1 = Element::generator(&t, 0);
    let sym = ClassicalSymbol::from_terms(&t, vec![SymbolTerm::new(u1, vec![0, 0], -2.0)], DEFAULT_CUTOFF).unwrap();
    let p = TraceSymbol::Classical(sym);
    assert_eq!(p.target(&quad), C64::new(0.0, 0.0));
    let rep = trace_theorem_check(&p, 10_000, 100, &quad).unwrap();
    assert_eq!(rep.error, 0.0);
}

#[test]
fn trace_theorem_element_coefficients() {
    let t = theta2();
    let quad = SphereQuadrature::standard(2, 64);
    let u1 = Element::generator(&t, 0);
    let a = &Element::real(&t, 2.0) + &u1;
    let terms = vec![
        SymbolTerm::new(Element::one(&t), vec![2, 0], -4.0),
        SymbolTerm::new(a, vec![0, 0], -2.0),
    ];
    let p = TraceSymbol::Classical(ClassicalSymbol::from_terms(&t, terms, DEFAULT_CUTOFF).unwrap());
    let rep = trace_theorem_check(&p, 100_000, 100, &quad).unwrap();
    assert!((rep.target_re - 2.5 * PI).abs() < 1e-12);
    assert!(rep.error / (2.5 * PI) < 0.01);
}

#[test]
fn trace_theorem_anisotropic_scalar() {
    let t = theta0(2);
    let quad = SphereQuadrature::standard(2, 128);
    let p = TraceSymbol::Scalar(anisotropic(&t).powf(-1.0));
    let rep = trace_theorem_check(&p, 100_000, 100, &quad).unwrap();
    assert!((rep.target_re - PI / 2.0).abs() < 1e-10);
    assert!(rep.error / (PI / 2.0) < 0.03, "error {}", rep.error);
}

#[test]
fn trace_theorem_rejects_wrong_order() {
    let t = theta2();
    let quad = SphereQuadrature::standard(2, 16);
    let p = TraceSymbol::Classical(scalar_sym(&t, &[(1.0, &[0, 0], -1.0)]));
    assert!(trace_theorem_check(&p, 1000, 10, &quad).is_err());
}

#[test]
fn trace_theorem_on_truncation_box() {
    let t = theta2();
    let quad = SphereQuadrature::standard(2, 64);
    let bx = Arc::new(TruncationBox::new(2, 60, 0));
    let rep = trace_theorem_box(&scalar_sym(&t, &[(1.0, &[0, 0], -2.0)]), &bx, 10, &quad).unwrap();
    assert!(rep.reliable > 10_000);
    assert!(rep.error / PI < 0.02, "error {}", rep.error);
}

#[test]
fn partial_sum_export() {
    let mu = harmonic(1000, 1.0);
    let rows = partial_sum_triples(&mu, (10, 1000), 5);
    assert_eq!(rows.first().unwrap().0, 10);
    assert_eq!(rows.last().unwrap().0, 1000);
    for (n, s, avg) in rows {
        let h: f64 = (1..=n).map(|k| 1.0 / k as f64).sum();
        assert!((s - h).abs() < 1e-12);
        assert!((avg - h / (n as f64).ln()).abs() < 1e-12);
    }
    let g = log_grid(1, 1000, 10);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}
