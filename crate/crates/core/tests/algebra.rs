mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use nctorus::{CoeffRecord, Element, Error, Theta, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn theta_validation() {
    assert!(matches!(Theta::new(1, vec![0.0]), Err(Error::SmallDimension(1))));
    assert!(matches!(Theta::new(2, vec![0.0, 0.3, 0.3, 0.0]), Err(Error::NotAntisymmetric(_))));
    assert!(Theta::new(2, vec![0.0, 0.3, -0.3, 0.0]).is_ok());
    assert!(Theta::from_rows(&[vec![0.0, 0.1], vec![-0.1]]).is_err());
}

#[test]
fn phase_trivial_cases() {
    let t0 = Theta::zero(3).unwrap();
    assert_eq!(t0.phase(&[1, -2, 3], &[4, 5, -6]), c(1.0, 0.0));
    let t = Theta::default_2d();
    assert_eq!(t.phase(&[3, -7], &[0, 0]), c(1.0, 0.0));
    assert_eq!(t.phase(&[0, 0], &[3, -7]), c(1.0, 0.0));
    assert!(t.try_phase(&[1], &[0, 0]).is_err());
}

#[test]
fn phase_reproduces_commutation_relation() {
    let t12 = 1.0 / 5f64.sqrt();
    let t = Arc::new(Theta::two(t12));
    let want = C64::from_polar(1.0, 2.0 * PI * t12);
    assert!((t.phase(&[0, 1], &[1, 0]) - want).norm() < 1e-15);
    let u1 = Element::generator(&t, 0);
    let u2 = Element::generator(&t, 1);
    // U_2 U_1 = e^{2πiθ_12} U_1 U_2
    let lhs = &u2 * &u1;
    let rhs = (&u1 * &u2).scale(want);
    assert!(lhs.distance(&rhs) < 1e-15);
}

#[test]
fn phase_cocycle_exhaustive() {
    let t = Theta::default_2d();
    let r = 3i64;
    let mut pts = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            pts.push(vec![a, b]);
        }
    }
    let add = |x: &[i64], y: &[i64]| -> Vec<i64> { x.iter().zip(y).map(|(a, b)| a + b).collect() };
    let mut worst: f64 = 0.0;
    for k in &pts {
        for l in &pts {
            let kl = t.phase(k, l);
            for m in &pts {
                let lhs = kl * t.phase(&add(k, l), m);
                let rhs = t.phase(l, m) * t.phase(k, &add(l, m));
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    assert!(worst < 1e-13, "cocycle defect {worst:e}");
}

#[test]
fn phase_cocycle_three_dimensions() {
    let t = Theta::from_rows(&[vec![0.0, 0.3, -0.7], vec![-0.3, 0.0, 0.11], vec![0.7, -0.11, 0.0]]).unwrap();
    let mut r = rng(3);
    for _ in 0..2000 {
        let pick = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<i64> {
            use rand::Rng;
            (0..3).map(|_| r.random_range(-3..=3)).collect()
        };
        let (k, l, m) = (pick(&mut r), pick(&mut r), pick(&mut r));
        let kl: Vec<i64> = k.iter().zip(&l).map(|(a, b)| a + b).collect();
        let lm: Vec<i64> = l.iter().zip(&m).map(|(a, b)| a + b).collect();
        let lhs = t.phase(&k, &l) * t.phase(&kl, &m);
        let rhs = t.phase(&l, &m) * t.phase(&k, &lm);
        assert!((lhs - rhs).norm() < 1e-13);
    }
}

#[test]
fn multiplication_examples() {
    let t = theta2();
    let mut r = rng(1);
    let u = sparse(&t, 5, 3, &mut r);
    assert_eq!(&Element::one(&t) * &u, u);
    let t12 = t.get(0, 1);
    let p = Element::monomial(&t, vec![0, 1], c(1.0, 0.0)) * Element::monomial(&t, vec![1, 0], c(1.0, 0.0));
    let want = Element::monomial(&t, vec![1, 1], C64::from_polar(1.0, 2.0 * PI * t12));
    assert!(p.distance(&want) < 1e-15);
    let u1 = Element::generator(&t, 0);
    let s = &u1 + &u1.adjoint();
    let sq = &s * &s;
    let want = Element::from_coeffs(&t, vec![(vec![2, 0], c(1.0, 0.0)), (vec![0, 0], c(2.0, 0.0)), (vec![-2, 0], c(1.0, 0.0))]).unwrap();
    assert!(sq.distance(&want) < 1e-15);
}

#[test]
fn multiplication_rejects_mismatched_theta() {
    let a = Element::one(&theta2());
    let b = Element::one(&theta0(3));
    assert!(a.mul(&b).is_err());
    assert!(a.add(&b).is_err());
}

#[test]
fn commutative_case_is_convolution() {
    let t = theta0(2);
    let mut r = rng(2);
    let u = sparse(&t, 6, 3, &mut r);
    let v = sparse(&t, 6, 3, &mut r);
    let mut oracle = std::collections::BTreeMap::<Vec<i64>, C64>::new();
    for (k, a) in u.iter() {
        for (l, b) in v.iter() {
            *oracle.entry(vec![k[0] + l[0], k[1] + l[1]]).or_default() += a * b;
        }
    }
    let uv = &u * &v;
    for (k, want) in oracle {
        assert!((uv.coeff(&k) - want).norm() < 1e-14);
    }
}

#[test]
fn adjoint_examples() {
    let t = theta2();
    assert_eq!(Element::one(&t).adjoint(), Element::one(&t));
    let lam = c(0.7, -1.3);
    let x = Element::monomial(&t, vec![2, -3], lam);
    let p = &x.adjoint() * &x;
    assert!(p.distance(&Element::real(&t, lam.norm_sqr())) < 1e-14);
    let p = &x * &x.adjoint();
    assert!(p.distance(&Element::real(&t, lam.norm_sqr())) < 1e-14);
    let mut r = rng(4);
    for _ in 0..20 {
        let u = sparse(&t, 5, 3, &mut r);
        let v = sparse(&t, 5, 3, &mut r);
        let lhs = (&u * &v).adjoint();
        let rhs = &v.adjoint() * &u.adjoint();
        assert!(lhs.distance(&rhs) < 1e-14);
    }
}

#[test]
fn trace_examples() {
    let t = theta2();
    assert_eq!(Element::one(&t).trace(), c(1.0, 0.0));
    assert_eq!(Element::monomial(&t, vec![1, -1], c(3.0, 0.0)).trace(), c(0.0, 0.0));
}

#[test]
fn associativity_and_trace_property() {
    let t = theta2();
    let mut r = rng(5);
    for _ in 0..20 {
        let u = sparse(&t, 5, 3, &mut r);
        let v = sparse(&t, 5, 3, &mut r);
        let w = sparse(&t, 5, 3, &mut r);
        assert!((&(&u * &v) * &w).distance(&(&u * &(&v * &w))) < 1e-13);
        assert!(((&u * &v).trace() - (&v * &u).trace()).norm() < 1e-13);
    }
}

#[test]
fn derivation_examples() {
    let t = theta2();
    for j in 0..2 {
        for l in 0..2 {
            let d = Element::generator(&t, l).delta_j(j);
            if j == l {
                assert_eq!(d, Element::generator(&t, j));
            } else {
                assert!(d.is_empty());
            }
        }
        assert!(Element::one(&t).delta_j(j).is_empty());
    }
    let x = Element::monomial(&t, vec![2, -3], c(1.0, 1.0));
    assert_eq!(x.delta(&[1, 2]).unwrap(), x.scale_re(18.0));
    assert!(matches!(x.delta(&[-1, 0]), Err(Error::NegativeOrder)));
}

#[test]
fn leibniz_rule_at_rational_theta() {
    let t = Arc::new(Theta::two(0.25));
    let mut r = rng(6);
    for _ in 0..20 {
        let u = sparse(&t, 5, 3, &mut r);
        let v = sparse(&t, 5, 3, &mut r);
        for j in 0..2 {
            let lhs = (&u * &v).delta_j(j);
            let rhs = &(&u.delta_j(j) * &v) + &(&u * &v.delta_j(j));
            assert!(lhs.distance(&rhs) < 1e-13);
        }
    }
}

#[test]
fn inner_product_examples() {
    let t = theta2();
    let a = Element::monomial(&t, vec![1, 2], c(1.0, 0.0));
    let b = Element::monomial(&t, vec![2, 1], c(1.0, 0.0));
    assert_eq!(a.inner(&a), c(1.0, 0.0));
    assert_eq!(a.inner(&b), c(0.0, 0.0));
    assert_eq!(Element::one(&t).inner(&Element::one(&t)), c(1.0, 0.0));
    let mut r = rng(7);
    let u = sparse(&t, 5, 3, &mut r);
    let direct: f64 = u.iter().map(|(_, z)| z.norm_sqr()).sum();
    assert!((u.inner(&u).re - direct).abs() < 1e-14 && u.inner(&u).im == 0.0);
    // ⟨u, v⟩ = τ(u v*)
    let v = sparse(&t, 5, 3, &mut r);
    assert!((u.inner(&v) - (&u * &v.adjoint()).trace()).norm() < 1e-14);
}

#[test]
fn flat_laplacian_partial_inverse_examples() {
    let t = theta2();
    let x = Element::monomial(&t, vec![3, -4], c(1.0, 0.0));
    assert_eq!(x.flat_laplacian_partial_inverse(), x.scale_re(1.0 / 25.0));
    assert!(Element::one(&t).flat_laplacian_partial_inverse().is_empty());
    let mut r = rng(8);
    let u = &sparse(&t, 6, 3, &mut r) + &Element::real(&t, 2.0);
    let back = u.flat_laplacian_partial_inverse().flat_laplacian();
    let want = &u - &Element::scalar(&t, u.trace());
    assert!(back.distance(&want) < 1e-14);
}

#[test]
fn records_round_trip_through_json() {
    let t = theta2();
    let mut r = rng(9);
    let u = sparse(&t, 6, 3, &mut r);
    let s = serde_json::to_string(&u.to_records()).unwrap();
    let recs: Vec<CoeffRecord> = serde_json::from_str(&s).unwrap();
    assert_eq!(Element::from_records(&t, &recs).unwrap(), u);
}

#[test]
fn pruning_removes_cancelled_terms() {
    let t = theta2();
    let u1 = Element::generator(&t, 0);
    assert!((&u1 - &u1).is_empty());
    let tiny = Element::monomial(&t, vec![1, 1], c(1e-16, 0.0));
    assert!(tiny.is_empty());
}

fn element_strategy() -> impl Strategy<Value = Vec<(i64, i64, f64, f64)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3, -1.0f64..1.0, -1.0f64..1.0), 1..6)
}

fn build(t: &Arc<Theta>, spec: &[(i64, i64, f64, f64)]) -> Element {
    Element::from_coeffs(t, spec.iter().map(|&(a, b, re, im)| (vec![a, b], c(re, im)))).unwrap()
}

proptest! {
    #[test]
    fn adjoint_is_an_involution(spec in element_strategy(), th in -1.0f64..1.0) {
        let t = Arc::new(Theta::two(th));
        let u = build(&t, &spec);
        prop_assert!(u.adjoint().adjoint().distance(&u) < 1e-14);
    }

    #[test]
    fn trace_is_tracial(a in element_strategy(), b in element_strategy(), th in -1.0f64..1.0) {
        let t = Arc::new(Theta::two(th));
        let (u, v) = (build(&t, &a), build(&t, &b));
        prop_assert!(((&u * &v).trace() - (&v * &u).trace()).norm() < 1e-13);
    }

    #[test]
    fn derivations_satisfy_leibniz(a in element_strategy(), b in element_strategy(), th in -1.0f64..1.0) {
        let t = Arc::new(Theta::two(th));
        let (u, v) = (build(&t, &a), build(&t, &b));
        for j in 0..2 {
            let lhs = (&u * &v).delta_j(j);
            let rhs = &(&u.delta_j(j) * &v) + &(&u * &v.delta_j(j));
            prop_assert!(lhs.distance(&rhs) < 1e-13);
        }
    }

    #[test]
    fn adjoint_reverses_products(a in element_strategy(), b in element_strategy(), th in -1.0f64..1.0) {
        let t = Arc::new(Theta::two(th));
        let (u, v) = (build(&t, &a), build(&t, &b));
        prop_assert!((&u * &v).adjoint().distance(&(&v.adjoint() * &u.adjoint())) < 1e-13);
    }
}
