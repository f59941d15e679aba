mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use nctorus::gns::*;
use nctorus::{Element, Theta, C64};

fn tr(k: usize, p: usize) -> Truncation {
    Truncation::new(k, p)
}

#[test]
fn represent_then_extract_is_identity_on_small_support() {
    let t = theta2();
    let mut r = rng(11);
    let u = sparse(&t, 8, 3, &mut r);
    let bx = Arc::new(TruncationBox::new(2, 6, 2));
    let op = represent(&u, &bx);
    assert!(!op.support_outside);
    assert!(extract_element(&op, &t).distance(&u) < 1e-15);
}

#[test]
fn generator_acts_as_unitary_shift_on_interior() {
    let t = theta2();
    let bx = Arc::new(TruncationBox::new(2, 5, 1));
    let u1 = represent(&Element::generator(&t, 0), &bx);
    let u1s = represent(&Element::generator(&t, 0).adjoint(), &bx);
    let prod = u1s.matmul(&u1);
    let id = TruncatedOperator::identity(&bx);
    assert!(prod.max_diff_within(&id, 5) < 1e-15);
    for col in 0..bx.dim() {
        if !bx.is_interior(col) {
            continue;
        }
        let l = bx.mode(col).clone();
        let row = bx.index_of(&[l[0] + 1, l[1]]).unwrap();
        let want = t.phase(&[1, 0], &l);
        assert!((u1.mat[(row, col)] - want).norm() < 1e-15);
        assert!((want.norm() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn representation_is_multiplicative_on_interior() {
    let t = theta2();
    let mut r = rng(12);
    let u = sparse(&t, 5, 2, &mut r);
    let v = sparse(&t, 5, 2, &mut r);
    let bx = Arc::new(TruncationBox::new(2, 4, 4));
    let lhs = represent(&(&u * &v), &bx);
    let rhs = represent(&u, &bx).matmul(&represent(&v, &bx));
    assert!(lhs.max_diff_within(&rhs, 4) < 1e-14);
    let adj = represent(&u.adjoint(), &bx);
    let d = adj.max_diff_within(&represent(&u, &bx).adjoint(), 8);
    assert!(d < 1e-14, "{d:e}");
}

#[test]
fn mode_commutator_represents_derivation() {
    let t = theta2();
    let mut r = rng(13);
    let u = sparse(&t, 6, 3, &mut r);
    let bx = Arc::new(TruncationBox::new(2, 6, 3));
    for j in 0..2 {
        let lhs = represent(&u, &bx).mode_commutator(j);
        let rhs = represent(&u.delta_j(j), &bx);
        assert!(lhs.max_diff_within(&rhs, 9) < 1e-13);
        let d = TruncatedOperator::mode_operator(&bx, j);
        let direct = d.matmul(&represent(&u, &bx)).sub(&represent(&u, &bx).matmul(&d));
        assert!(direct.max_diff_within(&rhs, 9) < 1e-13);
    }
}

#[test]
fn eigenvalues_ascending_and_bounded() {
    let t = theta2();
    let u1 = Element::generator(&t, 0);
    let s = &u1 + &u1.adjoint();
    let bx = Arc::new(TruncationBox::new(2, 10, 2));
    let e = hermitian_eig(&represent(&s, &bx)).unwrap();
    assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    assert!(e.values.iter().all(|&v| v.abs() <= 2.0 + 1e-12));
    // a path of length 25 has extreme eigenvalues ±2cos(π/26)
    let want = 2.0 * (std::f64::consts::PI / 26.0).cos();
    assert!((e.values.last().unwrap() - want).abs() < 1e-12);
    assert!((e.values[0] + want).abs() < 1e-12);
    // eigenvectors are unitary and diagonalize
    let d = bx.dim();
    let v = &e.vectors;
    let vhv = v.adjoint() * v;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((vhv[(i, j)] - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn nonhermitian_input_is_rejected() {
    let t = theta2();
    let bx = Arc::new(TruncationBox::new(2, 3, 1));
    assert!(block_eig(&represent(&Element::generator(&t, 0), &bx)).is_err());
}

#[test]
fn functional_calculus_inverts_itself() {
    let t = theta2();
    let k = k_factor(&t);
    let bx = Arc::new(TruncationBox::new(2, 8, 2));
    let op = represent(&k, &bx);
    let lg = func_calc(&op, &|x| x.ln()).unwrap();
    let back = func_calc(&lg, &|x| x.exp()).unwrap();
    assert!(back.max_diff_within(&op, 10) < 1e-12);
    let sq = func_calc(&op, &|x| x.sqrt()).unwrap();
    assert!(sq.matmul(&sq).max_diff_within(&op, 10) < 1e-12);
    assert!(func_calc(&op.scale(C64::new(-1.0, 0.0)), &|x| x.ln()).is_err());
}

#[test]
fn element_powers_compose() {
    let t = theta2();
    let k = k_factor(&t);
    let half = element_power(&k, 0.5, tr(24, 4)).unwrap();
    assert!((&half * &half).truncate_inf(20).distance(&k) < 1e-12);
    let inv = element_power(&k, -1.0, tr(24, 4)).unwrap();
    assert!((&inv * &k).truncate_inf(20).distance(&Element::one(&t)) < 1e-12);
    // commutative oracle: 1/(2 + cos x) has mean 1/√3
    assert!((inv.trace().re - 1.0 / 3f64.sqrt()).abs() < 1e-13);
    let neg = Element::real(&t, -1.0);
    assert!(element_power(&neg, 0.5, tr(4, 2)).is_err());
}

#[test]
fn element_exp_matches_series_for_commuting_case() {
    let t = theta2();
    let x = cosine(&t, 0.0, 0.2);
    let e = element_exp(&x, tr(16, 4)).unwrap();
    // series Σ x^m / m!
    let mut term = Element::one(&t);
    let mut sum = Element::one(&t);
    for m in 1..25 {
        term = (&term * &x).scale_re(1.0 / m as f64);
        sum = &sum + &term;
    }
    assert!(e.distance(&sum) < 1e-13);
}

#[test]
fn spectral_bounds_stable_under_truncation() {
    let t = theta2();
    let k = k_factor(&t);
    let mut prev_lo = f64::INFINITY;
    for kk in [8, 16, 32] {
        let (lo, hi) = spectral_bounds(&k, tr(kk, 2)).unwrap();
        assert!(lo >= 1.0 - 1e-12 && hi <= 3.0 + 1e-12);
        assert!(lo <= prev_lo + 1e-12);
        prev_lo = lo;
    }
}

#[test]
fn operator_norm_is_monotone_in_truncation() {
    let t = theta2();
    let mut r = rng(14);
    let u = sparse(&t, 5, 2, &mut r);
    let mut prev = 0.0;
    for kk in [2, 4, 8, 16] {
        let nrm = operator_norm(&u, tr(kk, 2));
        assert!(nrm >= prev - 1e-12);
        assert!(nrm <= u.norm_l1() + 1e-12);
        prev = nrm;
    }
    assert_eq!(operator_norm(&Element::zero(&t), tr(4, 2)), 0.0);
}

#[test]
fn determinant_examples() {
    let t = theta2();
    let k = k_factor(&t);
    let trn = tr(24, 4);
    let one = det_algebra(&MatrixOverAlgebra::identity(&t, 2), trn).unwrap();
    assert!(one.distance(&Element::one(&t)) < 1e-13);
    let k2 = &k * &k;
    let d = det_algebra(&MatrixOverAlgebra::diagonal(&[k2.clone(), k2.clone()]), trn).unwrap();
    let want = &k2 * &k2;
    assert!(d.distance(&want) < 1e-10, "{}", d.distance(&want));
}

#[test]
fn determinant_matches_leibniz_for_commuting_entries() {
    let t = theta2();
    let a = cosine(&t, 2.0, 0.4);
    let b = cosine(&t, 0.0, 0.3);
    let c = cosine(&t, 1.5, 0.5);
    let h = MatrixOverAlgebra::new(2, vec![a.clone(), b.clone(), b.clone(), c.clone()]).unwrap();
    let d = det_algebra(&h, tr(24, 4)).unwrap();
    let want = &(&a * &c) - &(&b * &b);
    assert!(d.distance(&want) < 1e-11);
}

#[test]
fn determinant_is_multiplicative_and_respects_powers() {
    let t = theta0(2);
    let a = cosine(&t, 2.0, 0.4);
    let b = cosine(&t, 0.0, 0.3);
    let c = cosine(&t, 1.5, 0.5);
    let h1 = MatrixOverAlgebra::new(2, vec![a.clone(), b.clone(), b.clone(), c.clone()]).unwrap();
    let h2 = MatrixOverAlgebra::diagonal(&[c.clone(), a.clone()]);
    let trn = tr(24, 4);
    let h3 = MatrixOverAlgebra::diagonal(&[a.clone(), c.clone()]);
    let lhs = det_algebra(&h3.matmul(&h2), trn).unwrap();
    let rhs = &det_algebra(&h3, trn).unwrap() * &det_algebra(&h2, trn).unwrap();
    assert!(lhs.distance(&rhs) < 1e-11);
    let sq = h1.matmul(&h1);
    let lhs = det_algebra(&sq, trn).unwrap();
    let d1 = det_algebra(&h1, trn).unwrap();
    assert!(lhs.distance(&(&d1 * &d1)) < 1e-10);
}

#[test]
fn self_compatibility_detection() {
    let t = theta2();
    let a = cosine(&t, 2.0, 1.0);
    let b = cosine(&t, 0.0, 0.6);
    let c = cosine(&t, 1.5, 1.0);
    let good = MatrixOverAlgebra::new(2, vec![a.clone(), b.clone(), b.clone(), c]).unwrap();
    assert!(self_compat_check(&good, tr(8, 2)) < 1e-12);
    let u2 = Element::generator(&t, 1);
    let e = &Element::real(&t, 2.0) + &(&u2 + &u2.adjoint()).scale_re(0.25);
    let bad = MatrixOverAlgebra::diagonal(&[a, e]);
    assert!(self_compat_check(&bad, tr(8, 2)) > 1e-3);
}

#[test]
fn fibers_partition_the_full_box() {
    let (k, p) = (3usize, 1usize);
    let r = (k + p) as i64;
    let full = TruncationBox::new(3, k, p);
    let full_modes: BTreeSet<Vec<i64>> = full.modes().iter().cloned().collect();
    let mut union = BTreeSet::new();
    let mut total = 0;
    for q1 in -r..=r {
        for q2 in -r..=r {
            let f = TruncationBox::fiber(3, k, p, &[true, false, false], vec![0, q1, q2]);
            total += f.dim();
            assert_eq!(f.mode(f.origin()), &vec![0, q1, q2]);
            union.extend(f.modes().iter().cloned());
        }
    }
    assert_eq!(total, full.dim());
    assert_eq!(union, full_modes);
}

#[test]
fn fiber_operator_is_block_of_full_operator() {
    let t = Arc::new(Theta::from_rows(&[vec![0.0, 0.3, 0.2], vec![-0.3, 0.0, 0.1], vec![-0.2, -0.1, 0.0]]).unwrap());
    let u1 = Element::generator(&t, 0);
    let s = &u1 + &u1.adjoint();
    let full = Arc::new(TruncationBox::new(3, 2, 1));
    let big = represent(&s, &full);
    let f = Arc::new(TruncationBox::fiber(3, 2, 1, &[true, false, false], vec![0, 1, -2]));
    let small = represent(&s, &f);
    for a in 0..f.dim() {
        for b in 0..f.dim() {
            let ia = full.index_of(f.mode(a)).unwrap();
            let ib = full.index_of(f.mode(b)).unwrap();
            assert!((big.mat[(ia, ib)] - small.mat[(a, b)]).norm() < 1e-15);
        }
    }
    let ev = hermitian_eigenvalues(&small).unwrap();
    assert_eq!(ev.len(), 7);
}

#[test]
fn components_split_block_diagonal_pattern() {
    let t = theta2();
    let u1 = Element::generator(&t, 0);
    let s = &u1 + &u1.adjoint();
    let bx = Arc::new(TruncationBox::new(2, 2, 1));
    let comps = components(&represent(&s, &bx).mat);
    assert_eq!(comps.len(), 7);
    assert!(comps.iter().all(|c| c.len() == 7));
}
