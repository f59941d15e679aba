mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::*;
use nctorus::curvature::ContourPolicy;
use nctorus::gns::{block_eig, element_power, represent, MatrixOverAlgebra, TruncatedOperator, Truncation, TruncationBox};
use nctorus::laplace::*;
use nctorus::metric::RiemannianMetric;
use nctorus::quadrature::SphereQuadrature;
use nctorus::{Element, Theta, C64};

fn theta3() -> Arc<Theta> {
    Arc::new(Theta::from_rows(&[vec![0.0, 0.3, -0.2], vec![-0.3, 0.0, 0.45], vec![0.2, -0.45, 0.0]]).unwrap())
}

fn symmetrize(m: &TruncatedOperator) -> TruncatedOperator {
    m.add(&m.adjoint()).scale(C64::new(0.5, 0.0))
}

fn random_samples(t: &Arc<Theta>, count: usize, seed: u64) -> Vec<Element> {
    let mut r = rng(seed);
    (0..count).map(|_| sparse(t, 5, 3, &mut r)).collect()
}

#[test]
fn flat_laplacian_is_sum_of_squares() {
    let t = theta2();
    let g = RiemannianMetric::flat(&t, Truncation::new(4, 2));
    let d = assemble_delta_g(&g).unwrap();
    let c = conjugate(&g).unwrap();
    assert!(d.distance(&c) == 0.0);
    assert!(c.b.iter().all(|b| b.is_empty()) && c.c.is_empty());
    let u = Element::monomial(&t, vec![3, -2], C64::new(1.0, 0.5));
    assert_eq!(d.apply(&u), u.scale_re(13.0));
    assert_eq!(d.apply(&u), u.flat_laplacian());
    let bx = Arc::new(TruncationBox::new(2, 4, 2));
    let m = c.matrix(&bx);
    for i in 0..bx.dim() {
        let l = bx.mode(i);
        assert_eq!(m.mat[(i, i)], C64::new((l[0] * l[0] + l[1] * l[1]) as f64, 0.0));
    }
    let sym = c.symbol();
    assert_eq!(sym.order, 2.0);
    assert_eq!(sym.eval(&[1.0, 2.0]), Element::real(&t, 5.0));
}

#[test]
fn conformal_two_dimensional_laplacian() {
    let t = theta2();
    let k = k_factor(&t);
    let tr = Truncation::new(24, 4);
    let g = RiemannianMetric::conformal(&k, tr).unwrap();
    let parts = LaplaceParts::new(&g).unwrap();
    assert!(parts.nu.distance(&(&k * &k)) < 1e-8);
    assert!(parts.h.get(0, 0).distance(&Element::one(&t)) < 1e-8);
    assert!(parts.h.get(0, 1).norm_l2() < 1e-8);
    let d = assemble_delta_g(&g).unwrap();
    let kinv2 = element_power(&k, -2.0, tr).unwrap();
    for u in random_samples(&t, 5, 31) {
        let want = &kinv2 * &u.flat_laplacian();
        assert!(d.apply(&u).distance(&want) < 1e-7);
    }
}

#[test]
fn conformal_conjugated_matrix_is_sandwich() {
    let t = theta2();
    let k = k_factor(&t);
    let tr = Truncation::new(16, 4);
    let g = RiemannianMetric::conformal(&k, tr).unwrap();
    let c = conjugate(&g).unwrap();
    let kinv = element_power(&k, -1.0, tr).unwrap();
    let bx = c.fiber_box(tr, vec![0, 3]);
    let rk = represent(&kinv, &bx);
    let mut lap = TruncatedOperator::mode_operator(&bx, 0).matmul(&TruncatedOperator::mode_operator(&bx, 0));
    lap = lap.add(&TruncatedOperator::mode_operator(&bx, 1).matmul(&TruncatedOperator::mode_operator(&bx, 1)));
    let want = rk.matmul(&lap).matmul(&rk);
    let got = c.matrix(&bx);
    let err = got.max_diff_within(&want, 8);
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn conformal_three_dimensional_laplacian() {
    let t = theta3();
    let k = cosine(&t, 2.0, 1.0);
    let tr = Truncation::new(20, 4);
    let g = RiemannianMetric::conformal(&k, tr).unwrap();
    let d = assemble_delta_g(&g).unwrap();
    // ν = k³, h = k δ, Δ_g u = k^{-3} Σ δ_i(k δ_i u)
    let kinv3 = element_power(&k, -3.0, tr).unwrap();
    for u in random_samples(&t, 5, 32) {
        let mut inner = Element::zero(&t);
        for i in 0..3 {
            inner = inner + (&k * &u.delta_j(i)).delta_j(i);
        }
        let want = &kinv3 * &inner;
        assert!(d.apply(&u).distance(&want) < 1e-7);
    }
}

#[test]
fn expanded_forms_match_nested_forms() {
    let t = theta2();
    let u1 = Element::generator(&t, 0);
    let u2 = Element::generator(&t, 1);
    let a = &Element::real(&t, 2.0) + &(&u1 + &u1.adjoint()).scale_re(0.4);
    let c = &Element::real(&t, 1.8) + &(&u2 + &u2.adjoint()).scale_re(0.3);
    let samples = random_samples(&t, 20, 33);
    let tr = Truncation::new(8, 3);
    for g in [
        RiemannianMetric::conformal(&k_factor(&t), Truncation::new(16, 4)).unwrap(),
        RiemannianMetric::new(MatrixOverAlgebra::diagonal(&[a, c]), tr).unwrap(),
    ] {
        let parts = LaplaceParts::new(&g).unwrap();
        let d = delta_g_from_parts(&parts, g.tr);
        let cd = conjugated_from_parts(&parts, &g.g_inv, g.tr);
        assert!(leibniz_residual(&d, |u| nested_delta_g(&parts, u), &samples) < 1e-12);
        // the conjugated form uses g⁻¹ = w h w, which holds up to truncation
        let res = leibniz_residual(&cd, |u| nested_conjugated(&parts, u), &samples);
        assert!(res < 1e-6, "{res:e}");
    }
}

#[test]
fn conjugated_matrix_is_hermitian_and_nonnegative() {
    let t = theta2();
    let tr = Truncation::new(16, 4);
    let g = RiemannianMetric::conformal(&k_factor(&t), tr).unwrap();
    let c = conjugate(&g).unwrap();
    for off in [0i64, 2, -5] {
        let bx = c.fiber_box(tr, vec![0, off]);
        let m = c.matrix(&bx);
        assert!(check_laplacian_hermitian(&m).unwrap() < HERMITIAN_TOL);
        let m = symmetrize(&m);
        let e = block_eig(&m).unwrap();
        assert!(e.min() > -1e-8 * e.max());
        let zeros = e.values().iter().filter(|&&v| v < 1e-8 * e.max()).count();
        assert_eq!(zeros, usize::from(off == 0));
    }
    // the plain Laplacian is not symmetric for the flat inner product
    let d = assemble_delta_g(&g).unwrap();
    assert!(check_laplacian_hermitian(&d.matrix(&c.fiber_box(tr, vec![0, 0]))).is_err());
}

#[test]
fn conjugated_laplacian_kills_square_root_density() {
    let t = theta2();
    let g = RiemannianMetric::conformal(&k_factor(&t), Truncation::new(24, 4)).unwrap();
    let parts = LaplaceParts::new(&g).unwrap();
    let c = conjugate(&g).unwrap();
    let r = c.apply(&parts.nu_half).truncate_inf(16);
    assert!(r.norm_l2() < 1e-8, "{:e}", r.norm_l2());
    assert!(assemble_delta_g(&g).unwrap().apply(&Element::one(&t)).is_empty());
}

#[test]
fn fractional_powers_invert_off_kernel() {
    let t = theta2();
    let tr = Truncation::new(16, 2);
    let g = RiemannianMetric::conformal(&k_factor(&t), tr).unwrap();
    let c = conjugate(&g).unwrap();
    let bx = c.fiber_box(tr, vec![0, 0]);
    let m = c.matrix(&bx);
    let inv = fractional_power_matrix(&m, -1.0).unwrap();
    assert_eq!(inv.kernel_dim, 1);
    let half = fractional_power_matrix(&m, -0.5).unwrap();
    let prod = half.op.matmul(&half.op);
    assert!(prod.max_diff_within(&inv.op, 18) < 1e-10);
    // M·M⁻¹ is the projection onto the complement of the kernel
    let p = symmetrize(&m).matmul(&inv.op);
    let q = p.matmul(&p);
    let err = q.max_diff_within(&p, 18);
    assert!(err < 1e-9, "{err:e}");
    let tr_p: f64 = (0..p.dim()).map(|i| p.mat[(i, i)].re).sum();
    assert!((tr_p - (p.dim() - 1) as f64).abs() < 1e-8);
    assert!(fractional_power_matrix(&m, 0.5).is_err());
}

#[test]
fn fiber_classes_group_isotropic_offsets() {
    let t = theta2();
    let tr = Truncation::new(6, 2);
    let g = RiemannianMetric::conformal(&k_factor(&t), tr).unwrap();
    let c = conjugate(&g).unwrap();
    assert!(!transverse_isotropic(&c));
    let classes = fiber_classes(&c, 8);
    assert_eq!(classes.len(), 17);
    let t0 = theta0(3);
    let g3 = RiemannianMetric::conformal(&cosine(&t0, 2.0, 1.0), tr).unwrap();
    let c3 = conjugate(&g3).unwrap();
    assert!(transverse_isotropic(&c3));
    let classes = fiber_classes(&c3, 2);
    assert_eq!(classes.iter().map(|c| c.multiplicity).sum::<usize>(), 25);
    assert_eq!(classes.len(), 6);
}

#[test]
fn fiber_spectra_match_full_box() {
    let t = theta2();
    let tr = Truncation::new(16, 1);
    let g = RiemannianMetric::conformal(&k_factor(&t), tr).unwrap();
    let c = conjugate(&g).unwrap();
    let fibers = collect_eigenvalues(&fiber_spectra(&c, tr, 17).unwrap());
    let full = Arc::new(TruncationBox::new(2, 16, 1));
    let direct = block_eig(&symmetrize(&c.matrix(&full))).unwrap().values();
    assert_eq!(fibers.len(), direct.len());
    for (a, b) in fibers.iter().zip(&direct) {
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
    }
}

#[test]
fn conjugation_is_consistent_with_density() {
    let t = theta2();
    let g = RiemannianMetric::conformal(&k_factor(&t), Truncation::new(16, 4)).unwrap();
    let r = conjugation_residual(&g).unwrap();
    assert!(r < 1e-8, "{r:e}");
}

#[test]
fn low_eigenvalues_are_stable_under_refinement() {
    let t = theta2();
    let g = RiemannianMetric::conformal(&k_factor(&t), Truncation::new(16, 4)).unwrap();
    let low = low_eigenvalues(&conjugate(&g).unwrap(), g.tr, 20).unwrap();
    assert_eq!(low.len(), 20);
    assert!(low.windows(2).all(|w| w[0] <= w[1]) && low[0] > 0.0);
    let drift = low_eigenvalue_drift(&g, 20).unwrap();
    assert!(drift < 0.005, "{drift:e}");
}

#[test]
fn flat_curved_integration_reproduces_pi() {
    let t = theta2();
    let g = RiemannianMetric::flat(&t, Truncation::new(30, 0));
    let quad = SphereQuadrature::standard(2, 32);
    let rep = curved_integration_check(&g, &Element::one(&t), 10, None, &quad).unwrap();
    assert!((rep.target_re - PI).abs() < 1e-10);
    assert_eq!(rep.kernel_dim, 1);
    assert!(rep.relative_error < 0.03, "{}", rep.relative_error);
    let rep = curved_integration_check(&g, &Element::generator(&t, 0), 10, None, &quad).unwrap();
    assert_eq!(rep.target_re, 0.0);
    assert!(rep.absolute_error < 1e-12);
}

#[test]
fn volumes_of_conformal_metric() {
    let t = theta2();
    let k = k_factor(&t);
    let g = RiemannianMetric::conformal(&k, Truncation::new(16, 4)).unwrap();
    let quad = SphereQuadrature::standard(2, 32);
    let policy = ContourPolicy::default();
    let v2 = lower_dim_volume(&g, 2, &quad, &policy).unwrap();
    assert!((v2.re - g.volume().unwrap()).abs() < 1e-7);
    assert!((c_n(2) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    let flat = RiemannianMetric::flat(&t, Truncation::new(4, 2));
    let v1 = lower_dim_volume(&flat, 1, &quad, &policy).unwrap();
    assert!(v1.norm() < 1e-10);
    assert!(lower_dim_volume(&g, 3, &quad, &policy).is_err());
}
