//! Laplace–Beltrami operators, their conjugated forms, truncated matrices and
//! the curved integration check.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Element, MultiIndex, Theta, C64};
use crate::error::{Error, Result};
use crate::gns::{element_power, represent, BlockEigen, MatrixOverAlgebra, TruncatedOperator, Truncation, TruncationBox};
use crate::metric::RiemannianMetric;
use crate::psido::{ClassicalSymbol, SymbolTerm, DEFAULT_CUTOFF};
use crate::quadrature::{sphere_area, SphereQuadrature};
use crate::spectral::{dixmier_estimate_complex, ComplexDixmier, FILL_FRACTION};

/// Relative Hermiticity tolerance for truncated Laplacians.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues below this fraction of the largest one count as kernel.
pub const KERNEL_TOL: f64 = 1e-8;

/// Elements entering `Δ_g`: `ν`, `ν^{±1/2}`, `ν^{-1}` and `h^{ij} = ν^{1/2} g^{ij} ν^{1/2}`.
#[derive(Clone, Debug)]
pub struct LaplaceParts {
    pub nu: Element,
    pub nu_inv: Element,
    pub nu_half: Element,
    pub nu_minus_half: Element,
    pub h: MatrixOverAlgebra,
}

impl LaplaceParts {
    pub fn new(g: &RiemannianMetric) -> Result<Self> {
        let theta = g.theta().clone();
        let n = g.n();
        if g.is_flat() {
            let one = Element::one(&theta);
            return Ok(LaplaceParts {
                nu: one.clone(),
                nu_inv: one.clone(),
                nu_half: one.clone(),
                nu_minus_half: one,
                h: g.g_inv.clone(),
            });
        }
        let nu = g.riemannian_density()?;
        let tr = g.tr;
        let nu_inv = element_power(&nu, -1.0, tr)?;
        let nu_half = element_power(&nu, 0.5, tr)?;
        let nu_minus_half = element_power(&nu, -0.5, tr)?;
        let h = MatrixOverAlgebra::from_fn(n, |i, j| (&(&nu_half * g.g_inv.get(i, j)) * &nu_half).hermitian_part());
        Ok(LaplaceParts { nu, nu_inv, nu_half, nu_minus_half, h })
    }
}

/// `Σ A_ij δ_iδ_j + Σ B_j δ_j + C` with coefficients acting by left multiplication.
#[derive(Clone, Debug)]
pub struct SecondOrderOperator {
    pub a: MatrixOverAlgebra,
    pub b: Vec<Element>,
    pub c: Element,
    pub tr: Truncation,
}

fn delta2(u: &Element, i: usize, j: usize) -> Element {
    u.delta_j(j).delta_j(i)
}

impl SecondOrderOperator {
    pub fn n(&self) -> usize {
        self.a.m
    }

    pub fn theta(&self) -> &Arc<Theta> {
        self.a.theta()
    }

    pub fn elements(&self) -> Vec<&Element> {
        self.a.entries.iter().chain(self.b.iter()).chain(std::iter::once(&self.c)).collect()
    }

    /// Axes touched by some coefficient.
    pub fn active(&self) -> Vec<bool> {
        let mut act = vec![false; self.n()];
        for e in self.elements() {
            for (j, a) in e.active_axes().into_iter().enumerate() {
                act[j] |= a;
            }
        }
        act
    }

    /// Action on an element.
    pub fn apply(&self, u: &Element) -> Element {
        let n = self.n();
        let mut acc = &self.c * u;
        for j in 0..n {
            acc = acc + &self.b[j] * &u.delta_j(j);
            for i in 0..n {
                let a = self.a.get(i, j);
                if !a.is_empty() {
                    acc = acc + a * &delta2(u, i, j);
                }
            }
        }
        acc
    }

    /// Full symbol `p₂ + p₁ + p₀` with `p₂ = Σ A_ij ξ_iξ_j`.
    pub fn symbol(&self) -> ClassicalSymbol {
        let n = self.n();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut beta = vec![0u32; n];
                beta[i] += 1;
                beta[j] += 1;
                terms.push(SymbolTerm::new(self.a.get(i, j).clone(), beta, 0.0));
            }
            let mut beta = vec![0u32; n];
            beta[i] = 1;
            terms.push(SymbolTerm::new(self.b[i].clone(), beta, 0.0));
        }
        terms.push(SymbolTerm::new(self.c.clone(), vec![0; n], 0.0));
        ClassicalSymbol::from_terms(self.theta(), terms, DEFAULT_CUTOFF).expect("integer degrees")
    }

    /// Box through the origin spanned by the coefficient supports.
    pub fn fiber_box(&self, tr: Truncation, offset: Vec<i64>) -> Arc<TruncationBox> {
        Arc::new(TruncationBox::fiber(self.n(), tr.k, tr.p, &self.active(), offset))
    }

    /// Truncated matrix: entry `(m, l)` is `Σ_k X_k φ(k, l)·w_X(l)` summed over
    /// coefficients `X` with column weights `l_il_j`, `l_j` or `1`.
    pub fn matrix(&self, bx: &Arc<TruncationBox>) -> TruncatedOperator {
        let n = self.n();
        let d = bx.dim();
        let theta = self.theta().clone();
        let mut parts: Vec<(&Element, Vec<usize>)> = vec![(&self.c, vec![])];
        for i in 0..n {
            parts.push((&self.b[i], vec![i]));
            for j in 0..n {
                parts.push((self.a.get(i, j), vec![i, j]));
            }
        }
        let active = bx.active().to_vec();
        let cols: Vec<Vec<C64>> = (0..d)
            .into_par_iter()
            .map(|col| {
                let l = bx.mode(col);
                let mut out = vec![C64::default(); d];
                for (x, axes) in &parts {
                    let w: f64 = axes.iter().map(|&j| l[j] as f64).product();
                    if w == 0.0 {
                        continue;
                    }
                    for (k, c) in x.iter() {
                        if (0..n).any(|j| !active[j] && k[j] != 0) {
                            continue;
                        }
                        let m: MultiIndex = l.iter().zip(k).map(|(a, b)| a + b).collect();
                        if let Some(row) = bx.index_of(&m) {
                            out[row] += c * theta.phase(k, l) * w;
                        }
                    }
                }
                out
            })
            .collect();
        TruncatedOperator::from_mat(bx, Mat::from_fn(d, d, |r, c| cols[c][r]))
    }

    /// Largest coefficient distance to another operator of the same shape.
    pub fn distance(&self, other: &SecondOrderOperator) -> f64 {
        let mut d = self.c.distance(&other.c);
        for (x, y) in self.b.iter().zip(&other.b) {
            d = d.max(x.distance(y));
        }
        for (x, y) in self.a.entries.iter().zip(&other.a.entries) {
            d = d.max(x.distance(y));
        }
        d
    }
}

fn zero_vec(theta: &Arc<Theta>, n: usize) -> Vec<Element> {
    (0..n).map(|_| Element::zero(theta)).collect()
}

/// `Δ_g = ν^{-1} Σ δ_i(h^{ij} δ_j ·)` expanded by Leibniz:
/// `A = ν^{-1}h`, `B_j = Σ_i ν^{-1}δ_i(h^{ij})`, `C = 0`.
pub fn assemble_delta_g(g: &RiemannianMetric) -> Result<SecondOrderOperator> {
    let parts = LaplaceParts::new(g)?;
    Ok(delta_g_from_parts(&parts, g.tr))
}

pub fn delta_g_from_parts(p: &LaplaceParts, tr: Truncation) -> SecondOrderOperator {
    let n = p.h.m;
    let theta = p.h.theta().clone();
    let a = MatrixOverAlgebra::from_fn(n, |i, j| &p.nu_inv * p.h.get(i, j));
    let mut b = zero_vec(&theta, n);
    for (j, bj) in b.iter_mut().enumerate() {
        for i in 0..n {
            *bj = &*bj + &(&p.nu_inv * &p.h.get(i, j).delta_j(i));
        }
    }
    SecondOrderOperator { a, b, c: Element::zero(&theta), tr }
}

/// `cΔ_g = ν^{1/2} Δ_g ν^{-1/2}` with `w = ν^{-1/2}`:
/// `A = g^{-1}`, `B_m = Σ_j w h^{mj} δ_j(w) + Σ_i w δ_i(h^{im} w)`,
/// `C = Σ_ij w δ_i(h^{ij} δ_j(w))`.
pub fn conjugate(g: &RiemannianMetric) -> Result<SecondOrderOperator> {
    let parts = LaplaceParts::new(g)?;
    Ok(conjugated_from_parts(&parts, &g.g_inv, g.tr))
}

pub fn conjugated_from_parts(p: &LaplaceParts, g_inv: &MatrixOverAlgebra, tr: Truncation) -> SecondOrderOperator {
    let n = p.h.m;
    let theta = p.h.theta().clone();
    let w = &p.nu_minus_half;
    let dw: Vec<Element> = (0..n).map(|j| w.delta_j(j)).collect();
    let mut b = zero_vec(&theta, n);
    let mut c = Element::zero(&theta);
    for (m, bm) in b.iter_mut().enumerate() {
        for j in 0..n {
            let h = p.h.get(m, j);
            if !h.is_empty() {
                *bm = &*bm + &(&(w * h) * &dw[j]);
            }
        }
        for i in 0..n {
            let h = p.h.get(i, m);
            if !h.is_empty() {
                *bm = &*bm + &(w * &(h * w).delta_j(i));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let h = p.h.get(i, j);
            if !h.is_empty() {
                c = c + w * &(h * &dw[j]).delta_j(i);
            }
        }
    }
    SecondOrderOperator { a: g_inv.clone(), b, c, tr }
}

/// `ν^{-1} Σ δ_i(h^{ij} δ_j u)` evaluated without expansion.
pub fn nested_delta_g(p: &LaplaceParts, u: &Element) -> Element {
    let n = p.h.m;
    let mut acc = Element::zero(u.theta());
    for i in 0..n {
        for j in 0..n {
            acc = acc + (p.h.get(i, j) * &u.delta_j(j)).delta_j(i);
        }
    }
    &p.nu_inv * &acc
}

/// `w Σ δ_i(h^{ij} δ_j(w u))` evaluated without expansion.
pub fn nested_conjugated(p: &LaplaceParts, u: &Element) -> Element {
    let n = p.h.m;
    let w = &p.nu_minus_half;
    let wu = w * u;
    let mut acc = Element::zero(u.theta());
    for i in 0..n {
        for j in 0..n {
            acc = acc + (p.h.get(i, j) * &wu.delta_j(j)).delta_j(i);
        }
    }
    w * &acc
}

/// Largest relative discrepancy between the expanded and nested forms.
pub fn leibniz_residual(op: &SecondOrderOperator, nested: impl Fn(&Element) -> Element, samples: &[Element]) -> f64 {
    samples
        .iter()
        .map(|u| {
            let x = op.apply(u);
            let y = nested(u);
            x.distance(&y) / y.norm_l2().max(x.norm_l2()).max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Relative Hermitian defect, failing above [`HERMITIAN_TOL`].
pub fn check_laplacian_hermitian(op: &TruncatedOperator) -> Result<f64> {
    let rel = op.hermitian_defect() / op.frobenius().max(f64::MIN_POSITIVE);
    if rel > HERMITIAN_TOL {
        return Err(Error::NotHermitian(rel));
    }
    Ok(rel)
}

fn symmetrized(m: &Mat<C64>) -> Mat<C64> {
    let d = m.nrows();
    Mat::from_fn(d, d, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()))
}

/// `t ↦ t^s` on the complement of the near-kernel.
#[derive(Clone, Debug)]
pub struct FractionalPower {
    pub op: TruncatedOperator,
    pub kernel_dim: usize,
    pub lambda_max: f64,
}

pub fn fractional_power_matrix(op: &TruncatedOperator, s: f64) -> Result<FractionalPower> {
    if s >= 0.0 {
        return Err(Error::NegativeOrder);
    }
    check_laplacian_hermitian(op)?;
    let e = BlockEigen::new(&symmetrized(&op.mat))?;
    let (lo, hi) = (e.min(), e.max());
    if lo < -KERNEL_TOL * hi.abs() {
        return Err(Error::Positivity(format!("min eigenvalue {lo:e} below −1e-8·{hi:e}")));
    }
    let thr = KERNEL_TOL * hi.abs();
    let kernel_dim = e.values().iter().filter(|&&v| v < thr).count();
    if kernel_dim > 1 {
        return Err(Error::Truncation(format!("{kernel_dim} near-zero eigenvalues")));
    }
    let mat = e.apply(&|t| if t < thr { 0.0 } else { t.powf(s) })?;
    Ok(FractionalPower { op: TruncatedOperator::from_mat(&op.bx, mat), kernel_dim, lambda_max: hi })
}

/// Fibers of the full box sharing one matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberClass {
    pub offset: Vec<i64>,
    pub multiplicity: usize,
}

/// Whether fiber matrices depend on the transverse offset only through `|q|²`.
pub fn transverse_isotropic(op: &SecondOrderOperator) -> bool {
    let n = op.n();
    let act = op.active();
    let t: Vec<usize> = (0..n).filter(|&j| !act[j]).collect();
    if t.is_empty() {
        return true;
    }
    let theta = op.theta();
    let a0 = op.a.get(t[0], t[0]);
    for &i in &t {
        if op.a.get(i, i) != a0 || !op.b[i].is_empty() {
            return false;
        }
        for j in 0..n {
            if j != i && (!op.a.get(i, j).is_empty() || !op.a.get(j, i).is_empty()) {
                return false;
            }
            if theta.get(i, j) != 0.0 {
                return false;
            }
        }
    }
    true
}

/// Transverse offsets `|q_i| ≤ radius` on the inactive axes, grouped by `|q|²`
/// when the operator is transversally isotropic.
pub fn fiber_classes(op: &SecondOrderOperator, radius: i64) -> Vec<FiberClass> {
    let n = op.n();
    let act = op.active();
    let t: Vec<usize> = (0..n).filter(|&j| !act[j]).collect();
    let side = (2 * radius + 1) as usize;
    let count = side.pow(t.len() as u32);
    let iso = transverse_isotropic(op);
    let mut grouped: std::collections::BTreeMap<i64, FiberClass> = Default::default();
    let mut all = Vec::new();
    for idx in 0..count {
        let mut q = vec![0i64; n];
        let mut rem = idx;
        for &j in t.iter().rev() {
            q[j] = (rem % side) as i64 - radius;
            rem /= side;
        }
        if iso {
            let s: i64 = q.iter().map(|x| x * x).sum();
            grouped.entry(s).or_insert(FiberClass { offset: q, multiplicity: 0 }).multiplicity += 1;
        } else {
            all.push(FiberClass { offset: q, multiplicity: 1 });
        }
    }
    if iso {
        grouped.into_values().collect()
    } else {
        all
    }
}

/// Eigen-decomposition of one fiber class.
#[derive(Clone, Debug)]
pub struct FiberSpectrum {
    pub class: FiberClass,
    pub bx: Arc<TruncationBox>,
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

/// Spectra of all fibers of the box with active half-width `tr.k + tr.p` and
/// transverse half-width `transverse`.
pub fn fiber_spectra(op: &SecondOrderOperator, tr: Truncation, transverse: i64) -> Result<Vec<FiberSpectrum>> {
    fiber_classes(op, transverse)
        .into_par_iter()
        .map(|class| {
            let bx = op.fiber_box(tr, class.offset.clone());
            let m = op.matrix(&bx);
            check_laplacian_hermitian(&m)?;
            let h = BlockEigen::new(&symmetrized(&m.mat))?.dense();
            Ok(FiberSpectrum { class, bx, values: h.values, vectors: h.vectors })
        })
        .collect()
}

/// All eigenvalues with multiplicity, ascending.
pub fn collect_eigenvalues(spectra: &[FiberSpectrum]) -> Vec<f64> {
    let mut v = Vec::new();
    for f in spectra {
        for _ in 0..f.class.multiplicity {
            v.extend_from_slice(&f.values);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// `(value, ⟨b v, v⟩)` for every eigenpair, with multiplicity.
pub fn modulated_pairs(spectra: &[FiberSpectrum], b: &Element) -> Vec<(f64, C64, usize)> {
    let mut out = Vec::new();
    for f in spectra {
        let r = represent(b, &f.bx);
        let d = f.bx.dim();
        for c in 0..d {
            let mut z = C64::default();
            for i in 0..d {
                let mut rv = C64::default();
                for k in 0..d {
                    rv += r.mat[(i, k)] * f.vectors[(k, c)];
                }
                z += f.vectors[(i, c)].conj() * rv;
            }
            out.push((f.values[c], z, f.class.multiplicity));
        }
    }
    out
}

fn kernel_count(values: &[f64]) -> Result<(usize, f64)> {
    let hi = values.last().copied().unwrap_or(0.0);
    let lo = values.first().copied().unwrap_or(0.0);
    if lo < -KERNEL_TOL * hi.abs() {
        return Err(Error::Positivity(format!("min eigenvalue {lo:e} below −1e-8·{hi:e}")));
    }
    let thr = KERNEL_TOL * hi.abs();
    let k = values.iter().filter(|&&v| v < thr).count();
    if k > 1 {
        return Err(Error::Truncation(format!("{k} near-zero eigenvalues")));
    }
    Ok((k, thr))
}

/// Lowest `count` nonzero eigenvalues of `cΔ_g` on the full box.
pub fn low_eigenvalues(op: &SecondOrderOperator, tr: Truncation, count: usize) -> Result<Vec<f64>> {
    let vals = collect_eigenvalues(&fiber_spectra(op, tr, tr.radius() as i64)?);
    let (_, thr) = kernel_count(&vals)?;
    Ok(vals.into_iter().filter(|&v| v >= thr).take(count).collect())
}

/// Largest relative drift of the lowest nonzero eigenvalues when `K` doubles.
pub fn low_eigenvalue_drift(g: &RiemannianMetric, count: usize) -> Result<f64> {
    let tr = g.tr;
    let tr2 = Truncation::new(2 * tr.k, tr.p);
    let a = low_eigenvalues(&conjugate(g)?, tr, count)?;
    let g2 = g.retruncate(tr2)?;
    let b = low_eigenvalues(&conjugate(&g2)?, tr2, count)?;
    Ok(a.iter().zip(&b).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max))
}

/// `max |(R(ν^{-1/2}) M_c R(ν^{1/2}) − M_Δ)_{ml}|` on `|m|_∞, |l|_∞ ≤ K/2`.
pub fn conjugation_residual(g: &RiemannianMetric) -> Result<f64> {
    let parts = LaplaceParts::new(g)?;
    let dg = delta_g_from_parts(&parts, g.tr);
    let cg = conjugated_from_parts(&parts, &g.g_inv, g.tr);
    let mut elems = dg.elements();
    elems.extend(cg.elements());
    elems.push(&parts.nu_half);
    let bx = Arc::new(g.tr.box_for(&elems));
    let lhs = represent(&parts.nu_minus_half, &bx).matmul(&cg.matrix(&bx)).matmul(&represent(&parts.nu_half, &bx));
    let rhs = dg.matrix(&bx);
    Ok(lhs.max_diff_within(&rhs, (g.tr.k / 2) as i64))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvedIntegrationReport {
    pub dixmier: ComplexDixmier,
    pub target_re: f64,
    pub target_im: f64,
    /// `|slope estimate − target| / max(|target|, 1)`.
    pub relative_error: f64,
    pub absolute_error: f64,
    pub reliable: usize,
    pub dim: usize,
    pub kernel_dim: usize,
}

/// Sequence `λ_j^{-n/2} ⟨a v_j, v_j⟩` over the nonzero spectrum of `cΔ_g`,
/// in decreasing `λ_j^{-n/2}`.
#[derive(Clone, Debug)]
pub struct IntegrationSeries {
    pub series: Vec<C64>,
    pub dim: usize,
    pub kernel_dim: usize,
}

pub fn curved_integration_series(g: &RiemannianMetric, a: &Element) -> Result<IntegrationSeries> {
    let n = g.n();
    let tr = g.tr;
    let op = conjugate(g)?;
    let spectra = fiber_spectra(&op, tr, tr.radius() as i64)?;
    let vals = collect_eigenvalues(&spectra);
    let dim = vals.len();
    let (kernel_dim, thr) = kernel_count(&vals)?;
    let mut seq: Vec<(f64, C64)> = Vec::with_capacity(dim);
    for (lam, z, mult) in modulated_pairs(&spectra, a) {
        if lam >= thr {
            let mu = lam.powf(-(n as f64) / 2.0);
            for _ in 0..mult {
                seq.push((mu, z));
            }
        }
    }
    seq.sort_by(|x, y| y.0.total_cmp(&x.0));
    let series = seq.iter().map(|(mu, z)| z * *mu).collect();
    Ok(IntegrationSeries { series, dim, kernel_dim })
}

/// Dixmier estimate of `a·cΔ_g^{-n/2}` on the full box, read from the
/// sequence `λ_j^{-n/2} ⟨a v_j, v_j⟩` in decreasing `λ_j^{-n/2}`, compared with
/// `ĉ_n τ[a ν̃(g)]`.
pub fn curved_integration_check(
    g: &RiemannianMetric,
    a: &Element,
    n_min: usize,
    fill: Option<f64>,
    quad: &SphereQuadrature,
) -> Result<CurvedIntegrationReport> {
    let n = g.n();
    let IntegrationSeries { series, dim, kernel_dim } = curved_integration_series(g, a)?;
    let reliable = ((fill.unwrap_or(FILL_FRACTION) * dim as f64).floor() as usize).saturating_sub(kernel_dim);
    let dixmier = dixmier_estimate_complex(&series, (n_min, reliable))?;
    let nu_t = g.spectral_density(quad)?;
    let target = (a * &nu_t).trace() * (sphere_area(n) / n as f64);
    let absolute_error = (dixmier.slope() - target).norm();
    Ok(CurvedIntegrationReport {
        relative_error: absolute_error / target.norm().max(1.0),
        absolute_error,
        dixmier,
        target_re: target.re,
        target_im: target.im,
        reliable,
        dim,
        kernel_dim,
    })
}

/// `c_n = (1/n)(2π)^{-n}|S^{n−1}|`.
pub fn c_n(n: usize) -> f64 {
    sphere_area(n) / (n as f64 * (2.0 * PI).powi(n as i32))
}

/// `Vol^{(k)}_g = c_n^{-k/n} (1/n) Res(cΔ_g^{-k/2})` for `k ∈ {n−2, n−1, n}`.
pub fn lower_dim_volume(
    g: &RiemannianMetric,
    k: usize,
    quad: &SphereQuadrature,
    contour: &crate::curvature::ContourPolicy,
) -> Result<C64> {
    let n = g.n();
    if k > n || k + 2 < n {
        return Err(Error::Invalid(format!("volume order {k} outside [n−2, n] for n = {n}")));
    }
    let cn = c_n(n);
    let scale = cn.powf(-(k as f64) / n as f64) / n as f64;
    if k == n {
        let nu_t = g.spectral_density(quad)?;
        return Ok(nu_t.trace() * sphere_area(n) * scale);
    }
    let op = conjugate(g)?;
    let j = n - k;
    let res = crate::curvature::resolvent_power_residue(
        &op,
        quad,
        contour,
        crate::curvature::LambdaWeight::Power(k as f64 / 2.0),
        j,
    )?;
    Ok(res.trace() * scale)
}
