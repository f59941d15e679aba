//! Resolvent symbols of `cΔ_g`, scalar curvature and the heat-trace oracle.
//!
//! The recursion for `σ₋₂₋ⱼ` is run on the fiber through the origin. There
//! `D_j U^0 = 0`, so for every operator `X` built from left multiplications
//! and resolvents `(δ^α X) U^0 = D^α (X U^0)`. Only the column of the origin
//! is needed to read the result back as an element, so the whole recursion
//! reduces to matrix-vector products with `R = (M₂(ξ) − λ)^{-1}` applied
//! through the eigendecomposition of `M₂(ξ)`.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::algebra::{Element, MultiIndex, C64};
use crate::error::{Error, Result};
use crate::gns::{dense_eigh, extract_column, represent, TruncatedOperator, Truncation, TruncationBox};
use crate::laplace::{collect_eigenvalues, conjugate, fiber_spectra, modulated_pairs, SecondOrderOperator};
use crate::metric::RiemannianMetric;
use crate::quadrature::{ContourSpec, SphereQuadrature};

/// Function of `λ` integrated against the resolvent symbols.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LambdaWeight {
    /// `λ^{-s}` on the principal branch.
    Power(f64),
    /// `−log λ`, the `s → 0` continuation of `Γ(s) λ^{-s}` used at `n = 2`.
    NegLog,
}

impl LambdaWeight {
    pub fn eval(&self, lam: C64) -> C64 {
        match *self {
            LambdaWeight::Power(s) if s == 0.0 => C64::new(1.0, 0.0),
            LambdaWeight::Power(s) => lam.powf(-s),
            LambdaWeight::NegLog => -lam.ln(),
        }
    }
}

/// How the contour around the spectrum of `M₂(ξ)` is chosen at each sphere node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourPolicy {
    pub nodes: usize,
    /// Factor applied to the imaginary semi-axis.
    pub b_scale: f64,
    /// Move of the real semi-axis as a signed fraction of its admissible slack.
    pub a_shift: f64,
}

pub const DEFAULT_CONTOUR_NODES: usize = 512;

impl Default for ContourPolicy {
    fn default() -> Self {
        ContourPolicy { nodes: DEFAULT_CONTOUR_NODES, b_scale: 1.0, a_shift: 0.0 }
    }
}

impl ContourPolicy {
    pub fn with_nodes(nodes: usize) -> Self {
        ContourPolicy { nodes, ..Default::default() }
    }

    pub fn doubled(&self) -> Self {
        ContourPolicy { nodes: 2 * self.nodes, ..*self }
    }

    pub fn perturbed(&self, b_scale: f64, a_shift: f64) -> Self {
        ContourPolicy { b_scale, a_shift, ..*self }
    }

    pub fn contour(&self, d1: f64, d2: f64) -> Result<ContourSpec> {
        let mut c = ContourSpec::around(d1, d2, self.nodes);
        let half = 0.5 * (d2 - d1);
        let slack = if self.a_shift >= 0.0 { c.center - 0.1 * d1 - c.a } else { c.a - half };
        c.a += self.a_shift * slack.max(0.0);
        c.b *= self.b_scale;
        c.validate(d1, d2)?;
        Ok(c)
    }
}

fn add_scaled(acc: &mut Element, x: &Element, s: f64) {
    if s != 0.0 && !x.is_empty() {
        *acc = &*acc + &x.scale_re(s);
    }
}

/// Symbol pieces of a second-order operator at one `ξ`.
struct SymbolAt {
    p2: Element,
    p1: Element,
    /// `∂_{ξ_i} p₂ = Σ_j (A_ij + A_ji) ξ_j`.
    dp2: Vec<Element>,
}

fn symbol_at(op: &SecondOrderOperator, xi: &[f64]) -> SymbolAt {
    let n = op.n();
    let theta = op.theta().clone();
    let mut p2 = Element::zero(&theta);
    let mut p1 = Element::zero(&theta);
    let mut dp2 = vec![Element::zero(&theta); n];
    for i in 0..n {
        add_scaled(&mut p1, &op.b[i], xi[i]);
        for j in 0..n {
            let a = op.a.get(i, j);
            add_scaled(&mut p2, a, xi[i] * xi[j]);
            add_scaled(&mut dp2[i], a, xi[j]);
            add_scaled(&mut dp2[j], a, xi[i]);
        }
    }
    SymbolAt { p2, p1, dp2 }
}

/// `(i, j, ∂^α p₂ / α!)` for `|α| = 2`, `α = e_i + e_j`, `i ≤ j`.
fn second_derivatives(op: &SecondOrderOperator) -> Vec<(usize, usize, Element)> {
    let n = op.n();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let e = if i == j { op.a.get(i, i).clone() } else { op.a.get(i, j) + op.a.get(j, i) };
            if !e.is_empty() {
                out.push((i, j, e));
            }
        }
    }
    out
}

/// Truncated `σ₋₂, σ₋₃, σ₋₄` at one `(ξ, λ)`.
#[derive(Clone, Debug)]
pub struct ResolventNode {
    pub sigma2: TruncatedOperator,
    pub sigma3: TruncatedOperator,
    pub sigma4: TruncatedOperator,
    /// `‖(M₂ − λ) σ₋₂ − I‖_max`.
    pub identity_residual: f64,
}

fn opt_rep(e: &Element, bx: &Arc<TruncationBox>) -> Option<TruncatedOperator> {
    (!e.is_empty()).then(|| represent(e, bx))
}

/// Full-matrix recursion with `δ_j` realised as `[D_j, ·]`.
pub fn resolvent_sigma(op: &SecondOrderOperator, xi: &[f64], lam: C64, bx: &Arc<TruncationBox>) -> Result<ResolventNode> {
    let n = op.n();
    let d = bx.dim();
    let s = symbol_at(op, xi);
    let m2 = represent(&s.p2, bx);
    let shifted = Mat::from_fn(d, d, |i, j| m2.mat[(i, j)] - if i == j { lam } else { C64::default() });
    let lu = shifted.partial_piv_lu();
    let inv = faer::linalg::solvers::DenseSolveCore::inverse(&lu);
    let prod = &shifted * &inv;
    let mut resid: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 1.0 } else { 0.0 };
            resid = resid.max((prod[(i, j)] - want).norm());
        }
    }
    if !resid.is_finite() || resid > 1e-6 {
        return Err(Error::SingularResolvent(format!("λ = {lam} too close to the spectrum (residual {resid:e})")));
    }
    let s2 = TruncatedOperator::from_mat(bx, inv);
    let p1 = opt_rep(&s.p1, bx);
    let p0 = opt_rep(&op.c, bx);
    let dp2: Vec<Option<TruncatedOperator>> = s.dp2.iter().map(|e| opt_rep(e, bx)).collect();
    let dp1: Vec<Option<TruncatedOperator>> = op.b.iter().map(|e| opt_rep(e, bx)).collect();
    let zero = TruncatedOperator::from_mat(bx, Mat::zeros(d, d));
    let first = |x: &TruncatedOperator| -> TruncatedOperator {
        let mut acc = zero.clone();
        if let Some(p) = &p1 {
            acc = acc.add(&p.matmul(x));
        }
        for i in 0..n {
            if let Some(p) = &dp2[i] {
                acc = acc.add(&p.matmul(&x.mode_commutator(i)));
            }
        }
        acc
    };
    let neg = C64::new(-1.0, 0.0);
    let s3 = s2.matmul(&first(&s2)).scale(neg);
    let mut inner = first(&s3);
    if let Some(p) = &p0 {
        inner = inner.add(&p.matmul(&s2));
    }
    for i in 0..n {
        if let Some(p) = &dp1[i] {
            inner = inner.add(&p.matmul(&s2.mode_commutator(i)));
        }
    }
    for (i, j, e) in second_derivatives(op) {
        inner = inner.add(&represent(&e, bx).matmul(&s2.mode_commutator(j).mode_commutator(i)));
    }
    let s4 = s2.matmul(&inner).scale(neg);
    Ok(ResolventNode { sigma2: s2, sigma3: s3, sigma4: s4, identity_residual: resid })
}

/// `[D_j, σ₋₂] + σ₋₂ represent(δ_j p₂) σ₋₂`, largest entry over `j`.
pub fn commutator_identity_residual(op: &SecondOrderOperator, xi: &[f64], node: &ResolventNode) -> f64 {
    let bx = &node.sigma2.bx;
    let p2 = symbol_at(op, xi).p2;
    let mut worst: f64 = 0.0;
    for j in 0..op.n() {
        let lhs = node.sigma2.mode_commutator(j);
        let rhs = node.sigma2.matmul(&represent(&p2.delta_j(j), bx)).matmul(&node.sigma2);
        let sum = lhs.add(&rhs);
        for c in 0..sum.dim() {
            for r in 0..sum.dim() {
                worst = worst.max(sum.mat[(r, c)].norm());
            }
        }
    }
    worst
}

type Vector = Vec<C64>;

fn matvec(m: &Mat<C64>, v: &[C64]) -> Vector {
    let d = m.nrows();
    let mut out = vec![C64::default(); d];
    for (c, &x) in v.iter().enumerate() {
        if x == C64::default() {
            continue;
        }
        for (r, o) in out.iter_mut().enumerate() {
            *o += m[(r, c)] * x;
        }
    }
    out
}

fn axpy(acc: &mut [C64], x: &[C64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

/// Precomputed pieces of the column recursion on one box.
struct ColumnOperators {
    bx: Arc<TruncationBox>,
    coords: Vec<Vec<f64>>,
    p0: Option<Mat<C64>>,
    dp1: Vec<Option<Mat<C64>>>,
    ddp2: Vec<(usize, usize, Mat<C64>)>,
}

impl ColumnOperators {
    fn new(op: &SecondOrderOperator, bx: &Arc<TruncationBox>) -> Self {
        let n = op.n();
        ColumnOperators {
            bx: bx.clone(),
            coords: (0..n).map(|j| bx.coordinate(j)).collect(),
            p0: opt_rep(&op.c, bx).map(|o| o.mat),
            dp1: op.b.iter().map(|e| opt_rep(e, bx).map(|o| o.mat)).collect(),
            ddp2: second_derivatives(op).into_iter().map(|(i, j, e)| (i, j, represent(&e, bx).mat)).collect(),
        }
    }

    fn d(&self, j: usize, v: &[C64]) -> Vector {
        v.iter().zip(&self.coords[j]).map(|(x, c)| x * *c).collect()
    }
}

/// Column of the origin of `Σ_λ w_λ f(λ) σ₋₂₋ⱼ(ξ; λ)` for `j = 0, 1, 2`.
fn column_at_node(
    op: &SecondOrderOperator,
    ops: &ColumnOperators,
    xi: &[f64],
    policy: &ContourPolicy,
    weight: LambdaWeight,
) -> Result<[Vector; 3]> {
    let n = op.n();
    let bx = &ops.bx;
    let d = bx.dim();
    let s = symbol_at(op, xi);
    let m2 = represent(&s.p2, bx).mat;
    let herm = Mat::from_fn(d, d, |i, j| 0.5 * (m2[(i, j)] + m2[(j, i)].conj()));
    let (vals, vecs) = dense_eigh(&herm)?;
    let (d1, d2) = (vals[0], vals[d - 1]);
    if !(d1 > 0.0) {
        return Err(Error::Positivity(format!("principal symbol not positive at ξ = {xi:?} (min {d1:e})")));
    }
    let contour = policy.contour(d1, d2)?;
    let vh = vecs.adjoint().to_owned();
    let p1 = opt_rep(&s.p1, bx).map(|o| o.mat);
    let dp2: Vec<Option<Mat<C64>>> = s.dp2.iter().map(|e| opt_rep(e, bx).map(|o| o.mat)).collect();
    let origin = bx.origin();
    let mut e0 = vec![C64::default(); d];
    e0[origin] = C64::new(1.0, 0.0);
    let e0h = matvec(&vh, &e0);
    let mut acc = [vec![C64::default(); d], vec![C64::default(); d], vec![C64::default(); d]];
    for (lam, w) in contour.rule() {
        let dens: Vec<C64> = vals
            .iter()
            .map(|&v| {
                let z = C64::new(v, 0.0) - lam;
                if z.norm() < 1e-12 * d2 {
                    Err(Error::SingularResolvent(format!("λ = {lam} on the spectrum")))
                } else {
                    Ok(z.inv())
                }
            })
            .collect::<Result<_>>()?;
        let resolve = |v: &[C64]| -> Vector {
            let mut y = matvec(&vh, v);
            for (a, b) in y.iter_mut().zip(&dens) {
                *a *= b;
            }
            matvec(&vecs, &y)
        };
        let first = |x: &[C64]| -> Vector {
            let mut t = vec![C64::default(); d];
            if let Some(p) = &p1 {
                axpy(&mut t, &matvec(p, x));
            }
            for i in 0..n {
                if let Some(p) = &dp2[i] {
                    axpy(&mut t, &matvec(p, &ops.d(i, x)));
                }
            }
            t
        };
        let mut y = e0h.clone();
        for (a, b) in y.iter_mut().zip(&dens) {
            *a *= b;
        }
        let s2 = matvec(&vecs, &y);
        let s3: Vector = resolve(&first(&s2)).into_iter().map(|z| -z).collect();
        let mut t = first(&s3);
        if let Some(p) = &ops.p0 {
            axpy(&mut t, &matvec(p, &s2));
        }
        for i in 0..n {
            if let Some(p) = &ops.dp1[i] {
                axpy(&mut t, &matvec(p, &ops.d(i, &s2)));
            }
        }
        for (i, j, m) in &ops.ddp2 {
            axpy(&mut t, &matvec(m, &ops.d(*i, &ops.d(*j, &s2))));
        }
        let s4: Vector = resolve(&t).into_iter().map(|z| -z).collect();
        let f = w * weight.eval(lam);
        for (slot, v) in acc.iter_mut().zip([&s2, &s3, &s4]) {
            for (a, b) in slot.iter_mut().zip(v.iter()) {
                *a += f * b;
            }
        }
    }
    Ok(acc)
}

/// `∫_{S^{n−1}} (2πi)^{-1} ∮_{clockwise} f(λ) σ₋₂₋ⱼ(ξ; λ) dλ dξ` read back as an
/// element through the column of the origin and restricted to `|k|_∞ ≤ K`.
pub fn resolvent_power_residue(
    op: &SecondOrderOperator,
    quad: &SphereQuadrature,
    policy: &ContourPolicy,
    weight: LambdaWeight,
    j: usize,
) -> Result<Element> {
    Ok(resolvent_columns(op, quad, policy, weight)?.swap_remove(j))
}

/// All three of `j = 0, 1, 2` from one pass over the nodes.
pub fn resolvent_columns(
    op: &SecondOrderOperator,
    quad: &SphereQuadrature,
    policy: &ContourPolicy,
    weight: LambdaWeight,
) -> Result<Vec<Element>> {
    if quad.n != op.n() {
        return Err(Error::Dimension { expected: op.n(), got: quad.n });
    }
    let tr = op.tr;
    let bx = op.fiber_box(tr, vec![0; op.n()]);
    let ops = ColumnOperators::new(op, &bx);
    let per_node: Vec<[Vector; 3]> =
        quad.nodes.par_iter().map(|xi| column_at_node(op, &ops, xi, policy, weight)).collect::<Result<_>>()?;
    let d = bx.dim();
    let mut total = [vec![C64::default(); d], vec![C64::default(); d], vec![C64::default(); d]];
    for (cols, w) in per_node.iter().zip(&quad.weights) {
        for (slot, c) in total.iter_mut().zip(cols.iter()) {
            for (a, b) in slot.iter_mut().zip(c) {
                *a += b * *w;
            }
        }
    }
    let theta = op.theta();
    Ok(total.iter().map(|col| extract_column(&bx, theta, |i| col[i]).truncate_inf(tr.k as i64)).collect())
}

/// Prefactor `−3(4π)^{n/2} Γ(n/2 − 1)` for `n ≥ 3`.
pub fn kappa_prefactor(n: usize) -> f64 {
    -3.0 * (4.0 * PI).powf(n as f64 / 2.0) * gamma(n as f64 / 2.0 - 1.0)
}

/// `κ(g)` for `n ≥ 3` from the conjugated Laplacian.
pub fn kappa(op: &SecondOrderOperator, quad: &SphereQuadrature, policy: &ContourPolicy) -> Result<Element> {
    let n = op.n();
    if n < 3 {
        return Err(Error::SmallDimension(n));
    }
    let r = resolvent_power_residue(op, quad, policy, LambdaWeight::Power(n as f64 / 2.0 - 1.0), 2)?;
    Ok(r.scale_re(kappa_prefactor(n)))
}

/// `κ(g)` at `n = 2` with `Γ(s)λ^{-s}` continued to `−log λ`: prefactor `−12π`.
pub fn kappa_2d(op: &SecondOrderOperator, quad: &SphereQuadrature, policy: &ContourPolicy) -> Result<Element> {
    if op.n() != 2 {
        return Err(Error::Dimension { expected: 2, got: op.n() });
    }
    let r = resolvent_power_residue(op, quad, policy, LambdaWeight::NegLog, 2)?;
    Ok(r.scale_re(-12.0 * PI))
}

/// `κ(g)` for any `n ≥ 2`.
pub fn scalar_curvature(g: &RiemannianMetric, quad: &SphereQuadrature, policy: &ContourPolicy) -> Result<Element> {
    let op = conjugate(g)?;
    if g.n() == 2 {
        kappa_2d(&op, quad, policy)
    } else {
        kappa(&op, quad, policy)
    }
}

/// `ℛ_g(a) = τ[a κ(g)]`.
pub fn curvature_functional(kappa: &Element, a: &Element) -> C64 {
    (a * kappa).trace()
}

/// Sample window and number of polynomial terms for the heat fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub terms: usize,
}

impl HeatWindow {
    pub fn default_for(n: usize) -> Self {
        if n == 2 {
            HeatWindow { t_min: 0.05, t_max: 0.3, points: 16, terms: 5 }
        } else {
            HeatWindow { t_min: 0.08, t_max: 0.3, points: 12, terms: 4 }
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.t_min + (self.t_max - self.t_min) * i as f64 / (self.points - 1) as f64).collect()
    }
}

/// Half-widths of the box used for the heat trace: `active` along the
/// coefficient axes and `transverse` elsewhere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatBox {
    pub active: usize,
    pub transverse: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatFit {
    pub mode: MultiIndex,
    /// Coefficients `c_j` of `t^{n/2} Tr[b e^{-tH}] ≈ Σ c_j t^j`.
    pub coefficients: Vec<(f64, f64)>,
    pub a0: (f64, f64),
    pub a2: (f64, f64),
    /// `−6(4π)^{n/2} a₂`.
    pub kappa: (f64, f64),
    /// Relative root-mean-square residual of the fit.
    pub residual: f64,
}

fn pair(z: C64) -> (f64, f64) {
    (z.re, z.im)
}

/// Least-squares fit of `t^{n/2} h(t)` by a polynomial with `terms` terms.
pub fn fit_heat_trace(times: &[f64], values: &[C64], n: usize, terms: usize, mode: MultiIndex) -> Result<HeatFit> {
    let rows = times.len();
    if rows < terms + 1 || terms < 2 {
        return Err(Error::Invalid(format!("heat fit needs more samples than terms ({rows} ≤ {terms})")));
    }
    let half = n as f64 / 2.0;
    let x = Mat::<f64>::from_fn(rows, terms, |r, c| times[r].powi(c as i32));
    let y = Mat::<f64>::from_fn(rows, 2, |r, c| {
        let v = values[r] * times[r].powf(half);
        if c == 0 {
            v.re
        } else {
            v.im
        }
    });
    let sol = x.qr().solve_lstsq(&y);
    let coef: Vec<C64> = (0..terms).map(|c| C64::new(sol[(c, 0)], sol[(c, 1)])).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for r in 0..rows {
        let fit: C64 = coef.iter().enumerate().map(|(c, z)| z * times[r].powi(c as i32)).sum();
        let v = C64::new(y[(r, 0)], y[(r, 1)]);
        num += (fit - v).norm_sqr();
        den += v.norm_sqr();
    }
    let residual = (num / den.max(f64::MIN_POSITIVE)).sqrt();
    let a2 = coef[1];
    let kappa = a2 * (-6.0 * (4.0 * PI).powf(half));
    Ok(HeatFit {
        mode,
        coefficients: coef.iter().map(|&z| pair(z)).collect(),
        a0: pair(coef[0]),
        a2: pair(a2),
        kappa: pair(kappa),
        residual,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatOracle {
    pub fits: Vec<HeatFit>,
    pub window: HeatWindow,
    pub heat_box: HeatBox,
    /// Share of the trace at `t_min` carried by the upper three quarters of
    /// the truncated spectrum.
    pub tail: f64,
    pub dim: usize,
}

impl HeatOracle {
    /// `κ` assembled from the fitted modes.
    pub fn kappa_element(&self, theta: &Arc<crate::algebra::Theta>) -> Element {
        Element::from_coeffs(theta, self.fits.iter().map(|f| (f.mode.clone(), C64::new(f.kappa.0, f.kappa.1))))
            .expect("mode length matches theta")
    }

    pub fn fit(&self, mode: &[i64]) -> Option<&HeatFit> {
        self.fits.iter().find(|f| f.mode == mode)
    }
}

/// Largest admissible tail share.
pub const HEAT_TAIL_TOL: f64 = 1e-3;

/// `Tr[(U^m)* e^{-tH}]` for each mode `m`, fitted over the window, with `H`
/// the truncated operator on the heat box.
pub fn heat_oracle(op: &SecondOrderOperator, heat_box: HeatBox, window: HeatWindow, modes: &[MultiIndex]) -> Result<HeatOracle> {
    let n = op.n();
    let tr = Truncation::new(heat_box.active, 0);
    let spectra = fiber_spectra(op, tr, heat_box.transverse)?;
    let vals = collect_eigenvalues(&spectra);
    let dim = vals.len();
    let cut = vals[(dim / 4).min(dim - 1)];
    let t0 = window.t_min;
    let total: f64 = vals.iter().map(|v| (-t0 * v).exp()).sum();
    let upper: f64 = vals.iter().filter(|&&v| v > cut).map(|v| (-t0 * v).exp()).sum();
    let tail = upper / total;
    if tail > HEAT_TAIL_TOL {
        return Err(Error::Truncation(format!(
            "no valid heat window at this box: tail share {tail:e} at t = {t0} exceeds {HEAT_TAIL_TOL:e}"
        )));
    }
    let times = window.times();
    let fits = modes
        .iter()
        .map(|m| {
            let b = Element::monomial(op.theta(), m.clone(), C64::new(1.0, 0.0)).adjoint();
            let pairs = modulated_pairs(&spectra, &b);
            let values: Vec<C64> = times
                .iter()
                .map(|&t| pairs.iter().map(|(lam, z, mult)| z * ((-t * lam).exp() * *mult as f64)).sum())
                .collect();
            fit_heat_trace(&times, &values, n, window.terms, m.clone())
        })
        .collect::<Result<_>>()?;
    Ok(HeatOracle { fits, window, heat_box, tail, dim })
}

/// Heat fit of a bare spectrum `Σ_ℓ w_ℓ e^{-tλ_ℓ}`.
pub fn heat_fit_values(values: &[f64], weights: &[f64], n: usize, window: HeatWindow) -> Result<HeatFit> {
    let times = window.times();
    let h: Vec<C64> = times
        .iter()
        .map(|&t| C64::new(values.iter().zip(weights).map(|(l, w)| w * (-t * l).exp()).sum(), 0.0))
        .collect();
    fit_heat_trace(&times, &h, n, window.terms, vec![0; n])
}
