//! Riemannian metrics, their densities and weights.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::{Element, Theta, C64};
use crate::error::{Error, Result};
use crate::gns::{
    block_matrix_eig, check_positive, det_algebra, element_function, element_power, extract_column, self_compat_check,
    spectral_bounds, MatrixOverAlgebra, Truncation,
};
use crate::quadrature::{gauss_legendre_interval, sphere_area, SphereQuadrature};

/// Entries below this commutator norm count as commuting.
pub const COMPAT_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct RiemannianMetric {
    pub g: MatrixOverAlgebra,
    pub g_inv: MatrixOverAlgebra,
    /// Largest commutator norm between entries of `g`.
    pub compat_norm: f64,
    pub self_compatible: bool,
    /// `max_ij ‖(g g⁻¹)_ij − δ_ij‖` on modes away from the truncation edge.
    pub inverse_residual: f64,
    pub tr: Truncation,
    /// Set for metrics built by [`RiemannianMetric::conformal`].
    pub conformal_factor: Option<Element>,
}

impl RiemannianMetric {
    /// Validate `g` and compute its inverse through the block operator.
    pub fn new(g: MatrixOverAlgebra, tr: Truncation) -> Result<Self> {
        let n = g.m;
        if g.theta().n() != n {
            return Err(Error::Dimension { expected: g.theta().n(), got: n });
        }
        let defect = g.symmetry_defect();
        if defect > 1e-12 {
            return Err(Error::Invalid(format!("metric entries not selfadjoint and symmetric (defect {defect:e})")));
        }
        let theta = g.theta().clone();
        let bx = Arc::new(tr.box_for(&g.refs()));
        let e = block_matrix_eig(&g, &bx)?;
        check_positive(&e, "metric")?;
        let inv = e.apply(&|t| 1.0 / t)?;
        let d = bx.dim();
        let origin = bx.origin();
        let raw = MatrixOverAlgebra::from_fn(n, |i, j| {
            extract_column(&bx, &theta, |a| inv[(i * d + a, j * d + origin)]).truncate_inf(tr.k as i64)
        });
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = raw.get(i, j);
                let scale = a.norm_l2().max(1.0);
                worst = worst.max(a.selfadjoint_defect() / scale).max(a.distance(raw.get(j, i)) / scale);
            }
        }
        if worst > 1e-8 {
            return Err(Error::Invalid(format!("inverse metric entries are not selfadjoint (defect {worst:e})")));
        }
        let g_inv = MatrixOverAlgebra::from_fn(n, |i, j| (raw.get(i, j) + raw.get(j, i)).scale_re(0.5).hermitian_part());
        RiemannianMetric::assemble(g, g_inv, tr)
    }

    fn assemble(g: MatrixOverAlgebra, g_inv: MatrixOverAlgebra, tr: Truncation) -> Result<Self> {
        let compat_norm = self_compat_check(&g, tr);
        let inverse_residual = inverse_residual(&g, &g_inv, tr);
        Ok(RiemannianMetric {
            self_compatible: compat_norm <= COMPAT_TOL,
            g,
            g_inv,
            compat_norm,
            inverse_residual,
            tr,
            conformal_factor: None,
        })
    }

    pub fn flat(theta: &Arc<Theta>, tr: Truncation) -> Self {
        let n = theta.n();
        let id = MatrixOverAlgebra::identity(theta, n);
        RiemannianMetric::assemble(id.clone(), id, tr).expect("flat metric")
    }

    /// `g = k² δ_ij` with `g⁻¹ = k^{-2} δ_ij`.
    pub fn conformal(k: &Element, tr: Truncation) -> Result<Self> {
        let n = k.n();
        if k.selfadjoint_defect() > 1e-12 {
            return Err(Error::Invalid("conformal factor must be selfadjoint".into()));
        }
        let (lo, hi) = spectral_bounds(k, tr)?;
        if !(lo > crate::gns::POSITIVITY_TOL * hi) {
            return Err(Error::Positivity(format!("conformal factor has min eigenvalue {lo:e}")));
        }
        let k2 = k * k;
        let kinv2 = element_power(k, -2.0, tr)?;
        let theta = k.theta().clone();
        let g = MatrixOverAlgebra::from_fn(n, |i, j| if i == j { k2.clone() } else { Element::zero(&theta) });
        let g_inv = MatrixOverAlgebra::from_fn(n, |i, j| if i == j { kinv2.clone() } else { Element::zero(&theta) });
        let mut out = RiemannianMetric::assemble(g, g_inv, tr)?;
        out.conformal_factor = Some(k.clone());
        Ok(out)
    }

    /// Same metric rebuilt at another truncation.
    pub fn retruncate(&self, tr: Truncation) -> Result<Self> {
        if self.is_flat() {
            return Ok(RiemannianMetric::flat(self.theta(), tr));
        }
        match &self.conformal_factor {
            Some(k) => RiemannianMetric::conformal(k, tr),
            None => RiemannianMetric::new(self.g.clone(), tr),
        }
    }

    /// Block-diagonal metric from two square blocks with entries in the same algebra.
    pub fn product(g1: &MatrixOverAlgebra, g2: &MatrixOverAlgebra, tr: Truncation) -> Result<Self> {
        let n = g1.m + g2.m;
        let theta = g1.theta().clone();
        if theta.n() != n || *g2.theta().as_ref() != *theta {
            return Err(Error::Dimension { expected: theta.n(), got: n });
        }
        let g = MatrixOverAlgebra::from_fn(n, |i, j| {
            if i < g1.m && j < g1.m {
                g1.get(i, j).clone()
            } else if i >= g1.m && j >= g1.m {
                g2.get(i - g1.m, j - g1.m).clone()
            } else {
                Element::zero(&theta)
            }
        });
        RiemannianMetric::new(g, tr)
    }

    pub fn n(&self) -> usize {
        self.g.m
    }

    pub fn theta(&self) -> &Arc<Theta> {
        self.g.theta()
    }

    /// All entries of `g` and `g⁻¹`.
    pub fn elements(&self) -> Vec<&Element> {
        self.g.entries.iter().chain(self.g_inv.entries.iter()).collect()
    }

    pub fn is_flat(&self) -> bool {
        let n = self.n();
        let one = Element::one(self.theta());
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j { one.clone() } else { Element::zero(self.theta()) };
                *self.g.get(i, j) == want && *self.g_inv.get(i, j) == want
            })
        })
    }

    /// `|ξ|_g² = Σ g^{ij} ξ_i ξ_j`.
    pub fn norm_sq_g(&self, xi: &[f64]) -> Element {
        let n = self.n();
        let mut acc = Element::zero(self.theta());
        for i in 0..n {
            for j in 0..n {
                let w = xi[i] * xi[j];
                if w != 0.0 {
                    acc = acc + self.g_inv.get(i, j).scale_re(w);
                }
            }
        }
        acc
    }

    /// Spectral bounds `d1, d2` of `|ξ|_g²` over the sphere nodes.
    pub fn symbol_bounds(&self, quad: &SphereQuadrature) -> Result<(f64, f64)> {
        let b: Vec<(f64, f64)> =
            quad.nodes.par_iter().map(|xi| spectral_bounds(&self.norm_sq_g(xi), self.tr)).collect::<Result<_>>()?;
        Ok(b.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(a, c)| (lo.min(a), hi.max(c))))
    }

    pub fn det(&self) -> Result<Element> {
        det_algebra(&self.g, self.tr)
    }

    /// `ν(g) = √det g`.
    pub fn riemannian_density(&self) -> Result<Element> {
        if self.is_flat() {
            return Ok(Element::one(self.theta()));
        }
        element_power(&self.det()?, 0.5, self.tr)
    }

    /// `φ_g(a) = (2π)^n τ[a ν(g)]`.
    pub fn riemannian_weight(&self, a: &Element) -> Result<C64> {
        let nu = self.riemannian_density()?;
        Ok((a * &nu).trace() * (2.0 * PI).powi(self.n() as i32))
    }

    pub fn volume(&self) -> Result<f64> {
        Ok(self.riemannian_weight(&Element::one(self.theta()))?.re)
    }

    /// `ν̃(g) = |S^{n−1}|^{-1} ∫ |ξ|_g^{-n}`.
    pub fn spectral_density(&self, quad: &SphereQuadrature) -> Result<Element> {
        let n = self.n() as f64;
        let parts: Vec<Element> = quad
            .nodes
            .par_iter()
            .map(|xi| element_power(&self.norm_sq_g(xi), -n / 2.0, self.tr))
            .collect::<Result<_>>()?;
        let mut acc = Element::zero(self.theta());
        for (p, w) in parts.iter().zip(&quad.weights) {
            acc = acc + p.scale_re(*w);
        }
        Ok(acc.scale_re(1.0 / sphere_area(self.n())))
    }

    /// `π^{-n/2} ∫_{R^n} e^{-|ξ|_g²} dξ` with a radial Gauss–Legendre rule of
    /// `radial` nodes on `[0, R]`, `R² = 45/d1`.
    pub fn gaussian_density(&self, quad: &SphereQuadrature, radial: usize) -> Result<Element> {
        let n = self.n() as i32;
        let parts: Vec<Element> = quad
            .nodes
            .par_iter()
            .map(|xi| {
                let q = self.norm_sq_g(xi);
                let (lo, _) = spectral_bounds(&q, self.tr)?;
                let (r, w) = gauss_legendre_interval(radial, 0.0, (45.0 / lo).sqrt());
                let f = move |t: f64| r.iter().zip(&w).map(|(ri, wi)| wi * ri.powi(n - 1) * (-ri * ri * t).exp()).sum();
                element_function(&q, &f, self.tr)
            })
            .collect::<Result<_>>()?;
        let mut acc = Element::zero(self.theta());
        for (p, w) in parts.iter().zip(&quad.weights) {
            acc = acc + p.scale_re(*w);
        }
        Ok(acc.scale_re(PI.powf(-(n as f64) / 2.0)))
    }
}

fn inverse_residual(g: &MatrixOverAlgebra, g_inv: &MatrixOverAlgebra, tr: Truncation) -> f64 {
    let n = g.m;
    let r_g = g.entries.iter().map(|e| e.support_radius()).max().unwrap_or(0);
    let keep = (tr.k as i64 - r_g).max(0);
    let prod = g.matmul(g_inv);
    let one = Element::one(g.theta());
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut e = prod.get(i, j).truncate_inf(keep);
            if i == j {
                e = e - one.clone();
            }
            worst = worst.max(e.norm_l2());
        }
    }
    worst
}
