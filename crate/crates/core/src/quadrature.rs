//! Gauss rules, sphere rules and elliptic contours.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::algebra::C64;
use crate::error::{Error, Result};

/// Golub–Welsch for a symmetric Jacobi matrix with zero diagonal.
/// `beta[k-1]` is the squared off-diagonal entry `b_k`, `mu0` the total mass.
fn golub_welsch(m: usize, beta: impl Fn(usize) -> f64, mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let j = Mat::<f64>::from_fn(m, m, |r, c| {
        if r + 1 == c || c + 1 == r {
            beta(r.max(c)).sqrt()
        } else {
            0.0
        }
    });
    let evd = j.self_adjoint_eigen(faer::Side::Lower).expect("tridiagonal eigenproblem");
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut pts: Vec<(f64, f64)> = (0..m).map(|c| (s[c], mu0 * u[(0, c)] * u[(0, c)])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize exactly about the origin
    let mut x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut w: Vec<f64> = pts.iter().map(|p| p.1).collect();
    for i in 0..m / 2 {
        let k = m - 1 - i;
        let xs = 0.5 * (x[k] - x[i]);
        let ws = 0.5 * (w[k] + w[i]);
        x[i] = -xs;
        x[k] = xs;
        w[i] = ws;
        w[k] = ws;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_gegenbauer(m, 0.0)
}

/// Gauss rule for the weight `(1 − t²)^a` on `[-1, 1]`, `a > -1`.
pub fn gauss_gegenbauer(m: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    let mu0 = PI.sqrt() * gamma(a + 1.0) / gamma(a + 1.5);
    golub_welsch(
        m,
        |k| {
            let k = k as f64;
            k * (k + 2.0 * a) / ((2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0))
        },
        mu0,
    )
}

/// Gauss–Legendre mapped to `[lo, hi]`.
pub fn gauss_legendre_interval(m: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let h = 0.5 * (hi - lo);
    (x.iter().map(|t| lo + h * (t + 1.0)).collect(), w.iter().map(|v| v * h).collect())
}

/// `|S^{n-1}| = 2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// Nodes on the unit sphere `S^{n-1}` with positive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    pub n: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Polynomials up to this total degree are integrated exactly.
    pub degree: usize,
    pub order: usize,
}

impl SphereQuadrature {
    /// Trapezoid rule with `m` equispaced nodes on the circle.
    pub fn circle(m: usize) -> Self {
        let h = 2.0 * PI / m as f64;
        let nodes = (0..m).map(|j| vec![(j as f64 * h).cos(), (j as f64 * h).sin()]).collect();
        SphereQuadrature { n: 2, nodes, weights: vec![h; m], degree: m - 1, order: m }
    }

    /// Recursive product rule: `m` Gauss nodes in each polar variable
    /// (weight `(1−t²)^{(k−3)/2}` on `S^{k−1}`) and `2m` trapezoid nodes on the
    /// final circle. Exact to degree `2m − 1`.
    pub fn product(n: usize, m: usize) -> Self {
        assert!(n >= 2);
        if n == 2 {
            let mut q = SphereQuadrature::circle(2 * m);
            q.degree = 2 * m - 1;
            q.order = m;
            return q;
        }
        let lower = SphereQuadrature::product(n - 1, m);
        let (t, wt) = gauss_gegenbauer(m, (n as f64 - 3.0) / 2.0);
        let mut nodes = Vec::with_capacity(m * lower.nodes.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (ti, wi) in t.iter().zip(&wt) {
            let s = (1.0 - ti * ti).max(0.0).sqrt();
            for (eta, we) in lower.nodes.iter().zip(&lower.weights) {
                let mut x = Vec::with_capacity(n);
                x.push(*ti);
                x.extend(eta.iter().map(|e| s * e));
                nodes.push(x);
                weights.push(wi * we);
            }
        }
        SphereQuadrature { n, nodes, weights, degree: 2 * m - 1, order: m }
    }

    /// Circle with `order` nodes when `n = 2`, product rule otherwise.
    pub fn standard(n: usize, order: usize) -> Self {
        if n == 2 {
            SphereQuadrature::circle(order)
        } else {
            SphereQuadrature::product(n, order)
        }
    }

    /// Rule with twice the order.
    pub fn doubled(&self) -> Self {
        SphereQuadrature::standard(self.n, 2 * self.order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// `∫_{S^{n-1}} ξ^β dξ` for even `β`, zero otherwise.
pub fn sphere_monomial_moment(beta: &[usize]) -> f64 {
    if beta.iter().any(|b| b % 2 == 1) {
        return 0.0;
    }
    let n = beta.len() as f64;
    let s: f64 = beta.iter().map(|&b| b as f64).sum();
    let num: f64 = beta.iter().map(|&b| gamma((b as f64 + 1.0) / 2.0)).product();
    2.0 * num / gamma((s + n) / 2.0)
}

/// Ellipse `c + a cos φ + i b sin φ` sampled at `M` equispaced angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: f64,
    pub a: f64,
    pub b: f64,
    pub nodes: usize,
    pub clockwise: bool,
}

impl ContourSpec {
    /// Circle around `[d1, d2]` with radius the geometric mean of the
    /// half-width and the distance from the centre to the origin.
    pub fn around(d1: f64, d2: f64, nodes: usize) -> Self {
        let c = 0.5 * (d1 + d2);
        let h = (0.5 * (d2 - d1)).max(0.25 * c);
        let r = (h * c).sqrt();
        ContourSpec { center: c, a: r, b: r, nodes, clockwise: true }
    }

    /// Check enclosure of `[d1, d2]` and the branch-cut margin `0.1·d1`.
    pub fn validate(&self, d1: f64, d2: f64) -> Result<()> {
        let left = self.center - self.a;
        let right = self.center + self.a;
        if !(left < d1 && right > d2) {
            return Err(Error::Invalid(format!("contour [{left}, {right}] does not enclose [{d1}, {d2}]")));
        }
        if left < 0.1 * d1 {
            return Err(Error::Invalid(format!("contour left edge {left} within 0.1·d1 of the branch cut")));
        }
        if self.b <= 0.0 {
            return Err(Error::Invalid("contour has no imaginary extent".into()));
        }
        Ok(())
    }

    pub fn with_nodes(&self, nodes: usize) -> Self {
        ContourSpec { nodes, ..self.clone() }
    }

    /// Pairs `(λ_m, w_m)` with `Σ w_m F(λ_m) ≈ (2πi)^{-1} ∮ F dλ` in the
    /// contour's orientation.
    pub fn rule(&self) -> Vec<(C64, C64)> {
        let m = self.nodes;
        let sign = if self.clockwise { -1.0 } else { 1.0 };
        (0..m)
            .map(|j| {
                let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                let lam = C64::new(self.center + self.a * phi.cos(), self.b * phi.sin());
                let dlam = C64::new(-self.a * phi.sin(), self.b * phi.cos());
                (lam, sign * dlam / (C64::i() * m as f64))
            })
            .collect()
    }
}
