//! Classical symbols built from terms `a·ξ^β·|ξ|^s`, their lattice
//! quantization, composition and residue.

use std::sync::Arc;

use faer::Mat;

use crate::algebra::{Element, MultiIndex, Theta, C64};
use crate::error::{Error, Result};
use crate::gns::{TruncatedOperator, TruncationBox};
use crate::quadrature::SphereQuadrature;

const DEG_EPS: f64 = 1e-9;

/// `ξ ↦ a·ξ^β·|ξ|^s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolTerm {
    pub coeff: Element,
    pub beta: Vec<u32>,
    pub s: f64,
}

impl SymbolTerm {
    pub fn new(coeff: Element, beta: Vec<u32>, s: f64) -> Self {
        assert_eq!(beta.len(), coeff.n());
        SymbolTerm { coeff, beta, s }
    }

    pub fn degree(&self) -> f64 {
        self.beta.iter().map(|&b| b as f64).sum::<f64>() + self.s
    }

    pub fn is_polynomial(&self) -> bool {
        self.s == 0.0
    }

    /// `ξ^β |ξ|^s`.
    pub fn scalar_at(&self, xi: &[f64]) -> f64 {
        let mut v = 1.0;
        for (x, &b) in xi.iter().zip(&self.beta) {
            v *= x.powi(b as i32);
        }
        if self.s != 0.0 {
            let r2: f64 = xi.iter().map(|x| x * x).sum();
            v *= r2.powf(self.s / 2.0);
        }
        v
    }

    /// `∂_{ξ_j}` of this term: `β_j ξ^{β−e_j}|ξ|^s + s ξ^{β+e_j}|ξ|^{s−2}`.
    pub fn d_xi(&self, j: usize) -> Vec<SymbolTerm> {
        let mut out = Vec::new();
        if self.beta[j] > 0 {
            let mut b = self.beta.clone();
            b[j] -= 1;
            out.push(SymbolTerm { coeff: self.coeff.scale_re(self.beta[j] as f64), beta: b, s: self.s });
        }
        if self.s != 0.0 {
            let mut b = self.beta.clone();
            b[j] += 1;
            out.push(SymbolTerm { coeff: self.coeff.scale_re(self.s), beta: b, s: self.s - 2.0 });
        }
        out
    }
}

/// Terms of a common homogeneity degree.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousSymbol {
    pub degree: f64,
    pub terms: Vec<SymbolTerm>,
}

impl HomogeneousSymbol {
    pub fn eval(&self, theta: &Arc<Theta>, xi: &[f64]) -> Element {
        self.terms.iter().fold(Element::zero(theta), |acc, t| acc + t.coeff.scale_re(t.scalar_at(xi)))
    }
}

/// Symbol `ρ ∼ Σ_j ρ_{q−j}` with a cutoff radius for quantization.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSymbol {
    pub theta: Arc<Theta>,
    pub order: f64,
    pub components: Vec<HomogeneousSymbol>,
    pub cutoff: f64,
}

/// Merge terms sharing `(β, s)` and drop vanishing ones.
fn simplify(terms: Vec<SymbolTerm>) -> Vec<SymbolTerm> {
    let mut out: Vec<SymbolTerm> = Vec::new();
    for t in terms {
        if let Some(o) = out.iter_mut().find(|o| o.beta == t.beta && o.s == t.s) {
            o.coeff = &o.coeff + &t.coeff;
        } else {
            out.push(t);
        }
    }
    out.retain(|t| !t.coeff.is_empty());
    out
}

pub const DEFAULT_CUTOFF: f64 = 0.5;

impl ClassicalSymbol {
    /// Group terms into components of degrees `q, q−1, …` with `q` the
    /// largest degree present.
    pub fn from_terms(theta: &Arc<Theta>, terms: Vec<SymbolTerm>, cutoff: f64) -> Result<Self> {
        let terms = simplify(terms);
        if terms.is_empty() {
            return Ok(ClassicalSymbol { theta: theta.clone(), order: 0.0, components: Vec::new(), cutoff });
        }
        let order = terms.iter().map(|t| t.degree()).fold(f64::NEG_INFINITY, f64::max);
        let mut components: Vec<HomogeneousSymbol> = Vec::new();
        for t in terms {
            let j = order - t.degree();
            let ji = j.round();
            if (j - ji).abs() > DEG_EPS {
                return Err(Error::Invalid(format!("term degree {} not in order − N", t.degree())));
            }
            let ji = ji as usize;
            while components.len() <= ji {
                let d = order - components.len() as f64;
                components.push(HomogeneousSymbol { degree: d, terms: Vec::new() });
            }
            components[ji].terms.push(t);
        }
        Ok(ClassicalSymbol { theta: theta.clone(), order, components, cutoff })
    }

    pub fn zero(theta: &Arc<Theta>) -> Self {
        ClassicalSymbol { theta: theta.clone(), order: 0.0, components: Vec::new(), cutoff: DEFAULT_CUTOFF }
    }

    pub fn n(&self) -> usize {
        self.theta.n()
    }

    pub fn terms(&self) -> impl Iterator<Item = &SymbolTerm> {
        self.components.iter().flat_map(|c| c.terms.iter())
    }

    pub fn all_terms(&self) -> Vec<SymbolTerm> {
        self.terms().cloned().collect()
    }

    pub fn is_differential(&self) -> bool {
        self.terms().all(|t| t.is_polynomial())
    }

    pub fn is_scalar(&self) -> bool {
        let n = self.n();
        self.terms().all(|t| t.coeff.iter().all(|(k, _)| k.iter().all(|&x| x == 0)) && t.coeff.n() == n)
    }

    pub fn component(&self, degree: f64) -> Option<&HomogeneousSymbol> {
        self.components.iter().find(|c| (c.degree - degree).abs() < DEG_EPS)
    }

    /// `ρ(ξ)` summed over all components (`ξ ≠ 0`).
    pub fn eval(&self, xi: &[f64]) -> Element {
        self.components.iter().fold(Element::zero(&self.theta), |acc, c| acc + c.eval(&self.theta, xi))
    }

    /// Value used by quantization: non-polynomial terms vanish for `|ξ| < r₀`.
    pub fn eval_quantized(&self, xi: &[f64]) -> Element {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.terms()
            .filter(|t| t.is_polynomial() || r >= self.cutoff)
            .fold(Element::zero(&self.theta), |acc, t| acc + t.coeff.scale_re(t.scalar_at(xi)))
    }

    /// `τ[ρ(ξ)]` under the quantization convention.
    pub fn trace_quantized(&self, xi: &[f64]) -> C64 {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let zero = vec![0; self.n()];
        self.terms()
            .filter(|t| t.is_polynomial() || r >= self.cutoff)
            .map(|t| t.coeff.coeff(&zero) * t.scalar_at(xi))
            .sum()
    }

    /// `∂_{ξ_j} ρ`.
    pub fn d_xi(&self, j: usize) -> ClassicalSymbol {
        let terms = self.terms().flat_map(|t| t.d_xi(j)).collect();
        ClassicalSymbol::from_terms(&self.theta, terms, self.cutoff).expect("derivative keeps degrees aligned")
    }

    /// `δ_j ρ`, acting on the coefficients.
    pub fn d_delta(&self, j: usize) -> ClassicalSymbol {
        let terms = self
            .terms()
            .map(|t| SymbolTerm { coeff: t.coeff.delta_j(j), beta: t.beta.clone(), s: t.s })
            .collect();
        ClassicalSymbol::from_terms(&self.theta, terms, self.cutoff).expect("same degrees")
    }

    fn d_xi_multi(&self, alpha: &[i64]) -> ClassicalSymbol {
        let mut s = self.clone();
        for (j, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                s = s.d_xi(j);
            }
        }
        s
    }

    fn delta_multi(&self, alpha: &[i64]) -> ClassicalSymbol {
        let terms = self
            .terms()
            .map(|t| SymbolTerm { coeff: t.coeff.delta(alpha).expect("nonnegative"), beta: t.beta.clone(), s: t.s })
            .collect();
        ClassicalSymbol::from_terms(&self.theta, terms, self.cutoff).expect("same degrees")
    }

    /// Pointwise product `ρ1(ξ)ρ2(ξ)` in the algebra.
    pub fn product(&self, other: &ClassicalSymbol) -> ClassicalSymbol {
        let mut terms = Vec::new();
        for a in self.terms() {
            for b in other.terms() {
                let beta = a.beta.iter().zip(&b.beta).map(|(x, y)| x + y).collect();
                terms.push(SymbolTerm { coeff: &a.coeff * &b.coeff, beta, s: a.s + b.s });
            }
        }
        ClassicalSymbol::from_terms(&self.theta, terms, self.cutoff.max(other.cutoff)).expect("degrees add")
    }

    pub fn add(&self, other: &ClassicalSymbol) -> Result<ClassicalSymbol> {
        let mut terms = self.all_terms();
        terms.extend(other.all_terms());
        ClassicalSymbol::from_terms(&self.theta, terms, self.cutoff.max(other.cutoff))
    }

    pub fn scale(&self, c: C64) -> ClassicalSymbol {
        let terms = self
            .terms()
            .map(|t| SymbolTerm { coeff: t.coeff.scale(c), beta: t.beta.clone(), s: t.s })
            .collect();
        ClassicalSymbol::from_terms(&self.theta, terms, self.cutoff).expect("same degrees")
    }

    /// Left multiplication of every coefficient by `a`.
    pub fn left_mul(&self, a: &Element) -> ClassicalSymbol {
        let terms = self.terms().map(|t| SymbolTerm { coeff: a * &t.coeff, beta: t.beta.clone(), s: t.s }).collect();
        ClassicalSymbol::from_terms(&self.theta, terms, self.cutoff).expect("same degrees")
    }

    /// Largest coefficient distance between two symbols, termwise.
    pub fn distance(&self, other: &ClassicalSymbol) -> f64 {
        let diff = self.add(&other.scale(C64::new(-1.0, 0.0))).expect("compatible degrees");
        diff.terms().map(|t| t.coeff.norm_l2()).fold(0.0, f64::max)
    }
}

fn multi_orders(n: usize, total: usize) -> Vec<MultiIndex> {
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in multi_orders(n - 1, total - first) {
            let mut v = vec![first as i64];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// All `α` with `|α| = total`.
pub fn multi_indices_of_order(n: usize, total: usize) -> Vec<MultiIndex> {
    multi_orders(n, total)
}

fn factorial(a: &[i64]) -> f64 {
    a.iter().map(|&x| (1..=x).map(|v| v as f64).product::<f64>()).product()
}

/// `Σ_{|α|≤N} (1/α!) ∂_ξ^α ρ1 · δ^α ρ2`.
pub fn sharp(r1: &ClassicalSymbol, r2: &ClassicalSymbol, order: usize) -> ClassicalSymbol {
    let n = r1.n();
    let mut terms = Vec::new();
    for total in 0..=order {
        for alpha in multi_orders(n, total) {
            let d1 = r1.d_xi_multi(&alpha);
            let d2 = r2.delta_multi(&alpha);
            terms.extend(d1.product(&d2).scale(C64::new(1.0 / factorial(&alpha), 0.0)).all_terms());
        }
    }
    ClassicalSymbol::from_terms(&r1.theta, terms, r1.cutoff.max(r2.cutoff)).expect("degrees add")
}

/// Composition depth reaching degree `−n`: `q1 + q2 + n` (at least 0).
pub fn default_sharp_order(r1: &ClassicalSymbol, r2: &ClassicalSymbol) -> usize {
    (r1.order + r2.order + r1.n() as f64).round().max(0.0) as usize
}

/// `P_ρ U^l = ρ(l) U^l` on a box.
pub fn quantize(rho: &ClassicalSymbol, bx: &Arc<TruncationBox>) -> TruncatedOperator {
    let d = bx.dim();
    let theta = &rho.theta;
    let mut mat = Mat::<C64>::zeros(d, d);
    let mut outside = false;
    for col in 0..d {
        let l = bx.mode(col);
        let xi: Vec<f64> = l.iter().map(|&x| x as f64).collect();
        let e = rho.eval_quantized(&xi);
        for (k, c) in e.iter() {
            let m: MultiIndex = l.iter().zip(k).map(|(x, y)| x + y).collect();
            match bx.index_of(&m) {
                Some(row) => mat[(row, col)] += c * theta.phase(k, l),
                None => outside |= (0..bx.n()).any(|j| !bx.active()[j] && k[j] != 0),
            }
        }
    }
    let mut op = TruncatedOperator::from_mat(bx, mat);
    op.support_outside = outside;
    op
}

/// `c_P = ∫_{S^{n−1}} ρ_{−n}(ξ) dξ`.
pub fn c_p(rho: &ClassicalSymbol, quad: &SphereQuadrature) -> Element {
    let n = rho.n() as f64;
    match rho.component(-n) {
        None => Element::zero(&rho.theta),
        Some(c) => c.terms.iter().fold(Element::zero(&rho.theta), |acc, t| {
            let w: f64 = quad.nodes.iter().zip(&quad.weights).map(|(x, w)| w * t.scalar_at(x)).sum();
            acc + t.coeff.scale_re(w)
        }),
    }
}

/// `Res(P) = ∫_{S^{n−1}} τ[ρ_{−n}(ξ)] dξ`.
pub fn residue(rho: &ClassicalSymbol, quad: &SphereQuadrature) -> C64 {
    c_p(rho, quad).trace()
}

/// Split `ρ = τ[ρ] + Σ_j δ_j ρ_j` with `ρ_j = δ_j Δ⁻¹ ρ` coefficientwise.
pub fn scalar_reduction(rho: &ClassicalSymbol) -> (ClassicalSymbol, Vec<ClassicalSymbol>) {
    let theta = &rho.theta;
    let n = rho.n();
    let scalar_terms = rho
        .terms()
        .map(|t| SymbolTerm { coeff: Element::scalar(theta, t.coeff.trace()), beta: t.beta.clone(), s: t.s })
        .collect();
    let scalar = ClassicalSymbol::from_terms(theta, scalar_terms, rho.cutoff).expect("same degrees");
    let parts = (0..n)
        .map(|j| {
            let terms = rho
                .terms()
                .map(|t| SymbolTerm {
                    coeff: t.coeff.flat_laplacian_partial_inverse().delta_j(j),
                    beta: t.beta.clone(),
                    s: t.s,
                })
                .collect();
            ClassicalSymbol::from_terms(theta, terms, rho.cutoff).expect("same degrees")
        })
        .collect();
    (scalar, parts)
}

/// `τ[ρ] + Σ_j δ_j ρ_j`.
pub fn reconstruct(scalar: &ClassicalSymbol, parts: &[ClassicalSymbol]) -> ClassicalSymbol {
    let mut terms = scalar.all_terms();
    for (j, p) in parts.iter().enumerate() {
        terms.extend(p.d_delta(j).all_terms());
    }
    ClassicalSymbol::from_terms(&scalar.theta, terms, scalar.cutoff).expect("same degrees")
}
