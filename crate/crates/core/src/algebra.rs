//! Finitely supported elements of the smooth noncommutative torus.
//!
//! An element is a finite sum `u = Σ u_k U^k` with `U^k = U_1^{k_1}···U_n^{k_n}`
//! and the generators obeying `U_k U_j = e^{2πiθ_{jk}} U_j U_k`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Multi-index `k ∈ Z^n`. Also used for multi-orders with nonnegative entries.
pub type MultiIndex = Vec<i64>;

/// Coefficients with modulus below this are dropped after every operation.
pub const PRUNE: f64 = 1e-15;

/// Real antisymmetric deformation matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    n: usize,
    entries: Vec<f64>,
}

impl Theta {
    /// Row-major `n×n` entries.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::SmallDimension(n));
        }
        if entries.len() != n * n {
            return Err(Error::Dimension { expected: n * n, got: entries.len() });
        }
        let mut defect: f64 = 0.0;
        for j in 0..n {
            for l in 0..n {
                defect = defect.max((entries[j * n + l] + entries[l * n + j]).abs());
            }
        }
        if defect > 1e-14 {
            return Err(Error::NotAntisymmetric(defect));
        }
        Ok(Theta { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::Dimension { expected: n, got: r.len() });
            }
            entries.extend_from_slice(r);
        }
        Theta::new(n, entries)
    }

    pub fn zero(n: usize) -> Result<Self> {
        Theta::new(n, vec![0.0; n * n])
    }

    /// `n = 2` with `θ_12 = t`.
    pub fn two(t: f64) -> Self {
        Theta { n: 2, entries: vec![0.0, t, -t, 0.0] }
    }

    /// The default experiment setting `θ_12 = 1/√5`.
    pub fn default_2d() -> Self {
        Theta::two(1.0 / 5f64.sqrt())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.entries[j * self.n + l]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0.0)
    }

    /// Phase in turns, reduced to `[0, 1)`.
    ///
    /// Moving `U_j^{l_j}` to the left past `U_m^{k_m}` (`j < m`) costs
    /// `e^{2πiθ_{jm} k_m l_j}`; each integer product is formed exactly and
    /// reduced mod 1 before the sum.
    pub fn phase_turns(&self, k: &[i64], l: &[i64]) -> f64 {
        let n = self.n;
        let mut x = 0.0;
        for j in 0..n {
            if l[j] == 0 {
                continue;
            }
            for m in (j + 1)..n {
                let p = k[m] * l[j];
                if p != 0 {
                    let t = self.entries[j * n + m];
                    if t != 0.0 {
                        x += (t * p as f64).rem_euclid(1.0);
                    }
                }
            }
        }
        x.rem_euclid(1.0)
    }

    /// `φ(k,l)` with `U^k U^l = φ(k,l) U^{k+l}`.
    pub fn phase(&self, k: &[i64], l: &[i64]) -> C64 {
        let x = self.phase_turns(k, l);
        if x == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, 2.0 * PI * x)
        }
    }

    /// Checked version of [`phase`](Self::phase).
    pub fn try_phase(&self, k: &[i64], l: &[i64]) -> Result<C64> {
        for len in [k.len(), l.len()] {
            if len != self.n {
                return Err(Error::Dimension { expected: self.n, got: len });
            }
        }
        Ok(self.phase(k, l))
    }
}

/// One serialized coefficient `{k: [...], re, im}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffRecord {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug)]
pub struct Element {
    theta: Arc<Theta>,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        *self.theta == *other.theta && self.coeffs == other.coeffs
    }
}

fn add_index(a: &[i64], b: &[i64]) -> MultiIndex {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

impl Element {
    pub fn zero(theta: &Arc<Theta>) -> Self {
        Element { theta: theta.clone(), coeffs: BTreeMap::new() }
    }

    pub fn scalar(theta: &Arc<Theta>, c: C64) -> Self {
        let n = theta.n();
        Element::monomial(theta, vec![0; n], c)
    }

    pub fn one(theta: &Arc<Theta>) -> Self {
        Element::scalar(theta, C64::new(1.0, 0.0))
    }

    pub fn real(theta: &Arc<Theta>, x: f64) -> Self {
        Element::scalar(theta, C64::new(x, 0.0))
    }

    /// `c·U^k`.
    pub fn monomial(theta: &Arc<Theta>, k: MultiIndex, c: C64) -> Self {
        assert_eq!(k.len(), theta.n(), "multi-index length");
        let mut coeffs = BTreeMap::new();
        if c.norm() >= PRUNE {
            coeffs.insert(k, c);
        }
        Element { theta: theta.clone(), coeffs }
    }

    /// Generator `U_j` (0-based axis).
    pub fn generator(theta: &Arc<Theta>, j: usize) -> Self {
        let mut k = vec![0; theta.n()];
        k[j] = 1;
        Element::monomial(theta, k, C64::new(1.0, 0.0))
    }

    pub fn from_coeffs<I: IntoIterator<Item = (MultiIndex, C64)>>(theta: &Arc<Theta>, it: I) -> Result<Self> {
        let n = theta.n();
        let mut coeffs: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (k, c) in it {
            if k.len() != n {
                return Err(Error::Dimension { expected: n, got: k.len() });
            }
            *coeffs.entry(k).or_default() += c;
        }
        let mut e = Element { theta: theta.clone(), coeffs };
        e.prune(PRUNE);
        Ok(e)
    }

    pub fn theta(&self) -> &Arc<Theta> {
        &self.theta
    }

    pub fn n(&self) -> usize {
        self.theta.n()
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, C64> {
        &self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.coeffs.iter()
    }

    pub fn prune(&mut self, tol: f64) {
        self.coeffs.retain(|_, c| c.norm() >= tol);
    }

    fn check(&self, other: &Element) -> Result<()> {
        if Arc::ptr_eq(&self.theta, &other.theta) || *self.theta == *other.theta {
            Ok(())
        } else {
            Err(Error::Dimension { expected: self.n(), got: other.n() })
        }
    }

    /// Twisted convolution `(uv)_m = Σ_{k+l=m} u_k v_l φ(k,l)`.
    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check(other)?;
        let mut acc: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (k, a) in &self.coeffs {
            for (l, b) in &other.coeffs {
                let ph = self.theta.phase(k, l);
                *acc.entry(add_index(k, l)).or_default() += a * b * ph;
            }
        }
        let mut e = Element { theta: self.theta.clone(), coeffs: acc };
        e.prune(PRUNE);
        Ok(e)
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check(other)?;
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            *coeffs.entry(k.clone()).or_default() += c;
        }
        let mut e = Element { theta: self.theta.clone(), coeffs };
        e.prune(PRUNE);
        Ok(e)
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Element {
        let mut e = Element {
            theta: self.theta.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        };
        e.prune(PRUNE);
        e
    }

    pub fn scale_re(&self, x: f64) -> Element {
        self.scale(C64::new(x, 0.0))
    }

    pub fn pow(&self, p: u32) -> Element {
        let mut r = Element::one(&self.theta);
        for _ in 0..p {
            r = &r * self;
        }
        r
    }

    /// `u*` with `(u*)_m = conj(u_{-m}) conj(φ(-m, m))`.
    pub fn adjoint(&self) -> Element {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let m: MultiIndex = k.iter().map(|x| -x).collect();
                let ph = self.theta.phase(&m, k);
                (m, (c * ph).conj())
            })
            .collect();
        Element { theta: self.theta.clone(), coeffs }
    }

    /// `τ(u) = u_0`.
    pub fn trace(&self) -> C64 {
        self.coeff(&vec![0; self.n()])
    }

    /// `δ^α u`, multiplying the `k`-th coefficient by `k^α`.
    pub fn delta(&self, alpha: &[i64]) -> Result<Element> {
        if alpha.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: alpha.len() });
        }
        if alpha.iter().any(|&a| a < 0) {
            return Err(Error::NegativeOrder);
        }
        let coeffs = self.coeffs.iter().map(|(k, c)| {
            let mut w = 1.0;
            for (kj, &aj) in k.iter().zip(alpha) {
                w *= (*kj as f64).powi(aj as i32);
            }
            (k.clone(), c * w)
        });
        Element::from_coeffs(&self.theta, coeffs)
    }

    /// `δ_j u` (0-based axis).
    pub fn delta_j(&self, j: usize) -> Element {
        let mut e = Element {
            theta: self.theta.clone(),
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), c * k[j] as f64)).collect(),
        };
        e.prune(PRUNE);
        e
    }

    /// `⟨u, v⟩ = τ(u v*) = Σ u_k conj(v_k)`.
    pub fn inner(&self, other: &Element) -> C64 {
        self.coeffs
            .iter()
            .map(|(k, a)| a * other.coeff(k).conj())
            .sum()
    }

    /// Flat Laplacian `Δ = Σ δ_j²`.
    pub fn flat_laplacian(&self) -> Element {
        let mut e = Element {
            theta: self.theta.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (k.clone(), c * k.iter().map(|x| (x * x) as f64).sum::<f64>()))
                .collect(),
        };
        e.prune(PRUNE);
        e
    }

    /// `u_k/|k|²` away from `k = 0`, and 0 on the constant mode.
    pub fn flat_laplacian_partial_inverse(&self) -> Element {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| k.iter().any(|&x| x != 0))
            .map(|(k, c)| (k.clone(), c / k.iter().map(|x| (x * x) as f64).sum::<f64>()))
            .collect();
        Element { theta: self.theta.clone(), coeffs }
    }

    pub fn commutator(&self, other: &Element) -> Result<Element> {
        let ab = self.mul(other)?;
        Element::sub(&ab, &other.mul(self)?)
    }

    pub fn norm_l2(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|k|_∞` in the support.
    pub fn support_radius(&self) -> i64 {
        self.coeffs
            .keys()
            .map(|k| k.iter().map(|x| x.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    /// Axes along which the support is not constant zero.
    pub fn active_axes(&self) -> Vec<bool> {
        let mut a = vec![false; self.n()];
        for k in self.coeffs.keys() {
            for (j, &x) in k.iter().enumerate() {
                if x != 0 {
                    a[j] = true;
                }
            }
        }
        a
    }

    /// Keep only modes with `|k|_∞ ≤ r`.
    pub fn truncate_inf(&self, r: i64) -> Element {
        Element {
            theta: self.theta.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.iter().all(|x| x.abs() <= r))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// `‖u* − u‖_2`.
    pub fn selfadjoint_defect(&self) -> f64 {
        (&self.adjoint() - self).norm_l2()
    }

    /// Replace by `(u + u*)/2`.
    pub fn hermitian_part(&self) -> Element {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn distance(&self, other: &Element) -> f64 {
        (self - other).norm_l2()
    }

    pub fn to_records(&self) -> Vec<CoeffRecord> {
        self.coeffs
            .iter()
            .map(|(k, c)| CoeffRecord { k: k.clone(), re: c.re, im: c.im })
            .collect()
    }

    pub fn from_records(theta: &Arc<Theta>, recs: &[CoeffRecord]) -> Result<Self> {
        Element::from_coeffs(theta, recs.iter().map(|r| (r.k.clone(), C64::new(r.re, r.im))))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)U{:?}", c.re, c.im, k)?;
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl $tr<&Element> for &Element {
            type Output = Element;
            fn $m(self, rhs: &Element) -> Element {
                self.$call(rhs).expect("elements over different theta")
            }
        }
        impl $tr<Element> for Element {
            type Output = Element;
            fn $m(self, rhs: Element) -> Element {
                (&self).$call(&rhs).expect("elements over different theta")
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale_re(-1.0)
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale_re(-1.0)
    }
}

/// Element with coefficients uniform in the unit square on `|k|_∞ ≤ radius`
/// along the flagged axes.
pub fn random_element<R: rand::Rng>(theta: &Arc<Theta>, radius: i64, active: &[bool], rng: &mut R) -> Element {
    let n = theta.n();
    let side = (2 * radius + 1) as usize;
    let axes: Vec<usize> = (0..n).filter(|&j| active[j]).collect();
    let count = side.pow(axes.len() as u32);
    let mut it = Vec::with_capacity(count);
    for idx in 0..count {
        let mut k = vec![0i64; n];
        let mut rem = idx;
        for &j in axes.iter().rev() {
            k[j] = (rem % side) as i64 - radius;
            rem /= side;
        }
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        it.push((k, c));
    }
    Element::from_coeffs(theta, it).expect("dimension matches theta")
}
