//! Truncated left-regular representation on Fourier modes.
//!
//! A box holds the modes `q + l` where `l` ranges over `|l|_∞ ≤ K+P` on a set
//! of active axes and `q` is a fixed offset on the remaining axes. Elements
//! supported on the active sublattice act within such a fiber, so the full
//! box is the direct sum of its fibers and each fiber can be handled alone.

use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::algebra::{Element, MultiIndex, Theta, C64};
use crate::error::{Error, Result};

/// Interior half-width `K` and padding `P`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub k: usize,
    pub p: usize,
}

impl Truncation {
    pub fn new(k: usize, p: usize) -> Self {
        Truncation { k, p }
    }

    pub fn radius(&self) -> usize {
        self.k + self.p
    }

    /// Fiber through the origin spanned by the union of the supports.
    pub fn box_for(&self, elems: &[&Element]) -> TruncationBox {
        let n = elems[0].n();
        let mut active = vec![false; n];
        for e in elems {
            for (j, a) in e.active_axes().into_iter().enumerate() {
                active[j] |= a;
            }
        }
        TruncationBox::fiber(n, self.k, self.p, &active, vec![0; n])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationBox {
    n: usize,
    k: usize,
    p: usize,
    active: Vec<bool>,
    axes: Vec<usize>,
    offset: Vec<i64>,
    modes: Vec<MultiIndex>,
}

impl TruncationBox {
    /// All modes with `|k|_∞ ≤ K+P`.
    pub fn new(n: usize, k: usize, p: usize) -> Self {
        TruncationBox::fiber(n, k, p, &vec![true; n], vec![0; n])
    }

    /// Fiber over `offset` spanned by the axes flagged in `active`.
    /// Offset entries on active axes are ignored.
    pub fn fiber(n: usize, k: usize, p: usize, active: &[bool], mut offset: Vec<i64>) -> Self {
        assert_eq!(active.len(), n);
        assert_eq!(offset.len(), n);
        let axes: Vec<usize> = (0..n).filter(|&j| active[j]).collect();
        for &j in &axes {
            offset[j] = 0;
        }
        let r = (k + p) as i64;
        let side = (2 * r + 1) as usize;
        let dim = side.pow(axes.len() as u32);
        let mut modes = Vec::with_capacity(dim);
        for idx in 0..dim {
            let mut m = offset.clone();
            let mut rem = idx;
            for &j in axes.iter().rev() {
                m[j] = (rem % side) as i64 - r;
                rem /= side;
            }
            modes.push(m);
        }
        TruncationBox { n, k, p, active: active.to_vec(), axes, offset, modes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn radius(&self) -> i64 {
        (self.k + self.p) as i64
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[MultiIndex] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> &MultiIndex {
        &self.modes[i]
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn active_axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    pub fn index_of(&self, m: &[i64]) -> Option<usize> {
        let r = self.radius();
        let side = 2 * r + 1;
        for j in 0..self.n {
            if !self.active[j] && m[j] != self.offset[j] {
                return None;
            }
        }
        let mut idx: i64 = 0;
        for &j in &self.axes {
            if m[j].abs() > r {
                return None;
            }
            idx = idx * side + (m[j] + r);
        }
        Some(idx as usize)
    }

    /// Index of the mode `q` itself (the origin when `q = 0`).
    pub fn origin(&self) -> usize {
        self.index_of(&self.offset.clone()).expect("offset lies in its fiber")
    }

    /// Whether mode `i` lies in the interior `|l|_∞ ≤ K` on the active axes.
    pub fn is_interior(&self, i: usize) -> bool {
        self.within(i, self.k as i64)
    }

    pub fn within(&self, i: usize, r: i64) -> bool {
        self.axes.iter().all(|&j| self.modes[i][j].abs() <= r)
    }

    /// Coordinates `l_j` of every mode on axis `j`.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.modes.iter().map(|m| m[j] as f64).collect()
    }

    pub fn same_shape(&self, other: &TruncationBox) -> bool {
        self.n == other.n && self.k == other.k && self.p == other.p && self.active == other.active
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub bx: Arc<TruncationBox>,
    pub mat: Mat<C64>,
    /// Set when a represented element had support leaving the box fiber.
    pub support_outside: bool,
}

impl TruncatedOperator {
    pub fn from_mat(bx: &Arc<TruncationBox>, mat: Mat<C64>) -> Self {
        assert_eq!(mat.nrows(), bx.dim());
        TruncatedOperator { bx: bx.clone(), mat, support_outside: false }
    }

    pub fn identity(bx: &Arc<TruncationBox>) -> Self {
        TruncatedOperator::from_mat(bx, Mat::identity(bx.dim(), bx.dim()))
    }

    /// Diagonal mode operator `D_j: U^l ↦ l_j U^l`.
    pub fn mode_operator(bx: &Arc<TruncationBox>, j: usize) -> Self {
        let c = bx.coordinate(j);
        let d = bx.dim();
        TruncatedOperator::from_mat(bx, Mat::from_fn(d, d, |a, b| if a == b { C64::new(c[a], 0.0) } else { C64::default() }))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn frobenius(&self) -> f64 {
        frobenius(&self.mat)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for j in 0..d {
            for i in 0..d {
                s += (self.mat[(i, j)] - self.mat[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_hermitian(&self, rel: f64) -> bool {
        self.hermitian_defect() <= rel * self.frobenius().max(f64::MIN_POSITIVE)
    }

    pub fn adjoint(&self) -> Self {
        TruncatedOperator::from_mat(&self.bx, self.mat.adjoint().to_owned())
    }

    pub fn matmul(&self, other: &TruncatedOperator) -> Self {
        TruncatedOperator::from_mat(&self.bx, &self.mat * &other.mat)
    }

    pub fn add(&self, other: &TruncatedOperator) -> Self {
        TruncatedOperator::from_mat(&self.bx, &self.mat + &other.mat)
    }

    pub fn sub(&self, other: &TruncatedOperator) -> Self {
        TruncatedOperator::from_mat(&self.bx, &self.mat - &other.mat)
    }

    pub fn scale(&self, c: C64) -> Self {
        let d = self.dim();
        TruncatedOperator::from_mat(&self.bx, Mat::from_fn(d, d, |i, j| self.mat[(i, j)] * c))
    }

    /// `[D_j, M]`.
    pub fn mode_commutator(&self, j: usize) -> Self {
        let c = self.bx.coordinate(j);
        let d = self.dim();
        TruncatedOperator::from_mat(&self.bx, Mat::from_fn(d, d, |a, b| self.mat[(a, b)] * (c[a] - c[b])))
    }

    /// Largest entry-wise distance restricted to rows and columns in `|l|_∞ ≤ r`.
    pub fn max_diff_within(&self, other: &TruncatedOperator, r: i64) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for j in 0..d {
            if !self.bx.within(j, r) {
                continue;
            }
            for i in 0..d {
                if self.bx.within(i, r) {
                    m = m.max((self.mat[(i, j)] - other.mat[(i, j)]).norm());
                }
            }
        }
        m
    }

    /// Little-endian dump: header line describing the mode order, then
    /// row-major `(re, im)` pairs.
    pub fn dump(&self) -> Vec<u8> {
        let d = self.dim();
        let mut out = format!(
            "nctorus-matrix dim={} n={} K={} P={} order=lexicographic-active-axes offset={:?}\n",
            d,
            self.bx.n(),
            self.bx.k(),
            self.bx.p(),
            self.bx.offset()
        )
        .into_bytes();
        for i in 0..d {
            for j in 0..d {
                let z = self.mat[(i, j)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }
}

pub fn frobenius(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Left multiplication by `a`: entry `(m, l)` is `a_{m-l} φ(m-l, l)`.
pub fn represent(a: &Element, bx: &Arc<TruncationBox>) -> TruncatedOperator {
    let d = bx.dim();
    let theta = a.theta();
    let mut mat = Mat::<C64>::zeros(d, d);
    let mut outside = false;
    for (k, c) in a.iter() {
        if (0..bx.n()).any(|j| !bx.active()[j] && k[j] != 0) {
            outside = true;
            continue;
        }
        for col in 0..d {
            let l = bx.mode(col);
            let m: MultiIndex = l.iter().zip(k).map(|(x, y)| x + y).collect();
            if let Some(row) = bx.index_of(&m) {
                mat[(row, col)] += c * theta.phase(k, l);
            }
        }
    }
    TruncatedOperator { bx: bx.clone(), mat, support_outside: outside }
}

/// Column of the origin read back as an element: `a_k = ⟨M U^0, U^k⟩`.
pub fn extract_element(op: &TruncatedOperator, theta: &Arc<Theta>) -> Element {
    extract_column(&op.bx, theta, |i| op.mat[(i, op.bx.origin())])
}

pub(crate) fn extract_column(bx: &TruncationBox, theta: &Arc<Theta>, col: impl Fn(usize) -> C64) -> Element {
    let q = bx.offset().to_vec();
    let it = (0..bx.dim()).map(|i| {
        let m: MultiIndex = bx.mode(i).iter().zip(&q).map(|(x, y)| x - y).collect();
        (m, col(i))
    });
    Element::from_coeffs(theta, it).expect("box dimension matches theta")
}

/// Eigen-decomposition of one connected block.
#[derive(Clone, Debug)]
pub struct EigBlock {
    pub idx: Vec<usize>,
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

/// Block-wise eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct BlockEigen {
    pub dim: usize,
    pub blocks: Vec<EigBlock>,
}

#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

/// Connected components of the nonzero pattern, ordered by first index.
pub fn components(m: &Mat<C64>) -> Vec<Vec<usize>> {
    let d = m.nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..d {
        for i in 0..d {
            if i != j && m[(i, j)] != C64::default() {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..d {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn sub_matrix(m: &Mat<C64>, idx: &[usize]) -> Mat<C64> {
    Mat::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Dense Hermitian eigensolver on one block, with ascending values and
/// each vector rotated so its first non-negligible entry is real positive.
pub fn dense_eigh(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let d = m.nrows();
    if d == 1 {
        return Ok((vec![m[(0, 0)].re], Mat::identity(1, 1)));
    }
    let evd = m.self_adjoint_eigen(faer::Side::Lower).map_err(|_| Error::Convergence)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<(f64, usize, usize)> = (0..d)
        .map(|c| {
            let mx = (0..d).map(|r| u[(r, c)].norm()).fold(0.0, f64::max);
            let first = (0..d).find(|&r| u[(r, c)].norm() > 1e-12 * mx).unwrap_or(0);
            (s[c].re, first, c)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut vals = Vec::with_capacity(d);
    let mut vecs = Mat::<C64>::zeros(d, d);
    for (new, &(v, first, c)) in order.iter().enumerate() {
        vals.push(v);
        let z = u[(first, c)];
        let rot = if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::new(1.0, 0.0) };
        for r in 0..d {
            vecs[(r, new)] = u[(r, c)] * rot;
        }
    }
    Ok((vals, vecs))
}

impl BlockEigen {
    pub fn new(m: &Mat<C64>) -> Result<Self> {
        let blocks = components(m)
            .into_iter()
            .map(|idx| {
                let (values, vectors) = dense_eigh(&sub_matrix(m, &idx))?;
                Ok(EigBlock { idx, values, vectors })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockEigen { dim: m.nrows(), blocks })
    }

    /// All eigenvalues in ascending order.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn min(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.values.first().copied()).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.values.last().copied()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Dense ascending decomposition, ties broken by first nonzero index.
    pub fn dense(&self) -> HermitianEigen {
        let mut cols: Vec<(f64, usize, usize, usize)> = Vec::with_capacity(self.dim);
        for (bi, b) in self.blocks.iter().enumerate() {
            for c in 0..b.values.len() {
                let mx = (0..b.idx.len()).map(|r| b.vectors[(r, c)].norm()).fold(0.0, f64::max);
                let first = (0..b.idx.len()).find(|&r| b.vectors[(r, c)].norm() > 1e-12 * mx).unwrap_or(0);
                cols.push((b.values[c], b.idx[first], bi, c));
            }
        }
        cols.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut vectors = Mat::<C64>::zeros(self.dim, self.dim);
        let mut values = Vec::with_capacity(self.dim);
        for (new, &(v, _, bi, c)) in cols.iter().enumerate() {
            values.push(v);
            let b = &self.blocks[bi];
            for (r, &gi) in b.idx.iter().enumerate() {
                vectors[(gi, new)] = b.vectors[(r, c)];
            }
        }
        HermitianEigen { values, vectors }
    }

    /// `V f(Λ) V*`, failing if `f` is not finite at some eigenvalue.
    pub fn apply(&self, f: &dyn Fn(f64) -> f64) -> Result<Mat<C64>> {
        let mut out = Mat::<C64>::zeros(self.dim, self.dim);
        for b in &self.blocks {
            let fv: Vec<f64> = b
                .values
                .iter()
                .map(|&x| {
                    let y = f(x);
                    if y.is_finite() {
                        Ok(y)
                    } else {
                        Err(Error::Positivity(format!("function undefined at eigenvalue {x:e}")))
                    }
                })
                .collect::<Result<_>>()?;
            let d = b.idx.len();
            let vf = Mat::from_fn(d, d, |r, c| b.vectors[(r, c)] * fv[c]);
            let blk = &vf * b.vectors.adjoint();
            for (a, &ga) in b.idx.iter().enumerate() {
                for (c, &gc) in b.idx.iter().enumerate() {
                    out[(ga, gc)] = blk[(a, c)];
                }
            }
        }
        Ok(out)
    }
}

fn check_hermitian(op: &TruncatedOperator) -> Result<()> {
    let f = op.frobenius();
    let defect = op.hermitian_defect();
    if defect > 1e-10 * f.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(defect / f.max(f64::MIN_POSITIVE)));
    }
    Ok(())
}

/// Block eigen-decomposition of a Hermitian truncated operator.
pub fn block_eig(op: &TruncatedOperator) -> Result<BlockEigen> {
    check_hermitian(op)?;
    BlockEigen::new(&op.mat)
}

/// Ascending eigenvalues and the unitary of eigenvectors.
pub fn hermitian_eig(op: &TruncatedOperator) -> Result<HermitianEigen> {
    Ok(block_eig(op)?.dense())
}

pub fn hermitian_eigenvalues(op: &TruncatedOperator) -> Result<Vec<f64>> {
    Ok(block_eig(op)?.values())
}

/// `V f(Λ) V*`.
pub fn func_calc(op: &TruncatedOperator, f: &dyn Fn(f64) -> f64) -> Result<TruncatedOperator> {
    let e = block_eig(op)?;
    Ok(TruncatedOperator::from_mat(&op.bx, e.apply(f)?))
}

/// Positivity tolerance relative to the largest eigenvalue.
pub const POSITIVITY_TOL: f64 = 1e-10;

pub(crate) fn check_positive(e: &BlockEigen, what: &str) -> Result<()> {
    let (lo, hi) = (e.min(), e.max());
    if !(lo > POSITIVITY_TOL * hi.abs().max(f64::MIN_POSITIVE)) {
        return Err(Error::Positivity(format!("{what}: min eigenvalue {lo:e}, max {hi:e}")));
    }
    Ok(())
}

/// `f(a)` for selfadjoint `a`, computed on the padded fiber and restricted
/// to the interior.
pub fn element_function(a: &Element, f: &dyn Fn(f64) -> f64, tr: Truncation) -> Result<Element> {
    let bx = Arc::new(tr.box_for(&[a]));
    let op = represent(a, &bx);
    let e = block_eig(&op)?;
    let m = e.apply(f)?;
    let origin = bx.origin();
    Ok(extract_column(&bx, a.theta(), |i| m[(i, origin)]).truncate_inf(tr.k as i64))
}

/// `a^s` for positive `a`.
pub fn element_power(a: &Element, s: f64, tr: Truncation) -> Result<Element> {
    if s == 1.0 {
        return Ok(a.clone());
    }
    let bx = Arc::new(tr.box_for(&[a]));
    let op = represent(a, &bx);
    let e = block_eig(&op)?;
    check_positive(&e, "element_power")?;
    let m = e.apply(&|t| t.powf(s))?;
    let origin = bx.origin();
    Ok(extract_column(&bx, a.theta(), |i| m[(i, origin)]).truncate_inf(tr.k as i64))
}

/// `exp(a)` for selfadjoint `a`.
pub fn element_exp(a: &Element, tr: Truncation) -> Result<Element> {
    element_function(a, &|t| t.exp(), tr)
}

/// Smallest and largest eigenvalue of `represent(a)` on the padded fiber.
pub fn spectral_bounds(a: &Element, tr: Truncation) -> Result<(f64, f64)> {
    let bx = Arc::new(tr.box_for(&[a]));
    let e = block_eig(&represent(a, &bx))?;
    Ok((e.min(), e.max()))
}

/// Square matrix with entries in the algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixOverAlgebra {
    pub m: usize,
    pub entries: Vec<Element>,
}

impl MatrixOverAlgebra {
    pub fn new(m: usize, entries: Vec<Element>) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::Dimension { expected: m * m, got: entries.len() });
        }
        Ok(MatrixOverAlgebra { m, entries })
    }

    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> Element) -> Self {
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                entries.push(f(i, j));
            }
        }
        MatrixOverAlgebra { m, entries }
    }

    pub fn identity(theta: &Arc<Theta>, m: usize) -> Self {
        MatrixOverAlgebra::from_fn(m, |i, j| if i == j { Element::one(theta) } else { Element::zero(theta) })
    }

    pub fn diagonal(d: &[Element]) -> Self {
        let theta = d[0].theta().clone();
        MatrixOverAlgebra::from_fn(d.len(), |i, j| if i == j { d[i].clone() } else { Element::zero(&theta) })
    }

    pub fn get(&self, i: usize, j: usize) -> &Element {
        &self.entries[i * self.m + j]
    }

    pub fn theta(&self) -> &Arc<Theta> {
        self.entries[0].theta()
    }

    pub fn matmul(&self, other: &MatrixOverAlgebra) -> MatrixOverAlgebra {
        let theta = self.theta().clone();
        MatrixOverAlgebra::from_fn(self.m, |i, j| {
            (0..self.m).fold(Element::zero(&theta), |acc, k| acc + self.get(i, k) * other.get(k, j))
        })
    }

    pub fn refs(&self) -> Vec<&Element> {
        self.entries.iter().collect()
    }

    /// Block operator on `C^m ⊗ box`, block-major.
    pub fn block_operator(&self, bx: &Arc<TruncationBox>) -> Mat<C64> {
        let d = bx.dim();
        let m = self.m;
        let mut out = Mat::<C64>::zeros(m * d, m * d);
        for i in 0..m {
            for j in 0..m {
                let r = represent(self.get(i, j), bx);
                for c in 0..d {
                    for a in 0..d {
                        out[(i * d + a, j * d + c)] = r.mat[(a, c)];
                    }
                }
            }
        }
        out
    }

    /// `max ‖h_ij* − h_ij‖ + ‖h_ij − h_ji‖`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.m {
            for j in 0..self.m {
                d = d.max(self.get(i, j).selfadjoint_defect());
                d = d.max(self.get(i, j).distance(self.get(j, i)));
            }
        }
        d
    }
}

fn check_block_hermitian(m: &Mat<C64>) -> Result<()> {
    let f = frobenius(m);
    let d = m.nrows();
    let mut s = 0.0;
    for j in 0..d {
        for i in 0..d {
            s += (m[(i, j)] - m[(j, i)].conj()).norm_sqr();
        }
    }
    if s.sqrt() > 1e-10 * f.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(s.sqrt() / f.max(f64::MIN_POSITIVE)));
    }
    Ok(())
}

/// Block eigen-decomposition of the operator of `h` on `C^m ⊗ box`.
pub fn block_matrix_eig(h: &MatrixOverAlgebra, bx: &Arc<TruncationBox>) -> Result<BlockEigen> {
    let big = h.block_operator(bx);
    check_block_hermitian(&big)?;
    BlockEigen::new(&big)
}

/// `det h = exp[Tr log h]` with the partial trace over `C^m`.
pub fn det_algebra(h: &MatrixOverAlgebra, tr: Truncation) -> Result<Element> {
    let theta = h.theta().clone();
    let bx = Arc::new(tr.box_for(&h.refs()));
    let e = block_matrix_eig(h, &bx)?;
    check_positive(&e, "det_algebra")?;
    let lg = e.apply(&|t| t.ln())?;
    let d = bx.dim();
    let origin = bx.origin();
    let log_det = extract_column(&bx, &theta, |a| (0..h.m).map(|i| lg[(i * d + a, i * d + origin)]).sum())
        .truncate_inf(tr.k as i64)
        .hermitian_part();
    element_exp(&log_det, tr)
}

/// Largest singular value of `represent(a)` on the fiber through the origin.
pub fn operator_norm(a: &Element, tr: Truncation) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let bx = Arc::new(tr.box_for(&[a]));
    let op = represent(a, &bx);
    op.mat.singular_values().map(|s| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

/// Largest operator norm of a commutator between two entries.
pub fn self_compat_check(h: &MatrixOverAlgebra, tr: Truncation) -> f64 {
    let mut worst: f64 = 0.0;
    let e = &h.entries;
    for a in 0..e.len() {
        for b in (a + 1)..e.len() {
            let c = e[a].commutator(&e[b]).expect("same theta");
            worst = worst.max(operator_norm(&c, tr));
        }
    }
    worst
}
