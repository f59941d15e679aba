//! Lattice counting, Weyl fits, singular values and Dixmier-trace estimators.

use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::error::{Error, Result};
use crate::gns::{components, TruncatedOperator, TruncationBox};
use crate::psido::{quantize, residue, ClassicalSymbol};
use crate::quadrature::{gauss_legendre, SphereQuadrature};

/// Positive homogeneous scalar function on `R^n \ 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarSymbol {
    /// Homogeneous symbol with scalar coefficients, read through `τ`.
    Sym(ClassicalSymbol),
    /// `σ(ξ)^p`.
    Power(Box<ScalarSymbol>, f64),
}

impl ScalarSymbol {
    pub fn n(&self) -> usize {
        match self {
            ScalarSymbol::Sym(s) => s.n(),
            ScalarSymbol::Power(b, _) => b.n(),
        }
    }

    pub fn degree(&self) -> f64 {
        match self {
            ScalarSymbol::Sym(s) => s.order,
            ScalarSymbol::Power(b, p) => b.degree() * p,
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match self {
            ScalarSymbol::Sym(s) => s.eval(xi).trace().re,
            ScalarSymbol::Power(b, p) => b.eval(xi).powf(*p),
        }
    }

    pub fn powf(self, p: f64) -> ScalarSymbol {
        ScalarSymbol::Power(Box::new(self), p)
    }

    /// Range of values over the nodes of a rule.
    pub fn sphere_range(&self, quad: &SphereQuadrature) -> (f64, f64) {
        quad.nodes
            .iter()
            .map(|x| self.eval(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    }
}

fn dense_probe(n: usize) -> SphereQuadrature {
    SphereQuadrature::standard(n, if n == 2 { 720 } else { 24 })
}

/// Lattice points `k ≠ 0` with `|k|_2 ≤ r`, in lexicographic order.
pub fn lattice_ball(n: usize, r: f64) -> Vec<Vec<i64>> {
    let ri = r.floor() as i64;
    let r2 = r * r;
    let mut out = Vec::new();
    let mut k = vec![-ri; n];
    loop {
        let s: i64 = k.iter().map(|x| x * x).sum();
        if s > 0 && (s as f64) <= r2 {
            out.push(k.clone());
        }
        let mut j = n;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if k[j] < ri {
                k[j] += 1;
                break;
            }
            k[j] = -ri;
        }
    }
}

fn lattice_values(rho: &ScalarSymbol, r: f64) -> Vec<f64> {
    lattice_ball(rho.n(), r)
        .iter()
        .map(|k| rho.eval(&k.iter().map(|&x| x as f64).collect::<Vec<_>>()))
        .collect()
}

/// Enumeration radius covering `ρ(k) ≤ λ` for a degree-one symbol
/// (half the sampled minimum is used as the lower bound).
fn count_radius(rho: &ScalarSymbol, lam: f64) -> Result<f64> {
    let (lo, _) = rho.sphere_range(&dense_probe(rho.n()));
    if !(lo > 0.0) {
        return Err(Error::Positivity(format!("scalar symbol not positive on the sphere (min {lo:e})")));
    }
    Ok(lam / (0.5 * lo))
}

/// `#{k ∈ Z^n \ 0 : ρ(k) ≤ λ}` for positive `ρ` of degree one.
pub fn counting(rho: &ScalarSymbol, lam: f64) -> Result<u64> {
    if (rho.degree() - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("counting needs degree 1, got {}", rho.degree())));
    }
    let r = count_radius(rho, lam)?;
    Ok(lattice_values(rho, r).into_iter().filter(|&v| v <= lam).count() as u64)
}

/// `c(ρ) = (1/n) ∫_{S^{n−1}} ρ^{-n}`.
pub fn weyl_constant(rho: &ScalarSymbol, quad: &SphereQuadrature) -> f64 {
    let n = rho.n() as i32;
    quad.integrate(|x| rho.eval(x).powi(-n)) / n as f64
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylReport {
    pub lambda_max: f64,
    pub count: u64,
    pub c_hat: f64,
    pub c_quadrature: f64,
    /// Log-log slope of `|N(λ)/λⁿ − c(ρ)|` over `[λ_max/16, λ_max]`.
    pub error_exponent: f64,
    /// `max |λ_ℓ − (ℓ/c)^{1/n}|` over `ℓ ∈ [100, N(λ_max)]`.
    pub eigen_residual: f64,
}

fn ls_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn weyl_fit(rho: &ScalarSymbol, lambda_max: f64, quad: &SphereQuadrature) -> Result<WeylReport> {
    if lambda_max < 20.0 {
        return Err(Error::Invalid("weyl_fit needs lambda_max >= 20".into()));
    }
    if (rho.degree() - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("weyl_fit needs degree 1, got {}", rho.degree())));
    }
    let n = rho.n() as i32;
    let r = count_radius(rho, lambda_max)?;
    let mut vals = lattice_values(rho, r);
    vals.sort_by(f64::total_cmp);
    let count_at = |lam: f64| vals.partition_point(|&v| v <= lam);
    let count = count_at(lambda_max);
    let c_hat = count as f64 / lambda_max.powi(n);
    let c = weyl_constant(rho, quad);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..40 {
        let lam = lambda_max / 16.0 * 16f64.powf(i as f64 / 39.0);
        let dev = (count_at(lam) as f64 / lam.powi(n) - c).abs();
        if dev > 0.0 {
            xs.push(lam.ln());
            ys.push(dev.ln());
        }
    }
    let error_exponent = if xs.len() >= 2 { ls_slope(&xs, &ys).0 } else { f64::NAN };
    let mut eigen_residual: f64 = 0.0;
    for l in 100..=count {
        let pred = (l as f64 / c).powf(1.0 / n as f64);
        eigen_residual = eigen_residual.max((vals[l - 1] - pred).abs());
    }
    Ok(WeylReport { lambda_max, count: count as u64, c_hat, c_quadrature: c, error_exponent, eigen_residual })
}

/// Sorted spectrum with the number of trusted entries from the front.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub values: Vec<f64>,
    pub descending: bool,
    pub reliable: usize,
    pub source: String,
}

impl SpectrumSample {
    pub fn ascending(mut values: Vec<f64>, reliable: usize, source: &str) -> Self {
        values.sort_by(f64::total_cmp);
        SpectrumSample { reliable: reliable.min(values.len()), values, descending: false, source: source.into() }
    }

    pub fn descending(mut values: Vec<f64>, reliable: usize, source: &str) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        SpectrumSample { reliable: reliable.min(values.len()), values, descending: true, source: source.into() }
    }

    pub fn reliable_values(&self) -> &[f64] {
        &self.values[..self.reliable]
    }
}

/// Default fill fraction of trusted spectrum for non-diagonal truncations.
pub const FILL_FRACTION: f64 = 0.25;

/// Singular values `μ_0 ≥ μ_1 ≥ …`, block by block.
pub fn singular_values(t: &TruncatedOperator, fill: f64) -> Result<SpectrumSample> {
    let mut vals = Vec::with_capacity(t.dim());
    let mut diagonal = true;
    for idx in components(&t.mat) {
        if idx.len() == 1 {
            vals.push(t.mat[(idx[0], idx[0])].norm());
            continue;
        }
        diagonal = false;
        let b = Mat::from_fn(idx.len(), idx.len(), |a, c| t.mat[(idx[a], idx[c])]);
        vals.extend(b.singular_values().map_err(|_| Error::Convergence)?);
    }
    let reliable = if diagonal { vals.len() } else { (fill * vals.len() as f64).floor() as usize };
    Ok(SpectrumSample::descending(vals, reliable, "singular values"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DixmierReport {
    /// `(1/log N) Σ_{k<N} μ_k` at `N = N_max`.
    pub estimate_logavg: f64,
    /// Least-squares slope of `Σ_{k<N} μ_k` against `log N` over the window.
    pub estimate_slope: f64,
    /// `τ_λ` at `λ = N_max`.
    pub estimate_tau_lambda: f64,
    pub spread: f64,
    pub window: (usize, usize),
}

impl DixmierReport {
    pub fn estimates(&self) -> [f64; 3] {
        [self.estimate_logavg, self.estimate_slope, self.estimate_tau_lambda]
    }
}

fn partial_sums(mu: &[f64], upto: usize) -> Vec<f64> {
    let mut s = Vec::with_capacity(upto + 1);
    let mut acc = 0.0;
    s.push(0.0);
    for &m in &mu[..upto] {
        acc += m;
        s.push(acc);
    }
    s
}

/// Log-spaced sample of integers in `[lo, hi]`.
pub fn log_grid(lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<usize> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as usize)
        .map(|x| x.clamp(lo, hi))
        .collect();
    v.dedup();
    v
}

/// `(1/log λ) ∫_e^λ σ_u/log u du/u` with `σ_u = S_⌊u⌋ + (u − ⌊u⌋) μ_⌊u⌋`.
fn tau_lambda(mu: &[f64], s: &[f64], lam: usize) -> f64 {
    let (gx, gw) = gauss_legendre(4);
    let e = std::f64::consts::E;
    let mut total = 0.0;
    let mut lo = e;
    for j in 2..lam {
        let hi = (j + 1) as f64;
        if hi <= lo {
            continue;
        }
        let h = 0.5 * (hi - lo);
        let m = mu.get(j).copied().unwrap_or(0.0);
        for (x, w) in gx.iter().zip(&gw) {
            let u = lo + h * (x + 1.0);
            let sigma = s[j] + (u - j as f64) * m;
            total += w * h * sigma / (u * u.ln());
        }
        lo = hi;
    }
    total / (lam as f64).ln()
}

/// The three estimators of `lim (1/log N) Σ_{k<N} μ_k` on a descending sequence.
pub fn dixmier_estimate(mu: &[f64], window: (usize, usize)) -> Result<DixmierReport> {
    let (lo, hi) = window;
    let lo = lo.max(3);
    if hi > mu.len() || hi < lo || hi - lo + 1 < 50 {
        return Err(Error::WindowTooSmall(if hi >= lo { (hi - lo + 1).min(mu.len()) } else { 0 }));
    }
    let s = partial_sums(mu, hi);
    let logavg = s[hi] / (hi as f64).ln();
    let grid = log_grid(lo, hi, 400);
    let x: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = grid.iter().map(|&n| s[n]).collect();
    let slope = ls_slope(&x, &y).0;
    let tau = tau_lambda(mu, &s, hi);
    let est = [logavg, slope, tau];
    let spread = est.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - est.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DixmierReport { estimate_logavg: logavg, estimate_slope: slope, estimate_tau_lambda: tau, spread, window: (lo, hi) })
}

/// Real and imaginary parts of a complex diagonal sequence estimated separately.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexDixmier {
    pub re: DixmierReport,
    pub im: DixmierReport,
}

impl ComplexDixmier {
    pub fn slope(&self) -> C64 {
        C64::new(self.re.estimate_slope, self.im.estimate_slope)
    }
}

pub fn dixmier_estimate_complex(seq: &[C64], window: (usize, usize)) -> Result<ComplexDixmier> {
    let re: Vec<f64> = seq.iter().map(|z| z.re).collect();
    let im: Vec<f64> = seq.iter().map(|z| z.im).collect();
    Ok(ComplexDixmier { re: dixmier_estimate(&re, window)?, im: dixmier_estimate(&im, window)? })
}

/// Operator of order `−n` whose quantization is diagonal in the mode basis
/// up to left multiplication: the Dixmier input is the diagonal `τ[ρ(k)]`,
/// ordered by decreasing modulus.
#[derive(Clone, Debug)]
pub enum TraceSymbol {
    Classical(ClassicalSymbol),
    Scalar(ScalarSymbol),
}

impl TraceSymbol {
    pub fn n(&self) -> usize {
        match self {
            TraceSymbol::Classical(s) => s.n(),
            TraceSymbol::Scalar(s) => s.n(),
        }
    }

    pub fn order(&self) -> f64 {
        match self {
            TraceSymbol::Classical(s) => s.order,
            TraceSymbol::Scalar(s) => s.degree(),
        }
    }

    pub fn diag(&self, k: &[f64]) -> C64 {
        match self {
            TraceSymbol::Classical(s) => s.trace_quantized(k),
            TraceSymbol::Scalar(s) => C64::new(s.eval(k), 0.0),
        }
    }

    /// `(1/n) Res(P)`.
    pub fn target(&self, quad: &SphereQuadrature) -> C64 {
        let n = self.n() as f64;
        match self {
            TraceSymbol::Classical(s) => residue(s, quad) / n,
            TraceSymbol::Scalar(s) => {
                if (s.degree() + n).abs() > 1e-9 {
                    C64::default()
                } else {
                    C64::new(quad.integrate(|x| s.eval(x)) / n, 0.0)
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceTheoremReport {
    pub dixmier: ComplexDixmier,
    pub target_re: f64,
    pub target_im: f64,
    /// `|slope estimate − (1/n) Res|`.
    pub error: f64,
    pub reliable: usize,
    pub values: usize,
    pub radius: f64,
}

fn sort_by_modulus(mut seq: Vec<C64>) -> Vec<C64> {
    seq.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    seq
}

/// Lattice diagonal of `P` sorted by decreasing modulus, enumerated until at
/// least `n_max` trusted values are available. Returns the sequence, the
/// trusted count and the enumeration radius.
pub fn trace_diagonal(p: &TraceSymbol, n_max: usize) -> Result<(Vec<C64>, usize, f64)> {
    let n = p.n();
    if (p.order() + n as f64).abs() > 1e-9 {
        return Err(Error::Invalid(format!("trace theorem needs order −{n}, got {}", p.order())));
    }
    let area = crate::quadrature::sphere_area(n);
    let mut r = (1.3 * n_max as f64 * n as f64 / area).powf(1.0 / n as f64) + 2.0;
    let probe = dense_probe(n);
    loop {
        let pts = lattice_ball(n, r);
        let seq: Vec<C64> = pts.iter().map(|k| p.diag(&k.iter().map(|&x| x as f64).collect::<Vec<_>>())).collect();
        let edge = probe
            .nodes
            .iter()
            .map(|x| p.diag(&x.iter().map(|v| v * r).collect::<Vec<_>>()).norm())
            .fold(0.0, f64::max);
        let seq = sort_by_modulus(seq);
        let reliable = if edge == 0.0 { seq.len() } else { seq.iter().take_while(|z| z.norm() > 1.05 * edge).count() };
        if reliable >= n_max {
            return Ok((seq, reliable, r));
        }
        r *= 1.25;
    }
}

/// Trace theorem on the exact lattice diagonal.
pub fn trace_theorem_check(p: &TraceSymbol, n_max: usize, n_min: usize, quad: &SphereQuadrature) -> Result<TraceTheoremReport> {
    let (seq, reliable, radius) = trace_diagonal(p, n_max)?;
    let dixmier = dixmier_estimate_complex(&seq, (n_min, n_max))?;
    let target = p.target(quad);
    let error = (dixmier.slope() - target).norm();
    Ok(TraceTheoremReport { dixmier, target_re: target.re, target_im: target.im, error, reliable, values: seq.len(), radius })
}

/// Trace theorem on a truncation box: the diagonal of the quantized matrix.
pub fn trace_theorem_box(p: &ClassicalSymbol, bx: &Arc<TruncationBox>, n_min: usize, quad: &SphereQuadrature) -> Result<TraceTheoremReport> {
    let op = quantize(p, bx);
    let n = p.n();
    let r = bx.radius() as f64;
    let ts = TraceSymbol::Classical(p.clone());
    let probe = dense_probe(n);
    let edge = probe.nodes.iter().map(|x| ts.diag(&x.iter().map(|v| v * r).collect::<Vec<_>>()).norm()).fold(0.0, f64::max);
    let seq = sort_by_modulus((0..op.dim()).filter(|&i| bx.mode(i).iter().any(|&x| x != 0)).map(|i| op.mat[(i, i)]).collect());
    let reliable = if edge == 0.0 { seq.len() } else { seq.iter().take_while(|z| z.norm() > 1.05 * edge).count() };
    let dixmier = dixmier_estimate_complex(&seq, (n_min, reliable))?;
    let target = ts.target(quad);
    Ok(TraceTheoremReport {
        error: (dixmier.slope() - target).norm(),
        dixmier,
        target_re: target.re,
        target_im: target.im,
        reliable,
        values: seq.len(),
        radius: r,
    })
}

/// `(N, Σ_{k<N} μ_k, (1/log N) Σ_{k<N} μ_k)` on a log-spaced grid of the window.
pub fn partial_sum_triples(mu: &[f64], window: (usize, usize), points: usize) -> Vec<(usize, f64, f64)> {
    let (lo, hi) = (window.0.max(2), window.1.min(mu.len()));
    if hi <= lo {
        return Vec::new();
    }
    let s = partial_sums(mu, hi);
    log_grid(lo, hi, points.max(2)).into_iter().map(|n| (n, s[n], s[n] / (n as f64).ln())).collect()
}
