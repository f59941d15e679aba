#![allow(dead_code)]

use std::sync::Arc;

use nctorus::{Element, Theta, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Element with `terms` random monomials in `|k|_∞ ≤ radius`.
pub fn sparse(theta: &Arc<Theta>, terms: usize, radius: i64, rng: &mut ChaCha8Rng) -> Element {
    let n = theta.n();
    let it: Vec<_> = (0..terms)
        .map(|_| {
            let k: Vec<i64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
            (k, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        })
        .collect();
    Element::from_coeffs(theta, it).unwrap()
}

pub fn unit_axis(n: usize, j: usize, v: i64) -> Vec<i64> {
    let mut k = vec![0; n];
    k[j] = v;
    k
}

/// `c0 + (c1/2)(U_1 + U_1*)` on the first axis.
pub fn cosine(theta: &Arc<Theta>, c0: f64, c1: f64) -> Element {
    let n = theta.n();
    Element::from_coeffs(
        theta,
        vec![
            (vec![0; n], C64::new(c0, 0.0)),
            (unit_axis(n, 0, 1), C64::new(0.5 * c1, 0.0)),
            (unit_axis(n, 0, -1), C64::new(0.5 * c1, 0.0)),
        ],
    )
    .unwrap()
}

/// The conformal factor `2 + (U_1 + U_1*)/2`.
pub fn k_factor(theta: &Arc<Theta>) -> Element {
    cosine(theta, 2.0, 1.0)
}

pub fn theta2() -> Arc<Theta> {
    Arc::new(Theta::default_2d())
}

pub fn theta0(n: usize) -> Arc<Theta> {
    Arc::new(Theta::zero(n).unwrap())
}
