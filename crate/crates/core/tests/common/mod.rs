#![allow(dead_code)]

use ghz_core::GhzDiagState;
use rand::Rng;

/// Random point on the probability simplex over `2^n` labels, biased toward
/// the target label half of the time so high-fidelity inputs are covered.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> GhzDiagState {
    let len = 1usize << n;
    let mut w: Vec<f64> = (0..len)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    if rng.random_bool(0.5) {
        w[0] *= 4.0 * len as f64;
    }
    if rng.random_bool(0.2) {
        let k = rng.random_range(1..len);
        w[k] = 0.0;
    }
    let total: f64 = w.iter().sum();
    GhzDiagState::new(n, w.into_iter().map(|x| x / total).collect()).unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
