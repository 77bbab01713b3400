//! Reference implementations written from the textbook update rules, plus
//! helpers shared by the integration tests. Nothing here calls into the
//! interpreter.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random parameter vector and `steps` gradient vectors of dimension 1..=32.
pub fn random_sequence(seed: u64, steps: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut r = rng(seed);
    let dim = r.gen_range(1..=32);
    let params = (0..dim).map(|_| r.gen_range(-2.0..2.0)).collect();
    let grads = (0..steps)
        .map(|_| {
            let scale: f64 = 10f64.powf(r.gen_range(-3.0..1.0));
            (0..dim).map(|_| scale * r.gen_range(-1.0..1.0)).collect()
        })
        .collect();
    (params, grads)
}

pub fn sgd(params: &[f64], grads: &[Vec<f64>], lr: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    for g in grads {
        for i in 0..p.len() {
            p[i] -= lr * g[i];
        }
    }
    p
}

/// Heavy-ball momentum with the EMA convention m = b*m + (1-b)*g.
pub fn sgd_momentum(params: &[f64], grads: &[Vec<f64>], lr: f64, beta: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    let mut m = vec![0.0; p.len()];
    for g in grads {
        for i in 0..p.len() {
            m[i] = beta * m[i] + (1.0 - beta) * g[i];
            p[i] -= lr * m[i];
        }
    }
    p
}

pub fn rmsprop(params: &[f64], grads: &[Vec<f64>], lr: f64, beta2: f64, eps: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    let mut v = vec![0.0; p.len()];
    for g in grads {
        for i in 0..p.len() {
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            p[i] -= lr * g[i] / (v[i].sqrt() + eps);
        }
    }
    p
}

/// Adam with decoupled weight decay (`wd = 0` gives plain Adam).
pub fn adamw(params: &[f64], grads: &[Vec<f64>], lr: f64, b1: f64, b2: f64, eps: f64, wd: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    let mut m = vec![0.0; p.len()];
    let mut v = vec![0.0; p.len()];
    for (step, g) in grads.iter().enumerate() {
        let t = (step + 1) as f64;
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / (1.0 - b1.powf(t));
            let v_hat = v[i] / (1.0 - b2.powf(t));
            p[i] = p[i] - lr * wd * p[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    p
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Exact sum of doubles via 2^-120 fixed point. Panics if a value is not
/// representable on that grid or the range overflows.
pub fn fixed_point_sum(values: &[f64]) -> f64 {
    let scale = 2f64.powi(120);
    let mut acc: i128 = 0;
    for &v in values {
        let scaled = v * scale;
        assert!(scaled.fract() == 0.0 && scaled.abs() < 2f64.powi(124), "{v} outside oracle domain");
        acc += scaled as i128;
    }
    (acc as f64) / scale
}

pub fn fixed_point_mean(values: &[f64]) -> f64 {
    fixed_point_sum(values) / values.len() as f64
}

/// Central finite-difference gradient of `f` at `x`.
pub fn numeric_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let up = f(&probe);
            probe[i] = orig - h;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - n| / max(|a|, |n|, 1e-6)`; the floor keeps near-zero components
/// from turning rounding noise into large ratios.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}
