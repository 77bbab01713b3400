use super::{Dataset, TaskError};
use crate::rng;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Gaussian blobs: class means equally spaced on the unit circle in the first
/// two coordinates, isotropic noise `sigma` in every coordinate. Each class
/// contributes `n_per_class` points, 80% of them (rounded down) to train.
pub fn make_blobs(seed: u64, n_per_class: usize, dim: usize, classes: usize, sigma: f64) -> Result<Dataset, TaskError> {
    if n_per_class < 2 || dim < 2 || classes < 2 || !(sigma > 0.0 && sigma.is_finite()) {
        return Err(TaskError::Spec(format!(
            "blobs need n_per_class >= 2, dim >= 2, classes >= 2, sigma > 0 (got {n_per_class}, {dim}, {classes}, {sigma})"
        )));
    }
    let mut r = rng::seeded(seed);
    let n_train = n_per_class * 4 / 5;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..classes {
        let angle = 2.0 * PI * c as f64 / classes as f64;
        for i in 0..n_per_class {
            let point: Vec<f64> = (0..dim)
                .map(|k| {
                    let mean = match k {
                        0 => angle.cos(),
                        1 => angle.sin(),
                        _ => 0.0,
                    };
                    let z: f64 = StandardNormal.sample(&mut r);
                    mean + sigma * z
                })
                .collect();
            if i < n_train { &mut train } else { &mut test }.push((point, c as u32));
        }
    }
    train.shuffle(&mut r);
    test.shuffle(&mut r);
    let unzip = |rows: Vec<(Vec<f64>, u32)>| -> (Vec<f64>, Vec<u32>) {
        let mut x = Vec::with_capacity(rows.len() * dim);
        let mut y = Vec::with_capacity(rows.len());
        for (p, c) in rows {
            x.extend(p);
            y.push(c);
        }
        (x, y)
    };
    let (train_x, train_y) = unzip(train);
    let (test_x, test_y) = unzip(test);
    Ok(Dataset { dim, classes, train_x, train_y, test_x, test_y })
}

/// Draws `n` training examples without replacement; the test split is kept.
pub fn subsample(dataset: &Dataset, n: usize, seed: u64) -> Result<Dataset, TaskError> {
    let available = dataset.n_train();
    if n > available {
        return Err(TaskError::Spec(format!("subset of {n} requested from {available} training examples")));
    }
    let picked = rand::seq::index::sample(&mut rng::seeded(seed), available, n);
    let d = dataset.dim;
    let mut train_x = Vec::with_capacity(n * d);
    let mut train_y = Vec::with_capacity(n);
    for i in picked.iter() {
        train_x.extend_from_slice(dataset.train_row(i));
        train_y.push(dataset.train_y[i]);
    }
    Ok(Dataset { train_x, train_y, ..dataset.clone_test_only() })
}
