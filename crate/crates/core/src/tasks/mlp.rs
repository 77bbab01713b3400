//! One-hidden-layer ReLU network with softmax cross-entropy and hand-written
//! backpropagation.
//!
//! Parameters live in one flat vector laid out as `W1 [d×h]`, `b1 [h]`,
//! `W2 [h×C]`, `b2 [C]`, all row-major, so the optimizer sees a single
//! contiguous slice.

use crate::rng;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("batch shape mismatch: {0}")]
    Shape(String),
    #[error("label {label} out of range for {classes} classes")]
    Label { label: u32, classes: usize },
    #[error("non-finite input feature at index {0}")]
    NonFiniteInput(usize),
    #[error("empty evaluation set")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub dim: usize,
    pub hidden: usize,
    pub classes: usize,
    pub params: Vec<f64>,
}

impl MlpModel {
    pub fn zeros(dim: usize, hidden: usize, classes: usize) -> Self {
        let n = dim * hidden + hidden + hidden * classes + classes;
        MlpModel { dim, hidden, classes, params: vec![0.0; n] }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.dim * self.hidden;
        let w2 = b1 + self.hidden;
        let b2 = w2 + self.hidden * self.classes;
        (b1, w2, b2)
    }

    pub fn w1(&self) -> &[f64] {
        &self.params[..self.offsets().0]
    }
    pub fn b1(&self) -> &[f64] {
        let (b1, w2, _) = self.offsets();
        &self.params[b1..w2]
    }
    pub fn w2(&self) -> &[f64] {
        let (_, w2, b2) = self.offsets();
        &self.params[w2..b2]
    }
    pub fn b2(&self) -> &[f64] {
        &self.params[self.offsets().2..]
    }

    fn check_batch(&self, x: &[f64], y: &[u32]) -> Result<usize, ModelError> {
        if x.len() != y.len() * self.dim {
            return Err(ModelError::Shape(format!(
                "{} features for {} labels of dimension {}",
                x.len(),
                y.len(),
                self.dim
            )));
        }
        if let Some(&label) = y.iter().find(|&&l| l as usize >= self.classes) {
            return Err(ModelError::Label { label, classes: self.classes });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteInput(i));
        }
        Ok(y.len())
    }

    /// Pre-activations of the hidden layer and the logits, both row-major.
    fn forward_raw(&self, x: &[f64], batch: usize) -> (Vec<f64>, Vec<f64>) {
        let (d, h, c) = (self.dim, self.hidden, self.classes);
        let (w1, b1, w2, b2) = (self.w1(), self.b1(), self.w2(), self.b2());
        let mut pre = Vec::with_capacity(batch * h);
        for _ in 0..batch {
            pre.extend_from_slice(b1);
        }
        for b in 0..batch {
            let row = &mut pre[b * h..(b + 1) * h];
            for (i, &xi) in x[b * d..(b + 1) * d].iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                for (acc, &w) in row.iter_mut().zip(&w1[i * h..(i + 1) * h]) {
                    *acc += xi * w;
                }
            }
        }
        let mut logits = Vec::with_capacity(batch * c);
        for b in 0..batch {
            logits.extend_from_slice(b2);
            let out = &mut logits[b * c..(b + 1) * c];
            for (j, &p) in pre[b * h..(b + 1) * h].iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                for (acc, &w) in out.iter_mut().zip(&w2[j * c..(j + 1) * c]) {
                    *acc += p * w;
                }
            }
        }
        (pre, logits)
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if !x.len().is_multiple_of(self.dim) {
            return Err(ModelError::Shape(format!("{} features not a multiple of {}", x.len(), self.dim)));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteInput(i));
        }
        Ok(self.forward_raw(x, x.len() / self.dim).1)
    }
}

/// Weights uniform on `[-sqrt(3/fan_in), sqrt(3/fan_in)]` (variance
/// `1/fan_in`), biases zero.
pub fn init_mlp(seed: u64, dim: usize, hidden: usize, classes: usize) -> MlpModel {
    let mut model = MlpModel::zeros(dim, hidden, classes);
    let mut r = rng::seeded(seed);
    let (b1, w2, b2) = model.offsets();
    let a1 = (3.0 / dim as f64).sqrt();
    let a2 = (3.0 / hidden as f64).sqrt();
    for w in &mut model.params[..b1] {
        *w = r.gen_range(-a1..=a1);
    }
    for w in &mut model.params[w2..b2] {
        *w = r.gen_range(-a2..=a2);
    }
    model
}

/// Per-row `log-sum-exp(logits) - logit[label]`, with the max subtracted
/// before exponentiating. Also returns the softmax probabilities.
fn cross_entropy(logits: &[f64], y: &[u32], classes: usize) -> (f64, Vec<f64>) {
    let mut probs = vec![0.0; logits.len()];
    let mut total = 0.0;
    for (b, &label) in y.iter().enumerate() {
        let row = &logits[b * classes..(b + 1) * classes];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p = &mut probs[b * classes..(b + 1) * classes];
        let mut sum = 0.0;
        for (pk, &l) in p.iter_mut().zip(row) {
            *pk = (l - max).exp();
            sum += *pk;
        }
        for pk in p.iter_mut() {
            *pk /= sum;
        }
        total += max + sum.ln() - row[label as usize];
    }
    (total / y.len() as f64, probs)
}

/// Mean softmax cross-entropy over the batch, and the logits.
pub fn forward_loss(model: &MlpModel, x: &[f64], y: &[u32]) -> Result<(f64, Vec<f64>), ModelError> {
    let batch = model.check_batch(x, y)?;
    if batch == 0 {
        return Err(ModelError::Empty);
    }
    let (_, logits) = model.forward_raw(x, batch);
    let (loss, _) = cross_entropy(&logits, y, model.classes);
    Ok((loss, logits))
}

/// Loss and its gradient with respect to every parameter, in parameter
/// layout order. The ReLU derivative at exactly zero is taken as 0.
pub fn loss_and_gradient(model: &MlpModel, x: &[f64], y: &[u32]) -> Result<(f64, Vec<f64>), ModelError> {
    let batch = model.check_batch(x, y)?;
    if batch == 0 {
        return Err(ModelError::Empty);
    }
    let (d, h, c) = (model.dim, model.hidden, model.classes);
    let (pre, logits) = model.forward_raw(x, batch);
    let (loss, mut dlogits) = cross_entropy(&logits, y, c);
    let scale = 1.0 / batch as f64;
    for (b, &label) in y.iter().enumerate() {
        dlogits[b * c + label as usize] -= 1.0;
    }
    for v in &mut dlogits {
        *v *= scale;
    }

    let mut grad = vec![0.0; model.param_count()];
    let (ob1, ow2, ob2) = model.offsets();
    let w2 = model.w2();
    let mut dpre = vec![0.0; batch * h];
    {
        let (g_w1b1, g_rest) = grad.split_at_mut(ow2);
        let (g_w2, g_b2) = g_rest.split_at_mut(ob2 - ow2);
        for b in 0..batch {
            let dl = &dlogits[b * c..(b + 1) * c];
            for (gk, &v) in g_b2.iter_mut().zip(dl) {
                *gk += v;
            }
            for j in 0..h {
                let p = pre[b * h + j];
                if p > 0.0 {
                    let w2row = &w2[j * c..(j + 1) * c];
                    let gw2row = &mut g_w2[j * c..(j + 1) * c];
                    let mut back = 0.0;
                    for k in 0..c {
                        gw2row[k] += p * dl[k];
                        back += dl[k] * w2row[k];
                    }
                    dpre[b * h + j] = back;
                }
            }
        }
        let (g_w1, g_b1) = g_w1b1.split_at_mut(ob1);
        for b in 0..batch {
            let dh = &dpre[b * h..(b + 1) * h];
            for (gj, &v) in g_b1.iter_mut().zip(dh) {
                *gj += v;
            }
            for (i, &xi) in x[b * d..(b + 1) * d].iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                for (gw, &v) in g_w1[i * h..(i + 1) * h].iter_mut().zip(dh) {
                    *gw += xi * v;
                }
            }
        }
    }
    Ok((loss, grad))
}

pub fn backward(model: &MlpModel, x: &[f64], y: &[u32]) -> Result<Vec<f64>, ModelError> {
    loss_and_gradient(model, x, y).map(|(_, g)| g)
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Fraction of examples whose argmax logit equals the label.
pub fn accuracy(model: &MlpModel, x: &[f64], y: &[u32]) -> Result<f64, ModelError> {
    let n = model.check_batch(x, y)?;
    if n == 0 {
        return Err(ModelError::Empty);
    }
    let c = model.classes;
    let (_, logits) = model.forward_raw(x, n);
    let correct =
        y.iter().enumerate().filter(|&(b, &label)| argmax(&logits[b * c..(b + 1) * c]) == label as usize).count();
    Ok(correct as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = init_mlp(3, 5, 7, 3);
        assert_eq!(a, init_mlp(3, 5, 7, 3));
        assert!(a.b1().iter().chain(a.b2()).all(|&b| b == 0.0));
        let (a1, a2) = ((3.0f64 / 5.0).sqrt(), (3.0f64 / 7.0).sqrt());
        assert!(a.w1().iter().all(|w| w.abs() <= a1));
        assert!(a.w2().iter().all(|w| w.abs() <= a2));
        assert!(a.w1().iter().any(|&w| w != 0.0));
    }

    #[test]
    fn zero_model_loss_is_log_classes() {
        let m = MlpModel::zeros(3, 4, 10);
        let (loss, _) = forward_loss(&m, &[0.1, 0.2, 0.3], &[4]).unwrap();
        assert_eq!(loss, 10f64.ln());
        let (loss, _) = forward_loss(&m, &[0.1, 0.2, 0.3, 1.0, 1.0, 1.0], &[4, 9]).unwrap();
        assert_eq!(loss, 10f64.ln());
    }

    #[test]
    fn binary_margin_identity() {
        // Logits (margin, 0) via b2 alone: loss = ln(1 + e^-margin).
        let mut m = MlpModel::zeros(2, 1, 2);
        let margin: f64 = 1.7;
        let n = m.params.len();
        m.params[n - 2] = margin;
        let (loss, _) = forward_loss(&m, &[0.3, -0.4], &[0]).unwrap();
        assert!((loss - (1.0 + (-margin).exp()).ln()).abs() < 1e-15);
    }

    #[test]
    fn duplicated_example_has_same_gradient() {
        let m = init_mlp(1, 4, 6, 3);
        let x = [0.3, -0.2, 0.9, 0.1];
        let single = backward(&m, &x, &[2]).unwrap();
        let doubled = backward(&m, &[x, x].concat(), &[2, 2]).unwrap();
        for (a, b) in single.iter().zip(&doubled) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn saturated_softmax_has_vanishing_gradient() {
        let mut m = init_mlp(9, 3, 4, 2);
        let n = m.params.len();
        // Zero the output weights so the logits are exactly b2 = (50, 0).
        for w in &mut m.params[3 * 4 + 4..n - 2] {
            *w = 0.0;
        }
        m.params[n - 2] = 50.0;
        let g = backward(&m, &[0.5, 0.5, 0.5], &[0]).unwrap();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "{norm}");
    }

    #[test]
    fn accuracy_tie_breaks_to_class_zero() {
        let m = MlpModel::zeros(1, 2, 10);
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<u32> = (0..20).map(|i| i % 10).collect();
        assert_eq!(accuracy(&m, &x, &y).unwrap(), 0.1);
        assert_eq!(accuracy(&m, &[], &[]), Err(ModelError::Empty));
    }

    #[test]
    fn perfect_model_scores_one() {
        let mut m = MlpModel::zeros(1, 1, 2);
        // hidden = relu(x); logit1 = hidden, logit0 = 0.5
        m.params = vec![1.0, 0.0, 0.0, 1.0, 0.5, 0.0];
        let acc = accuracy(&m, &[0.0, 0.2, 2.0, 3.0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn rejects_bad_batches() {
        let m = MlpModel::zeros(2, 2, 2);
        assert!(matches!(forward_loss(&m, &[0.0], &[0]), Err(ModelError::Shape(_))));
        assert!(matches!(forward_loss(&m, &[0.0, 0.0], &[5]), Err(ModelError::Label { .. })));
        assert!(matches!(forward_loss(&m, &[f64::NAN, 0.0], &[0]), Err(ModelError::NonFiniteInput(0))));
    }
}
