use super::mlp::{accuracy, init_mlp, loss_and_gradient};
use super::PreparedTask;
use crate::genome::Genome;
use crate::interpreter::{Optimizer, DEFAULT_CLIP};
use crate::rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Training loss above this marks a run as divergent.
pub const LOSS_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceReason {
    NanInf,
    LossExceeded50,
    NumericError,
}

/// Outcome of one training run. `test_accuracy` is present exactly when the
/// run did not diverge.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainRun {
    /// Training loss of each step's batch, measured before the update.
    pub loss_trace: Vec<f64>,
    pub test_accuracy: Option<f64>,
    pub divergence: Option<DivergenceReason>,
}

impl TrainRun {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    fn diverge(loss_trace: Vec<f64>, reason: DivergenceReason) -> TrainRun {
        TrainRun { loss_trace, test_accuracy: None, divergence: Some(reason) }
    }
}

pub fn train(genome: &Genome, task: &PreparedTask, seed: u64) -> TrainRun {
    train_with_clip(genome, task, seed, DEFAULT_CLIP)
}

/// Trains a fresh model from `seed` with the genome's optimizer. Pure in
/// its arguments.
pub fn train_with_clip(genome: &Genome, task: &PreparedTask, seed: u64, clip: f64) -> TrainRun {
    let spec = &task.spec;
    let data = &task.dataset;
    let mut model = init_mlp(rng::derive_seed(&[seed, 0]), data.dim, spec.hidden_width, data.classes);
    let mut optimizer = match Optimizer::new(genome, model.param_count(), spec.steps as u64) {
        Ok(opt) => opt.with_clip(clip),
        Err(_) => return TrainRun::diverge(Vec::new(), DivergenceReason::NumericError),
    };
    let mut order_rng = rng::derived(&[seed, 1]);
    let mut order: Vec<usize> = (0..data.n_train()).collect();
    let mut cursor = order.len();

    let batch = spec.batch_size;
    let mut bx = Vec::with_capacity(batch * data.dim);
    let mut by = Vec::with_capacity(batch);
    let mut trace = Vec::with_capacity(spec.steps);

    for _ in 0..spec.steps {
        if cursor + batch > order.len() {
            order.shuffle(&mut order_rng);
            cursor = 0;
        }
        bx.clear();
        by.clear();
        for &i in &order[cursor..cursor + batch] {
            bx.extend_from_slice(data.train_row(i));
            by.push(data.train_y[i]);
        }
        cursor += batch;

        let (loss, grad) = match loss_and_gradient(&model, &bx, &by) {
            Ok(v) => v,
            Err(_) => return TrainRun::diverge(trace, DivergenceReason::NumericError),
        };
        trace.push(loss);
        if !loss.is_finite() {
            return TrainRun::diverge(trace, DivergenceReason::NanInf);
        }
        if loss > LOSS_LIMIT {
            return TrainRun::diverge(trace, DivergenceReason::LossExceeded50);
        }
        if optimizer.step(&mut model.params, &grad).is_err() {
            return TrainRun::diverge(trace, DivergenceReason::NumericError);
        }
        if model.params.iter().any(|p| !p.is_finite()) {
            return TrainRun::diverge(trace, DivergenceReason::NanInf);
        }
    }

    match accuracy(&model, &data.test_x, &data.test_y) {
        Ok(acc) => TrainRun { loss_trace: trace, test_accuracy: Some(acc), divergence: None },
        Err(_) => TrainRun::diverge(trace, DivergenceReason::NumericError),
    }
}
