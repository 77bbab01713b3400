//! Scalar fitness of a training run and its aggregation over tasks and
//! seeds.
//!
//! A stable run scores `acc + min(0.05, 0.05 * max(0, 1 - mean_loss))`,
//! where `mean_loss` averages the last 50 recorded training losses; a
//! divergent run scores -1. A genome's fitness is the mean over tasks of the
//! mean over seeds.

use crate::genome::Genome;
use crate::serial;
use crate::tasks::{train_with_clip, PreparedTask, TrainRun};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const DIVERGED_FITNESS: f64 = -1.0;
pub const LOSS_BONUS_WEIGHT: f64 = 0.05;
pub const LOSS_BONUS_CAP: f64 = 0.05;
pub const LOSS_WINDOW: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitnessError {
    #[error("non-diverged run has an empty loss trace")]
    EmptyTrace,
    #[error("non-diverged run has no test accuracy")]
    MissingAccuracy,
    #[error("fitness needs at least one task and one seed")]
    EmptyGrid,
    #[error("task name `{0}` appears more than once")]
    DuplicateTask(String),
}

/// Fitness of one run.
pub fn run_fitness(run: &TrainRun) -> Result<f64, FitnessError> {
    if run.diverged() {
        return Ok(DIVERGED_FITNESS);
    }
    let acc = run.test_accuracy.ok_or(FitnessError::MissingAccuracy)?;
    let trace = &run.loss_trace;
    if trace.is_empty() {
        return Err(FitnessError::EmptyTrace);
    }
    let tail = &trace[trace.len().saturating_sub(LOSS_WINDOW)..];
    let mean_loss = tail.iter().sum::<f64>() / tail.len() as f64;
    Ok(acc + loss_bonus(mean_loss))
}

/// The capped training-loss bonus; zero once the mean loss reaches 1.
pub fn loss_bonus(mean_loss: f64) -> f64 {
    (LOSS_BONUS_WEIGHT * (1.0 - mean_loss).max(0.0)).min(LOSS_BONUS_CAP)
}

/// Correctly rounded sum (Shewchuk's algorithm, as in Python's `math.fsum`).
/// The result does not depend on the order of `values`.
pub fn exact_sum(values: &[f64]) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for &v in values {
        let mut x = v;
        let mut kept = 0;
        for i in 0..partials.len() {
            let mut y = partials[i];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }

    let Some(mut hi) = partials.pop() else { return 0.0 };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Round-half-even correction when the remaining partials push the
    // discarded part past the halfway point.
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

pub fn mean(values: &[f64]) -> f64 {
    exact_sum(values) / values.len() as f64
}

/// Per-task and aggregate fitness of one genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessBreakdown {
    /// Per-seed run fitness, in the order the seeds were given.
    pub per_task: BTreeMap<String, Vec<f64>>,
    pub per_task_mean: BTreeMap<String, f64>,
    pub aggregate: f64,
}

impl FitnessBreakdown {
    /// Builds the breakdown from a task-major grid of run fitness values.
    pub fn from_grid(grid: Vec<(String, Vec<f64>)>) -> Result<Self, FitnessError> {
        if grid.is_empty() || grid.iter().any(|(_, v)| v.is_empty()) {
            return Err(FitnessError::EmptyGrid);
        }
        let mut per_task = BTreeMap::new();
        let mut per_task_mean = BTreeMap::new();
        for (name, values) in grid {
            per_task_mean.insert(name.clone(), mean(&values));
            if per_task.insert(name.clone(), values).is_some() {
                return Err(FitnessError::DuplicateTask(name));
            }
        }
        let aggregate = mean(&per_task_mean.values().copied().collect::<Vec<_>>());
        Ok(FitnessBreakdown { per_task, per_task_mean, aggregate })
    }

    pub fn to_json(&self) -> String {
        serial::to_json_text(self)
    }
}

/// Trains the genome on every (task, seed) pair and aggregates. Runs are
/// evaluated in parallel but assembled in (task, seed) order.
pub fn genome_fitness(
    genome: &Genome,
    tasks: &[PreparedTask],
    seeds: &[u64],
    clip: f64,
) -> Result<FitnessBreakdown, FitnessError> {
    if tasks.is_empty() || seeds.is_empty() {
        return Err(FitnessError::EmptyGrid);
    }
    let pairs: Vec<(usize, u64)> = (0..tasks.len()).flat_map(|t| seeds.iter().map(move |&s| (t, s))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(t, s)| run_fitness(&train_with_clip(genome, &tasks[t], s, clip)))
        .collect::<Result<_, _>>()?;
    let grid = tasks
        .iter()
        .zip(values.chunks(seeds.len()))
        .map(|(task, chunk)| (task.name().to_string(), chunk.to_vec()))
        .collect();
    FitnessBreakdown::from_grid(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::DivergenceReason;
    use proptest::prelude::*;

    fn run(acc: f64, trace: Vec<f64>) -> TrainRun {
        TrainRun { loss_trace: trace, test_accuracy: Some(acc), divergence: None }
    }

    #[test]
    fn bonus_examples() {
        assert_eq!(run_fitness(&run(0.95, vec![0.4; 60])).unwrap(), 0.98);
        assert_eq!(run_fitness(&run(0.99, vec![0.0; 60])).unwrap(), 1.04);
        assert_eq!(run_fitness(&run(0.5, vec![1.0; 60])).unwrap(), 0.5);
        assert_eq!(run_fitness(&run(0.5, vec![3.0; 60])).unwrap(), 0.5);
    }

    #[test]
    fn only_the_last_fifty_losses_count() {
        let mut trace = vec![10.0; 100];
        trace.extend(vec![0.4; 50]);
        assert_eq!(run_fitness(&run(0.95, trace)).unwrap(), 0.98);
        // Short traces average everything available.
        assert_eq!(run_fitness(&run(0.95, vec![0.4; 10])).unwrap(), 0.98);
    }

    #[test]
    fn diverged_is_minus_one() {
        let r = TrainRun {
            loss_trace: vec![1.0, f64::NAN],
            test_accuracy: None,
            divergence: Some(DivergenceReason::NanInf),
        };
        assert_eq!(run_fitness(&r).unwrap(), -1.0);
        assert_eq!(run_fitness(&run(0.9, vec![])), Err(FitnessError::EmptyTrace));
    }

    #[test]
    fn aggregation_examples() {
        let one = FitnessBreakdown::from_grid(vec![("a".into(), vec![0.93])]).unwrap();
        assert_eq!(one.aggregate, 0.93);
        let two = FitnessBreakdown::from_grid(vec![("a".into(), vec![0.9]), ("b".into(), vec![0.7])]).unwrap();
        assert_eq!(two.aggregate, 0.8);
        let div = FitnessBreakdown::from_grid(vec![("a".into(), vec![-1.0, 0.9])]).unwrap();
        assert!((div.per_task_mean["a"] + 0.05).abs() < 1e-15);
        assert!(FitnessBreakdown::from_grid(vec![("a".into(), vec![1.0]), ("a".into(), vec![1.0])]).is_err());
        assert_eq!(FitnessBreakdown::from_grid(vec![]), Err(FitnessError::EmptyGrid));
    }

    #[test]
    fn exact_sum_cases() {
        assert_eq!(exact_sum(&[]), 0.0);
        assert_eq!(exact_sum(&[0.1; 10]), 1.0);
        assert_eq!(exact_sum(&[1e100, 1.0, -1e100, 1e-100]), 1.0);
        assert_eq!(exact_sum(&[1.0, 1e-16, 1e-16]), 1.0000000000000002);
    }

    proptest! {
        #[test]
        fn bonus_is_bounded_and_monotone(acc in 0.0..=1.0f64, l1 in 0.0..5.0f64, l2 in 0.0..5.0f64) {
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            let f_lo = run_fitness(&run(acc, vec![lo; 50])).unwrap();
            let f_hi = run_fitness(&run(acc, vec![hi; 50])).unwrap();
            prop_assert!(f_lo >= f_hi);
            let bonus = f_lo - acc;
            prop_assert!((0.0..=0.05 + 1e-15).contains(&bonus));
            if lo >= 1.0 {
                prop_assert_eq!(f_lo, acc);
            }
        }

        #[test]
        fn fitness_monotone_in_accuracy(a1 in 0.0..=1.0f64, a2 in 0.0..=1.0f64, l in 0.0..2.0f64) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            prop_assert!(run_fitness(&run(lo, vec![l; 50])).unwrap() <= run_fitness(&run(hi, vec![l; 50])).unwrap());
        }

        #[test]
        fn exact_sum_ignores_order(mut v in prop::collection::vec(-1.0..1.05f64, 1..20), seed in any::<u64>()) {
            let before = exact_sum(&v);
            use rand::seq::SliceRandom;
            v.shuffle(&mut crate::rng::seeded(seed));
            prop_assert_eq!(exact_sum(&v).to_bits(), before.to_bits());
        }
    }
}
