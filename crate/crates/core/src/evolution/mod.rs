//! The genetic algorithm: preset-seeded initialization, tournament
//! selection with elitism, crossover, decaying mutation, and per-generation
//! logging.
//!
//! Runs are bitwise reproducible from the config. Every random stream is
//! derived from the master seed and a fixed tuple (breeding streams from the
//! generation index, evaluation seeds from the seed index), and fitness is
//! cached by genome digest, so the thread count never changes results.

mod checkpoint;
mod log;
mod operators;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use log::{EvolutionLog, GenerationRecord};
pub use operators::{
    count_primitives, crossover, init_population, mutate, mutate_traced, mutation_rates, structural_options,
    tournament_select, MutationRates, MutationScales, MutationSchedule, StructuralOp, SEED_PRESETS,
};

use crate::fitness::{self, genome_fitness, FitnessBreakdown, FitnessError};
use crate::genome::{Genome, HyperBounds};
use crate::interpreter::DEFAULT_CLIP;
use crate::rng;
use crate::serial;
use crate::tasks::{default_data_dir, PreparedTask, TaskError, TaskSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;

// Stream labels mixed into derived seeds.
const STREAM_INIT: u64 = 1;
const STREAM_BREED: u64 = 2;
const STREAM_EVAL: u64 = 3;

/// A task in a config: a built-in name or a full specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskEntry {
    Builtin(String),
    Custom(TaskSpec),
}

impl TaskEntry {
    pub fn resolve(&self) -> Result<TaskSpec, TaskError> {
        match self {
            TaskEntry::Builtin(name) => TaskSpec::builtin(name),
            TaskEntry::Custom(spec) => Ok(spec.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_k: usize,
    pub elite_count: usize,
    pub mutation: MutationSchedule,
    pub scales: MutationScales,
    pub bounds: HyperBounds,
    pub tasks: Vec<TaskEntry>,
    pub seeds_per_eval: usize,
    pub master_seed: u64,
    pub clip_threshold: f64,
    /// Where IDX tasks without their own directory look for data. Not part
    /// of the config digest.
    pub data_dir: Option<PathBuf>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            generations: 50,
            tournament_k: 4,
            elite_count: 3,
            mutation: MutationSchedule::default(),
            scales: MutationScales::default(),
            bounds: HyperBounds::default(),
            tasks: vec![TaskEntry::Builtin("blobs".into())],
            seeds_per_eval: 2,
            master_seed: 0,
            clip_threshold: DEFAULT_CLIP,
            data_dir: None,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), String> {
        let n = self.population_size;
        if n < SEED_PRESETS.len() {
            return Err(format!("population_size must be >= {}, got {n}", SEED_PRESETS.len()));
        }
        if n < self.elite_count + 1 {
            return Err(format!("population_size {n} must exceed elite_count {}", self.elite_count));
        }
        if self.tournament_k == 0 || self.tournament_k > n {
            return Err(format!("tournament_k must be in 1..={n}, got {}", self.tournament_k));
        }
        if self.generations == 0 {
            return Err("generations must be >= 1".into());
        }
        if self.seeds_per_eval == 0 {
            return Err("seeds_per_eval must be >= 1".into());
        }
        if self.tasks.is_empty() {
            return Err("at least one task is required".into());
        }
        if !(self.clip_threshold > 0.0 && self.clip_threshold.is_finite()) {
            return Err(format!("clip_threshold must be positive, got {}", self.clip_threshold));
        }
        let m = &self.mutation;
        for (name, (r0, r1)) in [("numeric", m.numeric), ("structural", m.structural), ("flag", m.flag)] {
            if !((0.0..=1.0).contains(&r0) && (0.0..=1.0).contains(&r1)) {
                return Err(format!("mutation.{name} rates must lie in [0, 1], got ({r0}, {r1})"));
            }
        }
        let s = &self.scales;
        if [s.log10, s.beta, s.coeff].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err("mutation scales must be finite and non-negative".into());
        }
        self.bounds.check()
    }

    /// SHA-256 over the canonical encoding of every field except `data_dir`.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("data_dir");
        }
        let hash = Sha256::digest(serial::to_json_text(&value).as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn task_specs(&self) -> Result<Vec<TaskSpec>, TaskError> {
        self.tasks.iter().map(TaskEntry::resolve).collect()
    }

    /// Per-run training seeds, shared by every genome and task.
    pub fn eval_seeds(&self) -> Vec<u64> {
        (0..self.seeds_per_eval as u64).map(|s| rng::derive_seed(&[self.master_seed, STREAM_EVAL, s])).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("generation {generation}, member {member}: {source}")]
    Evaluation { generation: usize, member: usize, source: FitnessError },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

/// Highest-fitness genome seen so far, with where it was first seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestSoFar {
    pub genome: Genome,
    pub fitness: FitnessBreakdown,
    pub generation: usize,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub best: Genome,
    pub best_fitness: FitnessBreakdown,
    pub best_generation: usize,
    pub log: EvolutionLog,
}

/// A resumable GA run.
pub struct Evolution {
    config: GaConfig,
    digest: String,
    tasks: Vec<PreparedTask>,
    seeds: Vec<u64>,
    pool: Option<rayon::ThreadPool>,
    generation: usize,
    population: Vec<Genome>,
    cache: BTreeMap<String, FitnessBreakdown>,
    log: EvolutionLog,
    best: Option<BestSoFar>,
}

impl Evolution {
    pub fn new(config: GaConfig) -> Result<Self, EvolutionError> {
        config.validate().map_err(EvolutionError::Config)?;
        let population = init_population(
            config.population_size,
            &config.bounds,
            &mut rng::derived(&[config.master_seed, STREAM_INIT]),
        )
        .map_err(EvolutionError::Config)?;
        Self::assemble(config, 0, population, BTreeMap::new(), EvolutionLog::default(), None)
    }

    /// Continues from a checkpoint taken under the same config.
    pub fn resume(config: GaConfig, checkpoint: Checkpoint) -> Result<Self, EvolutionError> {
        config.validate().map_err(EvolutionError::Config)?;
        let expected = config.digest();
        if checkpoint.config_digest != expected {
            return Err(CheckpointError::DigestMismatch {
                path: PathBuf::new(),
                expected,
                found: checkpoint.config_digest,
            }
            .into());
        }
        if checkpoint.population.len() != config.population_size {
            return Err(EvolutionError::Config("checkpoint population size does not match config".into()));
        }
        Self::assemble(
            config,
            checkpoint.generation,
            checkpoint.population,
            checkpoint.cache,
            checkpoint.log,
            checkpoint.best,
        )
    }

    fn assemble(
        config: GaConfig,
        generation: usize,
        population: Vec<Genome>,
        cache: BTreeMap<String, FitnessBreakdown>,
        log: EvolutionLog,
        best: Option<BestSoFar>,
    ) -> Result<Self, EvolutionError> {
        let data_dir = config.data_dir.clone().unwrap_or_else(default_data_dir);
        let tasks = config.task_specs()?.iter().map(|t| t.prepare(&data_dir)).collect::<Result<Vec<_>, _>>()?;
        let mut names: Vec<&str> = tasks.iter().map(PreparedTask::name).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(EvolutionError::Config("task names must be unique".into()));
        }
        Ok(Evolution {
            digest: config.digest(),
            seeds: config.eval_seeds(),
            config,
            tasks,
            pool: None,
            generation,
            population,
            cache,
            log,
            best,
        })
    }

    /// Bounds the number of concurrent evaluations. Results do not depend on it.
    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().ok();
        self
    }

    pub fn config(&self) -> &GaConfig {
        &self.config
    }

    pub fn tasks(&self) -> &[PreparedTask] {
        &self.tasks
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &[Genome] {
        &self.population
    }

    pub fn log(&self) -> &EvolutionLog {
        &self.log
    }

    pub fn best(&self) -> Option<&BestSoFar> {
        self.best.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.generation >= self.config.generations
    }

    /// Cached fitness of a genome, if it has been evaluated.
    pub fn cached_fitness(&self, genome: &Genome) -> Option<&FitnessBreakdown> {
        self.cache.get(&genome.digest())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            config_digest: self.digest.clone(),
            master_seed: self.config.master_seed,
            generation: self.generation,
            population: self.population.clone(),
            cache: self.cache.clone(),
            log: self.log.clone(),
            best: self.best.clone(),
        }
    }

    fn evaluate_population(&mut self) -> Result<Vec<f64>, EvolutionError> {
        let digests: Vec<String> = self.population.iter().map(Genome::digest).collect();
        let mut pending: Vec<(usize, &String)> = Vec::new();
        for (i, d) in digests.iter().enumerate() {
            if !self.cache.contains_key(d) && !pending.iter().any(|(_, p)| *p == d) {
                pending.push((i, d));
            }
        }
        let (tasks, seeds, clip, population) = (&self.tasks, &self.seeds, self.config.clip_threshold, &self.population);
        let run = || -> Vec<(usize, Result<FitnessBreakdown, FitnessError>)> {
            pending.par_iter().map(|&(i, _)| (i, genome_fitness(&population[i], tasks, seeds, clip))).collect()
        };
        let results = match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        };
        for (member, result) in results {
            let breakdown =
                result.map_err(|source| EvolutionError::Evaluation { generation: self.generation, member, source })?;
            self.cache.insert(digests[member].clone(), breakdown);
        }
        Ok(digests.iter().map(|d| self.cache[d].aggregate).collect())
    }

    /// Evaluates the current generation, logs it, and breeds the next one.
    /// Returns the new log record.
    pub fn step_generation(&mut self) -> Result<&GenerationRecord, EvolutionError> {
        assert!(!self.is_finished(), "evolution already finished");
        let g = self.generation;
        let fitnesses = self.evaluate_population()?;

        let best_idx = argmax_first(&fitnesses);
        let best_fitness = fitnesses[best_idx];
        self.log.generations.push(GenerationRecord {
            generation: g,
            best_fitness,
            mean_fitness: fitness::mean(&fitnesses),
            primitive_counts: count_primitives(&self.population),
            best_genome: self.population[best_idx].clone(),
        });
        if self.best.as_ref().is_none_or(|b| best_fitness > b.fitness.aggregate) {
            let genome = self.population[best_idx].clone();
            let fitness = self.cache[&genome.digest()].clone();
            self.best = Some(BestSoFar { genome, fitness, generation: g });
        }

        if g + 1 < self.config.generations {
            self.population = self.breed(&fitnesses, g);
        }
        self.generation += 1;
        Ok(self.log.generations.last().unwrap())
    }

    fn breed(&self, fitnesses: &[f64], g: usize) -> Vec<Genome> {
        let cfg = &self.config;
        let mut r = rng::derived(&[cfg.master_seed, STREAM_BREED, g as u64]);
        let mut order: Vec<usize> = (0..fitnesses.len()).collect();
        order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]).then(a.cmp(&b)));
        let mut next: Vec<Genome> = order[..cfg.elite_count].iter().map(|&i| self.population[i].clone()).collect();
        let rates = mutation_rates(g, cfg);
        while next.len() < cfg.population_size {
            let a = tournament_select(fitnesses, cfg.tournament_k, &mut r);
            let b = tournament_select(fitnesses, cfg.tournament_k, &mut r);
            let child = crossover(&self.population[a], &self.population[b], &cfg.bounds, &mut r);
            next.push(mutate(&child, rates, &cfg.scales, &cfg.bounds, &mut r));
        }
        next
    }

    /// Runs generations until `generation` have been evaluated (or the run
    /// ends), calling `after` with each new record.
    pub fn run_until(
        &mut self,
        generation: usize,
        mut after: impl FnMut(&Evolution) -> Result<(), EvolutionError>,
    ) -> Result<(), EvolutionError> {
        while self.generation < generation.min(self.config.generations) {
            self.step_generation()?;
            after(self)?;
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<EvolutionResult, EvolutionError> {
        self.run_until(self.config.generations, |_| Ok(()))?;
        Ok(self.result())
    }

    /// Best genome and log so far. Panics before the first generation.
    pub fn result(&self) -> EvolutionResult {
        let best = self.best.as_ref().expect("at least one generation evaluated");
        EvolutionResult {
            best: best.genome.clone(),
            best_fitness: best.fitness.clone(),
            best_generation: best.generation,
            log: self.log.clone(),
        }
    }
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Runs a full evolution with the default thread pool.
pub fn evolve(config: GaConfig) -> Result<EvolutionResult, EvolutionError> {
    Evolution::new(config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::validate;

    fn tiny(generations: usize) -> GaConfig {
        let mut blobs = TaskSpec::blobs().with_steps(40);
        blobs.name = "blobs40".into();
        GaConfig {
            population_size: 8,
            generations,
            tasks: vec![TaskEntry::Custom(blobs)],
            seeds_per_eval: 1,
            master_seed: 3,
            ..GaConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig { population_size: 3, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { population_size: 4, elite_count: 4, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { tournament_k: 51, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { generations: 0, ..GaConfig::default() }.validate().is_err());
        let mut bad = GaConfig::default();
        bad.mutation.flag = (1.5, 0.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn digest_ignores_data_dir() {
        let a = GaConfig::default();
        let b = GaConfig { data_dir: Some("/elsewhere".into()), ..GaConfig::default() };
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), GaConfig { master_seed: 1, ..GaConfig::default() }.digest());
    }

    #[test]
    fn single_generation_picks_initial_argmax() {
        let mut evo = Evolution::new(tiny(1)).unwrap();
        let initial = evo.population().to_vec();
        let result = evo.run().unwrap();
        assert_eq!(result.log.generations.len(), 1);
        let fit: Vec<f64> = initial.iter().map(|g| evo.cached_fitness(g).unwrap().aggregate).collect();
        assert_eq!(result.best, initial[argmax_first(&fit)]);
    }

    #[test]
    fn elitism_and_invariants_over_generations() {
        let mut evo = Evolution::new(tiny(5)).unwrap();
        let mut populations = vec![evo.population().to_vec()];
        evo.run_until(5, |e| {
            populations.push(e.population().to_vec());
            Ok(())
        })
        .unwrap();
        let curve = evo.log().best_fitness_curve();
        assert!(curve.windows(2).all(|w| w[1] >= w[0]), "{curve:?}");
        for pop in &populations {
            assert_eq!(pop.len(), 8);
            assert!(pop.iter().all(|g| validate(g).is_empty()));
        }
        for r in &evo.log().generations {
            let terms: usize = populations[r.generation].iter().map(|g| g.terms.len()).sum();
            assert_eq!(r.primitive_counts.iter().sum::<usize>(), terms);
        }
    }
}
