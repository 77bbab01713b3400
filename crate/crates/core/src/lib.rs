//! Evolutionary search over deep-learning optimizers.
//!
//! An optimizer is a [`genome::Genome`]: a weighted sum of up to four
//! primitive update terms (raw gradient, momentum, RMS-normalized gradient,
//! Adam ratio, sign, unit gradient, Nesterov lookahead) together with its
//! hyperparameters, moment flags and learning-rate schedule. The
//! [`interpreter`] executes a genome as an update rule, [`tasks`] trains a
//! small MLP with it, [`fitness`] scores the runs, and [`evolution`] searches
//! genome space with a genetic algorithm.

pub mod cli;
pub mod config;
pub mod evolution;
pub mod fitness;
pub mod genome;
pub mod interpreter;
pub mod rng;
pub mod serial;
pub mod tasks;
