use crate::genome::{Genome, PrimitiveKind};
use crate::serial::fmt_f64;
use serde::{Deserialize, Serialize};

/// Summary of one evaluated generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Term occurrences per primitive, indexed by `PrimitiveKind::index`.
    pub primitive_counts: [usize; 7],
    pub best_genome: Genome,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvolutionLog {
    pub generations: Vec<GenerationRecord>,
}

impl EvolutionLog {
    pub fn best_fitness_curve(&self) -> Vec<f64> {
        self.generations.iter().map(|r| r.best_fitness).collect()
    }

    /// Plot-ready CSV: one row per generation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness");
        for kind in PrimitiveKind::ALL {
            out.push_str(",count_");
            out.push_str(kind.name());
        }
        out.push('\n');
        for r in &self.generations {
            out.push_str(&format!("{},{},{}", r.generation, fmt_f64(r.best_fitness), fmt_f64(r.mean_fitness)));
            for c in r.primitive_counts {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}
