// A short GA run on blobs, printing the population as it changes.
//
//     cargo run --release --example evolve_blobs

use evo_optimizer::evolution::{Evolution, GaConfig, TaskEntry};
use evo_optimizer::genome::{encode, PrimitiveKind};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = GaConfig {
        population_size: 12,
        generations: 6,
        tasks: vec![TaskEntry::Builtin("blobs".into())],
        seeds_per_eval: 1,
        master_seed: 42,
        ..GaConfig::default()
    };
    let mut evo = Evolution::new(config)?;
    let header: Vec<&str> = PrimitiveKind::ALL.iter().map(|k| k.name()).collect();
    println!("gen  best    mean    {}", header.join(" "));
    evo.run_until(6, |e| {
        let r = &e.log().generations[e.generation() - 1];
        let counts: Vec<String> =
            r.primitive_counts.iter().zip(&header).map(|(c, h)| format!("{c:>w$}", w = h.len())).collect();
        println!("{:>3}  {:.4}  {:.4}  {}", r.generation, r.best_fitness, r.mean_fitness, counts.join(" "));
        Ok(())
    })?;

    let result = evo.result();
    println!("\nbest from generation {}:", result.best_generation);
    for (task, f) in &result.best_fitness.per_task_mean {
        println!("  {task}: {f:.4}");
    }
    print!("{}", encode(&result.best));
    print!("\n{}", result.log.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
