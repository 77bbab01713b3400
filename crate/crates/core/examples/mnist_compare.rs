// Baseline table on the MNIST subset. Needs data/mnist or EVO_OPT_DATA_DIR.
//
//     cargo run --release --example mnist_compare -- 500 3

use evo_optimizer::evolution::GaConfig;
use evo_optimizer::fitness::genome_fitness;
use evo_optimizer::genome::Preset;
use evo_optimizer::interpreter::DEFAULT_CLIP;
use evo_optimizer::tasks::{default_data_dir, TaskSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).filter_map(|a| a.parse::<usize>().ok());
    let steps = args.next().unwrap_or(100);
    let seeds = args.next().unwrap_or(1);

    let task = TaskSpec::mnist().with_steps(steps).prepare(&default_data_dir())?;
    let seeds = GaConfig { seeds_per_eval: seeds, ..GaConfig::default() }.eval_seeds();
    println!("mnist subset, {} train rows, {steps} steps, {} seed(s)", task.dataset.n_train(), seeds.len());
    for p in [Preset::Sgd, Preset::SgdMomentum, Preset::RmsProp, Preset::Adam, Preset::AdamW, Preset::Evolved] {
        let f = genome_fitness(&p.genome(), std::slice::from_ref(&task), &seeds, DEFAULT_CLIP)?;
        let runs: Vec<String> = f.per_task["mnist"].iter().map(|v| format!("{v:.4}")).collect();
        println!("{:<13} {:.4}  [{}]", p.name(), f.aggregate, runs.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
