// A run described in JSON, the same document `evo-opt evolve --config` reads,
// with one built-in task and one custom task.
//
//     cargo run --release --example run_config

use evo_optimizer::config::RunConfig;
use evo_optimizer::evolution::Evolution;

const CONFIG: &str = r#"{
  "population_size": 8,
  "generations": 3,
  "seeds_per_eval": 1,
  "master_seed": 7,
  "mutation": { "numeric": [0.4, 0.1], "structural": [0.3, 0.05], "flag": [0.1, 0.02] },
  "tasks": [
    "blobs-easy",
    {
      "name": "wide-blobs",
      "source": { "blobs": { "seed": 3, "n_per_class": 80, "dim": 12, "classes": 5, "sigma": 0.5 } },
      "hidden_width": 24,
      "batch_size": 32,
      "steps": 150
    }
  ]
}"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::from_json(CONFIG)?;
    println!("config digest {}", config.ga.digest());
    let result = Evolution::new(config.ga)?.run()?;
    for (task, f) in &result.best_fitness.per_task_mean {
        println!("{task:<12} {f:.4}");
    }
    println!("aggregate    {:.4}", result.best_fitness.aggregate);

    match RunConfig::from_json(r#"{"population_size": 8, "popsize": 8}"#) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
