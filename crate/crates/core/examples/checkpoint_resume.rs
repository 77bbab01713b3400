// Stop a run, write a checkpoint, pick it up again.
//
//     cargo run --release --example checkpoint_resume

use evo_optimizer::evolution::{load_checkpoint, save_checkpoint, Evolution, GaConfig, TaskEntry};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = GaConfig {
        population_size: 8,
        generations: 5,
        tasks: vec![TaskEntry::Builtin("blobs-easy".into())],
        seeds_per_eval: 1,
        ..GaConfig::default()
    };
    let dir = std::env::temp_dir().join(format!("evo-opt-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("checkpoint.json");

    let mut first = Evolution::new(config.clone())?;
    first.run_until(2, |_| Ok(()))?;
    save_checkpoint(&first.checkpoint(), &path)?;
    println!("stopped after generation {}, checkpoint {} bytes", first.generation(), std::fs::metadata(&path)?.len());

    let ckpt = load_checkpoint(&path, &config.digest())?;
    let resumed = Evolution::resume(config.clone(), ckpt)?.run()?;
    let straight = Evolution::new(config.clone())?.run()?;
    println!("resumed run best {:.4}", resumed.best_fitness.aggregate);
    assert_eq!(resumed.log.to_csv(), straight.log.to_csv());
    println!("log identical to an uninterrupted run");

    // A checkpoint only loads under the config that wrote it.
    let other = GaConfig { master_seed: 1, ..config };
    if let Err(e) = load_checkpoint(&path, &other.digest()) {
        println!("as expected: {e}");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
