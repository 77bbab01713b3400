// Trains the blobs MLP with each preset and scores the runs.
//
//     cargo run --release --example train_blobs

use evo_optimizer::fitness::run_fitness;
use evo_optimizer::genome::Preset;
use evo_optimizer::tasks::{train, TaskSpec};
use std::path::Path;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let task = TaskSpec::blobs().prepare(Path::new("."))?;
    println!("task {}: {} train / {} test rows", task.name(), task.dataset.n_train(), task.dataset.n_test());
    println!("{:<13} {:>10} {:>10} {:>9} {:>8}", "optimizer", "first loss", "last loss", "accuracy", "fitness");
    for p in Preset::ALL {
        let run = train(&p.genome(), &task, 0);
        let fitness = run_fitness(&run)?;
        match run.test_accuracy {
            Some(acc) => println!(
                "{:<13} {:>10.4} {:>10.4} {:>9.3} {:>8.4}",
                p.name(),
                run.loss_trace[0],
                run.loss_trace[run.loss_trace.len() - 1],
                acc,
                fitness
            ),
            None => println!("{:<13} diverged ({:?})", p.name(), run.divergence),
        }
    }

    let mut hot = Preset::Sgd.genome();
    hot.log10_lr = 3.0;
    let run = train(&hot, &task, 0);
    println!(
        "sgd at lr 1e3: {:?} after {} steps, fitness {}",
        run.divergence,
        run.loss_trace.len(),
        run_fitness(&run)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
