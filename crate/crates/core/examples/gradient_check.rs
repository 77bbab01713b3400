// Backprop against central finite differences on a random MLP.
//
//     cargo run --example gradient_check

use evo_optimizer::tasks::{forward_loss, init_mlp, loss_and_gradient};
use rand::{Rng, SeedableRng};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let (dim, hidden, classes, batch) = (5, 6, 3, 4);
    let model = init_mlp(1, dim, hidden, classes);
    let x: Vec<f64> = (0..batch * dim).map(|_| r.gen_range(-1.0..1.0)).collect();
    let y: Vec<u32> = (0..batch).map(|_| r.gen_range(0..classes as u32)).collect();

    let (loss, analytic) = loss_and_gradient(&model, &x, &y)?;
    println!("loss {loss:.6}, {} parameters", model.param_count());

    let h = 1e-5;
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        probe.params[i] = model.params[i] + h;
        let up = forward_loss(&probe, &x, &y)?.0;
        probe.params[i] = model.params[i] - h;
        let down = forward_loss(&probe, &x, &y)?.0;
        probe.params[i] = model.params[i];
        let numeric = (up - down) / (2.0 * h);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    println!("max relative error {worst:.2e}");
    assert!(worst < 1e-4);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
