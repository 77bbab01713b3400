// Driving the interpreter by hand on a small quadratic bowl.
//
//     cargo run --example interpreter_step

use evo_optimizer::genome::{canonicalize, Genome, Preset, PrimitiveKind, Term};
use evo_optimizer::interpreter::{init_state, step, Optimizer, ScheduleContext};

// f(w) = 0.5 * sum(k * w_k^2), badly conditioned on purpose
fn grad(w: &[f64]) -> Vec<f64> {
    w.iter().enumerate().map(|(k, x)| (1.0 + 10.0 * k as f64) * x).collect()
}

fn loss(w: &[f64]) -> f64 {
    w.iter().enumerate().map(|(k, x)| 0.5 * (1.0 + 10.0 * k as f64) * x * x).sum()
}

fn descend(genome: &Genome, steps: u64) -> Result<f64, Box<dyn std::error::Error>> {
    let mut w = vec![1.0; 4];
    let mut opt = Optimizer::new(genome, w.len(), steps)?;
    for _ in 0..steps {
        let g = grad(&w);
        opt.step(&mut w, &g)?;
    }
    Ok(loss(&w))
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut sign_sgd = Preset::Sgd.genome();
    sign_sgd.terms = vec![Term::new(PrimitiveKind::SignGrad, 1.0)];
    sign_sgd.log10_lr = -2.0;

    let mut fast_adam = Preset::Adam.genome();
    fast_adam.log10_lr = -1.0;

    println!("start loss {:.4}", loss(&[1.0; 4]));
    for (name, g) in [
        ("sgd lr 0.01", {
            let mut g = Preset::Sgd.genome();
            g.log10_lr = -2.0;
            g
        }),
        ("sign lr 0.01", sign_sgd),
        ("adam lr 0.1", fast_adam),
        ("evolved", Preset::Evolved.genome()),
    ] {
        println!("{name:<14} loss after 300 steps {:.3e}", descend(&g, 300)?);
    }

    // The pure form returns new parameters and state and touches nothing.
    let adam = Preset::Adam.genome();
    let state = init_state(&adam, 2)?;
    let (w1, s1) = step(&adam, &state, &[0.5, -0.5], &[2.0, -0.1], ScheduleContext { total_steps: 10, step: 1 }, 1.0)?;
    println!("\none pure adam step: {w1:?}, t = {}", s1.t);

    // Duplicate terms are fine; they act like their sum.
    let mut dup = Preset::Adam.genome();
    dup.terms = vec![Term::new(PrimitiveKind::AdamTerm, 0.5), Term::new(PrimitiveKind::AdamTerm, 0.5)];
    assert_eq!(descend(&dup, 50)?, descend(&canonicalize(&dup)?, 50)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
