// Prints the warmup plus cosine learning-rate curve as CSV.
//
//     cargo run --example lr_schedule > schedule.csv

use evo_optimizer::genome::Preset;
use evo_optimizer::interpreter::{scheduled_lr, ScheduleContext};
use evo_optimizer::serial::fmt_f64;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let total = 500;
    let evolved = Preset::Evolved.genome();
    let mut warmup_only = evolved.clone();
    warmup_only.schedule.cosine_decay = false;

    println!("step,evolved,warmup_only");
    for t in (0..=total).step_by(25) {
        let ctx = ScheduleContext { total_steps: total, step: t };
        println!("{t},{},{}", fmt_f64(scheduled_lr(&evolved, ctx)), fmt_f64(scheduled_lr(&warmup_only, ctx)));
    }
    let end = scheduled_lr(&evolved, ScheduleContext { total_steps: total, step: total });
    assert_eq!(end, 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
