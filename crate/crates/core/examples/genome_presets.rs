// Built-in optimizers as genomes, the file format, and canonicalization.
//
//     cargo run --example genome_presets

use evo_optimizer::genome::{canonicalize, decode, encode, preset, validate, Preset, PrimitiveKind, Term};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for p in Preset::ALL {
        let g = p.genome();
        let terms: Vec<String> = g.terms.iter().map(|t| format!("{}*{}", t.coeff, t.kind.name())).collect();
        println!(
            "{:<13} lr {:<8.1e} terms [{}]  wd {:.1e}  warmup {}",
            p.name(),
            g.lr(),
            terms.join(" + "),
            g.weight_decay(),
            g.schedule.warmup_steps
        );
        assert!(validate(&g).is_empty());
    }

    let text = encode(&preset(Preset::Evolved));
    println!("\nevolved genome file:\n{text}");
    assert_eq!(decode(&text)?, preset(Preset::Evolved));

    // The published genome before merging had repeated kinds.
    let mut raw = preset(Preset::Evolved);
    raw.terms = vec![
        Term::new(PrimitiveKind::SignGrad, 0.40),
        Term::new(PrimitiveKind::AdamTerm, 2.00),
        Term::new(PrimitiveKind::SignGrad, 0.33),
        Term::new(PrimitiveKind::AdamTerm, 1.63),
    ];
    let merged = canonicalize(&raw)?;
    for t in &merged.terms {
        println!("merged {:<9} {}", t.kind.name(), t.coeff);
    }
    assert_eq!(merged, preset(Preset::Evolved));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
