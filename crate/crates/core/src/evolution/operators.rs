//! Genetic operators: seeding, selection, recombination and mutation.

use super::GaConfig;
use crate::genome::{canonicalize_with, random_genome, Genome, HyperBounds, Preset, PrimitiveKind, Term, MAX_TERMS};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Presets seated at the front of every initial population, in this order.
pub const SEED_PRESETS: [Preset; 4] = [Preset::Sgd, Preset::Adam, Preset::AdamW, Preset::RmsProp];

/// Per-field probabilities for one generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationRates {
    pub numeric: f64,
    pub structural: f64,
    pub flag: f64,
}

/// Start and end values of each rate; rates move linearly between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MutationSchedule {
    pub numeric: (f64, f64),
    pub structural: (f64, f64),
    pub flag: (f64, f64),
}

impl Default for MutationSchedule {
    fn default() -> Self {
        MutationSchedule { numeric: (0.30, 0.10), structural: (0.20, 0.05), flag: (0.10, 0.02) }
    }
}

/// Standard deviations of the Gaussian numeric mutations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MutationScales {
    /// For `log10_lr`, `log10_eps` and `log10_wd`.
    pub log10: f64,
    pub beta: f64,
    pub coeff: f64,
}

impl Default for MutationScales {
    fn default() -> Self {
        MutationScales { log10: 0.25, beta: 0.02, coeff: 0.25 }
    }
}

/// Presets first, then random genomes up to the population size.
pub fn init_population<R: Rng + ?Sized>(
    population_size: usize,
    bounds: &HyperBounds,
    rng: &mut R,
) -> Result<Vec<Genome>, String> {
    if population_size < SEED_PRESETS.len() {
        return Err(format!("population_size {population_size} cannot hold the {} seed presets", SEED_PRESETS.len()));
    }
    let mut pop: Vec<Genome> =
        SEED_PRESETS.iter().map(|p| canonicalize_with(&p.genome(), bounds).expect("presets are valid")).collect();
    while pop.len() < population_size {
        pop.push(random_genome(rng, bounds));
    }
    Ok(pop)
}

/// Fittest of `k` distinct uniformly drawn members; ties go to the smallest
/// index.
pub fn tournament_select<R: Rng + ?Sized>(fitnesses: &[f64], k: usize, rng: &mut R) -> usize {
    assert!(k >= 1 && k <= fitnesses.len(), "tournament size {k} for {} members", fitnesses.len());
    let mut best: Option<usize> = None;
    for i in rand::seq::index::sample(rng, fitnesses.len(), k).iter() {
        best = match best {
            Some(b) if fitnesses[b] > fitnesses[i] || (fitnesses[b] == fitnesses[i] && b < i) => Some(b),
            _ => Some(i),
        };
    }
    best.unwrap()
}

/// Single-point crossover on the term lists and uniform crossover on every
/// other field. Equal-length parents share one cut point; otherwise each
/// parent gets its own cut, redrawn until the child has 1–4 terms.
pub fn crossover<R: Rng + ?Sized>(p1: &Genome, p2: &Genome, bounds: &HyperBounds, rng: &mut R) -> Genome {
    let aligned = p1.terms.len() == p2.terms.len();
    let terms = loop {
        let i = rng.gen_range(0..=p1.terms.len());
        let j = if aligned { i } else { rng.gen_range(0..=p2.terms.len()) };
        let len = i + p2.terms.len() - j;
        if (1..=MAX_TERMS).contains(&len) {
            break p1.terms[..i].iter().chain(&p2.terms[j..]).copied().collect::<Vec<Term>>();
        }
    };
    let child = Genome {
        terms,
        log10_lr: if rng.gen() { p1.log10_lr } else { p2.log10_lr },
        beta1: if rng.gen() { p1.beta1 } else { p2.beta1 },
        beta2: if rng.gen() { p1.beta2 } else { p2.beta2 },
        log10_eps: if rng.gen() { p1.log10_eps } else { p2.log10_eps },
        log10_wd: if rng.gen() { p1.log10_wd } else { p2.log10_wd },
        flags: crate::genome::Flags {
            use_momentum: if rng.gen() { p1.flags.use_momentum } else { p2.flags.use_momentum },
            use_second_moment: if rng.gen() { p1.flags.use_second_moment } else { p2.flags.use_second_moment },
            bias_correction: if rng.gen() { p1.flags.bias_correction } else { p2.flags.bias_correction },
            grad_clip: if rng.gen() { p1.flags.grad_clip } else { p2.flags.grad_clip },
        },
        schedule: crate::genome::Schedule {
            warmup_steps: if rng.gen() { p1.schedule.warmup_steps } else { p2.schedule.warmup_steps },
            cosine_decay: if rng.gen() { p1.schedule.cosine_decay } else { p2.schedule.cosine_decay },
        },
    };
    canonicalize_with(&child, bounds).expect("crossover children are non-empty and finite")
}

/// Linearly interpolated rates for `generation` out of `config.generations`.
pub fn mutation_rates(generation: usize, config: &GaConfig) -> MutationRates {
    let frac = if config.generations <= 1 { 0.0 } else { generation as f64 / (config.generations - 1) as f64 };
    let lerp = |(r0, r1): (f64, f64)| r0 + (r1 - r0) * frac;
    let s = &config.mutation;
    MutationRates { numeric: lerp(s.numeric), structural: lerp(s.structural), flag: lerp(s.flag) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuralOp {
    Add,
    Remove,
    Replace,
}

/// Structural edits allowed on a genome with `len` terms.
pub fn structural_options(len: usize) -> Vec<StructuralOp> {
    let mut ops = Vec::with_capacity(3);
    if len < MAX_TERMS {
        ops.push(StructuralOp::Add);
    }
    if len > 1 {
        ops.push(StructuralOp::Remove);
    }
    ops.push(StructuralOp::Replace);
    ops
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, x: f64, sigma: f64, (lo, hi): (f64, f64)) -> f64 {
    let noise = Normal::new(0.0, sigma).map_or(0.0, |n| n.sample(rng));
    (x + noise).clamp(lo, hi)
}

/// Applies numeric, structural and flag mutations and returns the canonical
/// result, together with the structural edit performed (if any).
pub fn mutate_traced<R: Rng + ?Sized>(
    genome: &Genome,
    rates: MutationRates,
    scales: &MutationScales,
    bounds: &HyperBounds,
    rng: &mut R,
) -> (Genome, Option<StructuralOp>) {
    let mut g = genome.clone();

    if rng.gen_bool(rates.numeric) {
        g.log10_lr = gaussian(rng, g.log10_lr, scales.log10, bounds.log10_lr);
    }
    if rng.gen_bool(rates.numeric) {
        g.beta1 = gaussian(rng, g.beta1, scales.beta, bounds.beta1);
    }
    if rng.gen_bool(rates.numeric) {
        g.beta2 = gaussian(rng, g.beta2, scales.beta, bounds.beta2);
    }
    if rng.gen_bool(rates.numeric) {
        g.log10_eps = gaussian(rng, g.log10_eps, scales.log10, bounds.log10_eps);
    }
    if let Some(wd) = g.log10_wd {
        if rng.gen_bool(rates.numeric) {
            g.log10_wd = Some(gaussian(rng, wd, scales.log10, bounds.log10_wd));
        }
    }
    for i in 0..g.terms.len() {
        if rng.gen_bool(rates.numeric) {
            g.terms[i].coeff = gaussian(rng, g.terms[i].coeff, scales.coeff, bounds.coeff);
        }
    }

    let mut op = None;
    if rng.gen_bool(rates.structural) {
        let options = structural_options(g.terms.len());
        let chosen = options[rng.gen_range(0..options.len())];
        match chosen {
            StructuralOp::Add => {
                let kind = PrimitiveKind::ALL[rng.gen_range(0..PrimitiveKind::ALL.len())];
                let (lo, hi) = bounds.coeff;
                let coeff = if lo == hi { lo } else { rng.gen_range(lo..=hi) };
                g.terms.push(Term::new(kind, coeff));
            }
            StructuralOp::Remove => {
                let i = rng.gen_range(0..g.terms.len());
                g.terms.remove(i);
            }
            StructuralOp::Replace => {
                let i = rng.gen_range(0..g.terms.len());
                let others: Vec<PrimitiveKind> =
                    PrimitiveKind::ALL.into_iter().filter(|&k| k != g.terms[i].kind).collect();
                g.terms[i].kind = others[rng.gen_range(0..others.len())];
            }
        }
        op = Some(chosen);
    }

    for flag in [
        &mut g.flags.use_momentum,
        &mut g.flags.use_second_moment,
        &mut g.flags.bias_correction,
        &mut g.flags.grad_clip,
        &mut g.schedule.cosine_decay,
    ] {
        if rng.gen_bool(rates.flag) {
            *flag = !*flag;
        }
    }
    if rng.gen_bool(rates.flag) {
        g.schedule.warmup_steps = bounds.warmup_choices[rng.gen_range(0..bounds.warmup_choices.len())];
    }

    (canonicalize_with(&g, bounds).expect("mutation keeps genomes non-empty and finite"), op)
}

pub fn mutate<R: Rng + ?Sized>(
    genome: &Genome,
    rates: MutationRates,
    scales: &MutationScales,
    bounds: &HyperBounds,
    rng: &mut R,
) -> Genome {
    mutate_traced(genome, rates, scales, bounds, rng).0
}

/// Occurrences of each primitive over the raw term lists, indexed by
/// [`PrimitiveKind::index`].
pub fn count_primitives(population: &[Genome]) -> [usize; 7] {
    let mut counts = [0; 7];
    for t in population.iter().flat_map(|g| &g.terms) {
        counts[t.kind.index()] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{canonicalize, preset, validate};
    use crate::rng;

    fn rates(r: f64) -> MutationRates {
        MutationRates { numeric: r, structural: r, flag: r }
    }

    #[test]
    fn population_starts_with_presets() {
        let b = HyperBounds::default();
        let pop = init_population(50, &b, &mut rng::seeded(1)).unwrap();
        assert_eq!(pop.len(), 50);
        for (g, p) in pop.iter().zip(SEED_PRESETS) {
            assert_eq!(*g, p.genome());
        }
        assert_eq!(init_population(4, &b, &mut rng::seeded(1)).unwrap().len(), 4);
        assert!(init_population(3, &b, &mut rng::seeded(1)).is_err());
        assert_eq!(pop, init_population(50, &b, &mut rng::seeded(1)).unwrap());
    }

    #[test]
    fn full_tournament_is_argmax() {
        let f = [0.1, 0.9, 0.5, 0.2];
        for s in 0..20 {
            assert_eq!(tournament_select(&f, 4, &mut rng::seeded(s)), 1);
        }
    }

    #[test]
    fn equal_fitness_picks_smallest_sampled() {
        let f = [0.5; 10];
        for s in 0..50 {
            let mut r1 = rng::seeded(s);
            let mut r2 = rng::seeded(s);
            let sampled = rand::seq::index::sample(&mut r1, 10, 3).into_vec();
            assert_eq!(tournament_select(&f, 3, &mut r2), *sampled.iter().min().unwrap());
        }
    }

    #[test]
    fn crossover_with_self_is_identity() {
        let b = HyperBounds::default();
        let mut r = rng::seeded(3);
        for _ in 0..50 {
            let g = random_genome(&mut r, &b);
            assert_eq!(crossover(&g, &g, &b, &mut r), g);
        }
    }

    #[test]
    fn crossover_fields_come_from_parents() {
        let b = HyperBounds::default();
        let (sgd, adam) = (preset(Preset::Sgd), preset(Preset::Adam));
        let mut r = rng::seeded(4);
        for _ in 0..200 {
            let c = crossover(&sgd, &adam, &b, &mut r);
            for (x, a, bb) in [
                (c.log10_lr, sgd.log10_lr, adam.log10_lr),
                (c.beta1, sgd.beta1, adam.beta1),
                (c.beta2, sgd.beta2, adam.beta2),
                (c.log10_eps, sgd.log10_eps, adam.log10_eps),
            ] {
                assert!(x == a || x == bb);
            }
            assert!(c.log10_wd == sgd.log10_wd || c.log10_wd == adam.log10_wd);
            assert!(
                c.flags.bias_correction == sgd.flags.bias_correction
                    || c.flags.bias_correction == adam.flags.bias_correction
            );
        }
    }

    #[test]
    fn crossover_lengths_stay_in_range() {
        let b = HyperBounds::default();
        let mut r = rng::seeded(5);
        for _ in 0..1000 {
            let p1 = random_genome(&mut r, &b);
            let p2 = random_genome(&mut r, &b);
            let c = crossover(&p1, &p2, &b, &mut r);
            assert!((1..=4).contains(&c.terms.len()));
            assert!(validate(&c).is_empty());
        }
    }

    #[test]
    fn rates_interpolate() {
        let mut cfg = GaConfig { generations: 11, ..GaConfig::default() };
        cfg.mutation.numeric = (0.3, 0.1);
        assert_eq!(mutation_rates(0, &cfg).numeric, 0.3);
        assert_eq!(mutation_rates(10, &cfg).numeric, 0.1);
        assert!((mutation_rates(5, &cfg).numeric - 0.2).abs() < 1e-15);
        cfg.generations = 1;
        assert_eq!(mutation_rates(0, &cfg), MutationRates { numeric: 0.3, structural: 0.2, flag: 0.1 });
    }

    #[test]
    fn zero_rates_only_canonicalize() {
        let b = HyperBounds::default();
        let mut g = preset(Preset::Evolved);
        g.terms.push(Term::new(PrimitiveKind::SignGrad, 0.1));
        let out = mutate(&g, rates(0.0), &MutationScales::default(), &b, &mut rng::seeded(0));
        assert_eq!(out, canonicalize(&g).unwrap());
    }

    #[test]
    fn full_genomes_never_grow() {
        assert_eq!(structural_options(4), vec![StructuralOp::Remove, StructuralOp::Replace]);
        assert_eq!(structural_options(1), vec![StructuralOp::Add, StructuralOp::Replace]);
        let b = HyperBounds::default();
        let mut g = preset(Preset::Sgd);
        g.terms = [PrimitiveKind::Grad, PrimitiveKind::Momentum, PrimitiveKind::RmsNorm, PrimitiveKind::SignGrad]
            .map(|k| Term::new(k, 1.0))
            .to_vec();
        let g = canonicalize(&g).unwrap();
        let mut r = rng::seeded(6);
        for _ in 0..500 {
            let (out, op) = mutate_traced(&g, rates(1.0), &MutationScales::default(), &b, &mut r);
            assert!(matches!(op, Some(StructuralOp::Remove | StructuralOp::Replace)));
            assert!(out.terms.len() <= 4);
        }
    }

    #[test]
    fn mutated_adam_stays_valid() {
        let b = HyperBounds::default();
        let cfg = GaConfig::default();
        let mut r = rng::seeded(7);
        let adam = preset(Preset::Adam);
        for i in 0..10_000 {
            let out = mutate(&adam, mutation_rates(i % cfg.generations, &cfg), &cfg.scales, &b, &mut r);
            assert!(validate(&out).is_empty(), "{:?}", validate(&out));
        }
    }

    #[test]
    fn primitive_counts() {
        let pop: Vec<Genome> = SEED_PRESETS.iter().map(|p| p.genome()).collect();
        let c = count_primitives(&pop);
        assert_eq!(c, [1, 0, 1, 2, 0, 0, 0]);
        assert_eq!(count_primitives(&[]), [0; 7]);
        let b = HyperBounds::default();
        let mut r = rng::seeded(8);
        let pop: Vec<Genome> = (0..30).map(|_| random_genome(&mut r, &b)).collect();
        let total: usize = pop.iter().map(|g| g.terms.len()).sum();
        assert_eq!(count_primitives(&pop).iter().sum::<usize>(), total);
    }

    #[test]
    fn stronger_tournaments_favor_the_top() {
        // With distinct fitnesses the top member wins iff it is sampled,
        // which happens with probability k / N.
        let n = 16;
        let f: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut r = rng::seeded(9);
        let draws = 20_000;
        let mut wins = [0usize; 2];
        for (slot, k) in [1usize, 4].into_iter().enumerate() {
            wins[slot] = (0..draws).filter(|_| tournament_select(&f, k, &mut r) == n - 1).count();
        }
        let p1 = wins[0] as f64 / draws as f64;
        let p4 = wins[1] as f64 / draws as f64;
        assert!(p4 > p1);
        assert!((p1 - 1.0 / 16.0).abs() < 0.01, "{p1}");
        assert!((p4 - 4.0 / 16.0).abs() < 0.015, "{p4}");
    }
}
