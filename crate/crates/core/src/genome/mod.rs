//! Optimizer genomes: a weighted sum of primitive update terms plus the
//! hyperparameters, state flags and learning-rate schedule that drive them.

mod codec;
mod presets;

pub use codec::{decode, encode, DecodeError, FORMAT_VERSION};
pub use presets::{preset, Preset};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;

/// The closed catalog of update primitives. Declaration order is the
/// canonical order used for sorting and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Grad,
    Momentum,
    RmsNorm,
    AdamTerm,
    SignGrad,
    UnitGrad,
    Nesterov,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 7] = [
        PrimitiveKind::Grad,
        PrimitiveKind::Momentum,
        PrimitiveKind::RmsNorm,
        PrimitiveKind::AdamTerm,
        PrimitiveKind::SignGrad,
        PrimitiveKind::UnitGrad,
        PrimitiveKind::Nesterov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::Grad => "grad",
            PrimitiveKind::Momentum => "momentum",
            PrimitiveKind::RmsNorm => "rmsnorm",
            PrimitiveKind::AdamTerm => "adamterm",
            PrimitiveKind::SignGrad => "signgrad",
            PrimitiveKind::UnitGrad => "unitgrad",
            PrimitiveKind::Nesterov => "nesterov",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the term reads the first-moment buffer `m`.
    pub fn needs_momentum(self) -> bool {
        matches!(self, PrimitiveKind::Momentum | PrimitiveKind::AdamTerm | PrimitiveKind::Nesterov)
    }

    /// Whether the term reads the second-moment buffer `v`.
    pub fn needs_second_moment(self) -> bool {
        matches!(self, PrimitiveKind::RmsNorm | PrimitiveKind::AdamTerm)
    }
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub kind: PrimitiveKind,
    pub coeff: f64,
}

impl Term {
    pub fn new(kind: PrimitiveKind, coeff: f64) -> Self {
        Term { kind, coeff }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    pub use_momentum: bool,
    pub use_second_moment: bool,
    pub bias_correction: bool,
    pub grad_clip: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub warmup_steps: u32,
    pub cosine_decay: bool,
}

/// Complete heritable description of an optimizer.
///
/// Learning rate, epsilon and weight decay are stored as base-10 logarithms.
/// `log10_wd = None` means no weight decay at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genome {
    pub terms: Vec<Term>,
    pub log10_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub log10_eps: f64,
    pub log10_wd: Option<f64>,
    pub flags: Flags,
    pub schedule: Schedule,
}

pub const MAX_TERMS: usize = 4;

impl Genome {
    pub fn lr(&self) -> f64 {
        10f64.powf(self.log10_lr)
    }

    pub fn eps(&self) -> f64 {
        10f64.powf(self.log10_eps)
    }

    pub fn weight_decay(&self) -> f64 {
        self.log10_wd.map_or(0.0, |w| 10f64.powf(w))
    }

    pub fn needs_momentum(&self) -> bool {
        self.terms.iter().any(|t| t.kind.needs_momentum())
    }

    pub fn needs_second_moment(&self) -> bool {
        self.terms.iter().any(|t| t.kind.needs_second_moment())
    }

    /// Hex SHA-256 of the encoded genome. Structurally equal genomes share a
    /// digest.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(encode(self).as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Inclusive ranges for random generation, mutation and clamping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperBounds {
    pub coeff: (f64, f64),
    pub log10_lr: (f64, f64),
    pub beta1: (f64, f64),
    pub beta2: (f64, f64),
    pub log10_eps: (f64, f64),
    pub log10_wd: (f64, f64),
    pub warmup_choices: Vec<u32>,
}

impl Default for HyperBounds {
    fn default() -> Self {
        HyperBounds {
            coeff: (0.0, 5.0),
            log10_lr: (-5.0, -1.0),
            beta1: (0.5, 0.9999),
            beta2: (0.5, 0.9999),
            log10_eps: (-10.0, -4.0),
            log10_wd: (-6.0, -2.0),
            warmup_choices: vec![0, 50, 100, 200, 500],
        }
    }
}

impl HyperBounds {
    /// Checks that every range is ordered and finite and that betas stay
    /// inside the open unit interval.
    pub fn check(&self) -> Result<(), String> {
        let ranges = [
            ("coeff", self.coeff),
            ("log10_lr", self.log10_lr),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("log10_eps", self.log10_eps),
            ("log10_wd", self.log10_wd),
        ];
        for (name, (lo, hi)) in ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(format!("bounds.{name}: need finite min <= max, got [{lo}, {hi}]"));
            }
        }
        for (name, (lo, hi)) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if lo <= 0.0 || hi >= 1.0 {
                return Err(format!("bounds.{name}: must lie inside (0, 1), got [{lo}, {hi}]"));
            }
        }
        if self.warmup_choices.is_empty() {
            return Err("bounds.warmup_choices: must not be empty".into());
        }
        Ok(())
    }
}

/// One broken invariant: which field, and what it should satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl Violation {
    fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Violation { field: field.into(), constraint: constraint.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenomeError {
    #[error("genome has no terms")]
    EmptyTerms,
    #[error("genome field {0} is not finite")]
    NonFinite(String),
    #[error("unknown preset `{name}`; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },
}

/// Lists every invariant the genome breaks. Empty means valid.
pub fn validate(genome: &Genome) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = genome.terms.len();
    if !(1..=MAX_TERMS).contains(&n) {
        out.push(Violation::new("terms", format!("length must be in 1..={MAX_TERMS}, got {n}")));
    }
    for (i, t) in genome.terms.iter().enumerate() {
        if !t.coeff.is_finite() {
            out.push(Violation::new(format!("terms[{i}].coeff"), "must be finite"));
        }
    }
    for (name, value) in
        [("log10_lr", genome.log10_lr), ("log10_eps", genome.log10_eps), ("log10_wd", genome.log10_wd.unwrap_or(0.0))]
    {
        if !value.is_finite() {
            out.push(Violation::new(name, "must be finite"));
        }
    }
    for (name, value) in [("beta1", genome.beta1), ("beta2", genome.beta2)] {
        if !(value > 0.0 && value < 1.0) {
            out.push(Violation::new(name, format!("must lie in the open interval (0, 1), got {value}")));
        }
    }
    if genome.needs_momentum() && !genome.flags.use_momentum {
        out.push(Violation::new("flags.use_momentum", "required by a momentum-reading term"));
    }
    if genome.needs_second_moment() && !genome.flags.use_second_moment {
        out.push(Violation::new("flags.use_second_moment", "required by a second-moment-reading term"));
    }
    out
}

/// Sums coefficients of equal kinds (in order of appearance) and returns the
/// terms sorted by kind.
pub fn merge_terms(terms: &[Term]) -> Vec<Term> {
    let mut merged: BTreeMap<PrimitiveKind, f64> = BTreeMap::new();
    for t in terms {
        merged.entry(t.kind).and_modify(|c| *c += t.coeff).or_insert(t.coeff);
    }
    merged.into_iter().map(|(kind, coeff)| Term { kind, coeff }).collect()
}

pub fn canonicalize(genome: &Genome) -> Result<Genome, GenomeError> {
    canonicalize_with(genome, &HyperBounds::default())
}

/// Merges duplicate kinds, sorts terms, clamps scalars to `bounds` and turns
/// on any moment buffer a surviving term reads. Idempotent.
pub fn canonicalize_with(genome: &Genome, bounds: &HyperBounds) -> Result<Genome, GenomeError> {
    if genome.terms.is_empty() {
        return Err(GenomeError::EmptyTerms);
    }
    if let Some(i) = genome.terms.iter().position(|t| !t.coeff.is_finite()) {
        return Err(GenomeError::NonFinite(format!("terms[{i}].coeff")));
    }
    for (name, value) in [
        ("log10_lr", genome.log10_lr),
        ("beta1", genome.beta1),
        ("beta2", genome.beta2),
        ("log10_eps", genome.log10_eps),
        ("log10_wd", genome.log10_wd.unwrap_or(0.0)),
    ] {
        if !value.is_finite() {
            return Err(GenomeError::NonFinite(name.into()));
        }
    }

    let clamp = |x: f64, (lo, hi): (f64, f64)| x.clamp(lo, hi);
    let terms: Vec<Term> = merge_terms(&genome.terms)
        .into_iter()
        .map(|t| Term { kind: t.kind, coeff: clamp(t.coeff, bounds.coeff) })
        .collect();
    let mut out = Genome {
        log10_lr: clamp(genome.log10_lr, bounds.log10_lr),
        beta1: clamp(genome.beta1, bounds.beta1),
        beta2: clamp(genome.beta2, bounds.beta2),
        log10_eps: clamp(genome.log10_eps, bounds.log10_eps),
        log10_wd: genome.log10_wd.map(|w| clamp(w, bounds.log10_wd)),
        flags: genome.flags,
        schedule: genome.schedule,
        terms,
    };
    out.flags.use_momentum |= out.needs_momentum();
    out.flags.use_second_moment |= out.needs_second_moment();
    Ok(out)
}

/// Draws a fresh canonical genome: 1–4 terms with kinds sampled with
/// replacement, uniform scalars inside `bounds`, fair-coin flags.
pub fn random_genome<R: Rng + ?Sized>(rng: &mut R, bounds: &HyperBounds) -> Genome {
    let uniform = |rng: &mut R, (lo, hi): (f64, f64)| if lo == hi { lo } else { rng.gen_range(lo..=hi) };
    let n_terms = rng.gen_range(1..=MAX_TERMS);
    let terms = (0..n_terms)
        .map(|_| {
            let kind = PrimitiveKind::ALL[rng.gen_range(0..PrimitiveKind::ALL.len())];
            Term { kind, coeff: uniform(rng, bounds.coeff) }
        })
        .collect();
    let raw = Genome {
        terms,
        log10_lr: uniform(rng, bounds.log10_lr),
        beta1: uniform(rng, bounds.beta1),
        beta2: uniform(rng, bounds.beta2),
        log10_eps: uniform(rng, bounds.log10_eps),
        log10_wd: Some(uniform(rng, bounds.log10_wd)),
        flags: Flags {
            use_momentum: rng.gen(),
            use_second_moment: rng.gen(),
            bias_correction: rng.gen(),
            grad_clip: rng.gen(),
        },
        schedule: Schedule {
            warmup_steps: bounds.warmup_choices[rng.gen_range(0..bounds.warmup_choices.len())],
            cosine_decay: rng.gen(),
        },
    };
    canonicalize_with(&raw, bounds).expect("random genomes are non-empty and finite")
}
