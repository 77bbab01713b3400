use super::{Flags, Genome, GenomeError, PrimitiveKind, Schedule, Term};
use std::fmt;
use std::str::FromStr;

/// Built-in optimizers: the hand-designed baselines and the published
/// evolved genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Sgd,
    SgdMomentum,
    Adam,
    AdamW,
    RmsProp,
    Evolved,
}

impl Preset {
    pub const ALL: [Preset; 6] =
        [Preset::Sgd, Preset::SgdMomentum, Preset::Adam, Preset::AdamW, Preset::RmsProp, Preset::Evolved];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Sgd => "sgd",
            Preset::SgdMomentum => "sgd_momentum",
            Preset::Adam => "adam",
            Preset::AdamW => "adamw",
            Preset::RmsProp => "rmsprop",
            Preset::Evolved => "evolved",
        }
    }

    pub fn genome(self) -> Genome {
        preset(self)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = GenomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| GenomeError::UnknownPreset {
            name: s.to_string(),
            valid: Preset::ALL.map(Preset::name).join(", "),
        })
    }
}

fn single(kind: PrimitiveKind, lr: f64) -> Genome {
    Genome {
        terms: vec![Term::new(kind, 1.0)],
        log10_lr: lr.log10(),
        beta1: 0.9,
        beta2: 0.999,
        log10_eps: -8.0,
        log10_wd: None,
        flags: Flags::default(),
        schedule: Schedule::default(),
    }
}

pub fn preset(which: Preset) -> Genome {
    match which {
        Preset::Sgd => single(PrimitiveKind::Grad, 0.1),
        Preset::SgdMomentum => {
            let mut g = single(PrimitiveKind::Momentum, 0.1);
            g.flags.use_momentum = true;
            g
        }
        Preset::Adam => {
            let mut g = single(PrimitiveKind::AdamTerm, 1e-3);
            g.flags = Flags { use_momentum: true, use_second_moment: true, bias_correction: true, grad_clip: false };
            g
        }
        Preset::AdamW => Genome { log10_wd: Some(-2.0), ..preset(Preset::Adam) },
        Preset::RmsProp => {
            let mut g = single(PrimitiveKind::RmsNorm, 1e-3);
            g.beta2 = 0.99;
            g.flags.use_second_moment = true;
            g
        }
        Preset::Evolved => Genome {
            terms: vec![Term::new(PrimitiveKind::AdamTerm, 3.63), Term::new(PrimitiveKind::SignGrad, 0.73)],
            log10_lr: 1.2e-3f64.log10(),
            beta1: 0.855,
            beta2: 0.936,
            log10_eps: -8.0,
            log10_wd: Some(9.7e-4f64.log10()),
            flags: Flags { use_momentum: true, use_second_moment: true, bias_correction: false, grad_clip: false },
            schedule: Schedule { warmup_steps: 100, cosine_decay: true },
        },
    }
}
