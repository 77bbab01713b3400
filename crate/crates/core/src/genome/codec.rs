//! Genome file format: JSON with sorted keys and 17-significant-digit floats.

use super::{validate, Flags, Genome, Schedule, Term, Violation};
use crate::serial;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenomeDoc {
    terms: Vec<Term>,
    log10_lr: f64,
    beta1: f64,
    beta2: f64,
    log10_eps: f64,
    log10_wd: Option<f64>,
    flags: Flags,
    schedule: Schedule,
    format_version: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum DecodeError {
    #[error("malformed genome document: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unsupported genome format_version {found} (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("invalid genome: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

pub fn encode(genome: &Genome) -> String {
    let doc = GenomeDoc {
        terms: genome.terms.clone(),
        log10_lr: genome.log10_lr,
        beta1: genome.beta1,
        beta2: genome.beta2,
        log10_eps: genome.log10_eps,
        log10_wd: genome.log10_wd,
        flags: genome.flags,
        schedule: genome.schedule,
        format_version: FORMAT_VERSION,
    };
    serial::to_json_text(&doc)
}

pub fn decode(text: &str) -> Result<Genome, DecodeError> {
    let doc: GenomeDoc = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(DecodeError::Version { found: doc.format_version });
    }
    let genome = Genome {
        terms: doc.terms,
        log10_lr: doc.log10_lr,
        beta1: doc.beta1,
        beta2: doc.beta2,
        log10_eps: doc.log10_eps,
        log10_wd: doc.log10_wd,
        flags: doc.flags,
        schedule: doc.schedule,
    };
    let violations = validate(&genome);
    if !violations.is_empty() {
        return Err(DecodeError::Invalid(violations));
    }
    Ok(genome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::tests::arb_raw_genome;
    use crate::genome::{canonicalize, preset, Preset};
    use proptest::prelude::*;

    #[test]
    fn sgd_document_shape() {
        let text = encode(&preset(Preset::Sgd));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["terms"].as_array().unwrap().len(), 1);
        assert_eq!(v["terms"][0]["kind"], "grad");
        assert_eq!(v["terms"][0]["coeff"].as_f64(), Some(1.0));
        assert_eq!(v["format_version"], 1);
        assert!(v["log10_wd"].is_null());
        assert!(text.contains("\"coeff\": 1.0000000000000000e0"));
    }

    #[test]
    fn evolved_round_trips() {
        let g = preset(Preset::Evolved);
        assert_eq!(decode(&encode(&g)).unwrap(), g);
    }

    #[test]
    fn unknown_kind_is_named() {
        let text = encode(&preset(Preset::Sgd)).replace("\"grad\"", "\"foo\"");
        let err = decode(&text).unwrap_err();
        assert!(matches!(err, DecodeError::Syntax(_)));
        let msg = err.to_string();
        assert!(msg.contains("foo") && msg.contains("line"), "{msg}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = encode(&preset(Preset::Sgd)).replacen('{', "{\n  \"extra\": 1,", 1);
        assert!(decode(&text).unwrap_err().to_string().contains("extra"));
    }

    #[test]
    fn out_of_range_value_rejected() {
        let mut g = preset(Preset::Adam);
        g.beta1 = 1.5;
        match decode(&encode(&g)) {
            Err(DecodeError::Invalid(v)) => assert_eq!(v[0].field, "beta1"),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let text = encode(&preset(Preset::Sgd)).replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(decode(&text), Err(DecodeError::Version { found: 2 })));
    }

    #[test]
    fn encoding_is_deterministic() {
        assert_eq!(encode(&preset(Preset::AdamW)), encode(&preset(Preset::AdamW)));
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(g in arb_raw_genome()) {
            let g = canonicalize(&g).unwrap();
            prop_assert_eq!(decode(&encode(&g)).unwrap(), g);
        }
    }
}
