//! System file format (UTF-8 JSON, one-based indices).
//!
//! ```json
//! {
//!   "ground":    [{"label": "g1", "energy": 0.0}],
//!   "excited":   [{"label": "e1", "energy": 10.0}],
//!   "couplings": [{"g": 1, "e": 1, "magnitude": 1.0, "phase": 0.0, "frequency": 10.0}],
//!   "decays":    [{"g": 1, "e": 1, "rate": 0.5}]
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{normalize_phase, DecayChannel, LaserCoupling, Level, LevelSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemFileError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("parse error in field `{path}` at line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelDoc {
    label: String,
    energy: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingDoc {
    g: usize,
    e: usize,
    magnitude: f64,
    phase: f64,
    frequency: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayDoc {
    g: usize,
    e: usize,
    rate: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    ground: Vec<LevelDoc>,
    excited: Vec<LevelDoc>,
    #[serde(default)]
    couplings: Vec<CouplingDoc>,
    #[serde(default)]
    decays: Vec<DecayDoc>,
}

/// Parse a system file.
pub fn load_system(bytes: &[u8]) -> Result<LevelSystem, SystemFileError> {
    // syntax first, so type errors below always carry a field path
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| SystemFileError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if !value.is_object() {
        return Err(SystemFileError::Schema { path: ".".into(), message: "top level must be an object".into() });
    }

    let mut de = serde_json::Deserializer::from_slice(bytes);
    let doc: SystemDoc = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        let message = inner.to_string();
        if message.starts_with("missing field") || message.starts_with("unknown field") {
            SystemFileError::Schema { path, message }
        } else {
            SystemFileError::Parse { path, line: inner.line(), column: inner.column(), message }
        }
    })?;

    let ng = doc.ground.len();
    let ne = doc.excited.len();
    let check = |path: String, g: usize, e: usize| -> Result<(usize, usize), SystemFileError> {
        if g == 0 || g > ng {
            return Err(SystemFileError::Schema {
                path: format!("{path}.g"),
                message: format!("ground index {g} outside 1..={ng}"),
            });
        }
        if e == 0 || e > ne {
            return Err(SystemFileError::Schema {
                path: format!("{path}.e"),
                message: format!("excited index {e} outside 1..={ne}"),
            });
        }
        Ok((g - 1, e - 1))
    };

    let mut couplings = Vec::with_capacity(doc.couplings.len());
    for (k, c) in doc.couplings.iter().enumerate() {
        let (ground, excited) = check(format!("couplings[{k}]"), c.g, c.e)?;
        couplings.push(LaserCoupling {
            ground,
            excited,
            magnitude: c.magnitude,
            phase: c.phase,
            frequency: c.frequency,
        });
    }
    let mut decays = Vec::with_capacity(doc.decays.len());
    for (k, d) in doc.decays.iter().enumerate() {
        let (ground, excited) = check(format!("decays[{k}]"), d.g, d.e)?;
        decays.push(DecayChannel { ground, excited, rate: d.rate });
    }
    let levels = |docs: Vec<LevelDoc>| docs.into_iter().map(|l| Level { label: l.label, energy: l.energy }).collect();
    Ok(LevelSystem::new(levels(doc.ground), levels(doc.excited), couplings, decays))
}

/// Serialize to the system file format (pretty-printed, trailing newline).
pub fn save_system(system: &LevelSystem) -> Vec<u8> {
    let level = |l: &Level| LevelDoc { label: l.label.clone(), energy: l.energy };
    let doc = SystemDoc {
        ground: system.ground().iter().map(level).collect(),
        excited: system.excited().iter().map(level).collect(),
        couplings: system
            .couplings()
            .iter()
            .map(|c| CouplingDoc {
                g: c.ground + 1,
                e: c.excited + 1,
                magnitude: c.magnitude,
                phase: normalize_phase(c.phase),
                frequency: c.frequency,
            })
            .collect(),
        decays: system.decays().iter().map(|d| DecayDoc { g: d.ground + 1, e: d.excited + 1, rate: d.rate }).collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("system document serializes");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: &str = r#"{
        "ground": [{"label": "g1", "energy": 0.0}, {"label": "g2", "energy": 0.0}],
        "excited": [{"label": "e1", "energy": 10.0}],
        "couplings": [
            {"g": 1, "e": 1, "magnitude": 1.0, "phase": 0.0, "frequency": 10.0},
            {"g": 2, "e": 1, "magnitude": 1.0, "phase": -3.141592653589793, "frequency": 10.0}
        ],
        "decays": [{"g": 1, "e": 1, "rate": 0.2}, {"g": 2, "e": 1, "rate": 0.5}]
    }"#;

    #[test]
    fn loads_one_based_indices() {
        let sys = load_system(LAMBDA.as_bytes()).unwrap();
        assert_eq!(sys.n_ground(), 2);
        assert_eq!(sys.couplings()[1].ground, 1);
        assert_eq!(sys.decays()[1].ground, 1);
        // phase normalized into [0, 2π)
        assert!((sys.couplings()[1].phase - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn round_trip() {
        let sys = load_system(LAMBDA.as_bytes()).unwrap();
        let again = load_system(&save_system(&sys)).unwrap();
        assert_eq!(sys, again);
    }

    #[test]
    fn missing_ground_is_schema_violation() {
        let err = load_system(br#"{"excited": [], "couplings": [], "decays": []}"#).unwrap_err();
        match err {
            SystemFileError::Schema { message, .. } => assert!(message.contains("ground")),
            other => panic!("expected schema violation, got {other:?}"),
        }
    }

    #[test]
    fn string_rate_is_parse_error_naming_field() {
        let doc = LAMBDA.replace(r#""rate": 0.5"#, r#""rate": "fast""#);
        let err = load_system(doc.as_bytes()).unwrap_err();
        match &err {
            SystemFileError::Parse { path, line, .. } => {
                assert_eq!(path, "decays[1].rate");
                assert_eq!(*line, 8);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(err.to_string().contains("decays[1].rate"));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = load_system(b"{\n  \"ground\": [\n").unwrap_err();
        assert!(matches!(err, SystemFileError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn zero_index_rejected() {
        let doc = LAMBDA.replace(r#"{"g": 1, "e": 1, "rate": 0.2}"#, r#"{"g": 0, "e": 1, "rate": 0.2}"#);
        let err = load_system(doc.as_bytes()).unwrap_err();
        assert_eq!(
            err,
            SystemFileError::Schema { path: "decays[0].g".into(), message: "ground index 0 outside 1..=2".into() }
        );
    }

    #[test]
    fn unknown_key_rejected() {
        let doc = LAMBDA.replacen(r#""ground""#, r#""grund": [], "ground""#, 1);
        assert!(matches!(load_system(doc.as_bytes()), Err(SystemFileError::Schema { .. })));
    }
}
