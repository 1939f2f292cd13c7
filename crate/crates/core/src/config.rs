//! JSON configuration documents and the canonical JSON emitter.

use crate::error::Result as CoreResult;
use crate::mobius::Cap;
use crate::schottky::SchottkySet;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const STEREOGRAPHIC: &str = "stereographic";

/// A cap given either natively on the sphere or as a chart ball.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

impl CapSpec {
    pub fn sphere(cap: &Cap<f64>) -> Self {
        Self {
            normal: Some(cap.normal().to_vec()),
            offset: Some(cap.offset()),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    pub caps: Vec<CapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub budgets: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if inner.is_syntax() || inner.is_eof() || path == "." {
                ConfigError::Syntax {
                    line: inner.line(),
                    column: inner.column(),
                    message: inner.to_string(),
                }
            } else {
                ConfigError::field(path, inner.to_string())
            }
        })?;
        doc.check()?;
        Ok(doc)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.dimension < 1 {
            return Err(ConfigError::field("dimension", "must be at least 1"));
        }
        if let Some(chart) = &self.chart {
            if chart != STEREOGRAPHIC {
                return Err(ConfigError::field("chart", format!("unknown chart {chart:?}")));
            }
        }
        for (i, c) in self.caps.iter().enumerate() {
            let at = |f: &str| format!("caps[{i}].{f}");
            match (&c.normal, c.offset, &c.center, c.radius) {
                (Some(u), Some(_), None, None) => {
                    if u.len() != self.dimension + 1 {
                        return Err(ConfigError::field(
                            at("normal"),
                            format!("expected {} coordinates, got {}", self.dimension + 1, u.len()),
                        ));
                    }
                }
                (None, None, Some(x), Some(_)) => {
                    if x.len() != self.dimension {
                        return Err(ConfigError::field(
                            at("center"),
                            format!("expected {} coordinates, got {}", self.dimension, x.len()),
                        ));
                    }
                }
                _ => {
                    return Err(ConfigError::field(
                        format!("caps[{i}]"),
                        "give either {normal, offset} or {center, radius}",
                    ))
                }
            }
        }
        Ok(())
    }

    /// Builds the (unvalidated) Schottky set.
    pub fn to_set(&self) -> Result<SchottkySet<f64>, ConfigError> {
        let caps = self
            .caps
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let cap: CoreResult<Cap<f64>> = match (&c.normal, c.offset, &c.center, c.radius) {
                    (Some(u), Some(t), _, _) => Cap::new(u.clone(), t),
                    (_, _, Some(x), Some(r)) => Cap::from_chart_disk(x, r),
                    _ => unreachable!("checked at parse time"),
                };
                cap.map_err(|e| ConfigError::field(format!("caps[{i}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SchottkySet::new(self.dimension, caps))
    }

    pub fn from_set(s: &SchottkySet<f64>, seed: Option<u64>) -> Self {
        Self {
            dimension: s.dim(),
            chart: None,
            caps: s.caps().iter().map(CapSpec::sphere).collect(),
            seed,
            budgets: BTreeMap::new(),
        }
    }

    /// Sphere-native caps with unit normals; other fields kept.
    pub fn canonical(&self) -> Result<Self, ConfigError> {
        let set = self.to_set()?;
        Ok(Self {
            chart: None,
            budgets: self.budgets.clone(),
            ..Self::from_set(&set, self.seed)
        })
    }

    pub fn emit(&self) -> String {
        to_canonical_json(&serde_json::to_value(self).expect("config serializes"))
    }

    pub fn budget(&self, name: &str) -> Option<u64> {
        self.budgets.get(name).copied()
    }
}

/// JSON with sorted keys, two-space indentation and floats written with 17
/// significant digits; non-finite floats become `null`.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if x.is_finite() {
                    let _ = write!(out, "{x:.16e}");
                } else {
                    out.push_str("null");
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Short numeric arrays stay on one line.
            if items.len() <= 8 && items.iter().all(|x| x.is_number() || x.is_null()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(k).expect("key escapes"));
                out.push_str(": ");
                write_value(out, &map[k.as_str()], indent + 1);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{random_configuration, symmetric_three};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn chart_and_sphere_caps() {
        let text = r#"{
            "dimension": 2,
            "chart": "stereographic",
            "caps": [
                {"center": [0.0, 0.0], "radius": 1.0},
                {"normal": [1, 0, 0], "offset": 0.5},
                {"center": [3.0, 0.0], "radius": 0.5}
            ],
            "seed": 7,
            "budgets": {"max_balls": 1000}
        }"#;
        let doc = ConfigDocument::parse(text).unwrap();
        let s = doc.to_set().unwrap();
        assert_eq!(s.len(), 3);
        // The unit chart disk is the southern hemisphere.
        assert!((s.caps()[0].offset()).abs() < 1e-15);
        assert_eq!(doc.budget("max_balls"), Some(1000));
        let canon = doc.canonical().unwrap();
        assert!(canon.caps.iter().all(|c| c.normal.is_some()));
        assert_eq!(canon.seed, Some(7));
    }

    #[test]
    fn errors_are_located() {
        let e = ConfigDocument::parse("{\"dimension\": 2,\n \"caps\": [}").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }), "{e:?}");
        let e = ConfigDocument::parse(r#"{"dimension": 2, "caps": [{"normal": [1,0,0], "offset": "x"}]}"#)
            .unwrap_err();
        assert!(matches!(&e, ConfigError::Field { field, .. } if field == "caps[0].offset"), "{e:?}");
        let e = ConfigDocument::parse(r#"{"dimension": 2, "caps": [{"normal": [1,0], "offset": 0.1}]}"#)
            .unwrap_err();
        assert!(matches!(&e, ConfigError::Field { field, .. } if field == "caps[0].normal"), "{e:?}");
        let e = ConfigDocument::parse(r#"{"dimension": 2, "caps": [{"normal": [1,0,0]}]}"#).unwrap_err();
        assert!(matches!(&e, ConfigError::Field { field, .. } if field == "caps[0]"), "{e:?}");
        let e = ConfigDocument::parse(r#"{"dimension": 2, "caps": [], "colour": 1}"#).unwrap_err();
        assert!(matches!(e, ConfigError::Field { .. } | ConfigError::Syntax { .. }), "{e:?}");
        let e = ConfigDocument::parse(r#"{"dimension": 2, "chart": "mercator", "caps": []}"#).unwrap_err();
        assert!(matches!(&e, ConfigError::Field { field, .. } if field == "chart"));
    }

    #[test]
    fn canonical_emission_round_trips() {
        let doc = ConfigDocument::from_set(&symmetric_three(), Some(1));
        let text = doc.emit();
        let again = ConfigDocument::parse(&text).unwrap();
        assert_eq!(again, doc);
        assert_eq!(again.emit(), text);
        assert!(text.contains("\"caps\""));
        let keys: Vec<usize> = ["\"caps\"", "\"dimension\"", "\"seed\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn emit_parse_is_identity(seed in 0u64..1000, count in 3usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_configuration(&mut rng, 2, count, 0.4).unwrap();
            let doc = ConfigDocument::from_set(&s, Some(seed));
            let text = doc.emit();
            prop_assert_eq!(ConfigDocument::parse(&text).unwrap().emit(), text);
        }
    }
}
