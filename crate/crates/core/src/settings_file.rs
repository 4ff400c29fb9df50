//! JSON setting files:
//!
//! ```json
//! {"category": "I", "a": [[x,y,z],[x,y,z],[x,y,z]], "b": [...], "b2": [...]}
//! ```
//!
//! `b2` is required for category I and must be absent for category II.
//! Vectors are normalized on load.

use serde::{Deserialize, Serialize};

use crate::bounds::{Category, Settings, SettingsCategoryI, SettingsCategoryII};
use crate::error::{Error, Result};
use crate::geometry::UnitVec3;

/// Input norms further than this from one produce a warning.
pub const NORM_WARN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    pub category: Category,
    pub a: Vec<[f64; 3]>,
    pub b: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<Vec<[f64; 3]>>,
}

fn triple(name: &str, raw: &[[f64; 3]], warnings: &mut Vec<String>) -> Result<[UnitVec3; 3]> {
    if raw.len() != 3 {
        return Err(Error::Settings(format!(
            "`{name}` needs 3 vectors, got {}",
            raw.len()
        )));
    }
    let mut out = [UnitVec3::X; 3];
    for (i, v) in raw.iter().enumerate() {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (n - 1.0).abs() > NORM_WARN_TOL {
            warnings.push(format!("{name}[{i}] has norm {n}; normalized"));
        }
        out[i] = UnitVec3::from_array(*v)
            .map_err(|e| Error::Settings(format!("{name}[{i}]: {e}")))?;
    }
    Ok(out)
}

impl SettingsFile {
    /// Converts to validated settings, returning any normalization warnings.
    pub fn to_settings(&self) -> Result<(Settings, Vec<String>)> {
        let mut warnings = Vec::new();
        let a = triple("a", &self.a, &mut warnings)?;
        let b = triple("b", &self.b, &mut warnings)?;
        let settings = match (self.category, &self.b2) {
            (Category::I, Some(b2)) => Settings::I(SettingsCategoryI {
                a,
                b,
                b2: triple("b2", b2, &mut warnings)?,
            }),
            (Category::I, None) => {
                return Err(Error::Settings("category I requires `b2`".into()));
            }
            (Category::II, None) => Settings::II(SettingsCategoryII { a, b }),
            (Category::II, Some(_)) => {
                return Err(Error::Settings("category II takes no `b2`".into()));
            }
        };
        Ok((settings, warnings))
    }

    pub fn from_settings(settings: &Settings) -> Self {
        let raw = |v: &[UnitVec3; 3]| v.iter().map(|u| u.to_array()).collect::<Vec<_>>();
        match settings {
            Settings::I(s) => SettingsFile {
                category: Category::I,
                a: raw(&s.a),
                b: raw(&s.b),
                b2: Some(raw(&s.b2)),
            },
            Settings::II(s) => SettingsFile {
                category: Category::II,
                a: raw(&s.a),
                b: raw(&s.b),
                b2: None,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Settings(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("settings serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{optimal_category_i_settings, symmetric_category_ii_settings};

    #[test]
    fn round_trip_is_exact() {
        for s in [
            Settings::I(optimal_category_i_settings(0.77)),
            Settings::II(symmetric_category_ii_settings(1.9).unwrap()),
        ] {
            let text = SettingsFile::from_settings(&s).to_json();
            let (back, warnings) = SettingsFile::from_json(&text).unwrap().to_settings().unwrap();
            assert!(warnings.is_empty());
            for (u, v) in s.vectors().iter().zip(back.vectors()) {
                for (x, y) in u.to_array().iter().zip(v.to_array()) {
                    assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn normalizes_with_warning() {
        let text = r#"{"category":"II","a":[[2,0,0],[0,1,0],[0,0,1]],"b":[[1,0,0],[0,1,0],[0,0,1]]}"#;
        let (s, warnings) = SettingsFile::from_json(text).unwrap().to_settings().unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(s.vectors()[0], UnitVec3::X);
    }

    #[test]
    fn arity_and_category_errors() {
        let bad = [
            r#"{"category":"II","a":[[1,0,0]],"b":[[1,0,0],[0,1,0],[0,0,1]]}"#,
            r#"{"category":"I","a":[[1,0,0],[0,1,0],[0,0,1]],"b":[[1,0,0],[0,1,0],[0,0,1]]}"#,
            r#"{"category":"II","a":[[1,0,0],[0,1,0],[0,0,1]],"b":[[1,0,0],[0,1,0],[0,0,1]],"b2":[[1,0,0],[0,1,0],[0,0,1]]}"#,
            r#"{"category":"II","a":[[0,0,0],[0,1,0],[0,0,1]],"b":[[1,0,0],[0,1,0],[0,0,1]]}"#,
        ];
        for text in bad {
            let r = SettingsFile::from_json(text).and_then(|f| f.to_settings());
            assert!(r.is_err(), "{text}");
        }
        assert!(SettingsFile::from_json(r#"{"category":"III","a":[],"b":[]}"#).is_err());
    }
}
