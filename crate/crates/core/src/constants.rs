//! The full constants block, with override merging and a stable hash.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::appearance::AppearanceConfig;
use crate::geometry::GeometryConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct Constants {
    pub geometry: GeometryConfig<f64>,
    pub appearance: AppearanceConfig,
}


fn overlay(base: &mut Value, patch: &Value, path: &str) -> Result<(), String> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let here = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                let slot = b.get_mut(k).ok_or_else(|| format!("unknown constant `{here}`"))?;
                overlay(slot, v, &here)?;
            }
            Ok(())
        }
        (b @ Value::Number(_), Value::Number(n)) => {
            *b = Value::Number(n.clone());
            Ok(())
        }
        (_, _) => Err(format!("constant `{path}` must be a number")),
    }
}

impl Constants {
    /// Applies a nested override object such as `{"geometry": {"tau_move": 0.03}}`.
    ///
    /// Unknown keys and non-numeric values are rejected.
    pub fn with_overrides(&self, overrides: &Value) -> Result<Self, String> {
        if overrides.is_null() {
            return Ok(*self);
        }
        let mut v = serde_json::to_value(self).expect("constants serialize");
        overlay(&mut v, overrides, "")?;
        let out: Constants = serde_json::from_value(v).map_err(|e| e.to_string())?;
        out.check()?;
        Ok(out)
    }

    pub fn check(&self) -> Result<(), String> {
        let g = &self.geometry;
        let a = &self.appearance;
        let positive = [
            ("geometry.s_fix", g.s_fix),
            ("geometry.flow_interval_cap", g.flow_interval_cap),
            ("geometry.flow_score_cap", g.flow_score_cap),
            ("geometry.match_cap", g.match_cap),
            ("geometry.target_short_side", g.target_short_side),
            ("geometry.tau_move", g.tau_move),
            ("geometry.tau_still", g.tau_still),
            ("appearance.diversity_cap", a.diversity_cap),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("constant `{k}` must be positive"));
            }
        }
        if g.grid_size < 2 || g.orbit_window < 1 || a.diversity_frames < 1 {
            return Err("grid_size, orbit_window and diversity_frames must be positive (grid_size >= 2)".into());
        }
        if g.flow_discard > g.flow_interval_cap {
            return Err("flow_discard exceeds flow_interval_cap".into());
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("constants serialize")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(serde_json::to_string(self).expect("constants serialize").as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
