//! Run configuration file: every `TrainConfig` key plus `seed` and `folds`.

use rctgan::detection::DEFAULT_FOLDS;
use rctgan::rctgan::TrainConfig;
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub seed: u64,
    pub folds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { train: TrainConfig::default(), seed: 0, folds: DEFAULT_FOLDS }
    }
}

impl RunConfig {
    /// Parses a JSON object. Missing keys keep their defaults and unknown
    /// keys are rejected.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let Value::Object(mut map) = value else {
            return Err("configuration must be a JSON object".into());
        };
        let seed = take(&mut map, "seed", Value::as_u64)?.unwrap_or(0);
        let folds = take(&mut map, "folds", Value::as_u64)?.map_or(DEFAULT_FOLDS, |f| f as usize);
        if folds < 2 {
            return Err(format!("folds must be at least 2, got {folds}"));
        }
        let train: TrainConfig = serde_json::from_value(Value::Object(map)).map_err(|e| e.to_string())?;
        Ok(Self { train, seed, folds })
    }
}

fn take<T>(map: &mut Map<String, Value>, key: &str, get: fn(&Value) -> Option<T>) -> Result<Option<T>, String> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => get(&v).map(Some).ok_or_else(|| format!("`{key}` must be a non-negative integer, got {v}")),
    }
}
