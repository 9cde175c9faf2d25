//! Model file: the magic bytes `RCTG`, a little-endian `u32` format version,
//! then the model as JSON.

use std::fs;
use std::path::Path;

use super::{DatabaseModel, SynthError};
use crate::schema::RelationalSchema;

pub const MAGIC: &[u8; 4] = b"RCTG";
pub const VERSION: u32 = 1;

fn io_error(path: &Path, e: impl std::fmt::Display) -> SynthError {
    SynthError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn save_model(model: &DatabaseModel, path: &Path) -> Result<(), SynthError> {
    let payload = serde_json::to_vec(model).map_err(|e| SynthError::CorruptFile(format!("cannot serialise model: {e}")))?;
    let mut bytes = Vec::with_capacity(payload.len() + 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&payload);
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

pub fn load_model(path: &Path) -> Result<DatabaseModel, SynthError> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    if bytes.len() < 8 {
        return Err(SynthError::CorruptFile(format!("{} is too short to be a model file", path.display())));
    }
    if &bytes[..4] != MAGIC {
        return Err(SynthError::CorruptFile(format!("{} does not start with the model magic bytes", path.display())));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("four bytes"));
    if version != VERSION {
        return Err(SynthError::VersionMismatch { found: version, expected: VERSION });
    }
    let model: DatabaseModel = serde_json::from_slice(&bytes[8..])
        .map_err(|e| SynthError::CorruptFile(format!("{}: {e}", path.display())))?;
    // The schema is re-validated rather than trusted.
    RelationalSchema::new(model.schema.tables().cloned().collect(), model.schema.relationships().to_vec())
        .map_err(|e| SynthError::CorruptFile(format!("{}: {e}", path.display())))?;
    if model.tables.len() != model.schema.table_names().count()
        || model.schema.table_names().any(|t| !model.tables.contains_key(t) || !model.transformers.contains_key(t))
        || model.cardinalities.len() != model.schema.relationships().len()
    {
        return Err(SynthError::CorruptFile(format!("{}: model does not cover its schema", path.display())));
    }
    Ok(model)
}
