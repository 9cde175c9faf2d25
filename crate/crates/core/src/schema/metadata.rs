//! Raw metadata document as written on disk.
//!
//! JSON objects are read as ordered entry lists so that column order follows
//! the document and repeated keys can be reported instead of silently merged.

use std::fmt;
use std::marker::PhantomData;

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;

use super::{ColumnKind, SchemaError};

#[derive(Debug)]
pub(super) struct Entries<T>(pub Vec<(String, T)>);

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Entries<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EntriesVisitor<T>(PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for EntriesVisitor<T> {
            type Value = Entries<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::with_capacity(map.size_hint().unwrap_or(0));
                while let Some((k, v)) = map.next_entry::<String, T>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }

        deserializer.deserialize_map(EntriesVisitor(PhantomData))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    tables: Entries<RawTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct RawTable {
    #[serde(default)]
    pub primary_key: Option<String>,
    pub columns: Entries<ColumnKind>,
    #[serde(default)]
    pub foreign_keys: Vec<RawForeignKey>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct RawForeignKey {
    pub column: String,
    pub references: RawReference,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct RawReference {
    pub table: String,
    pub column: String,
}

pub(super) struct ParsedTable {
    pub primary_key: Option<String>,
    pub columns: Vec<(String, ColumnKind)>,
    pub foreign_keys: Vec<RawForeignKey>,
}

pub(super) fn parse(text: &str) -> Result<Vec<(String, ParsedTable)>, SchemaError> {
    let doc: RawDocument = serde_json::from_str(text).map_err(|e| SchemaError::Parse(e.to_string()))?;
    Ok(doc
        .tables
        .0
        .into_iter()
        .map(|(name, t)| {
            (name, ParsedTable { primary_key: t.primary_key, columns: t.columns.0, foreign_keys: t.foreign_keys })
        })
        .collect())
}

