//! Relational metadata: tables, column kinds, keys and the parent-child DAG.
//!
//! A [`RelationalSchema`] is only ever constructed through validation, so every
//! value of the type satisfies the structural invariants the rest of the crate
//! relies on: foreign keys point at declared primary keys, names are unique and
//! the relationship graph is acyclic.

mod denormalize;
mod metadata;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use denormalize::{denormalize, denormalize_with_depth, resolve_path, DanglingForeignKey};

/// Storage and modelling kind of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    /// Identifier column (primary key, foreign key or opaque id). Never modelled.
    Id,
    Categorical,
    Numerical,
    Integer,
    /// Parsed to seconds since the Unix epoch and modelled as a continuous value.
    Datetime,
}

impl ColumnKind {
    pub fn is_continuous(self) -> bool {
        matches!(self, ColumnKind::Numerical | ColumnKind::Integer | ColumnKind::Datetime)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Id => "id",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Numerical => "numerical",
            ColumnKind::Integer => "integer",
            ColumnKind::Datetime => "datetime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self { name: name.into(), kind }
    }
}

/// Column layout of one table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSpec {
    pub name: String,
    pub columns: Vec<ColumnSpec>,
    pub primary_key: Option<String>,
}

impl TableSpec {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Columns that carry modelled information, i.e. everything except id columns.
    pub fn feature_columns(&self) -> impl Iterator<Item = &ColumnSpec> {
        self.columns.iter().filter(|c| c.kind != ColumnKind::Id)
    }

    pub fn feature_count(&self) -> usize {
        self.feature_columns().count()
    }
}

/// A single-column foreign key `child_table.child_column -> parent_table.parent_column`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ForeignKey {
    pub child_table: String,
    pub child_column: String,
    pub parent_table: String,
    pub parent_column: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemaError {
    #[error("metadata is not valid JSON for the expected format: {0}")]
    Parse(String),
    #[error("duplicate {what} name `{name}`")]
    DuplicateName { what: &'static str, name: String },
    #[error("table `{table}`: foreign key `{column}` references unknown {target}")]
    UnknownReference { table: String, column: String, target: String },
    #[error("schema contains a cycle through table(s): {}", .0.join(", "))]
    CyclicSchema(Vec<String>),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("table `{table}`, column `{column}`: {message}")]
    InvalidColumn { table: String, column: String, message: String },
}

/// A validated relational schema.
///
/// `relationships` is ordered by child table name, then by the declaration
/// order of the foreign keys inside that table. The first foreign key declared
/// by a table is its *driver* relationship during synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationalSchema {
    tables: BTreeMap<String, TableSpec>,
    relationships: Vec<ForeignKey>,
}

/// An ancestor reached from a table through a chain of foreign keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ancestor {
    pub table: String,
    pub depth: usize,
    /// Indices into [`RelationalSchema::relationships`], starting at the
    /// queried table and walking upward one hop per entry.
    pub path: Vec<usize>,
}

impl RelationalSchema {
    /// Parses and validates a metadata JSON document.
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        validate_schema(text)
    }

    /// Validates an already-assembled set of tables and foreign keys.
    pub fn new(tables: Vec<TableSpec>, relationships: Vec<ForeignKey>) -> Result<Self, SchemaError> {
        let mut map = BTreeMap::new();
        for table in tables {
            let mut seen = BTreeSet::new();
            for c in &table.columns {
                if !seen.insert(c.name.as_str()) {
                    return Err(SchemaError::DuplicateName {
                        what: "column",
                        name: format!("{}.{}", table.name, c.name),
                    });
                }
            }
            if let Some(pk) = &table.primary_key {
                match table.columns.iter().find(|c| &c.name == pk) {
                    None => {
                        return Err(SchemaError::InvalidColumn {
                            table: table.name.clone(),
                            column: pk.clone(),
                            message: "primary key is not a declared column".into(),
                        })
                    }
                    Some(c) if c.kind != ColumnKind::Id => {
                        return Err(SchemaError::InvalidColumn {
                            table: table.name.clone(),
                            column: pk.clone(),
                            message: "primary key must have kind `id`".into(),
                        })
                    }
                    Some(_) => {}
                }
            }
            let name = table.name.clone();
            if map.insert(name.clone(), table).is_some() {
                return Err(SchemaError::DuplicateName { what: "table", name });
            }
        }

        let mut fk_columns = BTreeSet::new();
        for fk in &relationships {
            let child = map.get(&fk.child_table).ok_or_else(|| SchemaError::UnknownTable(fk.child_table.clone()))?;
            match child.columns.iter().find(|c| c.name == fk.child_column) {
                None => {
                    return Err(SchemaError::InvalidColumn {
                        table: fk.child_table.clone(),
                        column: fk.child_column.clone(),
                        message: "foreign key is not a declared column".into(),
                    })
                }
                Some(c) if c.kind != ColumnKind::Id => {
                    return Err(SchemaError::InvalidColumn {
                        table: fk.child_table.clone(),
                        column: fk.child_column.clone(),
                        message: "foreign key column must have kind `id`".into(),
                    })
                }
                Some(_) => {}
            }
            if !fk_columns.insert((fk.child_table.as_str(), fk.child_column.as_str())) {
                return Err(SchemaError::DuplicateName {
                    what: "foreign key",
                    name: format!("{}.{}", fk.child_table, fk.child_column),
                });
            }
            let parent = map.get(&fk.parent_table).ok_or_else(|| SchemaError::UnknownReference {
                table: fk.child_table.clone(),
                column: fk.child_column.clone(),
                target: format!("table `{}`", fk.parent_table),
            })?;
            if parent.primary_key.as_deref() != Some(fk.parent_column.as_str()) {
                return Err(SchemaError::UnknownReference {
                    table: fk.child_table.clone(),
                    column: fk.child_column.clone(),
                    target: format!("primary key column `{}.{}`", fk.parent_table, fk.parent_column),
                });
            }
        }

        // Stable order: by child table, then declaration order.
        let mut relationships = relationships;
        relationships.sort_by(|a, b| a.child_table.cmp(&b.child_table));

        let schema = Self { tables: map, relationships };
        schema.check_acyclic()?;
        Ok(schema)
    }

    pub fn tables(&self) -> impl Iterator<Item = &TableSpec> {
        self.tables.values()
    }

    pub fn table_names(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn table(&self, name: &str) -> Result<&TableSpec, SchemaError> {
        self.tables.get(name).ok_or_else(|| SchemaError::UnknownTable(name.to_string()))
    }

    pub fn relationships(&self) -> &[ForeignKey] {
        &self.relationships
    }

    /// Indices of the relationships whose child is `table`, in declaration order.
    pub fn foreign_keys_of(&self, table: &str) -> impl Iterator<Item = (usize, &ForeignKey)> + '_ {
        let table = table.to_string();
        self.relationships.iter().enumerate().filter(move |(_, fk)| fk.child_table == table)
    }

    /// Distinct parent table names of `table`.
    pub fn parents(&self, table: &str) -> BTreeSet<&str> {
        self.relationships
            .iter()
            .filter(|fk| fk.child_table == table)
            .map(|fk| fk.parent_table.as_str())
            .collect()
    }

    pub fn is_root(&self, table: &str) -> bool {
        !self.relationships.iter().any(|fk| fk.child_table == table)
    }

    /// True when `column` of `table` is the primary key or a foreign key.
    pub fn is_key_column(&self, table: &str, column: &str) -> bool {
        let is_pk = self
            .tables
            .get(table)
            .and_then(|t| t.primary_key.as_deref())
            .is_some_and(|pk| pk == column);
        is_pk || self.relationships.iter().any(|fk| fk.child_table == table && fk.child_column == column)
    }

    fn check_acyclic(&self) -> Result<(), SchemaError> {
        let order = kahn_order(self);
        if order.len() == self.tables.len() {
            return Ok(());
        }
        let placed: BTreeSet<&str> = order.iter().map(String::as_str).collect();
        let remaining = self.tables.keys().filter(|t| !placed.contains(t.as_str())).cloned().collect();
        Err(SchemaError::CyclicSchema(remaining))
    }
}

/// Parses a metadata JSON document into a validated schema.
pub fn validate_schema(text: &str) -> Result<RelationalSchema, SchemaError> {
    let raw = metadata::parse(text)?;
    let mut tables = Vec::with_capacity(raw.len());
    let mut relationships = Vec::new();
    let mut seen = BTreeSet::new();
    for (name, table) in raw {
        if !seen.insert(name.clone()) {
            return Err(SchemaError::DuplicateName { what: "table", name });
        }
        for fk in table.foreign_keys {
            relationships.push(ForeignKey {
                child_table: name.clone(),
                child_column: fk.column,
                parent_table: fk.references.table,
                parent_column: fk.references.column,
            });
        }
        tables.push(TableSpec {
            columns: table.columns.into_iter().map(|(n, k)| ColumnSpec::new(n, k)).collect(),
            primary_key: table.primary_key,
            name,
        });
    }
    RelationalSchema::new(tables, relationships)
}

fn kahn_order(schema: &RelationalSchema) -> Vec<String> {
    let mut indegree: BTreeMap<&str, usize> = schema.tables.keys().map(|t| (t.as_str(), 0)).collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for fk in &schema.relationships {
        *indegree.get_mut(fk.child_table.as_str()).expect("validated") += 1;
        children.entry(fk.parent_table.as_str()).or_default().push(fk.child_table.as_str());
    }
    let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&t, _)| t).collect();
    let mut order = Vec::with_capacity(indegree.len());
    while let Some(table) = ready.pop_first() {
        order.push(table.to_string());
        for &child in children.get(table).map(Vec::as_slice).unwrap_or_default() {
            let d = indegree.get_mut(child).expect("validated");
            *d -= 1;
            if *d == 0 {
                ready.insert(child);
            }
        }
    }
    order
}

/// Parents-before-children ordering of all tables; ties are broken by name.
pub fn topological_order(schema: &RelationalSchema) -> Vec<String> {
    kahn_order(schema)
}

/// Ancestors of `table` up to `max_depth` hops, breadth first.
///
/// At depth 1 every foreign key yields its own entry, so a table referencing
/// the same parent twice gets two entries. Deeper ancestors are collapsed to
/// one entry per `(table, depth)`, keeping the first path found while walking
/// the previous level in output order. The result is sorted by
/// `(depth, table name)`, with depth-1 duplicates kept in declaration order.
pub fn ancestors(schema: &RelationalSchema, table: &str, max_depth: usize) -> Result<Vec<Ancestor>, SchemaError> {
    schema.table(table)?;
    let mut out: Vec<Ancestor> = Vec::new();
    let mut frontier = vec![Ancestor { table: table.to_string(), depth: 0, path: Vec::new() }];
    for depth in 1..=max_depth {
        let mut level: Vec<Ancestor> = Vec::new();
        for node in &frontier {
            for (idx, fk) in schema.foreign_keys_of(&node.table) {
                if depth > 1 && level.iter().any(|a| a.table == fk.parent_table) {
                    continue;
                }
                let mut path = node.path.clone();
                path.push(idx);
                level.push(Ancestor { table: fk.parent_table.clone(), depth, path });
            }
        }
        level.sort_by(|a, b| a.table.cmp(&b.table));
        out.extend(level.iter().cloned());
        frontier = level;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn chain_json() -> &'static str {
        r#"{"tables": {
            "a": {"primary_key": "id", "columns": {"id": "id", "x": "numerical"}},
            "b": {"primary_key": "id", "columns": {"id": "id", "a_id": "id", "y": "categorical"},
                  "foreign_keys": [{"column": "a_id", "references": {"table": "a", "column": "id"}}]},
            "c": {"primary_key": "id", "columns": {"id": "id", "b_id": "id", "z": "numerical"},
                  "foreign_keys": [{"column": "b_id", "references": {"table": "b", "column": "id"}}]}
        }}"#
    }

    fn diamond_json() -> &'static str {
        r#"{"tables": {
            "D": {"primary_key": "id", "columns": {"id": "id", "b": "id", "c": "id", "v": "numerical"},
                  "foreign_keys": [{"column": "b", "references": {"table": "B", "column": "id"}},
                                   {"column": "c", "references": {"table": "C", "column": "id"}}]},
            "C": {"primary_key": "id", "columns": {"id": "id", "a": "id"},
                  "foreign_keys": [{"column": "a", "references": {"table": "A", "column": "id"}}]},
            "B": {"primary_key": "id", "columns": {"id": "id", "a": "id"},
                  "foreign_keys": [{"column": "a", "references": {"table": "A", "column": "id"}}]},
            "A": {"primary_key": "id", "columns": {"id": "id", "k": "categorical"}}
        }}"#
    }

    fn names(a: &[Ancestor]) -> Vec<(&str, usize)> {
        a.iter().map(|a| (a.table.as_str(), a.depth)).collect()
    }

    #[test]
    fn single_table_has_no_relationships() {
        let s = validate_schema(r#"{"tables": {"t": {"primary_key": null, "columns": {"v": "numerical"}}}}"#).unwrap();
        assert!(s.relationships().is_empty());
        assert_eq!(topological_order(&s), vec!["t"]);
    }

    #[test]
    fn self_reference_is_a_cycle() {
        let err = validate_schema(
            r#"{"tables": {"A": {"primary_key": "id", "columns": {"id": "id", "parent_id": "id"},
                "foreign_keys": [{"column": "parent_id", "references": {"table": "A", "column": "id"}}]}}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SchemaError::CyclicSchema(_)));
        assert!(err.to_string().contains("cycle"));
    }

    #[test]
    fn two_table_cycle_detected() {
        let err = validate_schema(
            r#"{"tables": {
                "a": {"primary_key": "id", "columns": {"id": "id", "b_id": "id"},
                      "foreign_keys": [{"column": "b_id", "references": {"table": "b", "column": "id"}}]},
                "b": {"primary_key": "id", "columns": {"id": "id", "a_id": "id"},
                      "foreign_keys": [{"column": "a_id", "references": {"table": "a", "column": "id"}}]}}}"#,
        )
        .unwrap_err();
        assert_eq!(err, SchemaError::CyclicSchema(vec!["a".into(), "b".into()]));
    }

    #[test]
    fn store_sales_parent_set() {
        let s = validate_schema(
            r#"{"tables": {
                "store": {"primary_key": "id", "columns": {"id": "id", "kind": "categorical"}},
                "sales": {"primary_key": "id", "columns": {"id": "id", "store_id": "id", "amount": "numerical"},
                          "foreign_keys": [{"column": "store_id", "references": {"table": "store", "column": "id"}}]}}}"#,
        )
        .unwrap();
        assert_eq!(s.parents("sales"), BTreeSet::from(["store"]));
        assert!(s.parents("store").is_empty());
        assert!(s.is_key_column("sales", "store_id"));
        assert!(!s.is_key_column("sales", "amount"));
    }

    #[test]
    fn unknown_references_rejected() {
        let missing_table = r#"{"tables": {"c": {"primary_key": "id", "columns": {"id": "id", "p": "id"},
            "foreign_keys": [{"column": "p", "references": {"table": "nope", "column": "id"}}]}}}"#;
        assert!(matches!(validate_schema(missing_table), Err(SchemaError::UnknownReference { .. })));

        let non_pk = r#"{"tables": {
            "p": {"primary_key": "id", "columns": {"id": "id", "other": "id"}},
            "c": {"primary_key": "id", "columns": {"id": "id", "p": "id"},
                  "foreign_keys": [{"column": "p", "references": {"table": "p", "column": "other"}}]}}}"#;
        assert!(matches!(validate_schema(non_pk), Err(SchemaError::UnknownReference { .. })));
    }

    #[test]
    fn duplicate_names_rejected() {
        let dup_col = r#"{"tables": {"t": {"primary_key": null, "columns": {"v": "numerical", "v": "integer"}}}}"#;
        assert!(matches!(validate_schema(dup_col), Err(SchemaError::DuplicateName { what: "column", .. })));
        let dup_table = r#"{"tables": {"t": {"primary_key": null, "columns": {}}, "t": {"primary_key": null, "columns": {}}}}"#;
        assert!(matches!(validate_schema(dup_table), Err(SchemaError::DuplicateName { what: "table", .. })));
    }

    #[test]
    fn key_kinds_enforced() {
        let bad_pk = r#"{"tables": {"t": {"primary_key": "v", "columns": {"v": "numerical"}}}}"#;
        assert!(matches!(validate_schema(bad_pk), Err(SchemaError::InvalidColumn { .. })));
        let bad_fk = r#"{"tables": {
            "p": {"primary_key": "id", "columns": {"id": "id"}},
            "c": {"primary_key": null, "columns": {"p": "integer"},
                  "foreign_keys": [{"column": "p", "references": {"table": "p", "column": "id"}}]}}}"#;
        assert!(matches!(validate_schema(bad_fk), Err(SchemaError::InvalidColumn { .. })));
    }

    #[test]
    fn unknown_keys_in_metadata_rejected() {
        let extra = r#"{"tables": {"t": {"primary_key": null, "columns": {}, "colour": "red"}}}"#;
        assert!(matches!(validate_schema(extra), Err(SchemaError::Parse(_))));
        assert!(matches!(validate_schema("not json"), Err(SchemaError::Parse(_))));
    }

    #[test]
    fn column_order_follows_document() {
        let s = validate_schema(chain_json()).unwrap();
        let b = s.table("b").unwrap();
        let cols: Vec<_> = b.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(cols, ["id", "a_id", "y"]);
        assert_eq!(b.feature_columns().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["y"]);
    }

    #[test]
    fn chain_order_and_ancestors() {
        let s = validate_schema(chain_json()).unwrap();
        assert_eq!(topological_order(&s), ["a", "b", "c"]);
        assert_eq!(names(&ancestors(&s, "c", 1).unwrap()), [("b", 1)]);
        assert_eq!(names(&ancestors(&s, "c", 2).unwrap()), [("b", 1), ("a", 2)]);
        assert!(ancestors(&s, "a", 2).unwrap().is_empty());
        assert!(matches!(ancestors(&s, "zzz", 1), Err(SchemaError::UnknownTable(_))));
    }

    /// Brute force over all permutations: the valid orders are those where
    /// every parent precedes its child; the lexicographically smallest one is
    /// what the tie-break must select.
    #[test]
    fn diamond_order_matches_enumeration() {
        let s = validate_schema(diamond_json()).unwrap();
        let tables: Vec<String> = s.table_names().map(str::to_string).collect();
        let mut valid = Vec::new();
        permute(&mut tables.clone(), 0, &mut |perm| {
            let ok = s.relationships().iter().all(|fk| {
                let p = perm.iter().position(|t| *t == fk.parent_table).unwrap();
                let c = perm.iter().position(|t| *t == fk.child_table).unwrap();
                p < c
            });
            if ok {
                valid.push(perm.to_vec());
            }
        });
        valid.sort();
        assert_eq!(valid.len(), 2);
        assert_eq!(valid[0], ["A", "B", "C", "D"]);
        assert_eq!(topological_order(&s), valid[0]);
    }

    fn permute(items: &mut Vec<String>, k: usize, f: &mut dyn FnMut(&[String])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, f);
            items.swap(k, i);
        }
    }

    #[test]
    fn diamond_ancestors() {
        let s = validate_schema(diamond_json()).unwrap();
        let anc = ancestors(&s, "D", 2).unwrap();
        assert_eq!(names(&anc), [("B", 1), ("C", 1), ("A", 2)]);
        // A is reached through B, the first parent in output order.
        let via: Vec<&str> = anc[2].path.iter().map(|&i| s.relationships()[i].child_table.as_str()).collect();
        assert_eq!(via, ["D", "B"]);
    }

    #[test]
    fn repeated_parent_gets_one_slot_per_foreign_key() {
        let s = validate_schema(
            r#"{"tables": {
                "team": {"primary_key": "id", "columns": {"id": "id", "league": "categorical"}},
                "game": {"primary_key": "id", "columns": {"id": "id", "home": "id", "away": "id", "goals": "integer"},
                         "foreign_keys": [{"column": "home", "references": {"table": "team", "column": "id"}},
                                          {"column": "away", "references": {"table": "team", "column": "id"}}]}}}"#,
        )
        .unwrap();
        let anc = ancestors(&s, "game", 1).unwrap();
        assert_eq!(names(&anc), [("team", 1), ("team", 1)]);
        let cols: Vec<&str> = anc.iter().map(|a| s.relationships()[a.path[0]].child_column.as_str()).collect();
        assert_eq!(cols, ["home", "away"]);
        assert_eq!(s.parents("game"), BTreeSet::from(["team"]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Random DAG: an edge i -> j only for i < j over a shuffled naming.
        fn random_schema() -> impl Strategy<Value = RelationalSchema> {
            (1usize..8, proptest::collection::vec(any::<bool>(), 28), any::<u64>()).prop_map(|(n, edges, salt)| {
                let label = |i: usize| format!("t{}", (i as u64 * 7 + salt) % 97);
                let mut seen = BTreeSet::new();
                let names: Vec<String> = (0..n).map(label).filter(|l| seen.insert(l.clone())).collect();
                let n = names.len();
                let mut tables = Vec::new();
                let mut fks = Vec::new();
                let mut k = 0;
                for j in 0..n {
                    let mut columns = vec![ColumnSpec::new("id", ColumnKind::Id)];
                    for i in 0..j {
                        if edges[k % edges.len()] {
                            let col = format!("fk_{i}");
                            columns.push(ColumnSpec::new(&col, ColumnKind::Id));
                            fks.push(ForeignKey {
                                child_table: names[j].clone(),
                                child_column: col,
                                parent_table: names[i].clone(),
                                parent_column: "id".into(),
                            });
                        }
                        k += 1;
                    }
                    tables.push(TableSpec { name: names[j].clone(), columns, primary_key: Some("id".into()) });
                }
                RelationalSchema::new(tables, fks).expect("acyclic by construction")
            })
        }

        proptest! {
            #[test]
            fn parents_precede_children(schema in random_schema()) {
                let order = topological_order(&schema);
                prop_assert_eq!(order.len(), schema.table_names().count());
                for fk in schema.relationships() {
                    let p = order.iter().position(|t| *t == fk.parent_table).unwrap();
                    let c = order.iter().position(|t| *t == fk.child_table).unwrap();
                    prop_assert!(p < c);
                }
            }

            #[test]
            fn depth_one_ancestors_are_the_parent_set(schema in random_schema()) {
                for t in schema.table_names() {
                    let anc: BTreeSet<String> = ancestors(&schema, t, 1).unwrap().into_iter().map(|a| a.table).collect();
                    let parents: BTreeSet<String> = schema.parents(t).into_iter().map(str::to_string).collect();
                    prop_assert_eq!(anc, parents);
                }
            }
        }
    }
}
