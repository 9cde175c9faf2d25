use std::collections::BTreeMap;

use thiserror::Error;

use super::{ancestors, RelationalSchema, SchemaError};
use crate::dataset::{Column, Database, Table};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DanglingForeignKey {
    #[error("table `{table}`, row {row}: foreign key `{column}` = {value:?} has no parent row")]
    Dangling { table: String, column: String, row: usize, value: String },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// Follows a chain of foreign keys (indices into the schema's relationships)
/// from every row of the chain's first child table, returning the row index
/// reached in the final ancestor table for each starting row.
pub fn resolve_path(db: &Database, path: &[usize]) -> Result<Vec<usize>, DanglingForeignKey> {
    let rels = db.schema().relationships();
    let first = &rels[path[0]];
    let start = db.table(&first.child_table).expect("schema table");
    let mut rows: Vec<usize> = (0..start.n_rows()).collect();
    for &rel in path {
        let fk = &rels[rel];
        let child = db.table(&fk.child_table).expect("schema table");
        let parent = db.table(&fk.parent_table).expect("schema table");
        let index = parent.key_index(&fk.parent_column);
        let col = &child.column(&fk.child_column).expect("foreign key column").data;
        rows = rows
            .into_iter()
            .map(|r| {
                col.text(r).and_then(|k| index.get(k).copied()).ok_or_else(|| DanglingForeignKey::Dangling {
                    table: fk.child_table.clone(),
                    column: fk.child_column.clone(),
                    row: r,
                    value: col.text(r).unwrap_or_default().to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
    }
    Ok(rows)
}

/// Joins every row of `child` with the feature columns of its direct parents.
pub fn denormalize(db: &Database, child: &str) -> Result<Table, DanglingForeignKey> {
    denormalize_with_depth(db, child, 1)
}

/// Like [`denormalize`], but also joins ancestors up to `depth` hops away.
///
/// Output columns are the child's feature columns followed by each ancestor's
/// feature columns prefixed with `<ancestor table>__`. When the same ancestor
/// table is reached through more than one slot, the prefix also names the
/// foreign-key columns of the path, e.g. `team_via_away__league`.
pub fn denormalize_with_depth(db: &Database, child: &str, depth: usize) -> Result<Table, DanglingForeignKey> {
    let schema: &RelationalSchema = db.schema();
    schema.table(child)?;
    let base = db.table(child).expect("schema table");
    let slots = ancestors(schema, child, depth)?;

    let mut uses: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &slots {
        *uses.entry(s.table.as_str()).or_default() += 1;
    }

    let mut out = base.features();
    for slot in &slots {
        let prefix = if uses[slot.table.as_str()] > 1 {
            let via: Vec<&str> = slot.path.iter().map(|&i| schema.relationships()[i].child_column.as_str()).collect();
            format!("{}_via_{}__", slot.table, via.join("_"))
        } else {
            format!("{}__", slot.table)
        };
        let rows = resolve_path(db, &slot.path)?;
        let joined = db.table(&slot.table).expect("schema table").features().take_rows(&rows);
        out.columns.extend(
            joined.columns.into_iter().map(|c| Column { name: format!("{prefix}{}", c.name), data: c.data }),
        );
    }
    Ok(out)
}
