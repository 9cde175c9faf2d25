//! Whole-database fitting and sampling.
//!
//! Every table gets its own [`TableGanModel`], conditioned on the real
//! feature rows of its ancestors. Sampling walks the schema in topological
//! order: root tables are drawn unconditionally, and each child table gets a
//! number of rows per synthetic driver-parent row drawn from the empirical
//! fan-out of the real data. Synthetic primary keys are `1..=n`, so foreign
//! keys are assigned by construction.

mod file;

use std::collections::BTreeMap;

use ndarray::{concatenate, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{check_referential_integrity, Column, ColumnData, Database, DatasetError, Table, Value, Violation};
use crate::neural::Tensor2;
use crate::rctgan::{fit_table, GanError, TableGanModel, TrainConfig, TrainingData};
use crate::schema::{ancestors, resolve_path, topological_order, ColumnKind, DanglingForeignKey, RelationalSchema, SchemaError};
use crate::transform::{ConditionLayout, ConditionSlot, TableTransformer, TransformError};

pub use file::{load_model, save_model, MAGIC, VERSION};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("database has {count} referential-integrity violations, first: table `{}`, row {}, column `{}` = {:?}",
        .first.table, .first.row, .first.column, .first.value)]
    IntegrityViolation { count: usize, first: Violation },
    #[error("scale must be a positive finite number, got {0}")]
    InvalidScale(f64),
    #[error("table `{table}`: {source}")]
    Gan { table: String, source: GanError },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Dangling(#[from] DanglingForeignKey),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("model file: {0}")]
    CorruptFile(String),
    #[error("model file has format version {found}, this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Empirical distribution of the number of child rows per parent row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityModel {
    /// Index into the schema's relationships.
    pub relationship: usize,
    /// Child count -> probability, including zero counts.
    pub histogram: BTreeMap<usize, f64>,
}

impl CardinalityModel {
    /// Histogram of `children_per_parent`; an empty parent table yields `{0: 1}`.
    pub fn fit(relationship: usize, children_per_parent: &[usize]) -> Self {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in children_per_parent {
            *counts.entry(c).or_default() += 1;
        }
        let total = children_per_parent.len();
        let histogram = if total == 0 {
            BTreeMap::from([(0, 1.0)])
        } else {
            counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
        };
        Self { relationship, histogram }
    }

    pub fn mean(&self) -> f64 {
        self.histogram.iter().map(|(&k, &p)| k as f64 * p).sum()
    }

    pub fn sampler(&self) -> (Vec<usize>, WeightedIndex<f64>) {
        let support: Vec<usize> = self.histogram.keys().copied().collect();
        let weights = WeightedIndex::new(self.histogram.values().copied()).expect("probabilities sum to one");
        (support, weights)
    }
}

/// How the foreign keys of a multi-parent table are filled at sampling time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingModel {
    pub table: String,
    /// Relationship along which child counts are drawn (the first declared).
    pub driver: usize,
    /// Remaining relationships, each filled with a uniformly chosen
    /// synthetic parent row.
    pub others: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatabaseModel {
    pub schema: RelationalSchema,
    /// `None` for tables that had no rows to learn from.
    pub tables: BTreeMap<String, Option<TableGanModel>>,
    pub transformers: BTreeMap<String, TableTransformer>,
    /// One per relationship, in relationship order.
    pub cardinalities: Vec<CardinalityModel>,
    pub pairings: BTreeMap<String, PairingModel>,
    pub row_counts: BTreeMap<String, usize>,
    pub config: TrainConfig,
}

/// Seed for stream `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn table_index(schema: &RelationalSchema, table: &str) -> u64 {
    schema.table_names().position(|n| n == table).expect("schema table") as u64
}

/// Condition layout for `table`: one slot per ancestor up to
/// `config.max_depth`, or none when conditioning is switched off.
pub fn condition_layout(
    schema: &RelationalSchema,
    transformers: &BTreeMap<String, TableTransformer>,
    table: &str,
    config: &TrainConfig,
) -> Result<ConditionLayout, SchemaError> {
    if !config.condition_on_ancestors {
        return Ok(ConditionLayout::default());
    }
    let slots = ancestors(schema, table, config.max_depth)?
        .into_iter()
        .map(|a| ConditionSlot { transformer: transformers[&a.table].clone(), table: a.table, depth: a.depth, path: a.path })
        .collect();
    Ok(ConditionLayout { slots })
}

/// Condition vectors for every row of `table` in `db`, built from the real
/// ancestor rows reached through the foreign-key chains.
pub fn real_conditions(db: &Database, table: &str, layout: &ConditionLayout, seed: u64) -> Result<Tensor2, SynthError> {
    let n = db.table(table).map_or(0, Table::n_rows);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts = Vec::with_capacity(layout.slots.len());
    for slot in &layout.slots {
        let rows = resolve_path(db, &slot.path)?;
        let anc = db.table(&slot.table).expect("schema table");
        let encoded = slot.transformer.encode_table(anc, &mut rng)?;
        parts.push(encoded.select(Axis(0), &rows));
    }
    Ok(if parts.is_empty() {
        Tensor2::zeros((n, 0))
    } else {
        concatenate(Axis(1), &parts.iter().map(|p| p.view()).collect::<Vec<_>>()).expect("aligned rows")
    })
}

fn children_per_parent(db: &Database, relationship: usize) -> Vec<usize> {
    let fk = &db.schema().relationships()[relationship];
    let parent = db.table(&fk.parent_table).expect("schema table");
    let child = db.table(&fk.child_table).expect("schema table");
    let index = parent.key_index(&fk.parent_column);
    let mut counts = vec![0; parent.n_rows()];
    let col = &child.column(&fk.child_column).expect("foreign key column").data;
    for r in 0..child.n_rows() {
        if let Some(&p) = col.text(r).and_then(|k| index.get(k)) {
            counts[p] += 1;
        }
    }
    counts
}

/// Fits table models for every table (in parallel), the child-count
/// histograms of every relationship and the pairing plan of every
/// multi-parent table.
pub fn fit_database(db: &Database, config: &TrainConfig, seed: u64) -> Result<DatabaseModel, SynthError> {
    config.validate().map_err(|m| SynthError::Gan { table: String::new(), source: GanError::InvalidConfig(m) })?;
    let violations = check_referential_integrity(db);
    if let Some(first) = violations.first() {
        return Err(SynthError::IntegrityViolation { count: violations.len(), first: first.clone() });
    }
    let schema = db.schema();
    let order = topological_order(schema);

    let mut transformers = BTreeMap::new();
    for name in &order {
        let t = db.table(name).expect("schema table");
        let s = derive_seed(seed, 3 * table_index(schema, name));
        transformers.insert(name.clone(), TableTransformer::fit(t, config.max_modes, s)?);
    }

    let mut jobs = Vec::with_capacity(order.len());
    for name in &order {
        let idx = table_index(schema, name);
        let layout = condition_layout(schema, &transformers, name, config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3 * idx + 1));
        let rows = transformers[name].encode_table(db.table(name).expect("schema table"), &mut rng)?;
        let conditions = real_conditions(db, name, &layout, rng.random())?;
        jobs.push((name.clone(), layout, TrainingData { rows, conditions }, derive_seed(seed, 3 * idx + 2)));
    }

    let fitted: Vec<(String, Result<Option<TableGanModel>, GanError>)> = jobs
        .into_par_iter()
        .map(|(name, layout, data, s)| {
            if data.rows.nrows() == 0 {
                return (name, Ok(None));
            }
            log::info!("fitting table `{name}` ({} rows, condition width {})", data.rows.nrows(), layout.width());
            let model = fit_table(transformers[&name].clone(), layout, &data, config, s).map(Some);
            (name, model)
        })
        .collect();
    let mut tables = BTreeMap::new();
    for (name, m) in fitted {
        let m = m.map_err(|source| SynthError::Gan { table: name.clone(), source })?;
        tables.insert(name, m);
    }

    let cardinalities =
        (0..schema.relationships().len()).map(|r| CardinalityModel::fit(r, &children_per_parent(db, r))).collect();
    let pairings = schema
        .table_names()
        .filter_map(|t| {
            let rels: Vec<usize> = schema.foreign_keys_of(t).map(|(i, _)| i).collect();
            (rels.len() > 1).then(|| (t.to_string(), PairingModel { table: t.to_string(), driver: rels[0], others: rels[1..].to_vec() }))
        })
        .collect();

    Ok(DatabaseModel {
        schema: schema.clone(),
        tables,
        transformers,
        cardinalities,
        pairings,
        row_counts: db.row_counts(),
        config: config.clone(),
    })
}

/// Samples a synthetic database. Root tables get `round(scale * n)` rows.
pub fn sample_database(model: &DatabaseModel, scale: f64, seed: u64) -> Result<Database, SynthError> {
    sample_database_traced(model, scale, seed).map(|(db, _)| db)
}

/// Like [`sample_database`], also returning the order in which tables were
/// generated.
pub fn sample_database_traced(model: &DatabaseModel, scale: f64, seed: u64) -> Result<(Database, Vec<String>), SynthError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(SynthError::InvalidScale(scale));
    }
    let schema = &model.schema;
    let rels = schema.relationships();
    let mut synth: BTreeMap<String, Table> = BTreeMap::new();
    // For every relationship, the synthetic parent row of each synthetic child row.
    let mut assigned: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut trace = Vec::new();

    for name in topological_order(schema) {
        let idx = table_index(schema, &name);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, idx));
        let fks: Vec<usize> = schema.foreign_keys_of(&name).map(|(i, _)| i).collect();

        let n = if let Some(&driver) = fks.first() {
            let parent_rows = synth[&rels[driver].parent_table].n_rows();
            let others_empty = fks[1..].iter().any(|&r| synth[&rels[r].parent_table].n_rows() == 0);
            let (support, weights) = model.cardinalities[driver].sampler();
            let mut drivers = Vec::new();
            if !others_empty {
                for p in 0..parent_rows {
                    let k = support[weights.sample(&mut rng)];
                    drivers.extend(std::iter::repeat_n(p, k));
                }
            }
            let n = drivers.len();
            assigned.insert(driver, drivers);
            for &r in &fks[1..] {
                let m = synth[&rels[r].parent_table].n_rows();
                assigned.insert(r, (0..n).map(|_| rng.random_range(0..m)).collect());
            }
            n
        } else {
            (scale * model.row_counts[&name] as f64).round() as usize
        };

        let features = match &model.tables[&name] {
            Some(m) => {
                let conditions = synthetic_conditions(&m.condition, &synth, &assigned, n, &mut rng)?;
                let encoded = m.generate(&conditions, &mut rng).map_err(|source| SynthError::Gan { table: name.clone(), source })?;
                m.transformer.decode_table(&encoded)?
            }
            None => {
                let t = &model.transformers[&name];
                t.decode_table(&Tensor2::zeros((0, t.width())))?
            }
        };
        let table = assemble(schema, &name, n, &features, &assigned)?;
        synth.insert(name.clone(), table);
        trace.push(name);
    }
    let db = Database::new(schema.clone(), synth.into_values().collect())?;
    Ok((db, trace))
}

/// Condition vectors for `n` new rows, reading ancestor features from the
/// already generated tables through the assigned foreign keys.
fn synthetic_conditions(
    layout: &ConditionLayout,
    synth: &BTreeMap<String, Table>,
    assigned: &BTreeMap<usize, Vec<usize>>,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Tensor2, SynthError> {
    let mut parts = Vec::with_capacity(layout.slots.len());
    for slot in &layout.slots {
        let mut rows: Vec<usize> = (0..n).collect();
        for rel in &slot.path {
            let map = &assigned[rel];
            rows.iter_mut().for_each(|r| *r = map[*r]);
        }
        let anc = &synth[&slot.table];
        let encoded = slot.transformer.encode_table(anc, rng)?;
        parts.push(encoded.select(Axis(0), &rows));
    }
    Ok(if parts.is_empty() {
        Tensor2::zeros((n, 0))
    } else {
        concatenate(Axis(1), &parts.iter().map(|p| p.view()).collect::<Vec<_>>()).expect("aligned rows")
    })
}

/// Builds the full table: primary keys `1..=n`, foreign keys pointing at the
/// assigned parents' keys, feature columns from `features`.
fn assemble(
    schema: &RelationalSchema,
    name: &str,
    n: usize,
    features: &Table,
    assigned: &BTreeMap<usize, Vec<usize>>,
) -> Result<Table, SynthError> {
    let spec = schema.table(name)?;
    let fk_of: BTreeMap<&str, usize> = schema.foreign_keys_of(name).map(|(i, fk)| (fk.child_column.as_str(), i)).collect();
    let mut columns = Vec::with_capacity(spec.columns.len());
    for c in &spec.columns {
        let data = if c.kind == ColumnKind::Id {
            let keys: Vec<Option<String>> = match fk_of.get(c.name.as_str()) {
                Some(rel) => assigned[rel].iter().map(|p| Some((p + 1).to_string())).collect(),
                None => (1..=n).map(|k| Some(k.to_string())).collect(),
            };
            ColumnData::Id(keys)
        } else {
            let col = features.column(&c.name).ok_or_else(|| TransformError::MissingColumn(name.to_string(), c.name.clone()))?;
            if col.data.len() == n {
                col.data.clone()
            } else {
                let mut d = ColumnData::empty(c.kind);
                (0..n).for_each(|_| d.push(Value::Missing));
                d
            }
        };
        columns.push(Column { name: c.name.clone(), data });
    }
    Ok(Table { name: name.to_string(), columns })
}
