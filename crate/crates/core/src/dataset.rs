//! Databases held as typed, row-aligned column stores, with CSV directory I/O
//! and referential-integrity checking.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use thiserror::Error;

use crate::schema::{ColumnKind, ColumnSpec, RelationalSchema, TableSpec};

/// Cells of one column. Missing values are `None`.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Id(Vec<Option<String>>),
    Categorical(Vec<Option<String>>),
    Numerical(Vec<Option<f64>>),
    Integer(Vec<Option<i64>>),
    /// Seconds since the Unix epoch.
    Datetime(Vec<Option<f64>>),
}

/// An owned cell value, used at row granularity.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Text(String),
    Float(f64),
    Int(i64),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Float(v) => Some(v),
            Value::Int(v) => Some(v as f64),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl ColumnData {
    pub fn empty(kind: ColumnKind) -> Self {
        match kind {
            ColumnKind::Id => ColumnData::Id(Vec::new()),
            ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
            ColumnKind::Numerical => ColumnData::Numerical(Vec::new()),
            ColumnKind::Integer => ColumnData::Integer(Vec::new()),
            ColumnKind::Datetime => ColumnData::Datetime(Vec::new()),
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Id(_) => ColumnKind::Id,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
            ColumnData::Numerical(_) => ColumnKind::Numerical,
            ColumnData::Integer(_) => ColumnKind::Integer,
            ColumnData::Datetime(_) => ColumnKind::Datetime,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Id(v) | ColumnData::Categorical(v) => v.len(),
            ColumnData::Numerical(v) | ColumnData::Datetime(v) => v.len(),
            ColumnData::Integer(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, row: usize) -> Value {
        match self {
            ColumnData::Id(v) | ColumnData::Categorical(v) => v[row].clone().map_or(Value::Missing, Value::Text),
            ColumnData::Numerical(v) | ColumnData::Datetime(v) => v[row].map_or(Value::Missing, Value::Float),
            ColumnData::Integer(v) => v[row].map_or(Value::Missing, Value::Int),
        }
    }

    /// Text view of an id or categorical cell.
    pub fn text(&self, row: usize) -> Option<&str> {
        match self {
            ColumnData::Id(v) | ColumnData::Categorical(v) => v[row].as_deref(),
            _ => None,
        }
    }

    /// Numeric view of a continuous cell; `None` for missing or non-numeric columns.
    pub fn number(&self, row: usize) -> Option<f64> {
        match self {
            ColumnData::Numerical(v) | ColumnData::Datetime(v) => v[row],
            ColumnData::Integer(v) => v[row].map(|x| x as f64),
            _ => None,
        }
    }

    /// Appends `value`, converting it to this column's type.
    ///
    /// Panics when the value variant cannot be stored in this column; callers
    /// build values from the same schema.
    pub fn push(&mut self, value: Value) {
        match (self, value) {
            (ColumnData::Id(v) | ColumnData::Categorical(v), Value::Text(s)) => v.push(Some(s)),
            (ColumnData::Id(v) | ColumnData::Categorical(v), Value::Missing) => v.push(None),
            (ColumnData::Numerical(v) | ColumnData::Datetime(v), Value::Float(x)) => v.push(Some(x)),
            (ColumnData::Numerical(v) | ColumnData::Datetime(v), Value::Int(x)) => v.push(Some(x as f64)),
            (ColumnData::Numerical(v) | ColumnData::Datetime(v), Value::Missing) => v.push(None),
            (ColumnData::Integer(v), Value::Int(x)) => v.push(Some(x)),
            (ColumnData::Integer(v), Value::Missing) => v.push(None),
            (col, value) => panic!("cannot store {value:?} in a {} column", col.kind().as_str()),
        }
    }

    /// Gathers the given rows, in order.
    pub fn take(&self, rows: &[usize]) -> Self {
        fn pick<T: Clone>(v: &[T], rows: &[usize]) -> Vec<T> {
            rows.iter().map(|&r| v[r].clone()).collect()
        }
        match self {
            ColumnData::Id(v) => ColumnData::Id(pick(v, rows)),
            ColumnData::Categorical(v) => ColumnData::Categorical(pick(v, rows)),
            ColumnData::Numerical(v) => ColumnData::Numerical(pick(v, rows)),
            ColumnData::Integer(v) => ColumnData::Integer(pick(v, rows)),
            ColumnData::Datetime(v) => ColumnData::Datetime(pick(v, rows)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

/// A table as a list of equal-length typed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
}

impl Table {
    /// Empty table with the columns of `spec`.
    pub fn with_spec(spec: &TableSpec) -> Self {
        Self {
            name: spec.name.clone(),
            columns: spec
                .columns
                .iter()
                .map(|c| Column { name: c.name.clone(), data: ColumnData::empty(c.kind) })
                .collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Column layout derived from the stored data; carries no key declarations.
    pub fn spec(&self) -> TableSpec {
        TableSpec {
            name: self.name.clone(),
            columns: self.columns.iter().map(|c| ColumnSpec::new(&c.name, c.data.kind())).collect(),
            primary_key: None,
        }
    }

    pub fn row(&self, row: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c.data.get(row)).collect()
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row arity does not match table `{}`", self.name);
        for (col, v) in self.columns.iter_mut().zip(row) {
            col.data.push(v);
        }
    }

    pub fn take_rows(&self, rows: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            columns: self.columns.iter().map(|c| Column { name: c.name.clone(), data: c.data.take(rows) }).collect(),
        }
    }

    /// The subset of columns that are not id-kind, in order.
    pub fn features(&self) -> Self {
        Self {
            name: self.name.clone(),
            columns: self.columns.iter().filter(|c| c.data.kind() != ColumnKind::Id).cloned().collect(),
        }
    }

    /// Maps primary-key text to row index (first occurrence wins).
    pub fn key_index(&self, column: &str) -> HashMap<&str, usize> {
        let mut index = HashMap::new();
        if let Some(col) = self.column(column) {
            for row in 0..col.data.len() {
                if let Some(key) = col.data.text(row) {
                    index.entry(key).or_insert(row);
                }
            }
        }
        index
    }

    fn conforms_to(&self, spec: &TableSpec) -> bool {
        self.columns.len() == spec.columns.len()
            && self.columns.iter().zip(&spec.columns).all(|(c, s)| c.name == s.name && c.data.kind() == s.kind)
            && self.columns.iter().all(|c| c.data.len() == self.n_rows())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: header mismatch, expected [{}] but found [{}]", .file.display(), .expected.join(","), .found.join(","))]
    HeaderMismatch { file: PathBuf, expected: Vec<String>, found: Vec<String> },
    #[error("table `{table}`, row {row}, column `{column}`: cannot parse {text:?} as {kind}")]
    ParseError { table: String, row: usize, column: String, text: String, kind: &'static str },
    #[error("{}: {message}", .file.display())]
    Csv { file: PathBuf, message: String },
    #[error("table `{table}` does not match its schema")]
    SchemaMismatch { table: String },
    #[error("I/O error on {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

/// A schema together with one conforming table per schema table.
#[derive(Debug, Clone, PartialEq)]
pub struct Database {
    schema: RelationalSchema,
    tables: BTreeMap<String, Table>,
}

impl Database {
    /// Checks that `tables` contains exactly one conforming table per schema table.
    pub fn new(schema: RelationalSchema, tables: Vec<Table>) -> Result<Self, DatasetError> {
        let mut map = BTreeMap::new();
        for t in tables {
            let spec = schema.table(&t.name).map_err(|_| DatasetError::SchemaMismatch { table: t.name.clone() })?;
            if !t.conforms_to(spec) {
                return Err(DatasetError::SchemaMismatch { table: t.name.clone() });
            }
            map.insert(t.name.clone(), t);
        }
        if let Some(missing) = schema.table_names().find(|n| !map.contains_key(*n)) {
            return Err(DatasetError::SchemaMismatch { table: missing.to_string() });
        }
        Ok(Self { schema, tables: map })
    }

    pub fn schema(&self) -> &RelationalSchema {
        &self.schema
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.get(name)
    }

    pub fn tables(&self) -> impl Iterator<Item = &Table> {
        self.tables.values()
    }

    pub fn row_counts(&self) -> BTreeMap<String, usize> {
        self.tables.iter().map(|(k, t)| (k.clone(), t.n_rows())).collect()
    }
}

/// One foreign-key value that does not resolve to a parent row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub table: String,
    pub column: String,
    pub row: usize,
    /// Offending value; empty when the key is missing.
    pub value: String,
}

/// Every foreign-key cell whose value is absent from the referenced primary key.
pub fn check_referential_integrity(db: &Database) -> Vec<Violation> {
    let mut out = Vec::new();
    for fk in db.schema.relationships() {
        let parent = &db.tables[&fk.parent_table];
        let keys: HashSet<&str> = parent.key_index(&fk.parent_column).into_keys().collect();
        let child = &db.tables[&fk.child_table];
        let col = child.column(&fk.child_column).expect("schema-conforming table");
        for row in 0..col.data.len() {
            match col.data.text(row) {
                Some(v) if keys.contains(v) => {}
                other => out.push(Violation {
                    table: fk.child_table.clone(),
                    column: fk.child_column.clone(),
                    row,
                    value: other.unwrap_or_default().to_string(),
                }),
            }
        }
    }
    out
}

const DATETIME_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

fn parse_datetime(text: &str) -> Option<f64> {
    if let Ok(v) = text.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9);
    }
    for fmt in [DATETIME_FORMAT, "%Y-%m-%dT%H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
            let utc = dt.and_utc();
            return Some(utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9);
        }
    }
    NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .ok()
        .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp() as f64)
}

fn format_datetime(seconds: f64) -> String {
    let whole = seconds.round();
    if whole == seconds {
        if let Some(dt) = DateTime::from_timestamp(whole as i64, 0) {
            return dt.format(DATETIME_FORMAT).to_string();
        }
    }
    // Fractional or out-of-range instants are kept as raw epoch seconds.
    format!("{seconds}")
}

fn parse_cell(kind: ColumnKind, text: &str) -> Option<Value> {
    if text.is_empty() {
        return Some(Value::Missing);
    }
    match kind {
        ColumnKind::Id | ColumnKind::Categorical => Some(Value::Text(text.to_string())),
        ColumnKind::Numerical => text.parse::<f64>().ok().filter(|v| v.is_finite()).map(Value::Float),
        ColumnKind::Integer => text.parse::<i64>().ok().map(Value::Int),
        ColumnKind::Datetime => parse_datetime(text).map(Value::Float),
    }
}

fn format_cell(data: &ColumnData, row: usize) -> String {
    match data {
        ColumnData::Id(v) | ColumnData::Categorical(v) => v[row].clone().unwrap_or_default(),
        ColumnData::Numerical(v) => v[row].map(|x| format!("{x}")).unwrap_or_default(),
        ColumnData::Integer(v) => v[row].map(|x| x.to_string()).unwrap_or_default(),
        ColumnData::Datetime(v) => v[row].map(format_datetime).unwrap_or_default(),
    }
}

/// Reads `<table>.csv` for every schema table from `dir`.
pub fn load_database(schema: &RelationalSchema, dir: &Path) -> Result<Database, DatasetError> {
    let mut tables = Vec::new();
    for spec in schema.tables() {
        tables.push(load_table(spec, &dir.join(format!("{}.csv", spec.name)))?);
    }
    Database::new(schema.clone(), tables)
}

fn load_table(spec: &TableSpec, path: &Path) -> Result<Table, DatasetError> {
    if !path.is_file() {
        return Err(DatasetError::MissingFile(path.to_path_buf()));
    }
    let csv_err = |e: csv::Error| DatasetError::Csv { file: path.to_path_buf(), message: e.to_string() };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_err)?;
    let found: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let expected: Vec<String> = spec.columns.iter().map(|c| c.name.clone()).collect();
    if found != expected {
        return Err(DatasetError::HeaderMismatch { file: path.to_path_buf(), expected, found });
    }
    let mut table = Table::with_spec(spec);
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let mut values = Vec::with_capacity(spec.columns.len());
        for (col, text) in spec.columns.iter().zip(record.iter()) {
            let value = parse_cell(col.kind, text).ok_or_else(|| DatasetError::ParseError {
                table: spec.name.clone(),
                row,
                column: col.name.clone(),
                text: text.to_string(),
                kind: col.kind.as_str(),
            })?;
            values.push(value);
        }
        table.push_row(values);
    }
    Ok(table)
}

/// Writes one `<table>.csv` per table into `dir`, creating it if needed.
pub fn write_database(db: &Database, dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir).map_err(|source| DatasetError::Io { path: dir.to_path_buf(), source })?;
    for table in db.tables() {
        write_table(table, &dir.join(format!("{}.csv", table.name)))?;
    }
    Ok(())
}

/// Writes a single table as CSV with a header row.
pub fn write_table(table: &Table, path: &Path) -> Result<(), DatasetError> {
    let csv_err = |e: csv::Error| DatasetError::Csv { file: path.to_path_buf(), message: e.to_string() };
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(csv_err)?;
    writer.write_record(table.columns.iter().map(|c| c.name.as_str())).map_err(csv_err)?;
    for row in 0..table.n_rows() {
        writer.write_record(table.columns.iter().map(|c| format_cell(&c.data, row))).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::validate_schema;

    fn store_sales() -> RelationalSchema {
        validate_schema(
            r#"{"tables": {
                "store": {"primary_key": "id", "columns": {"id": "id", "kind": "categorical", "opened": "datetime"}},
                "sales": {"primary_key": "id", "columns": {"id": "id", "store_id": "id", "amount": "numerical", "items": "integer"},
                          "foreign_keys": [{"column": "store_id", "references": {"table": "store", "column": "id"}}]}}}"#,
        )
        .unwrap()
    }

    fn write(dir: &Path, name: &str, text: &str) {
        fs::write(dir.join(name), text).unwrap();
    }

    fn fixture(dir: &Path) {
        write(dir, "store.csv", "id,kind,opened\n1,a,2020-01-01 00:00:00\n2,b,2021-06-15\n");
        write(dir, "sales.csv", "id,store_id,amount,items\n1,1,10.5,3\n2,1,,4\n3,2,7.25,\n");
    }

    #[test]
    fn loads_fixture() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        let db = load_database(&store_sales(), dir.path()).unwrap();
        assert_eq!(db.row_counts(), BTreeMap::from([("sales".into(), 3), ("store".into(), 2)]));
        let sales = db.table("sales").unwrap();
        assert_eq!(sales.column("amount").unwrap().data, ColumnData::Numerical(vec![Some(10.5), None, Some(7.25)]));
        assert_eq!(sales.column("items").unwrap().data, ColumnData::Integer(vec![Some(3), Some(4), None]));
        let store = db.table("store").unwrap();
        assert_eq!(store.column("opened").unwrap().data.number(0), Some(1_577_836_800.0));
        assert_eq!(store.column("opened").unwrap().data.number(1), Some(1_623_715_200.0));
        assert!(check_referential_integrity(&db).is_empty());
    }

    #[test]
    fn header_only_csv_is_empty_table() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "store.csv", "id,kind,opened\n");
        write(dir.path(), "sales.csv", "id,store_id,amount,items\n");
        let db = load_database(&store_sales(), dir.path()).unwrap();
        assert_eq!(db.table("store").unwrap().n_rows(), 0);
        assert_eq!(db.table("sales").unwrap().n_rows(), 0);
    }

    #[test]
    fn parse_error_names_the_cell() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(dir.path(), "sales.csv", "id,store_id,amount,items\n1,1,abc,3\n");
        let err = load_database(&store_sales(), dir.path()).unwrap_err();
        match &err {
            DatasetError::ParseError { table, row, column, text, .. } => {
                assert_eq!((table.as_str(), *row, column.as_str(), text.as_str()), ("sales", 0, "amount", "abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("abc"));
    }

    #[test]
    fn missing_file_and_header_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "store.csv", "id,kind,opened\n");
        let err = load_database(&store_sales(), dir.path()).unwrap_err();
        assert!(matches!(&err, DatasetError::MissingFile(p) if p.ends_with("sales.csv")));
        assert!(err.to_string().contains("sales.csv"));

        write(dir.path(), "sales.csv", "id,amount,store_id,items\n");
        assert!(matches!(load_database(&store_sales(), dir.path()), Err(DatasetError::HeaderMismatch { .. })));
    }

    #[test]
    fn dangling_key_reported() {
        let dir = tempfile::tempdir().unwrap();
        fixture(dir.path());
        write(dir.path(), "sales.csv", "id,store_id,amount,items\n1,1,1,1\n2,99,2,2\n3,,3,3\n");
        let db = load_database(&store_sales(), dir.path()).unwrap();
        let v = check_referential_integrity(&db);
        assert_eq!(
            v,
            vec![
                Violation { table: "sales".into(), column: "store_id".into(), row: 1, value: "99".into() },
                Violation { table: "sales".into(), column: "store_id".into(), row: 2, value: String::new() },
            ]
        );
    }

    #[test]
    fn corrupted_rows_are_exactly_reported() {
        use rand::{Rng, SeedableRng};
        let schema = store_sales();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut store = Table::with_spec(schema.table("store").unwrap());
        for i in 1..=10 {
            store.push_row(vec![Value::Text(i.to_string()), Value::Text("a".into()), Value::Float(0.0)]);
        }
        let mut corrupted: Vec<usize> = Vec::new();
        while corrupted.len() < 5 {
            let r = rng.random_range(0..1000);
            if !corrupted.contains(&r) {
                corrupted.push(r);
            }
        }
        corrupted.sort_unstable();
        let mut sales = Table::with_spec(schema.table("sales").unwrap());
        for i in 0..1000 {
            let fk = if corrupted.contains(&i) { format!("x{i}") } else { rng.random_range(1..=10).to_string() };
            sales.push_row(vec![Value::Text(i.to_string()), Value::Text(fk), Value::Float(1.0), Value::Int(1)]);
        }
        let db = Database::new(schema, vec![store, sales]).unwrap();
        let rows: Vec<usize> = check_referential_integrity(&db).into_iter().map(|v| v.row).collect();
        assert_eq!(rows, corrupted);
    }

    #[test]
    fn database_rejects_nonconforming_tables() {
        let schema = store_sales();
        let store = Table::with_spec(schema.table("store").unwrap());
        assert!(matches!(Database::new(schema.clone(), vec![store.clone()]), Err(DatasetError::SchemaMismatch { .. })));
        let mut wrong = Table::with_spec(schema.table("sales").unwrap());
        wrong.columns.swap(2, 3);
        assert!(matches!(Database::new(schema, vec![store, wrong]), Err(DatasetError::SchemaMismatch { .. })));
    }

    #[test]
    fn csv_quoting_survives_round_trip() {
        let schema = validate_schema(r#"{"tables": {"t": {"primary_key": null, "columns": {"c": "categorical"}}}}"#).unwrap();
        let mut t = Table::with_spec(schema.table("t").unwrap());
        for s in ["plain", "with,comma", "with \"quote\"", "multi\nline"] {
            t.push_row(vec![Value::Text(s.into())]);
        }
        t.push_row(vec![Value::Missing]);
        let db = Database::new(schema.clone(), vec![t]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_database(&db, dir.path()).unwrap();
        assert_eq!(load_database(&schema, dir.path()).unwrap(), db);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn schema() -> RelationalSchema {
            validate_schema(
                r#"{"tables": {"t": {"primary_key": "id", "columns": {
                    "id": "id", "cat": "categorical", "num": "numerical", "int": "integer", "when": "datetime"}}}}"#,
            )
            .unwrap()
        }

        fn cell_num() -> impl Strategy<Value = Option<f64>> {
            prop_oneof![Just(None), any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(Some)]
        }

        proptest! {
            #[test]
            fn write_then_load_is_identity(
                rows in proptest::collection::vec(
                    ("[a-z ,\"]{1,6}", cell_num(), proptest::option::of(any::<i64>()), proptest::option::of(-4_000_000_000i64..4_000_000_000)),
                    0..20)
            ) {
                let schema = schema();
                let mut t = Table::with_spec(schema.table("t").unwrap());
                for (i, (cat, num, int, when)) in rows.into_iter().enumerate() {
                    t.push_row(vec![
                        Value::Text((i + 1).to_string()),
                        Value::Text(cat),
                        num.map_or(Value::Missing, Value::Float),
                        int.map_or(Value::Missing, Value::Int),
                        when.map_or(Value::Missing, |s| Value::Float(s as f64)),
                    ]);
                }
                let db = Database::new(schema.clone(), vec![t]).unwrap();
                let dir = tempfile::tempdir().unwrap();
                write_database(&db, dir.path()).unwrap();
                let back = load_database(&schema, dir.path()).unwrap();
                let (a, b) = (db.table("t").unwrap(), back.table("t").unwrap());
                prop_assert_eq!(a.n_rows(), b.n_rows());
                for (ca, cb) in a.columns.iter().zip(&b.columns) {
                    for r in 0..a.n_rows() {
                        match (ca.data.number(r), cb.data.number(r)) {
                            (Some(x), Some(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                            _ => prop_assert_eq!(ca.data.get(r), cb.data.get(r)),
                        }
                    }
                }
            }
        }
    }
}
