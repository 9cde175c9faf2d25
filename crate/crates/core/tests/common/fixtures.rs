use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rctgan::dataset::{Column, ColumnData, Database, Table};
use rctgan::schema::{denormalize_with_depth, RelationalSchema};

fn ids(n: usize) -> ColumnData {
    ColumnData::Id((1..=n).map(|k| Some(k.to_string())).collect())
}

fn refs(parents: impl IntoIterator<Item = usize>) -> ColumnData {
    ColumnData::Id(parents.into_iter().map(|p| Some((p + 1).to_string())).collect())
}

fn col(name: &str, data: ColumnData) -> Column {
    Column { name: name.into(), data }
}

fn table(name: &str, columns: Vec<Column>) -> Table {
    Table { name: name.into(), columns }
}

pub const STORE_SALES: &str = r#"{"tables": {
    "store": {"primary_key": "id", "columns": {"id": "id", "region": "categorical"}},
    "sales": {"primary_key": "id", "columns": {"id": "id", "store_id": "id", "amount": "numerical"},
              "foreign_keys": [{"column": "store_id", "references": {"table": "store", "column": "id"}}]}
}}"#;

/// Two stores; store 1 has two sales and store 2 has one.
pub fn store_sales() -> Database {
    store_sales_with(&[2, 1])
}

/// Stores with the given number of sales each.
pub fn store_sales_with(children: &[usize]) -> Database {
    let schema = RelationalSchema::from_json(STORE_SALES).unwrap();
    let n = children.len();
    let parents: Vec<usize> = children.iter().enumerate().flat_map(|(p, &k)| std::iter::repeat_n(p, k)).collect();
    let m = parents.len();
    let store = table(
        "store",
        vec![col("id", ids(n)), col("region", ColumnData::Categorical((0..n).map(|i| Some(["n", "s"][i % 2].into())).collect()))],
    );
    let sales = table(
        "sales",
        vec![
            col("id", ids(m)),
            col("store_id", refs(parents)),
            col("amount", ColumnData::Numerical((0..m).map(|i| Some(10.0 + (i % 7) as f64)).collect())),
        ],
    );
    Database::new(schema, vec![store, sales]).unwrap()
}

pub const E1_SCHEMA: &str = r#"{"tables": {
    "parent": {"primary_key": "id", "columns": {"id": "id", "c": "categorical"}},
    "child": {"primary_key": "id", "columns": {"id": "id", "parent_id": "id", "v": "numerical"},
              "foreign_keys": [{"column": "parent_id", "references": {"table": "parent", "column": "id"}}]}
}}"#;

fn category_values(n_per_category: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut is_b: Vec<bool> = (0..2 * n_per_category).map(|i| i >= n_per_category).collect();
    rand::seq::SliceRandom::shuffle(is_b.as_mut_slice(), rng);
    is_b
}

fn category_column(is_b: &[bool]) -> ColumnData {
    ColumnData::Categorical(is_b.iter().map(|&b| Some(if b { "B" } else { "A" }.into())).collect())
}

/// `v ~ N(0, 1)` under category A and `N(5, 1)` under B.
fn child_values(is_b: impl Iterator<Item = bool>, rng: &mut ChaCha8Rng) -> ColumnData {
    let a = Normal::new(0.0, 1.0).unwrap();
    let b = Normal::new(5.0, 1.0).unwrap();
    ColumnData::Numerical(is_b.map(|x| Some(if x { b.sample(rng) } else { a.sample(rng) })).collect())
}

/// Parent with category A or B (`n_per_category` rows each), two child rows per
/// parent whose value depends on the parent's category.
pub fn e1_database(n_per_category: usize, seed: u64) -> Database {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let is_b = category_values(n_per_category, &mut rng);
    let n = is_b.len();
    let parents: Vec<usize> = (0..n).flat_map(|p| [p, p]).collect();
    let parent = table("parent", vec![col("id", ids(n)), col("c", category_column(&is_b))]);
    let v = child_values(parents.iter().map(|&p| is_b[p]), &mut rng);
    let child = table("child", vec![col("id", ids(parents.len())), col("parent_id", refs(parents)), col("v", v)]);
    Database::new(RelationalSchema::from_json(E1_SCHEMA).unwrap(), vec![parent, child]).unwrap()
}

pub const E2_SCHEMA: &str = r#"{"tables": {
    "a": {"primary_key": "id", "columns": {"id": "id", "c": "categorical"}},
    "b": {"primary_key": "id", "columns": {"id": "id", "a_id": "id", "k": "categorical"},
          "foreign_keys": [{"column": "a_id", "references": {"table": "a", "column": "id"}}]},
    "c": {"primary_key": "id", "columns": {"id": "id", "b_id": "id", "v": "numerical"},
          "foreign_keys": [{"column": "b_id", "references": {"table": "b", "column": "id"}}]}
}}"#;

/// Chain `a -> b -> c`: `a` carries the category, `b` only a constant, and
/// the value in `c` depends on the category of its grandparent.
pub fn e2_database(n_per_category: usize, seed: u64) -> Database {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let is_b = category_values(n_per_category, &mut rng);
    let n = is_b.len();
    let a_of_b: Vec<usize> = (0..n).flat_map(|p| [p, p]).collect();
    let b_of_c: Vec<usize> = (0..a_of_b.len()).flat_map(|p| [p, p]).collect();
    let a = table("a", vec![col("id", ids(n)), col("c", category_column(&is_b))]);
    let b = table(
        "b",
        vec![
            col("id", ids(a_of_b.len())),
            col("a_id", refs(a_of_b.iter().copied())),
            col("k", ColumnData::Categorical(vec![Some("k".into()); a_of_b.len()])),
        ],
    );
    let v = child_values(b_of_c.iter().map(|&p| is_b[a_of_b[p]]), &mut rng);
    let c = table("c", vec![col("id", ids(b_of_c.len())), col("b_id", refs(b_of_c)), col("v", v)]);
    Database::new(RelationalSchema::from_json(E2_SCHEMA).unwrap(), vec![a, b, c]).unwrap()
}

/// `|mean(v | B) - mean(v | A)|` for the value column `v` of `child` against
/// the category column `c` of the ancestor `depth` hops up (prefix `anc__`).
/// `None` when either category has no rows.
pub fn conditional_gap(db: &Database, child: &str, ancestor: &str, depth: usize) -> Option<f64> {
    let flat = denormalize_with_depth(db, child, depth).unwrap();
    let v = &flat.column("v").unwrap().data;
    let c = &flat.column(&format!("{ancestor}__c")).unwrap().data;
    let (mut sum, mut count) = ([0.0; 2], [0usize; 2]);
    for r in 0..flat.n_rows() {
        if let (Some(x), Some(k)) = (v.number(r), c.text(r)) {
            let i = usize::from(k == "B");
            sum[i] += x;
            count[i] += 1;
        }
    }
    (count[0] > 0 && count[1] > 0).then(|| (sum[1] / count[1] as f64 - sum[0] / count[0] as f64).abs())
}

/// A random acyclic schema of 1 to `max_tables` tables with random data.
///
/// Table `t{i}` may reference any earlier table, sometimes twice. Columns are
/// drawn from all feature kinds, with occasional missing cells, and some
/// parents are left without children.
pub fn random_database(seed: u64, max_tables: usize) -> Database {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tables = rng.random_range(1..=max_tables);
    let mut docs = Vec::new();
    let mut tables: Vec<Table> = Vec::new();
    for i in 0..n_tables {
        let name = format!("t{i}");
        let n = rng.random_range(5..40);
        let mut columns = vec![col("id", ids(n))];
        let mut spec = vec![r#""id": "id""#.to_string()];
        let mut fks = Vec::new();
        if i > 0 {
            let n_fks = if i > 1 && rng.random_bool(0.3) { 2 } else { 1 };
            for f in 0..n_fks {
                let p = rng.random_range(0..i);
                let parent_rows = tables[p].n_rows();
                let fk = format!("fk{f}");
                // Skew toward low-numbered parents so that fan-outs vary and
                // some parents stay childless.
                let parents: Vec<usize> = (0..n).map(|_| rng.random_range(0..parent_rows.div_ceil(2).max(1))).collect();
                columns.push(col(&fk, refs(parents)));
                spec.push(format!(r#""{fk}": "id""#));
                fks.push(format!(r#"{{"column": "{fk}", "references": {{"table": "t{p}", "column": "id"}}}}"#));
            }
        }
        for j in 0..rng.random_range(0..4) {
            let missing = rng.random_bool(0.3);
            let cell = |rng: &mut ChaCha8Rng| !(missing && rng.random_bool(0.1));
            let (kind, data) = match rng.random_range(0..4) {
                0 => ("categorical", ColumnData::Categorical((0..n).map(|_| cell(&mut rng).then(|| format!("k{}", rng.random_range(0..3)))).collect())),
                1 => ("numerical", ColumnData::Numerical((0..n).map(|_| cell(&mut rng).then(|| rng.random_range(-5.0..5.0))).collect())),
                2 => ("integer", ColumnData::Integer((0..n).map(|_| cell(&mut rng).then(|| rng.random_range(0..100))).collect())),
                _ => ("datetime", ColumnData::Datetime((0..n).map(|_| cell(&mut rng).then(|| rng.random_range(0..1_000_000) as f64)).collect())),
            };
            let cname = format!("x{j}");
            spec.push(format!(r#""{cname}": "{kind}""#));
            columns.push(col(&cname, data));
        }
        docs.push(format!(
            r#""{name}": {{"primary_key": "id", "columns": {{{}}}, "foreign_keys": [{}]}}"#,
            spec.join(", "),
            fks.join(", ")
        ));
        tables.push(table(&name, columns));
    }
    let schema = RelationalSchema::from_json(&format!(r#"{{"tables": {{{}}}}}"#, docs.join(", "))).unwrap();
    Database::new(schema, tables).unwrap()
}
