//! Reversible encoding of table rows into fixed-width numeric vectors.
//!
//! Continuous columns use mode-specific normalisation: a Gaussian mixture is
//! fitted to the column, and each value `x` becomes a scalar
//! `alpha = (x - mean_m) / (4 std_m)` (clipped to `[-1, 1]`) followed by a
//! one-hot indicator of the mode `m` it was assigned to. Categorical columns
//! become one-hot vectors. The concatenation of all column encodings is the
//! row vector the GAN sees; [`RowLayout`] records where each column lives.
//!
//! [`ConditionLayout`] does the same for the feature rows of a table's
//! ancestors, producing the condition vector a child row is generated from.

mod gmm;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Column, ColumnData, Table, Value};
use crate::schema::ColumnKind;

pub use gmm::{Mode, PRUNE_WEIGHT};

/// Scale applied to the mode standard deviation when normalising.
pub const SCALE: f64 = 4.0;
/// Category that stands in for missing categorical cells.
pub const MISSING_CATEGORY: &str = "__missing__";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("column `{0}` has no values to fit")]
    EmptyColumn(String),
    #[error("column `{0}` contains non-finite values")]
    NonFinite(String),
    #[error("expected width {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("column `{column}`: category {value:?} was not seen during fitting")]
    UnknownCategory { column: String, value: String },
    #[error("column `{column}`: value {value:?} does not fit a {kind} column")]
    TypeMismatch { column: String, value: String, kind: &'static str },
    #[error("table `{0}` lacks column `{1}`")]
    MissingColumn(String, String),
    #[error("no ancestor row supplied for condition slot {slot} (`{table}`)")]
    MissingAncestorRow { slot: usize, table: String },
}

/// Mode-specific normaliser for one continuous column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEncoder {
    pub modes: Vec<Mode>,
    /// Column mean, substituted for missing cells.
    pub fill: f64,
    /// True when the column was constant and fitted with a single narrow mode.
    pub degenerate: bool,
}

impl ContinuousEncoder {
    pub fn width(&self) -> usize {
        1 + self.modes.len()
    }

    /// Normalised scalar and mode index for `x`. The mode is drawn with
    /// probability proportional to `weight_m * N(x; mean_m, std_m)`.
    pub fn encode(&self, x: f64, rng: &mut impl Rng) -> (f64, usize) {
        let mode = if self.modes.len() == 1 {
            0
        } else {
            let logp: Vec<f64> = self.modes.iter().map(|m| m.weight.ln() + m.log_density(x)).collect();
            let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let p: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
            let mut target = rng.random::<f64>() * p.iter().sum::<f64>();
            let mut pick = p.len() - 1;
            for (i, w) in p.iter().enumerate() {
                if target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        };
        let m = &self.modes[mode];
        (((x - m.mean) / (SCALE * m.std)).clamp(-1.0, 1.0), mode)
    }

    pub fn decode(&self, alpha: f64, mode: usize) -> f64 {
        let m = &self.modes[mode];
        alpha.clamp(-1.0, 1.0) * SCALE * m.std + m.mean
    }
}

/// Fits a mode-specific normaliser with at most `max_modes` modes.
///
/// A constant column gets one mode at the constant with
/// `std = max(|mean|, 1) * 1e-6`.
pub fn fit_continuous(values: &[f64], max_modes: usize, seed: u64) -> Result<ContinuousEncoder, TransformError> {
    if values.is_empty() {
        return Err(TransformError::EmptyColumn(String::new()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(TransformError::NonFinite(String::new()));
    }
    let fill = values.iter().sum::<f64>() / values.len() as f64;
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Ok(ContinuousEncoder {
            modes: vec![Mode { weight: 1.0, mean: first, std: first.abs().max(1.0) * 1e-6 }],
            fill,
            degenerate: true,
        });
    }
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    Ok(ContinuousEncoder { modes: gmm::fit_mixture(values, max_modes, &mut rng), fill, degenerate: false })
}

/// One-hot encoder for a categorical column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteEncoder {
    /// Sorted distinct categories; missing cells map to [`MISSING_CATEGORY`].
    pub categories: Vec<String>,
    pub frequencies: Vec<f64>,
}

impl DiscreteEncoder {
    pub fn fit<'a>(values: impl IntoIterator<Item = Option<&'a str>>) -> Self {
        let mut counts: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
        let mut total = 0usize;
        for v in values {
            *counts.entry(v.unwrap_or(MISSING_CATEGORY)).or_default() += 1;
            total += 1;
        }
        let total = total.max(1) as f64;
        Self {
            categories: counts.keys().map(|s| s.to_string()).collect(),
            frequencies: counts.values().map(|&c| c as f64 / total).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.categories.len()
    }

    pub fn index_of(&self, value: Option<&str>) -> Option<usize> {
        let key = value.unwrap_or(MISSING_CATEGORY);
        self.categories.binary_search_by(|c| c.as_str().cmp(key)).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnEncoder {
    Continuous(ContinuousEncoder),
    Discrete(DiscreteEncoder),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnTransformer {
    pub name: String,
    pub kind: ColumnKind,
    pub encoder: ColumnEncoder,
}

impl ColumnTransformer {
    pub fn width(&self) -> usize {
        match &self.encoder {
            ColumnEncoder::Continuous(e) => e.width(),
            ColumnEncoder::Discrete(e) => e.width(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpanKind {
    /// One tanh scalar followed by a `modes`-wide one-hot.
    Continuous { modes: usize },
    /// A `categories`-wide one-hot.
    Discrete { categories: usize },
}

/// Location of one column inside an encoded row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub column: String,
    pub offset: usize,
    pub width: usize,
    pub kind: SpanKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Tanh,
    Softmax,
}

/// A contiguous range of output units sharing one output activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationSpan {
    pub offset: usize,
    pub width: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowLayout {
    pub spans: Vec<Span>,
    pub width: usize,
}

impl RowLayout {
    /// Output activations matching this layout: tanh on each continuous
    /// scalar, softmax on each one-hot block.
    pub fn activation_spans(&self) -> Vec<ActivationSpan> {
        let mut out = Vec::new();
        for s in &self.spans {
            match s.kind {
                SpanKind::Continuous { modes } => {
                    out.push(ActivationSpan { offset: s.offset, width: 1, activation: Activation::Tanh });
                    out.push(ActivationSpan { offset: s.offset + 1, width: modes, activation: Activation::Softmax });
                }
                SpanKind::Discrete { categories } => {
                    out.push(ActivationSpan { offset: s.offset, width: categories, activation: Activation::Softmax })
                }
            }
        }
        out
    }

    /// Discrete spans, in layout order.
    pub fn discrete_spans(&self) -> impl Iterator<Item = &Span> {
        self.spans.iter().filter(|s| matches!(s.kind, SpanKind::Discrete { .. }))
    }
}

/// Index of the largest entry; the first one wins ties, so an all-zero span
/// decodes to index 0.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Encoders for every feature column of one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableTransformer {
    pub table: String,
    pub columns: Vec<ColumnTransformer>,
    pub layout: RowLayout,
}

fn derive_column_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl TableTransformer {
    /// Fits encoders for the non-id columns of `table`.
    pub fn fit(table: &Table, max_modes: usize, seed: u64) -> Result<Self, TransformError> {
        let mut columns = Vec::new();
        for (i, col) in table.columns.iter().enumerate() {
            let kind = col.data.kind();
            let encoder = match &col.data {
                ColumnData::Id(_) => continue,
                ColumnData::Categorical(v) => ColumnEncoder::Discrete(DiscreteEncoder::fit(v.iter().map(|c| c.as_deref()))),
                data => {
                    let mut observed: Vec<f64> = (0..data.len()).filter_map(|r| data.number(r)).collect();
                    if observed.is_empty() {
                        observed.push(0.0);
                    }
                    let enc = fit_continuous(&observed, max_modes, derive_column_seed(seed, i)).map_err(|e| match e {
                        TransformError::NonFinite(_) => TransformError::NonFinite(col.name.clone()),
                        TransformError::EmptyColumn(_) => TransformError::EmptyColumn(col.name.clone()),
                        other => other,
                    })?;
                    ColumnEncoder::Continuous(enc)
                }
            };
            columns.push(ColumnTransformer { name: col.name.clone(), kind, encoder });
        }
        Ok(Self::from_columns(table.name.clone(), columns))
    }

    pub fn from_columns(table: String, columns: Vec<ColumnTransformer>) -> Self {
        let mut spans = Vec::with_capacity(columns.len());
        let mut offset = 0;
        for c in &columns {
            let width = c.width();
            let kind = match &c.encoder {
                ColumnEncoder::Continuous(e) => SpanKind::Continuous { modes: e.modes.len() },
                ColumnEncoder::Discrete(e) => SpanKind::Discrete { categories: e.width() },
            };
            spans.push(Span { column: c.name.clone(), offset, width, kind });
            offset += width;
        }
        Self { table, columns, layout: RowLayout { spans, width: offset } }
    }

    pub fn width(&self) -> usize {
        self.layout.width
    }

    /// Encodes one row of feature values (one per feature column, in order).
    pub fn encode_row(&self, row: &[Value], rng: &mut impl Rng) -> Result<Vec<f64>, TransformError> {
        let mut out = vec![0.0; self.width()];
        self.encode_into(row, &mut out, rng)?;
        Ok(out)
    }

    fn encode_into(&self, row: &[Value], out: &mut [f64], rng: &mut impl Rng) -> Result<(), TransformError> {
        if row.len() != self.columns.len() {
            return Err(TransformError::WidthMismatch { expected: self.columns.len(), found: row.len() });
        }
        for ((col, span), value) in self.columns.iter().zip(&self.layout.spans).zip(row) {
            let dst = &mut out[span.offset..span.offset + span.width];
            dst.fill(0.0);
            match &col.encoder {
                ColumnEncoder::Continuous(enc) => {
                    let x = match value {
                        Value::Missing => enc.fill,
                        v => v.as_f64().ok_or_else(|| TransformError::TypeMismatch {
                            column: col.name.clone(),
                            value: format!("{v:?}"),
                            kind: col.kind.as_str(),
                        })?,
                    };
                    let (alpha, mode) = enc.encode(x, rng);
                    dst[0] = alpha;
                    dst[1 + mode] = 1.0;
                }
                ColumnEncoder::Discrete(enc) => {
                    let key = match value {
                        Value::Missing => None,
                        Value::Text(s) => Some(s.as_str()),
                        v => {
                            return Err(TransformError::TypeMismatch {
                                column: col.name.clone(),
                                value: format!("{v:?}"),
                                kind: col.kind.as_str(),
                            })
                        }
                    };
                    let idx = enc.index_of(key).ok_or_else(|| TransformError::UnknownCategory {
                        column: col.name.clone(),
                        value: key.unwrap_or_default().to_string(),
                    })?;
                    dst[idx] = 1.0;
                }
            }
        }
        Ok(())
    }

    /// Decodes one encoded row: argmax on every one-hot block, inverse
    /// normalisation on continuous scalars, rounding for integer and
    /// datetime columns.
    pub fn decode_row(&self, encoded: &[f64]) -> Result<Vec<Value>, TransformError> {
        if encoded.len() != self.width() {
            return Err(TransformError::WidthMismatch { expected: self.width(), found: encoded.len() });
        }
        Ok(self
            .columns
            .iter()
            .zip(&self.layout.spans)
            .map(|(col, span)| {
                let src = &encoded[span.offset..span.offset + span.width];
                match &col.encoder {
                    ColumnEncoder::Continuous(enc) => {
                        let x = enc.decode(src[0], argmax(&src[1..]));
                        match col.kind {
                            ColumnKind::Integer => Value::Int(x.round() as i64),
                            ColumnKind::Datetime => Value::Float(x.round()),
                            _ => Value::Float(x),
                        }
                    }
                    ColumnEncoder::Discrete(enc) => {
                        let cat = &enc.categories[argmax(src)];
                        if cat == MISSING_CATEGORY {
                            Value::Missing
                        } else {
                            Value::Text(cat.clone())
                        }
                    }
                }
            })
            .collect())
    }

    /// Encodes the feature columns of `table` (matched by name) into an
    /// `n_rows x width` matrix.
    pub fn encode_table(&self, table: &Table, rng: &mut impl Rng) -> Result<Array2<f64>, TransformError> {
        let cols: Vec<&Column> = self
            .columns
            .iter()
            .map(|c| table.column(&c.name).ok_or_else(|| TransformError::MissingColumn(table.name.clone(), c.name.clone())))
            .collect::<Result<_, _>>()?;
        let mut out = Array2::zeros((table.n_rows(), self.width()));
        for (r, mut dst) in out.rows_mut().into_iter().enumerate() {
            let row: Vec<Value> = cols.iter().map(|c| c.data.get(r)).collect();
            self.encode_into(&row, dst.as_slice_mut().expect("standard layout"), rng)?;
        }
        Ok(out)
    }

    /// Decodes every row of `encoded` into a table holding only feature columns.
    pub fn decode_table(&self, encoded: &Array2<f64>) -> Result<Table, TransformError> {
        let mut table = Table {
            name: self.table.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| Column { name: c.name.clone(), data: ColumnData::empty(c.kind) })
                .collect(),
        };
        for row in encoded.rows() {
            let values = match row.as_slice() {
                Some(s) => self.decode_row(s)?,
                None => self.decode_row(&row.to_vec())?,
            };
            table.push_row(values);
        }
        Ok(table)
    }
}

/// One ancestor whose features are part of the condition vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSlot {
    pub table: String,
    pub depth: usize,
    /// Relationship indices from the conditioned table up to this ancestor.
    pub path: Vec<usize>,
    pub transformer: TableTransformer,
}

/// Ordered ancestor slots making up a table's condition vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConditionLayout {
    pub slots: Vec<ConditionSlot>,
}

impl ConditionLayout {
    pub fn width(&self) -> usize {
        self.slots.iter().map(|s| s.transformer.width()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Concatenates the encoded feature rows of each slot's ancestor, in slot order.
    pub fn build_condition(&self, rows: &[Option<Vec<Value>>], rng: &mut impl Rng) -> Result<Vec<f64>, TransformError> {
        let mut out = Vec::with_capacity(self.width());
        for (i, slot) in self.slots.iter().enumerate() {
            let row = rows
                .get(i)
                .and_then(Option::as_ref)
                .ok_or_else(|| TransformError::MissingAncestorRow { slot: i, table: slot.table.clone() })?;
            out.extend(slot.transformer.encode_row(row, rng)?);
        }
        Ok(out)
    }
}
