//! Logistic detection: how well a linear classifier separates real rows from
//! synthetic ones.
//!
//! The cross-validated ROC AUC of the classifier is mapped to a score with
//! `1 - (2 max(0.5, auc) - 1)`, so 1 means indistinguishable and 0 means
//! perfectly separable. Applied to single tables this gives LD; applied to
//! child tables joined with their parents it gives P-C LD.

mod logistic;

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{ColumnData, Database, Table};
use crate::schema::{denormalize, denormalize_with_depth, DanglingForeignKey, SchemaError};
use crate::transform::MISSING_CATEGORY;

pub use logistic::{roc_auc, standardize, standardizer, train_logistic, LogisticModel};

pub const DEFAULT_FOLDS: usize = 3;
/// L2 weight of the detector.
pub const L2: f64 = 1e-4;
/// Gradient-descent epochs of the detector.
pub const EPOCHS: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("both classes need at least one row")]
    SingleClass,
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{rows} rows per class after balancing cannot fill {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("real and synthetic `{0}` have different feature columns")]
    ColumnMismatch(String),
    #[error(transparent)]
    Dangling(#[from] DanglingForeignKey),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// `1 - (2 max(0.5, auc) - 1)`.
pub fn ld_from_auc(auc: f64) -> f64 {
    1.0 - (2.0 * auc.max(0.5) - 1.0)
}

/// Score and cross-validated AUC of one detection run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub score: f64,
    pub auc: f64,
    pub n_real: usize,
    pub n_synth: usize,
}

enum Feature {
    Numeric { fill: f64 },
    OneHot { categories: Vec<String> },
}

/// Feature matrix for the union of two tables with the same feature columns:
/// continuous columns as values (missing cells take the observed mean),
/// categorical columns one-hot over the categories seen in either table.
fn design(real: &Table, synth: &Table) -> Result<(Array2<f64>, Array2<f64>), DetectionError> {
    let rf = real.features();
    let sf = synth.features();
    let same = rf.columns.len() == sf.columns.len()
        && rf.columns.iter().zip(&sf.columns).all(|(a, b)| a.name == b.name && a.data.kind() == b.data.kind());
    if !same {
        return Err(DetectionError::ColumnMismatch(real.name.clone()));
    }
    let mut features = Vec::with_capacity(rf.columns.len());
    for (a, b) in rf.columns.iter().zip(&sf.columns) {
        features.push(match (&a.data, &b.data) {
            (ColumnData::Categorical(x), ColumnData::Categorical(y)) => {
                let cats: BTreeSet<String> =
                    x.iter().chain(y).map(|c| c.clone().unwrap_or_else(|| MISSING_CATEGORY.to_string())).collect();
                Feature::OneHot { categories: cats.into_iter().collect() }
            }
            _ => {
                let vals: Vec<f64> =
                    (0..a.data.len()).filter_map(|r| a.data.number(r)).chain((0..b.data.len()).filter_map(|r| b.data.number(r))).collect();
                let fill = if vals.is_empty() { 0.0 } else { vals.iter().sum::<f64>() / vals.len() as f64 };
                Feature::Numeric { fill }
            }
        });
    }
    let width: usize = features.iter().map(|f| if let Feature::OneHot { categories } = f { categories.len() } else { 1 }).sum();
    let encode = |t: &Table| {
        let mut m = Array2::zeros((t.n_rows(), width));
        let mut offset = 0;
        for (f, col) in features.iter().zip(&t.columns) {
            match f {
                Feature::Numeric { fill } => {
                    for r in 0..t.n_rows() {
                        m[[r, offset]] = col.data.number(r).unwrap_or(*fill);
                    }
                    offset += 1;
                }
                Feature::OneHot { categories } => {
                    for r in 0..t.n_rows() {
                        let key = col.data.text(r).unwrap_or(MISSING_CATEGORY);
                        let k = categories.binary_search_by(|c| c.as_str().cmp(key)).expect("category from the union");
                        m[[r, offset + k]] = 1.0;
                    }
                    offset += categories.len();
                }
            }
        }
        m
    };
    Ok((encode(&rf), encode(&sf)))
}

/// Cross-validated detection AUC for already encoded real and synthetic rows.
///
/// The larger class is subsampled to the size of the smaller one, rows are
/// split into `folds` stratified folds, and each fold is scored by a model
/// trained on the rest with standardisation fitted on the training part.
pub fn detection_auc(real: &Array2<f64>, synth: &Array2<f64>, folds: usize, seed: u64) -> Result<f64, DetectionError> {
    if folds < 2 {
        return Err(DetectionError::TooFewFolds(folds));
    }
    if real.nrows() == 0 || synth.nrows() == 0 {
        return Err(DetectionError::SingleClass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = real.nrows().min(synth.nrows());
    if n < folds {
        return Err(DetectionError::TooFewRows { rows: n, folds });
    }
    let mut take = |m: &Array2<f64>| {
        let mut idx: Vec<usize> = (0..m.nrows()).collect();
        idx.shuffle(&mut rng);
        idx.truncate(n);
        m.select(Axis(0), &idx)
    };
    // Label 1 marks synthetic rows.
    let x = ndarray::concatenate(Axis(0), &[take(real).view(), take(synth).view()]).expect("same width");
    let labels: Vec<bool> = (0..2 * n).map(|i| i >= n).collect();

    // Both classes are shuffled above, so position modulo `folds` is a
    // stratified assignment.
    let fold_of = |i: usize| (i % n) % folds;
    let mut total = 0.0;
    for k in 0..folds {
        let train: Vec<usize> = (0..2 * n).filter(|&i| fold_of(i) != k).collect();
        let test: Vec<usize> = (0..2 * n).filter(|&i| fold_of(i) == k).collect();
        let xt = x.select(Axis(0), &train);
        let (mean, std) = standardizer(xt.view());
        let yt: Vec<bool> = train.iter().map(|&i| labels[i]).collect();
        let model = train_logistic(standardize(xt.view(), &mean, &std).view(), &yt, L2, EPOCHS)?;
        let xs = standardize(x.select(Axis(0), &test).view(), &mean, &std);
        let scores = model.decision(xs.view());
        let ys: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
        total += roc_auc(scores.as_slice().expect("contiguous"), &ys)?;
    }
    Ok(total / folds as f64)
}

/// LD of one table: logistic detection over its feature columns.
pub fn ld_score(real: &Table, synth: &Table, folds: usize, seed: u64) -> Result<Detection, DetectionError> {
    let (r, s) = design(real, synth)?;
    let auc = detection_auc(&r, &s, folds, seed)?;
    Ok(Detection { score: ld_from_auc(auc), auc, n_real: real.n_rows(), n_synth: synth.n_rows() })
}

/// P-C LD of `child`: LD of the child joined with its direct parents.
pub fn pc_ld_score(real: &Database, synth: &Database, child: &str, folds: usize, seed: u64) -> Result<Detection, DetectionError> {
    pc_ld_score_with_depth(real, synth, child, 1, folds, seed)
}

/// Like [`pc_ld_score`] with ancestors up to `depth` hops joined in.
pub fn pc_ld_score_with_depth(
    real: &Database,
    synth: &Database,
    child: &str,
    depth: usize,
    folds: usize,
    seed: u64,
) -> Result<Detection, DetectionError> {
    let r = denormalize_with_depth(real, child, depth)?;
    let s = denormalize_with_depth(synth, child, depth)?;
    ld_score(&r, &s, folds, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableScore {
    pub ld: f64,
    pub auc: f64,
    #[serde(skip)]
    pub n_real: usize,
    #[serde(skip)]
    pub n_synth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipScore {
    pub child: String,
    pub pc_ld: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub tables: BTreeMap<String, TableScore>,
    /// One entry per child table, joined with all of its direct parents.
    pub relationships: Vec<RelationshipScore>,
    pub avg_ld: f64,
    /// `None` when the schema has no relationships.
    pub avg_pc_ld: Option<f64>,
    pub folds: usize,
    pub seed: u64,
}

/// LD for every table and P-C LD for every child table.
pub fn evaluate(real: &Database, synth: &Database, folds: usize, seed: u64) -> Result<DetectionReport, DetectionError> {
    if folds < 2 {
        return Err(DetectionError::TooFewFolds(folds));
    }
    let schema = real.schema();
    let names: Vec<&str> = schema.table_names().collect();
    let tables: Vec<(String, TableScore)> = names
        .par_iter()
        .map(|&name| {
            let d = ld_score(real.table(name).expect("schema table"), synth.table(name).expect("schema table"), folds, seed)?;
            Ok((name.to_string(), TableScore { ld: d.score, auc: d.auc, n_real: d.n_real, n_synth: d.n_synth }))
        })
        .collect::<Result<_, DetectionError>>()?;
    let children: Vec<&str> = names.iter().copied().filter(|t| !schema.is_root(t)).collect();
    let relationships: Vec<RelationshipScore> = children
        .par_iter()
        .map(|&child| {
            let r = denormalize(real, child)?;
            let s = denormalize(synth, child)?;
            let d = ld_score(&r, &s, folds, seed)?;
            Ok(RelationshipScore { child: child.to_string(), pc_ld: d.score, auc: d.auc })
        })
        .collect::<Result<_, DetectionError>>()?;
    let avg_ld = tables.iter().map(|(_, t)| t.ld).sum::<f64>() / tables.len().max(1) as f64;
    let avg_pc_ld = (!relationships.is_empty())
        .then(|| relationships.iter().map(|r| r.pc_ld).sum::<f64>() / relationships.len() as f64);
    Ok(DetectionReport { tables: tables.into_iter().collect(), relationships, avg_ld, avg_pc_ld, folds, seed })
}
