//! A small dense-network engine: tape-based reverse-mode differentiation,
//! layer stacks, and the Adam optimiser.

mod adam;
mod graph;
mod mlp;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adam::{Adam, AdamConfig};
pub use graph::{Gradients, Graph, SpanTarget, Tensor2, Var};
pub use mlp::{Forward, Layer, Mlp, MlpBuilder, Mode, LEAKY_SLOPE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("{context}: expected dimension {expected}, found {found}")]
    DimensionMismatch { context: String, expected: usize, found: usize },
    #[error("loss was not recorded on this graph")]
    GraphNotRecorded,
    #[error("backward needs a 1x1 loss, got shape {0:?}")]
    NotScalar((usize, usize)),
    #[error("layer `{0}` is not supported when differentiating through the input gradient")]
    UnsupportedLayer(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

/// Named parameter tensors of one network.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    tensors: BTreeMap<String, Tensor2>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor2) {
        self.tensors.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Tensor2> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor2> {
        self.tensors.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor2)> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor2)> {
        self.tensors.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn size(&self) -> usize {
        self.tensors.values().map(|t| t.len()).sum()
    }

    /// Clamps every parameter into `[-c, c]` (weight clipping).
    pub fn clip(&mut self, c: f64) {
        for t in self.tensors.values_mut() {
            t.mapv_inplace(|v| v.clamp(-c, c));
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.values().all(|t| t.iter().all(|v| v.is_finite()))
    }
}
