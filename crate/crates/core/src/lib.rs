//! Relational database synthesis with one conditional tabular GAN per table.
//!
//! Child tables are modelled conditionally on the features of their parent
//! (and optionally grandparent) rows, and sampled after them, so synthetic
//! foreign keys always resolve. See the book under `book/` for a walkthrough.

pub mod dataset;
pub mod detection;
pub mod neural;
pub mod rctgan;
pub mod schema;
pub mod synthesizer;
pub mod transform;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/metadata.md")]
mod metadata {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/encoding.md")]
mod encoding {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/training.md")]
mod training {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/synthesis.md")]
mod synthesis {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/detection.md")]
mod detection_chapter {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod experiments {}
