//! Corpus-to-model-input toolkit for multilingual discourse relation
//! classification: DISRPT corpus reading, instance features, prompt and
//! encoder input rendering, translate-train augmentation planning,
//! redundant-layer selection, and shared-task scoring.

pub mod corpus;
pub mod features;
pub mod builder;
pub mod dataset;
pub mod io;
pub mod augment;
pub mod pruning;
pub mod eval;
