//! Ternary relation template induction over POS-tagged corpora.
//!
//! The pipeline reads a tagged corpus, chunks each sentence into noun
//! phrases, verb groups and prepositions, extracts `N1 V N2 P N3` tuples
//! anchored on trigger verbs, types the noun phrases against a lexicon and
//! groups them into candidate templates. A curator accepts and labels
//! templates; accepted instances then drive an iterative bootstrap that
//! discovers new `(verb, connector)` templates for the same relations.

pub mod bootstrap;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod extraction;
pub mod induction;
pub mod lexicon;
pub mod pipeline;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
