//! Aspect-level sentiment analysis of employee reviews and company
//! aspect-sentiment embeddings.
//!
//! The pipeline: merge two sentiment lexicons, split reviews into labeled
//! pros/cons sub-reviews, learn paragraph vectors, fit an extreme learning
//! machine on them, score every aspect mention with a four-tier cascade, and
//! average the scores into one vector per company.

pub mod aspects;
pub mod cascade;
pub mod cli;
pub mod corpus;
pub mod docvec;
pub mod elm;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod pipeline;
pub mod profile;
pub mod seed;
pub mod synth;
pub mod syntax;

pub use error::{Error, Result};
