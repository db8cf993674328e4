//! Career-trajectory bibliometrics engine.
//!
//! Turns publication/authorship metadata into per-scientist lifetime
//! portfolios, assigns 20/60/20 productivity classes within discipline and
//! career-stage cohorts under four counting schemes, measures class mobility
//! between career stages and fits logistic models of top/bottom membership.
//!
//! The pipeline is split into:
//!
//! * [`corpus`]: data model, JSON Lines ingest/serialization, sample filter
//! * [`portfolio`]: per-author attributes (age, dominant codes, FWCI 4y, AJPR, ...)
//! * [`classes`]: stage productivity and 20/60/20 class assignment
//! * [`mobility`]: transition matrices, mobility rates, SankeyMATIC export
//! * [`regression`]: logistic fits, odds ratios, pseudo-R², collinearity
//! * [`synth`]: seeded synthetic cohorts and corpora
//! * [`pipeline`]: cache, end-to-end analysis and output manifest

pub mod classes;
pub mod corpus;
pub mod error;
pub mod mobility;
pub mod pipeline;
pub mod portfolio;
pub mod regression;
pub mod symbols;
pub mod synth;

pub use error::{Error, Result};
