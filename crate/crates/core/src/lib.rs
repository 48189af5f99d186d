//! Ranks information-providing websites by how trustworthy the facts they
//! publish are, measured against a ground-truth knowledge base.
//!
//! The pipeline is: ingest a knowledge base and a claims table ([`corpus`]),
//! score every claim against the truth ([`similarity`]), then iterate the
//! trust / confidence / implication epoch ([`engine`]) until website trusts
//! settle. [`baselines`] provides Voting and a TruthFinder-style comparison,
//! and [`serp`] turns trusts into a ranked result page.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod gen;
pub mod par;
pub mod serp;
pub mod similarity;

pub use baselines::{BaselineResult, Method};
pub use corpus::{Claim, EngineConfig, FactRecord, ObjectId, TrueFact, TrustState, Website};
pub use engine::{Engine, EpochReport};
pub use error::{Error, Result};
pub use par::Execution;
