//! Std companion to `chronopath-core`: dataset parsing, the parallel
//! analysis pipeline, JSON exports, evaluation reports, the HTTP job service
//! and the command-line driver.

pub mod cli;
pub mod error;
pub mod eval;
pub mod export;
pub mod ingest;
pub mod pipeline;
pub mod service;
pub mod workspace;

pub use error::{Error, Result};
