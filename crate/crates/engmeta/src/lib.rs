//! Metadata toolkit for computational-engineering research data built on
//! the EngMeta model.
//!
//! - [`model`]: typed documents, path addressing, validation and merging
//! - [`canon`]: canonical XML and JSON serialization
//! - [`extract`]: config-driven harvesting of `<key> <delimiter> <value>`
//!   lines from simulation input, output and log files
//! - [`prov`]: processing steps as a PROV-N document
//! - [`flatten`]: repository metadata blocks in an ingest JSON shape
//! - [`harvest`]: file sizes, checksums and types from a directory tree
//! - [`cli`]: the `engmeta` command line

pub mod canon;
pub mod cli;
pub mod extract;
pub mod flatten;
pub mod model;
pub mod prov;
pub mod sample;

pub use cli::harvest;
pub use model::*;
