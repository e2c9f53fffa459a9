//! Command-line front end for the extremogram library: CSV ingestion,
//! analysis orchestration and CSV/JSON result documents.

pub mod args;
pub mod document;
pub mod error;
pub mod ingest;
pub mod run;

pub use args::Cli;
pub use error::{CliError, Result};
pub use run::run;
