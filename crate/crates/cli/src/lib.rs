//! Command-line driver for near-best quarklet tree approximation: coefficient
//! ingestion, growth runs, tree exports, the exhaustive oracle, seeded
//! certification and the `x1^α` least-squares demo.

pub mod certify;
pub mod commands;
pub mod error;
pub mod falpha;
pub mod instances;
pub mod io;

pub use error::CliError;
