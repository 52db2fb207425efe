//! Bivariate quarklet frames on the unit square and near-best adaptive
//! quarklet tree approximation.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command
//! line front end and the least-squares demos live in the `quarklet` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod frame;
pub mod functional;
pub mod index;
pub mod l2;
pub mod linalg;
pub mod nearbest;
pub mod oracle;
pub mod quadrature;
pub mod spline;
pub mod tree;

pub use error::Error;
pub use frame::{QuarkletSystem, UniIndex};
pub use functional::LocalErrorModel;
pub use index::{Alpha, EnhancedIndex, Rule};
pub use l2::{CoefficientSequence, L2ErrorModel, ModelParams};
pub use nearbest::GrowthRun;
pub use spline::SplineOrder;
pub use tree::{QuarkletTree, WaveletTree};

pub type Result<T> = core::result::Result<T, Error>;
