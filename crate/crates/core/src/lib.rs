//! Logic refactoring on And-Inverter Graphs, with an optional learned
//! classifier that prunes cuts unlikely to yield a gain.
//!
//! The crate is organised bottom-up:
//!
//! - [`aig`]: the graph, AIGER I/O, structural hashing and node replacement.
//! - [`cut`]: reconvergence-driven cuts and their truth tables.
//! - [`resyn`]: ISOP, algebraic factoring and candidate evaluation.
//! - [`features`]: the six structural cut features fed to the classifier.
//! - [`model`]: the 6-12-12-6-1 classifier, its training loop and metrics.
//! - [`refactor`]: the baseline pass and the pruned pass.
//! - [`verify`]: simulation-based equivalence checking.
//! - [`dataset`]: labelled feature rows and their CSV encoding.

pub mod aig;
pub mod cut;
pub mod dataset;
mod error;
pub mod features;
pub mod model;
pub mod refactor;
pub mod resyn;
pub mod verify;

pub use aig::{Aig, Lit, NodeId};
pub use error::{Error, Result};
