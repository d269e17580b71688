//! Evaluation of first-order logic with counting on finite relational
//! structures.

pub mod covers;
pub mod error;
pub mod eval;
pub mod generators;
pub mod locality;
pub mod localized;
pub mod logic;
pub mod reductions;
pub mod structures;
pub mod transforms;

pub use error::{Error, Result};
pub use structures::{Distance, Elem, PatternGraph, Signature, Structure};
