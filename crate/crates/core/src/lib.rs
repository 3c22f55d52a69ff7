//! Exact weighted model sampling and counting for two-variable first-order
//! logic with cardinality constraints and counting quantifiers.
//!
//! The pipeline is: [`parser`] reads a problem, [`normalizer`] compiles it to
//! a universal matrix plus existential obligations, [`wfomc`] counts
//! configurations of cells, and [`sampler`] draws models exactly by domain
//! recursion. [`oracle`] and [`stats`] check all of it by brute force and
//! statistical tests.

pub mod error;
pub mod logic;
pub mod normalizer;
pub mod oracle;
pub mod parser;
pub mod presets;
pub mod sampler;
pub mod stats;
pub mod strategy;
pub mod wfomc;

pub use error::{Error, Result};
