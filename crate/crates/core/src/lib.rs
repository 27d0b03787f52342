//! Supply-chain disruption management over an RDF-star knowledge graph.

pub mod dmp;
pub mod error;
pub mod generator;
pub mod metrics;
pub mod ontology;
pub mod queries;
pub mod scenario;
pub mod vocab;

pub use error::{CoreError, Result};
