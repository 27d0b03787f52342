//! RDF-star knowledge graph substrate: terms, an indexed triple store,
//! Turtle-star parsing and canonical serialization, and a query engine for
//! the SPARQL subset used by the disruption pipeline.

pub mod error;
pub mod graph;
mod lexer;
pub mod query;
pub mod term;
pub mod turtle;

pub use error::{KgError, SyntaxError};
pub use graph::{Graph, PatternTerm, QuotedPattern};
pub use term::{Date, DateTime, Iri, Literal, Term, Triple, RDF_TYPE, XSD};
pub use turtle::{parse_turtle_star, parse_turtle_star_with_prefixes, serialize_turtle_star, Prefixes};
