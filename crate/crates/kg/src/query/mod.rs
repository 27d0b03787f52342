//! SPARQL subset: SELECT (with DISTINCT, BIND, FILTER, GROUP BY aggregates and
//! one level of sub-select) and INSERT { } WHERE { } over RDF-star patterns.
//!
//! Result rows are sorted by their serialized cells, so output never depends on
//! join order. Inside a group, rows are put in canonical order before
//! aggregation; an ungrouped plain variable takes its value from the first row.
//! COUNT skips rows whose argument fails; SUM, AVG, MIN and MAX become unbound
//! if any row fails.

pub mod ast;
mod eval;
mod expr;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::error::SyntaxError;
use crate::graph::Graph;
use crate::term::Term;
use crate::turtle::Prefixes;

pub use ast::{Query, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("query syntax error: {0}")]
    Syntax(SyntaxError),
    #[error("unsupported query feature {keyword} at {line}:{column}")]
    Unsupported {
        keyword: String,
        line: usize,
        column: usize,
    },
    #[error("invalid query: {0}")]
    Invalid(String),
    #[error("expected a SELECT query")]
    NotSelect,
    #[error("expected an INSERT query")]
    NotInsert,
}

/// Pre-bound variables, applied before pattern matching.
pub type Binding = BTreeMap<Var, Term>;

/// A result table. Cells are `None` where a variable is unbound.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solutions {
    pub variables: Vec<Var>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl Solutions {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        let name = name.trim_start_matches(['?', '$']);
        self.variables.iter().position(|v| v.name() == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&Term> {
        let c = self.column(name)?;
        self.rows.get(row)?.get(c)?.as_ref()
    }

    /// Values of one column, skipping unbound cells.
    pub fn values<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a Term> + 'a {
        let c = self.column(name);
        self.rows
            .iter()
            .filter_map(move |r| c.and_then(|c| r[c].as_ref()))
    }

    pub fn to_tsv(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Solutions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self.variables.iter().map(|v| v.to_string()).collect();
        writeln!(f, "{}", head.join("\t"))?;
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|c| c.as_ref().map(|t| t.to_string()).unwrap_or_default())
                .collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InsertOutcome {
    /// Triples that were not already present.
    pub inserted: usize,
    pub diagnostics: Vec<String>,
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    parser::parse(text, &Prefixes::new())
}

/// Parses with prefixes predeclared; the query's own PREFIX lines override.
pub fn parse_query_with(text: &str, prefixes: &Prefixes) -> Result<Query, QueryError> {
    parser::parse(text, prefixes)
}

pub fn evaluate_select(graph: &Graph, query: &Query) -> Result<Solutions, QueryError> {
    evaluate_select_with(graph, query, &Binding::new())
}

pub fn evaluate_select_with(
    graph: &Graph,
    query: &Query,
    seed: &Binding,
) -> Result<Solutions, QueryError> {
    match query {
        Query::Select(s) => Ok(eval::evaluate_select(graph, s, seed)),
        Query::InsertWhere(_) => Err(QueryError::NotSelect),
    }
}

pub fn execute_insert(graph: &mut Graph, query: &Query) -> Result<InsertOutcome, QueryError> {
    execute_insert_with(graph, query, &Binding::new())
}

/// WHERE is evaluated against a snapshot, then all instances are added.
pub fn execute_insert_with(
    graph: &mut Graph,
    query: &Query,
    seed: &Binding,
) -> Result<InsertOutcome, QueryError> {
    let Query::InsertWhere(q) = query else {
        return Err(QueryError::NotInsert);
    };
    let (triples, diagnostics) = eval::evaluate_insert(graph, q, seed);
    let inserted = triples.into_iter().filter(|t| graph.insert(t.clone())).count();
    Ok(InsertOutcome {
        inserted,
        diagnostics,
    })
}
