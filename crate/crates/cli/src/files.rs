//! Store and report files. Every write goes through a sibling temp file and a rename.

use std::fs;
use std::io::Write;
use std::path::Path;

use scdm_core::ontology::canonicalize;
use scdm_core::vocab::prefixes;
use scdm_core::CoreError;
use scdm_kg::{parse_turtle_star, serialize_turtle_star, Graph};
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Parses a Turtle-star store and rewrites alias predicates.
pub fn read_store(path: &Path) -> Result<Graph> {
    let text = read_text(path)?;
    let g = parse_turtle_star(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        source: CoreError::from(e),
    })?;
    Ok(canonicalize(&g))
}

pub fn store_text(g: &Graph) -> String {
    serialize_turtle_star(g, &prefixes())
}

pub fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
