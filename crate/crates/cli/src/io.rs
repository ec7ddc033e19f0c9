use std::fs;
use std::io::Write;
use std::path::Path;

use detmax_core::format::{parse_document, to_canonical_json, Document};
use serde::Serialize;

use crate::CliError;

pub fn read_document(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_document(&text)?)
}

/// Canonical JSON to `path`, or stdout when `None`.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = to_canonical_json(value)?;
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Validation(format!("cannot write output: {e}")))
        }
    }
}
