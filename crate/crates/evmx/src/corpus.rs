//! Loading bytecode corpora from disk.
//!
//! A corpus is either a directory of `.hex` files (one contract per file,
//! id = file name) or a JSON-lines file of `{"id": ..., "code": "0x..."}`
//! records. A single `.hex` file is accepted as a one-contract corpus.
//! Entries that cannot be read or decoded are skipped and reported as
//! warnings.

use std::path::{Path, PathBuf};

use evmx_core::census::CorpusEntry;
use serde::Deserialize;

use crate::error::CliError;
use crate::input::parse_hex;

#[derive(Debug, Default)]
pub struct LoadedCorpus {
    pub entries: Vec<CorpusEntry>,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct JsonLine {
    id: String,
    code: String,
}

pub fn load(path: &Path) -> Result<LoadedCorpus, CliError> {
    if path.is_dir() {
        load_dir(path)
    } else if path.extension().is_some_and(|e| e == "hex") {
        let mut out = LoadedCorpus::default();
        push_hex_file(path, &mut out);
        Ok(out)
    } else {
        load_jsonl(path)
    }
}

fn file_id(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn push_hex_file(path: &Path, out: &mut LoadedCorpus) {
    let parsed = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(path, e))
        .and_then(|text| parse_hex("corpus file", &text));
    match parsed {
        Ok(code) => out.entries.push(CorpusEntry { id: file_id(path), code }),
        Err(e) => out.warnings.push(format!("skipping {}: {e}", path.display())),
    }
}

fn load_dir(dir: &Path) -> Result<LoadedCorpus, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "hex"))
        .collect();
    files.sort();
    let mut out = LoadedCorpus::default();
    for f in &files {
        push_hex_file(f, &mut out);
    }
    Ok(out)
}

fn load_jsonl(path: &Path) -> Result<LoadedCorpus, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = LoadedCorpus::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str::<JsonLine>(line)
            .map_err(|e| e.to_string())
            .and_then(|j| parse_hex("code", &j.code).map(|code| CorpusEntry { id: j.id, code }).map_err(|e| e.to_string()));
        match entry {
            Ok(e) => out.entries.push(e),
            Err(msg) => out.warnings.push(format!("skipping {}:{}: {msg}", path.display(), n + 1)),
        }
    }
    Ok(out)
}
