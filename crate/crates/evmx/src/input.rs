//! Parsing of command-line values: bytecode, hex payloads, words, addresses, frequencies.

use std::path::Path;

use evmx_core::hexutil;
use evmx_core::{Address, Word256};

use crate::error::CliError;

pub fn parse_hex(what: &'static str, text: &str) -> Result<Vec<u8>, CliError> {
    hexutil::decode(text).ok_or_else(|| CliError::Hex { what, text: text.trim().to_string() })
}

/// Reads bytecode given either as inline hex or as a path to a hex file.
///
/// An existing file wins over the inline interpretation, so a file named
/// `6000` is read rather than parsed.
pub fn load_bytecode(arg: &str, base: Option<&Path>) -> Result<Vec<u8>, CliError> {
    let path = match base {
        Some(dir) => dir.join(arg),
        None => Path::new(arg).to_path_buf(),
    };
    if path.is_file() {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        return parse_hex("bytecode file", &text);
    }
    parse_hex("bytecode", arg)
}

pub fn parse_word(what: &'static str, text: &str) -> Result<Word256, CliError> {
    text.trim()
        .parse()
        .map_err(|e: evmx_core::VmError| CliError::Invalid { what, message: e.context })
}

pub fn parse_address(text: &str) -> Result<Address, CliError> {
    text.trim()
        .parse()
        .map_err(|e: evmx_core::VmError| CliError::Invalid { what: "address", message: e.context })
}

/// Parses a clock frequency such as `142.86e6` or `100000000`.
pub fn parse_freq(text: &str) -> Result<f64, String> {
    let hz: f64 = text.trim().parse().map_err(|_| format!("not a number: {text:?}"))?;
    if hz.is_finite() && hz > 0.0 {
        Ok(hz)
    } else {
        Err(format!("frequency must be positive, got {text:?}"))
    }
}
