//! Sequential execution of a block of independent transactions.

use std::path::Path;

use evmx_core::{ClockConfig, ExecutionConfig, Receipt, Word256};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::input::{load_bytecode, parse_hex};

/// A block description read from JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    #[serde(default)]
    pub label: String,
    pub transactions: Vec<TxSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxSpec {
    /// Inline bytecode hex, or a path to a hex file relative to the block file.
    pub code_ref: String,
    pub gas_limit: u64,
    #[serde(default)]
    pub init_data: String,
    #[serde(default)]
    pub call_value: Option<Word256>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TxOutcome {
    pub index: usize,
    pub code_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receipt: Option<Receipt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub label: String,
    pub clock_hz: f64,
    pub transactions: Vec<TxOutcome>,
    pub total_cycles: u64,
    pub total_gas_used: u64,
    /// Sum of the per-transaction simulated times.
    pub total_time_ns: f64,
    pub total_time_us: f64,
    /// Transactions that could not be started.
    pub malformed: usize,
}

impl BlockSpec {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, CliError> {
        let spec: Self =
            serde_json::from_str(text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
        if spec.transactions.is_empty() {
            return Err(CliError::Invalid { what: "block", message: "transaction list is empty".into() });
        }
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text, path)
    }
}

fn run_tx(tx: &TxSpec, base: Option<&Path>, clock: ClockConfig) -> Result<Receipt, CliError> {
    if tx.gas_limit == 0 {
        return Err(CliError::Invalid { what: "gas_limit", message: "must be positive".into() });
    }
    let code = load_bytecode(&tx.code_ref, base)?;
    let cfg = ExecutionConfig {
        gas_limit: tx.gas_limit,
        init_data: parse_hex("init_data", &tx.init_data)?,
        call_value: tx.call_value.unwrap_or(Word256::ZERO),
        clock,
        ..ExecutionConfig::default()
    };
    Ok(evmx_core::run(&code, cfg)?)
}

/// Runs every transaction in order, each against fresh state. Malformed
/// transactions are recorded and skipped; the totals cover the rest.
pub fn run_block(spec: &BlockSpec, base: Option<&Path>, clock: ClockConfig) -> BlockReport {
    let mut report = BlockReport {
        label: spec.label.clone(),
        clock_hz: clock.frequency_hz,
        transactions: Vec::with_capacity(spec.transactions.len()),
        total_cycles: 0,
        total_gas_used: 0,
        total_time_ns: 0.0,
        total_time_us: 0.0,
        malformed: 0,
    };
    for (index, tx) in spec.transactions.iter().enumerate() {
        let outcome = match run_tx(tx, base, clock) {
            Ok(r) => {
                report.total_cycles += r.cycles;
                report.total_gas_used += r.gas_used;
                report.total_time_ns += r.simulated_time_ns;
                TxOutcome { index, code_ref: tx.code_ref.clone(), receipt: Some(r), error: None }
            }
            Err(e) => {
                report.malformed += 1;
                TxOutcome { index, code_ref: tx.code_ref.clone(), receipt: None, error: Some(e.to_string()) }
            }
        };
        report.transactions.push(outcome);
    }
    report.total_time_us = report.total_time_ns / 1000.0;
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(code: &str) -> TxSpec {
        TxSpec { code_ref: code.into(), gas_limit: 1000, init_data: String::new(), call_value: None }
    }

    #[test]
    fn totals_add_up() {
        let spec = BlockSpec { label: "t".into(), transactions: vec![tx("6002600301"); 3] };
        let r = run_block(&spec, None, ClockConfig::EVMX);
        assert_eq!((r.total_cycles, r.total_gas_used, r.malformed), (24, 27, 0));
        assert_eq!(r.total_time_ns, 3.0 * 56.0);
    }

    #[test]
    fn malformed_tx_is_reported() {
        let mut bad = tx("zz");
        bad.gas_limit = 5;
        let spec = BlockSpec { label: String::new(), transactions: vec![tx("00"), bad] };
        let r = run_block(&spec, None, ClockConfig::EVMX);
        assert_eq!(r.malformed, 1);
        assert!(r.transactions[1].error.is_some());
    }

    #[test]
    fn parse_rules() {
        let p = Path::new("b.json");
        assert!(BlockSpec::from_json(r#"{"label":"x","transactions":[]}"#, p).is_err());
        assert!(BlockSpec::from_json("{", p).is_err());
        let s = BlockSpec::from_json(r#"{"transactions":[{"code_ref":"00","gas_limit":1,"call_value":"0x5"}]}"#, p).unwrap();
        assert_eq!(s.transactions[0].call_value, Some(Word256::from_u64(5)));
    }
}
