//! Text, CSV and JSON renderings of the timing and census reports.

use std::fmt::Write;

use evmx_core::census::FrequencyTable;
use evmx_core::timing::{self, round_half_away, LatencyRow};
use evmx_core::{opcode_table, ClockConfig};
use serde::Serialize;
use serde_json::json;

pub fn latency_text(rows: &[LatencyRow], clock: &ClockConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "clock: {:.2} MHz ({} ns period)", clock.frequency_hz / 1e6, clock.period_ns);
    let _ = writeln!(
        s,
        "{:<10} {:>4} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>7} {:>7}",
        "opcode", "gas", "LPy", "WGo", "WPa", "cycles", "model_ns", "ref_ns", "delta%", "ref_d%"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<10} {:>4} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>7} {:>7}",
            r.mnemonic,
            r.gas,
            r.lpy_ns,
            r.wgo_ns,
            r.wpa_ns,
            r.cycles,
            fmt_ns(r.model_ns),
            r.reference_ns,
            round_half_away(r.delta_pct),
            r.reference_delta_pct
        );
    }
    s
}

fn fmt_ns(ns: f64) -> String {
    if ns.fract() == 0.0 {
        format!("{ns:.0}")
    } else {
        format!("{ns:.3}")
    }
}

pub fn latency_csv(rows: &[LatencyRow]) -> String {
    let mut s = String::from("opcode,mnemonic,gas,lpy_ns,wgo_ns,wpa_ns,cycles,model_ns,reference_ns,delta_pct,reference_delta_pct\n");
    for r in rows {
        let _ = writeln!(
            s,
            "0x{:02x},{},{},{},{},{},{},{},{},{:.4},{}",
            r.opcode,
            r.mnemonic,
            r.gas,
            r.lpy_ns,
            r.wgo_ns,
            r.wpa_ns,
            r.cycles,
            r.model_ns,
            r.reference_ns,
            r.delta_pct,
            r.reference_delta_pct
        );
    }
    s
}

/// Rows whose modelled latency or rounded delta disagree with the reference data.
pub fn latency_mismatches(rows: &[LatencyRow]) -> Vec<&LatencyRow> {
    rows.iter().filter(|r| !(r.latency_matches() && r.delta_matches())).collect()
}

pub fn histogram_csv(table: &FrequencyTable) -> String {
    let mut s = String::from("mnemonic,count\n");
    for r in &table.rows {
        let _ = writeln!(s, "{},{}", r.mnemonic, r.count);
    }
    s
}

/// A vega-lite bar chart spec with the counts inlined.
pub fn histogram_vega(table: &FrequencyTable) -> serde_json::Value {
    let values: Vec<_> = table.rows.iter().map(|r| json!({ "mnemonic": r.mnemonic, "count": r.count })).collect();
    json!({
        "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
        "description": format!("Top {} opcodes over {} contracts", table.rows.len(), table.contracts),
        "data": { "values": values },
        "mark": "bar",
        "encoding": {
            "x": { "field": "mnemonic", "type": "nominal", "sort": null },
            "y": { "field": "count", "type": "quantitative" }
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OpcodeRow {
    pub code: u8,
    pub mnemonic: &'static str,
    pub gas: u64,
    pub cycles: u32,
    pub ns: f64,
    pub estimated: bool,
}

pub fn opcode_rows(clock: &ClockConfig) -> Vec<OpcodeRow> {
    opcode_table()
        .iter()
        .map(|s| OpcodeRow {
            code: s.code,
            mnemonic: s.mnemonic,
            gas: s.gas,
            cycles: s.cycles,
            ns: timing::simulated_time(s.cycles as u64, clock),
            estimated: s.estimated,
        })
        .collect()
}
