//! Static opcode frequency counts over a corpus of contract bytecode.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::opcode;

/// One deployed contract.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusEntry {
    pub id: String,
    #[cfg_attr(feature = "serde", serde(with = "crate::hexutil::serde_bytes"))]
    pub code: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OpcodeCount {
    pub opcode: u8,
    pub mnemonic: &'static str,
    pub count: u64,
}

/// Opcode counts in descending order, ties broken by ascending opcode byte.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FrequencyTable {
    pub rows: Vec<OpcodeCount>,
    /// Opcodes seen across the whole corpus, including those cut by `top_n`.
    pub total: u64,
    pub contracts: usize,
}

impl FrequencyTable {
    pub fn mnemonics(&self) -> Vec<&'static str> {
        self.rows.iter().map(|r| r.mnemonic).collect()
    }

    pub fn count_of(&self, mnemonic: &str) -> Option<u64> {
        self.rows.iter().find(|r| r.mnemonic == mnemonic).map(|r| r.count)
    }
}

/// Linear disassembly: counts each opcode byte and skips PUSH immediates.
/// Bytes outside the instruction set are counted under INVALID (0xfe).
pub fn disassemble_count(code: &[u8]) -> [u64; 256] {
    let mut counts = [0u64; 256];
    let mut pc = 0;
    while pc < code.len() {
        let b = code[pc];
        let key = if opcode::lookup(b).is_some() { b } else { opcode::op::INVALID };
        counts[key as usize] += 1;
        pc += 1 + opcode::immediate_len(b);
    }
    counts
}

/// Sums counts over `entries` and keeps the `top_n` most frequent opcodes.
pub fn aggregate<'a>(entries: impl IntoIterator<Item = &'a CorpusEntry>, top_n: usize) -> FrequencyTable {
    let mut totals = [0u64; 256];
    let mut contracts = 0;
    for e in entries {
        contracts += 1;
        for (t, c) in totals.iter_mut().zip(disassemble_count(&e.code)) {
            *t += c;
        }
    }
    let mut rows: Vec<OpcodeCount> = totals
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(b, c)| OpcodeCount { opcode: b as u8, mnemonic: opcode::mnemonic(b as u8), count: *c })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then(a.opcode.cmp(&b.opcode)));
    let total = rows.iter().map(|r| r.count).sum();
    rows.truncate(top_n);
    FrequencyTable { rows, total, contracts }
}

/// Counts by mnemonic, for callers that want a map.
pub fn counts_by_mnemonic(table: &FrequencyTable) -> BTreeMap<&'static str, u64> {
    table.rows.iter().map(|r| (r.mnemonic, r.count)).collect()
}
