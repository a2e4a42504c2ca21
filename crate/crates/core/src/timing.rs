//! Clock-cycle accounting and simulated wall time.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{ErrorKind, VmError};
use crate::keccak;
use crate::opcode::{self, op, LAT_KECCAK, LAT_MEM_READ, LAT_MEM_WRITE, REFERENCE_PERIOD_NS};

/// Clock frequency and its period.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClockConfig {
    pub frequency_hz: f64,
    pub period_ns: f64,
}

impl ClockConfig {
    /// The EVMx clock: a 7 ns period, reported as 142.86 MHz.
    pub const EVMX: Self = Self { frequency_hz: 1e9 / REFERENCE_PERIOD_NS as f64, period_ns: REFERENCE_PERIOD_NS as f64 };

    pub fn from_hz(frequency_hz: f64) -> Result<Self, VmError> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(VmError::new(ErrorKind::InvalidConfig, format!("clock frequency {frequency_hz} Hz")));
        }
        Ok(Self { frequency_hz, period_ns: 1e9 / frequency_hz })
    }

    pub fn is_reference(&self) -> bool {
        self.period_ns == REFERENCE_PERIOD_NS as f64
    }
}

impl Default for ClockConfig {
    fn default() -> Self {
        Self::EVMX
    }
}

/// Where a cycle figure comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CycleSource {
    /// Measured on the EVMx prototype.
    Measured,
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CalibrationRow {
    pub opcode: u8,
    pub mnemonic: &'static str,
    pub gas: u64,
    pub evmx_ns: f64,
    pub cycles: u32,
    pub source: CycleSource,
}

pub fn cycles_for(code: u8) -> Result<u32, VmError> {
    opcode::lookup(code)
        .map(|s| s.cycles)
        .ok_or_else(|| VmError::new(ErrorKind::InvalidOpcode, format!("no timing for opcode {code:#04x}")))
}

/// Extra cycles an opcode pays for a memory region of `size` bytes:
/// one memory access per 32-byte chunk, plus one permutation per extra
/// Keccak block for the hashing opcodes.
pub fn region_cycles(code: u8, size: usize) -> u64 {
    let chunks = size.div_ceil(32) as u64;
    match code {
        op::KECCAK256 | op::CREATE2 => {
            chunks * LAT_MEM_READ as u64 + (keccak::permutations_for(size) as u64 - 1) * LAT_KECCAK as u64
        }
        op::RETURN | op::REVERT => chunks * LAT_MEM_READ as u64,
        c if (op::LOG0..=op::LOG4).contains(&c) => chunks * LAT_MEM_READ as u64,
        op::CALLDATACOPY | op::CODECOPY | op::RETURNDATACOPY | op::EXTCODECOPY => chunks * LAT_MEM_WRITE as u64,
        _ => 0,
    }
}

pub fn simulated_time(cycles: u64, clock: &ClockConfig) -> f64 {
    cycles as f64 * clock.period_ns
}

pub fn calibration_table(clock: &ClockConfig) -> Vec<CalibrationRow> {
    opcode::opcode_table()
        .iter()
        .map(|s| CalibrationRow {
            opcode: s.code,
            mnemonic: s.mnemonic,
            gas: s.gas,
            evmx_ns: simulated_time(s.cycles as u64, clock),
            cycles: s.cycles,
            source: if s.estimated { CycleSource::Estimated } else { CycleSource::Measured },
        })
        .collect()
}

/// Reference per-opcode latencies of three software clients and of EVMx, in ns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CpuBaseline {
    pub opcode: u8,
    /// PyEthApp on Linux.
    pub lpy: u32,
    /// Go-Ethereum on Windows.
    pub wgo: u32,
    /// Parity on Windows.
    pub wpa: u32,
    pub evmx_ns: u32,
    /// Printed relative reduction, percent.
    pub delta_pct: u32,
}

const fn row(opcode: u8, lpy: u32, wgo: u32, wpa: u32, evmx_ns: u32, delta_pct: u32) -> CpuBaseline {
    CpuBaseline { opcode, lpy, wgo, wpa, evmx_ns, delta_pct }
}

/// Reference data for the 15 measured opcodes. These are external figures,
/// not measurements made by this crate.
pub const CPU_BASELINES: [CpuBaseline; 15] = [
    row(op::ADD, 510, 602, 610, 28, 95),
    row(op::SUB, 440, 611, 606, 28, 94),
    row(op::EQ, 430, 571, 604, 28, 93),
    row(op::AND, 480, 643, 703, 28, 94),
    row(op::OR, 490, 646, 701, 28, 94),
    row(op::ADDRESS, 2770, 1170, 608, 7, 99),
    row(op::CALLER, 3640, 1142, 614, 7, 99),
    row(op::CALLVALUE, 80, 556, 604, 7, 91),
    row(op::POP, 220, 570, 605, 7, 97),
    row(op::MLOAD, 6950, 1838, 666, 259, 61),
    row(op::MSTORE, 2830, 1726, 684, 245, 64),
    row(op::SLOAD, 1990, 694, 701, 21, 97),
    row(op::PUSH1, 260, 600, 640, 14, 95),
    row(op::SWAP1, 310, 528, 550, 28, 91),
    row(op::DUP1, 240, 559, 594, 21, 91),
];

impl CpuBaseline {
    pub fn min_cpu_ns(&self) -> u32 {
        self.lpy.min(self.wgo).min(self.wpa)
    }
}

/// `(min(cpu) - evmx) / min(cpu) * 100`.
pub fn delta_percent(min_cpu_ns: f64, evmx_ns: f64) -> f64 {
    (min_cpu_ns - evmx_ns) / min_cpu_ns * 100.0
}

/// One line of the CPU-vs-model comparison.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LatencyRow {
    pub opcode: u8,
    pub mnemonic: &'static str,
    pub gas: u64,
    pub lpy_ns: u32,
    pub wgo_ns: u32,
    pub wpa_ns: u32,
    pub cycles: u32,
    pub model_ns: f64,
    pub reference_ns: u32,
    pub delta_pct: f64,
    pub reference_delta_pct: u32,
}

impl LatencyRow {
    /// Model latency equals the reference figure exactly.
    pub fn latency_matches(&self) -> bool {
        self.model_ns == self.reference_ns as f64
    }

    /// Recomputed reduction rounds to within one point of the reference one.
    pub fn delta_matches(&self) -> bool {
        (round_half_away(self.delta_pct) - self.reference_delta_pct as f64).abs() <= 1.0
    }
}

/// Rounds to the nearest integer, halves away from zero.
pub fn round_half_away(x: f64) -> f64 {
    let t = x as i64 as f64;
    if x - t >= 0.5 {
        t + 1.0
    } else if x - t <= -0.5 {
        t - 1.0
    } else {
        t
    }
}

pub fn latency_report(clock: &ClockConfig) -> Vec<LatencyRow> {
    CPU_BASELINES
        .iter()
        .map(|b| {
            let spec = opcode::lookup(b.opcode).expect("measured opcode in table");
            let model_ns = simulated_time(spec.cycles as u64, clock);
            LatencyRow {
                opcode: b.opcode,
                mnemonic: spec.mnemonic,
                gas: spec.gas,
                lpy_ns: b.lpy,
                wgo_ns: b.wgo,
                wpa_ns: b.wpa,
                cycles: spec.cycles,
                model_ns,
                reference_ns: b.evmx_ns,
                delta_pct: delta_percent(b.min_cpu_ns() as f64, model_ns),
                reference_delta_pct: b.delta_pct,
            }
        })
        .collect()
}
