//! Opcode metadata: mnemonic, immediate width, gas, cycle cost and stack arity.
//!
//! Fifteen opcodes carry measured EVMx latencies (7 ns clock). Every other
//! opcode gets an estimated cycle cost from a fixed rule:
//!
//! `cycles = stack accesses + component latency`
//!
//! where each pop, push, or in-place stack read/write counts one cycle and the
//! component latency is one of the `LAT_*` constants below. Region operations
//! (hashing, copies, RETURN) also pay per-byte cycles at run time, see
//! [`crate::timing::region_cycles`]. Estimated rows have `estimated == true`.
//!
//! Gas for opcodes outside the measured set comes from the static Ethereum
//! fee schedule. Dynamic gas components (memory expansion, per-word hashing,
//! SSTORE refunds, EXP byte cost) are not charged.

use core::fmt;

/// One-cycle ALU pass (add, compare, bitwise, shift).
pub const LAT_ALU: u32 = 1;
/// Bit-serial shift-and-add multiply or non-restoring divide, one cycle per bit.
pub const LAT_ITERATIVE: u32 = 256;
/// 512-bit intermediate paths (ADDMOD, MULMOD) and EXP.
pub const LAT_WIDE: u32 = 512;
/// One 32-byte memory fetch.
pub const LAT_MEM_READ: u32 = 32;
/// One 32-byte memory write.
pub const LAT_MEM_WRITE: u32 = 32;
/// One Keccak-f[1600] permutation, one round per cycle.
pub const LAT_KECCAK: u32 = 24;
/// Program-counter load or immediate fetch.
pub const LAT_SEQ: u32 = 1;

/// Opcode byte constants.
pub mod op {
    pub const STOP: u8 = 0x00;
    pub const ADD: u8 = 0x01;
    pub const MUL: u8 = 0x02;
    pub const SUB: u8 = 0x03;
    pub const DIV: u8 = 0x04;
    pub const SDIV: u8 = 0x05;
    pub const MOD: u8 = 0x06;
    pub const SMOD: u8 = 0x07;
    pub const ADDMOD: u8 = 0x08;
    pub const MULMOD: u8 = 0x09;
    pub const EXP: u8 = 0x0a;
    pub const SIGNEXTEND: u8 = 0x0b;
    pub const LT: u8 = 0x10;
    pub const GT: u8 = 0x11;
    pub const SLT: u8 = 0x12;
    pub const SGT: u8 = 0x13;
    pub const EQ: u8 = 0x14;
    pub const ISZERO: u8 = 0x15;
    pub const AND: u8 = 0x16;
    pub const OR: u8 = 0x17;
    pub const XOR: u8 = 0x18;
    pub const NOT: u8 = 0x19;
    pub const BYTE: u8 = 0x1a;
    pub const SHL: u8 = 0x1b;
    pub const SHR: u8 = 0x1c;
    pub const SAR: u8 = 0x1d;
    pub const KECCAK256: u8 = 0x20;
    pub const ADDRESS: u8 = 0x30;
    pub const BALANCE: u8 = 0x31;
    pub const ORIGIN: u8 = 0x32;
    pub const CALLER: u8 = 0x33;
    pub const CALLVALUE: u8 = 0x34;
    pub const CALLDATALOAD: u8 = 0x35;
    pub const CALLDATASIZE: u8 = 0x36;
    pub const CALLDATACOPY: u8 = 0x37;
    pub const CODESIZE: u8 = 0x38;
    pub const CODECOPY: u8 = 0x39;
    pub const GASPRICE: u8 = 0x3a;
    pub const EXTCODESIZE: u8 = 0x3b;
    pub const EXTCODECOPY: u8 = 0x3c;
    pub const RETURNDATASIZE: u8 = 0x3d;
    pub const RETURNDATACOPY: u8 = 0x3e;
    pub const EXTCODEHASH: u8 = 0x3f;
    pub const BLOCKHASH: u8 = 0x40;
    pub const COINBASE: u8 = 0x41;
    pub const TIMESTAMP: u8 = 0x42;
    pub const NUMBER: u8 = 0x43;
    pub const PREVRANDAO: u8 = 0x44;
    pub const GASLIMIT: u8 = 0x45;
    pub const CHAINID: u8 = 0x46;
    pub const SELFBALANCE: u8 = 0x47;
    pub const BASEFEE: u8 = 0x48;
    pub const POP: u8 = 0x50;
    pub const MLOAD: u8 = 0x51;
    pub const MSTORE: u8 = 0x52;
    pub const MSTORE8: u8 = 0x53;
    pub const SLOAD: u8 = 0x54;
    pub const SSTORE: u8 = 0x55;
    pub const JUMP: u8 = 0x56;
    pub const JUMPI: u8 = 0x57;
    pub const PC: u8 = 0x58;
    pub const MSIZE: u8 = 0x59;
    pub const GAS: u8 = 0x5a;
    pub const JUMPDEST: u8 = 0x5b;
    pub const PUSH0: u8 = 0x5f;
    pub const PUSH1: u8 = 0x60;
    pub const PUSH2: u8 = 0x61;
    pub const PUSH4: u8 = 0x63;
    pub const PUSH20: u8 = 0x73;
    pub const PUSH32: u8 = 0x7f;
    pub const DUP1: u8 = 0x80;
    pub const DUP16: u8 = 0x8f;
    pub const SWAP1: u8 = 0x90;
    pub const SWAP16: u8 = 0x9f;
    pub const LOG0: u8 = 0xa0;
    pub const LOG4: u8 = 0xa4;
    pub const CREATE: u8 = 0xf0;
    pub const CALL: u8 = 0xf1;
    pub const CALLCODE: u8 = 0xf2;
    pub const RETURN: u8 = 0xf3;
    pub const DELEGATECALL: u8 = 0xf4;
    pub const CREATE2: u8 = 0xf5;
    pub const STATICCALL: u8 = 0xfa;
    pub const REVERT: u8 = 0xfd;
    pub const INVALID: u8 = 0xfe;
    pub const SELFDESTRUCT: u8 = 0xff;
}

/// Static metadata for one opcode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OpcodeSpec {
    pub code: u8,
    pub mnemonic: &'static str,
    /// Immediate bytes following the opcode (1..=32 for PUSH1..PUSH32).
    pub immediate_len: u8,
    pub gas: u64,
    pub cycles: u32,
    /// Items consumed from the stack.
    pub pops: u8,
    /// Items produced onto the stack.
    pub pushes: u8,
    /// Stack depth required before execution. Equals `pops` except for DUPn/SWAPn.
    pub min_depth: u8,
    /// `true` when `cycles` comes from the estimation rule rather than measurement.
    pub estimated: bool,
}

impl OpcodeSpec {
    pub fn is_push(&self) -> bool {
        (op::PUSH0..=op::PUSH32).contains(&self.code)
    }
}

impl fmt::Display for OpcodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic)
    }
}

/// Measured rows: (opcode, gas, EVMx latency in ns). Cycle counts are `ns / 7`.
pub const MEASURED: [(u8, u64, u32); 15] = [
    (op::ADD, 3, 28),
    (op::SUB, 3, 28),
    (op::EQ, 3, 28),
    (op::AND, 3, 28),
    (op::OR, 3, 28),
    (op::ADDRESS, 2, 7),
    (op::CALLER, 2, 7),
    (op::CALLVALUE, 2, 7),
    (op::POP, 2, 7),
    (op::MLOAD, 3, 259),
    (op::MSTORE, 3, 245),
    (op::SLOAD, 100, 21),
    (op::PUSH1, 3, 14),
    (op::SWAP1, 3, 28),
    (op::DUP1, 3, 21),
];

/// Period of the EVMx reference clock in nanoseconds.
pub const REFERENCE_PERIOD_NS: u32 = 7;

const PUSH_NAMES: [&str; 33] = [
    "PUSH0", "PUSH1", "PUSH2", "PUSH3", "PUSH4", "PUSH5", "PUSH6", "PUSH7", "PUSH8", "PUSH9",
    "PUSH10", "PUSH11", "PUSH12", "PUSH13", "PUSH14", "PUSH15", "PUSH16", "PUSH17", "PUSH18",
    "PUSH19", "PUSH20", "PUSH21", "PUSH22", "PUSH23", "PUSH24", "PUSH25", "PUSH26", "PUSH27",
    "PUSH28", "PUSH29", "PUSH30", "PUSH31", "PUSH32",
];
const DUP_NAMES: [&str; 16] = [
    "DUP1", "DUP2", "DUP3", "DUP4", "DUP5", "DUP6", "DUP7", "DUP8", "DUP9", "DUP10", "DUP11",
    "DUP12", "DUP13", "DUP14", "DUP15", "DUP16",
];
const SWAP_NAMES: [&str; 16] = [
    "SWAP1", "SWAP2", "SWAP3", "SWAP4", "SWAP5", "SWAP6", "SWAP7", "SWAP8", "SWAP9", "SWAP10",
    "SWAP11", "SWAP12", "SWAP13", "SWAP14", "SWAP15", "SWAP16",
];
const LOG_NAMES: [&str; 5] = ["LOG0", "LOG1", "LOG2", "LOG3", "LOG4"];

const fn spec(code: u8, mnemonic: &'static str, gas: u64, pops: u8, pushes: u8, latency: u32) -> OpcodeSpec {
    OpcodeSpec {
        code,
        mnemonic,
        immediate_len: 0,
        gas,
        cycles: pops as u32 + pushes as u32 + latency,
        pops,
        pushes,
        min_depth: pops,
        estimated: true,
    }
}

const fn build_table() -> [Option<OpcodeSpec>; 256] {
    use op::*;
    let mut t: [Option<OpcodeSpec>; 256] = [None; 256];

    t[STOP as usize] = Some(spec(STOP, "STOP", 0, 0, 0, LAT_SEQ));
    t[ADD as usize] = Some(spec(ADD, "ADD", 3, 2, 1, LAT_ALU));
    t[MUL as usize] = Some(spec(MUL, "MUL", 5, 2, 1, LAT_ITERATIVE));
    t[SUB as usize] = Some(spec(SUB, "SUB", 3, 2, 1, LAT_ALU));
    t[DIV as usize] = Some(spec(DIV, "DIV", 5, 2, 1, LAT_ITERATIVE));
    t[SDIV as usize] = Some(spec(SDIV, "SDIV", 5, 2, 1, LAT_ITERATIVE));
    t[MOD as usize] = Some(spec(MOD, "MOD", 5, 2, 1, LAT_ITERATIVE));
    t[SMOD as usize] = Some(spec(SMOD, "SMOD", 5, 2, 1, LAT_ITERATIVE));
    t[ADDMOD as usize] = Some(spec(ADDMOD, "ADDMOD", 8, 3, 1, LAT_WIDE));
    t[MULMOD as usize] = Some(spec(MULMOD, "MULMOD", 8, 3, 1, LAT_WIDE));
    t[EXP as usize] = Some(spec(EXP, "EXP", 10, 2, 1, LAT_WIDE));
    t[SIGNEXTEND as usize] = Some(spec(SIGNEXTEND, "SIGNEXTEND", 5, 2, 1, LAT_ALU));

    t[LT as usize] = Some(spec(LT, "LT", 3, 2, 1, LAT_ALU));
    t[GT as usize] = Some(spec(GT, "GT", 3, 2, 1, LAT_ALU));
    t[SLT as usize] = Some(spec(SLT, "SLT", 3, 2, 1, LAT_ALU));
    t[SGT as usize] = Some(spec(SGT, "SGT", 3, 2, 1, LAT_ALU));
    t[EQ as usize] = Some(spec(EQ, "EQ", 3, 2, 1, LAT_ALU));
    t[ISZERO as usize] = Some(spec(ISZERO, "ISZERO", 3, 1, 1, LAT_ALU));
    t[AND as usize] = Some(spec(AND, "AND", 3, 2, 1, LAT_ALU));
    t[OR as usize] = Some(spec(OR, "OR", 3, 2, 1, LAT_ALU));
    t[XOR as usize] = Some(spec(XOR, "XOR", 3, 2, 1, LAT_ALU));
    t[NOT as usize] = Some(spec(NOT, "NOT", 3, 1, 1, LAT_ALU));
    t[BYTE as usize] = Some(spec(BYTE, "BYTE", 3, 2, 1, LAT_ALU));
    t[SHL as usize] = Some(spec(SHL, "SHL", 3, 2, 1, LAT_ALU));
    t[SHR as usize] = Some(spec(SHR, "SHR", 3, 2, 1, LAT_ALU));
    t[SAR as usize] = Some(spec(SAR, "SAR", 3, 2, 1, LAT_ALU));

    // One mandatory permutation; memory fetches and extra blocks are charged per byte.
    t[KECCAK256 as usize] = Some(spec(KECCAK256, "KECCAK256", 30, 2, 1, LAT_KECCAK));

    t[ADDRESS as usize] = Some(spec(ADDRESS, "ADDRESS", 2, 0, 1, 0));
    t[BALANCE as usize] = Some(spec(BALANCE, "BALANCE", 100, 1, 1, 0));
    t[ORIGIN as usize] = Some(spec(ORIGIN, "ORIGIN", 2, 0, 1, 0));
    t[CALLER as usize] = Some(spec(CALLER, "CALLER", 2, 0, 1, 0));
    t[CALLVALUE as usize] = Some(spec(CALLVALUE, "CALLVALUE", 2, 0, 1, 0));
    t[CALLDATALOAD as usize] = Some(spec(CALLDATALOAD, "CALLDATALOAD", 3, 1, 1, LAT_SEQ));
    t[CALLDATASIZE as usize] = Some(spec(CALLDATASIZE, "CALLDATASIZE", 2, 0, 1, 0));
    t[CALLDATACOPY as usize] = Some(spec(CALLDATACOPY, "CALLDATACOPY", 3, 3, 0, 0));
    t[CODESIZE as usize] = Some(spec(CODESIZE, "CODESIZE", 2, 0, 1, 0));
    t[CODECOPY as usize] = Some(spec(CODECOPY, "CODECOPY", 3, 3, 0, 0));
    t[GASPRICE as usize] = Some(spec(GASPRICE, "GASPRICE", 2, 0, 1, 0));
    t[EXTCODESIZE as usize] = Some(spec(EXTCODESIZE, "EXTCODESIZE", 100, 1, 1, 0));
    t[EXTCODECOPY as usize] = Some(spec(EXTCODECOPY, "EXTCODECOPY", 100, 4, 0, 0));
    t[RETURNDATASIZE as usize] = Some(spec(RETURNDATASIZE, "RETURNDATASIZE", 2, 0, 1, 0));
    t[RETURNDATACOPY as usize] = Some(spec(RETURNDATACOPY, "RETURNDATACOPY", 3, 3, 0, 0));
    t[EXTCODEHASH as usize] = Some(spec(EXTCODEHASH, "EXTCODEHASH", 100, 1, 1, 0));

    t[BLOCKHASH as usize] = Some(spec(BLOCKHASH, "BLOCKHASH", 20, 1, 1, 0));
    t[COINBASE as usize] = Some(spec(COINBASE, "COINBASE", 2, 0, 1, 0));
    t[TIMESTAMP as usize] = Some(spec(TIMESTAMP, "TIMESTAMP", 2, 0, 1, 0));
    t[NUMBER as usize] = Some(spec(NUMBER, "NUMBER", 2, 0, 1, 0));
    t[PREVRANDAO as usize] = Some(spec(PREVRANDAO, "PREVRANDAO", 2, 0, 1, 0));
    t[GASLIMIT as usize] = Some(spec(GASLIMIT, "GASLIMIT", 2, 0, 1, 0));
    t[CHAINID as usize] = Some(spec(CHAINID, "CHAINID", 2, 0, 1, 0));
    t[SELFBALANCE as usize] = Some(spec(SELFBALANCE, "SELFBALANCE", 5, 0, 1, 0));
    t[BASEFEE as usize] = Some(spec(BASEFEE, "BASEFEE", 2, 0, 1, 0));

    t[POP as usize] = Some(spec(POP, "POP", 2, 1, 0, 0));
    t[MLOAD as usize] = Some(spec(MLOAD, "MLOAD", 3, 1, 1, LAT_MEM_READ));
    t[MSTORE as usize] = Some(spec(MSTORE, "MSTORE", 3, 2, 0, LAT_MEM_WRITE));
    t[MSTORE8 as usize] = Some(spec(MSTORE8, "MSTORE8", 3, 2, 0, LAT_SEQ));
    t[SLOAD as usize] = Some(spec(SLOAD, "SLOAD", 100, 1, 1, LAT_SEQ));
    t[SSTORE as usize] = Some(spec(SSTORE, "SSTORE", 100, 2, 0, LAT_SEQ));
    t[JUMP as usize] = Some(spec(JUMP, "JUMP", 8, 1, 0, LAT_SEQ));
    t[JUMPI as usize] = Some(spec(JUMPI, "JUMPI", 10, 2, 0, LAT_SEQ));
    t[PC as usize] = Some(spec(PC, "PC", 2, 0, 1, 0));
    t[MSIZE as usize] = Some(spec(MSIZE, "MSIZE", 2, 0, 1, 0));
    t[GAS as usize] = Some(spec(GAS, "GAS", 2, 0, 1, 0));
    t[JUMPDEST as usize] = Some(spec(JUMPDEST, "JUMPDEST", 1, 0, 0, LAT_SEQ));

    t[PUSH0 as usize] = Some(spec(PUSH0, "PUSH0", 2, 0, 1, 0));
    let mut n = 1;
    while n <= 32 {
        let code = PUSH0 + n as u8;
        let mut s = spec(code, PUSH_NAMES[n], 3, 0, 1, LAT_SEQ);
        s.immediate_len = n as u8;
        t[code as usize] = Some(s);
        n += 1;
    }

    let mut n = 1;
    while n <= 16 {
        // In-place read of item n plus a push: two stack accesses.
        let code = DUP1 + (n - 1) as u8;
        let mut s = spec(code, DUP_NAMES[n - 1], 3, 0, 1, 1 + LAT_ALU);
        s.min_depth = n as u8;
        t[code as usize] = Some(s);

        // Two reads and two writes.
        let code = SWAP1 + (n - 1) as u8;
        let mut s = spec(code, SWAP_NAMES[n - 1], 3, 0, 0, 4);
        s.min_depth = n as u8 + 1;
        t[code as usize] = Some(s);
        n += 1;
    }

    let mut n = 0;
    while n <= 4 {
        let code = LOG0 + n as u8;
        t[code as usize] = Some(spec(code, LOG_NAMES[n], 375 * (n as u64 + 1), 2 + n as u8, 0, 0));
        n += 1;
    }

    // CREATE: RLP encode plus one permutation. CREATE2: init-code hash plus address hash.
    t[CREATE as usize] = Some(spec(CREATE, "CREATE", 32000, 3, 1, LAT_SEQ + LAT_KECCAK));
    t[CALL as usize] = Some(spec(CALL, "CALL", 100, 7, 1, LAT_SEQ));
    t[CALLCODE as usize] = Some(spec(CALLCODE, "CALLCODE", 100, 7, 1, LAT_SEQ));
    t[RETURN as usize] = Some(spec(RETURN, "RETURN", 0, 2, 0, 0));
    t[DELEGATECALL as usize] = Some(spec(DELEGATECALL, "DELEGATECALL", 100, 6, 1, LAT_SEQ));
    t[CREATE2 as usize] = Some(spec(CREATE2, "CREATE2", 32000, 4, 1, 2 * LAT_KECCAK));
    t[STATICCALL as usize] = Some(spec(STATICCALL, "STATICCALL", 100, 6, 1, LAT_SEQ));
    t[REVERT as usize] = Some(spec(REVERT, "REVERT", 0, 2, 0, 0));
    t[INVALID as usize] = Some(spec(INVALID, "INVALID", 0, 0, 0, LAT_SEQ));
    t[SELFDESTRUCT as usize] = Some(spec(SELFDESTRUCT, "SELFDESTRUCT", 5000, 1, 0, LAT_SEQ));

    // Measured rows override gas and cycles.
    let mut i = 0;
    while i < MEASURED.len() {
        let (code, gas, ns) = MEASURED[i];
        if let Some(mut s) = t[code as usize] {
            s.gas = gas;
            s.cycles = ns / REFERENCE_PERIOD_NS;
            s.estimated = false;
            t[code as usize] = Some(s);
        }
        i += 1;
    }
    t
}

static TABLE: OpcodeTable = OpcodeTable { entries: build_table() };

/// Byte-indexed opcode table.
#[derive(Debug)]
pub struct OpcodeTable {
    entries: [Option<OpcodeSpec>; 256],
}

impl OpcodeTable {
    pub fn get(&self, code: u8) -> Option<&OpcodeSpec> {
        self.entries[code as usize].as_ref()
    }

    /// Supported opcodes in ascending byte order.
    pub fn iter(&self) -> impl Iterator<Item = &OpcodeSpec> {
        self.entries.iter().filter_map(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn by_mnemonic(&self, name: &str) -> Option<&OpcodeSpec> {
        self.iter().find(|s| s.mnemonic.eq_ignore_ascii_case(name))
    }
}

pub fn opcode_table() -> &'static OpcodeTable {
    &TABLE
}

pub fn lookup(code: u8) -> Option<&'static OpcodeSpec> {
    TABLE.get(code)
}

/// Mnemonic for any byte; unsupported bytes report as `INVALID`.
pub fn mnemonic(code: u8) -> &'static str {
    lookup(code).map_or("INVALID", |s| s.mnemonic)
}

/// Immediate width for a byte treated as an opcode (nonzero only for PUSH1..PUSH32).
pub const fn immediate_len(code: u8) -> usize {
    if code >= op::PUSH1 && code <= op::PUSH32 {
        (code - op::PUSH0) as usize
    } else {
        0
    }
}

/// The 45 most frequent opcodes in deployed verified contracts, most frequent first.
pub const TOP45: [&str; 45] = [
    "JUMP", "PUSH1", "PUSH2", "POP", "JUMPDEST", "SWAP1", "DUP1", "DUP2", "ADD", "OR", "DUP3",
    "PUSH0", "SWAP2", "MSTORE", "AND", "JUMPI", "CALL", "MLOAD", "PUSH20", "DUP4", "SUB", "SWAP3",
    "DUP5", "EQ", "SLOAD", "PUSH4", "LT", "DUP6", "KECCAK256", "MUL", "EXP", "STOP", "PUSH3", "GT",
    "CALLVALUE", "SWAP4", "CALLDATASIZE", "NOT", "PUSH32", "INVALID", "CALLER", "DUP7", "DIV",
    "CODECOPY", "RETURNDATASIZE",
];
