//! Random straight-line programs over the non-call opcode subset.
//!
//! Memory operands are always pushed as literals that keep accesses inside
//! the 2768-byte memory, so the reference EVM (unbounded memory) and the
//! bounded model see the same program semantics.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

pub const MAX_OPCODES: usize = 64;

const BINARY: &[u8] = &[
    0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x0a, 0x0b, 0x10, 0x11, 0x12, 0x13, 0x14, 0x16, 0x17, 0x18, 0x1a, 0x1b,
    0x1c, 0x1d,
];
const TERNARY: &[u8] = &[0x08, 0x09];
const UNARY: &[u8] = &[0x15, 0x19];
const NULLARY: &[u8] = &[0x30, 0x33, 0x34, 0x36, 0x38, 0x58, 0x59];

#[derive(Debug, Clone)]
pub struct Program {
    pub code: Vec<u8>,
    pub calldata: Vec<u8>,
    pub opcodes: usize,
}

struct Builder<'r, R: Rng> {
    rng: &'r mut R,
    code: Vec<u8>,
    depth: usize,
    ops: usize,
}

impl<R: Rng> Builder<'_, R> {
    fn op(&mut self, b: u8, pops: usize, pushes: usize) {
        self.code.push(b);
        self.ops += 1;
        self.depth = self.depth.saturating_sub(pops) + pushes;
    }

    fn push_bytes(&mut self, bytes: &[u8]) {
        self.code.push(0x5f + bytes.len() as u8);
        self.code.extend_from_slice(bytes);
        self.ops += 1;
        self.depth += 1;
    }

    fn push_u64(&mut self, v: u64) {
        let be = v.to_be_bytes();
        let skip = be.iter().take_while(|b| **b == 0).count().min(7);
        self.push_bytes(&be[skip..]);
    }

    fn push_random(&mut self) {
        let r = self.rng.gen_range(0..10);
        let bytes: Vec<u8> = match r {
            0 => vec![],
            1 => vec![0xff; 32],
            2 => {
                let mut v = vec![0u8; 32];
                v[0] = 0x80;
                v
            }
            3 | 4 => vec![self.rng.gen_range(0..40)],
            _ => {
                let n = self.rng.gen_range(1..=32);
                (0..n).map(|_| self.rng.gen()).collect()
            }
        };
        self.push_bytes(&bytes);
    }

    fn ensure(&mut self, depth: usize) {
        while self.depth < depth {
            self.push_random();
        }
    }

    fn unit(&mut self) {
        match self.rng.gen_range(0..100) {
            0..=19 => self.push_random(),
            20..=39 => {
                self.ensure(2);
                let b = BINARY[self.rng.gen_range(0..BINARY.len())];
                self.op(b, 2, 1);
            }
            40..=43 => {
                self.ensure(3);
                let b = TERNARY[self.rng.gen_range(0..TERNARY.len())];
                self.op(b, 3, 1);
            }
            44..=48 => {
                self.ensure(1);
                let b = UNARY[self.rng.gen_range(0..UNARY.len())];
                self.op(b, 1, 1);
            }
            49..=53 => {
                let b = NULLARY[self.rng.gen_range(0..NULLARY.len())];
                self.op(b, 0, 1);
            }
            54..=59 => {
                self.ensure(1);
                let n = self.rng.gen_range(1..=self.depth.min(16));
                self.op(0x7f + n as u8, 0, 1);
            }
            60..=65 => {
                self.ensure(2);
                let n = self.rng.gen_range(1..=(self.depth - 1).min(16));
                self.op(0x8f + n as u8, 0, 0);
            }
            66..=68 => {
                self.ensure(1);
                self.op(0x50, 1, 0);
            }
            69..=73 => {
                self.ensure(1);
                let off = self.rng.gen_range(0..=2736);
                self.push_u64(off);
                self.op(0x52, 2, 0);
            }
            74..=75 => {
                self.ensure(1);
                let off = self.rng.gen_range(0..2768);
                self.push_u64(off);
                self.op(0x53, 2, 0);
            }
            76..=79 => {
                let off = self.rng.gen_range(0..=2736);
                self.push_u64(off);
                self.op(0x51, 1, 1);
            }
            80..=84 => {
                self.ensure(1);
                let key = self.rng.gen_range(0..8);
                self.push_u64(key);
                self.op(0x55, 2, 0);
            }
            85..=87 => {
                let key = self.rng.gen_range(0..8);
                self.push_u64(key);
                self.op(0x54, 1, 1);
            }
            88..=90 => {
                let size = self.rng.gen_range(0..=300);
                let off = self.rng.gen_range(0..=(2768 - size));
                self.push_u64(size);
                self.push_u64(off);
                self.op(0x20, 2, 1);
            }
            91..=92 => {
                let off = self.rng.gen_range(0..48);
                self.push_u64(off);
                self.op(0x35, 1, 1);
            }
            93..=96 => {
                let size = self.rng.gen_range(0..=96);
                let src = self.rng.gen_range(0..80);
                let dest = self.rng.gen_range(0..=(2768 - size));
                self.push_u64(size);
                self.push_u64(src);
                self.push_u64(dest);
                let b = if self.rng.gen_bool(0.5) { 0x37 } else { 0x39 };
                self.op(b, 3, 0);
            }
            _ => {
                // Occasionally an opcode regardless of stack depth, to exercise underflow.
                let b = BINARY[self.rng.gen_range(0..BINARY.len())];
                self.op(b, 2, 1);
            }
        }
    }

    fn terminate(&mut self) {
        match self.rng.gen_range(0..5) {
            0 => {}
            1 => self.op(0x00, 0, 0),
            k => {
                let size = self.rng.gen_range(0..=64);
                let off = self.rng.gen_range(0..=(2768 - size));
                self.push_u64(size);
                self.push_u64(off);
                self.op(if k == 4 { 0xfd } else { 0xf3 }, 2, 0);
            }
        }
    }
}

/// A random program of at most [`MAX_OPCODES`] executed opcodes.
pub fn program<R: Rng>(rng: &mut R) -> Program {
    let calldata_len = rng.gen_range(0..70);
    let calldata = (0..calldata_len).map(|_| rng.gen()).collect();
    let mut b = Builder { rng, code: Vec::new(), depth: 0, ops: 0 };
    let target = b.rng.gen_range(1..=MAX_OPCODES - 8);
    while b.ops < target {
        b.unit();
    }
    b.terminate();
    let opcodes = b.ops;
    debug_assert!(opcodes <= MAX_OPCODES);
    Program { code: b.code, calldata, opcodes }
}

/// The 45 commonest opcodes in deployed contracts, most frequent first.
const BLOCK_MIX: &[&str] = &[
    "JUMP", "PUSH1", "PUSH2", "POP", "JUMPDEST", "SWAP1", "DUP1", "DUP2", "ADD", "OR", "DUP3", "PUSH0", "SWAP2",
    "MSTORE", "AND", "JUMPI", "CALL", "MLOAD", "PUSH20", "DUP4", "SUB", "SWAP3", "DUP5", "EQ", "SLOAD", "PUSH4", "LT",
    "DUP6", "KECCAK256", "MUL", "EXP", "PUSH3", "GT", "CALLVALUE", "SWAP4", "CALLDATASIZE", "NOT", "PUSH32", "INVALID", "CALLER",
    "DUP7", "DIV", "CODECOPY", "RETURNDATASIZE",
];

/// A straight-line transaction body of `units` instructions drawn from
/// [`BLOCK_MIX`] with weight 1/rank, operands arranged so that it runs to
/// its final STOP. INVALID keeps its rank but is never emitted.
pub fn block_tx<R: Rng>(rng: &mut R, units: usize) -> Vec<u8> {
    let weights = BLOCK_MIX.iter().enumerate().map(|(i, m)| if *m == "INVALID" { 0.0 } else { 1.0 / (i + 1) as f64 });
    let dist = WeightedIndex::new(weights).expect("positive weights");
    let mut b = Builder { rng, code: Vec::new(), depth: 0, ops: 0 };
    for _ in 0..units {
        let m = BLOCK_MIX[dist.sample(b.rng)];
        let spec = evmx_core::opcode_table().by_mnemonic(m).expect("known mnemonic");
        let code = spec.code;
        match m {
            "JUMP" | "JUMPI" => {
                if m == "JUMPI" {
                    let cond = b.rng.gen_range(0..2);
                    b.push_u64(cond);
                }
                // target = the JUMPDEST right after this jump
                let target = b.code.len() + 4;
                b.push_bytes(&(target as u16).to_be_bytes());
                b.op(code, spec.pops as usize, 0);
                b.op(0x5b, 0, 0);
            }
            "MSTORE" => {
                b.ensure(1);
                let off = b.rng.gen_range(0..=2736);
                b.push_u64(off);
                b.op(code, 2, 0);
            }
            "MLOAD" => {
                let off = b.rng.gen_range(0..=2736);
                b.push_u64(off);
                b.op(code, 1, 1);
            }
            "KECCAK256" => {
                let size = b.rng.gen_range(0..=96);
                b.push_u64(size);
                b.push_u64(0);
                b.op(code, 2, 1);
            }
            "CODECOPY" => {
                let size = b.rng.gen_range(0..=64);
                b.push_u64(size);
                b.push_u64(0);
                let dest = b.rng.gen_range(0..=2700);
                b.push_u64(dest);
                b.op(code, 3, 0);
            }
            _ if spec.is_push() => b.push_bytes(&vec![0x42; spec.immediate_len as usize]),
            _ => {
                b.ensure(spec.min_depth as usize);
                b.op(code, spec.pops as usize, spec.pushes as usize);
            }
        }
    }
    b.op(0x00, 0, 0);
    b.code
}
