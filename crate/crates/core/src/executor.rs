//! Fetch-decode-execute loop.
//!
//! Each step fetches one opcode from bytecode memory, deducts its gas,
//! charges its cycles, applies its effect and advances the program counter.
//! Gas is deducted before the effect, so an opcode that cannot be paid for
//! has no side effects. Any failure (out of gas, fault, REVERT) restores the
//! storage contents the run started with.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::alu::{self, BitOp};
use crate::config::ExecutionConfig;
use crate::crypto::{self, Digest256};
use crate::error::{ErrorKind, VmError};
use crate::hexutil;
use crate::opcode::{self, op, OpcodeSpec};
use crate::state::{BytecodeMemory, Memory, ProgramCounter, Stack, Storage};
use crate::timing;
use crate::word::{Address, Word256};

/// Chain id reported by CHAINID.
pub const CHAIN_ID: u64 = 1;

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Success,
    /// REVERT executed: storage rolled back, return data kept.
    Reverted,
    OutOfGas,
    Fault(VmError),
}

impl Status {
    pub fn is_success(&self) -> bool {
        matches!(self, Status::Success)
    }
}

/// One executed FSM step.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceStep {
    pub step: u64,
    pub pc: usize,
    pub opcode: u8,
    pub mnemonic: String,
    pub gas_before: u64,
    pub gas_after: u64,
    pub cycles: u64,
    pub depth: usize,
    pub top: Option<Word256>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CreateKind {
    Create,
    Create2,
}

/// An account address derived by CREATE or CREATE2. The value is recorded, not transferred.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CreatedAccount {
    pub kind: CreateKind,
    pub address: Address,
    pub value: Word256,
    pub init_code_hash: Word256,
    pub salt: Option<Word256>,
    pub nonce: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StorageEntry {
    pub key: Word256,
    pub value: Word256,
}

/// Outcome of a run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Receipt {
    pub status: Status,
    pub gas_limit: u64,
    pub gas_used: u64,
    pub gas_remaining: u64,
    pub cycles: u64,
    pub clock_hz: f64,
    pub simulated_time_ns: f64,
    pub steps: u64,
    #[cfg_attr(feature = "serde", serde(with = "hexutil::serde_bytes"))]
    pub return_data: Vec<u8>,
    pub storage_out: Vec<StorageEntry>,
    pub created: Vec<CreatedAccount>,
    pub storage_collisions: u64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub trace: Option<Vec<TraceStep>>,
}

/// Serializable view of the machine.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateSnapshot {
    pub pc: usize,
    pub gas_remaining: u64,
    pub cycles_elapsed: u64,
    /// Bottom first; the last element is the top.
    pub stack: Vec<Word256>,
    /// Touched memory prefix, hex.
    pub memory: String,
    pub storage: Vec<StorageEntry>,
}

/// Result of a single [`MachineState::step`].
#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Continue(TraceStep),
    Halted(Receipt),
}

enum Flow {
    Next,
    Jumped,
    Halt(Status),
}

/// Mutable context of one execution.
#[derive(Debug, Clone)]
pub struct MachineState {
    pub pc: ProgramCounter,
    pub stack: Stack,
    pub memory: Memory,
    pub storage: Storage,
    pub bcm: BytecodeMemory,
    pub gas_remaining: u64,
    pub cycles_elapsed: u64,
    pub return_data: Vec<u8>,
    pub halted: bool,
    cfg: ExecutionConfig,
    pre_storage: Storage,
    steps: u64,
    nonce: u64,
    created: Vec<CreatedAccount>,
    trace: Vec<TraceStep>,
    status: Option<Status>,
}

fn to_offset(w: Word256, what: &str) -> Result<usize, VmError> {
    w.to_usize()
        .ok_or_else(|| VmError::new(ErrorKind::MemoryOutOfRange, format!("{what} {w} out of range")))
}

/// Converts an (offset, size) pair; a zero size never faults.
fn to_region(offset: Word256, size: Word256) -> Result<(usize, usize), VmError> {
    if size.is_zero() {
        return Ok((0, 0));
    }
    Ok((to_offset(offset, "offset")?, to_offset(size, "size")?))
}

fn padded(data: &[u8], offset: Word256, len: usize) -> Vec<u8> {
    let mut out = alloc::vec![0u8; len];
    if let Some(off) = offset.to_usize() {
        if off < data.len() {
            let n = (data.len() - off).min(len);
            out[..n].copy_from_slice(&data[off..off + n]);
        }
    }
    out
}

impl MachineState {
    /// Fresh state with the bytecode loaded and the gas counter set to the limit.
    pub fn load_program(code: &[u8], cfg: ExecutionConfig) -> Result<Self, VmError> {
        cfg.validate()?;
        let bcm = BytecodeMemory::load(code)?;
        let mut storage = Storage::new(cfg.storage_mode);
        for (k, v) in &cfg.initial_storage {
            storage.store(*k, *v)?;
        }
        Ok(Self {
            pc: ProgramCounter::default(),
            stack: Stack::new(),
            memory: Memory::with_capacity(cfg.memory_size),
            pre_storage: storage.clone(),
            storage,
            bcm,
            gas_remaining: cfg.gas_limit,
            cycles_elapsed: 0,
            return_data: Vec::new(),
            halted: false,
            nonce: cfg.sender_nonce,
            cfg,
            steps: 0,
            created: Vec::new(),
            trace: Vec::new(),
            status: None,
        })
    }

    pub fn config(&self) -> &ExecutionConfig {
        &self.cfg
    }

    pub fn gas_used(&self) -> u64 {
        self.cfg.gas_limit - self.gas_remaining
    }

    pub fn status(&self) -> Option<&Status> {
        self.status.as_ref()
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            pc: self.pc.value(),
            gas_remaining: self.gas_remaining,
            cycles_elapsed: self.cycles_elapsed,
            stack: self.stack.as_slice().to_vec(),
            memory: hexutil::encode(&self.memory.as_bytes()[..self.memory.active_len().min(self.memory.capacity())]),
            storage: self.storage.entries().into_iter().map(|(key, value)| StorageEntry { key, value }).collect(),
        }
    }

    fn halt(&mut self, status: Status) {
        if !status.is_success() {
            self.storage = self.pre_storage.clone();
            self.created.clear();
            if status != Status::Reverted {
                self.return_data.clear();
            }
        }
        self.halted = true;
        self.status = Some(status);
    }

    /// Receipt for the current state. Before halting this reflects progress so far.
    pub fn receipt(&self) -> Receipt {
        Receipt {
            status: self.status.clone().unwrap_or(Status::Success),
            gas_limit: self.cfg.gas_limit,
            gas_used: self.gas_used(),
            gas_remaining: self.gas_remaining,
            cycles: self.cycles_elapsed,
            clock_hz: self.cfg.clock.frequency_hz,
            simulated_time_ns: timing::simulated_time(self.cycles_elapsed, &self.cfg.clock),
            steps: self.steps,
            return_data: self.return_data.clone(),
            storage_out: self.storage.entries().into_iter().map(|(key, value)| StorageEntry { key, value }).collect(),
            created: self.created.clone(),
            storage_collisions: self.storage.collisions(),
            trace: self.cfg.record_trace.then(|| self.trace.clone()),
        }
    }

    /// Executes one opcode.
    pub fn step(&mut self) -> Step {
        if self.halted {
            return Step::Halted(self.receipt());
        }
        if let Some(limit) = self.cfg.step_limit {
            if self.steps >= limit {
                let e = VmError::new(ErrorKind::StepLimitExceeded, format!("stopped after {limit} steps"));
                self.halt(Status::Fault(e));
                return Step::Halted(self.receipt());
            }
        }

        let pc = self.pc.value();
        if pc >= self.bcm.len() {
            // Running past the last byte halts like STOP but is not an executed opcode.
            self.halt(Status::Success);
            return Step::Halted(self.receipt());
        }
        let code = self.bcm.fetch(pc);
        let spec = match opcode::lookup(code) {
            Some(s) => s,
            None => {
                let e = VmError::new(ErrorKind::InvalidOpcode, format!("byte {code:#04x} at pc {pc}"));
                self.halt(Status::Fault(e));
                return Step::Halted(self.receipt());
            }
        };
        if self.gas_remaining < spec.gas {
            self.halt(Status::OutOfGas);
            return Step::Halted(self.receipt());
        }

        let gas_before = self.gas_remaining;
        self.gas_remaining -= spec.gas;
        let mut cycles = spec.cycles as u64;
        let result = self.execute(spec, pc, &mut cycles);
        self.cycles_elapsed += cycles;
        self.steps += 1;

        let record = TraceStep {
            step: self.steps - 1,
            pc,
            opcode: code,
            mnemonic: spec.mnemonic.to_string(),
            gas_before,
            gas_after: self.gas_remaining,
            cycles,
            depth: self.stack.depth(),
            top: self.stack.top(),
        };
        if self.cfg.record_trace {
            self.trace.push(record.clone());
        }

        match result {
            Ok(Flow::Next) => {
                if !self.pc.advance(1 + spec.immediate_len as usize) {
                    self.halt(Status::Success);
                    return Step::Halted(self.receipt());
                }
                Step::Continue(record)
            }
            Ok(Flow::Jumped) => Step::Continue(record),
            Ok(Flow::Halt(status)) => {
                self.halt(status);
                Step::Halted(self.receipt())
            }
            Err(e) => {
                self.halt(Status::Fault(e));
                Step::Halted(self.receipt())
            }
        }
    }

    /// Steps until the machine halts.
    pub fn run_to_end(&mut self) -> Receipt {
        loop {
            if let Step::Halted(r) = self.step() {
                return r;
            }
        }
    }

    fn execute(&mut self, spec: &OpcodeSpec, pc: usize, cycles: &mut u64) -> Result<Flow, VmError> {
        let code = spec.code;
        self.stack.require(spec.min_depth as usize)?;
        if spec.pushes > spec.pops && self.stack.depth() - spec.pops as usize + spec.pushes as usize > crate::state::STACK_LIMIT {
            return Err(VmError::new(ErrorKind::StackOverflow, format!("{} at full stack", spec.mnemonic)));
        }

        match code {
            op::STOP => return Ok(Flow::Halt(Status::Success)),
            op::ADD | op::MUL | op::SUB | op::DIV | op::SDIV | op::MOD | op::SMOD | op::EXP | op::SIGNEXTEND => {
                let a = self.stack.pop()?;
                let b = self.stack.pop()?;
                let r = match code {
                    op::ADD => alu::add(a, b),
                    op::MUL => alu::mul_shift_add(a, b),
                    op::SUB => alu::sub(a, b),
                    op::DIV => alu::div(a, b),
                    op::SDIV => alu::signed_div(a, b),
                    op::MOD => alu::rem(a, b),
                    op::SMOD => alu::signed_mod(a, b),
                    op::EXP => alu::exp(a, b),
                    _ => alu::sign_extend(a, b),
                };
                self.stack.push(r)?;
            }
            op::ADDMOD | op::MULMOD => {
                let a = self.stack.pop()?;
                let b = self.stack.pop()?;
                let m = self.stack.pop()?;
                let r = if code == op::ADDMOD { alu::addmod(a, b, m) } else { alu::mulmod(a, b, m) };
                self.stack.push(r)?;
            }
            op::LT..=op::SAR => {
                let bit_op = match code {
                    op::LT => BitOp::Lt,
                    op::GT => BitOp::Gt,
                    op::SLT => BitOp::Slt,
                    op::SGT => BitOp::Sgt,
                    op::EQ => BitOp::Eq,
                    op::ISZERO => BitOp::IsZero,
                    op::AND => BitOp::And,
                    op::OR => BitOp::Or,
                    op::XOR => BitOp::Xor,
                    op::NOT => BitOp::Not,
                    op::BYTE => BitOp::Byte,
                    op::SHL => BitOp::Shl,
                    op::SHR => BitOp::Shr,
                    _ => BitOp::Sar,
                };
                let a = self.stack.pop()?;
                let b = if spec.pops == 2 { self.stack.pop()? } else { Word256::ZERO };
                self.stack.push(alu::compare_and_bitwise(bit_op, a, b))?;
            }
            op::KECCAK256 => {
                let (off, size) = to_region(self.stack.pop()?, self.stack.pop()?)?;
                let data = self.memory.read_region(off, size)?;
                *cycles += timing::region_cycles(code, size);
                self.stack.push(Digest256::of(&data).to_word())?;
            }
            op::ADDRESS..=op::EXTCODEHASH | op::BLOCKHASH..=op::BASEFEE => self.exec_environment(code, cycles)?,
            op::POP => {
                self.stack.pop()?;
            }
            op::MLOAD => {
                let off = to_offset(self.stack.pop()?, "offset")?;
                let w = self.memory.load32(off)?;
                self.stack.push(w)?;
            }
            op::MSTORE => {
                let off = to_offset(self.stack.pop()?, "offset")?;
                let w = self.stack.pop()?;
                self.memory.store32(off, w)?;
            }
            op::MSTORE8 => {
                let off = to_offset(self.stack.pop()?, "offset")?;
                let w = self.stack.pop()?;
                self.memory.store8(off, w.byte(31))?;
            }
            op::SLOAD => {
                let k = self.stack.pop()?;
                let v = self.storage.load(k);
                self.stack.push(v)?;
            }
            op::SSTORE => {
                let k = self.stack.pop()?;
                let v = self.stack.pop()?;
                self.storage.store(k, v)?;
            }
            op::JUMP => {
                let target = self.stack.pop()?;
                self.pc.set(target, &self.bcm)?;
                return Ok(Flow::Jumped);
            }
            op::JUMPI => {
                let target = self.stack.pop()?;
                let cond = self.stack.pop()?;
                if !cond.is_zero() {
                    self.pc.set(target, &self.bcm)?;
                    return Ok(Flow::Jumped);
                }
            }
            op::PC => self.stack.push(Word256::from_u64(pc as u64))?,
            op::MSIZE => self.stack.push(Word256::from_u64(self.memory.active_len() as u64))?,
            op::GAS => self.stack.push(Word256::from_u64(self.gas_remaining))?,
            op::JUMPDEST => {}
            op::PUSH0..=op::PUSH32 => {
                let n = spec.immediate_len as usize;
                let imm = self.bcm.slice_padded(pc + 1, n);
                self.stack.push(Word256::from_be_slice(&imm)?)?;
            }
            op::DUP1..=op::DUP16 => self.stack.dup((code - op::DUP1 + 1) as usize)?,
            op::SWAP1..=op::SWAP16 => self.stack.swap((code - op::SWAP1 + 1) as usize)?,
            op::LOG0..=op::LOG4 => {
                let (off, size) = to_region(self.stack.pop()?, self.stack.pop()?)?;
                for _ in 0..(code - op::LOG0) {
                    self.stack.pop()?;
                }
                self.memory.read_region(off, size)?;
                *cycles += timing::region_cycles(code, size);
            }
            op::CREATE => self.exec_create()?,
            op::CREATE2 => self.exec_create2(cycles)?,
            op::CALL | op::CALLCODE | op::DELEGATECALL | op::STATICCALL => {
                for _ in 0..spec.pops {
                    self.stack.pop()?;
                }
                self.stack.push(self.cfg.call_status)?;
            }
            op::RETURN | op::REVERT => {
                let (off, size) = to_region(self.stack.pop()?, self.stack.pop()?)?;
                self.return_data = self.memory.read_region(off, size)?;
                *cycles += timing::region_cycles(code, size);
                let status = if code == op::RETURN { Status::Success } else { Status::Reverted };
                return Ok(Flow::Halt(status));
            }
            op::INVALID => {
                return Err(VmError::new(ErrorKind::InvalidOpcode, format!("INVALID at pc {pc}")));
            }
            op::SELFDESTRUCT => {
                self.stack.pop()?;
                return Ok(Flow::Halt(Status::Success));
            }
            _ => {
                return Err(VmError::new(ErrorKind::InvalidOpcode, format!("{} not executable", spec.mnemonic)));
            }
        }
        Ok(Flow::Next)
    }

    /// Environment and block-context opcodes. There is no chain backend:
    /// balances, external code, block hashes and block fields read as zero.
    fn exec_environment(&mut self, code: u8, cycles: &mut u64) -> Result<(), VmError> {
        let value = match code {
            op::ADDRESS => self.cfg.contract_address.to_word(),
            op::ORIGIN | op::CALLER => self.cfg.sender_address.to_word(),
            op::CALLVALUE => self.cfg.call_value,
            op::CALLDATALOAD => {
                let off = self.stack.pop()?;
                Word256::from_be_slice(&padded(&self.cfg.init_data, off, 32))?
            }
            op::CALLDATASIZE => Word256::from_u64(self.cfg.init_data.len() as u64),
            op::CODESIZE => Word256::from_u64(self.bcm.len() as u64),
            op::CALLDATACOPY | op::CODECOPY | op::RETURNDATACOPY | op::EXTCODECOPY => {
                if code == op::EXTCODECOPY {
                    self.stack.pop()?;
                }
                let dest = self.stack.pop()?;
                let src = self.stack.pop()?;
                let size = self.stack.pop()?;
                let (dest, len) = to_region(dest, size)?;
                let data = match code {
                    op::CALLDATACOPY => padded(&self.cfg.init_data, src, len),
                    op::CODECOPY => padded(self.bcm.code(), src, len),
                    op::RETURNDATACOPY => {
                        // No nested frames, so the return-data buffer is always empty.
                        if len > 0 || !src.is_zero() {
                            return Err(VmError::new(
                                ErrorKind::MemoryOutOfRange,
                                "RETURNDATACOPY beyond empty return-data buffer",
                            ));
                        }
                        Vec::new()
                    }
                    _ => alloc::vec![0u8; len],
                };
                self.memory.write_region(dest, &data)?;
                *cycles += timing::region_cycles(code, len);
                return Ok(());
            }
            op::BALANCE | op::EXTCODESIZE | op::EXTCODEHASH | op::BLOCKHASH => {
                self.stack.pop()?;
                Word256::ZERO
            }
            op::GASLIMIT => Word256::from_u64(self.cfg.gas_limit),
            op::CHAINID => Word256::from_u64(CHAIN_ID),
            // GASPRICE, RETURNDATASIZE, COINBASE, TIMESTAMP, NUMBER, PREVRANDAO, SELFBALANCE, BASEFEE
            _ => Word256::ZERO,
        };
        self.stack.push(value)
    }

    /// CREATE: pops value, offset, size; pushes the address derived from
    /// `rlp([sender, nonce])`. Each CREATE consumes one sender nonce.
    fn exec_create(&mut self) -> Result<(), VmError> {
        let value = self.stack.pop()?;
        let (off, size) = to_region(self.stack.pop()?, self.stack.pop()?)?;
        let init_code = self.memory.read_region(off, size)?;
        let nonce = self.nonce;
        let address = crypto::create_address(&self.cfg.sender_address, nonce, self.cfg.address_mode);
        self.nonce = self.nonce.wrapping_add(1);
        self.created.push(CreatedAccount {
            kind: CreateKind::Create,
            address,
            value,
            init_code_hash: Digest256::of(&init_code).to_word(),
            salt: None,
            nonce: Some(nonce),
        });
        self.stack.push(address.to_word())
    }

    /// CREATE2: pops value, offset, size, salt; reads the init code from
    /// memory, hashes it, frames `0xff ‖ sender ‖ salt ‖ d`, hashes again and
    /// pushes the extracted address.
    fn exec_create2(&mut self, cycles: &mut u64) -> Result<(), VmError> {
        let value = self.stack.pop()?;
        let offset = self.stack.pop()?;
        let size = self.stack.pop()?;
        let salt = self.stack.pop()?;
        let (off, len) = to_region(offset, size)?;
        let init_code = self.memory.read_region(off, len)?;
        *cycles += timing::region_cycles(op::CREATE2, len);
        let address =
            crypto::create2_address(&self.cfg.sender_address, &salt.to_be_bytes(), &init_code, self.cfg.address_mode);
        self.created.push(CreatedAccount {
            kind: CreateKind::Create2,
            address,
            value,
            init_code_hash: Digest256::of(&init_code).to_word(),
            salt: Some(salt),
            nonce: None,
        });
        self.stack.push(address.to_word())
    }
}

/// Loads `code` and runs it to completion.
pub fn run(code: &[u8], cfg: ExecutionConfig) -> Result<Receipt, VmError> {
    let mut m = MachineState::load_program(code, cfg)?;
    Ok(m.run_to_end())
}
