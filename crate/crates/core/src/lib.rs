//! Cycle-modeled EVM interpreter core.
//!
//! The crate is `no_std` with `alloc`. It holds the 256-bit word type, the
//! opcode table with per-opcode gas and cycle figures, the bounded machine
//! state, the ALU, Keccak-256 and contract address derivation, the
//! fetch-decode-execute loop, and static opcode census.
//!
//! ```
//! use evmx_core::{run, ExecutionConfig, Status};
//!
//! // PUSH1 2 PUSH1 3 ADD STOP
//! let receipt = run(&[0x60, 0x02, 0x60, 0x03, 0x01, 0x00], ExecutionConfig::with_gas(100)).unwrap();
//! assert_eq!(receipt.status, Status::Success);
//! assert_eq!(receipt.gas_used, 9);
//! assert_eq!(receipt.simulated_time_ns, 63.0);
//! ```
#![no_std]

extern crate alloc;

pub mod alu;
pub mod census;
pub mod config;
pub mod crypto;
pub mod error;
pub mod executor;
pub mod hexutil;
pub mod keccak;
pub mod opcode;
pub mod state;
pub mod timing;
pub mod word;

pub use config::ExecutionConfig;
pub use crypto::{AddressMode, Digest256};
pub use error::{ErrorKind, VmError};
pub use executor::{run, MachineState, Receipt, StateSnapshot, Status, Step, TraceStep};
pub use opcode::{lookup, opcode_table, OpcodeSpec};
pub use state::StorageMode;
pub use timing::ClockConfig;
pub use word::{Address, Word256};
