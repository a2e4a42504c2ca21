use alloc::vec::Vec;

use crate::crypto::AddressMode;
use crate::error::{ErrorKind, VmError};
use crate::state::{StorageMode, MEMORY_SIZE};
use crate::timing::ClockConfig;
use crate::word::{Address, Word256};

/// Inputs for one execution: gas, initialization data, call value, sender
/// identity, clock, and the architecture-exploration switches.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionConfig {
    pub gas_limit: u64,
    /// Initialization data, also served as calldata.
    pub init_data: Vec<u8>,
    pub call_value: Word256,
    pub sender_address: Address,
    pub sender_nonce: u64,
    /// Address reported by ADDRESS.
    pub contract_address: Address,
    pub clock: ClockConfig,
    pub storage_mode: StorageMode,
    pub address_mode: AddressMode,
    /// Status word pushed by the stubbed CALL family.
    pub call_status: Word256,
    /// Storage contents before execution.
    pub initial_storage: Vec<(Word256, Word256)>,
    pub memory_size: usize,
    /// Abort with `StepLimitExceeded` after this many steps.
    pub step_limit: Option<u64>,
    /// Keep every step in the receipt.
    pub record_trace: bool,
}

impl Default for ExecutionConfig {
    fn default() -> Self {
        Self {
            gas_limit: 30_000_000,
            init_data: Vec::new(),
            call_value: Word256::ZERO,
            sender_address: Address::ZERO,
            sender_nonce: 0,
            contract_address: Address::ZERO,
            clock: ClockConfig::EVMX,
            storage_mode: StorageMode::Associative,
            address_mode: AddressMode::Compat,
            call_status: Word256::ONE,
            initial_storage: Vec::new(),
            memory_size: MEMORY_SIZE,
            step_limit: None,
            record_trace: false,
        }
    }
}

impl ExecutionConfig {
    pub fn with_gas(gas_limit: u64) -> Self {
        Self { gas_limit, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), VmError> {
        if self.gas_limit == 0 {
            return Err(VmError::new(ErrorKind::InvalidConfig, "gas limit must be positive"));
        }
        let f = self.clock.frequency_hz;
        if !(f.is_finite() && f > 0.0 && self.clock.period_ns > 0.0) {
            return Err(VmError::new(ErrorKind::InvalidConfig, "clock frequency must be positive"));
        }
        Ok(())
    }
}
