//! Runs bytecode on revm (the reference) and on evmx-core, and compares outcomes.

use evmx_core::{Address, ExecutionConfig, MachineState, Status, Word256};
use revm::context::{Context, TxEnv};
use revm::context_interface::result::ExecutionResult;
use revm::database::{BenchmarkDB, BENCH_CALLER, BENCH_TARGET};
use revm::handler::{MainBuilder, MainContext};
use revm::inspector::{InspectEvm, Inspector};
use revm::interpreter::interpreter::EthInterpreter;
use revm::interpreter::Interpreter;
use revm::primitives::{Bytes, TxKind, U256};
use revm::state::Bytecode;

const REFERENCE_GAS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Revert,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observed {
    pub outcome: Outcome,
    /// Bottom first, as big-endian bytes.
    pub stack: Vec<[u8; 32]>,
    /// Non-zero slots, sorted by key.
    pub storage: Vec<([u8; 32], [u8; 32])>,
    pub return_data: Vec<u8>,
}

#[derive(Default)]
struct LastStack(Vec<U256>);

impl<CTX> Inspector<CTX, EthInterpreter> for LastStack {
    fn step_end(&mut self, interp: &mut Interpreter<EthInterpreter>, _ctx: &mut CTX) {
        self.0.clone_from(interp.stack.data());
    }
}

pub fn caller() -> Address {
    Address(BENCH_CALLER.into_array())
}

pub fn target() -> Address {
    Address(BENCH_TARGET.into_array())
}

pub fn run_reference(code: &[u8], calldata: &[u8]) -> Observed {
    let mut inspector = LastStack::default();
    let ctx = Context::mainnet().with_db(BenchmarkDB::new_bytecode(Bytecode::new_raw(Bytes::copy_from_slice(code))));
    let mut evm = ctx.build_mainnet_with_inspector(&mut inspector);
    let tx = TxEnv::builder()
        .caller(BENCH_CALLER)
        .kind(TxKind::Call(BENCH_TARGET))
        .data(Bytes::copy_from_slice(calldata))
        .gas_limit(REFERENCE_GAS)
        .build()
        .expect("valid tx");
    let out = evm.inspect_tx(tx).expect("reference run");
    let (outcome, return_data) = match &out.result {
        ExecutionResult::Success { output, .. } => (Outcome::Success, output.data().to_vec()),
        ExecutionResult::Revert { output, .. } => (Outcome::Revert, output.to_vec()),
        ExecutionResult::Halt { .. } => (Outcome::Failure, Vec::new()),
    };
    let mut storage: Vec<_> = out
        .state
        .get(&BENCH_TARGET)
        .map(|acc| {
            acc.storage
                .iter()
                .filter(|(_, slot)| !slot.present_value.is_zero())
                .map(|(k, slot)| (k.to_be_bytes::<32>(), slot.present_value.to_be_bytes::<32>()))
                .collect()
        })
        .unwrap_or_default();
    if outcome != Outcome::Success {
        storage.clear();
    }
    storage.sort();
    drop(evm);
    let stack = inspector.0.iter().map(|w| w.to_be_bytes::<32>()).collect();
    Observed { outcome, stack, storage, return_data }
}

pub fn model_config(calldata: &[u8]) -> ExecutionConfig {
    ExecutionConfig {
        gas_limit: REFERENCE_GAS,
        init_data: calldata.to_vec(),
        sender_address: caller(),
        contract_address: target(),
        ..ExecutionConfig::default()
    }
}

pub fn run_model(code: &[u8], calldata: &[u8]) -> Observed {
    let mut m = MachineState::load_program(code, model_config(calldata)).expect("program loads");
    let receipt = m.run_to_end();
    let outcome = match receipt.status {
        Status::Success => Outcome::Success,
        Status::Reverted => Outcome::Revert,
        Status::OutOfGas | Status::Fault(_) => Outcome::Failure,
    };
    let stack = m.stack.as_slice().iter().map(Word256::to_be_bytes).collect();
    let storage = receipt.storage_out.iter().map(|e| (e.key.to_be_bytes(), e.value.to_be_bytes())).collect();
    let return_data = if outcome == Outcome::Failure { Vec::new() } else { receipt.return_data };
    Observed { outcome, stack, storage, return_data }
}

/// Compares the two runs. On failure only the outcome class is compared,
/// since neither side exposes meaningful state after an exceptional halt.
pub fn compare(code: &[u8], calldata: &[u8]) -> Result<Outcome, String> {
    let reference = run_reference(code, calldata);
    let model = run_model(code, calldata);
    let same = if reference.outcome == Outcome::Failure {
        model.outcome == Outcome::Failure
    } else {
        reference == model
    };
    if same {
        Ok(reference.outcome)
    } else {
        Err(format!(
            "code 0x{}\ncalldata 0x{}\nreference {reference:?}\nmodel {model:?}",
            hex(code),
            hex(calldata)
        ))
    }
}

fn hex(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect()
}
