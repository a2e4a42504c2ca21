//! Properties of the executor over arbitrary byte strings.

use evmx_core::census::{aggregate, disassemble_count, CorpusEntry};
use evmx_core::executor::StorageEntry;
use evmx_core::{opcode_table, run, ExecutionConfig, MachineState, Status, Step, StorageMode, Word256};
use proptest::prelude::*;

fn code_strategy() -> impl Strategy<Value = Vec<u8>> {
    // Mostly valid opcodes with small PUSH immediates, plus raw bytes.
    let common = prop::sample::select(vec![
        0x01u8, 0x02, 0x03, 0x04, 0x10, 0x14, 0x15, 0x16, 0x19, 0x20, 0x30, 0x33, 0x34, 0x35, 0x36, 0x50, 0x51, 0x52,
        0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x5b, 0x5f, 0x60, 0x60, 0x60, 0x61, 0x80, 0x81, 0x90, 0x91,
        0xf3, 0xfd, 0x00,
    ]);
    prop::collection::vec(prop_oneof![4 => common, 1 => any::<u8>()], 0..120)
}

fn initial_storage() -> impl Strategy<Value = Vec<(Word256, Word256)>> {
    prop::collection::vec((0u64..16, 1u64..1000), 0..6)
        .prop_map(|v| v.into_iter().map(|(k, x)| (Word256::from_u64(k), Word256::from_u64(x))).collect())
}

fn sorted_nonzero(pairs: &[(Word256, Word256)]) -> Vec<StorageEntry> {
    let mut m = std::collections::BTreeMap::new();
    for (k, v) in pairs {
        m.insert(*k, *v);
    }
    m.into_iter().filter(|(_, v)| !v.is_zero()).map(|(key, value)| StorageEntry { key, value }).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn gas_is_conserved_at_every_step(code in code_strategy(), gas in 1u64..2000, init in initial_storage()) {
        let cfg = ExecutionConfig { initial_storage: init.clone(), record_trace: true, ..ExecutionConfig::with_gas(gas) };
        let mut m = MachineState::load_program(&code, cfg).unwrap();
        let receipt = loop {
            let step = m.step();
            prop_assert_eq!(m.gas_used() + m.gas_remaining, gas);
            if let Step::Halted(r) = step {
                break r;
            }
        };
        prop_assert_eq!(receipt.gas_used + receipt.gas_remaining, receipt.gas_limit);
        let trace = receipt.trace.clone().unwrap();
        let mut cycles = 0;
        for (i, t) in trace.iter().enumerate() {
            prop_assert_eq!(t.step, i as u64);
            prop_assert_eq!(t.gas_before - t.gas_after, opcode_table().get(t.opcode).unwrap().gas);
            if i > 0 {
                prop_assert_eq!(t.gas_before, trace[i - 1].gas_after);
            }
            cycles += t.cycles;
        }
        prop_assert_eq!(cycles, receipt.cycles);
        prop_assert_eq!(receipt.steps as usize, trace.len());
        prop_assert_eq!(receipt.simulated_time_ns, receipt.cycles as f64 * 7.0);

        if !receipt.status.is_success() {
            prop_assert_eq!(&receipt.storage_out, &sorted_nonzero(&init));
            prop_assert!(receipt.created.is_empty());
        }
        if matches!(receipt.status, Status::OutOfGas | Status::Fault(_)) {
            prop_assert!(receipt.return_data.is_empty());
        }
    }

    #[test]
    fn execution_is_deterministic(code in code_strategy(), gas in 1u64..5000) {
        let cfg = ExecutionConfig { record_trace: true, ..ExecutionConfig::with_gas(gas) };
        prop_assert_eq!(run(&code, cfg.clone()).unwrap(), run(&code, cfg).unwrap());
    }

    #[test]
    fn out_of_gas_charges_nothing_for_the_failing_opcode(code in code_strategy(), gas in 1u64..300) {
        let r = run(&code, ExecutionConfig { record_trace: true, ..ExecutionConfig::with_gas(gas) }).unwrap();
        if r.status == Status::OutOfGas {
            let charged: u64 = r.trace.unwrap().iter().map(|t| t.gas_before - t.gas_after).sum();
            prop_assert_eq!(charged, r.gas_used);
        }
    }

    #[test]
    fn census_counts_every_consumed_opcode(code in prop::collection::vec(any::<u8>(), 0..300)) {
        let counts = disassemble_count(&code);
        let mut pc = 0;
        let mut n = 0;
        while pc < code.len() {
            n += 1;
            pc += 1 + evmx_core::opcode::immediate_len(code[pc]) as usize;
        }
        prop_assert_eq!(counts.iter().sum::<u64>(), n);
        prop_assert_eq!(disassemble_count(&code), counts);
    }

    #[test]
    fn census_is_monotone_under_concatenation(a in prop::collection::vec(any::<u8>(), 0..100),
                                              b in prop::collection::vec(any::<u8>(), 0..100)) {
        // Pad `a` so a trailing PUSH cannot swallow the separator.
        let mut joined = a.clone();
        joined.extend([0u8; 32]);
        joined.push(0x00);
        joined.extend(&b);
        let (ca, cb, cj) = (disassemble_count(&a), disassemble_count(&b), disassemble_count(&joined));
        for i in 0..256 {
            prop_assert!(cj[i] >= ca[i].max(cb[i]), "opcode {i:#04x}");
        }
        let e = |c: &Vec<u8>| CorpusEntry { id: String::new(), code: c.clone() };
        let t = aggregate(&[e(&a), e(&b)], 256);
        prop_assert_eq!(t.total, ca.iter().sum::<u64>() + cb.iter().sum::<u64>());
        prop_assert!(t.rows.windows(2).all(|w| w[0].count > w[1].count
            || (w[0].count == w[1].count && w[0].opcode < w[1].opcode)));
    }
}

#[test]
fn hw_faithful_storage_aliases_keys() {
    // SSTORE(1, 0x11); SSTORE(1025, 0x22); SLOAD(1)
    let code = [0x60, 0x11, 0x60, 0x01, 0x55, 0x60, 0x22, 0x61, 0x04, 0x01, 0x55, 0x60, 0x01, 0x54, 0x00];
    let mut cfg = ExecutionConfig { record_trace: true, ..ExecutionConfig::with_gas(10_000) };
    let assoc = run(&code, cfg.clone()).unwrap();
    assert_eq!(assoc.trace.unwrap().last().unwrap().top, Some(Word256::from_u64(0x11)));
    assert_eq!(assoc.storage_out.len(), 2);
    cfg.storage_mode = StorageMode::HwFaithful;
    let hw = run(&code, cfg).unwrap();
    // The write of key 1025 evicts key 1; the later read of key 1 aliases onto it.
    assert_eq!(hw.trace.unwrap().last().unwrap().top, Some(Word256::from_u64(0x22)));
    assert_eq!(hw.storage_collisions, 2);
    assert_eq!(hw.storage_out.len(), 1);
}

#[test]
fn receipt_fields_for_a_small_program() {
    let r = run(&[0x60, 0x02, 0x60, 0x03, 0x01], ExecutionConfig::with_gas(100)).unwrap();
    assert_eq!((r.gas_used, r.gas_remaining, r.cycles, r.steps), (9, 91, 8, 3));
    assert_eq!(r.simulated_time_ns, 56.0);
    let r = run(&[0x60, 0x02, 0x60, 0x03, 0x01], ExecutionConfig::with_gas(5)).unwrap();
    assert_eq!(r.status, Status::OutOfGas);
    assert_eq!((r.gas_used, r.gas_remaining), (3, 2));
}
