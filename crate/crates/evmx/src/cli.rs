//! The `evmx` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 out of gas, 3 fault or
//! revert, 4 timing-gate mismatch in `bench-table3`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use evmx_core::census::aggregate;
use evmx_core::timing::latency_report;
use evmx_core::{AddressMode, ClockConfig, ExecutionConfig, MachineState, Status, StorageMode};

use crate::block::{run_block, BlockSpec};
use crate::error::CliError;
use crate::input::{load_bytecode, parse_address, parse_freq, parse_hex, parse_word};
use crate::{corpus, report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_OUT_OF_GAS: i32 = 2;
pub const EXIT_FAULT: i32 = 3;
pub const EXIT_GATE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "evmx", version, about = "Cycle-modeled EVM interpreter")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute bytecode and print the receipt as JSON.
    Run(RunArgs),
    /// Like `run`, always recording a per-step trace (JSON lines).
    Trace(RunArgs),
    /// Per-opcode latency report against the reference measurements.
    #[command(name = "bench-table3")]
    BenchTable3(BenchArgs),
    /// Opcode frequency histogram over a bytecode corpus.
    Histogram(HistogramArgs),
    /// Execute a block of transactions sequentially and report totals.
    Block(BlockArgs),
    /// Dump the opcode table (gas, cycles, estimated flag) as JSON.
    Opcodes(FreqArg),
}

#[derive(Debug, Clone, Args)]
pub struct FreqArg {
    /// Clock frequency in Hz, e.g. 100e6. Defaults to the 7 ns EVMx clock.
    #[arg(long, env = "EVMX_FREQ_HZ", value_parser = parse_freq)]
    pub freq: Option<f64>,
}

impl FreqArg {
    fn clock(&self) -> ClockConfig {
        match self.freq {
            // parse_freq already rejected non-positive values
            Some(hz) => ClockConfig::from_hz(hz).unwrap_or_default(),
            None => ClockConfig::EVMX,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Bytecode as hex, or a path to a file holding hex.
    #[arg(long)]
    pub bytecode: String,
    #[arg(long, default_value_t = 30_000_000)]
    pub gas: u64,
    /// Initialization data (hex), served to CALLDATA* opcodes.
    #[arg(long, default_value = "")]
    pub calldata: String,
    /// Call value as a hex quantity.
    #[arg(long)]
    pub value: Option<String>,
    #[arg(long)]
    pub sender: Option<String>,
    /// Sender nonce used by the first CREATE.
    #[arg(long, default_value_t = 0)]
    pub nonce: u64,
    #[command(flatten)]
    pub freq: FreqArg,
    /// Write the step trace to this file as JSON lines.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the final machine state as JSON to this file.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Direct-mapped 1024-entry storage instead of the associative store.
    #[arg(long)]
    pub hw_faithful_storage: bool,
    /// Take CREATE/CREATE2 addresses from the first 20 digest bytes.
    #[arg(long)]
    pub paper_faithful_create2: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub freq: FreqArg,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    pub format: TableFormat,
    /// Also write the CSV report to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HistogramArgs {
    /// Directory of .hex files, a single .hex file, or a JSON-lines file.
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 45, value_parser = clap::value_parser!(u64).range(1..))]
    pub top: u64,
    /// Write a vega-lite bar chart spec to this file.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BlockArgs {
    /// Block description (JSON).
    pub spec: PathBuf,
    #[command(flatten)]
    pub freq: FreqArg,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Run(a) => cmd_run(&a, false, out),
        Command::Trace(a) => cmd_run(&a, true, out),
        Command::BenchTable3(a) => cmd_bench_table3(&a, out, err),
        Command::Histogram(a) => cmd_histogram(&a, out, err),
        Command::Block(a) => cmd_block(&a, out, err),
        Command::Opcodes(f) => {
            write_json_line(out, &report::opcode_rows(&f.clock()), true)?;
            Ok(EXIT_OK)
        }
    }
}

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

fn write_json_line<T: serde::Serialize>(out: &mut dyn Write, value: &T, pretty: bool) -> Result<(), CliError> {
    let text = if pretty { serde_json::to_string_pretty(value) } else { serde_json::to_string(value) }
        .expect("report types serialize");
    writeln!(out, "{text}").map_err(write_err(Path::new("<stdout>")))
}

pub fn exit_code(status: &Status) -> i32 {
    match status {
        Status::Success => EXIT_OK,
        Status::OutOfGas => EXIT_OUT_OF_GAS,
        Status::Reverted | Status::Fault(_) => EXIT_FAULT,
    }
}

pub fn build_config(a: &RunArgs, record_trace: bool) -> Result<ExecutionConfig, CliError> {
    let mut cfg = ExecutionConfig {
        gas_limit: a.gas,
        init_data: parse_hex("calldata", &a.calldata)?,
        sender_nonce: a.nonce,
        clock: a.freq.clock(),
        record_trace,
        ..ExecutionConfig::default()
    };
    if let Some(v) = &a.value {
        cfg.call_value = parse_word("value", v)?;
    }
    if let Some(s) = &a.sender {
        cfg.sender_address = parse_address(s)?;
    }
    if a.hw_faithful_storage {
        cfg.storage_mode = StorageMode::HwFaithful;
    }
    if a.paper_faithful_create2 {
        cfg.address_mode = AddressMode::LeadingBytes;
    }
    Ok(cfg)
}

fn cmd_run(a: &RunArgs, force_trace: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let code = load_bytecode(&a.bytecode, None)?;
    let record = force_trace || a.trace.is_some();
    let cfg = build_config(a, record)?;
    let mut machine = MachineState::load_program(&code, cfg)?;
    let mut receipt = machine.run_to_end();

    if let Some(path) = &a.snapshot {
        let f = File::create(path).map_err(write_err(path))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &machine.snapshot())
            .map_err(|e| CliError::io(path, e.into()))?;
    }

    let steps = receipt.trace.take().unwrap_or_default();
    match &a.trace {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(write_err(path))?);
            for s in &steps {
                write_json_line(&mut w, s, false)?;
            }
            w.flush().map_err(write_err(path))?;
        }
        None if force_trace => {
            for s in &steps {
                write_json_line(out, s, false)?;
            }
        }
        None => {}
    }
    // In streamed trace mode every line, including the receipt, is one JSON document.
    write_json_line(out, &receipt, !(force_trace && a.trace.is_none()))?;
    Ok(exit_code(&receipt.status))
}

fn cmd_bench_table3(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let clock = a.freq.clock();
    let rows = latency_report(&clock);
    let stdout = Path::new("<stdout>");
    match a.format {
        TableFormat::Text => write!(out, "{}", report::latency_text(&rows, &clock)).map_err(write_err(stdout))?,
        TableFormat::Csv => write!(out, "{}", report::latency_csv(&rows)).map_err(write_err(stdout))?,
        TableFormat::Json => write_json_line(out, &rows, true)?,
    }
    if let Some(path) = &a.csv {
        std::fs::write(path, report::latency_csv(&rows)).map_err(write_err(path))?;
    }
    if !clock.is_reference() {
        let _ = writeln!(err, "note: non-default clock, reference comparison skipped");
        return Ok(EXIT_OK);
    }
    let bad = report::latency_mismatches(&rows);
    for r in &bad {
        let _ = writeln!(
            err,
            "mismatch: {} model {} ns vs {} ns, delta {:.2}% vs {}%",
            r.mnemonic, r.model_ns, r.reference_ns, r.delta_pct, r.reference_delta_pct
        );
    }
    Ok(if bad.is_empty() { EXIT_OK } else { EXIT_GATE })
}

fn cmd_histogram(a: &HistogramArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let loaded = corpus::load(&a.corpus)?;
    for w in &loaded.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    if loaded.entries.is_empty() {
        let _ = writeln!(err, "error: corpus {} has no readable contracts", a.corpus.display());
        return Ok(EXIT_USAGE);
    }
    let table = aggregate(&loaded.entries, a.top as usize);
    write!(out, "{}", report::histogram_csv(&table)).map_err(write_err(Path::new("<stdout>")))?;
    if let Some(path) = &a.plot {
        let text = serde_json::to_string_pretty(&report::histogram_vega(&table)).expect("json value");
        std::fs::write(path, text).map_err(write_err(path))?;
    }
    Ok(EXIT_OK)
}

fn cmd_block(a: &BlockArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let spec = BlockSpec::read(&a.spec)?;
    let base = a.spec.parent();
    let block = run_block(&spec, base, a.freq.clock());
    for t in block.transactions.iter().filter(|t| t.error.is_some()) {
        let _ = writeln!(err, "error: transaction {} ({}): {}", t.index, t.code_ref, t.error.as_deref().unwrap_or(""));
    }
    write_json_line(out, &block, true)?;
    Ok(if block.malformed == 0 { EXIT_OK } else { EXIT_USAGE })
}
