use alloc::string::String;
use core::fmt;

/// Failure categories raised by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ErrorKind {
    StackOverflow,
    StackUnderflow,
    OutOfGas,
    MemoryOutOfRange,
    StorageCapacityExceeded,
    InvalidJump,
    InvalidOpcode,
    BytecodeTooLarge,
    /// More than 32 bytes offered as a word, or a malformed hex word.
    WordTooLong,
    /// Rejected execution configuration (zero gas limit, zero clock).
    InvalidConfig,
    /// The optional step guard tripped.
    StepLimitExceeded,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::StackOverflow => "StackOverflow",
            ErrorKind::StackUnderflow => "StackUnderflow",
            ErrorKind::OutOfGas => "OutOfGas",
            ErrorKind::MemoryOutOfRange => "MemoryOutOfRange",
            ErrorKind::StorageCapacityExceeded => "StorageCapacityExceeded",
            ErrorKind::InvalidJump => "InvalidJump",
            ErrorKind::InvalidOpcode => "InvalidOpcode",
            ErrorKind::BytecodeTooLarge => "BytecodeTooLarge",
            ErrorKind::WordTooLong => "WordTooLong",
            ErrorKind::InvalidConfig => "InvalidConfig",
            ErrorKind::StepLimitExceeded => "StepLimitExceeded",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An engine error: a kind plus human-readable context.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VmError {
    pub kind: ErrorKind,
    pub context: String,
}

impl VmError {
    pub fn new(kind: ErrorKind, context: impl Into<String>) -> Self {
        Self { kind, context: context.into() }
    }
}

impl fmt::Display for VmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.context.is_empty() {
            write!(f, "{}", self.kind)
        } else {
            write!(f, "{}: {}", self.kind, self.context)
        }
    }
}

impl core::error::Error for VmError {}
