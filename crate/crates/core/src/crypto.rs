//! Contract address derivation for CREATE and CREATE2.
//!
//! CREATE hashes the RLP list `[sender, nonce]`. CREATE2 hashes the 85-byte
//! preimage `0xff ‖ sender ‖ salt ‖ keccak256(init_code)`. In both cases an
//! address window of 20 bytes is cut from the 32-byte digest.

use alloc::vec::Vec;

use crate::keccak::keccak256;
use crate::word::{Address, Word256};

/// 32-byte Keccak-256 output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Digest256(pub [u8; 32]);

impl Digest256 {
    pub fn of(data: &[u8]) -> Self {
        Self(keccak256(data))
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_word(self) -> Word256 {
        Word256::from_be_bytes(self.0)
    }
}

/// Which 20 bytes of a digest become the address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AddressMode {
    /// Bytes 12..32, as every Ethereum client derives addresses.
    #[default]
    Compat,
    /// Bytes 0..20, the leading window of the digest.
    LeadingBytes,
}

pub const CREATE2_PREFIX: u8 = 0xff;
pub const CREATE2_PREIMAGE_LEN: usize = 1 + 20 + 32 + 32;

/// The CREATE2 hash preimage, kept as its four fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Create2Preimage {
    pub sender: Address,
    pub salt: [u8; 32],
    pub code_hash: Digest256,
}

impl Create2Preimage {
    pub fn to_bytes(&self) -> [u8; CREATE2_PREIMAGE_LEN] {
        delta_concat(&self.sender, &self.salt, &self.code_hash)
    }

    /// Splits an 85-byte preimage back into its fields.
    pub fn parse(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != CREATE2_PREIMAGE_LEN || bytes[0] != CREATE2_PREFIX {
            return None;
        }
        let mut sender = [0u8; 20];
        sender.copy_from_slice(&bytes[1..21]);
        let mut salt = [0u8; 32];
        salt.copy_from_slice(&bytes[21..53]);
        let mut d = [0u8; 32];
        d.copy_from_slice(&bytes[53..85]);
        Some(Self { sender: Address(sender), salt, code_hash: Digest256(d) })
    }
}

/// `0xff ‖ sender ‖ salt ‖ d`.
pub fn delta_concat(sender: &Address, salt: &[u8; 32], d: &Digest256) -> [u8; CREATE2_PREIMAGE_LEN] {
    let mut k = [0u8; CREATE2_PREIMAGE_LEN];
    k[0] = CREATE2_PREFIX;
    k[1..21].copy_from_slice(&sender.0);
    k[21..53].copy_from_slice(salt);
    k[53..85].copy_from_slice(&d.0);
    k
}

pub fn extract_address(d: &Digest256, mode: AddressMode) -> Address {
    let mut out = [0u8; 20];
    match mode {
        AddressMode::Compat => out.copy_from_slice(&d.0[12..32]),
        AddressMode::LeadingBytes => out.copy_from_slice(&d.0[0..20]),
    }
    Address(out)
}

/// Minimal big-endian bytes of `v` (empty for zero).
fn minimal_be(v: u64) -> Vec<u8> {
    let bytes = v.to_be_bytes();
    let skip = bytes.iter().take_while(|b| **b == 0).count();
    bytes[skip..].to_vec()
}

/// RLP encoding of the list `[sender, nonce]`.
///
/// The payload is always short (21 bytes of address string plus at most
/// 9 bytes of nonce), so the list header is the single byte `0xc0 + len`.
pub fn rlp_encode_address_nonce(sender: &Address, nonce: u64) -> Vec<u8> {
    let mut payload = Vec::with_capacity(30);
    payload.push(0x80 + 20);
    payload.extend_from_slice(&sender.0);
    let n = minimal_be(nonce);
    match n.as_slice() {
        [] => payload.push(0x80),
        [b] if *b < 0x80 => payload.push(*b),
        bytes => {
            payload.push(0x80 + bytes.len() as u8);
            payload.extend_from_slice(bytes);
        }
    }
    let mut out = Vec::with_capacity(payload.len() + 1);
    out.push(0xc0 + payload.len() as u8);
    out.extend_from_slice(&payload);
    out
}

pub fn create_address(sender: &Address, nonce: u64, mode: AddressMode) -> Address {
    extract_address(&Digest256::of(&rlp_encode_address_nonce(sender, nonce)), mode)
}

/// Two-hash pipeline: hash the init code, frame it with `delta_concat`, hash again.
pub fn create2_address(sender: &Address, salt: &[u8; 32], init_code: &[u8], mode: AddressMode) -> Address {
    let d = Digest256::of(init_code);
    let k = delta_concat(sender, salt, &d);
    extract_address(&Digest256::of(&k), mode)
}
