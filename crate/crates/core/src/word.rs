//! 256-bit machine words and 20-byte account addresses.

use core::cmp::Ordering;
use core::fmt;

use crate::error::{ErrorKind, VmError};

/// Unsigned 256-bit word, the unit of the stack, storage keys and storage values.
///
/// Limbs are little-endian (`limbs[0]` holds the least significant 64 bits).
/// Serialized form is always 32 big-endian bytes.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Word256([u64; 4]);

impl Word256 {
    pub const ZERO: Self = Self([0; 4]);
    pub const ONE: Self = Self([1, 0, 0, 0]);
    pub const MAX: Self = Self([u64::MAX; 4]);
    /// Two's-complement minimum, `2^255`.
    pub const SIGN_BIT: Self = Self([0, 0, 0, 1 << 63]);
    pub const BITS: u32 = 256;

    pub const fn from_limbs(limbs: [u64; 4]) -> Self {
        Self(limbs)
    }

    pub const fn limbs(&self) -> [u64; 4] {
        self.0
    }

    pub const fn from_u64(v: u64) -> Self {
        Self([v, 0, 0, 0])
    }

    pub const fn from_u128(v: u128) -> Self {
        Self([v as u64, (v >> 64) as u64, 0, 0])
    }

    pub fn from_be_bytes(bytes: [u8; 32]) -> Self {
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            let start = 32 - 8 * (i + 1);
            let mut chunk = [0u8; 8];
            chunk.copy_from_slice(&bytes[start..start + 8]);
            *limb = u64::from_be_bytes(chunk);
        }
        Self(limbs)
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, limb) in self.0.iter().enumerate() {
            let start = 32 - 8 * (i + 1);
            out[start..start + 8].copy_from_slice(&limb.to_be_bytes());
        }
        out
    }

    /// Big-endian interpretation of up to 32 bytes, left-padded with zeros.
    pub fn from_be_slice(bytes: &[u8]) -> Result<Self, VmError> {
        if bytes.len() > 32 {
            return Err(VmError::new(
                ErrorKind::WordTooLong,
                alloc::format!("{} bytes do not fit in a 256-bit word", bytes.len()),
            ));
        }
        let mut buf = [0u8; 32];
        buf[32 - bytes.len()..].copy_from_slice(bytes);
        Ok(Self::from_be_bytes(buf))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    /// Bit `i`, counted from the least significant bit. Out-of-range bits are zero.
    pub fn bit(&self, i: u32) -> bool {
        if i >= 256 {
            return false;
        }
        (self.0[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: u32) {
        debug_assert!(i < 256);
        self.0[(i / 64) as usize] |= 1 << (i % 64);
    }

    /// Byte `i` in big-endian order (0 is the most significant byte).
    pub fn byte(&self, i: usize) -> u8 {
        if i >= 32 {
            return 0;
        }
        self.to_be_bytes()[i]
    }

    pub fn leading_zeros(&self) -> u32 {
        let mut n = 0;
        for limb in self.0.iter().rev() {
            if *limb == 0 {
                n += 64;
            } else {
                return n + limb.leading_zeros();
            }
        }
        n
    }

    pub fn trailing_zeros(&self) -> u32 {
        let mut n = 0;
        for limb in self.0.iter() {
            if *limb == 0 {
                n += 64;
            } else {
                return n + limb.trailing_zeros();
            }
        }
        n
    }

    /// Number of significant bits (0 for zero).
    pub fn bit_len(&self) -> u32 {
        256 - self.leading_zeros()
    }

    pub fn is_power_of_two(&self) -> bool {
        self.0.iter().map(|l| l.count_ones()).sum::<u32>() == 1
    }

    pub fn is_negative(&self) -> bool {
        self.bit(255)
    }

    pub fn overflowing_add(self, rhs: Self) -> (Self, bool) {
        let mut out = [0u64; 4];
        let mut carry = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (s1, c1) = self.0[i].overflowing_add(rhs.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *slot = s2;
            carry = c1 || c2;
        }
        (Self(out), carry)
    }

    pub fn overflowing_sub(self, rhs: Self) -> (Self, bool) {
        let mut out = [0u64; 4];
        let mut borrow = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let (d1, b1) = self.0[i].overflowing_sub(rhs.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            *slot = d2;
            borrow = b1 || b2;
        }
        (Self(out), borrow)
    }

    pub fn wrapping_add(self, rhs: Self) -> Self {
        self.overflowing_add(rhs).0
    }

    pub fn wrapping_sub(self, rhs: Self) -> Self {
        self.overflowing_sub(rhs).0
    }

    /// Two's-complement negation.
    pub fn wrapping_neg(self) -> Self {
        Self::ZERO.wrapping_sub(self)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Self([!self.0[0], !self.0[1], !self.0[2], !self.0[3]])
    }

    pub fn and(self, rhs: Self) -> Self {
        Self(core::array::from_fn(|i| self.0[i] & rhs.0[i]))
    }

    pub fn or(self, rhs: Self) -> Self {
        Self(core::array::from_fn(|i| self.0[i] | rhs.0[i]))
    }

    pub fn xor(self, rhs: Self) -> Self {
        Self(core::array::from_fn(|i| self.0[i] ^ rhs.0[i]))
    }

    /// Logical left shift; shifts of 256 or more yield zero.
    #[allow(clippy::should_implement_trait)]
    pub fn shl(self, shift: u32) -> Self {
        if shift >= 256 {
            return Self::ZERO;
        }
        let limb_shift = (shift / 64) as usize;
        let bit_shift = shift % 64;
        let mut out = [0u64; 4];
        for i in (limb_shift..4).rev() {
            let src = i - limb_shift;
            out[i] = self.0[src] << bit_shift;
            if bit_shift > 0 && src > 0 {
                out[i] |= self.0[src - 1] >> (64 - bit_shift);
            }
        }
        Self(out)
    }

    /// Logical right shift; shifts of 256 or more yield zero.
    #[allow(clippy::should_implement_trait)]
    pub fn shr(self, shift: u32) -> Self {
        if shift >= 256 {
            return Self::ZERO;
        }
        let limb_shift = (shift / 64) as usize;
        let bit_shift = shift % 64;
        let mut out = [0u64; 4];
        for (i, slot) in out.iter_mut().enumerate().take(4 - limb_shift) {
            let src = i + limb_shift;
            *slot = self.0[src] >> bit_shift;
            if bit_shift > 0 && src + 1 < 4 {
                *slot |= self.0[src + 1] << (64 - bit_shift);
            }
        }
        Self(out)
    }

    /// Value as `u64` if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.0[1] == 0 && self.0[2] == 0 && self.0[3] == 0 {
            Some(self.0[0])
        } else {
            None
        }
    }

    /// Value as `usize` if it fits.
    pub fn to_usize(&self) -> Option<usize> {
        self.to_u64().and_then(|v| usize::try_from(v).ok())
    }

    /// Low 64 bits, discarding the rest.
    pub fn low_u64(&self) -> u64 {
        self.0[0]
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::ONE
        } else {
            Self::ZERO
        }
    }
}

impl Ord for Word256 {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..4).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Word256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Word256 {
    fn from(v: u64) -> Self {
        Self::from_u64(v)
    }
}

impl From<Address> for Word256 {
    fn from(a: Address) -> Self {
        let mut buf = [0u8; 32];
        buf[12..].copy_from_slice(&a.0);
        Self::from_be_bytes(buf)
    }
}

impl fmt::LowerHex for Word256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if f.alternate() {
            f.write_str("0x")?;
        }
        let mut started = false;
        for limb in self.0.iter().rev() {
            if started {
                write!(f, "{limb:016x}")?;
            } else if *limb != 0 {
                write!(f, "{limb:x}")?;
                started = true;
            }
        }
        if !started {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:#x}")
    }
}

impl fmt::Display for Word256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:#x}")
    }
}

impl core::str::FromStr for Word256 {
    type Err = VmError;

    /// Parses a hex quantity with optional `0x` prefix; odd digit counts are allowed.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
        let bad = || VmError::new(ErrorKind::WordTooLong, alloc::format!("invalid hex word {s:?}"));
        if digits.is_empty() || digits.len() > 64 {
            return Err(bad());
        }
        let mut w = Self::ZERO;
        for c in digits.chars() {
            let d = c.to_digit(16).ok_or_else(bad)?;
            w = w.shl(4).or(Self::from_u64(d as u64));
        }
        Ok(w)
    }
}

/// 20-byte account address.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub const ZERO: Self = Self([0; 20]);

    pub const fn new(bytes: [u8; 20]) -> Self {
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    /// Low 20 bytes of a word, as an address operand popped from the stack.
    pub fn from_word(w: Word256) -> Self {
        let bytes = w.to_be_bytes();
        let mut out = [0u8; 20];
        out.copy_from_slice(&bytes[12..]);
        Self(out)
    }

    pub fn to_word(self) -> Word256 {
        Word256::from(self)
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("0x")?;
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl core::str::FromStr for Address {
    type Err = VmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
        let bad = || VmError::new(ErrorKind::WordTooLong, alloc::format!("invalid address {s:?}"));
        if digits.len() != 40 {
            return Err(bad());
        }
        let mut out = [0u8; 20];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = u8::from_str_radix(&digits[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        Ok(Self(out))
    }
}

#[cfg(feature = "serde")]
mod serde_impls {
    use super::{Address, Word256};
    use alloc::string::String;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for Word256 {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.collect_str(&format_args!("{self:#x}"))
        }
    }

    impl<'de> Deserialize<'de> for Word256 {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let s = String::deserialize(d)?;
            s.parse().map_err(D::Error::custom)
        }
    }

    impl Serialize for Address {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            s.collect_str(self)
        }
    }

    impl<'de> Deserialize<'de> for Address {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            let s = String::deserialize(d)?;
            s.parse().map_err(D::Error::custom)
        }
    }
}
