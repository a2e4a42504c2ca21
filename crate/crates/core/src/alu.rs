//! 256-bit ALU built from shift, add and subtract only.
//!
//! Multiplication is bit-serial shift-and-add. Division and modulo use the
//! non-restoring algorithm with a final remainder correction, with a right
//! shift fast path for power-of-two divisors. Division by zero yields zero.

use crate::word::Word256;

/// Quotient and remainder of an unsigned division.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivModResult {
    pub quotient: Word256,
    pub remainder: Word256,
}

pub fn add(a: Word256, b: Word256) -> Word256 {
    a.wrapping_add(b)
}

pub fn sub(a: Word256, b: Word256) -> Word256 {
    a.wrapping_sub(b)
}

/// `(a * b) mod 2^256` by scanning multiplier bits and accumulating the
/// shifted multiplicand.
pub fn mul_shift_add(a: Word256, b: Word256) -> Word256 {
    let mut acc = Word256::ZERO;
    let mut multiplicand = a;
    let mut multiplier = b;
    while !multiplier.is_zero() && !multiplicand.is_zero() {
        if multiplier.bit(0) {
            acc = acc.wrapping_add(multiplicand);
        }
        multiplicand = multiplicand.shl(1);
        multiplier = multiplier.shr(1);
    }
    acc
}

/// Signed partial remainder for the non-restoring loop. 320-bit two's
/// complement, enough for `2 * r ± d` with `|r| < d < 2^256`.
#[derive(Clone, Copy)]
struct Partial([u64; 5]);

impl Partial {
    fn is_negative(&self) -> bool {
        self.0[4] >> 63 == 1
    }

    /// `2 * self + bit`.
    fn shift_in(self, bit: bool) -> Self {
        let mut out = [0u64; 5];
        let mut carry = bit as u64;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = (self.0[i] << 1) | carry;
            carry = self.0[i] >> 63;
        }
        Self(out)
    }

    fn add(self, d: Word256) -> Self {
        let dl = d.limbs();
        let mut out = [0u64; 5];
        let mut carry = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let rhs = if i < 4 { dl[i] } else { 0 };
            let (s1, c1) = self.0[i].overflowing_add(rhs);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *slot = s2;
            carry = c1 || c2;
        }
        Self(out)
    }

    fn sub(self, d: Word256) -> Self {
        let dl = d.limbs();
        let mut out = [0u64; 5];
        let mut borrow = false;
        for (i, slot) in out.iter_mut().enumerate() {
            let rhs = if i < 4 { dl[i] } else { 0 };
            let (d1, b1) = self.0[i].overflowing_sub(rhs);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            *slot = d2;
            borrow = b1 || b2;
        }
        Self(out)
    }

    fn low(self) -> Word256 {
        Word256::from_limbs([self.0[0], self.0[1], self.0[2], self.0[3]])
    }
}

/// Non-restoring division with no fast paths. Requires `divisor != 0`.
///
/// Each step shifts the next dividend bit into the partial remainder, then
/// subtracts the divisor when the remainder is non-negative or adds it when
/// negative. The quotient bit is 1 when the result is non-negative. A
/// negative final remainder is corrected by one addition.
pub fn divmod_general(dividend: Word256, divisor: Word256) -> DivModResult {
    debug_assert!(!divisor.is_zero());
    let mut rem = Partial([0; 5]);
    let mut quotient = Word256::ZERO;
    // Leading zero bits of the dividend cannot produce quotient bits.
    let start = dividend.bit_len();
    for i in (0..start).rev() {
        let shifted = rem.shift_in(dividend.bit(i));
        rem = if rem.is_negative() { shifted.add(divisor) } else { shifted.sub(divisor) };
        if !rem.is_negative() {
            quotient.set_bit(i);
        }
    }
    if rem.is_negative() {
        rem = rem.add(divisor);
    }
    DivModResult { quotient, remainder: rem.low() }
}

/// Unsigned division and modulo. `divisor == 0` gives `(0, 0)`.
pub fn divmod_nonrestoring(dividend: Word256, divisor: Word256) -> DivModResult {
    if divisor.is_zero() {
        return DivModResult { quotient: Word256::ZERO, remainder: Word256::ZERO };
    }
    if divisor.is_power_of_two() {
        return divmod_pow2(dividend, divisor);
    }
    divmod_general(dividend, divisor)
}

/// Power-of-two divisor: quotient is a right shift, remainder a mask.
pub fn divmod_pow2(dividend: Word256, divisor: Word256) -> DivModResult {
    debug_assert!(divisor.is_power_of_two());
    let k = divisor.trailing_zeros();
    DivModResult {
        quotient: dividend.shr(k),
        remainder: dividend.and(divisor.wrapping_sub(Word256::ONE)),
    }
}

pub fn div(a: Word256, b: Word256) -> Word256 {
    divmod_nonrestoring(a, b).quotient
}

pub fn rem(a: Word256, b: Word256) -> Word256 {
    divmod_nonrestoring(a, b).remainder
}

fn abs(w: Word256) -> Word256 {
    if w.is_negative() {
        w.wrapping_neg()
    } else {
        w
    }
}

/// Two's-complement division truncating toward zero. `b == 0` gives 0.
pub fn signed_div(a: Word256, b: Word256) -> Word256 {
    if b.is_zero() {
        return Word256::ZERO;
    }
    let q = divmod_nonrestoring(abs(a), abs(b)).quotient;
    if a.is_negative() != b.is_negative() {
        q.wrapping_neg()
    } else {
        q
    }
}

/// Two's-complement remainder taking the sign of the dividend. `b == 0` gives 0.
pub fn signed_mod(a: Word256, b: Word256) -> Word256 {
    if b.is_zero() {
        return Word256::ZERO;
    }
    let r = divmod_nonrestoring(abs(a), abs(b)).remainder;
    if a.is_negative() {
        r.wrapping_neg()
    } else {
        r
    }
}

/// Square-and-multiply over [`mul_shift_add`].
pub fn exp(base: Word256, exponent: Word256) -> Word256 {
    let mut result = Word256::ONE;
    let mut b = base;
    let bits = exponent.bit_len();
    for i in 0..bits {
        if exponent.bit(i) {
            result = mul_shift_add(result, b);
        }
        if i + 1 < bits {
            b = mul_shift_add(b, b);
        }
    }
    result
}

/// 512-bit intermediate for ADDMOD/MULMOD, little-endian limbs.
#[derive(Clone, Copy)]
struct Wide([u64; 8]);

impl Wide {
    fn from_word(w: Word256) -> Self {
        let l = w.limbs();
        Self([l[0], l[1], l[2], l[3], 0, 0, 0, 0])
    }

    fn bit(&self, i: u32) -> bool {
        (self.0[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    fn bit_len(&self) -> u32 {
        for i in (0..8).rev() {
            if self.0[i] != 0 {
                return i as u32 * 64 + 64 - self.0[i].leading_zeros();
            }
        }
        0
    }

    fn mul(a: Word256, b: Word256) -> Self {
        let (al, bl) = (a.limbs(), b.limbs());
        let mut out = [0u64; 8];
        for i in 0..4 {
            let mut carry = 0u128;
            for j in 0..4 {
                let t = al[i] as u128 * bl[j] as u128 + out[i + j] as u128 + carry;
                out[i + j] = t as u64;
                carry = t >> 64;
            }
            out[i + 4] = carry as u64;
        }
        Self(out)
    }

    /// Binary long division remainder; `m != 0`.
    fn rem(&self, m: Word256) -> Word256 {
        // r < m < 2^256 throughout, so 2r + 1 fits in 257 bits.
        let mut r = Word256::ZERO;
        for i in (0..self.bit_len()).rev() {
            let overflow = r.is_negative();
            r = r.shl(1).or(Word256::from_bool(self.bit(i)));
            if overflow || r >= m {
                r = r.wrapping_sub(m);
            }
        }
        r
    }
}

/// `(a + b) mod m` without 256-bit wraparound. `m == 0` gives 0.
pub fn addmod(a: Word256, b: Word256, m: Word256) -> Word256 {
    if m.is_zero() {
        return Word256::ZERO;
    }
    let (sum, carry) = a.overflowing_add(b);
    let mut wide = Wide::from_word(sum);
    wide.0[4] = carry as u64;
    wide.rem(m)
}

/// `(a * b) mod m` over the full 512-bit product. `m == 0` gives 0.
pub fn mulmod(a: Word256, b: Word256, m: Word256) -> Word256 {
    if m.is_zero() {
        return Word256::ZERO;
    }
    Wide::mul(a, b).rem(m)
}

/// Comparison and bitwise operations sharing the two-operand ALU port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitOp {
    Lt,
    Gt,
    Slt,
    Sgt,
    Eq,
    IsZero,
    And,
    Or,
    Xor,
    Not,
    /// `a` is the byte index, `b` the word.
    Byte,
    /// `a` is the shift amount, `b` the value.
    Shl,
    Shr,
    Sar,
}

fn signed_lt(a: Word256, b: Word256) -> bool {
    match (a.is_negative(), b.is_negative()) {
        (true, false) => true,
        (false, true) => false,
        _ => a < b,
    }
}

fn shift_amount(a: Word256) -> u32 {
    a.to_u64().map_or(256, |v| v.min(256) as u32)
}

/// Operand order follows stack order: `a` is the top item. Unary operations ignore `b`.
pub fn compare_and_bitwise(op: BitOp, a: Word256, b: Word256) -> Word256 {
    match op {
        BitOp::Lt => Word256::from_bool(a < b),
        BitOp::Gt => Word256::from_bool(a > b),
        BitOp::Slt => Word256::from_bool(signed_lt(a, b)),
        BitOp::Sgt => Word256::from_bool(signed_lt(b, a)),
        BitOp::Eq => Word256::from_bool(a == b),
        BitOp::IsZero => Word256::from_bool(a.is_zero()),
        BitOp::And => a.and(b),
        BitOp::Or => a.or(b),
        BitOp::Xor => a.xor(b),
        BitOp::Not => a.not(),
        BitOp::Byte => match a.to_usize() {
            Some(i) if i < 32 => Word256::from_u64(b.byte(i) as u64),
            _ => Word256::ZERO,
        },
        BitOp::Shl => b.shl(shift_amount(a)),
        BitOp::Shr => b.shr(shift_amount(a)),
        BitOp::Sar => {
            let n = shift_amount(a);
            if !b.is_negative() {
                b.shr(n)
            } else if n >= 256 {
                Word256::MAX
            } else {
                b.shr(n).or(Word256::MAX.shl(256 - n))
            }
        }
    }
}

/// SIGNEXTEND: extend the sign of byte `k` (0 = least significant) of `x`.
pub fn sign_extend(k: Word256, x: Word256) -> Word256 {
    match k.to_u64() {
        Some(k) if k < 31 => {
            let bit = (k as u32) * 8 + 7;
            let mask = Word256::ONE.shl(bit + 1).wrapping_sub(Word256::ONE);
            if x.bit(bit) {
                x.or(mask.not())
            } else {
                x.and(mask)
            }
        }
        _ => x,
    }
}
