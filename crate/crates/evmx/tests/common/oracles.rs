//! Independent reference implementations used by the acceptance checks.

use evmx_core::alu;
use evmx_core::Word256;
use num_bigint::BigUint;
use rand::Rng;

pub fn to_big(w: Word256) -> BigUint {
    BigUint::from_bytes_be(&w.to_be_bytes())
}

pub fn from_big(b: &BigUint) -> Word256 {
    let bytes = b.to_bytes_be();
    assert!(bytes.len() <= 32, "oracle value exceeds 256 bits");
    Word256::from_be_slice(&bytes).unwrap()
}

pub fn modulus() -> BigUint {
    BigUint::from(1u8) << 256
}

/// Operands spread over bit lengths, with edge values mixed in.
pub fn random_word<R: Rng>(rng: &mut R) -> Word256 {
    match rng.gen_range(0..8) {
        0 => Word256::MAX,
        1 => Word256::ONE.shl(rng.gen_range(0..256)),
        2 => Word256::from_u64(rng.gen_range(0..4)),
        _ => {
            let bits = rng.gen_range(1..=256);
            let mut bytes = [0u8; 32];
            rng.fill(&mut bytes[..]);
            Word256::from_be_bytes(bytes).shr(256 - bits)
        }
    }
}

/// Checks multiplication and division of one operand pair against the oracle.
pub fn check_mul_divmod(a: Word256, b: Word256) -> Result<(), String> {
    let (ba, bb) = (to_big(a), to_big(b));
    let product = alu::mul_shift_add(a, b);
    let expect = (&ba * &bb) % modulus();
    if to_big(product) != expect {
        return Err(format!("mul {a} * {b}: got {product}, oracle {expect:x}"));
    }
    let r = alu::divmod_nonrestoring(a, b);
    if b.is_zero() {
        if !(r.quotient.is_zero() && r.remainder.is_zero()) {
            return Err(format!("divmod {a} / 0 must give (0, 0)"));
        }
        return Ok(());
    }
    let (q, m) = (to_big(r.quotient), to_big(r.remainder));
    if q != &ba / &bb || m != &ba % &bb {
        return Err(format!("divmod {a} / {b}: got ({}, {})", r.quotient, r.remainder));
    }
    if &q * &bb + &m != ba || m >= bb {
        return Err(format!("divmod {a} / {b}: reconstruction identity fails"));
    }
    Ok(())
}

pub fn tiny_keccak256(data: &[u8]) -> [u8; 32] {
    use tiny_keccak::{Hasher, Keccak};
    let mut k = Keccak::v256();
    k.update(data);
    let mut out = [0u8; 32];
    k.finalize(&mut out);
    out
}
