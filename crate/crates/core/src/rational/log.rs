//! Natural logarithms of exact rationals in fixed-point arithmetic.
//!
//! Working precision is [`LOG_BITS`] fractional bits, well beyond the
//! 80-bit floor needed to keep phase error under quadrature error for
//! t up to 1e6.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub const LOG_BITS: usize = 160;

/// 2·atanh(z) with z = num/2^LOG_BITS, as a fixed-point integer.
fn atanh2_fixed(z: &BigInt) -> BigInt {
    let one = BigInt::one() << LOG_BITS;
    let z2 = (z * z) >> LOG_BITS;
    let mut term = z.clone();
    let mut acc = BigInt::zero();
    let mut n = 1u32;
    while !term.is_zero() {
        acc += &term / BigInt::from(n);
        term = (&term * &z2) >> LOG_BITS;
        n += 2;
    }
    debug_assert!(acc.abs() < one);
    acc << 1
}

fn ln2_fixed() -> &'static BigInt {
    static LN2: OnceLock<BigInt> = OnceLock::new();
    // ln 2 = 2 atanh(1/3)
    LN2.get_or_init(|| atanh2_fixed(&((BigInt::one() << LOG_BITS) / BigInt::from(3))))
}

/// ln(n) for n ≥ 1 as a fixed-point integer with LOG_BITS fractional bits.
fn ln_biguint_fixed(n: &BigUint) -> BigInt {
    assert!(!n.is_zero());
    let b = n.bits() as usize - 1;
    // mantissa m = n / 2^b in [1, 2), scaled by 2^LOG_BITS
    let m: BigInt = if b <= LOG_BITS {
        BigInt::from(n.clone()) << (LOG_BITS - b)
    } else {
        BigInt::from(n >> (b - LOG_BITS))
    };
    let one = BigInt::one() << LOG_BITS;
    let z = ((&m - &one) << LOG_BITS) / (&m + &one);
    ln2_fixed() * BigInt::from(b) + atanh2_fixed(&z)
}

/// ln|x| of a nonzero rational, returned as a fixed-point integer scaled by 2^LOG_BITS.
pub fn ln_abs_fixed(x: &BigRational) -> BigInt {
    assert!(!x.is_zero(), "logarithm of zero");
    let num = x.numer().abs().to_biguint().expect("abs is nonnegative");
    let den = x.denom().to_biguint().expect("denominator is positive");
    ln_biguint_fixed(&num) - ln_biguint_fixed(&den)
}

/// ln|x| rounded to f64 from the fixed-point value.
pub fn ln_abs(x: &BigRational) -> f64 {
    let fixed = ln_abs_fixed(x);
    // Drop to 64 significant bits first so the f64 conversion is well-defined.
    let bits = fixed.bits() as i64;
    let shift = (bits - 64).max(0);
    let head = (&fixed >> shift as usize).to_f64().unwrap_or(0.0);
    head * 2f64.powi(shift as i32 - LOG_BITS as i32)
}
