//! Bit-level primitives on the working floating-point format.
//!
//! Values of the working format are carried in `f64`. Every `f64` that is
//! representable in the working format is a normal `f64` with at most
//! `mantissa_bits` significant fraction bits, so truncation, bit counting and
//! exponent extraction can all be done on the `f64` encoding directly.

mod arith;

pub use arith::{count_ops, OpCounts, Overflowed, OverflowExt};

use crate::error::{Error, Result};

const F64_FRACTION_BITS: u32 = 52;
const F64_FRACTION_MASK: u64 = (1 << F64_FRACTION_BITS) - 1;

/// Parameters of the emulated working precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatSpec {
    mantissa_bits: u32,
    max_exponent: i32,
    eps: f64,
}

impl FloatSpec {
    /// IEEE 754 binary32.
    pub const SINGLE: FloatSpec = FloatSpec {
        mantissa_bits: 23,
        max_exponent: 127,
        eps: 1.0 / 16_777_216.0,
    };

    /// A binary format with `mantissa_bits` stored fraction bits and largest
    /// unbiased exponent `max_exponent`, IEEE-style gradual underflow below
    /// `1 - max_exponent`.
    ///
    /// Emulation rounds exact `f64` results, so formats wider than binary32
    /// are rejected: double rounding is only harmless while `53 >= 2p + 2`.
    pub fn new(mantissa_bits: u32, max_exponent: i32) -> Result<Self> {
        if !(3..=23).contains(&mantissa_bits) {
            return Err(Error::Domain(format!(
                "mantissa_bits must be in 3..=23, got {mantissa_bits}"
            )));
        }
        if !(2..=127).contains(&max_exponent) {
            return Err(Error::Domain(format!(
                "max_exponent must be in 2..=127, got {max_exponent}"
            )));
        }
        Ok(FloatSpec {
            mantissa_bits,
            max_exponent,
            eps: pow2(-(mantissa_bits as i32 + 1)),
        })
    }

    /// M: stored fraction bits, excluding the implicit leading bit.
    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    /// F: largest exponent of the format.
    pub fn max_exponent(&self) -> i32 {
        self.max_exponent
    }

    /// Machine precision, `2^-(M+1)`.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn is_binary32(&self) -> bool {
        self.mantissa_bits == 23 && self.max_exponent == 127
    }

    /// Largest finite value, `(2 - 2^-M) * 2^F`.
    pub fn max_finite(&self) -> f64 {
        (2.0 - pow2(-(self.mantissa_bits as i32))) * pow2(self.max_exponent)
    }

    fn min_normal_exponent(&self) -> i32 {
        1 - self.max_exponent
    }

    /// Round a finite `f64` to the nearest working-format value, ties to even.
    pub fn round(&self, v: f64) -> std::result::Result<f64, Overflowed> {
        if self.is_binary32() {
            let r = v as f32;
            return if r.is_finite() { Ok(r as f64) } else { Err(Overflowed) };
        }
        self.round_generic(v)
    }

    fn round_generic(&self, v: f64) -> std::result::Result<f64, Overflowed> {
        if v == 0.0 || !v.is_finite() {
            return if v.is_finite() { Ok(v) } else { Err(Overflowed) };
        }
        let e = unbiased_exponent(v).max(self.min_normal_exponent());
        let quantum = pow2(e - self.mantissa_bits as i32);
        let r = (v / quantum).round_ties_even() * quantum;
        if r.abs() > self.max_finite() {
            Err(Overflowed)
        } else {
            Ok(r)
        }
    }

    /// True when `v` is exactly a working-format value.
    pub fn is_representable(&self, v: f64) -> bool {
        v.is_finite() && self.round(v) == Ok(v)
    }

    /// Parse-time coercion: reject non-finite input, round to the format.
    pub fn to_working(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite value {v}")));
        }
        self.round(v)
            .map_err(|_| Error::InvalidInput(format!("{v:e} overflows the working format")))
    }
}

impl Default for FloatSpec {
    fn default() -> Self {
        FloatSpec::SINGLE
    }
}

/// Exact power of two as an `f64`, for exponents in the normal `f64` range.
pub(crate) fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << F64_FRACTION_BITS)
}

/// floor(log2 |v|) for finite nonzero `v` (the `1.f * 2^e` convention).
fn unbiased_exponent(v: f64) -> i32 {
    let biased = ((v.to_bits() >> F64_FRACTION_BITS) & 0x7ff) as i32;
    if biased == 0 {
        // f64 subnormal
        unbiased_exponent(v * pow2(64)) - 64
    } else {
        biased - 1023
    }
}

fn check_finite(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite value {z}")))
    }
}

/// T_k(z): keep the implicit bit and the top `k` fraction bits, zero the rest.
pub fn truncate(z: f64, k: u32, spec: &FloatSpec) -> Result<f64> {
    check_finite(z)?;
    if k > spec.mantissa_bits() {
        return Err(Error::Domain(format!(
            "truncation width {k} exceeds mantissa bits {}",
            spec.mantissa_bits()
        )));
    }
    Ok(truncate_bits(z, k))
}

/// Unchecked truncation by masking the `f64` fraction field. Rounds toward zero.
pub(crate) fn truncate_bits(z: f64, k: u32) -> f64 {
    if z == 0.0 || k >= F64_FRACTION_BITS {
        return z;
    }
    if z.to_bits() & (0x7ff << F64_FRACTION_BITS) == 0 {
        // f64 subnormal: normalise, mask, scale back (exact both ways)
        return truncate_bits(z * pow2(64), k) * pow2(-64);
    }
    let drop = F64_FRACTION_BITS - k;
    f64::from_bits(z.to_bits() & !((1u64 << drop) - 1))
}

/// B(z): fraction bits after the implicit leading bit, up to the lowest set bit.
/// B(0) = 0.
pub fn bit_count(z: f64) -> Result<u32> {
    check_finite(z)?;
    Ok(bit_count_unchecked(z))
}

pub(crate) fn bit_count_unchecked(z: f64) -> u32 {
    if z == 0.0 {
        return 0;
    }
    let z = if z.to_bits() & (0x7ff << F64_FRACTION_BITS) == 0 {
        z * pow2(64)
    } else {
        z
    };
    let frac = z.to_bits() & F64_FRACTION_MASK;
    if frac == 0 {
        0
    } else {
        F64_FRACTION_BITS - frac.trailing_zeros()
    }
}

/// E(z) with |z| = m * 2^E(z), m in [0.5, 1).
pub fn exponent(z: f64) -> Result<i32> {
    check_finite(z)?;
    if z == 0.0 {
        return Err(Error::Domain("zero has no exponent".into()));
    }
    Ok(exponent_unchecked(z))
}

pub(crate) fn exponent_unchecked(z: f64) -> i32 {
    unbiased_exponent(z) + 1
}

/// Bits discarded when adding a coefficient to a product of the given
/// magnitude: the distance between the two exponents. Zero if either is zero.
pub fn bits_lost(p_n: f64, hx: f64) -> u32 {
    debug_assert!(p_n.is_finite() && hx.is_finite());
    if p_n == 0.0 || hx == 0.0 {
        return 0;
    }
    exponent_unchecked(p_n).abs_diff(exponent_unchecked(hx))
}

/// Whether `a * b` rounded to the working format equals the exact product.
pub fn product_is_exact(a: f64, b: f64, spec: &FloatSpec) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    let p = a * b;
    if !p.is_finite() || a.mul_add(b, -p) != 0.0 {
        return false;
    }
    spec.round(p) == Ok(p)
}
