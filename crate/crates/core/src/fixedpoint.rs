//! Q3.60 fixed-point numbers.
//!
//! A [`Fixed`] is a raw `i64` interpreted as `bits / 2^60`, giving the range
//! `[-8, 8)` with a quantum of `2^-60`. Integration adds fixed-point
//! increments with wrapping two's-complement arithmetic, which forms a group:
//! adding `-d` always undoes adding `d`, even across overflow.
//!
//! Conversion from binary64 truncates toward zero. Truncation is odd
//! symmetric (`to_fixed(-r) == -to_fixed(r)`), so a step taken with `-h`
//! produces exactly the negated increments of the step taken with `h`.

use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fraction bits.
pub const FRACTION_BITS: u32 = 60;

/// `2^60`, the scale between the raw integer and the real value.
pub const SCALE: i64 = 0x1000_0000_0000_0000;

const SCALE_F64: f64 = SCALE as f64;
const INV_SCALE_F64: f64 = 1.0 / SCALE_F64;
const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Exclusive bound on the magnitude of representable values.
pub const RANGE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixedError {
    #[error("value {0} is outside the fixed-point range (-8, 8)")]
    OutOfRange(f64),
    #[error("value is not finite: {0}")]
    NonFinite(f64),
    #[error("malformed fixed-point hex '{0}': expected 16 hex digits")]
    Parse(String),
}

/// How a scaled real increment is rounded to an integer.
///
/// Only [`Rounding::TowardZero`] preserves reversibility. [`Rounding::Floor`]
/// exists as a negative control for the reversibility auditor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    TowardZero,
    Floor,
}

/// Signed Q3.60 fixed-point number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fixed(i64);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);
    pub const ONE: Fixed = Fixed(SCALE);
    pub const MAX: Fixed = Fixed(i64::MAX);
    pub const MIN: Fixed = Fixed(i64::MIN);

    pub const fn from_bits(bits: i64) -> Self {
        Fixed(bits)
    }

    pub const fn to_bits(self) -> i64 {
        self.0
    }

    /// Converts a real to fixed point, truncating toward zero.
    ///
    /// Fails for non-finite inputs and for `|r| >= 8`.
    pub fn from_real(r: f64) -> Result<Self, FixedError> {
        if !r.is_finite() {
            return Err(FixedError::NonFinite(r));
        }
        if r.abs() >= RANGE {
            return Err(FixedError::OutOfRange(r));
        }
        // Scaling by a power of two is exact; the cast truncates toward zero.
        Ok(Fixed((r * SCALE_F64) as i64))
    }

    /// Converts a finite real of any magnitude, reducing modulo `2^64`.
    ///
    /// This is the increment conversion used inside integrator steps. For
    /// in-range inputs it agrees with [`Fixed::from_real`]; outside the range
    /// it wraps, and it stays odd symmetric everywhere.
    pub fn from_real_wrapping(r: f64, rounding: Rounding) -> Self {
        debug_assert!(r.is_finite());
        let scaled = r * SCALE_F64;
        let integral = match rounding {
            Rounding::TowardZero => scaled.trunc(),
            Rounding::Floor => scaled.floor(),
        };
        if integral.abs() < (1u64 << 63) as f64 {
            return Fixed(integral as i64);
        }
        // fmod is exact, so the reduction loses nothing and keeps the sign.
        let reduced = integral % TWO_POW_64;
        Fixed((reduced as i128) as i64)
    }

    /// Real value `bits / 2^60`, rounded to nearest binary64.
    pub fn to_real(self) -> f64 {
        // i64 -> f64 rounds to nearest even; the power-of-two scale is exact.
        self.0 as f64 * INV_SCALE_F64
    }

    pub const fn wrapping_add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0.wrapping_add(rhs.0))
    }

    pub const fn wrapping_sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0.wrapping_sub(rhs.0))
    }

    /// Wrapping add that also reports whether the result wrapped.
    pub const fn overflowing_add(self, rhs: Fixed) -> (Fixed, bool) {
        let (v, o) = self.0.overflowing_add(rhs.0);
        (Fixed(v), o)
    }

    /// Upper-case, zero-padded, 16 hex digit two's-complement rendering.
    pub fn to_hex(self) -> String {
        format!("{:016X}", self.0 as u64)
    }

    pub fn from_hex(text: &str) -> Result<Self, FixedError> {
        if text.len() != 16 || !text.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(FixedError::Parse(text.to_string()));
        }
        u64::from_str_radix(text, 16)
            .map(|u| Fixed(u as i64))
            .map_err(|_| FixedError::Parse(text.to_string()))
    }
}

impl Neg for Fixed {
    type Output = Fixed;

    /// Wrapping negation; `-MIN == MIN`.
    fn neg(self) -> Fixed {
        Fixed(self.0.wrapping_neg())
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Fixed {
    type Err = FixedError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fixed::from_hex(s)
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Fixed::from_hex(&text).map_err(serde::de::Error::custom)
    }
}

/// Converts a slice of fixed values to reals.
pub fn to_reals(values: &[Fixed]) -> Vec<f64> {
    values.iter().map(|x| x.to_real()).collect()
}

/// Converts reals to fixed values, failing on the first out-of-range entry.
pub fn from_reals(values: &[f64]) -> Result<Vec<Fixed>, FixedError> {
    values.iter().map(|&r| Fixed::from_real(r)).collect()
}
