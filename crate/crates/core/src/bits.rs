//! Fixed-length bit strings.
//!
//! Bit index 0 is the most significant bit of the first byte (and of the
//! first hex digit). Cipher permutation tables index against this order.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Longest block the workbench handles.
pub const MAX_BITS: usize = 1024;

/// An ordered, immutable-by-convention string of binary digits.
///
/// Stored packed MSB-first; bits past `len` in the final byte are always zero
/// so that derived equality and hashing are canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitBlock {
    len: usize,
    bytes: Vec<u8>,
}

/// How bits become network inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureEncoding {
    /// 0 -> 0.0, 1 -> 1.0
    #[default]
    ZeroOne,
    /// 0 -> -1.0, 1 -> +1.0
    PlusMinusOne,
}

impl FromStr for FeatureEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "zero_one" | "01" => Ok(FeatureEncoding::ZeroOne),
            "plus_minus_one" | "pm" | "pm1" => Ok(FeatureEncoding::PlusMinusOne),
            other => Err(Error::Config(format!("unknown feature encoding {other:?}"))),
        }
    }
}

impl FeatureEncoding {
    fn levels<F: Float>(self) -> (F, F) {
        match self {
            FeatureEncoding::ZeroOne => (F::zero(), F::one()),
            FeatureEncoding::PlusMinusOne => (-F::one(), F::one()),
        }
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len > MAX_BITS {
        return Err(Error::Length(format!(
            "bit length must be in 1..={MAX_BITS}, got {len}"
        )));
    }
    Ok(())
}

fn hex_value(c: char) -> Result<u8> {
    c.to_digit(16)
        .map(|d| d as u8)
        .ok_or_else(|| Error::Format(format!("non-hex character {c:?}")))
}

impl BitBlock {
    /// All-zero block of `len` bits.
    ///
    /// Panics if `len` is outside `1..=MAX_BITS`.
    pub fn zeros(len: usize) -> Self {
        check_len(len).expect("invalid block length");
        BitBlock {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    /// Builds a block from a slice of 0/1 digits.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_len(bits.len())?;
        let mut out = BitBlock::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => out.set(i, true),
                other => return Err(Error::Format(format!("bit {i} is {other}, not 0 or 1"))),
            }
        }
        Ok(out)
    }

    /// First `len` bits of the big-endian expansion of `hex`.
    ///
    /// The most significant bit of the first digit is bit 0.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        check_len(len)?;
        let digits = hex
            .chars()
            .map(hex_value)
            .collect::<Result<Vec<u8>>>()?;
        if digits.len() * 4 < len {
            return Err(Error::Length(format!(
                "{} hex digits cannot supply {len} bits",
                digits.len()
            )));
        }
        let mut out = BitBlock::zeros(len);
        for i in 0..len {
            let d = digits[i / 4];
            if (d >> (3 - i % 4)) & 1 == 1 {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Parses the output of [`BitBlock::to_hex`]: exactly `ceil(len/4)`
    /// digits holding the block as a right-aligned big-endian number.
    pub fn from_hex_value(hex: &str, len: usize) -> Result<Self> {
        check_len(len)?;
        let digits = hex
            .chars()
            .map(hex_value)
            .collect::<Result<Vec<u8>>>()?;
        let want = len.div_ceil(4);
        if digits.len() != want {
            return Err(Error::Length(format!(
                "expected {want} hex digits for {len} bits, got {}",
                digits.len()
            )));
        }
        let pad = want * 4 - len;
        let mut out = BitBlock::zeros(len);
        for k in 0..want * 4 {
            let bit = (digits[k / 4] >> (3 - k % 4)) & 1;
            if k < pad {
                if bit != 0 {
                    return Err(Error::Format(format!(
                        "hex {hex:?} does not fit in {len} bits"
                    )));
                }
            } else if bit == 1 {
                out.set(k - pad, true);
            }
        }
        Ok(out)
    }

    /// Uppercase hex with `ceil(len/4)` digits, the block read as a
    /// big-endian number (zero padding on the left). For lengths that are a
    /// multiple of 4 this is the plain MSB-first expansion.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789ABCDEF";
        let ndig = self.len.div_ceil(4);
        let pad = ndig * 4 - self.len;
        let mut s = String::with_capacity(ndig);
        for d in 0..ndig {
            let mut v = 0u8;
            for j in 0..4 {
                let k = d * 4 + j;
                v <<= 1;
                if k >= pad {
                    v |= self.bit(k - pad);
                }
            }
            s.push(DIGITS[v as usize] as char);
        }
        s
    }

    /// Block of `len <= 64` bits from the low bits of `value`; bit 0 of the
    /// block is bit `len - 1` of the integer.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!((1..=64).contains(&len), "from_u64 needs 1..=64 bits");
        let mut out = BitBlock::zeros(len);
        for i in 0..len {
            if (value >> (len - 1 - i)) & 1 == 1 {
                out.set(i, true);
            }
        }
        out
    }

    /// Inverse of [`BitBlock::from_u64`]. Panics if `len > 64`.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 on a {}-bit block", self.len);
        (0..self.len).fold(0u64, |acc, i| (acc << 1) | self.bit(i) as u64)
    }

    /// Packs MSB-first, final byte zero-padded.
    pub fn pack(&self) -> Vec<u8> {
        self.bytes.clone()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// Inverse of [`BitBlock::pack`]. Nonzero padding bits are rejected.
    pub fn unpack(bytes: &[u8], len: usize) -> Result<Self> {
        check_len(len)?;
        let need = len.div_ceil(8);
        if bytes.len() != need {
            return Err(Error::Length(format!(
                "{len} bits need {need} bytes, got {}",
                bytes.len()
            )));
        }
        let spare = need * 8 - len;
        if spare > 0 && bytes[need - 1] & ((1u8 << spare) - 1) != 0 {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        Ok(BitBlock {
            len,
            bytes: bytes.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; blocks hold at least one bit.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bit `i` as 0 or 1.
    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len, "bit index {i} out of range for {} bits", self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for {} bits", self.len);
        let mask = 1u8 << (7 - i % 8);
        if value {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().collect()
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Bitwise exclusive-or of equal-length blocks.
    pub fn xor(&self, other: &BitBlock) -> Result<BitBlock> {
        if self.len != other.len {
            return Err(Error::Length(format!(
                "xor of {}-bit and {}-bit blocks",
                self.len, other.len
            )));
        }
        Ok(BitBlock {
            len: self.len,
            bytes: self
                .bytes
                .iter()
                .zip(&other.bytes)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    /// Network input vector in the default {0.0, 1.0} encoding.
    pub fn encode_features(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        self.write_features(FeatureEncoding::ZeroOne, &mut out);
        out
    }

    /// Writes one feature per bit into `out`.
    pub fn write_features<F: Float>(&self, encoding: FeatureEncoding, out: &mut [F]) {
        assert_eq!(out.len(), self.len, "feature buffer width");
        let (lo, hi) = encoding.levels::<F>();
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = if self.bit(i) == 1 { hi } else { lo };
        }
    }

    /// Thresholds features at the midpoint of the encoding's two levels.
    pub fn from_features<F: Float>(features: &[F], encoding: FeatureEncoding) -> Result<Self> {
        check_len(features.len())?;
        let (lo, hi) = encoding.levels::<F>();
        let mid = (lo + hi) / (F::one() + F::one());
        let mut out = BitBlock::zeros(features.len());
        for (i, &f) in features.iter().enumerate() {
            if f > mid {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitBlock({}:", self.len)?;
        for b in self.iter() {
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}
