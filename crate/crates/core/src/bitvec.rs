// SPDX-License-Identifier: Apache-2.0

//! Fixed-width bit-vector values and the Hamming distance between them.

use std::fmt;

use thiserror::Error;

/// Widest supported datapath.
pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitVectorError {
    #[error("width {0} is outside 1..={MAX_WIDTH}")]
    BadWidth(u32),
    #[error("value {value:#x} does not fit in {width} bits")]
    Overflow { value: u64, width: u32 },
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },
}

/// All-ones mask for a `width`-bit word. `width` must be in `1..=64`.
#[inline]
pub fn mask(width: u32) -> u64 {
    debug_assert!((1..=MAX_WIDTH).contains(&width));
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub(crate) fn check_width(width: u32) -> Result<(), BitVectorError> {
    if (1..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(BitVectorError::BadWidth(width))
    }
}

/// An unsigned value of a fixed bit width. The value is always `< 2^width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    value: u64,
    width: u32,
}

impl BitVector {
    pub fn new(value: u64, width: u32) -> Result<Self, BitVectorError> {
        check_width(width)?;
        if value & !mask(width) != 0 {
            return Err(BitVectorError::Overflow { value, width });
        }
        Ok(Self { value, width })
    }

    /// Builds a vector by truncating `value` modulo `2^width`.
    pub fn wrapping(value: u64, width: u32) -> Result<Self, BitVectorError> {
        check_width(width)?;
        Ok(Self {
            value: value & mask(width),
            width,
        })
    }

    pub(crate) fn from_masked(value: u64, width: u32) -> Self {
        debug_assert_eq!(value & !mask(width), 0);
        Self { value, width }
    }

    pub fn zero(width: u32) -> Result<Self, BitVectorError> {
        Self::new(0, width)
    }

    pub fn ones(width: u32) -> Result<Self, BitVectorError> {
        check_width(width)?;
        Ok(Self {
            value: mask(width),
            width,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn width(self) -> u32 {
        self.width
    }

    /// Number of set bits.
    pub fn weight(self) -> u32 {
        self.value.count_ones()
    }

    pub fn complement(self) -> Self {
        Self {
            value: !self.value & mask(self.width),
            width: self.width,
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.value)
    }
}

/// Number of bit positions in which `a` and `b` differ.
pub fn hamming_distance(a: BitVector, b: BitVector) -> Result<u32, BitVectorError> {
    if a.width != b.width {
        return Err(BitVectorError::WidthMismatch {
            left: a.width,
            right: b.width,
        });
    }
    Ok((a.value ^ b.value).count_ones())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(v: u64, w: u32) -> BitVector {
        BitVector::new(v, w).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hamming_distance(bv(0x00, 8), bv(0xff, 8)), Ok(8));
        assert_eq!(hamming_distance(bv(0x5a, 8), bv(0x5a, 8)), Ok(0));
        assert_eq!(hamming_distance(bv(0b0110, 4), bv(0b0011, 4)), Ok(2));
    }

    #[test]
    fn width_mismatch_is_rejected() {
        assert_eq!(
            hamming_distance(bv(1, 4), bv(1, 8)),
            Err(BitVectorError::WidthMismatch { left: 4, right: 8 })
        );
    }

    #[test]
    fn construction_checks() {
        assert!(BitVector::new(16, 4).is_err());
        assert!(BitVector::new(0, 0).is_err());
        assert!(BitVector::new(0, 65).is_err());
        assert_eq!(BitVector::wrapping(0x1f, 4).unwrap().value(), 0xf);
        assert_eq!(BitVector::ones(64).unwrap().value(), u64::MAX);
        assert_eq!(bv(0b1010, 4).complement().value(), 0b0101);
    }

    #[test]
    fn metric_axioms_exhaustive_w4() {
        for a in 0..16 {
            let a = bv(a, 4);
            assert_eq!(hamming_distance(a, a.complement()), Ok(4));
            for b in 0..16 {
                let b = bv(b, 4);
                let ab = hamming_distance(a, b).unwrap();
                assert_eq!(ab, hamming_distance(b, a).unwrap());
                for c in 0..16 {
                    let c = bv(c, 4);
                    let ac = hamming_distance(a, c).unwrap();
                    let bc = hamming_distance(b, c).unwrap();
                    assert!(ac <= ab + bc);
                }
            }
        }
    }
}
