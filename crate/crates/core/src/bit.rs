use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node's bit: either its initial input or its current estimate of the
/// majority bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const fn from_u8_lossy(v: u8) -> Bit {
        if v == 0 {
            Bit::Zero
        } else {
            Bit::One
        }
    }

    pub const fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub const fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

impl From<Bit> for u8 {
    fn from(b: Bit) -> u8 {
        b.as_u8()
    }
}

impl TryFrom<u8> for Bit {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(format!("bit must be 0 or 1, got {other}")),
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Bit {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Majority of a bit multiset, with draws resolved to zero.
pub fn majority_of_bits(bits: &[Bit]) -> Result<Bit> {
    if bits.is_empty() {
        return Err(Error::EmptyBits);
    }
    let ones = bits.iter().filter(|b| **b == Bit::One).count();
    let zeros = bits.len() - ones;
    Ok(if zeros >= ones { Bit::Zero } else { Bit::One })
}

/// Majority of three bits stored as 0/1 integers.
pub(crate) fn majority3(a: u8, b: u8, c: u8) -> u8 {
    u8::from(a + b + c >= 2)
}
