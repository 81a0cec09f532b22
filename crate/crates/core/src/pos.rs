//! Tape positions.
//!
//! Positions of rich-sequence indices grow very quickly (an index has to be
//! larger than every position its formula mentions), so they are arbitrary
//! precision. Small positions stay inline and are cheap to clone.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

/// A natural number used as a tape position or a rich-sequence index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Pos {
    Small(u64),
    /// Always strictly larger than `u64::MAX`.
    Big(Arc<BigUint>),
}

impl Pos {
    pub const ZERO: Pos = Pos::Small(0);

    pub fn from_biguint(n: BigUint) -> Pos {
        match n.to_u64() {
            Some(v) => Pos::Small(v),
            None => Pos::Big(Arc::new(n)),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            Pos::Small(v) => BigUint::from(*v),
            Pos::Big(b) => (**b).clone(),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Pos::Small(v) => Some(*v),
            Pos::Big(_) => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        self.as_u64().and_then(|v| usize::try_from(v).ok())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Pos::Small(0))
    }

    pub fn succ(&self) -> Pos {
        match self {
            Pos::Small(v) if *v < u64::MAX => Pos::Small(v + 1),
            _ => Pos::from_biguint(self.to_biguint() + BigUint::one()),
        }
    }

    /// `self - 1`, saturating at zero.
    pub fn pred(&self) -> Pos {
        match self {
            Pos::Small(0) => Pos::Small(0),
            Pos::Small(v) => Pos::Small(v - 1),
            Pos::Big(b) => Pos::from_biguint((**b).clone() - BigUint::one()),
        }
    }

    pub fn add(&self, other: &Pos) -> Pos {
        if let (Pos::Small(a), Pos::Small(b)) = (self, other) {
            if let Some(s) = a.checked_add(*b) {
                return Pos::Small(s);
            }
        }
        Pos::from_biguint(self.to_biguint() + other.to_biguint())
    }

    /// `self - other`, or `None` when negative.
    pub fn checked_sub(&self, other: &Pos) -> Option<Pos> {
        if self < other {
            return None;
        }
        match (self, other) {
            (Pos::Small(a), Pos::Small(b)) => Some(Pos::Small(a - b)),
            _ => Some(Pos::from_biguint(self.to_biguint() - other.to_biguint())),
        }
    }

    /// Number of significant bits (0 for zero).
    pub fn bits(&self) -> u64 {
        match self {
            Pos::Small(v) => 64 - u64::from(v.leading_zeros()),
            Pos::Big(b) => b.bits(),
        }
    }
}

impl Default for Pos {
    fn default() -> Self {
        Pos::ZERO
    }
}

impl Ord for Pos {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Pos::Small(a), Pos::Small(b)) => a.cmp(b),
            (Pos::Small(_), Pos::Big(_)) => Ordering::Less,
            (Pos::Big(_), Pos::Small(_)) => Ordering::Greater,
            (Pos::Big(a), Pos::Big(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Pos {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u64> for Pos {
    fn from(v: u64) -> Self {
        Pos::Small(v)
    }
}

impl From<usize> for Pos {
    fn from(v: usize) -> Self {
        Pos::Small(v as u64)
    }
}

impl From<u32> for Pos {
    fn from(v: u32) -> Self {
        Pos::Small(u64::from(v))
    }
}

impl From<BigUint> for Pos {
    fn from(v: BigUint) -> Self {
        Pos::from_biguint(v)
    }
}

impl PartialEq<u64> for Pos {
    fn eq(&self, other: &u64) -> bool {
        matches!(self, Pos::Small(v) if v == other)
    }
}

impl FromStr for Pos {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Pos::Small(v));
        }
        s.parse::<BigUint>().map(Pos::from_biguint)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pos::Small(v) => write!(f, "{v}"),
            Pos::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Pos {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Pos::Small(v) => s.serialize_u64(*v),
            Pos::Big(b) => s.serialize_str(&b.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_big_order() {
        let big = Pos::from_biguint(BigUint::from(u64::MAX) + 5u32);
        assert!(Pos::Small(u64::MAX) < big);
        assert_eq!(Pos::Small(u64::MAX).succ(), Pos::from_biguint(BigUint::from(u64::MAX) + 1u32));
        assert_eq!(big.pred().pred().pred().pred().pred(), Pos::Small(u64::MAX));
    }

    #[test]
    fn parse_round_trip() {
        let s = "340282366920938463463374607431768211457";
        let p: Pos = s.parse().unwrap();
        assert_eq!(p.to_string(), s);
        assert_eq!("17".parse::<Pos>().unwrap(), Pos::Small(17));
    }

    #[test]
    fn bits_counts() {
        assert_eq!(Pos::Small(0).bits(), 0);
        assert_eq!(Pos::Small(170).bits(), 8);
    }
}
