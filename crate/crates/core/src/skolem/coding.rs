//! Elias-gamma coding of `(support, mask)` pairs as natural numbers.
//!
//! An index `n >= 1` is read as a bit stream after dropping its leading 1.
//! The stream holds gamma codes for `|S| + 1`, then the positions of `S` as
//! gaps (`p_0 + 1`, then successive differences), then `mask + 1`. Since a
//! gamma code of `g` spans at least `log2(2g)` bits, every position of `S` is
//! below `n`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::pos::Pos;

struct Reader<'a> {
    n: &'a BigUint,
    /// Index of the next bit to read, counting down; `None` once exhausted.
    at: Option<u64>,
}

impl Reader<'_> {
    fn bit(&mut self) -> Option<bool> {
        let i = self.at?;
        self.at = i.checked_sub(1);
        Some(self.n.bit(i))
    }

    fn gamma(&mut self) -> Option<BigUint> {
        let mut zeros = 0u64;
        while !self.bit()? {
            zeros += 1;
        }
        let mut v = BigUint::one();
        for _ in 0..zeros {
            v = (v << 1u32) | BigUint::from(u8::from(self.bit()?));
        }
        Some(v)
    }
}

fn push_gamma(bits: &mut Vec<bool>, v: &BigUint) {
    debug_assert!(!v.is_zero());
    let len = v.bits();
    bits.extend(std::iter::repeat_n(false, len as usize - 1));
    for i in (0..len).rev() {
        bits.push(v.bit(i));
    }
}

/// Support positions (strictly increasing) and mask coded by `n`, or `None`
/// when the stream is malformed or has trailing bits.
pub fn decode(n: &Pos) -> Option<(Vec<Pos>, BigUint)> {
    let n = n.to_biguint();
    let len = n.bits();
    if len < 2 {
        return None;
    }
    let mut r = Reader { n: &n, at: Some(len - 2) };
    let count = r.gamma()? - BigUint::one();
    if count > BigUint::from(64u32) {
        return None;
    }
    let count: usize = count.try_into().ok()?;
    let mut support = Vec::with_capacity(count);
    let mut prev: Option<BigUint> = None;
    for _ in 0..count {
        let g = r.gamma()?;
        let p = match &prev {
            None => g - BigUint::one(),
            Some(q) => q + g,
        };
        support.push(Pos::from_biguint(p.clone()));
        prev = Some(p);
    }
    let mask = r.gamma()? - BigUint::one();
    if r.at.is_some() {
        return None;
    }
    Some((support, mask))
}

pub fn encode(support: &[Pos], mask: &BigUint) -> Pos {
    let mut bits = vec![true];
    push_gamma(&mut bits, &BigUint::from(support.len() + 1));
    let mut prev: Option<BigUint> = None;
    for p in support {
        let p = p.to_biguint();
        let g = match &prev {
            None => &p + BigUint::one(),
            Some(q) => {
                assert!(&p > q, "support must be strictly increasing");
                &p - q
            }
        };
        push_gamma(&mut bits, &g);
        prev = Some(p);
    }
    push_gamma(&mut bits, &(mask + BigUint::one()));
    let mut n = BigUint::zero();
    for b in bits {
        n = (n << 1u32) | BigUint::from(u8::from(b));
    }
    Pos::from_biguint(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_codes() {
        assert_eq!(encode(&[Pos::ZERO], &BigUint::one()), Pos::from(170u64));
        assert_eq!(encode(&[], &BigUint::one()), Pos::from(26u64));
        assert_eq!(encode(&[], &BigUint::zero()), Pos::from(7u64));
        assert_eq!(decode(&Pos::from(170u64)), Some((vec![Pos::ZERO], BigUint::one())));
        assert_eq!(decode(&Pos::from(1u64)), None);
        assert_eq!(decode(&Pos::ZERO), None);
    }

    #[test]
    fn round_trip_and_bound() {
        for n in 0..5000u64 {
            let n = Pos::from(n);
            if let Some((s, m)) = decode(&n) {
                assert_eq!(encode(&s, &m), n);
                assert!(s.iter().all(|p| p < &n));
            }
        }
    }
}
