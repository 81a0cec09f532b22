//! The rationals numbered through the Calkin-Wilf tree.
//!
//! Element 0 is 0, element `2j-1` is the `j`-th positive rational in
//! Calkin-Wilf order and element `2j` its negative. A rational of tree depth
//! `d` has index in `[2^d, 2^(d+1))`, so the least-index rational in an open
//! interval is the simplest one, which continued fractions find directly.

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Q = Ratio<i128>;

fn cw_value(j: u64) -> Q {
    debug_assert!(j >= 1);
    let (mut a, mut b) = (1i128, 1i128);
    let top = 63 - j.leading_zeros();
    for i in (0..top).rev() {
        if j >> i & 1 == 0 {
            b += a;
        } else {
            a += b;
        }
    }
    Q::new(a, b)
}

/// Calkin-Wilf index of a positive rational, `None` past `u64`.
fn cw_index(q: &Q) -> Option<u64> {
    let (mut a, mut b) = (*q.numer(), *q.denom());
    debug_assert!(a > 0 && b > 0);
    // Bits from the leaf upwards.
    let mut bits: Vec<bool> = Vec::new();
    while !(a == 1 && b == 1) {
        if a < b {
            let steps = if b % a == 0 { b / a - 1 } else { b / a };
            bits.extend(std::iter::repeat_n(false, steps as usize));
            b -= steps * a;
        } else {
            let steps = if a % b == 0 { a / b - 1 } else { a / b };
            bits.extend(std::iter::repeat_n(true, steps as usize));
            a -= steps * b;
        }
        if bits.len() > 62 {
            return None;
        }
    }
    Some(bits.iter().rev().fold(1u64, |acc, &bit| acc << 1 | u64::from(bit)))
}

pub fn value(e: u64) -> Q {
    if e == 0 {
        Q::zero()
    } else if e % 2 == 1 {
        cw_value(e.div_ceil(2))
    } else {
        -cw_value(e / 2)
    }
}

pub fn index(q: &Q) -> Option<u64> {
    if q.is_zero() {
        Some(0)
    } else if q.is_positive() {
        cw_index(q)?.checked_mul(2).map(|v| v - 1)
    } else {
        cw_index(&-q)?.checked_mul(2)
    }
}

/// Simplest rational in the open interval `(lo, hi)` with `0 <= lo < hi`,
/// `hi = None` meaning infinity.
fn simplest_nonneg(lo: &Q, hi: Option<&Q>) -> Q {
    let n = lo.floor();
    let next = n + Q::one();
    if hi.is_none_or(|h| &next < h) {
        return next;
    }
    let h = hi.expect("bounded");
    // lo and hi lie in [n, n+1]; invert the fractional parts.
    let new_lo = (h - n).recip();
    let frac = lo - n;
    let new_hi = if frac.is_zero() { None } else { Some(frac.recip()) };
    n + simplest_nonneg(&new_lo, new_hi.as_ref()).recip()
}

/// Least-index rational strictly between the bounds (`None` = unbounded).
pub fn least_in(lo: Option<&Q>, hi: Option<&Q>) -> Q {
    let zero = Q::zero();
    let below_zero = lo.is_none_or(|l| l < &zero);
    let above_zero = hi.is_none_or(|h| h > &zero);
    if below_zero && above_zero {
        return zero;
    }
    if !below_zero {
        simplest_nonneg(lo.unwrap_or(&zero), hi)
    } else {
        let neg_lo = hi.map(|h| -h).unwrap_or(zero);
        let neg_hi = lo.map(|l| -l);
        -simplest_nonneg(&neg_lo, neg_hi.as_ref())
    }
}

pub fn show(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for e in 0..2000u64 {
            let q = value(e);
            assert_eq!(index(&q), Some(e), "{}", show(&q));
        }
    }

    #[test]
    fn least_in_is_least() {
        let cases = [(Some(Q::new(1, 3)), Some(Q::new(1, 2))), (Some(Q::new(2, 1)), None), (None, Some(Q::new(-5, 2)))];
        for (lo, hi) in cases {
            let q = least_in(lo.as_ref(), hi.as_ref());
            let inside = |x: &Q| lo.as_ref().is_none_or(|l| l < x) && hi.as_ref().is_none_or(|h| x < h);
            assert!(inside(&q));
            let i = index(&q).unwrap();
            assert!((0..i).all(|e| !inside(&value(e))));
        }
    }
}
