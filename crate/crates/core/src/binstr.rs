//! Finite binary strings, the bijection with the positive integers, and
//! prefix-freeness.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitStringError {
    #[error("invalid character {ch:?} at position {pos} in bit string")]
    BadChar { ch: char, pos: usize },
    #[error("bin is only defined for positive integers")]
    NotPositive,
}

/// A finite binary string. Ordered length-lexicographically, so the empty
/// string comes first and `"1" < "00"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn empty() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn zeros(n: usize) -> Self {
        BitString(vec![false; n])
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    pub fn with_bit(&self, b: bool) -> BitString {
        let mut v = self.0.clone();
        v.push(b);
        BitString(v)
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Number of ones.
    pub fn hamming_weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Value of the string read as a binary numeral (empty reads as 0).
    pub fn numeral(&self) -> BigUint {
        let mut n = BigUint::zero();
        for &b in &self.0 {
            n <<= 1;
            if b {
                n += 1u32;
            }
        }
        n
    }

    /// `2^-len`.
    pub fn weight(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::one() << self.len())
    }

    /// The string right after this one in length-lexicographic order.
    pub fn lenlex_succ(&self) -> BitString {
        let mut v = self.0.clone();
        match v.iter().rposition(|&b| !b) {
            Some(i) => {
                v[i] = true;
                for b in &mut v[i + 1..] {
                    *b = false;
                }
                BitString(v)
            }
            None => BitString::zeros(v.len() + 1),
        }
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    /// Accepts a string of `0`/`1`, or `eps` for the empty string.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "eps" || s.is_empty() {
            return Ok(BitString::empty());
        }
        s.chars()
            .enumerate()
            .map(|(pos, ch)| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BitStringError::BadChar { ch, pos }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

/// The string obtained by deleting the leading 1 of `n` in binary.
pub fn bin(n: &BigUint) -> Result<BitString, BitStringError> {
    if n.is_zero() {
        return Err(BitStringError::NotPositive);
    }
    let len = n.bits() - 1;
    Ok(BitString((0..len).rev().map(|i| n.bit(i)).collect()))
}

pub fn bin_u64(n: u64) -> Result<BitString, BitStringError> {
    bin(&BigUint::from(n))
}

/// Inverse of [`bin`]: the value of the numeral `1x`.
pub fn bin_inv(x: &BitString) -> BigUint {
    let mut n = BigUint::one();
    for &b in x.bits() {
        n <<= 1;
        if b {
            n += 1u32;
        }
    }
    n
}

/// `0.x` read as a binary fraction.
pub fn rational_of_prefix(x: &BitString) -> Rational {
    Rational::new(BigInt::from(x.numeral()), BigInt::one() << x.len())
}

/// True if no string in `set` is a proper prefix of another. Works on the
/// length-lex sorted set: any prefix of `w` sorts before `w`, and it is
/// enough to compare every string with its nearest lexicographic neighbour.
pub fn is_prefix_free<'a, I>(set: I) -> bool
where
    I: IntoIterator<Item = &'a BitString>,
{
    let mut lex: Vec<&[bool]> = set.into_iter().map(|s| s.bits()).collect();
    lex.sort_unstable();
    lex.dedup();
    lex.windows(2).all(|w| !w[1].starts_with(w[0]))
}

/// Prefix-freeness of a set stored in a `BTreeSet`.
pub fn set_is_prefix_free(set: &BTreeSet<BitString>) -> bool {
    is_prefix_free(set.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn bin_examples() {
        assert_eq!(bin_u64(1).unwrap(), BitString::empty());
        assert_eq!(bin_u64(2).unwrap(), bs("0"));
        assert_eq!(bin_u64(3).unwrap(), bs("1"));
        assert_eq!(bin_u64(4).unwrap(), bs("00"));
        assert_eq!(bin_u64(6).unwrap(), bs("10"));
        assert_eq!(bin_u64(13).unwrap(), bs("101"));
        assert!(bin_u64(0).is_err());
        assert_eq!(bin_inv(&bs("0101")), BigUint::from(21u32));
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(BitString::empty().to_string(), "eps");
        assert_eq!(bs("eps"), BitString::empty());
        assert_eq!(bs("0110").to_string(), "0110");
        assert_eq!(
            "01x".parse::<BitString>(),
            Err(BitStringError::BadChar { ch: 'x', pos: 2 })
        );
    }

    #[test]
    fn lenlex_order_small() {
        let words: Vec<BitString> = ["eps", "0", "1", "00", "01", "10", "11", "000"]
            .iter()
            .map(|s| bs(s))
            .collect();
        for w in words.windows(2) {
            assert!(w[0] < w[1]);
            assert_eq!(w[0].lenlex_succ(), w[1]);
        }
    }

    #[test]
    fn prefix_free_examples() {
        assert!(is_prefix_free(&[bs("0"), bs("10"), bs("11")]));
        assert!(!is_prefix_free(&[bs("0"), bs("01")]));
        assert!(!is_prefix_free(&[bs("1"), bs("0"), bs("110")]));
        assert!(!is_prefix_free(&[BitString::empty(), bs("0")]));
        assert!(is_prefix_free(&[BitString::empty()]));
        // 0 and 01 are separated by 00 lexicographically.
        assert!(!is_prefix_free(&[bs("0"), bs("00"), bs("01")]));
    }

    #[test]
    fn rational_of_prefix_examples() {
        assert_eq!(rational_of_prefix(&bs("1")), Rational::new(1.into(), 2.into()));
        assert_eq!(rational_of_prefix(&bs("011")), Rational::new(3.into(), 8.into()));
        assert_eq!(rational_of_prefix(&BitString::empty()), Rational::zero());
    }

    fn naive_prefix_free(v: &[BitString]) -> bool {
        for (i, a) in v.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                if i != j && a != b && a.is_prefix_of(b) {
                    return false;
                }
            }
        }
        true
    }

    proptest! {
        #[test]
        fn bin_roundtrip(n in 1u64..u64::MAX) {
            let x = bin_u64(n).unwrap();
            prop_assert_eq!(bin_inv(&x), BigUint::from(n));
            prop_assert_eq!(x.len() as u32, 63 - n.leading_zeros());
        }

        #[test]
        fn bin_preserves_order(a in 1u64..1_000_000, b in 1u64..1_000_000) {
            prop_assert_eq!(a.cmp(&b), bin_u64(a).unwrap().cmp(&bin_u64(b).unwrap()));
        }

        #[test]
        fn succ_is_next_integer(n in 1u64..1_000_000) {
            prop_assert_eq!(bin_u64(n).unwrap().lenlex_succ(), bin_u64(n + 1).unwrap());
        }

        #[test]
        fn prefix_free_agrees_with_naive(
            v in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 0..5), 0..8)
        ) {
            let v: Vec<BitString> = v.into_iter().map(BitString::from_bits).collect();
            prop_assert_eq!(is_prefix_free(&v), naive_prefix_free(&v));
        }
    }
}
