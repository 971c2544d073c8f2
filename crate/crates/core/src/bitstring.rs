//! Packed binary strings.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// A string over {0,1}, packed 64 symbols per word.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    /// `n` zero bits.
    pub fn zeros(n: usize) -> Self {
        BitString {
            words: vec![0; n.div_ceil(64)],
            len: n,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    pub fn extend_from(&mut self, other: &BitString) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| (self.words[i / 64] >> (i % 64)) & 1 == 1)
    }

    /// Unpacked symbols (0 or 1 per byte), the form the DP engines consume.
    pub fn to_symbols(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn from_symbols(symbols: &[u8]) -> Self {
        symbols.iter().map(|&s| s != 0).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of differing positions. Panics on unequal lengths.
    pub fn hamming(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "hamming distance needs equal lengths");
        // bits past `len` are always zero, so whole-word xor is exact
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Bitwise complement.
    pub fn complement(&self) -> Self {
        self.iter().map(|b| !b).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut out = BitString::with_capacity(self.len);
        for i in (0..self.len).rev() {
            out.push(self.get(i));
        }
        out
    }

    /// Uniformly random bits of length `n`, reproducible from `seed`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let mut words: Vec<u64> = (0..n.div_ceil(64)).map(|_| rng.random()).collect();
        if !n.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
        BitString { words, len: n }
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = BitString::new();
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses ASCII `0`/`1` text. Surrounding whitespace (e.g. a trailing
    /// newline) is ignored; any other character is rejected.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim();
        let mut out = BitString::with_capacity(body.len());
        for (i, c) in body.bytes().enumerate() {
            match c {
                b'0' => out.push(false),
                b'1' => out.push(true),
                other => {
                    return Err(Error::Parse(format!(
                        "unexpected byte {:?} at offset {i} in bit string",
                        other as char
                    )))
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let b: BitString = "0110\n".parse().unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.to_string(), "0110");
        assert!(!b.get(0) && b.get(1) && b.get(2) && !b.get(3));
        assert!("01a".parse::<BitString>().is_err());
        assert!("".parse::<BitString>().unwrap().is_empty());
    }

    #[test]
    fn push_across_word_boundary() {
        let mut b = BitString::new();
        for i in 0..130 {
            b.push(i % 3 == 0);
        }
        assert_eq!(b.len(), 130);
        assert_eq!(b.count_ones(), (0..130).filter(|i| i % 3 == 0).count());
        assert!(b.get(129));
    }

    #[test]
    fn random_is_deterministic_and_masked() {
        let a = BitString::random(100, 9);
        assert_eq!(a, BitString::random(100, 9));
        assert_ne!(a, BitString::random(100, 10));
        assert_eq!(a.count_ones(), a.iter().filter(|&b| b).count());
    }

    #[test]
    fn hamming_and_complement() {
        let a = BitString::random(200, 1);
        assert_eq!(a.hamming(&a), 0);
        assert_eq!(a.hamming(&a.complement()), 200);
        assert_eq!(a.reversed().reversed(), a);
    }
}
