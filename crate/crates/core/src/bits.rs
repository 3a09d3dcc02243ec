//! Fixed-length bit strings and the per-block run statistics the benchmarks
//! are built from.
//!
//! Positions are 0-based in the API: bit `i` here is bit `i + 1` in the usual
//! mathematical write-up of `x = (x_1, …, x_n)`, and block `b` is `x^{b+1}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::RandomSource;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            bits: vec![true; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Uniform random string; consumes `n` draws (one `one_in(2)` per position).
    pub fn random(n: usize, rng: &mut RandomSource) -> Self {
        Self {
            bits: (0..n).map(|_| rng.one_in(2)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Number of positions where `self` and `other` differ.
    pub fn hamming(&self, other: &BitString) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Block `index` of length `block_len`.
    pub fn block(&self, index: usize, block_len: usize) -> &[bool] {
        &self.bits[index * block_len..(index + 1) * block_len]
    }

    /// Hex row: the string is read as a big-endian binary number padded on
    /// the left to a multiple of four bits, i.e. the first hex digit carries
    /// the first `n mod 4` (or 4) positions.
    pub fn to_hex(&self) -> String {
        let n = self.bits.len();
        if n == 0 {
            return String::new();
        }
        let pad = (4 - n % 4) % 4;
        let mut out = String::with_capacity((n + pad) / 4);
        let mut nibble = 0u8;
        let mut filled = pad;
        for &b in &self.bits {
            nibble = (nibble << 1) | u8::from(b);
            filled += 1;
            if filled == 4 {
                out.push(char::from_digit(u32::from(nibble), 16).unwrap());
                nibble = 0;
                filled = 0;
            }
        }
        out
    }

    /// Inverse of [`to_hex`](Self::to_hex) for a string of length `n`.
    pub fn from_hex(hex: &str, n: usize) -> Result<Self> {
        let pad = (4 - n % 4) % 4;
        if hex.len() * 4 != n + pad {
            return Err(Error::Domain(format!(
                "hex row of {} digits cannot hold {n} bits",
                hex.len()
            )));
        }
        let mut bits = Vec::with_capacity(n);
        for (i, c) in hex.chars().enumerate() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::Domain(format!("invalid hex digit {c:?}")))?;
            for shift in (0..4).rev() {
                let pos = i * 4 + (3 - shift);
                let bit = (v >> shift) & 1 == 1;
                if pos < pad {
                    if bit {
                        return Err(Error::Domain("non-zero padding bit in hex row".into()));
                    }
                } else {
                    bits.push(bit);
                }
            }
        }
        Ok(Self { bits })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Parses `0`/`1` characters; spaces and underscores are ignored so blocks
/// can be written apart (`"1010 0110"`).
impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '_'))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { bits })
    }
}

/// Run statistics of one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct BlockStats {
    pub ones: usize,
    pub zeros: usize,
    /// Longest all-ones prefix.
    pub leading_ones: usize,
    /// Longest all-zeros suffix.
    pub trailing_zeros: usize,
    /// Longest all-zeros prefix.
    pub leading_zeros: usize,
    /// Longest all-ones suffix.
    pub trailing_ones: usize,
}

impl BlockStats {
    pub fn of(block: &[bool]) -> Self {
        let ones = block.iter().filter(|&&b| b).count();
        let leading_ones = block.iter().take_while(|&&b| b).count();
        let leading_zeros = block.iter().take_while(|&&b| !b).count();
        let trailing_zeros = block.iter().rev().take_while(|&&b| !b).count();
        let trailing_ones = block.iter().rev().take_while(|&&b| b).count();
        Self {
            ones,
            zeros: block.len() - ones,
            leading_ones,
            trailing_zeros,
            leading_zeros,
            trailing_ones,
        }
    }
}

/// Statistics of block `block` (0-based) when `x` is cut into consecutive
/// blocks of `block_len` bits.
pub fn block_stats(x: &BitString, block: usize, block_len: usize) -> Result<BlockStats> {
    if block_len == 0 || x.len() % block_len != 0 {
        return Err(Error::Specification(format!(
            "length {} is not divisible into blocks of {block_len}",
            x.len()
        )));
    }
    let blocks = x.len() / block_len;
    if block >= blocks {
        return Err(Error::BlockIndex { block, blocks });
    }
    Ok(BlockStats::of(x.block(block, block_len)))
}

/// Standard bit mutation: every position flips independently with
/// probability `1/n`. Exactly `n` draws are consumed, one per position in
/// order, whether or not anything flips.
pub fn standard_bit_mutation(x: &BitString, rng: &mut RandomSource) -> BitString {
    let n = x.len();
    let bits = x.bits.iter().map(|&b| b ^ rng.one_in(n)).collect();
    BitString { bits }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn worked_example_lz_tz() {
        let x = bs("00110110110000");
        let s = block_stats(&x, 0, 14).unwrap();
        assert_eq!(s.leading_zeros, 2);
        assert_eq!(s.trailing_zeros, 4);
    }

    #[test]
    fn all_ones_block() {
        let s = BlockStats::of(bs("1111").as_slice());
        assert_eq!((s.leading_ones, s.trailing_zeros, s.ones), (4, 0, 4));
        assert_eq!(s.trailing_ones, 4);
    }

    #[test]
    fn one_one_zero_zero() {
        let s = BlockStats::of(bs("1100").as_slice());
        assert_eq!((s.leading_ones, s.trailing_zeros), (2, 2));
        assert_eq!((s.leading_zeros, s.trailing_ones), (0, 0));
    }

    #[test]
    fn block_index_errors() {
        let x = bs("10101010");
        assert_eq!(
            block_stats(&x, 2, 4),
            Err(Error::BlockIndex {
                block: 2,
                blocks: 2
            })
        );
        assert!(matches!(
            block_stats(&x, 0, 3),
            Err(Error::Specification(_))
        ));
        assert_eq!(block_stats(&x, 1, 4).unwrap().ones, 2);
    }

    #[test]
    fn hex_roundtrip_odd_lengths() {
        let mut rng = RandomSource::new(11);
        for n in [1, 3, 4, 5, 14, 64, 81] {
            let x = BitString::random(n, &mut rng);
            let hex = x.to_hex();
            assert_eq!(BitString::from_hex(&hex, n).unwrap(), x, "n = {n}");
        }
        assert_eq!(bs("10001").to_hex(), "11");
        assert!(BitString::from_hex("ff", 5).is_err());
    }

    #[test]
    fn mutation_of_single_bit_always_flips() {
        let mut rng = RandomSource::new(0);
        let x = bs("0");
        for _ in 0..100 {
            assert_eq!(standard_bit_mutation(&x, &mut rng), bs("1"));
        }
    }

    #[test]
    fn mutation_consumes_exactly_n_draws() {
        let mut rng = RandomSource::new(8);
        let x = BitString::zeros(50);
        for call in 1..=20u64 {
            standard_bit_mutation(&x, &mut rng);
            assert_eq!(rng.draws(), 50 * call);
        }
    }

    #[test]
    fn mutation_flip_count_mean_near_one() {
        let mut rng = RandomSource::new(2024);
        let x = BitString::zeros(50);
        let trials = 100_000;
        let mut flips = 0usize;
        let mut unchanged = 0usize;
        for _ in 0..trials {
            let y = standard_bit_mutation(&x, &mut rng);
            let f = y.count_ones();
            flips += f;
            unchanged += usize::from(f == 0);
        }
        let mean = flips as f64 / trials as f64;
        assert!((mean - 1.0).abs() <= 0.05, "mean flips {mean}");
        let p0 = unchanged as f64 / trials as f64;
        let expect = (1.0 - 1.0 / 50.0f64).powi(50);
        assert!((p0 - expect).abs() < 0.01, "{p0} vs {expect}");
    }

    #[test]
    fn zero_flip_probability_bracket() {
        for n in 2..200 {
            let q = (1.0 - 1.0 / n as f64).powi(n);
            assert!((0.25..=1.0 / std::f64::consts::E).contains(&q));
        }
    }

    #[test]
    fn mutation_is_pure_in_seed_and_call_index() {
        let x = bs("1010101010101010");
        let run = |seed| {
            let mut rng = RandomSource::new(seed);
            (0..5)
                .map(|_| standard_bit_mutation(&x, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(77), run(77));
    }
}
