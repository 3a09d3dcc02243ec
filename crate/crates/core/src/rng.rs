//! Seeded randomness shared by every stochastic component.
//!
//! The generator is xoshiro256++ (Blackman & Vigna), seeded from a single
//! `u64` through SplitMix64 exactly as `rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`
//! does. Every primitive below consumes a documented number of raw 64-bit
//! draws, so a run can be replayed in any language that implements the same
//! generator:
//!
//! * [`RandomSource::one_in`] consumes exactly one draw.
//! * [`RandomSource::below`] is Lemire's multiply-shift with rejection; it
//!   consumes one draw except on the (rare) rejection path.
//! * [`RandomSource::unit_f64`] consumes one draw (top 53 bits).
//!
//! A source also counts the raw draws it has handed out. Seed plus counter is
//! a complete description of the stream position, which is what engine
//! snapshots persist.

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function applied to `x + γ`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `index` in a sweep driven by `master`:
/// `splitmix64(master ^ splitmix64(index))`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    draws: u64,
    inner: Xoshiro256PlusPlus,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            draws: 0,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Re-creates the stream position reached after `draws` raw draws.
    pub fn resume(seed: u64, draws: u64) -> Self {
        let mut rng = Self::new(seed);
        for _ in 0..draws {
            rng.next_u64();
        }
        rng
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of raw 64-bit draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    /// Uniform integer in `0..bound`.
    ///
    /// # Panics
    /// If `bound == 0`.
    #[inline]
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "below(0)");
        let bound = bound as u64;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            let low = m as u64;
            if low < bound {
                let threshold = bound.wrapping_neg() % bound;
                if low < threshold {
                    continue;
                }
            }
            return (m >> 64) as usize;
        }
    }

    /// `true` with probability `1/n` (exactly one draw; always `true` for `n = 1`).
    #[inline]
    pub fn one_in(&mut self, n: usize) -> bool {
        debug_assert!(n > 0);
        (u128::from(self.next_u64()) * n as u128) >> 64 == 0
    }

    /// Uniform `f64` in `[0, 1)`.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Chooses `k` of `0..n` uniformly without replacement (partial
    /// Fisher–Yates, `k` calls to [`below`](Self::below)). Returns the chosen
    /// indices and the complement, both in ascending order.
    pub fn split_without_replacement(&mut self, n: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
        assert!(k <= n);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        let mut rest = idx.split_off(k);
        idx.sort_unstable();
        rest.sort_unstable();
        (idx, rest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RandomSource::new(7);
        let mut b = RandomSource::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_eq!(a.draws(), 100);
    }

    #[test]
    fn resume_matches_live_stream() {
        let mut live = RandomSource::new(99);
        for _ in 0..37 {
            live.below(13);
        }
        let mut resumed = RandomSource::resume(99, live.draws());
        assert_eq!(live.next_u64(), resumed.next_u64());
    }

    #[test]
    fn one_in_one_always_true() {
        let mut rng = RandomSource::new(1);
        assert!((0..1000).all(|_| rng.one_in(1)));
        assert_eq!(rng.draws(), 1000);
    }

    #[test]
    fn below_stays_in_range_and_covers() {
        let mut rng = RandomSource::new(3);
        let mut seen = [0usize; 7];
        for _ in 0..7000 {
            seen[rng.below(7)] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800 && c < 1200), "{seen:?}");
    }

    #[test]
    fn split_is_a_partition() {
        let mut rng = RandomSource::new(5);
        let (a, b) = rng.split_without_replacement(10, 6);
        assert_eq!(a.len(), 6);
        assert_eq!(b.len(), 4);
        let mut all: Vec<_> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn child_seeds_differ() {
        let seeds: std::collections::HashSet<_> = (0..1000).map(|r| child_seed(42, r)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
