//! Pareto-front enumeration and canonical preimages.
//!
//! Every front is a cartesian product over blocks of per-block value pairs,
//! so enumeration is an odometer over one small list.

use super::{Family, ProblemSpec};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;

pub const DEFAULT_FRONT_CAP: u128 = 1_000_000;

/// The Pareto-optimal `(odd, even)` value pairs one block can contribute.
pub(super) fn block_pairs(spec: &ProblemSpec) -> Vec<(u32, u32)> {
    let len = spec.block_len() as u32;
    let n = spec.n() as u32;
    let d = spec.d() as u32;
    match spec.family() {
        Family::Lotz | Family::Omm => (0..=len).map(|i| (i, len - i)).collect(),
        Family::Cocz => (0..=len).map(|a| (n / 2 + a, n / 2 + len - a)).collect(),
        Family::Ojzj => {
            let k = spec.k().unwrap_or(0) as u32;
            std::iter::once(k)
                .chain(2 * k..=len)
                .chain(std::iter::once(len + k))
                .map(|a| (a, 2 * k + len - a))
                .collect()
        }
        Family::Rrmo => {
            let w = spec.rrmo_unit() as u32;
            let base = 2 * n / 5 + 8 * n / (5 * d);
            (0..=w).map(|l| (base + l, base + w - l)).collect()
        }
    }
}

pub(super) fn front_size(spec: &ProblemSpec) -> u128 {
    let per_block = block_pairs(spec).len() as u128;
    per_block.saturating_pow(spec.blocks() as u32)
}

pub(super) fn enumerate(spec: &ProblemSpec, cap: u128) -> Result<Vec<ObjectiveVector>> {
    let size = front_size(spec);
    if size > cap {
        return Err(Error::EnumerationTooLarge { size, cap });
    }
    let pairs = block_pairs(spec);
    let blocks = spec.blocks();
    let mut digits = vec![0usize; blocks];
    let mut out = Vec::with_capacity(size as usize);
    loop {
        let v = digits
            .iter()
            .flat_map(|&i| [pairs[i].0, pairs[i].1])
            .collect::<Vec<_>>();
        out.push(ObjectiveVector::new(v));
        // last block varies fastest
        let mut pos = blocks;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < pairs.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn fill(bits: &mut Vec<bool>, value: bool, count: usize) {
    bits.extend(std::iter::repeat(value).take(count));
}

pub(super) fn canonical_preimage(spec: &ProblemSpec, v: &ObjectiveVector) -> Result<BitString> {
    if v.dim() != spec.d() {
        return Err(Error::DimensionMismatch {
            expected: spec.d(),
            actual: v.dim(),
        });
    }
    if !spec.is_front_vector(v) {
        return Err(Error::Domain(format!(
            "{v} is not on the Pareto front of {spec}"
        )));
    }
    let len = spec.block_len();
    let n = spec.n();
    let mut bits = Vec::with_capacity(n);
    if spec.family() == Family::Cocz {
        fill(&mut bits, true, n / 2);
    }
    for pair in v.values().chunks(2) {
        let odd = pair[0] as usize;
        match spec.family() {
            Family::Lotz | Family::Omm => {
                fill(&mut bits, true, odd);
                fill(&mut bits, false, len - odd);
            }
            Family::Cocz => {
                let a = odd - n / 2;
                fill(&mut bits, true, a);
                fill(&mut bits, false, len - a);
            }
            Family::Ojzj => {
                let k = spec.k().unwrap_or(0);
                let ones = if odd == len + k { len } else { odd - k };
                fill(&mut bits, true, ones);
                fill(&mut bits, false, len - ones);
            }
            Family::Rrmo => {
                let d = spec.d();
                let lz = odd - (2 * n / 5 + 8 * n / (5 * d));
                let tz = spec.rrmo_unit() - lz;
                fill(&mut bits, false, lz);
                fill(&mut bits, true, 8 * n / (5 * d));
                fill(&mut bits, false, tz);
            }
        }
    }
    Ok(BitString::from_bits(bits))
}
