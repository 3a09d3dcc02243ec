//! The five pseudo-Boolean benchmark families.
//!
//! Every family cuts `x` into `d/2` blocks and scores each block with a pair
//! of objectives (odd objective `2j-1`, even objective `2j` in 1-based terms).
//! COCZ is the exception: its first half is a shared bonus and only the
//! second half is cut into `d/2` blocks of length `n/d`.

mod front;

use std::fmt;
use std::str::FromStr;

use crate::bits::{BitString, BlockStats};
use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;

pub use front::DEFAULT_FRONT_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Lotz,
    Omm,
    Cocz,
    Ojzj,
    Rrmo,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Lotz,
        Family::Omm,
        Family::Cocz,
        Family::Ojzj,
        Family::Rrmo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Lotz => "LOTZ",
            Family::Omm => "OMM",
            Family::Cocz => "COCZ",
            Family::Ojzj => "OJZJ",
            Family::Rrmo => "RRMO",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Specification(format!("unknown benchmark family {s:?}")))
    }
}

/// A validated benchmark instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    family: Family,
    n: usize,
    d: usize,
    k: Option<usize>,
}

/// Region of the RRMO search space a string falls in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RrmoRegion {
    L,
    M,
    /// Every block is in `A ∪ B`; `k` lists the (0-based) blocks in `A`.
    N {
        k: Vec<usize>,
    },
    /// Outside `L ∪ M ∪ N`, where every objective is 0.
    Dead,
}

/// Per-block state of a Pareto-optimal OJZJ vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockSymbol {
    Zero,
    One,
    /// Block with ones count inside `[k, 2n/d - k]`.
    Interior,
}

impl fmt::Display for BlockSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockSymbol::Zero => "0",
            BlockSymbol::One => "1",
            BlockSymbol::Interior => "⊥",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockLabel(pub Vec<BlockSymbol>);

/// Size of a largest set of mutually incomparable fitness vectors, as far as
/// it is known in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncomparableBound {
    pub lower: Option<u128>,
    pub upper: u128,
    pub exact: bool,
}

impl ProblemSpec {
    pub fn new(family: Family, n: usize, d: usize, k: Option<usize>) -> Result<Self> {
        let spec_err = |msg: String| Err(Error::Specification(msg));
        if d < 2 || d % 2 != 0 {
            return spec_err(format!("d = {d} must be even and at least 2"));
        }
        if n == 0 {
            return spec_err("n must be positive".into());
        }
        let half = d / 2;
        match family {
            Family::Lotz | Family::Omm | Family::Ojzj if n % half != 0 => {
                return spec_err(format!(
                    "{family}: n = {n} is not divisible by d/2 = {half}"
                ));
            }
            Family::Cocz if n % d != 0 => {
                return spec_err(format!("COCZ: n = {n} is not divisible by d = {d}"));
            }
            Family::Rrmo if (2 * n) % (5 * d) != 0 => {
                return spec_err(format!("RRMO: n = {n} is not divisible by 5d/2"));
            }
            _ => {}
        }
        match (family, k) {
            (Family::Ojzj, None) => return spec_err("OJZJ needs a gap size k".into()),
            (Family::Ojzj, Some(k)) if k < 2 || k > 2 * n / d => {
                return spec_err(format!(
                    "OJZJ: k = {k} must satisfy 2 <= k <= 2n/d = {}",
                    2 * n / d
                ));
            }
            (Family::Ojzj, _) => {}
            (_, Some(_)) => return spec_err(format!("{family} takes no gap size k")),
            (_, None) => {}
        }
        Ok(Self { family, n, d, k })
    }

    pub fn lotz(n: usize, d: usize) -> Result<Self> {
        Self::new(Family::Lotz, n, d, None)
    }

    pub fn omm(n: usize, d: usize) -> Result<Self> {
        Self::new(Family::Omm, n, d, None)
    }

    pub fn cocz(n: usize, d: usize) -> Result<Self> {
        Self::new(Family::Cocz, n, d, None)
    }

    pub fn ojzj(n: usize, d: usize, k: usize) -> Result<Self> {
        Self::new(Family::Ojzj, n, d, Some(k))
    }

    pub fn rrmo(n: usize, d: usize) -> Result<Self> {
        Self::new(Family::Rrmo, n, d, None)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn blocks(&self) -> usize {
        self.d / 2
    }

    /// Length of one scored block: `n/d` for COCZ, `2n/d` otherwise.
    pub fn block_len(&self) -> usize {
        match self.family {
            Family::Cocz => self.n / self.d,
            _ => 2 * self.n / self.d,
        }
    }

    /// Largest value any objective can take.
    pub fn f_max(&self) -> u32 {
        let (n, d) = (self.n, self.d);
        let v = match self.family {
            Family::Lotz | Family::Omm => 2 * n / d,
            Family::Cocz => n / 2 + n / d,
            Family::Ojzj => self.gap() + 2 * n / d,
            Family::Rrmo => 2 * n / 5 + 2 * n / d,
        };
        v as u32
    }

    fn gap(&self) -> usize {
        self.k.unwrap_or(0)
    }

    fn check_len(&self, x: &BitString) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn block_stats<'a>(&'a self, x: &'a BitString) -> impl Iterator<Item = BlockStats> + 'a {
        let len = self.block_len();
        let offset = if self.family == Family::Cocz {
            self.n / 2
        } else {
            0
        };
        let bits = &x.as_slice()[offset..];
        (0..self.blocks()).map(move |b| BlockStats::of(&bits[b * len..(b + 1) * len]))
    }

    pub fn evaluate(&self, x: &BitString) -> Result<ObjectiveVector> {
        self.check_len(x)?;
        let mut out = Vec::with_capacity(self.d);
        match self.family {
            Family::Lotz => {
                for s in self.block_stats(x) {
                    out.extend([s.leading_ones, s.trailing_zeros]);
                }
            }
            Family::Omm => {
                for s in self.block_stats(x) {
                    out.extend([s.ones, s.zeros]);
                }
            }
            Family::Cocz => {
                let h = x.as_slice()[..self.n / 2].iter().filter(|&&b| b).count();
                for s in self.block_stats(x) {
                    out.extend([h + s.ones, h + s.zeros]);
                }
            }
            Family::Ojzj => {
                let (len, k) = (self.block_len(), self.gap());
                let jump = |c: usize| {
                    if c <= len - k || c == len {
                        k + c
                    } else {
                        len - c
                    }
                };
                for s in self.block_stats(x) {
                    out.extend([jump(s.ones), jump(s.zeros)]);
                }
            }
            Family::Rrmo => return Ok(self.evaluate_rrmo(x)),
        }
        Ok(ObjectiveVector::new(
            out.into_iter().map(|v| v as u32).collect(),
        ))
    }

    /// RRMO valley width `2n/(5d)`; the block thresholds are multiples of it
    /// (`6n/(5d) = 3u`, `8n/(5d) = 4u`).
    pub fn rrmo_unit(&self) -> usize {
        2 * self.n / (5 * self.d)
    }

    fn rrmo_in_b(&self, s: &BlockStats) -> bool {
        let u = self.rrmo_unit();
        s.ones == 3 * u && s.leading_zeros + s.trailing_zeros == 2 * u
    }

    fn rrmo_in_a(&self, s: &BlockStats) -> bool {
        let u = self.rrmo_unit();
        s.ones == 4 * u && s.leading_zeros + s.trailing_zeros == u
    }

    fn classify(&self, stats: &[BlockStats]) -> RrmoRegion {
        let q = 3 * self.rrmo_unit();
        if stats.iter().all(|s| s.ones <= q) && stats.iter().any(|s| s.ones < q) {
            return RrmoRegion::L;
        }
        if stats.iter().all(|s| s.ones == q) && stats.iter().any(|s| !self.rrmo_in_b(s)) {
            return RrmoRegion::M;
        }
        if stats.iter().all(|s| self.rrmo_in_a(s) || self.rrmo_in_b(s)) {
            let k = (0..stats.len())
                .filter(|&j| self.rrmo_in_a(&stats[j]))
                .collect();
            return RrmoRegion::N { k };
        }
        RrmoRegion::Dead
    }

    fn evaluate_rrmo(&self, x: &BitString) -> ObjectiveVector {
        let stats: Vec<BlockStats> = self.block_stats(x).collect();
        let region = self.classify(&stats);
        let bonus = match &region {
            RrmoRegion::N { k } => 4 * self.n * k.len() / (5 * self.d),
            _ => 0,
        };
        let mut out = Vec::with_capacity(self.d);
        for s in &stats {
            match region {
                RrmoRegion::L => out.extend([s.ones, s.ones]),
                RrmoRegion::M | RrmoRegion::N { .. } => out.extend([
                    bonus + s.ones + s.leading_zeros,
                    bonus + s.ones + s.trailing_zeros,
                ]),
                RrmoRegion::Dead => out.extend([0, 0]),
            }
        }
        ObjectiveVector::new(out.into_iter().map(|v| v as u32).collect())
    }

    /// RRMO region of `x`.
    pub fn rrmo_region(&self, x: &BitString) -> Result<RrmoRegion> {
        if self.family != Family::Rrmo {
            return Err(Error::Misuse(format!(
                "rrmo_region on a {} instance",
                self.family
            )));
        }
        self.check_len(x)?;
        let stats: Vec<BlockStats> = self.block_stats(x).collect();
        Ok(self.classify(&stats))
    }

    pub fn is_pareto_optimal(&self, x: &BitString) -> Result<bool> {
        self.check_len(x)?;
        let len = self.block_len();
        Ok(match self.family {
            Family::Lotz => self
                .block_stats(x)
                .all(|s| s.leading_ones + s.trailing_zeros == len),
            Family::Omm => true,
            Family::Cocz => x.as_slice()[..self.n / 2].iter().all(|&b| b),
            Family::Ojzj => {
                let k = self.gap();
                self.block_stats(x)
                    .all(|s| s.ones == 0 || s.ones == len || (s.ones >= k && s.ones + k <= len))
            }
            Family::Rrmo => {
                let stats: Vec<BlockStats> = self.block_stats(x).collect();
                stats.iter().all(|s| self.rrmo_in_a(s))
            }
        })
    }

    /// Whether a fitness vector lies on the Pareto front.
    pub fn is_front_vector(&self, v: &ObjectiveVector) -> bool {
        if v.dim() != self.d {
            return false;
        }
        let pairs = front::block_pairs(self);
        v.values()
            .chunks(2)
            .all(|c| pairs.iter().any(|&(a, b)| a == c[0] && b == c[1]))
    }

    /// Block label of a Pareto-optimal OJZJ vector. Only the odd coordinates
    /// are read; each must be `k`, `2n/d + k` or lie in `[2k, 2n/d]`.
    pub fn block_label(&self, v: &ObjectiveVector) -> Result<BlockLabel> {
        if self.family != Family::Ojzj {
            return Err(Error::Misuse(format!(
                "block_label on a {} instance",
                self.family
            )));
        }
        if v.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: v.dim(),
            });
        }
        let (len, k) = (self.block_len() as u32, self.gap() as u32);
        v.values()
            .iter()
            .step_by(2)
            .map(|&a| {
                if a == len + k {
                    Ok(BlockSymbol::One)
                } else if a == k {
                    Ok(BlockSymbol::Zero)
                } else if 2 * k <= a && a <= len {
                    Ok(BlockSymbol::Interior)
                } else {
                    Err(Error::Domain(format!(
                        "{v} is not a Pareto-optimal OJZJ vector"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(BlockLabel)
    }

    pub fn incomparable_set_bound(&self) -> IncomparableBound {
        let (n, d) = (self.n as u128, self.d as u128);
        let half = (self.d / 2) as u32;
        let side = 2 * n / d + 1;
        let exact = |v: u128| IncomparableBound {
            lower: Some(v),
            upper: v,
            exact: true,
        };
        match self.family {
            Family::Lotz if self.d == 2 => exact(n + 1),
            Family::Lotz => {
                let upper = side.pow(self.d as u32 - 1);
                let lower = upper / (4 * (d - 2).pow(half - 1));
                IncomparableBound {
                    lower: Some(lower),
                    upper,
                    exact: false,
                }
            }
            Family::Omm => exact(side.pow(half)),
            Family::Cocz => exact((n / d + 1).pow(half)),
            Family::Ojzj => IncomparableBound {
                lower: Some(self.front_size()),
                upper: side.pow(half),
                exact: false,
            },
            Family::Rrmo => IncomparableBound {
                lower: None,
                upper: (4 * n / (5 * d) + 1).pow(self.d as u32 - 1),
                exact: false,
            },
        }
    }

    /// Upper bound on the incomparable-set size as a machine integer.
    pub fn s_upper(&self) -> usize {
        usize::try_from(self.incomparable_set_bound().upper).unwrap_or(usize::MAX)
    }

    pub fn front_size(&self) -> u128 {
        front::front_size(self)
    }

    /// All Pareto-front vectors, in odometer order over the blocks.
    pub fn enumerate_front(&self) -> Result<Vec<ObjectiveVector>> {
        front::enumerate(self, DEFAULT_FRONT_CAP)
    }

    pub fn enumerate_front_with_cap(&self, cap: u128) -> Result<Vec<ObjectiveVector>> {
        front::enumerate(self, cap)
    }

    /// One genotype mapping to the front vector `v`.
    pub fn canonical_preimage(&self, v: &ObjectiveVector) -> Result<BitString> {
        front::canonical_preimage(self, v)
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}(n={}", self.d, self.family, self.n)?;
        if let Some(k) = self.k {
            write!(f, ", k={k}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn ov(v: &[u32]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec())
    }

    #[test]
    fn hand_evaluations() {
        let lotz2 = ProblemSpec::lotz(4, 2).unwrap();
        assert_eq!(lotz2.evaluate(&bs("1100")).unwrap(), ov(&[2, 2]));
        let lotz4 = ProblemSpec::lotz(8, 4).unwrap();
        assert_eq!(lotz4.evaluate(&bs("1010 0110")).unwrap(), ov(&[1, 1, 0, 1]));
        let omm = ProblemSpec::omm(5, 2).unwrap();
        assert_eq!(omm.evaluate(&bs("10110")).unwrap(), ov(&[3, 2]));
        let cocz = ProblemSpec::cocz(4, 2).unwrap();
        assert_eq!(cocz.evaluate(&bs("1101")).unwrap(), ov(&[3, 3]));
        let ojzj = ProblemSpec::ojzj(6, 2, 2).unwrap();
        assert_eq!(ojzj.evaluate(&bs("111111")).unwrap(), ov(&[8, 2]));
        assert_eq!(ojzj.evaluate(&bs("111011")).unwrap(), ov(&[1, 3]));
        let rrmo = ProblemSpec::rrmo(10, 2).unwrap();
        assert_eq!(rrmo.evaluate(&bs("0011111100")).unwrap(), ov(&[8, 8]));
        assert_eq!(rrmo.evaluate(&bs("0111111110")).unwrap(), ov(&[13, 13]));
        assert_eq!(rrmo.evaluate(&bs("0000000000")).unwrap(), ov(&[0, 0]));
    }

    #[test]
    fn rrmo_regions() {
        let rrmo = ProblemSpec::rrmo(10, 2).unwrap();
        assert_eq!(
            rrmo.rrmo_region(&bs("0011111100")).unwrap(),
            RrmoRegion::N { k: vec![] }
        );
        assert_eq!(rrmo.rrmo_region(&bs("0000000000")).unwrap(), RrmoRegion::L);
        // six ones, LZ + TZ = 3
        assert_eq!(rrmo.rrmo_region(&bs("0111110100")).unwrap(), RrmoRegion::M);
        assert_eq!(
            rrmo.rrmo_region(&bs("1111111000")).unwrap(),
            RrmoRegion::Dead
        );
        assert_eq!(rrmo.evaluate(&bs("1111111000")).unwrap(), ov(&[0, 0]));
        assert_eq!(
            rrmo.rrmo_region(&bs("1111111100")).unwrap(),
            RrmoRegion::N { k: vec![0] }
        );
    }

    #[test]
    fn f_max_per_family() {
        assert_eq!(ProblemSpec::lotz(20, 2).unwrap().f_max(), 20);
        assert_eq!(ProblemSpec::omm(16, 4).unwrap().f_max(), 8);
        assert_eq!(ProblemSpec::cocz(16, 4).unwrap().f_max(), 12);
        assert_eq!(ProblemSpec::ojzj(10, 2, 2).unwrap().f_max(), 12);
        assert_eq!(ProblemSpec::rrmo(20, 2).unwrap().f_max(), 28);
    }

    #[test]
    fn constraint_violations() {
        assert!(ProblemSpec::lotz(5, 4).is_err());
        assert!(ProblemSpec::lotz(6, 3).is_err());
        assert!(ProblemSpec::cocz(6, 4).is_err());
        assert!(ProblemSpec::rrmo(12, 2).is_err());
        assert!(ProblemSpec::ojzj(6, 2, 1).is_err());
        assert!(ProblemSpec::ojzj(6, 2, 7).is_err());
        assert!(ProblemSpec::new(Family::Omm, 6, 2, Some(2)).is_err());
        let err = ProblemSpec::cocz(6, 4).unwrap_err();
        assert!(err.to_string().contains("divisible"), "{err}");
        let omm = ProblemSpec::omm(4, 2).unwrap();
        assert!(matches!(
            omm.evaluate(&bs("101")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pareto_membership_examples() {
        let omm = ProblemSpec::omm(7, 2).unwrap();
        assert!(omm.is_pareto_optimal(&bs("1011001")).unwrap());
        let lotz = ProblemSpec::lotz(4, 2).unwrap();
        assert!(lotz.is_pareto_optimal(&bs("1100")).unwrap());
        assert!(!lotz.is_pareto_optimal(&bs("1010")).unwrap());
        let ojzj = ProblemSpec::ojzj(6, 2, 2).unwrap();
        assert!(!ojzj.is_pareto_optimal(&bs("111011")).unwrap());
        assert!(ojzj.is_pareto_optimal(&bs("111000")).unwrap());
    }

    #[test]
    fn block_labels() {
        let ojzj = ProblemSpec::ojzj(6, 2, 2).unwrap();
        assert_eq!(
            ojzj.block_label(&ov(&[8, 2])).unwrap().0,
            vec![BlockSymbol::One]
        );
        assert_eq!(
            ojzj.block_label(&ov(&[4, 4])).unwrap().0,
            vec![BlockSymbol::Interior]
        );
        assert!(matches!(
            ojzj.block_label(&ov(&[3, 5])),
            Err(Error::Domain(_))
        ));
        let ojzj4 = ProblemSpec::ojzj(12, 4, 2).unwrap();
        assert_eq!(
            ojzj4.block_label(&ov(&[2, 10, 8, 4])).unwrap().0,
            vec![BlockSymbol::Zero, BlockSymbol::One]
        );
    }

    #[test]
    fn incomparable_bounds() {
        let b = ProblemSpec::lotz(30, 2).unwrap().incomparable_set_bound();
        assert_eq!((b.lower, b.upper, b.exact), (Some(31), 31, true));
        let b = ProblemSpec::cocz(16, 4).unwrap().incomparable_set_bound();
        assert_eq!((b.upper, b.exact), (25, true));
        let b = ProblemSpec::lotz(16, 4).unwrap().incomparable_set_bound();
        assert_eq!((b.lower, b.upper, b.exact), (Some(91), 729, false));
        let b = ProblemSpec::omm(20, 2).unwrap().incomparable_set_bound();
        assert_eq!((b.upper, b.exact), (21, true));
        let b = ProblemSpec::rrmo(20, 2).unwrap().incomparable_set_bound();
        assert_eq!((b.lower, b.upper), (None, 9));
        let b = ProblemSpec::ojzj(20, 2, 4)
            .unwrap()
            .incomparable_set_bound();
        assert_eq!((b.lower, b.upper, b.exact), (Some(15), 21, false));
    }

    #[test]
    fn family_parse_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_eq!("omm".parse::<Family>().unwrap(), Family::Omm);
        assert!("ZDT1".parse::<Family>().is_err());
    }
}
