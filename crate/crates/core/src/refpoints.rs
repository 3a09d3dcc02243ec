//! The simplex lattice of reference directions and nearest-direction
//! association.
//!
//! A point is an integer tuple `(a_1, …, a_d)` with `Σ a_i = p`, standing for
//! the direction `a / p`. Points are stored in lexicographic order (first
//! coordinate ascending), and a point's index in that order is its canonical
//! index. Ties in association always go to the lowest canonical index.
//!
//! Association compares the squared residual `Σ (v_i - t a_i)²` with
//! `t = (v·a)/(a·a)`, i.e. the squared distance from `v` to the line through
//! the origin and `a`. The oracle and the accelerated search evaluate exactly
//! the same expression, so they agree bit for bit.

use crate::benchmarks::ProblemSpec;
use crate::error::{Error, Result};

/// Default limit on the number of lattice points.
pub const DEFAULT_POINT_CAP: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Association {
    pub index: usize,
    /// Perpendicular distance from `v` to the reference line.
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct ReferencePointSet {
    p: u32,
    d: usize,
    coords: Vec<u32>,
}

/// `C(n, k)` in `u128`, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(u128::from(n - i)) {
            Some(v) => v / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of lattice points `C(p + d - 1, d - 1)`.
pub fn point_count(p: u32, d: usize) -> u128 {
    binomial(u64::from(p) + d as u64 - 1, d as u64 - 1)
}

fn residual(v: &[f64], a: &[u32]) -> f64 {
    let mut va = 0.0;
    let mut aa = 0.0;
    for (&x, &y) in v.iter().zip(a) {
        let y = f64::from(y);
        va += x * y;
        aa += y * y;
    }
    let t = va / aa;
    v.iter()
        .zip(a)
        .map(|(&x, &y)| {
            let r = x - t * f64::from(y);
            r * r
        })
        .sum()
}

fn check_query(v: &[f64], d: usize) -> Result<bool> {
    if v.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: v.len(),
        });
    }
    if let Some(x) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!(
            "normalized component {x} is negative or not finite"
        )));
    }
    Ok(v.iter().all(|&x| x == 0.0))
}

/// Perpendicular distance from `v` to the line through the origin and `r`.
pub fn perp_distance(v: &[f64], r: &[f64]) -> Result<f64> {
    if v.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: r.len(),
            actual: v.len(),
        });
    }
    let rr: f64 = r.iter().map(|x| x * x).sum();
    if rr == 0.0 {
        return Err(Error::Domain("zero reference direction".into()));
    }
    let t = v.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / rr;
    Ok(v.iter()
        .zip(r)
        .map(|(a, b)| (a - t * b).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Smallest integer `p` with `p ≥ sqrt(x)`.
fn ceil_sqrt(x: u128) -> u32 {
    let mut r = (x as f64).sqrt() as u128;
    while r * r < x {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= x {
        r -= 1;
    }
    r as u32
}

/// Smallest `p` with `p ≥ 2 d^{3/2} f_max`, the divisions needed for distinct
/// first-layer fitness vectors to land on distinct reference points.
pub fn required_p(spec: &ProblemSpec) -> u32 {
    let d = spec.d() as u128;
    let f = u128::from(spec.f_max());
    ceil_sqrt(4 * d * d * d * f * f)
}

/// Smallest `p` with `p ≥ 4 n sqrt(d)`.
pub fn theorem_p(spec: &ProblemSpec) -> u32 {
    let (n, d) = (spec.n() as u128, spec.d() as u128);
    ceil_sqrt(16 * n * n * d)
}

impl ReferencePointSet {
    pub fn generate(p: u32, d: usize) -> Result<Self> {
        Self::generate_with_cap(p, d, DEFAULT_POINT_CAP)
    }

    pub fn generate_with_cap(p: u32, d: usize, cap: u128) -> Result<Self> {
        if p < 1 || d < 2 {
            return Err(Error::Domain(format!(
                "reference set needs p >= 1 and d >= 2, got p = {p}, d = {d}"
            )));
        }
        let count = point_count(p, d);
        if count > cap {
            return Err(Error::TooManyPoints { count, cap });
        }
        let mut coords = Vec::with_capacity(count as usize * d);
        let mut current = vec![0u32; d];
        Self::fill(&mut coords, &mut current, 0, p);
        debug_assert_eq!(coords.len() as u128, count * d as u128);
        Ok(Self { p, d, coords })
    }

    fn fill(out: &mut Vec<u32>, current: &mut [u32], pos: usize, rest: u32) {
        if pos + 1 == current.len() {
            current[pos] = rest;
            out.extend_from_slice(current);
            return;
        }
        for a in 0..=rest {
            current[pos] = a;
            Self::fill(out, current, pos + 1, rest - a);
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Integer tuple of point `index`.
    pub fn point(&self, index: usize) -> &[u32] {
        &self.coords[index * self.d..(index + 1) * self.d]
    }

    /// The direction `a / p` of point `index`.
    pub fn direction(&self, index: usize) -> Vec<f64> {
        let p = f64::from(self.p);
        self.point(index)
            .iter()
            .map(|&a| f64::from(a) / p)
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.coords.chunks_exact(self.d)
    }

    /// Canonical index of a tuple summing to `p`.
    pub fn index_of(&self, a: &[u32]) -> Result<usize> {
        if a.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: a.len(),
            });
        }
        if a.iter().map(|&x| u64::from(x)).sum::<u64>() != u64::from(self.p) {
            return Err(Error::Domain(format!(
                "tuple {a:?} does not sum to {}",
                self.p
            )));
        }
        Ok(self.rank(a))
    }

    // Tuples before `a`: at each position, those sharing the prefix with a
    // smaller entry there. With remaining sum s and m coordinates after this
    // one, entries below `lo` account for C(s+m, m) - C(s-lo+m, m) tuples.
    fn rank(&self, a: &[u32]) -> usize {
        let mut s = u64::from(self.p);
        let mut idx: u128 = 0;
        for (i, &lo) in a.iter().enumerate().take(self.d - 1) {
            let m = (self.d - i - 1) as u64;
            let lo = u64::from(lo);
            idx += binomial(s + m, m) - binomial(s - lo + m, m);
            s -= lo;
        }
        idx as usize
    }

    /// Exact association by scanning every point.
    pub fn associate_oracle(&self, v: &[f64]) -> Result<Association> {
        if check_query(v, self.d)? {
            return Ok(Association {
                index: 0,
                distance: 0.0,
            });
        }
        let mut best = (f64::INFINITY, 0usize);
        for (i, a) in self.iter().enumerate() {
            let r = residual(v, a);
            if r < best.0 {
                best = (r, i);
            }
        }
        Ok(Association {
            index: best.1,
            distance: best.0.sqrt(),
        })
    }

    /// Same result as [`associate_oracle`](Self::associate_oracle), found by
    /// searching a box around the lattice point nearest to `v` scaled onto
    /// the simplex.
    ///
    /// Let `b = p v / Σv` and `c` its rounding. If the best point `a*` makes
    /// an angle θ* ≤ θ_c with `v`, then `a* = s b + w` with
    /// `|w|₂ ≤ |a*| sin θ* ≤ p sin θ_c` and `Σw = (1 - s) p`, which gives
    /// `|a* - b|∞ ≤ (1 + √d) p sin θ_c` and so
    /// `|a* - c|∞ ≤ (1 + √d) p sin θ_c + 1`. That is the search radius.
    /// With the floor-and-distribute rounding `sin θ_c ≤ d/p`, so the radius
    /// never exceeds `(1 + √d) d + 1`; in practice it is one or two steps.
    pub fn associate(&self, v: &[f64]) -> Result<Association> {
        if check_query(v, self.d)? {
            return Ok(Association {
                index: 0,
                distance: 0.0,
            });
        }
        let d = self.d;
        let p = self.p;
        let sum: f64 = v.iter().sum();
        let b: Vec<f64> = v.iter().map(|&x| x / sum * f64::from(p)).collect();
        let mut c: Vec<u32> = b.iter().map(|&x| (x.floor() as u32).min(p)).collect();
        let mut used: u32 = c.iter().sum();
        // Hand the remaining units to the largest fractional parts.
        if used < p {
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&i, &j| {
                let fi = b[i] - f64::from(c[i]);
                let fj = b[j] - f64::from(c[j]);
                fj.total_cmp(&fi).then(i.cmp(&j))
            });
            for &i in order.iter().cycle() {
                if used == p {
                    break;
                }
                c[i] += 1;
                used += 1;
            }
        }
        while used > p {
            // floating error can overshoot by a unit
            let i = (0..d).max_by_key(|&i| c[i]).unwrap();
            c[i] -= 1;
            used -= 1;
        }

        let vv: f64 = v.iter().map(|x| x * x).sum();
        let rc = residual(v, &c);
        let sin = (rc / vv).max(0.0).sqrt();
        let radius_f = (1.0 + (d as f64).sqrt()) * f64::from(p) * sin * (1.0 + 1e-9) + 1.0;
        let radius = (radius_f.floor() as u32).min(p) + 1;

        let mut best = (rc, self.rank(&c));
        let lo: Vec<u32> = c.iter().map(|&x| x.saturating_sub(radius)).collect();
        let hi: Vec<u32> = c.iter().map(|&x| (x + radius).min(p)).collect();
        // suffix sums of the bounds for pruning
        let mut lo_suffix = vec![0u32; d + 1];
        let mut hi_suffix = vec![0u32; d + 1];
        for i in (0..d).rev() {
            lo_suffix[i] = lo_suffix[i + 1] + lo[i];
            hi_suffix[i] = hi_suffix[i + 1] + hi[i];
        }
        let mut current = vec![0u32; d];
        let mut scan = BoxScan {
            v,
            lo: &lo,
            hi: &hi,
            lo_suffix: &lo_suffix,
            hi_suffix: &hi_suffix,
            current: &mut current,
            best: &mut best,
            set: self,
        };
        scan.visit(0, p);
        Ok(Association {
            index: best.1,
            distance: best.0.sqrt(),
        })
    }
}

struct BoxScan<'a> {
    v: &'a [f64],
    lo: &'a [u32],
    hi: &'a [u32],
    lo_suffix: &'a [u32],
    hi_suffix: &'a [u32],
    current: &'a mut [u32],
    best: &'a mut (f64, usize),
    set: &'a ReferencePointSet,
}

impl BoxScan<'_> {
    fn visit(&mut self, pos: usize, rest: u32) {
        let d = self.current.len();
        if pos + 1 == d {
            if rest < self.lo[pos] || rest > self.hi[pos] {
                return;
            }
            self.current[pos] = rest;
            let r = residual(self.v, self.current);
            if r <= self.best.0 {
                let idx = self.set.rank(self.current);
                if r < self.best.0 || idx < self.best.1 {
                    *self.best = (r, idx);
                }
            }
            return;
        }
        let tail_lo = self.lo_suffix[pos + 1];
        let tail_hi = self.hi_suffix[pos + 1];
        let from = self.lo[pos].max(rest.saturating_sub(tail_hi));
        let to = self.hi[pos].min(rest.saturating_sub(tail_lo));
        if rest < tail_lo || from > to {
            return;
        }
        for a in from..=to {
            self.current[pos] = a;
            self.visit(pos + 1, rest - a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    #[test]
    fn small_lattices() {
        let s = ReferencePointSet::generate(2, 2).unwrap();
        assert_eq!(
            s.iter().collect::<Vec<_>>(),
            vec![&[0, 2][..], &[1, 1], &[2, 0]]
        );
        assert_eq!(ReferencePointSet::generate(3, 2).unwrap().len(), 4);
        assert_eq!(ReferencePointSet::generate(12, 4).unwrap().len(), 455);
    }

    #[test]
    fn counts_and_cap() {
        assert_eq!(point_count(12, 4), 455);
        assert_eq!(
            ReferencePointSet::generate_with_cap(12, 4, 100).unwrap_err(),
            Error::TooManyPoints {
                count: 455,
                cap: 100
            }
        );
    }

    #[test]
    fn rank_matches_position() {
        for (p, d) in [(5, 2), (6, 3), (7, 4), (3, 5)] {
            let s = ReferencePointSet::generate(p, d).unwrap();
            for (i, a) in s.iter().enumerate() {
                assert_eq!(s.index_of(a).unwrap(), i);
            }
        }
    }

    #[test]
    fn oracle_examples() {
        let s = ReferencePointSet::generate(4, 2).unwrap();
        let a = s.associate_oracle(&[0.75, 0.25]).unwrap();
        assert_eq!(s.point(a.index), &[3, 1]);
        assert!(a.distance.abs() < 1e-12);

        let s = ReferencePointSet::generate(6, 2).unwrap();
        let a = s.associate_oracle(&[0.5, 0.5]).unwrap();
        assert_eq!(s.point(a.index), &[3, 3]);

        let s = ReferencePointSet::generate(5, 4).unwrap();
        let a = s.associate_oracle(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.point(a.index), &[5, 0, 0, 0]);
        assert_eq!(a.distance, 0.0);

        let zero = s.associate(&[0.0; 4]).unwrap();
        assert_eq!((zero.index, zero.distance), (0, 0.0));
        assert!(matches!(
            s.associate(&[-0.1, 0.5, 0.2, 0.1]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            s.associate_oracle(&[f64::NAN, 0.5, 0.2, 0.1]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn perp_distance_examples() {
        assert!(perp_distance(&[1.0, 1.0], &[1.0, 1.0]).unwrap().abs() < 1e-15);
        assert!((perp_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let x = perp_distance(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((x - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(
            perp_distance(&[1.0, 0.0], &[0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn required_p_examples() {
        assert_eq!(required_p(&ProblemSpec::omm(20, 2).unwrap()), 114);
        assert_eq!(theorem_p(&ProblemSpec::lotz(20, 2).unwrap()), 114);
        assert_eq!(required_p(&ProblemSpec::ojzj(10, 2, 2).unwrap()), 68);
    }

    #[test]
    fn fast_matches_oracle_small() {
        let mut rng = RandomSource::new(4);
        for (p, d) in [(100, 2), (7, 3), (30, 4), (4, 6)] {
            let s = ReferencePointSet::generate(p, d).unwrap();
            for i in 0..2000 {
                let v: Vec<f64> = (0..d)
                    .map(|j| {
                        if (i + j) % 7 == 0 {
                            0.0
                        } else {
                            rng.unit_f64()
                        }
                    })
                    .collect();
                assert_eq!(
                    s.associate(&v).unwrap(),
                    s.associate_oracle(&v).unwrap(),
                    "{v:?}"
                );
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // (0.5, 0.5) is equidistant from (1,2)/3 and (2,1)/3
        let s = ReferencePointSet::generate(3, 2).unwrap();
        let a = s.associate(&[0.5, 0.5]).unwrap();
        assert_eq!(s.point(a.index), &[1, 2]);
        assert_eq!(a, s.associate_oracle(&[0.5, 0.5]).unwrap());
    }
}
