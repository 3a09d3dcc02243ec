//! Objective vectors, Pareto dominance (maximization) and individuals.

use std::fmt;
use std::ops::Index;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Fitness image `f(x)`: `d` non-negative integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ObjectiveVector(Vec<u32>);

impl ObjectiveVector {
    pub fn new(values: Vec<u32>) -> Self {
        Self(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn into_values(self) -> Vec<u32> {
        self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    /// `self ≥ other` componentwise. Dimensions must already agree.
    #[inline]
    pub fn weakly_dominates(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    /// Weak dominance plus at least one strict coordinate.
    #[inline]
    pub fn strictly_dominates(&self, other: &Self) -> bool {
        let mut strict = false;
        for (a, b) in self.0.iter().zip(&other.0) {
            if a < b {
                return false;
            }
            strict |= a > b;
        }
        strict
    }
}

impl From<Vec<u32>> for ObjectiveVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl<const D: usize> From<[u32; D]> for ObjectiveVector {
    fn from(v: [u32; D]) -> Self {
        Self(v.to_vec())
    }
}

impl Index<usize> for ObjectiveVector {
    type Output = u32;

    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl fmt::Debug for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    Dominates,
    DominatedBy,
    Equal,
    Incomparable,
}

/// Relation of `u` to `v` under maximization.
pub fn dominance(u: &ObjectiveVector, v: &ObjectiveVector) -> Result<Dominance> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            actual: v.dim(),
        });
    }
    let (mut greater, mut less) = (false, false);
    for (a, b) in u.0.iter().zip(&v.0) {
        greater |= a > b;
        less |= a < b;
    }
    Ok(match (greater, less) {
        (false, false) => Dominance::Equal,
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::DominatedBy,
        (true, true) => Dominance::Incomparable,
    })
}

/// A genotype with its fitness, evaluated once at creation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Individual {
    pub genotype: BitString,
    pub fitness: ObjectiveVector,
}

impl Individual {
    pub fn new(genotype: BitString, fitness: ObjectiveVector) -> Self {
        Self { genotype, fitness }
    }
}

impl std::borrow::Borrow<ObjectiveVector> for Individual {
    fn borrow(&self) -> &ObjectiveVector {
        &self.fitness
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(v: &[u32]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec())
    }

    #[test]
    fn worked_relations() {
        assert_eq!(dominance(&ov(&[2, 2]), &ov(&[2, 2])), Ok(Dominance::Equal));
        assert_eq!(
            dominance(&ov(&[3, 2]), &ov(&[2, 2])),
            Ok(Dominance::Dominates)
        );
        assert_eq!(
            dominance(&ov(&[2, 2]), &ov(&[3, 2])),
            Ok(Dominance::DominatedBy)
        );
        assert_eq!(
            dominance(&ov(&[3, 1]), &ov(&[2, 2])),
            Ok(Dominance::Incomparable)
        );
    }

    #[test]
    fn mismatched_dimensions() {
        assert_eq!(
            dominance(&ov(&[1, 2]), &ov(&[1, 2, 3])),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        );
    }

    #[test]
    fn fast_predicates_agree() {
        let u = ov(&[3, 2]);
        let v = ov(&[2, 2]);
        assert!(u.strictly_dominates(&v));
        assert!(u.weakly_dominates(&v));
        assert!(!v.strictly_dominates(&u));
        assert!(v.weakly_dominates(&v));
        assert!(!v.strictly_dominates(&v));
    }

    #[test]
    fn display() {
        assert_eq!(ov(&[1, 0, 4]).to_string(), "(1,0,4)");
    }
}
