//! Objective normalization with a persistent ideal point, maximum and
//! extreme-point archive.
//!
//! All objectives are maximized. Each generation the ideal point `y_min`
//! (historical minimum over merged populations) and `y_max` (historical
//! maximum over first layers) are updated, one extreme point per objective
//! is picked, and the nadir estimate `y_nad` comes from the axis intercepts
//! of the hyperplane through the extreme points when those are usable, and
//! from layer maxima otherwise.

use crate::error::{Error, Result};
use crate::objective::ObjectiveVector;

/// Off-axis weight of the achievement scalarization.
const ASF_PENALTY: f64 = 1e6;

/// Relative pivot tolerance for the intercept solve.
const PIVOT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizerState {
    pub y_min: Vec<f64>,
    pub y_max: Vec<f64>,
    /// Extreme points of the previous generation, one per objective once
    /// the first generation has run.
    pub extremes: Vec<ObjectiveVector>,
    pub eps_nad: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Intercepts {
    Finite(Vec<f64>),
    Singular,
}

/// The affine map `f^n` of one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedMap {
    pub y_min: Vec<f64>,
    pub y_nad: Vec<f64>,
    /// `y_nad_j <= y_min_j`; such objectives map to 0.
    pub degenerate: Vec<bool>,
    /// Whether every `y_nad_j` came from a valid intercept.
    pub used_intercepts: bool,
}

impl NormalizedMap {
    pub fn apply(&self, v: &ObjectiveVector) -> Vec<f64> {
        let mut out = Vec::with_capacity(v.dim());
        self.apply_into(v, &mut out);
        out
    }

    pub fn apply_into(&self, v: &ObjectiveVector, out: &mut Vec<f64>) {
        out.clear();
        out.extend(v.iter().enumerate().map(|(j, x)| {
            if self.degenerate[j] {
                0.0
            } else {
                (f64::from(x) - self.y_min[j]) / (self.y_nad[j] - self.y_min[j])
            }
        }));
    }
}

/// Achievement scalarization for objective `j` (smaller is better): the
/// shortfall of `v_j` below `y_max_j`, against a heavy penalty on how far the
/// other objectives sit above the ideal point.
fn asf(v: &ObjectiveVector, j: usize, y_min: &[f64], y_max: &[f64]) -> f64 {
    let mut worst = y_max[j] - f64::from(v[j]);
    for (i, x) in v.iter().enumerate() {
        if i != j {
            worst = worst.max(ASF_PENALTY * (f64::from(x) - y_min[i]));
        }
    }
    worst
}

/// Extreme point for objective `j` among `candidates`; ties go to the
/// lexicographically largest vector.
pub fn asf_extreme<'a, I>(
    candidates: I,
    j: usize,
    state: &NormalizerState,
) -> Result<ObjectiveVector>
where
    I: IntoIterator<Item = &'a ObjectiveVector>,
{
    let mut best: Option<(f64, &ObjectiveVector)> = None;
    for v in candidates {
        let s = asf(v, j, &state.y_min, &state.y_max);
        best = match best {
            Some((bs, bv)) if bs < s || (bs == s && bv >= v) => Some((bs, bv)),
            _ => Some((s, v)),
        };
    }
    best.map(|(_, v)| v.clone()).ok_or(Error::Empty)
}

/// Axis intercepts of the hyperplane `Σ v_i / I_i = 1` through the `d`
/// points of `e`, by Gaussian elimination with partial pivoting.
pub fn hyperplane_intercepts(e: &[ObjectiveVector]) -> Result<Intercepts> {
    let d = e.len();
    if d == 0 {
        return Err(Error::Empty);
    }
    if let Some(row) = e.iter().find(|r| r.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: row.dim(),
        });
    }
    let mut m: Vec<Vec<f64>> = e
        .iter()
        .map(|r| {
            r.iter()
                .map(f64::from)
                .chain(std::iter::once(1.0))
                .collect()
        })
        .collect();
    let scale = m
        .iter()
        .map(|r| r[..d].iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Intercepts::Singular);
    }
    let tol = PIVOT_TOLERANCE * scale;
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col].abs() <= tol {
            return Ok(Intercepts::Singular);
        }
        m.swap(col, pivot);
        for row in 0..d {
            if row != col {
                let factor = m[row][col] / m[col][col];
                if factor != 0.0 {
                    for k in col..=d {
                        m[row][k] -= factor * m[col][k];
                    }
                }
            }
        }
    }
    let mut out = Vec::with_capacity(d);
    for (i, row) in m.iter().enumerate() {
        let inv = row[d] / row[i];
        let intercept = 1.0 / inv;
        if inv == 0.0 || !intercept.is_finite() {
            return Ok(Intercepts::Singular);
        }
        out.push(intercept);
    }
    Ok(Intercepts::Finite(out))
}

impl NormalizerState {
    pub fn new(d: usize, eps_nad: f64) -> Self {
        Self {
            y_min: vec![f64::INFINITY; d],
            y_max: vec![f64::NEG_INFINITY; d],
            extremes: Vec::new(),
            eps_nad,
        }
    }

    pub fn d(&self) -> usize {
        self.y_min.len()
    }

    /// One normalization step.
    ///
    /// `merged` holds the fitness of every member of the merged population
    /// (after subsampling), `layers` its non-dominated sorting and `pool` the
    /// indices of `Y_t ∪ F^{i*}`, the candidates for extreme points next to
    /// the archive. The archive is replaced by this generation's extremes.
    pub fn normalize_generation<V>(
        &mut self,
        merged: &[V],
        layers: &[Vec<usize>],
        pool: &[usize],
    ) -> Result<NormalizedMap>
    where
        V: std::borrow::Borrow<ObjectiveVector>,
    {
        let d = self.d();
        let first = layers.first().ok_or(Error::Empty)?;
        if first.is_empty() || pool.is_empty() {
            return Err(Error::Empty);
        }
        let fit = |i: usize| merged[i].borrow();

        for v in merged {
            for (j, x) in v.borrow().iter().enumerate() {
                self.y_min[j] = self.y_min[j].min(f64::from(x));
            }
        }
        let mut first_max = vec![f64::NEG_INFINITY; d];
        for &i in first {
            for (j, x) in fit(i).iter().enumerate() {
                first_max[j] = first_max[j].max(f64::from(x));
            }
        }
        for j in 0..d {
            self.y_max[j] = self.y_max[j].max(first_max[j]);
        }

        let candidates: Vec<&ObjectiveVector> = pool
            .iter()
            .map(|&i| fit(i))
            .chain(self.extremes.iter())
            .collect();
        let extremes = (0..d)
            .map(|j| asf_extreme(candidates.iter().copied(), j, self))
            .collect::<Result<Vec<_>>>()?;
        self.extremes = extremes;

        let mut y_nad = vec![0.0; d];
        let mut valid = false;
        if let Intercepts::Finite(intercepts) = hyperplane_intercepts(&self.extremes)? {
            valid = intercepts
                .iter()
                .zip(&self.y_max)
                .all(|(&i, &ymax)| i >= self.eps_nad && i <= ymax);
            if valid {
                y_nad = intercepts;
            }
        }
        if !valid {
            y_nad.copy_from_slice(&first_max);
        }

        let mut all_max: Option<Vec<f64>> = None;
        for j in 0..d {
            if y_nad[j] < self.y_min[j] + self.eps_nad {
                let maxima = all_max.get_or_insert_with(|| {
                    let mut m = vec![f64::NEG_INFINITY; d];
                    for v in merged {
                        for (k, x) in v.borrow().iter().enumerate() {
                            m[k] = m[k].max(f64::from(x));
                        }
                    }
                    m
                });
                y_nad[j] = maxima[j];
            }
        }
        let degenerate = (0..d).map(|j| y_nad[j] - self.y_min[j] <= 0.0).collect();
        Ok(NormalizedMap {
            y_min: self.y_min.clone(),
            y_nad,
            degenerate,
            used_intercepts: valid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ov(v: &[u32]) -> ObjectiveVector {
        ObjectiveVector::new(v.to_vec())
    }

    fn state(y_min: &[f64], y_max: &[f64], eps: f64) -> NormalizerState {
        NormalizerState {
            y_min: y_min.to_vec(),
            y_max: y_max.to_vec(),
            extremes: Vec::new(),
            eps_nad: eps,
        }
    }

    #[test]
    fn asf_examples() {
        let s = state(&[0.0, 0.0], &[4.0, 4.0], 4.0);
        let c = [ov(&[4, 0]), ov(&[0, 4]), ov(&[2, 2])];
        assert_eq!(asf_extreme(&c, 0, &s).unwrap(), ov(&[4, 0]));
        assert_eq!(asf_extreme(&c[..2], 1, &s).unwrap(), ov(&[0, 4]));
        assert_eq!(asf_extreme(&c[2..], 0, &s).unwrap(), ov(&[2, 2]));
        assert_eq!(
            asf_extreme(&[] as &[ObjectiveVector], 0, &s),
            Err(Error::Empty)
        );
    }

    #[test]
    fn asf_tie_prefers_lexicographically_largest() {
        let s = state(&[0.0, 0.0], &[4.0, 4.0], 4.0);
        // both score 4e6 on objective 0
        let c = [ov(&[0, 4]), ov(&[3, 4])];
        assert_eq!(asf_extreme(&c, 0, &s).unwrap(), ov(&[3, 4]));
    }

    #[test]
    fn intercept_examples() {
        assert_eq!(
            hyperplane_intercepts(&[ov(&[4, 0]), ov(&[0, 4])]).unwrap(),
            Intercepts::Finite(vec![4.0, 4.0])
        );
        assert_eq!(
            hyperplane_intercepts(&[ov(&[2, 2]), ov(&[4, 4])]).unwrap(),
            Intercepts::Singular
        );
        assert_eq!(
            hyperplane_intercepts(&[ov(&[6, 0, 0]), ov(&[0, 6, 0]), ov(&[0, 0, 6])]).unwrap(),
            Intercepts::Finite(vec![6.0, 6.0, 6.0])
        );
        // plane v_2 = 3 is parallel to the first axis
        assert_eq!(
            hyperplane_intercepts(&[ov(&[1, 3]), ov(&[5, 3])]).unwrap(),
            Intercepts::Singular
        );
    }

    #[test]
    fn intercepts_permute_with_objectives() {
        let e = [ov(&[6, 1, 0]), ov(&[0, 5, 2]), ov(&[1, 0, 7])];
        let Intercepts::Finite(base) = hyperplane_intercepts(&e).unwrap() else {
            panic!("singular")
        };
        let perm = [2, 0, 1];
        let e2: Vec<_> = e.iter().map(|v| ov(&perm.map(|p| v[p]))).collect();
        let Intercepts::Finite(moved) = hyperplane_intercepts(&e2).unwrap() else {
            panic!("singular")
        };
        for (j, &p) in perm.iter().enumerate() {
            assert!((moved[j] - base[p]).abs() < 1e-9);
        }
    }

    #[test]
    fn hand_trace_valid_intercepts() {
        let mut s = NormalizerState::new(2, 4.0);
        let merged = [ov(&[4, 0]), ov(&[0, 4])];
        let layers = vec![vec![0, 1]];
        let map = s.normalize_generation(&merged, &layers, &[0, 1]).unwrap();
        assert!(map.used_intercepts);
        assert_eq!(map.y_nad, vec![4.0, 4.0]);
        assert_eq!(map.apply(&ov(&[4, 0])), vec![1.0, 0.0]);
        assert_eq!(s.extremes, vec![ov(&[4, 0]), ov(&[0, 4])]);
    }

    #[test]
    fn single_fitness_is_degenerate() {
        let mut s = NormalizerState::new(2, 3.0);
        let merged = [ov(&[2, 1]), ov(&[2, 1]), ov(&[2, 1])];
        let layers = vec![vec![0, 1, 2]];
        let map = s
            .normalize_generation(&merged, &layers, &[0, 1, 2])
            .unwrap();
        assert!(!map.used_intercepts);
        assert_eq!(map.y_nad, vec![2.0, 1.0]);
        assert_eq!(map.degenerate, vec![true, true]);
        assert_eq!(map.apply(&ov(&[2, 1])), vec![0.0, 0.0]);
    }

    #[test]
    fn guard_falls_back_to_all_layers() {
        let mut s = NormalizerState::new(2, 5.0);
        let merged = [ov(&[5, 3]), ov(&[3, 5]), ov(&[1, 1])];
        let layers = vec![vec![0, 1], vec![2]];
        let map = s.normalize_generation(&merged, &layers, &[0, 1]).unwrap();
        // intercepts are 8 > y_max, so layer maxima (5, 5); guard 5 < 1 + 5
        // sends both to the maximum over all layers, also 5
        assert_eq!(map.y_nad, vec![5.0, 5.0]);
        assert_eq!(map.y_min, vec![1.0, 1.0]);
        assert_eq!(map.apply(&ov(&[1, 5])), vec![0.0, 1.0]);
    }
}
