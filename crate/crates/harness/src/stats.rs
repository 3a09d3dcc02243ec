//! Order statistics over per-seed results.
//!
//! Quantiles take the element at `floor(f (N - 1))` of the sorted sample with
//! no interpolation, so the median of an even-sized sample is the lower one.

/// Element of `sorted` at position `floor(f (N - 1))`.
pub fn quantile(sorted: &[u64], f: f64) -> Option<u64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = (f * (sorted.len() - 1) as f64).floor() as usize;
    Some(sorted[pos.min(sorted.len() - 1)])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub median: u64,
    pub mean: f64,
    /// Third minus first quartile.
    pub iqr: u64,
    pub coverage_rate: f64,
}

/// Summary of the generation counts of one configuration. `covered[i]`
/// tells whether run `i` covered the front.
pub fn summarize(generations: &[u64], covered: &[bool]) -> Option<Summary> {
    let mut sorted = generations.to_vec();
    sorted.sort_unstable();
    let median = quantile(&sorted, 0.5)?;
    let iqr = quantile(&sorted, 0.75)? - quantile(&sorted, 0.25)?;
    let mean = sorted.iter().map(|&g| g as f64).sum::<f64>() / sorted.len() as f64;
    let hit = covered.iter().filter(|&&c| c).count();
    Some(Summary {
        runs: sorted.len(),
        median,
        mean,
        iqr,
        coverage_rate: hit as f64 / covered.len().max(1) as f64,
    })
}
