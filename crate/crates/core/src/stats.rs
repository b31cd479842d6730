//! Summary statistics of core-size ratios between two extraction methods.

use std::fmt;

/// Quartiles and mean of a sample of ratios.
///
/// Quartiles are Tukey hinges: the medians of the lower and upper halves of
/// the sorted sample, both halves including the middle element when the
/// sample size is odd.
///
/// ```
/// use lemlift::stats::RatioStats;
///
/// let s = RatioStats::from_samples(&[4.0, 1.0, 3.0, 2.0]).unwrap();
/// assert_eq!((s.q1, s.median, s.mean, s.q3), (1.5, 2.5, 2.5, 3.5));
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioStats {
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub count: usize,
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

impl RatioStats {
    /// `None` for an empty sample or one containing a non-finite value.
    pub fn from_samples(samples: &[f64]) -> Option<RatioStats> {
        if samples.is_empty() || samples.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut xs = samples.to_vec();
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        let half = n.div_ceil(2);
        Some(RatioStats {
            q1: median_sorted(&xs[..half]),
            median: median_sorted(&xs),
            mean: xs.iter().sum::<f64>() / n as f64,
            q3: median_sorted(&xs[n - half..]),
            count: n,
        })
    }

    /// Ratios `other / baseline` over the pairs where both sizes are known
    /// and the baseline is nonzero.
    pub fn from_core_sizes(pairs: &[(Option<usize>, Option<usize>)]) -> Option<RatioStats> {
        let ratios: Vec<f64> = pairs
            .iter()
            .filter_map(|&(b, o)| match (b, o) {
                (Some(b), Some(o)) if b > 0 => Some(o as f64 / b as f64),
                _ => None,
            })
            .collect();
        RatioStats::from_samples(&ratios)
    }
}

/// One row of a ratio table.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub label: String,
    pub stats: Option<RatioStats>,
}

/// A ratio table with one row per compared method.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioTable {
    pub baseline: String,
    pub rows: Vec<RatioRow>,
}

impl fmt::Display for RatioTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(self.baseline.len() + 3);
        writeln!(f, "{:<w$}  {:>12}  {:>8}  {:>8}  {:>12}  {:>5}", format!("vs {}", self.baseline), "1st quartile", "median", "mean", "3rd quartile", "n")?;
        for r in &self.rows {
            match r.stats {
                Some(s) => writeln!(f, "{:<w$}  {:>12.2}  {:>8.2}  {:>8.2}  {:>12.2}  {:>5}", r.label, s.q1, s.median, s.mean, s.q3, s.count)?,
                None => writeln!(f, "{:<w$}  {:>12}  {:>8}  {:>8}  {:>12}  {:>5}", r.label, "-", "-", "-", "-", 0)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample() {
        let s = RatioStats::from_samples(&[1.7]).unwrap();
        assert_eq!((s.q1, s.median, s.mean, s.q3, s.count), (1.7, 1.7, 1.7, 1.7, 1));
    }

    #[test]
    fn odd_sample_includes_median_in_both_halves() {
        let s = RatioStats::from_samples(&[5.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(RatioStats::from_samples(&[]).is_none());
        assert!(RatioStats::from_samples(&[1.0, f64::NAN]).is_none());
    }

    #[test]
    fn core_size_pairs() {
        let s = RatioStats::from_core_sizes(&[(Some(2), Some(4)), (None, Some(3)), (Some(0), Some(1)), (Some(4), Some(4))]).unwrap();
        assert_eq!(s.count, 2);
        assert_eq!(s.mean, 1.5);
    }
}
