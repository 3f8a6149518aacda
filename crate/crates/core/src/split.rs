//! Entropy split criterion and exhaustive best-split search.

use std::fmt;

use crate::data::{format_real, DataSubset};
use crate::error::{Error, Result};

/// Axis-aligned binary split: rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
}

impl Split {
    pub fn new(feature: usize, threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::NonFiniteInput(threshold));
        }
        Ok(Split { feature, threshold })
    }

    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        x[self.feature] <= self.threshold
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "X{} <= {}",
            self.feature + 1,
            format_real(self.threshold)
        )
    }
}

/// Shannon entropy in bits of a class histogram with `total` members.
pub fn entropy_of_counts(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts.iter().filter(|&&c| c > 0).fold(0.0, |h, &c| {
        let p = c as f64 / n;
        h - p * p.log2()
    })
}

/// Entropy of the class labels of `q`.
pub fn entropy(q: &DataSubset<'_>) -> Result<f64> {
    if q.is_empty() {
        return Err(Error::EmptySubset);
    }
    Ok(entropy_of_counts(&q.class_counts(), q.len()))
}

/// Row indices of `q` falling left and right of `split`.
pub fn partition(q: &DataSubset<'_>, split: Split) -> (Vec<usize>, Vec<usize>) {
    let data = q.dataset();
    q.rows()
        .iter()
        .partition(|&&r| split.goes_left(data.row(r)))
}

fn weighted(left: &[usize], n_left: usize, right: &[usize], n_right: usize) -> f64 {
    let n = (n_left + n_right) as f64;
    (n_left as f64 / n) * entropy_of_counts(left, n_left)
        + (n_right as f64 / n) * entropy_of_counts(right, n_right)
}

/// Size-weighted mean entropy of the two sides of `split`.
pub fn weighted_entropy(q: &DataSubset<'_>, split: Split) -> Result<f64> {
    if q.is_empty() {
        return Err(Error::EmptySubset);
    }
    let data = q.dataset();
    let k = data.n_classes();
    let (mut left, mut right) = (vec![0; k], vec![0; k]);
    let (mut n_left, mut n_right) = (0, 0);
    for &r in q.rows() {
        if split.goes_left(data.row(r)) {
            left[data.label(r)] += 1;
            n_left += 1;
        } else {
            right[data.label(r)] += 1;
            n_right += 1;
        }
    }
    if n_left == 0 || n_right == 0 {
        return Err(Error::DegenerateSplit {
            feature: split.feature,
            threshold: split.threshold,
        });
    }
    Ok(weighted(&left, n_left, &right, n_right))
}

/// Threshold separating consecutive distinct sorted values `lo < hi`.
///
/// The midpoint, nudged down to `lo` in the rare case rounding lands it on
/// `hi`, so that `lo` goes left and `hi` goes right.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mut mid = (lo + hi) / 2.0;
    if !mid.is_finite() {
        mid = lo / 2.0 + hi / 2.0;
    }
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

/// A split together with its weighted entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSplit {
    pub split: Split,
    pub weighted_entropy: f64,
}

/// Minimum weighted-entropy split of `q`, or `None` when `q` is pure or no
/// threshold separates it.
///
/// Candidates are the midpoints between consecutive distinct values of
/// every feature. Ties go to the lowest feature index, then the lowest
/// threshold.
pub fn best_split(q: &DataSubset<'_>) -> Option<Split> {
    best_split_with_min_leaf(q, 1).map(|s| s.split)
}

/// As [`best_split`], considering only splits that leave at least
/// `min_leaf` rows on each side.
pub fn best_split_with_min_leaf(q: &DataSubset<'_>, min_leaf: usize) -> Option<ScoredSplit> {
    let n = q.len();
    let min_leaf = min_leaf.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let totals = q.class_counts();
    if entropy_of_counts(&totals, n) == 0.0 {
        return None;
    }
    let data = q.dataset();
    let mut best: Option<ScoredSplit> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
    for feature in 0..data.n_features() {
        column.clear();
        column.extend(
            q.rows()
                .iter()
                .map(|&r| (data.value(r, feature), data.label(r))),
        );
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut left = vec![0; totals.len()];
        let mut right = totals.clone();
        for i in 0..n - 1 {
            let (value, label) = column[i];
            left[label] += 1;
            right[label] -= 1;
            let next = column[i + 1].0;
            if value == next {
                continue;
            }
            let n_left = i + 1;
            if n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let h = weighted(&left, n_left, &right, n - n_left);
            if best.is_none_or(|b| h < b.weighted_entropy) {
                best = Some(ScoredSplit {
                    split: Split {
                        feature,
                        threshold: midpoint(value, next),
                    },
                    weighted_entropy: h,
                });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    fn one_d(values: &[f64], labels: &[usize]) -> Dataset {
        Dataset::new(values.iter().map(|&v| vec![v]).collect(), labels.to_vec()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let d = one_d(&[0.0, 1.0, 2.0, 3.0], &[0, 0, 0, 0]);
        assert_eq!(entropy(&d.all()).unwrap(), 0.0);
        let d = one_d(&[0.0, 1.0], &[0, 1]);
        assert!((entropy(&d.all()).unwrap() - 1.0).abs() < 1e-12);
        let d = one_d(&[0.0, 1.0, 2.0], &[0, 0, 1]);
        assert!((entropy(&d.all()).unwrap() - 0.918296).abs() < 1e-6);
        let empty = DataSubset::new(&d, vec![]).unwrap();
        assert!(matches!(entropy(&empty), Err(Error::EmptySubset)));
    }

    #[test]
    fn entropy_is_bounded_by_log_classes() {
        let d = one_d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[0, 1, 2, 0, 1, 2]);
        let h = entropy(&d.all()).unwrap();
        assert!((h - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn weighted_entropy_examples() {
        let d = one_d(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]);
        let q = d.all();
        assert_eq!(
            weighted_entropy(&q, Split::new(0, 2.5).unwrap()).unwrap(),
            0.0
        );
        let h = weighted_entropy(&q, Split::new(0, 3.5).unwrap()).unwrap();
        assert!((h - 0.688722).abs() < 1e-6, "{h}");
        assert!(matches!(
            weighted_entropy(&q, Split::new(0, 10.0).unwrap()),
            Err(Error::DegenerateSplit { .. })
        ));

        let pure = one_d(&[1.0, 2.0, 3.0], &[1, 1, 1]);
        assert_eq!(
            weighted_entropy(&pure.all(), Split::new(0, 1.5).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn best_split_examples() {
        let d = one_d(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]);
        let s = best_split_with_min_leaf(&d.all(), 1).unwrap();
        assert_eq!(s.split, Split::new(0, 2.5).unwrap());
        assert_eq!(s.weighted_entropy, 0.0);

        let same = Dataset::new(vec![vec![1.0, 2.0]; 4], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(best_split(&same.all()), None);

        let pure = one_d(&[1.0, 2.0, 3.0], &[1, 1, 1]);
        assert_eq!(best_split(&pure.all()), None);

        let single = one_d(&[1.0], &[0]);
        assert_eq!(best_split(&single.all()), None);
    }

    #[test]
    fn ties_prefer_lowest_feature_then_threshold() {
        // both features separate the classes perfectly
        let d = Dataset::new(
            vec![
                vec![1.0, 10.0],
                vec![2.0, 20.0],
                vec![3.0, 30.0],
                vec![4.0, 40.0],
            ],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        assert_eq!(best_split(&d.all()).unwrap(), Split::new(0, 2.5).unwrap());

        // symmetric labels: thresholds 1.5 and 3.5 tie
        let d = one_d(&[1.0, 2.0, 3.0, 4.0], &[0, 1, 1, 0]);
        assert_eq!(best_split(&d.all()).unwrap().threshold, 1.5);
    }

    #[test]
    fn min_leaf_excludes_small_sides() {
        let d = one_d(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[0, 1, 1, 1, 1, 1]);
        let free = best_split_with_min_leaf(&d.all(), 1).unwrap();
        assert_eq!(free.split.threshold, 1.5);
        let constrained = best_split_with_min_leaf(&d.all(), 2).unwrap();
        assert_eq!(constrained.split.threshold, 2.5);
        assert!(best_split_with_min_leaf(&d.all(), 4).is_none());
    }

    #[test]
    fn midpoint_keeps_partition_order() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(lo <= m && m < hi);
        let m = midpoint(f64::MAX / 1.5, f64::MAX);
        assert!(m.is_finite() && m < f64::MAX);
    }

    #[test]
    fn partition_is_disjoint_cover() {
        let d = one_d(&[5.0, 1.0, 3.0, 2.0], &[0, 1, 0, 1]);
        let (l, r) = partition(&d.all(), Split::new(0, 2.5).unwrap());
        assert_eq!(l, vec![1, 3]);
        assert_eq!(r, vec![0, 2]);
    }
}
