//! Random inputs and reference implementations shared by the test targets.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use msi_tree::split::midpoint;
use msi_tree::{Dataset, NodeId, Split, Tree};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    max_rows: usize,
    max_features: usize,
    max_value: i32,
) -> Dataset {
    let n = rng.random_range(2..=max_rows);
    let m = rng.random_range(1..=max_features);
    let k = rng.random_range(2..=3);
    let rows = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| rng.random_range(0..=max_value) as f64 * 0.5)
                .collect()
        })
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..k)).collect();
    Dataset::new(rows, labels).unwrap()
}

/// Labels follow axis-aligned regions with about 5% of them flipped.
pub fn structured_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let n = rng.random_range(50..=150);
    let m = rng.random_range(1..=3);
    let cuts: Vec<f64> = (0..m).map(|_| rng.random_range(5.0..15.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| rng.random_range(0..=40) as f64 * 0.5)
                .collect()
        })
        .collect();
    let labels = rows
        .iter()
        .map(|x| {
            let region = usize::from(x.iter().zip(&cuts).take(2).all(|(v, c)| v > c));
            if rng.random_bool(0.05) {
                1 - region
            } else {
                region
            }
        })
        .collect();
    Dataset::new(rows, labels).unwrap()
}

/// A tree grown at random leaves by random separating splits.
pub fn random_tree(rng: &mut ChaCha8Rng, data: &Dataset, growths: usize) -> Tree {
    let mut tree = Tree::root_of(data).unwrap();
    for _ in 0..growths {
        let leaves: Vec<NodeId> = tree
            .leaves()
            .filter(|(_, n)| n.rows().len() >= 2)
            .map(|(id, _)| id)
            .collect();
        if leaves.is_empty() {
            break;
        }
        let leaf = leaves[rng.random_range(0..leaves.len())];
        let feature = rng.random_range(0..data.n_features());
        let mut values: Vec<f64> = tree
            .node(leaf)
            .rows()
            .iter()
            .map(|&r| data.value(r, feature))
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        if values.len() < 2 {
            continue;
        }
        let i = rng.random_range(0..values.len() - 1);
        let split = Split::new(feature, midpoint(values[i], values[i + 1])).unwrap();
        tree.grow_with_data(data, leaf, split).unwrap();
    }
    tree
}

pub fn entropy_of(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n as f64;
            h -= p * p.log2();
        }
    }
    h
}

/// Exhaustive search: every feature, every midpoint, scored from scratch.
pub fn brute_force_split(d: &Dataset) -> Option<Split> {
    let k = d.n_classes();
    let mut totals = vec![0; k];
    for &l in d.labels() {
        totals[l] += 1;
    }
    if entropy_of(&totals) == 0.0 {
        return None;
    }
    let mut best: Option<(f64, Split)> = None;
    for f in 0..d.n_features() {
        let mut values: Vec<f64> = (0..d.n_rows()).map(|r| d.value(r, f)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (mut l, mut r) = (vec![0; k], vec![0; k]);
            for i in 0..d.n_rows() {
                if d.value(i, f) <= t {
                    l[d.label(i)] += 1;
                } else {
                    r[d.label(i)] += 1;
                }
            }
            let (nl, nr) = (
                l.iter().sum::<usize>() as f64,
                r.iter().sum::<usize>() as f64,
            );
            let n = nl + nr;
            let h = (nl / n) * entropy_of(&l) + (nr / n) * entropy_of(&r);
            if best.is_none_or(|(b, _)| h < b) {
                best = Some((
                    h,
                    Split {
                        feature: f,
                        threshold: t,
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s)
}
