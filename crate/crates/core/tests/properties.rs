mod common;

use proptest::prelude::*;

use msi_tree::split::{best_split, entropy, partition, weighted_entropy};
use msi_tree::{
    build_greedy_tree, build_tree, combine, make_blobs, surfeit, train_test_split, CombinerKind,
    CompressorKind, DataSubset, Dataset, GreedyConfig, LabelColumn, Model, MsiConfig, Split,
    SplitRatio,
};

use common::{brute_force_split, random_tree, rng};

/// Small datasets with coarse values, so ties and duplicate rows are common.
fn dataset(max_rows: usize, max_features: usize) -> impl Strategy<Value = Dataset> {
    (2..=max_rows, 1..=max_features, 2..=3usize).prop_flat_map(|(n, m, k)| {
        (
            prop::collection::vec(prop::collection::vec(0..16i32, m), n),
            prop::collection::vec(0..k, n),
        )
            .prop_map(|(rows, labels)| {
                let rows = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| v as f64 * 0.25).collect())
                    .collect();
                Dataset::new(rows, labels).unwrap()
            })
    })
}

fn subset_of(d: &Dataset, mask: &[bool]) -> Vec<usize> {
    (0..d.n_rows()).filter(|&i| mask[i % mask.len()]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn train_test_split_partitions_rows(n in 2usize..120, f in 0.01f64..0.99, seed: u64) {
        let d = Dataset::new((0..n).map(|i| vec![i as f64]).collect(), vec![0; n]).unwrap();
        let ratio = SplitRatio::new(f, seed).unwrap();
        let (train, test) = train_test_split(&d, ratio).unwrap();
        prop_assert_eq!(train.n_rows() + test.n_rows(), n);
        let mut all: Vec<f64> = train.rows().chain(test.rows()).map(|r| r[0]).collect();
        all.sort_by(f64::total_cmp);
        prop_assert_eq!(all, (0..n).map(|i| i as f64).collect::<Vec<_>>());
        let again = train_test_split(&d, ratio).unwrap();
        prop_assert_eq!(train, again.0);
    }

    #[test]
    fn csv_round_trip(d in dataset(30, 4), scale in 0.001f64..1e6) {
        let scaled = Dataset::new(
            d.rows().map(|r| r.iter().map(|v| v * scale - 3.0).collect()).collect(),
            d.labels().to_vec(),
        ).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        scaled.write_csv(&path).unwrap();
        let back = msi_tree::load_csv(&path, &LabelColumn::from("label"), true).unwrap();
        prop_assert!(back.rows().eq(scaled.rows()));
        prop_assert_eq!(back.labels(), scaled.labels());
    }

    #[test]
    fn blob_generator_is_pure(std in 0.1f64..6.0, points in 1usize..40, seed: u64) {
        prop_assert_eq!(make_blobs(std, points, seed).unwrap(), make_blobs(std, points, seed).unwrap());
    }

    #[test]
    fn best_split_never_exceeds_subset_entropy(d in dataset(40, 3), mask in prop::collection::vec(any::<bool>(), 1..8)) {
        let rows = subset_of(&d, &mask);
        prop_assume!(!rows.is_empty());
        let q = DataSubset::new(&d, rows).unwrap();
        if let Some(s) = best_split(&q) {
            prop_assert!(weighted_entropy(&q, s).unwrap() <= entropy(&q).unwrap() + 1e-12);
            let (l, r) = partition(&q, s);
            prop_assert!(!l.is_empty() && !r.is_empty());
            let mut union: Vec<usize> = l.iter().chain(&r).copied().collect();
            union.sort_unstable();
            prop_assert_eq!(union, q.rows().to_vec());
        }
    }

    #[test]
    fn best_split_matches_brute_force(d in dataset(50, 4)) {
        prop_assert_eq!(best_split(&d.all()), brute_force_split(&d));
    }

    #[test]
    fn best_split_ignores_row_order(d in dataset(40, 3), seed: u64) {
        let mut order: Vec<usize> = (0..d.n_rows()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng(seed));
        let shuffled = DataSubset::new(&d, order).unwrap();
        prop_assert_eq!(best_split(&shuffled), best_split(&d.all()));
    }

    #[test]
    fn combiners_are_symmetric_and_bounded(i in 0.0f64..2.0, s in 0.0f64..2.0) {
        for c in CombinerKind::ALL {
            prop_assert_eq!(combine(c, i, s), combine(c, s, i));
            prop_assert!(combine(c, i, s) >= 0.0);
        }
        let h = combine(CombinerKind::Harmonic, i, s);
        prop_assert!(h <= i.max(s) + 1e-15);
    }

    #[test]
    fn tree_metrics_are_consistent(d in dataset(40, 3), seed: u64, growths in 0usize..12) {
        let t = random_tree(&mut rng(seed), &d, growths);
        let wrong = t.misclassified(&d).unwrap().len();
        prop_assert_eq!(t.accuracy(&d).unwrap(), 1.0 - wrong as f64 / d.n_rows() as f64);
        let text = t.serialize();
        prop_assert_eq!(text.matches("if ").count(), t.internal_count());
        prop_assert_eq!(t.node_count(), 2 * t.internal_count() + 1);
        let back = Model::parse(&Model::new(t.clone(), d.n_classes()).to_text()).unwrap();
        prop_assert!(back.tree.same_structure(&t));
        prop_assert_eq!(back.tree.predict_all(&d).unwrap(), t.predict_all(&d).unwrap());
        for k in CompressorKind::ALL {
            let s = surfeit(k, &t).unwrap();
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn internal_classes_are_majority_of_children(d in dataset(40, 3), seed: u64, growths in 1usize..10) {
        let t = random_tree(&mut rng(seed), &d, growths);
        for (_, node) in t.nodes() {
            if let Some(b) = node.branch() {
                let mut rows: Vec<usize> = t.node(b.left).rows().iter().chain(t.node(b.right).rows()).copied().collect();
                rows.sort_unstable();
                let mut own = node.rows().to_vec();
                own.sort_unstable();
                prop_assert_eq!(&rows, &own);
                let q = DataSubset::new(&d, rows).unwrap();
                prop_assert_eq!(msi_tree::tree::forecast(&q).unwrap(), node.class());
            }
        }
    }

    #[test]
    fn greedy_respects_size_limits(d in dataset(60, 3), split in 2usize..12, leaf in 1usize..6) {
        let cfg = GreedyConfig { min_samples_split: split, min_samples_leaf: leaf, max_depth: None };
        let t = build_greedy_tree(&d, cfg).unwrap();
        for (id, node) in t.nodes() {
            if node.is_leaf() {
                prop_assert!(id == msi_tree::NodeId::ROOT || node.rows().len() >= leaf);
            } else {
                prop_assert!(node.rows().len() >= split);
            }
        }
    }

    #[test]
    fn full_greedy_leaves_are_pure_or_inseparable(d in dataset(40, 3)) {
        let cfg = GreedyConfig { min_samples_split: 2, min_samples_leaf: 1, max_depth: None };
        let t = build_greedy_tree(&d, cfg).unwrap();
        for (id, node) in t.leaves() {
            let q = t.subset_of(&d, id);
            let pure = q.labels().all(|l| l == node.class());
            let first = d.row(q.rows()[0]);
            let identical = q.rows().iter().all(|&r| d.row(r) == first);
            prop_assert!(pure || identical);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn msi_growth_is_deterministic_and_monotone(seed: u64) {
        let d = common::structured_dataset(&mut rng(seed));
        let cfg = MsiConfig::default();
        let (a, trace) = build_tree(&d, cfg).unwrap();
        let (b, _) = build_tree(&d, cfg).unwrap();
        prop_assert_eq!(a.serialize(), b.serialize());
        prop_assert!(a.node_count() < 2 * d.n_rows());
        let mut prev = trace.initial.combined;
        for s in &trace.steps {
            prop_assert!(s.after.combined < prev);
            prev = s.after.combined;
        }
        for (id, _) in a.leaves() {
            if let Some(split) = best_split(&a.subset_of(&d, id)) {
                let mut grown = a.clone();
                grown.grow_with_data(&d, id, split).unwrap();
                prop_assert!(msi_tree::cost_of(&grown, &d, cfg).unwrap().combined >= prev);
            }
        }
    }

    #[test]
    fn split_thresholds_separate_the_subset(d in dataset(40, 3)) {
        if let Some(Split { feature, threshold }) = best_split(&d.all()) {
            let below = d.rows().filter(|r| r[feature] <= threshold).count();
            prop_assert!(below > 0 && below < d.n_rows());
        }
    }
}
