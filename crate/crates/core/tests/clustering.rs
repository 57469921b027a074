mod common;

use commroles::clustering::{
    davies_bouldin, kmeans, select_k, validate_clusters, ClusterError, Points, SelectConfig,
};
use commroles::measures::{Measure, MeasureMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn rows(data: &[f64], dims: usize) -> Vec<Vec<f64>> {
    data.chunks(dims).map(<[f64]>::to_vec).collect()
}

#[test]
fn wcss_trace_never_increases() {
    for seed in 0..10 {
        let (data, _) = common::gaussian_blobs(seed, 5, 80, 3, 3.0);
        let run = kmeans(Points::new(&data, 3), 7, seed, 100).unwrap();
        for w in run.wcss_trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let last = *run.wcss_trace.last().unwrap();
        assert!((last - run.wcss).abs() <= 1e-9 * run.wcss.max(1.0));
        assert!(run.cluster_sizes().iter().all(|&s| s > 0));
    }
}

#[test]
fn separated_blobs_recovered() {
    for k in 2..=6 {
        let (data, truth) = common::gaussian_blobs(k as u64, k, 60, 6, 10.0);
        let run = kmeans(Points::new(&data, 6), k, 1, 100).unwrap();
        // best of a few seeds is exact on well separated blobs
        let best = (0..5)
            .map(|s| kmeans(Points::new(&data, 6), k, s, 100).unwrap())
            .fold(run, |a, b| if b.wcss < a.wcss { b } else { a });
        assert!(common::same_partition(&best.assignment, &truth), "k = {k}");
    }
}

#[test]
fn select_k_finds_planted_count() {
    for k in 2..=6 {
        let (data, _) = common::gaussian_blobs(100 + k as u64, k, 50, 6, 10.0);
        let cfg = SelectConfig { k_min: 2, k_max: 8, seed: 3, ..Default::default() };
        let s = select_k(Points::new(&data, 6), &cfg).unwrap();
        assert_eq!(s.best_k, k);
        assert_eq!(s.table.len(), 7);
        let best_row = s.table.iter().find(|r| r.k == s.best_k).unwrap();
        assert!(s.table.iter().all(|r| r.db_index >= best_row.db_index));
    }
}

#[test]
fn select_k_is_deterministic() {
    let (data, _) = common::gaussian_blobs(5, 4, 40, 3, 4.0);
    let cfg = SelectConfig { k_min: 2, k_max: 6, seed: 12, ..Default::default() };
    let a = select_k(Points::new(&data, 3), &cfg).unwrap();
    let b = select_k(Points::new(&data, 3), &cfg).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.table, b.table);
}

#[test]
fn infeasible_k_reported() {
    let data = [1.0, 1.0, 2.0, 2.0, 1.0, 1.0];
    assert!(matches!(
        kmeans(Points::new(&data, 2), 3, 0, 10),
        Err(ClusterError::InfeasibleK { k: 3, distinct: 2 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn davies_bouldin_matches_definition(seed in 0u64..10_000, k in 2usize..6, dims in 1usize..5) {
        let (data, truth) = common::gaussian_blobs(seed, k, 12, dims, 2.0);
        let pts = rows(&data, dims);
        let fast = davies_bouldin(Points::new(&data, dims), &truth, k).unwrap();
        let naive = common::naive_davies_bouldin(&pts, &truth, k);
        prop_assert!((fast - naive).abs() < 1e-10);

        // relabelling clusters and reordering points leave the index unchanged
        let mut relabel: Vec<u32> = (0..k as u32).collect();
        relabel.shuffle(&mut common::rng(seed));
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.shuffle(&mut common::rng(seed + 1));
        let data2: Vec<f64> = order.iter().flat_map(|&i| pts[i].clone()).collect();
        let truth2: Vec<u32> = order.iter().map(|&i| relabel[truth[i] as usize]).collect();
        let permuted = davies_bouldin(Points::new(&data2, dims), &truth2, k).unwrap();
        prop_assert!((fast - permuted).abs() < 1e-10);
    }

    #[test]
    fn kmeans_is_a_local_optimum(seed in 0u64..10_000, k in 1usize..6) {
        let (data, _) = common::gaussian_blobs(seed, 3, 20, 2, 3.0);
        let run = kmeans(Points::new(&data, 2), k, seed, 300).unwrap();
        prop_assume!(run.converged);
        let pts = rows(&data, 2);
        for (i, p) in pts.iter().enumerate() {
            let own = run.assignment[i] as usize;
            let d_own: f64 = p.iter().zip(run.centroid(own)).map(|(a, b)| (a - b).powi(2)).sum();
            for j in 0..k {
                let d: f64 = p.iter().zip(run.centroid(j)).map(|(a, b)| (a - b).powi(2)).sum();
                prop_assert!(d_own <= d + 1e-9);
            }
        }
    }
}

#[test]
fn validation_on_separated_clusters() {
    let (data, truth) = common::gaussian_blobs(2, 3, 40, 2, 10.0);
    let cols: Vec<Vec<f64>> = (0..2).map(|c| data.chunks(2).map(|r| r[c]).collect()).collect();
    let mm = MeasureMatrix::from_columns(vec![Measure::DIn, Measure::DOut], cols);
    let v = validate_clusters(&mm, &truth, 3, 0.05).unwrap();
    assert_eq!(v.comparisons, 6);
    assert!(v.anova.iter().all(|a| a.p_value < 1e-10));
    // clusters 0 and 1 share the second axis coordinate only through noise
    let on_axis: Vec<_> = v.pairs.iter().filter(|p| p.measure == Measure::DIn).collect();
    assert!(on_axis.iter().filter(|p| p.significant).count() >= 2);
}
