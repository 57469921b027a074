mod common;

use commroles::capitalist::{classify_capitalists, CapitalistClass, CapitalistLabel, Ratio, RatioBand};
use commroles::graph::DirectedGraph;
use commroles::report::{capitalist_distribution, intercluster_flows, BandScheme, ThresholdRole};
use proptest::prelude::*;
use rand::Rng;

fn random_clusters(seed: u64, n: usize, k: usize) -> Vec<u32> {
    let mut r = common::rng(seed);
    (0..n).map(|_| r.random_range(0..k as u32)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn flow_shares_sum_to_one(seed in 0u64..100_000, n in 1usize..100, k in 1usize..8) {
        let g = common::random_graph(seed, n, 4 * n);
        let clusters = random_clusters(seed, n, k);
        let f = intercluster_flows(&g, &clusters, k);
        let total: u64 = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| f.count(i, j)).sum();
        prop_assert_eq!(total, g.arc_count() as u64);
        if g.arc_count() > 0 {
            let net: f64 = f.flows().map(|x| x.share_of_network).sum();
            prop_assert!((net - 1.0).abs() < 1e-9);
        }
        for i in 0..k {
            let out: u64 = (0..k).map(|j| f.count(i, j)).sum();
            if out > 0 {
                let s: f64 = (0..k).map(|j| f.flow(i, j).share_of_source).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
            let inc: u64 = (0..k).map(|j| f.count(j, i)).sum();
            if inc > 0 {
                let s: f64 = (0..k).map(|j| f.flow(j, i).share_of_target).sum();
                prop_assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn distribution_duality(seed in 0u64..100_000, n in 1usize..200, k in 1usize..6) {
        let mut r = common::rng(seed);
        let labels: Vec<CapitalistLabel> = (0..n)
            .map(|_| {
                let class = [CapitalistClass::None, CapitalistClass::LowInDegree, CapitalistClass::HighInDegree][r.random_range(0..3)];
                let ratio = match r.random_range(0..10) {
                    0 => Ratio::Infinite,
                    _ => Ratio::Finite(r.random_range(0.0..2.0)),
                };
                CapitalistLabel { overlap: Some(1.0), ratio, in_degree: 600, class, ratio_band: RatioBand::of(ratio) }
            })
            .collect();
        let clusters = random_clusters(seed, n, k);
        for class in [CapitalistClass::LowInDegree, CapitalistClass::HighInDegree] {
            let t = capitalist_distribution(&labels, &clusters, k, class, BandScheme::for_class(class));
            let members = labels.iter().filter(|l| l.class == class).count() as u64;
            prop_assert_eq!(t.class_total, members);
            prop_assert_eq!(t.empty_class, members == 0);
            for row in &t.rows {
                if row.total > 0 {
                    let s: f64 = row.share_of_class.iter().sum();
                    prop_assert!((s - 1.0).abs() < 1e-9);
                }
                for c in 0..k {
                    let lhs = row.share_of_class[c] * row.total as f64;
                    let rhs = row.share_of_cluster[c] * t.cluster_sizes[c] as f64;
                    prop_assert!((lhs - rhs).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn threshold_roles_cover_plane(z in -10.0f64..10.0, p in 0.0f64..1.0) {
        let role = ThresholdRole::classify(z, p);
        prop_assert_eq!(role.is_hub(), z >= 2.5);
    }
}

#[test]
fn capitalist_rows_from_graph() {
    // node 0 follows back all 600 followers
    let arcs: Vec<(u32, u32)> = (1..=600).flat_map(|v| [(v, 0), (0, v)]).collect();
    let g = DirectedGraph::from_arcs(601, arcs);
    let report = classify_capitalists(&g, 0.74).unwrap();
    let mut clusters = vec![1u32; 601];
    clusters[0] = 2;
    let t = capitalist_distribution(&report.labels, &clusters, 3, CapitalistClass::LowInDegree, BandScheme::Binary);
    assert_eq!(t.rows[0].share_of_class, vec![0.0, 0.0, 1.0]);
    assert_eq!(t.rows[0].share_of_cluster, vec![0.0, 0.0, 1.0]);
    assert_eq!(t.rows[1].total, 0);
}
