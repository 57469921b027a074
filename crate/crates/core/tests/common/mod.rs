//! Reference implementations written straight from the definitions, without
//! sharing code paths with the library.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use commroles::community::CommunityPartition;
use commroles::graph::DirectedGraph;
use commroles::measures::Measure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random digraph with `n` nodes, about `m` arcs and some communities.
pub fn random_graph(seed: u64, n: usize, m: usize) -> DirectedGraph {
    let mut r = rng(seed);
    let arcs: Vec<(u32, u32)> = (0..m)
        .map(|_| (r.random_range(0..n) as u32, r.random_range(0..n) as u32))
        .collect();
    DirectedGraph::from_arcs(n, arcs)
}

pub fn random_partition(seed: u64, g: &DirectedGraph, communities: usize) -> CommunityPartition {
    let mut r = rng(seed ^ 0x9e37_79b9);
    let labels: Vec<usize> = (0..g.node_count()).map(|_| r.random_range(0..communities)).collect();
    CommunityPartition::from_labels(g, &labels).unwrap()
}

pub fn arc_list(g: &DirectedGraph) -> Vec<(usize, usize)> {
    g.arcs().map(|(u, v)| (u as usize, v as usize)).collect()
}

/// Per-node map community -> (in arcs, out arcs), from a scan of the arc list.
fn community_counts(g: &DirectedGraph, comm: &[usize]) -> Vec<HashMap<usize, (f64, f64)>> {
    let mut counts = vec![HashMap::new(); g.node_count()];
    for (u, v) in arc_list(g) {
        counts[u].entry(comm[v]).or_insert((0.0, 0.0)).1 += 1.0;
        counts[v].entry(comm[u]).or_insert((0.0, 0.0)).0 += 1.0;
    }
    counts
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Within-community standardization; spreads within 1e-9 of zero count as none.
pub fn naive_zscore(values: &[f64], comm: &[usize]) -> Vec<f64> {
    let mut groups: HashMap<usize, Vec<f64>> = HashMap::new();
    for (u, &c) in comm.iter().enumerate() {
        groups.entry(c).or_default().push(values[u]);
    }
    let stats: HashMap<usize, (f64, f64)> = groups.iter().map(|(&c, vs)| (c, mean_std(vs))).collect();
    values
        .iter()
        .zip(comm)
        .map(|(&v, c)| {
            let (mean, std) = stats[c];
            if std <= 1e-9 {
                0.0
            } else {
                (v - mean) / std
            }
        })
        .collect()
}

/// One naive column per measure.
pub fn naive_measure(g: &DirectedGraph, p: &CommunityPartition, m: Measure) -> Vec<f64> {
    let comm: Vec<usize> = (0..g.node_count()).map(|u| p.community_of(u as u32)).collect();
    let counts = community_counts(g, &comm);
    // direction picks (in, out) -> scalar
    let pick = |dir: i32, (i, o): (f64, f64)| match dir {
        0 => i + o,
        1 => i,
        _ => o,
    };
    let internal = |dir| -> Vec<f64> {
        (0..g.node_count())
            .map(|u| counts[u].get(&comm[u]).map_or(0.0, |&c| pick(dir, c)))
            .collect()
    };
    let external_values = |u: usize, dir| -> Vec<f64> {
        counts[u]
            .iter()
            .filter(|(&c, _)| c != comm[u])
            .map(|(_, &x)| pick(dir, x))
            .filter(|&d| d > 0.0)
            .collect()
    };
    let participation = |dir| -> Vec<f64> {
        (0..g.node_count())
            .map(|u| {
                let d: f64 = counts[u].values().map(|&x| pick(dir, x)).sum();
                if d == 0.0 {
                    return 0.0;
                }
                1.0 - counts[u].values().map(|&x| (pick(dir, x) / d).powi(2)).sum::<f64>()
            })
            .collect()
    };
    let per_node = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..g.node_count()).map(f).collect() };
    let dir_of = |m: Measure| if m.name().ends_with("_in") { 1 } else { 2 };
    match m {
        Measure::Z => naive_zscore(&internal(0), &comm),
        Measure::P => participation(0),
        Measure::ZIn | Measure::ZOut | Measure::IIntIn | Measure::IIntOut => naive_zscore(&internal(dir_of(m)), &comm),
        Measure::PIn | Measure::POut => participation(dir_of(m)),
        Measure::IExtIn | Measure::IExtOut => {
            let d = dir_of(m);
            naive_zscore(&per_node(&|u| external_values(u, d).iter().sum()), &comm)
        }
        Measure::DIn | Measure::DOut => {
            let d = dir_of(m);
            naive_zscore(&per_node(&|u| external_values(u, d).len() as f64), &comm)
        }
        Measure::HIn | Measure::HOut => {
            let d = dir_of(m);
            let delta = per_node(&|u| {
                let vs = external_values(u, d);
                if vs.len() < 2 {
                    0.0
                } else {
                    mean_std(&vs).1
                }
            });
            naive_zscore(&delta, &comm)
        }
    }
}

/// `Q = (1/m) sum_ij [A_ij - dout_i din_j / m] [c_i == c_j]`, by a double loop.
pub fn naive_modularity(g: &DirectedGraph, comm: &[usize]) -> f64 {
    let n = g.node_count();
    let m = g.arc_count() as f64;
    let arcs: HashSet<(usize, usize)> = arc_list(g).into_iter().collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if comm[i] != comm[j] {
                continue;
            }
            let a = if arcs.contains(&(i, j)) { 1.0 } else { 0.0 };
            q += a - g.out_degree(i as u32) as f64 * g.in_degree(j as u32) as f64 / m;
        }
    }
    q / m
}

/// Normalized mutual information with the arithmetic-mean normalization.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut pa: HashMap<usize, f64> = HashMap::new();
    let mut pb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *pa.entry(x).or_default() += 1.0;
        *pb.entry(y).or_default() += 1.0;
    }
    let h = |p: &HashMap<usize, f64>| -p.values().map(|&c| (c / n) * (c / n).ln()).sum::<f64>();
    let (ha, hb) = (h(&pa), h(&pb));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| (c / n) * ((c / n) / ((pa[&x] / n) * (pb[&y] / n))).ln())
        .sum();
    2.0 * mi / (ha + hb)
}

/// Davies-Bouldin index from the definition, points as nested vectors.
pub fn naive_davies_bouldin(points: &[Vec<f64>], assignment: &[u32], k: usize) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let members: Vec<Vec<&Vec<f64>>> = (0..k)
        .map(|c| points.iter().zip(assignment).filter(|(_, &a)| a as usize == c).map(|(p, _)| p).collect())
        .collect();
    let centroids: Vec<Vec<f64>> = members
        .iter()
        .map(|ms| {
            let d = ms[0].len();
            (0..d).map(|j| ms.iter().map(|p| p[j]).sum::<f64>() / ms.len() as f64).collect()
        })
        .collect();
    let scatter: Vec<f64> = (0..k)
        .map(|c| members[c].iter().map(|p| dist(p, &centroids[c])).sum::<f64>() / members[c].len() as f64)
        .collect();
    (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (scatter[i] + scatter[j]) / dist(&centroids[i], &centroids[j]))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / k as f64
}

/// Overlap index from neighbor sets.
pub fn naive_overlap(g: &DirectedGraph, u: u32) -> Option<f64> {
    let followers: HashSet<usize> = arc_list(g).into_iter().filter(|&(_, v)| v == u as usize).map(|(s, _)| s).collect();
    let friends: HashSet<usize> = arc_list(g).into_iter().filter(|&(s, _)| s == u as usize).map(|(_, v)| v).collect();
    let denom = followers.len().min(friends.len());
    (denom > 0).then(|| followers.intersection(&friends).count() as f64 / denom as f64)
}

/// `k` Gaussian blobs of `per` points each, centers `separation` apart along a diagonal.
pub fn gaussian_blobs(seed: u64, k: usize, per: usize, dims: usize, separation: f64) -> (Vec<f64>, Vec<u32>) {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut data = Vec::with_capacity(k * per * dims);
    let mut truth = Vec::with_capacity(k * per);
    for c in 0..k {
        for _ in 0..per {
            for d in 0..dims {
                // centers on distinct axes keep every pair `separation` sigmas apart
                let center = if d == c % dims { separation * (1 + c / dims) as f64 } else { 0.0 };
                data.push(center + normal.sample(&mut r));
            }
            truth.push(c as u32);
        }
    }
    (data, truth)
}

/// True when the two labelings induce the same partition.
pub fn same_partition(a: &[u32], b: &[u32]) -> bool {
    let mut ab: HashMap<u32, u32> = HashMap::new();
    let mut ba: HashMap<u32, u32> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *ab.entry(x).or_insert(y) != y || *ba.entry(y).or_insert(x) != x {
            return false;
        }
    }
    true
}
