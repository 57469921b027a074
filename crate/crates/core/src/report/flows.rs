use std::io::Write;

use crate::graph::DirectedGraph;
use crate::io::fmt_sig;

/// Arc counts between every ordered pair of clusters.
#[derive(Clone, Debug, PartialEq)]
pub struct InterClusterFlows {
    k: usize,
    counts: Vec<u64>,
    out_totals: Vec<u64>,
    in_totals: Vec<u64>,
    total: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flow {
    pub source: usize,
    pub target: usize,
    pub arcs: u64,
    pub share_of_source: f64,
    pub share_of_network: f64,
    pub share_of_target: f64,
}

impl InterClusterFlows {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k + j]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn share(num: u64, den: u64) -> f64 {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    }

    pub fn flow(&self, i: usize, j: usize) -> Flow {
        let arcs = self.count(i, j);
        Flow {
            source: i,
            target: j,
            arcs,
            share_of_source: Self::share(arcs, self.out_totals[i]),
            share_of_network: Self::share(arcs, self.total),
            share_of_target: Self::share(arcs, self.in_totals[j]),
        }
    }

    /// All ordered pairs with at least one arc, row-major.
    pub fn flows(&self) -> impl Iterator<Item = Flow> + '_ {
        (0..self.k)
            .flat_map(move |i| (0..self.k).map(move |j| (i, j)))
            .filter(move |&(i, j)| self.count(i, j) > 0)
            .map(move |(i, j)| self.flow(i, j))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "source,target,arcs,share_of_source,share_of_network,share_of_target")?;
        for f in self.flows() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                f.source,
                f.target,
                f.arcs,
                fmt_sig(f.share_of_source),
                fmt_sig(f.share_of_network),
                fmt_sig(f.share_of_target)
            )?;
        }
        out.flush()
    }

    /// Graphviz digraph of the cluster-level flows; arcs below `min_network_share`
    /// of all arcs are left out of the drawing.
    pub fn write_dot<W: Write>(&self, cluster_names: &[String], min_network_share: f64, mut out: W) -> std::io::Result<()> {
        writeln!(out, "digraph clusters {{")?;
        for (i, name) in cluster_names.iter().enumerate().take(self.k) {
            writeln!(out, "  c{i} [label=\"{}\"];", name.replace('"', "'"))?;
        }
        for f in self.flows() {
            if f.share_of_network < min_network_share {
                continue;
            }
            writeln!(
                out,
                "  c{} -> c{} [label=\"{} / {} / {}\", penwidth={}];",
                f.source,
                f.target,
                pct(f.share_of_source),
                pct(f.share_of_network),
                pct(f.share_of_target),
                fmt_sig(1.0 + 9.0 * f.share_of_network)
            )?;
        }
        writeln!(out, "}}")?;
        out.flush()
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

pub fn intercluster_flows(g: &DirectedGraph, clusters: &[u32], k: usize) -> InterClusterFlows {
    assert_eq!(clusters.len(), g.node_count());
    let mut counts = vec![0u64; k * k];
    for (u, v) in g.arcs() {
        counts[clusters[u as usize] as usize * k + clusters[v as usize] as usize] += 1;
    }
    let mut out_totals = vec![0u64; k];
    let mut in_totals = vec![0u64; k];
    for i in 0..k {
        for j in 0..k {
            out_totals[i] += counts[i * k + j];
            in_totals[j] += counts[i * k + j];
        }
    }
    InterClusterFlows {
        k,
        counts,
        out_totals,
        in_totals,
        total: g.arc_count() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster() {
        let g = DirectedGraph::from_arcs(3, [(0, 1), (1, 2)]);
        let f = intercluster_flows(&g, &[0, 0, 0], 1);
        let only = f.flow(0, 0);
        assert_eq!(
            (only.share_of_source, only.share_of_network, only.share_of_target),
            (1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn two_clusters_hand_count() {
        // A = {0, 1}, B = {2, 3}
        let g = DirectedGraph::from_arcs(4, [(0, 2), (0, 3), (1, 2), (3, 1)]);
        let f = intercluster_flows(&g, &[0, 0, 1, 1], 2);
        let ab = f.flow(0, 1);
        assert_eq!(ab.arcs, 3);
        assert_eq!(ab.share_of_source, 1.0);
        assert_eq!(ab.share_of_network, 0.75);
        assert_eq!(ab.share_of_target, 1.0);
        assert_eq!(f.flow(1, 0).share_of_network, 0.25);
    }

    #[test]
    fn dot_suppresses_small_arcs() {
        let mut arcs: Vec<(u32, u32)> = (0..200).map(|i| (i, (i + 1) % 200)).collect();
        arcs.push((0, 150));
        let g = DirectedGraph::from_arcs(200, arcs);
        let clusters: Vec<u32> = (0..200).map(|i| if i < 100 { 0 } else { 1 }).collect();
        let f = intercluster_flows(&g, &clusters, 2);
        let names = vec!["a".to_string(), "b".to_string()];
        let mut dot = Vec::new();
        f.write_dot(&names, 0.01, &mut dot).unwrap();
        let dot = String::from_utf8(dot).unwrap();
        // 0 -> 1 carries 2 of 201 arcs (just below 1%), 1 -> 0 only one
        assert!(!dot.contains("c0 -> c1"));
        assert!(!dot.contains("c1 -> c0"));
        assert!(dot.contains("c0 -> c0"));
        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("\n0,1,2,"));
    }
}
