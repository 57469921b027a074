//! Integer-weighted directed graph used for Louvain level aggregation.

use crate::graph::DirectedGraph;

use super::partition::{CommunityError, CommunityPartition};

/// Directed multigraph collapsed to integer arc weights, with self-weights
/// kept apart from the adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedDigraph {
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    out_weights: Vec<u64>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    in_weights: Vec<u64>,
    self_weights: Vec<u64>,
    out_strength: Vec<u64>,
    in_strength: Vec<u64>,
    total_weight: u64,
}

impl WeightedDigraph {
    /// Builds from `(src, dst, weight)` triples; parallel arcs are summed.
    pub fn from_weighted_arcs(node_count: usize, mut arcs: Vec<(u32, u32, u64)>) -> Self {
        arcs.sort_unstable_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(u32, u32, u64)> = Vec::with_capacity(arcs.len());
        for (u, v, w) in arcs {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => merged.push((u, v, w)),
            }
        }

        let mut self_weights = vec![0u64; node_count];
        let mut out_strength = vec![0u64; node_count];
        let mut in_strength = vec![0u64; node_count];
        let mut out_offsets = vec![0usize; node_count + 1];
        let mut in_offsets = vec![0usize; node_count + 1];
        let mut total_weight = 0u64;
        for &(u, v, w) in &merged {
            total_weight += w;
            out_strength[u as usize] += w;
            in_strength[v as usize] += w;
            if u == v {
                self_weights[u as usize] += w;
            } else {
                out_offsets[u as usize + 1] += 1;
                in_offsets[v as usize + 1] += 1;
            }
        }
        for i in 0..node_count {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let arc_count = out_offsets[node_count];
        let mut out_targets = Vec::with_capacity(arc_count);
        let mut out_weights = Vec::with_capacity(arc_count);
        let mut in_sources = vec![0u32; arc_count];
        let mut in_weights = vec![0u64; arc_count];
        let mut cursor = in_offsets.clone();
        for &(u, v, w) in &merged {
            if u == v {
                continue;
            }
            out_targets.push(v);
            out_weights.push(w);
            let slot = &mut cursor[v as usize];
            in_sources[*slot] = u;
            in_weights[*slot] = w;
            *slot += 1;
        }
        WeightedDigraph {
            out_offsets,
            out_targets,
            out_weights,
            in_offsets,
            in_sources,
            in_weights,
            self_weights,
            out_strength,
            in_strength,
            total_weight,
        }
    }

    pub fn node_count(&self) -> usize {
        self.self_weights.len()
    }

    /// Sum of all arc weights, self-weights included.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn self_weight(&self, u: usize) -> u64 {
        self.self_weights[u]
    }

    pub fn out_strength(&self, u: usize) -> u64 {
        self.out_strength[u]
    }

    pub fn in_strength(&self, u: usize) -> u64 {
        self.in_strength[u]
    }

    /// Successors other than `u` itself, with arc weights.
    pub fn out_arcs(&self, u: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let r = self.out_offsets[u]..self.out_offsets[u + 1];
        self.out_targets[r.clone()]
            .iter()
            .zip(&self.out_weights[r])
            .map(|(&v, &w)| (v as usize, w))
    }

    /// Predecessors other than `u` itself, with arc weights.
    pub fn in_arcs(&self, u: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        let r = self.in_offsets[u]..self.in_offsets[u + 1];
        self.in_sources[r.clone()]
            .iter()
            .zip(&self.in_weights[r])
            .map(|(&v, &w)| (v as usize, w))
    }

    /// Number of distinct non-self arcs.
    pub fn arc_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Collapses each community of `assignment` (dense labels `0..count`) to one node.
    pub fn coarsen(&self, assignment: &[u32], count: usize) -> WeightedDigraph {
        let mut arcs: Vec<(u32, u32, u64)> = Vec::with_capacity(self.arc_count() + self.node_count());
        for u in 0..self.node_count() {
            let cu = assignment[u];
            if self.self_weights[u] > 0 {
                arcs.push((cu, cu, self.self_weights[u]));
            }
            for (v, w) in self.out_arcs(u) {
                arcs.push((cu, assignment[v], w));
            }
        }
        WeightedDigraph::from_weighted_arcs(count, arcs)
    }

    /// Directed modularity of `assignment` (labels below `count`).
    pub fn modularity(&self, assignment: &[u32], count: usize) -> Result<f64, CommunityError> {
        if self.total_weight == 0 {
            return Err(CommunityError::UndefinedModularity);
        }
        let mut internal = vec![0u64; count];
        let mut tot_out = vec![0u64; count];
        let mut tot_in = vec![0u64; count];
        for u in 0..self.node_count() {
            let c = assignment[u] as usize;
            tot_out[c] += self.out_strength[u];
            tot_in[c] += self.in_strength[u];
            internal[c] += self.self_weights[u];
            internal[c] += self
                .out_arcs(u)
                .filter(|&(v, _)| assignment[v] as usize == c)
                .map(|(_, w)| w)
                .sum::<u64>();
        }
        Ok(modularity_from_aggregates(
            self.total_weight,
            internal.iter().copied(),
            tot_out.iter().copied().zip(tot_in.iter().copied()),
        ))
    }
}

impl From<&DirectedGraph> for WeightedDigraph {
    fn from(g: &DirectedGraph) -> Self {
        WeightedDigraph::from_weighted_arcs(g.node_count(), g.arcs().map(|(u, v)| (u, v, 1)).collect())
    }
}

/// `Q = sum_c [ e_c / m - dout_c * din_c / m^2 ]`.
pub(crate) fn modularity_from_aggregates(
    m: u64,
    internal: impl Iterator<Item = u64>,
    totals: impl Iterator<Item = (u64, u64)>,
) -> f64 {
    let m = m as f64;
    let e: u64 = internal.sum();
    // u128 keeps the null-model sum exact before the single division
    let null: u128 = totals.map(|(o, i)| o as u128 * i as u128).sum();
    e as f64 / m - null as f64 / (m * m)
}

/// Directed (Leicht-Newman) modularity of a partition.
pub fn directed_modularity(g: &DirectedGraph, p: &CommunityPartition) -> Result<f64, CommunityError> {
    if p.node_count() != g.node_count() {
        return Err(CommunityError::SizeMismatch {
            expected: g.node_count(),
            got: p.node_count(),
        });
    }
    let m = g.arc_count() as u64;
    if m == 0 {
        return Err(CommunityError::UndefinedModularity);
    }
    let k = p.community_count();
    Ok(modularity_from_aggregates(
        m,
        (0..k).map(|c| p.internal_arcs(c)),
        (0..k).map(|c| (p.out_total(c), p.in_total(c))),
    ))
}

/// Level aggregation of `g` under `p`.
pub fn coarsen(g: &DirectedGraph, p: &CommunityPartition) -> WeightedDigraph {
    WeightedDigraph::from(g).coarsen(p.assignment(), p.community_count())
}
