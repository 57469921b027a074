use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum CommunityError {
    #[error("modularity is undefined for a graph without arcs")]
    UndefinedModularity,
    #[error("partition covers {got} nodes but the graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("node {0} has no community")]
    Unassigned(usize),
}

/// Hard partition of the node set with per-community aggregates.
///
/// Community indices are dense, `0..community_count`, numbered by the order in
/// which they are first met when scanning nodes by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunityPartition {
    assignment: Vec<u32>,
    sizes: Vec<usize>,
    internal_arcs: Vec<u64>,
    in_totals: Vec<u64>,
    out_totals: Vec<u64>,
}

impl CommunityPartition {
    /// Builds a partition from arbitrary community labels, renumbering them densely.
    pub fn from_labels(g: &DirectedGraph, labels: &[usize]) -> Result<Self, CommunityError> {
        if labels.len() != g.node_count() {
            return Err(CommunityError::SizeMismatch {
                expected: g.node_count(),
                got: labels.len(),
            });
        }
        let mut remap = std::collections::HashMap::new();
        let assignment: Vec<u32> = labels
            .iter()
            .map(|&l| {
                let next = remap.len() as u32;
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Ok(Self::with_dense(g, assignment, remap.len()))
    }

    /// Every node in its own community.
    pub fn singletons(g: &DirectedGraph) -> Self {
        let n = g.node_count();
        Self::with_dense(g, (0..n as u32).collect(), n)
    }

    /// All nodes in community 0.
    pub fn single(g: &DirectedGraph) -> Self {
        Self::with_dense(g, vec![0; g.node_count()], 1)
    }

    fn with_dense(g: &DirectedGraph, assignment: Vec<u32>, count: usize) -> Self {
        let mut sizes = vec![0usize; count];
        let mut internal_arcs = vec![0u64; count];
        let mut in_totals = vec![0u64; count];
        let mut out_totals = vec![0u64; count];
        for u in g.nodes() {
            let c = assignment[u as usize] as usize;
            sizes[c] += 1;
            in_totals[c] += g.in_degree(u) as u64;
            out_totals[c] += g.out_degree(u) as u64;
            internal_arcs[c] += g
                .out_neighbors(u)
                .iter()
                .filter(|&&v| assignment[v as usize] as usize == c)
                .count() as u64;
        }
        CommunityPartition {
            assignment,
            sizes,
            internal_arcs,
            in_totals,
            out_totals,
        }
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn community_of(&self, u: NodeId) -> usize {
        self.assignment[u as usize] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn size(&self, c: usize) -> usize {
        self.sizes[c]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Arcs with both endpoints in `c`.
    pub fn internal_arcs(&self, c: usize) -> u64 {
        self.internal_arcs[c]
    }

    /// Sum of member in-degrees.
    pub fn in_total(&self, c: usize) -> u64 {
        self.in_totals[c]
    }

    /// Sum of member out-degrees.
    pub fn out_total(&self, c: usize) -> u64 {
        self.out_totals[c]
    }

    /// Node ids grouped by community, each list ascending.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut groups: Vec<Vec<NodeId>> =
            self.sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (u, &c) in self.assignment.iter().enumerate() {
            groups[c as usize].push(u as NodeId);
        }
        groups
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_renumbering_by_first_appearance() {
        let g = DirectedGraph::from_arcs(4, [(0, 1), (1, 2), (2, 3)]);
        let p = CommunityPartition::from_labels(&g, &[7, 7, 3, 9]).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 2]);
        assert_eq!(p.community_count(), 3);
        assert_eq!(p.sizes().iter().sum::<usize>(), 4);
        assert_eq!(p.internal_arcs(0), 1);
        assert_eq!(p.out_total(0), 2);
        assert_eq!(p.in_total(0), 1);
    }

    #[test]
    fn size_mismatch() {
        let g = DirectedGraph::from_arcs(3, [(0, 1)]);
        assert_eq!(
            CommunityPartition::from_labels(&g, &[0, 1]),
            Err(CommunityError::SizeMismatch { expected: 3, got: 2 })
        );
    }
}
