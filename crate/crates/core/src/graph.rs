//! Immutable directed graph in compressed sparse row form.
//!
//! Nodes are dense `u32` indices assigned in order of first appearance in the
//! input. Both the successor (friend) and predecessor (follower) lists are kept
//! sorted so that neighborhood intersections are a linear merge.

use std::io::{BufRead, Write};

use thiserror::Error;

/// Dense node index, `0 <= id < node_count`.
pub type NodeId = u32;

/// Original node label as read from an edge list.
pub type Label = u64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list contains no arcs or nodes")]
    Empty,
    #[error("node {node} out of bounds (node count {node_count})")]
    NodeOutOfBounds { node: usize, node_count: usize },
    #[error("graph too large: more than {} nodes", u32::MAX)]
    TooManyNodes,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Options controlling edge-list ingestion.
#[derive(Clone, Debug)]
pub struct IngestOptions {
    /// Lines whose first non-blank character is this one are skipped.
    pub comment_prefix: char,
    /// Expected number of arcs, used only to pre-size buffers.
    pub capacity_hint: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            comment_prefix: '#',
            capacity_hint: 0,
        }
    }
}

/// Counters collected while reading an edge list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub lines: usize,
    pub comment_lines: usize,
    pub blank_lines: usize,
    pub self_loops_dropped: usize,
    pub duplicates_collapsed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Degrees {
    pub d_in: usize,
    pub d_out: usize,
    pub d_total: usize,
}

/// Simple directed graph: no self-loops, no parallel arcs.
#[derive(Clone, Debug)]
pub struct DirectedGraph {
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>,
    in_offsets: Vec<usize>,
    in_sources: Vec<NodeId>,
    labels: Vec<Label>,
    // (label, node) sorted by label
    label_index: Vec<(Label, NodeId)>,
    stats: IngestStats,
}

impl DirectedGraph {
    /// Builds a graph over nodes `0..node_count` labelled by their index.
    ///
    /// Self-loops are dropped and duplicate arcs collapsed; the counts are
    /// reported through [`DirectedGraph::stats`].
    pub fn from_arcs(node_count: usize, arcs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let labels = (0..node_count as Label).collect();
        Self::build(labels, arcs.into_iter().collect(), IngestStats::default())
    }

    /// Like [`DirectedGraph::from_arcs`] but with explicit labels per node.
    pub fn from_labelled_arcs(labels: Vec<Label>, arcs: Vec<(NodeId, NodeId)>) -> Self {
        Self::build(labels, arcs, IngestStats::default())
    }

    fn build(labels: Vec<Label>, mut arcs: Vec<(NodeId, NodeId)>, mut stats: IngestStats) -> Self {
        let n = labels.len();
        let before = arcs.len();
        arcs.retain(|&(u, v)| u != v);
        stats.self_loops_dropped += before - arcs.len();
        arcs.sort_unstable();
        let before = arcs.len();
        arcs.dedup();
        stats.duplicates_collapsed += before - arcs.len();

        let mut out_offsets = vec![0usize; n + 1];
        let mut in_offsets = vec![0usize; n + 1];
        for &(u, v) in &arcs {
            assert!((u as usize) < n && (v as usize) < n, "arc endpoint out of range");
            out_offsets[u as usize + 1] += 1;
            in_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        // arcs are sorted by (src, dst), so targets come out sorted per source
        let out_targets: Vec<NodeId> = arcs.iter().map(|&(_, v)| v).collect();
        let mut in_sources = vec![0 as NodeId; arcs.len()];
        let mut cursor = in_offsets.clone();
        for &(u, v) in &arcs {
            let slot = &mut cursor[v as usize];
            in_sources[*slot] = u;
            *slot += 1;
        }
        drop(arcs);

        let mut label_index: Vec<(Label, NodeId)> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as NodeId))
            .collect();
        label_index.sort_unstable();

        DirectedGraph {
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            labels,
            label_index,
            stats,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of arcs, `m`.
    pub fn arc_count(&self) -> usize {
        self.out_targets.len()
    }

    /// Friends of `u`, sorted ascending.
    #[inline]
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.out_targets[self.out_offsets[u]..self.out_offsets[u + 1]]
    }

    /// Followers of `u`, sorted ascending.
    #[inline]
    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.in_sources[self.in_offsets[u]..self.in_offsets[u + 1]]
    }

    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.out_offsets[u + 1] - self.out_offsets[u]
    }

    #[inline]
    pub fn in_degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.in_offsets[u + 1] - self.in_offsets[u]
    }

    pub fn degrees(&self, u: NodeId) -> Result<Degrees, GraphError> {
        self.check(u)?;
        let d_in = self.in_degree(u);
        let d_out = self.out_degree(u);
        Ok(Degrees {
            d_in,
            d_out,
            d_total: d_in + d_out,
        })
    }

    pub fn check(&self, u: NodeId) -> Result<(), GraphError> {
        if (u as usize) < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfBounds {
                node: u as usize,
                node_count: self.node_count(),
            })
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.node_count() as NodeId
    }

    /// All arcs in ascending `(src, dst)` node-id order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.out_neighbors(u).iter().map(move |&v| (u, v)))
    }

    pub fn label(&self, u: NodeId) -> Label {
        self.labels[u as usize]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn node_of(&self, label: Label) -> Option<NodeId> {
        self.label_index
            .binary_search_by_key(&label, |&(l, _)| l)
            .ok()
            .map(|i| self.label_index[i].1)
    }

    pub fn stats(&self) -> &IngestStats {
        &self.stats
    }

    /// Writes `src\tdst\n` lines in ascending label order.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut by_label: Vec<(Label, Label)> =
            self.arcs().map(|(u, v)| (self.label(u), self.label(v))).collect();
        by_label.sort_unstable();
        for (s, d) in by_label {
            writeln!(out, "{s}\t{d}")?;
        }
        out.flush()
    }
}

/// Reads a whitespace-separated `src dst` edge list.
pub fn ingest_edge_list<R: BufRead>(mut source: R, options: &IngestOptions) -> Result<DirectedGraph, GraphError> {
    let mut stats = IngestStats::default();
    let mut ids: std::collections::HashMap<Label, NodeId> = std::collections::HashMap::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::with_capacity(options.capacity_hint);

    let mut intern = |label: Label, labels: &mut Vec<Label>| -> Result<NodeId, GraphError> {
        if let Some(&id) = ids.get(&label) {
            return Ok(id);
        }
        let id = NodeId::try_from(labels.len()).map_err(|_| GraphError::TooManyNodes)?;
        ids.insert(label, id);
        labels.push(label);
        Ok(id)
    };

    let mut buf = String::new();
    loop {
        buf.clear();
        if source.read_line(&mut buf)? == 0 {
            break;
        }
        stats.lines += 1;
        let line = buf.trim();
        if line.is_empty() {
            stats.blank_lines += 1;
            continue;
        }
        if line.starts_with(options.comment_prefix) {
            stats.comment_lines += 1;
            continue;
        }
        let mut tokens = line.split_ascii_whitespace();
        let (src, dst) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(s), Some(d), None) => (s, d),
            _ => {
                return Err(GraphError::Parse {
                    line: stats.lines,
                    message: format!("expected two tokens, got {:?}", line),
                })
            }
        };
        let parse = |tok: &str| {
            tok.parse::<Label>().map_err(|_| GraphError::Parse {
                line: stats.lines,
                message: format!("invalid node label {tok:?}"),
            })
        };
        let (src, dst) = (parse(src)?, parse(dst)?);
        let u = intern(src, &mut labels)?;
        let v = intern(dst, &mut labels)?;
        arcs.push((u, v));
    }
    drop(ids);
    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    Ok(DirectedGraph::build(labels, arcs, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DirectedGraph, GraphError> {
        ingest_edge_list(text.as_bytes(), &IngestOptions::default())
    }

    #[test]
    fn three_arc_example() {
        let g = parse("0 1\n1 0\n1 2\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.arc_count(), 3);
        assert_eq!(g.out_degree(1), 2);
        assert_eq!(
            g.degrees(1).unwrap(),
            Degrees { d_in: 1, d_out: 2, d_total: 3 }
        );
    }

    #[test]
    fn self_loop_only() {
        let g = parse("5 5").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.arc_count(), 0);
        assert_eq!(g.stats().self_loops_dropped, 1);
        assert_eq!(g.degrees(0).unwrap(), Degrees { d_in: 0, d_out: 0, d_total: 0 });
    }

    #[test]
    fn duplicates_collapse() {
        let g = parse("0 1\n0 1\n").unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arc_count(), 1);
        assert_eq!(g.stats().duplicates_collapsed, 1);
    }

    #[test]
    fn star_center_in_only() {
        let g = parse("1 0\n2 0\n3 0\n4 0").unwrap();
        let c = g.node_of(0).unwrap();
        assert_eq!(g.degrees(c).unwrap(), Degrees { d_in: 4, d_out: 0, d_total: 4 });
    }

    #[test]
    fn comments_tabs_and_missing_trailing_newline() {
        let g = parse("# header\n10\t\t20\n  # indented comment\n\n20   30").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.stats().comment_lines, 2);
        assert_eq!(g.stats().blank_lines, 1);
        assert_eq!(g.labels(), &[10, 20, 30]);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        match parse("0 1\n1 x\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse("0 1\n1 2 3\n") {
            Err(GraphError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("0\n"), Err(GraphError::Parse { line: 1, .. })));
        assert!(matches!(parse("-1 2\n"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse(""), Err(GraphError::Empty)));
        assert!(matches!(parse("# nothing\n\n"), Err(GraphError::Empty)));
    }

    #[test]
    fn out_of_bounds_degree_query() {
        let g = parse("0 1").unwrap();
        assert!(matches!(g.degrees(7), Err(GraphError::NodeOutOfBounds { node: 7, .. })));
    }

    #[test]
    fn writer_sorts_by_label() {
        let g = parse("9 3\n3 9\n3 1\n").unwrap();
        let mut out = Vec::new();
        g.write_edge_list(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "3\t1\n3\t9\n9\t3\n");
    }
}
