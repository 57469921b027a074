//! Louvain optimisation of directed modularity.
//!
//! Moving node `u` (already taken out of its community) into community `c`
//! changes modularity by
//!
//! ```text
//! (k_{u->c} + k_{c->u}) / m  -  (dout_u * din_c + din_u * dout_c) / m^2
//! ```
//!
//! where `k_{u->c}` is the arc weight from `u` into `c` and `din_c`/`dout_c`
//! are the community strength totals without `u`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::DirectedGraph;

use super::partition::{CommunityError, CommunityPartition};
use super::weighted::WeightedDigraph;

pub const DEFAULT_MIN_GAIN: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct LouvainConfig {
    pub seed: u64,
    pub min_gain: f64,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig {
            seed: 0,
            min_gain: DEFAULT_MIN_GAIN,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LouvainResult {
    pub partition: CommunityPartition,
    pub modularity: f64,
    /// Modularity after each aggregation level and after the final node-level pass.
    pub level_modularity: Vec<f64>,
    pub moves: usize,
}

/// Local-move engine over one level graph.
///
/// Community slots are the node indices of the level graph, so there is always
/// room for a node to leave into an empty community.
pub struct LocalMover<'g> {
    g: &'g WeightedDigraph,
    m: f64,
    comm: Vec<u32>,
    size: Vec<u32>,
    tot_out: Vec<u64>,
    tot_in: Vec<u64>,
    empty: Vec<u32>,
    w_to: Vec<u64>,
    w_from: Vec<u64>,
    touched: Vec<u32>,
}

impl<'g> LocalMover<'g> {
    /// `assignment` labels must be below `g.node_count()`.
    pub fn new(g: &'g WeightedDigraph, assignment: Vec<u32>) -> Self {
        let n = g.node_count();
        assert_eq!(assignment.len(), n);
        let mut size = vec![0u32; n];
        let mut tot_out = vec![0u64; n];
        let mut tot_in = vec![0u64; n];
        for (u, &c) in assignment.iter().enumerate() {
            let c = c as usize;
            size[c] += 1;
            tot_out[c] += g.out_strength(u);
            tot_in[c] += g.in_strength(u);
        }
        let empty = (0..n as u32).rev().filter(|&c| size[c as usize] == 0).collect();
        LocalMover {
            g,
            m: g.total_weight() as f64,
            comm: assignment,
            size,
            tot_out,
            tot_in,
            empty,
            w_to: vec![0; n],
            w_from: vec![0; n],
            touched: Vec::new(),
        }
    }

    pub fn assignment(&self) -> &[u32] {
        &self.comm
    }

    fn gather(&mut self, u: usize) {
        for (v, w) in self.g.out_arcs(u) {
            let c = self.comm[v] as usize;
            if self.w_to[c] == 0 && self.w_from[c] == 0 {
                self.touched.push(c as u32);
            }
            self.w_to[c] += w;
        }
        for (v, w) in self.g.in_arcs(u) {
            let c = self.comm[v] as usize;
            if self.w_to[c] == 0 && self.w_from[c] == 0 {
                self.touched.push(c as u32);
            }
            self.w_from[c] += w;
        }
    }

    fn clear(&mut self) {
        for &c in &self.touched {
            self.w_to[c as usize] = 0;
            self.w_from[c as usize] = 0;
        }
        self.touched.clear();
    }

    fn remove(&mut self, u: usize) {
        let c = self.comm[u] as usize;
        self.size[c] -= 1;
        self.tot_out[c] -= self.g.out_strength(u);
        self.tot_in[c] -= self.g.in_strength(u);
    }

    fn insert(&mut self, u: usize, c: usize) {
        self.comm[u] = c as u32;
        self.size[c] += 1;
        self.tot_out[c] += self.g.out_strength(u);
        self.tot_in[c] += self.g.in_strength(u);
    }

    /// Gain of inserting the detached node `u` into `c`.
    #[inline]
    fn insertion_gain(&self, u: usize, c: usize) -> f64 {
        let link = (self.w_to[c] + self.w_from[c]) as f64;
        let null = self.g.out_strength(u) as f64 * self.tot_in[c] as f64
            + self.g.in_strength(u) as f64 * self.tot_out[c] as f64;
        link / self.m - null / (self.m * self.m)
    }

    fn empty_slot(&mut self) -> Option<usize> {
        while let Some(&c) = self.empty.last() {
            if self.size[c as usize] == 0 {
                return Some(c as usize);
            }
            self.empty.pop();
        }
        None
    }

    /// Modularity change from moving `u` to community slot `target`, without applying it.
    pub fn move_delta(&mut self, u: usize, target: usize) -> f64 {
        let own = self.comm[u] as usize;
        if own == target {
            return 0.0;
        }
        self.gather(u);
        self.remove(u);
        let delta = self.insertion_gain(u, target) - self.insertion_gain(u, own);
        self.insert(u, own);
        self.clear();
        delta
    }

    /// Moves `u` to `target` unconditionally.
    pub fn apply(&mut self, u: usize, target: usize) {
        let own = self.comm[u] as usize;
        self.remove(u);
        self.insert(u, target);
        if self.size[own] == 0 {
            self.empty.push(own as u32);
        }
    }

    /// Best move for `u` if it improves modularity by more than `min_gain`.
    fn best_move(&mut self, u: usize, min_gain: f64) -> Option<(usize, f64)> {
        let own = self.comm[u] as usize;
        self.gather(u);
        self.remove(u);
        let stay = self.insertion_gain(u, own);
        let mut best = own;
        let mut best_gain = stay;
        for i in 0..self.touched.len() {
            let c = self.touched[i] as usize;
            let gain = self.insertion_gain(u, c);
            if gain > best_gain || (gain == best_gain && c < best) {
                best = c;
                best_gain = gain;
            }
        }
        // leaving to an empty community has zero insertion gain
        if self.size[own] > 0 {
            if let Some(e) = self.empty_slot() {
                if 0.0 > best_gain || (0.0 == best_gain && e < best) {
                    best = e;
                    best_gain = 0.0;
                }
            }
        }
        self.insert(u, own);
        self.clear();
        let delta = best_gain - stay;
        (best != own && delta > min_gain).then_some((best, delta))
    }

    /// One pass over `order`; returns the number of moves and total gain.
    pub fn sweep(&mut self, order: &[usize], min_gain: f64) -> (usize, f64) {
        let mut moves = 0;
        let mut total = 0.0;
        for &u in order {
            if let Some((target, delta)) = self.best_move(u, min_gain) {
                self.apply(u, target);
                moves += 1;
                total += delta;
            }
        }
        (moves, total)
    }

    /// Dense relabelling of the current assignment and its community count.
    pub fn dense(&self) -> (Vec<u32>, usize) {
        dense_labels(&self.comm)
    }
}

pub(crate) fn dense_labels(labels: &[u32]) -> (Vec<u32>, usize) {
    let mut remap = vec![u32::MAX; labels.len().max(1)];
    let mut next = 0u32;
    let dense = labels
        .iter()
        .map(|&c| {
            let slot = &mut remap[c as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *slot
        })
        .collect();
    (dense, next as usize)
}

fn sweep_until_stable(mover: &mut LocalMover<'_>, rng: &mut ChaCha8Rng, min_gain: f64) -> usize {
    let mut order: Vec<usize> = (0..mover.g.node_count()).collect();
    let mut moves = 0;
    loop {
        order.shuffle(rng);
        let (m, _) = mover.sweep(&order, min_gain);
        moves += m;
        if m == 0 {
            return moves;
        }
    }
}

/// Multi-level Louvain on directed modularity.
///
/// The result is move-stable on `g` itself: after the aggregation levels a
/// final local-move pass runs on the original nodes.
pub fn louvain(g: &DirectedGraph, config: &LouvainConfig) -> Result<LouvainResult, CommunityError> {
    assert!(config.min_gain > 0.0, "min_gain must be positive");
    if g.arc_count() == 0 {
        return Ok(LouvainResult {
            partition: CommunityPartition::singletons(g),
            modularity: 0.0,
            level_modularity: vec![0.0],
            moves: 0,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fine = WeightedDigraph::from(g);
    let n = fine.node_count();
    let mut node_comm: Vec<u32> = (0..n as u32).collect();
    let mut last_q = fine.modularity(&node_comm, n)?;
    let mut level_modularity = Vec::new();
    let mut coarse: Option<WeightedDigraph> = None;
    let mut total_moves = 0;

    loop {
        let level = coarse.as_ref().unwrap_or(&fine);
        let mut mover = LocalMover::new(level, (0..level.node_count() as u32).collect());
        let moves = sweep_until_stable(&mut mover, &mut rng, config.min_gain);
        total_moves += moves;
        let (level_assign, count) = mover.dense();
        for c in node_comm.iter_mut() {
            *c = level_assign[*c as usize];
        }
        let q = level.modularity(&level_assign, count)?;
        level_modularity.push(q);
        let gained = q - last_q;
        last_q = q;
        if moves == 0 || gained < config.min_gain || count == level.node_count() {
            break;
        }
        coarse = Some(level.coarsen(&level_assign, count));
    }
    drop(coarse);

    let mut mover = LocalMover::new(&fine, node_comm);
    let moves = sweep_until_stable(&mut mover, &mut rng, config.min_gain);
    total_moves += moves;
    let (dense, count) = mover.dense();
    let q = fine.modularity(&dense, count)?;
    level_modularity.push(q);

    let partition = CommunityPartition::from_labels(g, &dense.iter().map(|&c| c as usize).collect::<Vec<_>>())?;
    Ok(LouvainResult {
        partition,
        modularity: q,
        level_modularity,
        moves: total_moves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycles() -> DirectedGraph {
        DirectedGraph::from_arcs(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    }

    #[test]
    fn recovers_two_cycles() {
        let g = two_cycles();
        let r = louvain(&g, &LouvainConfig::default()).unwrap();
        assert_eq!(r.partition.community_count(), 2);
        let a = r.partition.assignment();
        assert!(a[0] == a[1] && a[1] == a[2]);
        assert!(a[3] == a[4] && a[4] == a[5]);
        assert_ne!(a[0], a[3]);
        assert_eq!(r.modularity, 0.5);
    }

    #[test]
    fn single_node_graph() {
        let g = DirectedGraph::from_arcs(1, []);
        let r = louvain(&g, &LouvainConfig::default()).unwrap();
        assert_eq!(r.partition.community_count(), 1);
        assert_eq!(r.modularity, 0.0);
    }

    #[test]
    fn level_sequence_non_decreasing() {
        let arcs: Vec<(u32, u32)> = (0..40u32)
            .flat_map(|u| [(u, (u + 1) % 40), (u, (u * 7 + 3) % 40), ((u * 5) % 40, u)])
            .collect();
        let g = DirectedGraph::from_arcs(40, arcs);
        let r = louvain(&g, &LouvainConfig { seed: 3, ..Default::default() }).unwrap();
        for w in r.level_modularity.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn move_delta_matches_recomputation() {
        let g = two_cycles();
        let w = WeightedDigraph::from(&g);
        let assign = vec![0, 0, 1, 1, 1, 0];
        let mut mover = LocalMover::new(&w, assign.clone());
        let before = w.modularity(&assign, 6).unwrap();
        let delta = mover.move_delta(2, 0);
        let mut after_assign = assign.clone();
        after_assign[2] = 0;
        let after = w.modularity(&after_assign, 6).unwrap();
        assert!((delta - (after - before)).abs() < 1e-12);
    }
}
