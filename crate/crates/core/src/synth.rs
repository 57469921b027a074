//! Directed stochastic block benchmarks with planted social capitalists.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("capitalist {index}: {message}")]
    Infeasible { index: usize, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedCapitalistSpec {
    pub block: usize,
    pub in_degree: usize,
    /// Target friends/followers ratio.
    pub ratio: f64,
    /// Fraction of the out-arcs that go back to followers.
    pub reciprocation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedSpec {
    pub blocks: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub capitalists: Vec<PlantedCapitalistSpec>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedCapitalist {
    pub node: NodeId,
    pub spec: PlantedCapitalistSpec,
}

#[derive(Clone, Debug)]
pub struct Planted {
    pub graph: DirectedGraph,
    /// Block of every node.
    pub blocks: Vec<u32>,
    pub capitalists: Vec<PlantedCapitalist>,
}

impl PlantedSpec {
    pub fn uniform(blocks: usize, size: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        PlantedSpec {
            blocks: vec![size; blocks],
            p_in,
            p_out,
            capitalists: Vec::new(),
            seed,
        }
    }

    pub fn node_count(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let bad = |m: String| Err(SpecError::Invalid(m));
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return bad("block sizes must be at least 1".into());
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return bad(format!("need 0 <= p_out < p_in <= 1, got p_in={} p_out={}", self.p_in, self.p_out));
        }
        let n = self.node_count();
        if n > u32::MAX as usize {
            return bad("too many nodes".into());
        }
        let non_capitalists = n - self.capitalists.len();
        let mut used = vec![0usize; self.blocks.len()];
        for (index, c) in self.capitalists.iter().enumerate() {
            let infeasible = |message: String| Err(SpecError::Infeasible { index, message });
            if c.block >= self.blocks.len() {
                return infeasible(format!("block {} does not exist", c.block));
            }
            used[c.block] += 1;
            if used[c.block] > self.blocks[c.block] {
                return infeasible(format!("block {} has too few nodes", c.block));
            }
            if !(0.0..=1.0).contains(&c.reciprocation) {
                return infeasible(format!("reciprocation {} outside [0, 1]", c.reciprocation));
            }
            if !(c.ratio.is_finite() && c.ratio >= 0.0) {
                return infeasible(format!("ratio {} must be finite and non-negative", c.ratio));
            }
            if c.in_degree > n - 1 {
                return infeasible(format!("in-degree {} exceeds node_count - 1 = {}", c.in_degree, n - 1));
            }
            let out = out_target(c);
            if c.in_degree > non_capitalists || out - mirrored_count(c) > non_capitalists - c.in_degree {
                return infeasible(format!(
                    "targets in={} out={} exceed the {} non-capitalist nodes",
                    c.in_degree, out, non_capitalists
                ));
            }
        }
        Ok(())
    }

    /// Parses the `key=value` spec format.
    ///
    /// `blocks` is a comma list where `size*count` repeats a size; each
    /// `capitalist=block,in_degree,ratio,reciprocation` line adds one capitalist.
    pub fn parse<R: BufRead>(input: R) -> Result<Self, SpecError> {
        let mut blocks = None;
        let mut p_in = None;
        let mut p_out = None;
        let mut seed = 0u64;
        let mut capitalists = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| SpecError::Parse { line: line_no, message };
            let line = line.map_err(|e| err(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected key=value".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| v.trim().parse::<f64>().map_err(|_| err(format!("bad number {v:?}")));
            let int = |v: &str| v.trim().parse::<usize>().map_err(|_| err(format!("bad integer {v:?}")));
            match key {
                "blocks" => {
                    let mut sizes = Vec::new();
                    for item in value.split(',') {
                        match item.split_once('*') {
                            Some((size, count)) => {
                                let (size, count) = (int(size)?, int(count)?);
                                sizes.extend(std::iter::repeat_n(size, count));
                            }
                            None => sizes.push(int(item)?),
                        }
                    }
                    blocks = Some(sizes);
                }
                "p_in" => p_in = Some(num(value)?),
                "p_out" => p_out = Some(num(value)?),
                "seed" => seed = value.parse().map_err(|_| err(format!("bad seed {value:?}")))?,
                "capitalist" => {
                    let f: Vec<&str> = value.split(',').collect();
                    if f.len() != 4 {
                        return Err(err("capitalist needs block,in_degree,ratio,reciprocation".into()));
                    }
                    capitalists.push(PlantedCapitalistSpec {
                        block: int(f[0])?,
                        in_degree: int(f[1])?,
                        ratio: num(f[2])?,
                        reciprocation: num(f[3])?,
                    });
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| SpecError::Invalid(format!("missing key {k}"));
        let spec = PlantedSpec {
            blocks: blocks.ok_or_else(|| missing("blocks"))?,
            p_in: p_in.ok_or_else(|| missing("p_in"))?,
            p_out: p_out.ok_or_else(|| missing("p_out"))?,
            capitalists,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let blocks: Vec<String> = self.blocks.iter().map(usize::to_string).collect();
        writeln!(out, "blocks={}", blocks.join(","))?;
        writeln!(out, "p_in={}", self.p_in)?;
        writeln!(out, "p_out={}", self.p_out)?;
        writeln!(out, "seed={}", self.seed)?;
        for c in &self.capitalists {
            writeln!(out, "capitalist={},{},{},{}", c.block, c.in_degree, c.ratio, c.reciprocation)?;
        }
        out.flush()
    }
}

fn out_target(c: &PlantedCapitalistSpec) -> usize {
    (c.ratio * c.in_degree as f64).round() as usize
}

fn mirrored_count(c: &PlantedCapitalistSpec) -> usize {
    let out = out_target(c);
    ((c.reciprocation * out.min(c.in_degree) as f64).round() as usize).min(out)
}

/// Emits each of the `total` candidate slots independently with probability `p`,
/// visiting only the selected ones.
fn geometric_slots(rng: &mut ChaCha8Rng, total: u64, p: f64, mut emit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut t: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (total - t) as f64 {
            return;
        }
        t += skip as u64;
        emit(t);
        t += 1;
        if t >= total {
            return;
        }
    }
}

/// Samples the block model, then rewires the planted capitalists.
pub fn generate(spec: &PlantedSpec) -> Result<Planted, SpecError> {
    spec.validate()?;
    let n = spec.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut starts = Vec::with_capacity(spec.blocks.len());
    let mut block_of = Vec::with_capacity(n);
    let mut offset = 0usize;
    for (b, &size) in spec.blocks.iter().enumerate() {
        starts.push(offset);
        block_of.extend(std::iter::repeat_n(b as u32, size));
        offset += size;
    }

    // capitalists take the lowest unused ids of their block
    let mut next_free = starts.clone();
    let capitalists: Vec<PlantedCapitalist> = spec
        .capitalists
        .iter()
        .map(|c| {
            let node = next_free[c.block] as NodeId;
            next_free[c.block] += 1;
            PlantedCapitalist { node, spec: c.clone() }
        })
        .collect();
    let mut is_capitalist = vec![false; n];
    for c in &capitalists {
        is_capitalist[c.node as usize] = true;
    }

    let expected: f64 = spec
        .blocks
        .iter()
        .map(|&s| spec.p_in * (s * s.saturating_sub(1)) as f64 + spec.p_out * (s * (n - s)) as f64)
        .sum();
    let mut arcs: Vec<(NodeId, NodeId)> = Vec::with_capacity((expected * 1.01) as usize + 16);
    for (a, &sa) in spec.blocks.iter().enumerate() {
        let start_a = starts[a] as u64;
        for (b, &sb) in spec.blocks.iter().enumerate() {
            let start_b = starts[b] as u64;
            let (sa, sb) = (sa as u64, sb as u64);
            if a == b {
                if sa < 2 {
                    continue;
                }
                geometric_slots(&mut rng, sa * (sa - 1), spec.p_in, |t| {
                    let i = t / (sa - 1);
                    let mut j = t % (sa - 1);
                    if j >= i {
                        j += 1;
                    }
                    arcs.push(((start_a + i) as NodeId, (start_a + j) as NodeId));
                });
            } else {
                geometric_slots(&mut rng, sa * sb, spec.p_out, |t| {
                    arcs.push(((start_a + t / sb) as NodeId, (start_b + t % sb) as NodeId));
                });
            }
        }
    }

    if !capitalists.is_empty() {
        arcs.retain(|&(u, v)| !is_capitalist[u as usize] && !is_capitalist[v as usize]);
        let pool: Vec<NodeId> = (0..n as NodeId).filter(|&u| !is_capitalist[u as usize]).collect();
        for c in &capitalists {
            plant_capitalist(&mut rng, c, &pool, &mut arcs);
        }
    }

    Ok(Planted {
        graph: DirectedGraph::from_arcs(n, arcs),
        blocks: block_of,
        capitalists,
    })
}

/// Distinct uniform picks from `pool`, skipping members of `exclude`.
fn sample_distinct(rng: &mut ChaCha8Rng, pool: &[NodeId], count: usize, exclude: &HashSet<NodeId>) -> Vec<NodeId> {
    let available = pool.len() - pool.iter().filter(|u| exclude.contains(u)).count();
    assert!(count <= available);
    if count * 2 > available {
        let mut rest: Vec<NodeId> = pool.iter().copied().filter(|u| !exclude.contains(u)).collect();
        rest.shuffle(rng);
        rest.truncate(count);
        return rest;
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = pool[rng.random_range(0..pool.len())];
        if !exclude.contains(&u) && seen.insert(u) {
            out.push(u);
        }
    }
    out
}

fn plant_capitalist(rng: &mut ChaCha8Rng, c: &PlantedCapitalist, pool: &[NodeId], arcs: &mut Vec<(NodeId, NodeId)>) {
    let none = HashSet::new();
    let followers = sample_distinct(rng, pool, c.spec.in_degree, &none);
    arcs.extend(followers.iter().map(|&v| (v, c.node)));
    let out = out_target(&c.spec);
    let mirrored = mirrored_count(&c.spec);
    // followers are already in random order
    arcs.extend(followers[..mirrored].iter().map(|&v| (c.node, v)));
    let follower_set: HashSet<NodeId> = followers.iter().copied().collect();
    let others = sample_distinct(rng, pool, out - mirrored, &follower_set);
    arcs.extend(others.iter().map(|&v| (c.node, v)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capitalist::overlap_index;

    #[test]
    fn complete_blocks() {
        let spec = PlantedSpec::uniform(3, 4, 1.0, 0.0, 7);
        let p = generate(&spec).unwrap();
        assert_eq!(p.graph.arc_count(), 3 * 4 * 3);
        for (u, v) in p.graph.arcs() {
            assert_eq!(p.blocks[u as usize], p.blocks[v as usize]);
        }
    }

    #[test]
    fn deterministic() {
        let spec = PlantedSpec::uniform(4, 50, 0.3, 0.01, 3);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.graph.arcs().collect::<Vec<_>>(), b.graph.arcs().collect::<Vec<_>>());
    }

    #[test]
    fn reciprocated_capitalist() {
        let mut spec = PlantedSpec::uniform(2, 400, 0.05, 0.001, 1);
        spec.capitalists.push(PlantedCapitalistSpec {
            block: 1,
            in_degree: 600,
            ratio: 1.2,
            reciprocation: 1.0,
        });
        spec.capitalists.push(PlantedCapitalistSpec {
            block: 1,
            in_degree: 520,
            ratio: 0.5,
            reciprocation: 1.0,
        });
        let p = generate(&spec).unwrap();
        let first = &p.capitalists[0];
        assert_eq!(first.node, 400);
        assert_eq!(p.graph.in_degree(400), 600);
        assert_eq!(p.graph.out_degree(400), 720);
        assert_eq!(overlap_index(&p.graph, 400).unwrap(), 1.0);
        assert_eq!(p.graph.out_degree(401), 260);
        assert_eq!(overlap_index(&p.graph, 401).unwrap(), 1.0);
    }

    #[test]
    fn infeasible_in_degree() {
        let mut spec = PlantedSpec::uniform(1, 10, 0.5, 0.0, 1);
        spec.capitalists.push(PlantedCapitalistSpec {
            block: 0,
            in_degree: 10,
            ratio: 1.0,
            reciprocation: 1.0,
        });
        assert!(matches!(generate(&spec), Err(SpecError::Infeasible { .. })));
    }

    #[test]
    fn parse_spec() {
        let text = "# fixture\nblocks=50*3,20\np_in=0.3\np_out=0.01\nseed=9\ncapitalist=3,5,1.5,0.8\n";
        let spec = PlantedSpec::parse(text.as_bytes()).unwrap();
        assert_eq!(spec.blocks, vec![50, 50, 50, 20]);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.capitalists[0].ratio, 1.5);
        let mut out = Vec::new();
        spec.write(&mut out).unwrap();
        assert_eq!(PlantedSpec::parse(out.as_slice()).unwrap(), spec);
        assert!(PlantedSpec::parse("blocks=3\np_in=0.1\np_out=0.2\n".as_bytes()).is_err());
    }
}
