//! Topological detection of social capitalists.
//!
//! A node is flagged when its followers and friends overlap strongly and it
//! has at least 500 followers. The ratio of friends to followers then splits
//! capitalists into bands.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{DirectedGraph, NodeId};

/// Heuristic default overlap cutoff; tune per dataset.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.74;
pub const LOW_IN_DEGREE_MIN: usize = 500;
pub const HIGH_IN_DEGREE_ABOVE: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum CapitalistError {
    #[error("overlap undefined for node {0}: empty follower or friend set")]
    UndefinedOverlap(NodeId),
    #[error("overlap threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
}

/// Friends-to-followers ratio with its degenerate cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// Friends but no followers.
    Infinite,
    /// Neither friends nor followers.
    Undefined,
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{}", crate::io::fmt_sig(*r)),
            Ratio::Infinite => f.write_str("inf"),
            Ratio::Undefined => f.write_str("nan"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CapitalistClass {
    None,
    LowInDegree,
    HighInDegree,
}

impl CapitalistClass {
    pub fn name(self) -> &'static str {
        match self {
            CapitalistClass::None => "none",
            CapitalistClass::LowInDegree => "low_in_degree",
            CapitalistClass::HighInDegree => "high_in_degree",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::None, Self::LowInDegree, Self::HighInDegree]
            .into_iter()
            .find(|c| c.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RatioBand {
    /// `r <= 0.7`
    AtMost07,
    /// `0.7 < r <= 1`
    Above07AtMost1,
    /// `r > 1`
    Above1,
    NotApplicable,
}

impl RatioBand {
    pub fn of(ratio: Ratio) -> Self {
        match ratio {
            Ratio::Finite(r) if r <= 0.7 => RatioBand::AtMost07,
            Ratio::Finite(r) if r <= 1.0 => RatioBand::Above07AtMost1,
            Ratio::Finite(_) | Ratio::Infinite => RatioBand::Above1,
            Ratio::Undefined => RatioBand::NotApplicable,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RatioBand::AtMost07 => "r<=0.7",
            RatioBand::Above07AtMost1 => "0.7<r<=1",
            RatioBand::Above1 => "r>1",
            RatioBand::NotApplicable => "n/a",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::AtMost07, Self::Above07AtMost1, Self::Above1, Self::NotApplicable]
            .into_iter()
            .find(|b| b.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapitalistLabel {
    /// `None` when either neighborhood is empty.
    pub overlap: Option<f64>,
    pub ratio: Ratio,
    pub in_degree: usize,
    pub class: CapitalistClass,
    pub ratio_band: RatioBand,
}

#[derive(Clone, Debug)]
pub struct CapitalistReport {
    pub threshold: f64,
    pub labels: Vec<CapitalistLabel>,
    pub none: usize,
    pub low: usize,
    pub high: usize,
}

/// Size of the intersection of two ascending slices.
pub fn sorted_intersection_len(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `|N-(u) ∩ N+(u)| / min(|N-(u)|, |N+(u)|)`.
pub fn overlap_index(g: &DirectedGraph, u: NodeId) -> Result<f64, CapitalistError> {
    let followers = g.in_neighbors(u);
    let friends = g.out_neighbors(u);
    let denom = followers.len().min(friends.len());
    if denom == 0 {
        return Err(CapitalistError::UndefinedOverlap(u));
    }
    Ok(sorted_intersection_len(followers, friends) as f64 / denom as f64)
}

/// `|N+(u)| / |N-(u)|`.
pub fn ratio(g: &DirectedGraph, u: NodeId) -> Ratio {
    ratio_from_degrees(g.out_degree(u), g.in_degree(u))
}

pub fn ratio_from_degrees(friends: usize, followers: usize) -> Ratio {
    match (friends, followers) {
        (0, 0) => Ratio::Undefined,
        (_, 0) => Ratio::Infinite,
        (f, d) => Ratio::Finite(f as f64 / d as f64),
    }
}

/// Class from overlap and follower count.
pub fn classify(overlap: Option<f64>, in_degree: usize, threshold: f64) -> CapitalistClass {
    match overlap {
        Some(o) if o >= threshold && in_degree >= LOW_IN_DEGREE_MIN => {
            if in_degree > HIGH_IN_DEGREE_ABOVE {
                CapitalistClass::HighInDegree
            } else {
                CapitalistClass::LowInDegree
            }
        }
        _ => CapitalistClass::None,
    }
}

pub fn label_node(g: &DirectedGraph, u: NodeId, threshold: f64) -> CapitalistLabel {
    let overlap = overlap_index(g, u).ok();
    let ratio = ratio(g, u);
    let in_degree = g.in_degree(u);
    let class = classify(overlap, in_degree, threshold);
    let ratio_band = match class {
        CapitalistClass::None => RatioBand::NotApplicable,
        _ => RatioBand::of(ratio),
    };
    CapitalistLabel {
        overlap,
        ratio,
        in_degree,
        class,
        ratio_band,
    }
}

/// Labels every node of `g`.
pub fn classify_capitalists(g: &DirectedGraph, overlap_threshold: f64) -> Result<CapitalistReport, CapitalistError> {
    if !(overlap_threshold > 0.0 && overlap_threshold <= 1.0) {
        return Err(CapitalistError::InvalidThreshold(overlap_threshold));
    }
    let labels: Vec<CapitalistLabel> = (0..g.node_count() as NodeId)
        .into_par_iter()
        .map(|u| label_node(g, u, overlap_threshold))
        .collect();
    let count = |c| labels.iter().filter(|l| l.class == c).count();
    Ok(CapitalistReport {
        threshold: overlap_threshold,
        none: count(CapitalistClass::None),
        low: count(CapitalistClass::LowInDegree),
        high: count(CapitalistClass::HighInDegree),
        labels,
    })
}
