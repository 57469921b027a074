//! Community-role measures.
//!
//! Every measure is derived from one pass that records, for each node, how
//! its arcs spread over communities. Three families are exposed:
//!
//! * original: within-module degree `z` and participation coefficient `P`
//!   over undirected degrees (`d = d_in + d_out`);
//! * directed: `z_in`, `z_out`, `P_in`, `P_out`;
//! * generalized: internal intensity, external intensity, diversity and
//!   heterogeneity, each in an in and an out version.
//!
//! All z-scores are taken within the node's community with the population
//! standard deviation; a community with no spread maps to zero.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::community::CommunityPartition;
use crate::graph::{DirectedGraph, Label, NodeId};
use crate::io::{fmt_sig, parse_f64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Undirected,
    In,
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Original,
    Directed,
    Generalized,
}

impl Family {
    pub fn columns(self) -> &'static [Measure] {
        use Measure::*;
        match self {
            Family::Original => &[Z, P],
            Family::Directed => &[ZIn, ZOut, PIn, POut],
            Family::Generalized => &[IIntIn, IIntOut, IExtIn, IExtOut, DIn, DOut, HIn, HOut],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Original => "original",
            Family::Directed => "directed",
            Family::Generalized => "generalized",
        }
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "original" => Ok(Family::Original),
            "directed" => Ok(Family::Directed),
            "generalized" => Ok(Family::Generalized),
            other => Err(format!("unknown measure family {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    Z,
    P,
    ZIn,
    ZOut,
    PIn,
    POut,
    IIntIn,
    IIntOut,
    IExtIn,
    IExtOut,
    DIn,
    DOut,
    HIn,
    HOut,
}

impl Measure {
    pub const ALL: [Measure; 14] = [
        Measure::Z,
        Measure::P,
        Measure::ZIn,
        Measure::ZOut,
        Measure::PIn,
        Measure::POut,
        Measure::IIntIn,
        Measure::IIntOut,
        Measure::IExtIn,
        Measure::IExtOut,
        Measure::DIn,
        Measure::DOut,
        Measure::HIn,
        Measure::HOut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Z => "z",
            Measure::P => "P",
            Measure::ZIn => "z_in",
            Measure::ZOut => "z_out",
            Measure::PIn => "P_in",
            Measure::POut => "P_out",
            Measure::IIntIn => "I_int_in",
            Measure::IIntOut => "I_int_out",
            Measure::IExtIn => "I_ext_in",
            Measure::IExtOut => "I_ext_out",
            Measure::DIn => "D_in",
            Measure::DOut => "D_out",
            Measure::HIn => "H_in",
            Measure::HOut => "H_out",
        }
    }

    /// Participation coefficients are the only measures that are not z-scores.
    pub fn is_zscore(self) -> bool {
        !matches!(self, Measure::P | Measure::PIn | Measure::POut)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown measure {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CommunityDegree {
    pub community: usize,
    pub d_in: usize,
    pub d_out: usize,
}

/// How the arcs of one node spread over communities.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunityDegreeProfile {
    pub node: NodeId,
    pub community: usize,
    /// Non-zero community degrees, ascending by community.
    pub by_community: Vec<CommunityDegree>,
    pub d_int_in: usize,
    pub d_int_out: usize,
    pub d_ext_in: usize,
    pub d_ext_out: usize,
    pub eps_in: usize,
    pub eps_out: usize,
}

impl CommunityDegreeProfile {
    fn from_sorted(node: NodeId, community: usize, sorted: &[(u32, bool)]) -> Self {
        let mut by_community: Vec<CommunityDegree> = Vec::new();
        for &(c, incoming) in sorted {
            let c = c as usize;
            match by_community.last_mut() {
                Some(last) if last.community == c => {}
                _ => by_community.push(CommunityDegree {
                    community: c,
                    d_in: 0,
                    d_out: 0,
                }),
            }
            let last = by_community.last_mut().unwrap();
            if incoming {
                last.d_in += 1;
            } else {
                last.d_out += 1;
            }
        }
        let own = by_community.iter().find(|cd| cd.community == community);
        let d_int_in = own.map_or(0, |cd| cd.d_in);
        let d_int_out = own.map_or(0, |cd| cd.d_out);
        let external = by_community.iter().filter(|cd| cd.community != community);
        let (mut d_ext_in, mut d_ext_out, mut eps_in, mut eps_out) = (0, 0, 0, 0);
        for cd in external {
            d_ext_in += cd.d_in;
            d_ext_out += cd.d_out;
            eps_in += (cd.d_in > 0) as usize;
            eps_out += (cd.d_out > 0) as usize;
        }
        CommunityDegreeProfile {
            node,
            community,
            by_community,
            d_int_in,
            d_int_out,
            d_ext_in,
            d_ext_out,
            eps_in,
            eps_out,
        }
    }

    pub fn d_in(&self) -> usize {
        self.d_int_in + self.d_ext_in
    }

    pub fn d_out(&self) -> usize {
        self.d_int_out + self.d_ext_out
    }

    fn community_degrees(&self, dir: Direction) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.by_community.iter().map(move |cd| {
            let d = match dir {
                Direction::Undirected => cd.d_in + cd.d_out,
                Direction::In => cd.d_in,
                Direction::Out => cd.d_out,
            };
            (cd.community, d)
        })
    }

    /// Raw per-node values for every measure family.
    pub fn raw(&self) -> RawMeasures {
        let mut raw = RawMeasures::default();
        for (slot, dir) in [Direction::Undirected, Direction::In, Direction::Out].into_iter().enumerate() {
            let mut degree = 0u64;
            let mut internal = 0u64;
            let mut sum_sq = 0u64;
            let (mut ext_n, mut ext_sum, mut ext_sq) = (0u64, 0u64, 0u64);
            for (c, d) in self.community_degrees(dir) {
                let d = d as u64;
                degree += d;
                sum_sq += d * d;
                if c == self.community {
                    internal += d;
                } else if d > 0 {
                    ext_n += 1;
                    ext_sum += d;
                    ext_sq += d * d;
                }
            }
            raw.degree[slot] = degree;
            raw.internal[slot] = internal;
            raw.external[slot] = degree - internal;
            raw.diversity[slot] = ext_n;
            raw.sum_sq[slot] = sum_sq;
            // n^2 * variance is an integer, so equal multisets give bit-equal spreads
            raw.spread[slot] = if ext_n < 2 {
                0.0
            } else {
                ((ext_n * ext_sq - ext_sum * ext_sum) as f64).sqrt() / ext_n as f64
            };
        }
        raw
    }
}

/// Population standard deviation, zero for fewer than two values.
pub fn population_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Per-node raw quantities, indexed `[undirected, in, out]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RawMeasures {
    pub degree: [u64; 3],
    pub internal: [u64; 3],
    pub external: [u64; 3],
    /// Number of other communities linked.
    pub diversity: [u64; 3],
    /// Sum of squared community degrees, own community included.
    pub sum_sq: [u64; 3],
    /// Population std of non-zero external community degrees.
    pub spread: [f64; 3],
}

impl RawMeasures {
    pub fn participation(&self, dir: Direction) -> f64 {
        let i = slot(dir);
        let d = self.degree[i];
        if d == 0 {
            0.0
        } else {
            1.0 - self.sum_sq[i] as f64 / (d as f64 * d as f64)
        }
    }
}

fn slot(dir: Direction) -> usize {
    match dir {
        Direction::Undirected => 0,
        Direction::In => 1,
        Direction::Out => 2,
    }
}

fn collect_neighbor_communities(g: &DirectedGraph, p: &CommunityPartition, u: NodeId, buf: &mut Vec<(u32, bool)>) {
    buf.clear();
    buf.extend(g.in_neighbors(u).iter().map(|&v| (p.community_of(v) as u32, true)));
    buf.extend(g.out_neighbors(u).iter().map(|&v| (p.community_of(v) as u32, false)));
    buf.sort_unstable();
}

pub fn community_degree_profile(g: &DirectedGraph, p: &CommunityPartition, u: NodeId) -> CommunityDegreeProfile {
    let mut buf = Vec::new();
    collect_neighbor_communities(g, p, u, &mut buf);
    CommunityDegreeProfile::from_sorted(u, p.community_of(u), &buf)
}

pub fn community_degree_profiles(g: &DirectedGraph, p: &CommunityPartition) -> Vec<CommunityDegreeProfile> {
    (0..g.node_count() as NodeId)
        .into_par_iter()
        .map_init(Vec::new, |buf, u| {
            collect_neighbor_communities(g, p, u, buf);
            CommunityDegreeProfile::from_sorted(u, p.community_of(u), buf)
        })
        .collect()
}

/// Raw quantities for all nodes in one pass over the arcs.
pub fn raw_measures(g: &DirectedGraph, p: &CommunityPartition) -> Vec<RawMeasures> {
    (0..g.node_count() as NodeId)
        .into_par_iter()
        .map_init(Vec::new, |buf, u| {
            collect_neighbor_communities(g, p, u, buf);
            CommunityDegreeProfile::from_sorted(u, p.community_of(u), buf).raw()
        })
        .collect()
}

/// `(f(u) - mean_i) / std_i` within the community `i` of each node.
pub fn zscore_within_community(values: &[f64], p: &CommunityPartition) -> Vec<f64> {
    assert_eq!(values.len(), p.node_count());
    let k = p.community_count();
    let mut sum = vec![0.0f64; k];
    let mut min = vec![f64::INFINITY; k];
    let mut max = vec![f64::NEG_INFINITY; k];
    for (u, &v) in values.iter().enumerate() {
        let c = p.community_of(u as NodeId);
        sum[c] += v;
        min[c] = min[c].min(v);
        max[c] = max[c].max(v);
    }
    let mean: Vec<f64> = sum.iter().zip(p.sizes()).map(|(s, &n)| s / n as f64).collect();
    let mut sq = vec![0.0f64; k];
    for (u, &v) in values.iter().enumerate() {
        let c = p.community_of(u as NodeId);
        sq[c] += (v - mean[c]) * (v - mean[c]);
    }
    let std: Vec<f64> = (0..k)
        .map(|c| {
            if min[c] == max[c] {
                0.0
            } else {
                (sq[c] / p.size(c) as f64).sqrt()
            }
        })
        .collect();
    values
        .par_iter()
        .enumerate()
        .map(|(u, &v)| {
            let c = p.community_of(u as NodeId);
            if std[c] > 0.0 {
                (v - mean[c]) / std[c]
            } else {
                0.0
            }
        })
        .collect()
}

fn column_from_raw(raw: &[RawMeasures], p: &CommunityPartition, measure: Measure) -> Vec<f64> {
    use Direction::*;
    let z = |f: &dyn Fn(&RawMeasures) -> f64| {
        let values: Vec<f64> = raw.iter().map(f).collect();
        zscore_within_community(&values, p)
    };
    let part = |dir: Direction| raw.iter().map(|r| r.participation(dir)).collect::<Vec<_>>();
    match measure {
        Measure::Z => z(&|r| r.internal[0] as f64),
        Measure::P => part(Undirected),
        Measure::ZIn | Measure::IIntIn => z(&|r| r.internal[1] as f64),
        Measure::ZOut | Measure::IIntOut => z(&|r| r.internal[2] as f64),
        Measure::PIn => part(In),
        Measure::POut => part(Out),
        Measure::IExtIn => z(&|r| r.external[1] as f64),
        Measure::IExtOut => z(&|r| r.external[2] as f64),
        Measure::DIn => z(&|r| r.diversity[1] as f64),
        Measure::DOut => z(&|r| r.diversity[2] as f64),
        Measure::HIn => z(&|r| r.spread[1]),
        Measure::HOut => z(&|r| r.spread[2]),
    }
}

fn single_column(g: &DirectedGraph, p: &CommunityPartition, f: impl Fn(&RawMeasures) -> f64) -> Vec<f64> {
    let raw = raw_measures(g, p);
    let values: Vec<f64> = raw.iter().map(f).collect();
    zscore_within_community(&values, p)
}

/// z-score of internal degree.
pub fn within_module_degree(g: &DirectedGraph, p: &CommunityPartition, dir: Direction) -> Vec<f64> {
    single_column(g, p, |r| r.internal[slot(dir)] as f64)
}

pub fn internal_intensity(g: &DirectedGraph, p: &CommunityPartition, dir: Direction) -> Vec<f64> {
    within_module_degree(g, p, dir)
}

/// `1 - sum_i (d_i / d)^2`, zero for nodes without arcs.
pub fn participation_coefficient(g: &DirectedGraph, p: &CommunityPartition, dir: Direction) -> Vec<f64> {
    raw_measures(g, p).iter().map(|r| r.participation(dir)).collect()
}

/// z-score of the number of other communities linked.
pub fn diversity(g: &DirectedGraph, p: &CommunityPartition, dir: Direction) -> Vec<f64> {
    single_column(g, p, |r| r.diversity[slot(dir)] as f64)
}

/// z-score of the external degree.
pub fn external_intensity(g: &DirectedGraph, p: &CommunityPartition, dir: Direction) -> Vec<f64> {
    single_column(g, p, |r| r.external[slot(dir)] as f64)
}

/// z-score of the spread of external community degrees.
pub fn heterogeneity(g: &DirectedGraph, p: &CommunityPartition, dir: Direction) -> Vec<f64> {
    single_column(g, p, |r| r.spread[slot(dir)])
}

/// Dense row-major node-by-measure table.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureMatrix {
    columns: Vec<Measure>,
    rows: usize,
    data: Vec<f64>,
}

impl MeasureMatrix {
    pub fn from_columns(columns: Vec<Measure>, values: Vec<Vec<f64>>) -> Self {
        assert_eq!(columns.len(), values.len());
        let rows = values.first().map_or(0, Vec::len);
        assert!(values.iter().all(|v| v.len() == rows));
        let mut data = Vec::with_capacity(rows * columns.len());
        for r in 0..rows {
            data.extend(values.iter().map(|col| col[r]));
        }
        MeasureMatrix { columns, rows, data }
    }

    pub fn from_rows(columns: Vec<Measure>, rows: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * columns.len());
        MeasureMatrix { columns, rows, data }
    }

    pub fn columns(&self) -> &[Measure] {
        &self.columns
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let d = self.columns.len();
        &self.data[r * d..(r + 1) * d]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.columns.len() + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn column_of(&self, m: Measure) -> Option<Vec<f64>> {
        self.columns.iter().position(|&x| x == m).map(|c| self.column(c))
    }

    /// Row-major values.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn write_csv<W: Write>(&self, labels: &[Label], mut out: W) -> std::io::Result<()> {
        assert_eq!(labels.len(), self.rows);
        write!(out, "node_label")?;
        for m in &self.columns {
            write!(out, ",{m}")?;
        }
        writeln!(out)?;
        let mut line = String::new();
        for (r, label) in labels.iter().enumerate() {
            line.clear();
            line.push_str(&label.to_string());
            for &v in self.row(r) {
                line.push(',');
                line.push_str(&fmt_sig(v));
            }
            writeln!(out, "{line}")?;
        }
        out.flush()
    }

    /// Parses the CSV written by [`MeasureMatrix::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<(Vec<Label>, MeasureMatrix), String> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or("empty measures file")?
            .map_err(|e| e.to_string())?;
        let mut fields = header.trim().split(',');
        if fields.next() != Some("node_label") {
            return Err("measures header must start with node_label".into());
        }
        let columns: Vec<Measure> = fields.map(str::parse).collect::<Result<_, _>>()?;
        if columns.is_empty() {
            return Err("measures file has no measure columns".into());
        }
        let mut labels = Vec::new();
        let mut data = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            let mut f = line.trim().split(',');
            let label = f
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| format!("line {}: bad label", i + 2))?;
            labels.push(label);
            let before = data.len();
            for tok in f {
                data.push(parse_f64(tok).ok_or_else(|| format!("line {}: bad value {tok:?}", i + 2))?);
            }
            if data.len() - before != columns.len() {
                return Err(format!("line {}: expected {} values", i + 2, columns.len()));
            }
        }
        let rows = labels.len();
        Ok((labels, MeasureMatrix::from_rows(columns, rows, data)))
    }
}

/// Measure matrix for one family, all columns from a single profile pass.
pub fn compute_measure_matrix(g: &DirectedGraph, p: &CommunityPartition, family: Family) -> MeasureMatrix {
    let raw = raw_measures(g, p);
    measure_matrix_from_raw(&raw, p, family.columns())
}

pub fn measure_matrix_from_raw(raw: &[RawMeasures], p: &CommunityPartition, columns: &[Measure]) -> MeasureMatrix {
    let values = columns.iter().map(|&m| column_from_raw(raw, p, m)).collect();
    MeasureMatrix::from_columns(columns.to_vec(), values)
}
