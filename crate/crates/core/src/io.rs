//! Plain-text file formats shared by the pipeline stages.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::capitalist::{CapitalistClass, CapitalistLabel, Ratio, RatioBand};
use crate::community::CommunityPartition;
use crate::graph::{DirectedGraph, Label, NodeId};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("missing input file {0}")]
    Missing(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FormatError {
    fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        FormatError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub fn open(path: &Path) -> Result<BufReader<File>, FormatError> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(FormatError::Missing(path.to_path_buf())),
        Err(e) => Err(FormatError::io(path, e)),
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, FormatError> {
    File::create(path).map(BufWriter::new).map_err(|e| FormatError::io(path, e))
}

/// Formats with six significant digits, `%g` style, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn parse_f64(tok: &str) -> Option<f64> {
    match tok {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        t => t.parse().ok(),
    }
}

/// Reads `label value` lines into per-node integers, keyed through the graph labels.
fn read_node_values(path: &Path, g: &DirectedGraph) -> Result<Vec<usize>, FormatError> {
    let reader = open(path)?;
    let mut values = vec![usize::MAX; g.node_count()];
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut t = line.split_ascii_whitespace();
        let (Some(label), Some(value), None) = (t.next(), t.next(), t.next()) else {
            return Err(FormatError::parse(path, i + 1, "expected `label value`"));
        };
        let label: Label = label
            .parse()
            .map_err(|_| FormatError::parse(path, i + 1, format!("bad label {label:?}")))?;
        let value: usize = value
            .parse()
            .map_err(|_| FormatError::parse(path, i + 1, format!("bad index {value:?}")))?;
        let node = g
            .node_of(label)
            .ok_or_else(|| FormatError::parse(path, i + 1, format!("label {label} not in graph")))?;
        values[node as usize] = value;
    }
    if let Some(u) = values.iter().position(|&v| v == usize::MAX) {
        return Err(FormatError::parse(
            path,
            0,
            format!("no entry for node label {}", g.label(u as NodeId)),
        ));
    }
    Ok(values)
}

fn write_node_values(path: &Path, g: &DirectedGraph, values: &[u32]) -> Result<(), FormatError> {
    let mut w = create(path)?;
    let err = |e| FormatError::io(path, e);
    for u in g.nodes() {
        writeln!(w, "{} {}", g.label(u), values[u as usize]).map_err(err)?;
    }
    w.flush().map_err(err)
}

/// `node_label community_index`, one line per node.
pub fn write_communities(path: &Path, g: &DirectedGraph, p: &CommunityPartition) -> Result<(), FormatError> {
    write_node_values(path, g, p.assignment())
}

pub fn read_communities(path: &Path, g: &DirectedGraph) -> Result<CommunityPartition, FormatError> {
    let labels = read_node_values(path, g)?;
    CommunityPartition::from_labels(g, &labels).map_err(|e| FormatError::parse(path, 0, e.to_string()))
}

/// `node_label cluster_id`, one line per node.
pub fn write_roles(path: &Path, g: &DirectedGraph, clusters: &[u32]) -> Result<(), FormatError> {
    write_node_values(path, g, clusters)
}

/// Role lines keyed by label, without a graph.
pub fn read_roles_by_label(path: &Path) -> Result<Vec<(Label, u32)>, FormatError> {
    let reader = open(path)?;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut t = line.split_ascii_whitespace();
        let parsed = match (t.next(), t.next(), t.next()) {
            (Some(a), Some(b), None) => a.parse().ok().zip(b.parse().ok()),
            _ => None,
        };
        out.push(parsed.ok_or_else(|| FormatError::parse(path, i + 1, "expected `label cluster`"))?);
    }
    Ok(out)
}

pub fn read_roles(path: &Path, g: &DirectedGraph) -> Result<Vec<u32>, FormatError> {
    Ok(read_node_values(path, g)?.into_iter().map(|v| v as u32).collect())
}

pub const CAPITALIST_HEADER: &str = "node_label,overlap,ratio,in_degree,class,ratio_band";

pub fn write_capitalists(path: &Path, g: &DirectedGraph, labels: &[CapitalistLabel]) -> Result<(), FormatError> {
    let mut w = create(path)?;
    let err = |e| FormatError::io(path, e);
    writeln!(w, "{CAPITALIST_HEADER}").map_err(err)?;
    for u in g.nodes() {
        let l = &labels[u as usize];
        let overlap = l.overlap.map(fmt_sig).unwrap_or_else(|| "nan".into());
        writeln!(
            w,
            "{},{},{},{},{},{}",
            g.label(u),
            overlap,
            l.ratio,
            l.in_degree,
            l.class.name(),
            l.ratio_band.name()
        )
        .map_err(err)?;
    }
    w.flush().map_err(err)
}

pub fn read_capitalists(path: &Path, g: &DirectedGraph) -> Result<Vec<CapitalistLabel>, FormatError> {
    let reader = open(path)?;
    let mut out: Vec<Option<CapitalistLabel>> = vec![None; g.node_count()];
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        if i == 0 {
            if line.trim() != CAPITALIST_HEADER {
                return Err(FormatError::parse(path, 1, "unexpected header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = || FormatError::parse(path, i + 1, "malformed capitalist row");
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 6 {
            return Err(bad());
        }
        let label: Label = f[0].parse().map_err(|_| bad())?;
        let overlap = parse_f64(f[1]).ok_or_else(bad)?;
        let ratio = match f[2] {
            "inf" => Ratio::Infinite,
            "nan" => Ratio::Undefined,
            r => Ratio::Finite(r.parse().map_err(|_| bad())?),
        };
        let label_value = CapitalistLabel {
            overlap: (!overlap.is_nan()).then_some(overlap),
            ratio,
            in_degree: f[3].parse().map_err(|_| bad())?,
            class: CapitalistClass::parse(f[4]).ok_or_else(bad)?,
            ratio_band: RatioBand::parse(f[5]).ok_or_else(bad)?,
        };
        let node = g
            .node_of(label)
            .ok_or_else(|| FormatError::parse(path, i + 1, format!("label {label} not in graph")))?;
        out[node as usize] = Some(label_value);
    }
    out.into_iter()
        .enumerate()
        .map(|(u, l)| {
            l.ok_or_else(|| FormatError::parse(path, 0, format!("no entry for node label {}", g.label(u as NodeId))))
        })
        .collect()
}

/// One label per line.
pub fn write_label_set(path: &Path, labels: impl IntoIterator<Item = Label>) -> Result<(), FormatError> {
    let mut w = create(path)?;
    let err = |e| FormatError::io(path, e);
    for l in labels {
        writeln!(w, "{l}").map_err(err)?;
    }
    w.flush().map_err(err)
}

/// Per-label counts of lines, used by cross-file consistency checks.
pub fn label_column_counts(path: &Path, has_header: bool, sep: char) -> Result<HashMap<Label, usize>, FormatError> {
    let reader = open(path)?;
    let mut counts = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        if (has_header && i == 0) || line.trim().is_empty() {
            continue;
        }
        let first = line.split(sep).next().unwrap_or("").trim();
        let label: Label = first
            .parse()
            .map_err(|_| FormatError::parse(path, i + 1, "bad label"))?;
        *counts.entry(label).or_insert(0) += 1;
    }
    Ok(counts)
}
