use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use super::distribution::{capitalist_distribution, BandScheme, DistributionTable};
use super::flows::{intercluster_flows, InterClusterFlows};
use super::roles::ThresholdRole;
use crate::capitalist::{CapitalistClass, CapitalistLabel};
use crate::clustering::{validate_clusters, ClusterError, ClusterValidation, SelectionRow};
use crate::graph::DirectedGraph;
use crate::io::{create, fmt_sig, open, parse_f64, FormatError};
use crate::measures::MeasureMatrix;

pub const MEASURES_FILE: &str = "measures.csv";
pub const ROLES_FILE: &str = "roles.csv";
pub const FLOWS_FILE: &str = "flows.csv";
pub const FLOWS_DOT_FILE: &str = "flows.dot";
pub const DISTRIBUTION_LOW_FILE: &str = "distribution_low.csv";
pub const DISTRIBUTION_HIGH_FILE: &str = "distribution_high.csv";
pub const SELECTION_FILE: &str = "selection.csv";
pub const ANOVA_FILE: &str = "anova.csv";
pub const VALIDATION_FILE: &str = "validation.csv";
pub const CENTROIDS_FILE: &str = "centroids.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

pub const BUNDLE_FILES: [&str; 11] = [
    MEASURES_FILE,
    ROLES_FILE,
    FLOWS_FILE,
    FLOWS_DOT_FILE,
    DISTRIBUTION_LOW_FILE,
    DISTRIBUTION_HIGH_FILE,
    SELECTION_FILE,
    ANOVA_FILE,
    VALIDATION_FILE,
    CENTROIDS_FILE,
    SUMMARY_FILE,
];

pub struct ReportInputs<'a> {
    pub graph: &'a DirectedGraph,
    /// Measures in their own units, one row per node.
    pub measures: &'a MeasureMatrix,
    pub clusters: &'a [u32],
    pub k: usize,
    pub threshold_roles: &'a [ThresholdRole],
    pub capitalists: &'a [CapitalistLabel],
    pub selection: Option<&'a [SelectionRow]>,
    pub cluster_names: Option<&'a [String]>,
    pub alpha: f64,
    pub flow_min_share: f64,
}

#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub flows: InterClusterFlows,
    pub low: DistributionTable,
    pub high: DistributionTable,
    /// `None` when there are fewer than two clusters.
    pub validation: Option<ClusterValidation>,
    /// Row-major `k x columns`, cluster means in measure units.
    pub centroids: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
    pub cluster_names: Vec<String>,
}

/// Per-cluster means of the measure matrix.
pub fn cluster_means(mm: &MeasureMatrix, clusters: &[u32], k: usize) -> (Vec<f64>, Vec<usize>) {
    let d = mm.column_count();
    let mut sums = vec![0.0; k * d];
    let mut sizes = vec![0usize; k];
    for (r, &c) in clusters.iter().enumerate() {
        let c = c as usize;
        sizes[c] += 1;
        for (s, v) in sums[c * d..(c + 1) * d].iter_mut().zip(mm.row(r)) {
            *s += v;
        }
    }
    for c in 0..k {
        if sizes[c] > 0 {
            for s in &mut sums[c * d..(c + 1) * d] {
                *s /= sizes[c] as f64;
            }
        }
    }
    (sums, sizes)
}

pub fn build_report(inputs: &ReportInputs<'_>) -> Result<ReportBundle, ClusterError> {
    let g = inputs.graph;
    let n = g.node_count();
    assert_eq!(inputs.measures.rows(), n);
    assert_eq!(inputs.clusters.len(), n);
    assert_eq!(inputs.threshold_roles.len(), n);
    assert_eq!(inputs.capitalists.len(), n);
    let k = inputs.k;
    let flows = intercluster_flows(g, inputs.clusters, k);
    let low = capitalist_distribution(
        inputs.capitalists,
        inputs.clusters,
        k,
        CapitalistClass::LowInDegree,
        BandScheme::for_class(CapitalistClass::LowInDegree),
    );
    let high = capitalist_distribution(
        inputs.capitalists,
        inputs.clusters,
        k,
        CapitalistClass::HighInDegree,
        BandScheme::for_class(CapitalistClass::HighInDegree),
    );
    let validation = if k >= 2 {
        Some(validate_clusters(inputs.measures, inputs.clusters, k, inputs.alpha)?)
    } else {
        None
    };
    let (centroids, cluster_sizes) = cluster_means(inputs.measures, inputs.clusters, k);
    let cluster_names = (0..k)
        .map(|c| {
            inputs
                .cluster_names
                .and_then(|names| names.get(c).cloned())
                .unwrap_or_else(|| format!("cluster{c}"))
        })
        .collect();
    Ok(ReportBundle {
        flows,
        low,
        high,
        validation,
        centroids,
        cluster_sizes,
        cluster_names,
    })
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), FormatError> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| FormatError::io(&path, e))
}

pub fn write_selection<W: Write + ?Sized>(rows: &[SelectionRow], best_k: Option<usize>, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "k,wcss,db_index,selected")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.k,
            fmt_sig(r.wcss),
            fmt_sig(r.db_index),
            u8::from(best_k == Some(r.k))
        )?;
    }
    Ok(())
}

pub fn read_selection(path: &Path) -> Result<Vec<SelectionRow>, FormatError> {
    let reader = open(path)?;
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        let parsed = (f.len() == 4)
            .then(|| Some((f[0].parse().ok()?, parse_f64(f[1])?, parse_f64(f[2])?)))
            .flatten();
        let (k, wcss, db_index) = parsed.ok_or_else(|| FormatError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: "expected `k,wcss,db_index,selected`".into(),
        })?;
        rows.push(SelectionRow { k, wcss, db_index });
    }
    Ok(rows)
}

/// Reads a `cluster name` map; clusters missing from the file keep their default name.
pub fn read_cluster_names(path: &Path, k: usize) -> Result<Vec<String>, FormatError> {
    let reader = open(path)?;
    let mut names: Vec<String> = (0..k).map(|c| format!("cluster{c}")).collect();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| FormatError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || FormatError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: format!("expected `cluster name` with cluster < {k}"),
        };
        let (c, name) = line.split_once(char::is_whitespace).ok_or_else(bad)?;
        let c: usize = c.parse().map_err(|_| bad())?;
        if c >= k {
            return Err(bad());
        }
        names[c] = name.trim().to_string();
    }
    Ok(names)
}

/// Writes every bundle file into `dir`, creating it if needed.
pub fn render_report(inputs: &ReportInputs<'_>, dir: &Path) -> Result<ReportBundle, RenderError> {
    let bundle = build_report(inputs)?;
    std::fs::create_dir_all(dir).map_err(|e| FormatError::io(dir, e))?;
    let g = inputs.graph;
    let mm = inputs.measures;

    write_file(dir, MEASURES_FILE, |w| mm.write_csv(g.labels(), w))?;
    write_file(dir, ROLES_FILE, |w| {
        writeln!(w, "node_label,cluster,cluster_name,threshold_role")?;
        for u in g.nodes() {
            let c = inputs.clusters[u as usize] as usize;
            writeln!(
                w,
                "{},{},{},{}",
                g.label(u),
                c,
                bundle.cluster_names[c],
                inputs.threshold_roles[u as usize]
            )?;
        }
        Ok(())
    })?;
    write_file(dir, FLOWS_FILE, |w| bundle.flows.write_csv(w))?;
    write_file(dir, FLOWS_DOT_FILE, |w| {
        bundle.flows.write_dot(&bundle.cluster_names, inputs.flow_min_share, w)
    })?;
    write_file(dir, DISTRIBUTION_LOW_FILE, |w| bundle.low.write_csv(w))?;
    write_file(dir, DISTRIBUTION_HIGH_FILE, |w| bundle.high.write_csv(w))?;
    write_file(dir, SELECTION_FILE, |w| {
        write_selection(inputs.selection.unwrap_or(&[]), Some(inputs.k), w)
    })?;
    write_file(dir, ANOVA_FILE, |w| {
        writeln!(w, "measure,f,p_value")?;
        for row in bundle.validation.iter().flat_map(|v| &v.anova) {
            writeln!(w, "{},{},{}", row.measure, fmt_sig(row.f), fmt_sig(row.p_value))?;
        }
        Ok(())
    })?;
    write_file(dir, VALIDATION_FILE, |w| {
        writeln!(w, "measure,cluster_a,cluster_b,t,df,p_value,p_adjusted,significant")?;
        for p in bundle.validation.iter().flat_map(|v| &v.pairs) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                p.measure,
                p.cluster_a,
                p.cluster_b,
                fmt_sig(p.t),
                fmt_sig(p.df),
                fmt_sig(p.p_value),
                fmt_sig(p.p_adjusted),
                u8::from(p.significant)
            )?;
        }
        Ok(())
    })?;
    write_file(dir, CENTROIDS_FILE, |w| {
        write!(w, "cluster,name,size")?;
        for m in mm.columns() {
            write!(w, ",{m}")?;
        }
        writeln!(w)?;
        let d = mm.column_count();
        for c in 0..inputs.k {
            write!(w, "{},{},{}", c, bundle.cluster_names[c], bundle.cluster_sizes[c])?;
            for &v in &bundle.centroids[c * d..(c + 1) * d] {
                write!(w, ",{}", fmt_sig(v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    write_file(dir, SUMMARY_FILE, |w| write_summary(inputs, &bundle, w))?;
    Ok(bundle)
}

fn write_summary(inputs: &ReportInputs<'_>, b: &ReportBundle, w: &mut dyn Write) -> std::io::Result<()> {
    let g = inputs.graph;
    writeln!(w, "nodes {}", g.node_count())?;
    writeln!(w, "arcs {}", g.arc_count())?;
    writeln!(w, "measures {}", inputs.measures.columns().iter().map(|m| m.name()).collect::<Vec<_>>().join(","))?;
    writeln!(w, "clusters {}", inputs.k)?;
    for c in 0..inputs.k {
        writeln!(w, "  {} {} size {}", c, b.cluster_names[c], b.cluster_sizes[c])?;
    }
    if let Some(rows) = inputs.selection {
        if let Some(r) = rows.iter().find(|r| r.k == inputs.k) {
            writeln!(w, "davies_bouldin {}", fmt_sig(r.db_index))?;
        }
    }
    let mut role_counts: BTreeMap<ThresholdRole, usize> = BTreeMap::new();
    for &r in inputs.threshold_roles {
        *role_counts.entry(r).or_insert(0) += 1;
    }
    writeln!(w, "threshold roles")?;
    for r in ThresholdRole::ALL {
        writeln!(w, "  {} {}", r, role_counts.get(&r).copied().unwrap_or(0))?;
    }
    writeln!(w, "capitalists low {} high {}", b.low.class_total, b.high.class_total)?;
    for t in [&b.low, &b.high] {
        if t.empty_class {
            writeln!(w, "warning: no {} capitalists, distribution table is zero", t.class.name())?;
        }
    }
    writeln!(w, "flows (source target arcs share_of_source share_of_network share_of_target)")?;
    for f in b.flows.flows() {
        writeln!(
            w,
            "  {} {} {} {} {} {}",
            f.source,
            f.target,
            f.arcs,
            fmt_sig(f.share_of_source),
            fmt_sig(f.share_of_network),
            fmt_sig(f.share_of_target)
        )?;
    }
    if let Some(v) = &b.validation {
        let significant = v.pairs.iter().filter(|p| p.significant).count();
        writeln!(
            w,
            "pairwise tests {} significant of {} at alpha {} (adjusted {})",
            significant,
            v.comparisons,
            fmt_sig(v.alpha),
            fmt_sig(v.adjusted_threshold)
        )?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Checks that every per-node file of a bundle lists each node label exactly once.
pub fn check_bundle_consistency(dir: &Path, node_count: usize) -> Result<(), String> {
    for name in BUNDLE_FILES {
        let path: PathBuf = dir.join(name);
        if !path.is_file() {
            return Err(format!("{} missing", path.display()));
        }
    }
    let measures = crate::io::label_column_counts(&dir.join(MEASURES_FILE), true, ',').map_err(|e| e.to_string())?;
    let roles = crate::io::label_column_counts(&dir.join(ROLES_FILE), true, ',').map_err(|e| e.to_string())?;
    for (name, counts) in [(MEASURES_FILE, &measures), (ROLES_FILE, &roles)] {
        if counts.len() != node_count || counts.values().any(|&c| c != 1) {
            return Err(format!("{name} does not list {node_count} distinct nodes once each"));
        }
    }
    if measures.keys().any(|l| !roles.contains_key(l)) {
        return Err("measures and roles disagree on node labels".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capitalist::{Ratio, RatioBand};
    use crate::measures::Measure;

    #[test]
    fn empty_capitalists_still_complete() {
        let g = DirectedGraph::from_arcs(4, [(0, 1), (1, 0), (2, 3), (3, 2), (0, 2)]);
        let mm = MeasureMatrix::from_columns(vec![Measure::Z, Measure::P], vec![vec![0.0, 1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3, 0.4]]);
        let none = CapitalistLabel {
            overlap: Some(0.5),
            ratio: Ratio::Finite(1.0),
            in_degree: 1,
            class: CapitalistClass::None,
            ratio_band: RatioBand::NotApplicable,
        };
        let caps = vec![none; 4];
        let roles = vec![ThresholdRole::PeripheralNonHub; 4];
        let inputs = ReportInputs {
            graph: &g,
            measures: &mm,
            clusters: &[0, 0, 1, 1],
            k: 2,
            threshold_roles: &roles,
            capitalists: &caps,
            selection: None,
            cluster_names: None,
            alpha: 0.05,
            flow_min_share: 0.01,
        };
        let dir = tempfile::tempdir().unwrap();
        let b = render_report(&inputs, dir.path()).unwrap();
        assert!(b.low.empty_class && b.high.empty_class);
        check_bundle_consistency(dir.path(), 4).unwrap();
        let summary = std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert!(summary.contains("warning: no low_in_degree capitalists"));
    }
}
