//! File-based stages behind the command-line tool, and the run manifest.
//!
//! Every stage reads its inputs from files in the formats of the owning
//! module and writes its outputs next to them, so stages can be rerun alone.

use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::capitalist::{classify_capitalists, DEFAULT_OVERLAP_THRESHOLD};
use crate::clustering::{normalize_columns, select_k, Points, SelectConfig, Selection, DEFAULT_MAX_ITER, DEFAULT_RESTARTS};
use crate::community::{louvain, CommunityPartition, LouvainConfig, DEFAULT_MIN_GAIN};
use crate::graph::{ingest_edge_list, DirectedGraph, IngestOptions, Label};
use crate::io::{self as fmt, create, fmt_sig, open, FormatError};
use crate::measures::{measure_matrix_from_raw, raw_measures, Family, Measure, MeasureMatrix};
use crate::report::{self, read_cluster_names, read_selection, render_report, threshold_roles, ReportInputs, ThresholdRole};
use crate::synth::{generate, PlantedSpec};

pub const GRAPH_FILE: &str = "graph.txt";
pub const PLANTED_COMMUNITIES_FILE: &str = "planted_communities.txt";
pub const PLANTED_CAPITALISTS_FILE: &str = "planted_capitalists.txt";
pub const COMMUNITIES_FILE: &str = "communities.txt";
pub const MEASURES_FILE: &str = "measures.csv";
pub const CAPITALISTS_FILE: &str = "capitalists.csv";
pub const THRESHOLD_ROLES_FILE: &str = "threshold_roles.csv";
pub const ROLES_FILE: &str = "roles.txt";
pub const SELECTION_FILE: &str = "selection.csv";
pub const REPORT_DIR: &str = "report";
pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("missing input file {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{0}")]
    Format(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("{0}")]
    Io(String),
}

impl PipelineError {
    pub fn category(&self) -> &'static str {
        match self {
            PipelineError::Usage(_) => "usage",
            PipelineError::MissingInput(_) => "missing-input",
            PipelineError::Format(_) => "format",
            PipelineError::Stage { .. } => "stage",
            PipelineError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 2,
            PipelineError::MissingInput(_) => 3,
            PipelineError::Format(_) => 4,
            PipelineError::Stage { .. } => 5,
            PipelineError::Io(_) => 6,
        }
    }

    fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for PipelineError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Missing(p) => PipelineError::MissingInput(p),
            e @ FormatError::Parse { .. } => PipelineError::Format(e.to_string()),
            e @ FormatError::Io { .. } => PipelineError::Io(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub seed: u64,
    pub min_gain: f64,
    pub family: Family,
    pub overlap_threshold: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub alpha: f64,
    pub flow_min_share: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            seed: 0,
            min_gain: DEFAULT_MIN_GAIN,
            family: Family::Generalized,
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            k_min: 2,
            k_max: 15,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            alpha: 0.05,
            flow_min_share: 0.01,
        }
    }
}

impl Params {
    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("seed", self.seed.to_string()),
            ("min_gain", self.min_gain.to_string()),
            ("family", self.family.name().to_string()),
            ("overlap_threshold", self.overlap_threshold.to_string()),
            ("k_min", self.k_min.to_string()),
            ("k_max", self.k_max.to_string()),
            ("restarts", self.restarts.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("alpha", self.alpha.to_string()),
            ("flow_min_share", self.flow_min_share.to_string()),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Usage(m));
        if !(self.min_gain > 0.0 && self.min_gain.is_finite()) {
            return bad(format!("--min-gain must be positive, got {}", self.min_gain));
        }
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold <= 1.0) {
            return bad(format!("--overlap-threshold must lie in (0, 1], got {}", self.overlap_threshold));
        }
        if self.k_min < 2 || self.k_min > self.k_max {
            return bad(format!("need 2 <= --k-min <= --k-max, got {}..{}", self.k_min, self.k_max));
        }
        if self.restarts == 0 || self.max_iter == 0 {
            return bad("--restarts and max_iter must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("--alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.flow_min_share) {
            return bad(format!("--flow-min-share must lie in [0, 1], got {}", self.flow_min_share));
        }
        Ok(())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::Io(format!("{}: {e}", dir.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io(format!("{}: {e}", path.display()))
}

fn require(paths: &[&Path]) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(PipelineError::MissingInput(p.to_path_buf()));
        }
    }
    Ok(())
}

pub fn load_graph(path: &Path) -> Result<DirectedGraph> {
    let reader = open(path)?;
    ingest_edge_list(reader, &IngestOptions::default()).map_err(|e| match e {
        crate::graph::GraphError::Io(io) => PipelineError::Io(format!("{}: {io}", path.display())),
        other => PipelineError::Format(format!("{}: {other}", path.display())),
    })
}

pub fn stage_communities(g: &DirectedGraph, params: &Params, out_dir: &Path) -> Result<CommunityPartition> {
    create_dir(out_dir)?;
    let config = LouvainConfig {
        seed: params.seed,
        min_gain: params.min_gain,
    };
    let result = louvain(g, &config).map_err(|e| PipelineError::stage("communities", e))?;
    fmt::write_communities(&out_dir.join(COMMUNITIES_FILE), g, &result.partition)?;
    Ok(result.partition)
}

pub fn stage_measures(g: &DirectedGraph, communities: &Path, family: Family, out_dir: &Path) -> Result<MeasureMatrix> {
    require(&[communities])?;
    let p = fmt::read_communities(communities, g)?;
    create_dir(out_dir)?;
    let raw = raw_measures(g, &p);
    let mm = measure_matrix_from_raw(&raw, &p, family.columns());
    let path = out_dir.join(MEASURES_FILE);
    let w = create(&path)?;
    mm.write_csv(g.labels(), w).map_err(io_err(&path))?;
    Ok(mm)
}

pub fn stage_capitalists(g: &DirectedGraph, threshold: f64, out_dir: &Path) -> Result<()> {
    create_dir(out_dir)?;
    let report = classify_capitalists(g, threshold).map_err(|e| PipelineError::stage("capitalists", e))?;
    fmt::write_capitalists(&out_dir.join(CAPITALISTS_FILE), g, &report.labels)?;
    Ok(())
}

pub fn stage_roles_threshold(g: &DirectedGraph, communities: &Path, out_dir: &Path) -> Result<Vec<ThresholdRole>> {
    require(&[communities])?;
    let p = fmt::read_communities(communities, g)?;
    create_dir(out_dir)?;
    let raw = raw_measures(g, &p);
    let zp = measure_matrix_from_raw(&raw, &p, &[Measure::Z, Measure::P]);
    let (z, pc) = (zp.column(0), zp.column(1));
    let roles = threshold_roles(&z, &pc);
    let path = out_dir.join(THRESHOLD_ROLES_FILE);
    let mut w = create(&path)?;
    (|| {
        writeln!(w, "node_label,z,P,role")?;
        for u in g.nodes() {
            let i = u as usize;
            writeln!(w, "{},{},{},{}", g.label(u), fmt_sig(z[i]), fmt_sig(pc[i]), roles[i])?;
        }
        w.flush()
    })()
    .map_err(io_err(&path))?;
    Ok(roles)
}

pub fn read_threshold_roles(path: &Path, g: &DirectedGraph) -> Result<Vec<ThresholdRole>> {
    let reader = open(path)?;
    let mut roles = vec![None; g.node_count()];
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = || PipelineError::Format(format!("{}: line {}: malformed threshold role row", path.display(), i + 1));
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 4 {
            return Err(bad());
        }
        let label: Label = f[0].parse().map_err(|_| bad())?;
        let node = g.node_of(label).ok_or_else(bad)?;
        roles[node as usize] = Some(ThresholdRole::parse(f[3]).ok_or_else(bad)?);
    }
    roles
        .into_iter()
        .enumerate()
        .map(|(u, r)| {
            r.ok_or_else(|| {
                PipelineError::Format(format!("{}: no entry for node label {}", path.display(), g.label(u as u32)))
            })
        })
        .collect()
}

/// Reads a measures CSV and returns its rows in the label order of the file.
pub fn read_measures(path: &Path) -> Result<(Vec<Label>, MeasureMatrix)> {
    let reader = open(path)?;
    MeasureMatrix::read_csv(reader).map_err(|m| PipelineError::Format(format!("{}: {m}", path.display())))
}

/// Reads a measures CSV and reorders its rows to the node order of `g`.
pub fn read_measures_for(path: &Path, g: &DirectedGraph) -> Result<MeasureMatrix> {
    let (labels, mm) = read_measures(path)?;
    let bad = |m: String| PipelineError::Format(format!("{}: {m}", path.display()));
    if labels.len() != g.node_count() {
        return Err(bad(format!("{} rows for {} nodes", labels.len(), g.node_count())));
    }
    let d = mm.column_count();
    let mut data = vec![0.0; mm.data().len()];
    let mut seen = vec![false; g.node_count()];
    for (r, &label) in labels.iter().enumerate() {
        let u = g.node_of(label).ok_or_else(|| bad(format!("label {label} not in graph")))? as usize;
        if std::mem::replace(&mut seen[u], true) {
            return Err(bad(format!("label {label} repeated")));
        }
        data[u * d..(u + 1) * d].copy_from_slice(mm.row(r));
    }
    Ok(MeasureMatrix::from_rows(mm.columns().to_vec(), labels.len(), data))
}

/// Standardizes the measures, picks `k` by Davies-Bouldin and writes the roles.
pub fn stage_roles_cluster(measures: &Path, params: &Params, out_dir: &Path) -> Result<Selection> {
    require(&[measures])?;
    let (labels, mm) = read_measures(measures)?;
    create_dir(out_dir)?;
    let (normalized, _) = normalize_columns(&mm);
    let config = SelectConfig {
        k_min: params.k_min,
        k_max: params.k_max,
        seed: params.seed,
        restarts: params.restarts,
        max_iter: params.max_iter,
    };
    let selection = select_k(Points::from(&normalized), &config).map_err(|e| PipelineError::stage("roles-cluster", e))?;
    let path = out_dir.join(ROLES_FILE);
    let mut w = create(&path)?;
    (|| {
        for (label, c) in labels.iter().zip(&selection.best.assignment) {
            writeln!(w, "{label} {c}")?;
        }
        w.flush()
    })()
    .map_err(io_err(&path))?;
    let path = out_dir.join(SELECTION_FILE);
    let mut w = create(&path)?;
    report::write_selection(&selection.table, Some(selection.best_k), &mut w)
        .and_then(|_| w.flush())
        .map_err(io_err(&path))?;
    Ok(selection)
}

/// Paths the report stage reads from `work_dir`.
pub fn report_inputs(work_dir: &Path) -> [PathBuf; 4] {
    [
        work_dir.join(MEASURES_FILE),
        work_dir.join(ROLES_FILE),
        work_dir.join(CAPITALISTS_FILE),
        work_dir.join(THRESHOLD_ROLES_FILE),
    ]
}

pub fn stage_report(g: &DirectedGraph, work_dir: &Path, params: &Params, cluster_names: Option<&Path>) -> Result<PathBuf> {
    let inputs = report_inputs(work_dir);
    require(&inputs.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
    let [measures, roles, capitalists, thresholds] = inputs;
    let mm = read_measures_for(&measures, g)?;
    let clusters = fmt::read_roles(&roles, g)?;
    let k = clusters.iter().max().map_or(0, |&c| c as usize + 1);
    let caps = fmt::read_capitalists(&capitalists, g)?;
    let trs = read_threshold_roles(&thresholds, g)?;
    let selection_path = work_dir.join(SELECTION_FILE);
    let selection = if selection_path.is_file() {
        Some(read_selection(&selection_path)?)
    } else {
        None
    };
    let names = cluster_names.map(|p| read_cluster_names(p, k)).transpose()?;
    let out = work_dir.join(REPORT_DIR);
    let inputs = ReportInputs {
        graph: g,
        measures: &mm,
        clusters: &clusters,
        k,
        threshold_roles: &trs,
        capitalists: &caps,
        selection: selection.as_deref(),
        cluster_names: names.as_deref(),
        alpha: params.alpha,
        flow_min_share: params.flow_min_share,
    };
    render_report(&inputs, &out).map_err(|e| match e {
        report::RenderError::Format(f) => f.into(),
        report::RenderError::Cluster(c) => PipelineError::stage("report", c),
    })?;
    Ok(out)
}

pub fn stage_synth(spec_path: &Path, out_dir: &Path) -> Result<()> {
    let reader = open(spec_path)?;
    let spec = PlantedSpec::parse(reader).map_err(|e| PipelineError::Format(format!("{}: {e}", spec_path.display())))?;
    let planted = generate(&spec).map_err(|e| PipelineError::stage("synth", e))?;
    create_dir(out_dir)?;
    let g = &planted.graph;
    let path = out_dir.join(GRAPH_FILE);
    g.write_edge_list(create(&path)?).map_err(io_err(&path))?;
    let p = CommunityPartition::from_labels(g, &planted.blocks.iter().map(|&b| b as usize).collect::<Vec<_>>())
        .map_err(|e| PipelineError::stage("synth", e))?;
    fmt::write_communities(&out_dir.join(PLANTED_COMMUNITIES_FILE), g, &p)?;
    let path = out_dir.join(PLANTED_CAPITALISTS_FILE);
    let mut w = create(&path)?;
    (|| {
        writeln!(w, "node_label,block,in_degree,ratio,reciprocation")?;
        for c in &planted.capitalists {
            writeln!(
                w,
                "{},{},{},{},{}",
                g.label(c.node),
                c.spec.block,
                c.spec.in_degree,
                c.spec.ratio,
                c.spec.reciprocation
            )?;
        }
        w.flush()
    })()
    .map_err(io_err(&path))?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => PipelineError::MissingInput(path.to_path_buf()),
        _ => PipelineError::Io(format!("{}: {e}", path.display())),
    })?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Key=value record of a pipeline run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
    pub timings: Vec<(String, f64)>,
    /// Output file (relative to the run directory) and its sha256.
    pub digests: Vec<(String, String)>,
}

impl Manifest {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "{k}={v}")?;
        }
        for (stage, secs) in &self.timings {
            writeln!(out, "timing.{stage}={secs:.3}")?;
        }
        for (file, digest) in &self.digests {
            writeln!(out, "digest {file} {digest}")?;
        }
        out.flush()
    }

    pub fn parse<R: BufRead>(input: R) -> std::result::Result<Self, String> {
        let mut m = Manifest::default();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("digest ") {
                let (file, digest) = rest.rsplit_once(' ').ok_or(format!("line {}: bad digest", i + 1))?;
                m.digests.push((file.to_string(), digest.to_string()));
            } else if let Some((k, v)) = line.split_once('=') {
                if let Some(stage) = k.strip_prefix("timing.") {
                    let secs = v.parse().map_err(|_| format!("line {}: bad timing", i + 1))?;
                    m.timings.push((stage.to_string(), secs));
                } else {
                    m.entries.push((k.to_string(), v.to_string()));
                }
            } else {
                return Err(format!("line {}: expected key=value or digest line", i + 1));
            }
        }
        Ok(m)
    }
}

/// Files a pipeline run produces, relative to the run directory.
pub fn pipeline_outputs() -> Vec<String> {
    let mut files: Vec<String> = [COMMUNITIES_FILE, MEASURES_FILE, CAPITALISTS_FILE, THRESHOLD_ROLES_FILE, ROLES_FILE, SELECTION_FILE]
        .iter()
        .map(|s| s.to_string())
        .collect();
    files.extend(report::BUNDLE_FILES.iter().map(|f| format!("{REPORT_DIR}/{f}")));
    files
}

/// Runs every stage over `input`, writing all files and the manifest into `out_dir`.
pub fn run_pipeline(input: &Path, out_dir: &Path, params: &Params, cluster_names: Option<&Path>) -> Result<Manifest> {
    params.validate()?;
    let input_digest = sha256_file(input)?;
    create_dir(out_dir)?;
    let mut timings = Vec::new();
    let mut timed = |stage: &str, start: Instant| timings.push((stage.to_string(), start.elapsed().as_secs_f64()));

    let t = Instant::now();
    let g = load_graph(input)?;
    timed("ingest", t);
    let t = Instant::now();
    stage_communities(&g, params, out_dir)?;
    timed("communities", t);
    let communities = out_dir.join(COMMUNITIES_FILE);
    let t = Instant::now();
    stage_measures(&g, &communities, params.family, out_dir)?;
    timed("measures", t);
    let t = Instant::now();
    stage_capitalists(&g, params.overlap_threshold, out_dir)?;
    timed("capitalists", t);
    let t = Instant::now();
    stage_roles_threshold(&g, &communities, out_dir)?;
    timed("roles_threshold", t);
    let t = Instant::now();
    stage_roles_cluster(&out_dir.join(MEASURES_FILE), params, out_dir)?;
    timed("roles_cluster", t);
    let t = Instant::now();
    stage_report(&g, out_dir, params, cluster_names)?;
    timed("report", t);

    let mut entries = vec![
        ("tool".to_string(), env!("CARGO_PKG_NAME").to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("input".to_string(), input.display().to_string()),
        ("input.sha256".to_string(), input_digest),
        ("nodes".to_string(), g.node_count().to_string()),
        ("arcs".to_string(), g.arc_count().to_string()),
    ];
    if let Some(p) = cluster_names {
        entries.push(("cluster_names".to_string(), p.display().to_string()));
        entries.push(("cluster_names.sha256".to_string(), sha256_file(p)?));
    }
    entries.extend(params.entries().into_iter().map(|(k, v)| (format!("param.{k}"), v)));
    let mut digests = Vec::new();
    for file in pipeline_outputs() {
        digests.push((file.clone(), sha256_file(&out_dir.join(&file))?));
    }
    let manifest = Manifest {
        entries,
        timings,
        digests,
    };
    let path = out_dir.join(MANIFEST_FILE);
    manifest.write(create(&path)?).map_err(io_err(&path))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let m = Manifest {
            entries: vec![("tool".into(), "commroles".into()), ("param.seed".into(), "3".into())],
            timings: vec![("communities".into(), 0.25)],
            digests: vec![("report/summary.txt".into(), "ab12".into())],
        };
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        assert_eq!(Manifest::parse(buf.as_slice()).unwrap(), m);
        assert_eq!(m.get("param.seed"), Some("3"));
    }

    #[test]
    fn report_names_missing_file() {
        let dir = tempfile::tempdir().unwrap();
        let g = DirectedGraph::from_arcs(2, [(0, 1)]);
        std::fs::write(dir.path().join(MEASURES_FILE), "node_label,z\n0,0\n1,0\n").unwrap();
        match stage_report(&g, dir.path(), &Params::default(), None) {
            Err(PipelineError::MissingInput(p)) => assert!(p.ends_with(ROLES_FILE)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
