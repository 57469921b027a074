use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commroles::measures::Family;
use commroles::pipeline::{self, Params, PipelineError};

#[derive(Parser)]
#[command(name = "commroles", version, about = "Community roles and social capitalists in directed graphs")]
struct Cli {
    /// Worker threads; defaults to all available cores.
    #[arg(long, global = true, env = "COMMROLES_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Edge list, one `src dst` arc per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Louvain community detection.
    Communities {
        #[command(flatten)]
        io: GraphArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = commroles::community::DEFAULT_MIN_GAIN)]
        min_gain: f64,
    },
    /// Community-role measures of one family.
    Measures {
        #[command(flatten)]
        io: GraphArgs,
        /// Community file; defaults to communities.txt in the output directory.
        #[arg(long)]
        communities: Option<PathBuf>,
        #[arg(long, default_value = "generalized")]
        family: Family,
    },
    /// Social capitalist labels.
    Capitalists {
        #[command(flatten)]
        io: GraphArgs,
        #[arg(long, default_value_t = commroles::capitalist::DEFAULT_OVERLAP_THRESHOLD)]
        overlap_threshold: f64,
    },
    /// Fixed-threshold roles from z and P.
    RolesThreshold {
        #[command(flatten)]
        io: GraphArgs,
        #[arg(long)]
        communities: Option<PathBuf>,
    },
    /// k-means roles over a measures file, k chosen by Davies-Bouldin.
    RolesCluster {
        /// Measures CSV; defaults to measures.csv in the output directory.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        cluster: ClusterArgs,
    },
    /// Report bundle from the files of the earlier stages.
    Report {
        #[command(flatten)]
        io: GraphArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Planted-partition benchmark graph.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// All stages in order, with a manifest.
    Pipeline {
        #[command(flatten)]
        io: GraphArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = commroles::community::DEFAULT_MIN_GAIN)]
        min_gain: f64,
        #[arg(long, default_value = "generalized")]
        family: Family,
        #[arg(long, default_value_t = commroles::capitalist::DEFAULT_OVERLAP_THRESHOLD)]
        overlap_threshold: f64,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Args, Clone)]
struct ClusterArgs {
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 15)]
    k_max: usize,
    #[arg(long, default_value_t = commroles::clustering::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = commroles::clustering::DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args, Clone)]
struct ReportArgs {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    flow_min_share: f64,
    /// `cluster name` lines naming the clusters in the report.
    #[arg(long)]
    cluster_names: Option<PathBuf>,
}

fn communities_or_default(out_dir: &Path, c: Option<PathBuf>) -> PathBuf {
    c.unwrap_or_else(|| out_dir.join(pipeline::COMMUNITIES_FILE))
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(PipelineError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PipelineError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Communities { io, seed, min_gain } => {
            let params = Params {
                seed,
                min_gain,
                ..Params::default()
            };
            params.validate()?;
            let g = pipeline::load_graph(&io.input)?;
            pipeline::stage_communities(&g, &params, &io.out_dir)?;
        }
        Command::Measures { io, communities, family } => {
            let g = pipeline::load_graph(&io.input)?;
            let c = communities_or_default(&io.out_dir, communities);
            pipeline::stage_measures(&g, &c, family, &io.out_dir)?;
        }
        Command::Capitalists { io, overlap_threshold } => {
            let g = pipeline::load_graph(&io.input)?;
            pipeline::stage_capitalists(&g, overlap_threshold, &io.out_dir)?;
        }
        Command::RolesThreshold { io, communities } => {
            let g = pipeline::load_graph(&io.input)?;
            let c = communities_or_default(&io.out_dir, communities);
            pipeline::stage_roles_threshold(&g, &c, &io.out_dir)?;
        }
        Command::RolesCluster {
            input,
            out_dir,
            seed,
            cluster,
        } => {
            let params = cluster_params(&cluster, Params { seed, ..Params::default() });
            params.validate()?;
            let input = input.unwrap_or_else(|| out_dir.join(pipeline::MEASURES_FILE));
            pipeline::stage_roles_cluster(&input, &params, &out_dir)?;
        }
        Command::Report { io, report } => {
            let params = report_params(&report, Params::default());
            params.validate()?;
            // check the stage inputs before paying for graph ingestion
            for p in pipeline::report_inputs(&io.out_dir) {
                if !p.is_file() {
                    return Err(PipelineError::MissingInput(p));
                }
            }
            let g = pipeline::load_graph(&io.input)?;
            pipeline::stage_report(&g, &io.out_dir, &params, report.cluster_names.as_deref())?;
        }
        Command::Synth { spec, out_dir } => pipeline::stage_synth(&spec, &out_dir)?,
        Command::Pipeline {
            io,
            seed,
            min_gain,
            family,
            overlap_threshold,
            cluster,
            report,
        } => {
            let base = Params {
                seed,
                min_gain,
                family,
                overlap_threshold,
                ..Params::default()
            };
            let params = report_params(&report, cluster_params(&cluster, base));
            pipeline::run_pipeline(&io.input, &io.out_dir, &params, report.cluster_names.as_deref())?;
        }
    }
    Ok(())
}

fn cluster_params(c: &ClusterArgs, base: Params) -> Params {
    Params {
        k_min: c.k_min,
        k_max: c.k_max,
        restarts: c.restarts,
        max_iter: c.max_iter,
        ..base
    }
}

fn report_params(r: &ReportArgs, base: Params) -> Params {
    Params {
        alpha: r.alpha,
        flow_min_share: r.flow_min_share,
        ..base
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
