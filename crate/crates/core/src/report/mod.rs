//! Threshold roles, inter-cluster flows, capitalist distributions and the report bundle.

mod distribution;
mod flows;
mod render;
mod roles;

pub use distribution::{capitalist_distribution, BandScheme, DistributionRow, DistributionTable};
pub use flows::{intercluster_flows, Flow, InterClusterFlows};
pub use render::{
    build_report, check_bundle_consistency, cluster_means, read_cluster_names, read_selection, render_report,
    write_selection, RenderError, ReportBundle, ReportInputs, BUNDLE_FILES, CENTROIDS_FILE, DISTRIBUTION_HIGH_FILE,
    DISTRIBUTION_LOW_FILE, FLOWS_DOT_FILE, FLOWS_FILE, MEASURES_FILE, ROLES_FILE, SELECTION_FILE, SUMMARY_FILE,
    VALIDATION_FILE,
};
pub use roles::{threshold_roles, ThresholdRole, HUB_Z};
