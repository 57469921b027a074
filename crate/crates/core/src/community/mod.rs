//! Community detection by directed modularity.

mod louvain;
mod partition;
mod weighted;

pub use louvain::{louvain, LocalMover, LouvainConfig, LouvainResult, DEFAULT_MIN_GAIN};
pub use partition::{CommunityError, CommunityPartition};
pub use weighted::{coarsen, directed_modularity, WeightedDigraph};
