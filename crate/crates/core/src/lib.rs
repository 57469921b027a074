//! Community roles in large directed graphs: community detection, role measures,
//! role clustering and social capitalist detection.

pub mod capitalist;
pub mod clustering;
pub mod community;
pub mod graph;
pub mod io;
pub mod measures;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use graph::{ingest_edge_list, DirectedGraph, IngestOptions, Label, NodeId};
