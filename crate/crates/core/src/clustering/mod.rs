//! Unsupervised role identification in measure space.

mod kmeans;
mod normalize;
mod select;
mod validation;

use thiserror::Error;

pub use kmeans::{kmeans, kmeans_with_stream, KMeansRun, DEFAULT_MAX_ITER};
pub use normalize::{normalize_columns, Normalization};
pub use select::{davies_bouldin, select_k, SelectConfig, Selection, SelectionRow, DEFAULT_RESTARTS};
pub use validation::{validate_clusters, AnovaRow, ClusterValidation, PairTest};

use crate::measures::MeasureMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} is infeasible: only {distinct} distinct points")]
    InfeasibleK { k: usize, distinct: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate clustering: {0}")]
    Degenerate(String),
}

/// Borrowed row-major point set.
#[derive(Clone, Copy, Debug)]
pub struct Points<'a> {
    data: &'a [f64],
    dims: usize,
}

impl<'a> Points<'a> {
    pub fn new(data: &'a [f64], dims: usize) -> Self {
        assert!(dims > 0 && data.len().is_multiple_of(dims), "data length must be a multiple of dims");
        Points { data, dims }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }
}

impl<'a> From<&'a MeasureMatrix> for Points<'a> {
    fn from(mm: &'a MeasureMatrix) -> Self {
        Points::new(mm.data(), mm.column_count())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoleSource {
    KMeans,
    Thresholds,
}

/// Node-to-role assignment with the role prototypes.
#[derive(Clone, Debug, PartialEq)]
pub struct RoleAssignment {
    pub clusters: Vec<u32>,
    pub k: usize,
    /// Row-major `k x dims`, in the space the clustering ran in.
    pub centroids: Vec<f64>,
    pub dims: usize,
    pub db_index: Option<f64>,
    pub source: RoleSource,
}

impl From<&Selection> for RoleAssignment {
    fn from(s: &Selection) -> Self {
        RoleAssignment {
            clusters: s.best.assignment.clone(),
            k: s.best_k,
            centroids: s.best.centroids.clone(),
            dims: s.best.dims,
            db_index: Some(s.db_index),
            source: RoleSource::KMeans,
        }
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
