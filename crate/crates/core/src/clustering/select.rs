//! Choice of the number of roles by the Davies-Bouldin index.

use super::kmeans::{kmeans_with_stream, KMeansRun, DEFAULT_MAX_ITER};
use super::{sq_dist, ClusterError, Points};

pub const DEFAULT_RESTARTS: usize = 5;

/// Davies-Bouldin index of a hard clustering; lower is better.
///
/// Centroids are recomputed from `assignment`, so the index depends only on
/// the partition.
pub fn davies_bouldin(points: Points<'_>, assignment: &[u32], k: usize) -> Result<f64, ClusterError> {
    if k < 2 {
        return Err(ClusterError::InvalidParameter("Davies-Bouldin needs k >= 2".into()));
    }
    assert_eq!(assignment.len(), points.len());
    let d = points.dims();
    let mut centroids = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &a) in assignment.iter().enumerate() {
        let a = a as usize;
        counts[a] += 1;
        for (c, x) in centroids[a * d..(a + 1) * d].iter_mut().zip(points.row(i)) {
            *c += x;
        }
    }
    if let Some(j) = counts.iter().position(|&c| c == 0) {
        return Err(ClusterError::Degenerate(format!("cluster {j} is empty")));
    }
    for j in 0..k {
        for c in &mut centroids[j * d..(j + 1) * d] {
            *c /= counts[j] as f64;
        }
    }
    let mut scatter = vec![0.0; k];
    for (i, &a) in assignment.iter().enumerate() {
        let a = a as usize;
        scatter[a] += sq_dist(points.row(i), &centroids[a * d..(a + 1) * d]).sqrt();
    }
    for j in 0..k {
        scatter[j] /= counts[j] as f64;
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let sep = sq_dist(&centroids[i * d..(i + 1) * d], &centroids[j * d..(j + 1) * d]).sqrt();
            if sep == 0.0 {
                return Err(ClusterError::Degenerate(format!("centroids {i} and {j} coincide")));
            }
            worst = worst.max((scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

#[derive(Clone, Debug)]
pub struct SelectConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            k_min: 2,
            k_max: 15,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionRow {
    pub k: usize,
    pub wcss: f64,
    pub db_index: f64,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub best_k: usize,
    pub db_index: f64,
    pub best: KMeansRun,
    pub table: Vec<SelectionRow>,
}

/// Best-of-restarts k-means for each `k` in range, then the lowest DB index wins.
///
/// Ties on DB go to the smaller `k`.
pub fn select_k(points: Points<'_>, config: &SelectConfig) -> Result<Selection, ClusterError> {
    if config.k_min < 2 || config.k_min > config.k_max {
        return Err(ClusterError::InvalidParameter(format!(
            "k range {}..={} must satisfy 2 <= k_min <= k_max",
            config.k_min, config.k_max
        )));
    }
    if config.restarts == 0 {
        return Err(ClusterError::InvalidParameter("restarts must be at least 1".into()));
    }
    let mut table = Vec::new();
    let mut best: Option<(f64, KMeansRun)> = None;
    for k in config.k_min..=config.k_max {
        let mut best_for_k: Option<KMeansRun> = None;
        for r in 0..config.restarts {
            let stream = ((k as u64) << 32) | r as u64;
            let run = kmeans_with_stream(points, k, config.seed, stream, config.max_iter)?;
            if best_for_k.as_ref().is_none_or(|b| run.wcss < b.wcss) {
                best_for_k = Some(run);
            }
        }
        let run = best_for_k.expect("restarts >= 1");
        let db = davies_bouldin(points, &run.assignment, k)?;
        table.push(SelectionRow {
            k,
            wcss: run.wcss,
            db_index: db,
        });
        if best.as_ref().is_none_or(|(b, _)| db < *b) {
            best = Some((db, run));
        }
    }
    let (db_index, best) = best.expect("non-empty k range");
    Ok(Selection {
        best_k: best.k,
        db_index,
        best,
        table,
    })
}
