//! Lloyd's k-means with k-means++ seeding.
//!
//! The assignment step uses Hamerly's bounds to skip distance computations
//! for points that provably keep their centroid; the resulting assignments are
//! those of plain Lloyd iterations.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{sq_dist, ClusterError, Points};

pub const DEFAULT_MAX_ITER: usize = 100;

// fixed chunking keeps floating point reductions independent of thread count
const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansRun {
    pub k: usize,
    pub dims: usize,
    pub assignment: Vec<u32>,
    /// Row-major `k x dims`.
    pub centroids: Vec<f64>,
    pub wcss: f64,
    /// WCSS after every centroid update, from running sums; its last entry
    /// agrees with `wcss` up to rounding.
    pub wcss_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansRun {
    pub fn centroid(&self, j: usize) -> &[f64] {
        &self.centroids[j * self.dims..(j + 1) * self.dims]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignment {
            sizes[a as usize] += 1;
        }
        sizes
    }
}

fn count_distinct_up_to(points: Points<'_>, limit: usize) -> usize {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    for i in 0..points.len() {
        // +0.0 folds -0.0 into 0.0
        seen.insert(points.row(i).iter().map(|&x| (x + 0.0).to_bits()).collect());
        if seen.len() >= limit {
            break;
        }
    }
    seen.len()
}

fn plus_plus_seed(points: Points<'_>, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = points.len();
    let d = points.dims();
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(points.row(first));
    let mut nearest: Vec<f64> = (0..n).into_par_iter().map(|i| sq_dist(points.row(i), points.row(first))).collect();
    for _ in 1..k {
        let total: f64 = nearest.par_chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect::<Vec<_>>().iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        let mut last_positive = 0;
        for (i, &w) in nearest.iter().enumerate() {
            if w > 0.0 {
                last_positive = i;
                acc += w;
                if acc > target {
                    chosen = Some(i);
                    break;
                }
            }
        }
        let chosen = chosen.unwrap_or(last_positive);
        let c = points.row(chosen);
        centroids.extend_from_slice(c);
        nearest.par_iter_mut().enumerate().for_each(|(i, w)| {
            let dist = sq_dist(points.row(i), c);
            if dist < *w {
                *w = dist;
            }
        });
    }
    centroids
}

/// Nearest and second-nearest centroid distances (not squared); ties go to the lower index.
#[inline]
fn nearest_two(x: &[f64], centroids: &[f64], dims: usize) -> (u32, f64, f64) {
    let mut best = (0u32, f64::INFINITY);
    let mut second = f64::INFINITY;
    for (j, c) in centroids.chunks_exact(dims).enumerate() {
        let dist = sq_dist(x, c);
        if dist < best.1 {
            second = best.1;
            best = (j as u32, dist);
        } else if dist < second {
            second = dist;
        }
    }
    (best.0, best.1.sqrt(), second.sqrt())
}

fn wcss(points: Points<'_>, assignment: &[u32], centroids: &[f64]) -> f64 {
    let d = points.dims();
    let partial: Vec<f64> = assignment
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            chunk
                .iter()
                .enumerate()
                .map(|(o, &a)| {
                    let i = ci * CHUNK + o;
                    let a = a as usize;
                    sq_dist(points.row(i), &centroids[a * d..(a + 1) * d])
                })
                .sum::<f64>()
        })
        .collect();
    partial.iter().sum()
}

/// Per-cluster coordinate sums and counts.
fn accumulate(points: Points<'_>, assignment: &[u32], k: usize) -> (Vec<f64>, Vec<usize>) {
    let d = points.dims();
    let partial: Vec<(Vec<f64>, Vec<usize>)> = assignment
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut sums = vec![0.0; k * d];
            let mut counts = vec![0usize; k];
            for (o, &a) in chunk.iter().enumerate() {
                let a = a as usize;
                counts[a] += 1;
                for (s, x) in sums[a * d..(a + 1) * d].iter_mut().zip(points.row(ci * CHUNK + o)) {
                    *s += x;
                }
            }
            (sums, counts)
        })
        .collect();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (s, c) in partial {
        for (a, b) in sums.iter_mut().zip(s) {
            *a += b;
        }
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    (sums, counts)
}

fn means(sums: &[f64], counts: &[usize], previous: &[f64], d: usize) -> Vec<f64> {
    let mut out = previous.to_vec();
    for (j, &c) in counts.iter().enumerate() {
        if c > 0 {
            for (o, s) in out[j * d..(j + 1) * d].iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                *o = s / c as f64;
            }
        }
    }
    out
}

/// Moves point `x` from cluster `from` to `to` in the running sums.
fn shift(sums: &mut [f64], counts: &mut [usize], x: &[f64], from: usize, to: usize) {
    let d = x.len();
    counts[from] -= 1;
    counts[to] += 1;
    for (s, v) in sums[from * d..(from + 1) * d].iter_mut().zip(x) {
        *s -= v;
    }
    for (s, v) in sums[to * d..(to + 1) * d].iter_mut().zip(x) {
        *s += v;
    }
}

/// WCSS about the cluster means, as total square norm minus the between part.
fn wcss_from_sums(total_sq: f64, sums: &[f64], counts: &[usize], d: usize) -> f64 {
    let between: f64 = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(j, &c)| sums[j * d..(j + 1) * d].iter().map(|s| s * s).sum::<f64>() / c as f64)
        .sum();
    (total_sq - between).max(0.0)
}

/// Gives every empty cluster the point farthest from its own centroid.
#[allow(clippy::too_many_arguments)]
fn repair_empty(
    points: Points<'_>,
    assignment: &mut [u32],
    centroids: &mut [f64],
    sums: &mut [f64],
    counts: &mut [usize],
    upper: &mut [f64],
    lower: &mut [f64],
) -> bool {
    let d = points.dims();
    let k = counts.len();
    let mut repaired = false;
    for j in 0..k {
        if counts[j] > 0 {
            continue;
        }
        let mut far = None::<(usize, f64)>;
        for (i, &a) in assignment.iter().enumerate() {
            let a = a as usize;
            if counts[a] < 2 {
                continue;
            }
            let dist = sq_dist(points.row(i), &centroids[a * d..(a + 1) * d]);
            if far.is_none_or(|(_, best)| dist > best) {
                far = Some((i, dist));
            }
        }
        let Some((i, _)) = far else { break };
        shift(sums, counts, points.row(i), assignment[i] as usize, j);
        assignment[i] = j as u32;
        centroids[j * d..(j + 1) * d].copy_from_slice(points.row(i));
        upper[i] = f64::INFINITY;
        lower[i] = 0.0;
        repaired = true;
    }
    if repaired {
        // every bound may now be stale with respect to the moved centroids
        upper.iter_mut().for_each(|u| *u = f64::INFINITY);
        lower.iter_mut().for_each(|l| *l = 0.0);
    }
    repaired
}

/// k-means from a seed; equivalent to [`kmeans_with_stream`] with stream 0.
pub fn kmeans(points: Points<'_>, k: usize, seed: u64, max_iter: usize) -> Result<KMeansRun, ClusterError> {
    kmeans_with_stream(points, k, seed, 0, max_iter)
}

/// k-means with an explicit RNG stream, so restarts under one seed are independent.
pub fn kmeans_with_stream(
    points: Points<'_>,
    k: usize,
    seed: u64,
    stream: u64,
    max_iter: usize,
) -> Result<KMeansRun, ClusterError> {
    let n = points.len();
    let d = points.dims();
    if k == 0 || k > n {
        return Err(ClusterError::InvalidParameter(format!("k = {k} with {n} points")));
    }
    if max_iter == 0 {
        return Err(ClusterError::InvalidParameter("max_iter must be at least 1".into()));
    }
    let distinct = count_distinct_up_to(points, k);
    if distinct < k {
        return Err(ClusterError::InfeasibleK { k, distinct });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut centroids = plus_plus_seed(points, k, &mut rng);

    let mut assignment = vec![0u32; n];
    let mut upper = vec![0.0f64; n];
    let mut lower = vec![0.0f64; n];
    assignment
        .par_iter_mut()
        .zip(upper.par_iter_mut().zip(lower.par_iter_mut()))
        .enumerate()
        .for_each(|(i, (a, (u, l)))| {
            let (j, d1, d2) = nearest_two(points.row(i), &centroids, d);
            *a = j;
            *u = d1;
            *l = d2;
        });

    let total_sq: f64 = (0..n)
        .into_par_iter()
        .chunks(CHUNK)
        .map(|c| c.iter().map(|&i| points.row(i).iter().map(|x| x * x).sum::<f64>()).sum::<f64>())
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let (mut sums, mut counts) = accumulate(points, &assignment, k);
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let mut changed = usize::MAX;
    let mut converged = false;
    let mut half_sep = vec![0.0f64; k];
    loop {
        let repaired = repair_empty(
            points,
            &mut assignment,
            &mut centroids,
            &mut sums,
            &mut counts,
            &mut upper,
            &mut lower,
        );
        let next = means(&sums, &counts, &centroids, d);
        let drift: Vec<f64> = (0..k)
            .map(|j| sq_dist(&next[j * d..(j + 1) * d], &centroids[j * d..(j + 1) * d]).sqrt())
            .collect();
        centroids = next;
        let cost = wcss_from_sums(total_sq, &sums, &counts, d);
        if let Some(&prev) = trace.last() {
            assert!(
                cost <= prev + 1e-9 * prev.abs().max(1.0),
                "WCSS increased from {prev} to {cost}"
            );
        }
        trace.push(cost);
        iterations += 1;
        if iterations > 1 && changed == 0 && !repaired {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }

        // the lower bound of a point loses the largest drift among the other centroids
        let (mut top, mut top_j, mut runner_up) = (0.0f64, usize::MAX, 0.0f64);
        for (j, &m) in drift.iter().enumerate() {
            if m > top {
                runner_up = top;
                top = m;
                top_j = j;
            } else if m > runner_up {
                runner_up = m;
            }
        }
        for j in 0..k {
            let cj = &centroids[j * d..(j + 1) * d];
            let min = (0..k)
                .filter(|&o| o != j)
                .map(|o| sq_dist(cj, &centroids[o * d..(o + 1) * d]))
                .fold(f64::INFINITY, f64::min);
            half_sep[j] = 0.5 * min.sqrt();
        }
        let centroids_ref = &centroids;
        let half_sep_ref = &half_sep;
        let drift_ref = &drift;
        let moves: Vec<Vec<(usize, u32, u32)>> = assignment
            .par_chunks_mut(CHUNK)
            .zip(upper.par_chunks_mut(CHUNK).zip(lower.par_chunks_mut(CHUNK)))
            .enumerate()
            .map(|(ci, (ac, (uc, lc)))| {
                let mut moved = Vec::new();
                for (o, (a, (u, l))) in ac.iter_mut().zip(uc.iter_mut().zip(lc.iter_mut())).enumerate() {
                    let own = *a as usize;
                    *u += drift_ref[own];
                    *l -= if own == top_j { runner_up } else { top };
                    let bound = half_sep_ref[own].max(*l);
                    if *u <= bound {
                        continue;
                    }
                    let i = ci * CHUNK + o;
                    let x = points.row(i);
                    *u = sq_dist(x, &centroids_ref[own * d..(own + 1) * d]).sqrt();
                    if *u <= bound {
                        continue;
                    }
                    let own_dist = *u;
                    let (j, d1, d2) = nearest_two(x, centroids_ref, d);
                    if j as usize != own && d1 < own_dist {
                        moved.push((i, *a, j));
                        *a = j;
                        *u = d1;
                        *l = d2;
                    } else {
                        // exact ties keep the current centroid
                        *l = if j as usize == own { d2 } else { d1 };
                    }
                }
                moved
            })
            .collect();
        changed = 0;
        for (i, from, to) in moves.into_iter().flatten() {
            shift(&mut sums, &mut counts, points.row(i), from as usize, to as usize);
            changed += 1;
        }
    }
    // running sums drift by rounding; report centroids and cost from a fresh pass
    let (sums, counts) = accumulate(points, &assignment, k);
    centroids = means(&sums, &counts, &centroids, d);
    let wcss = wcss(points, &assignment, &centroids);
    Ok(KMeansRun {
        k,
        dims: d,
        assignment,
        centroids,
        wcss,
        wcss_trace: trace,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_equals_rows_is_exact() {
        let data = [0.0, 0.0, 1.0, 0.0, 0.0, 5.0, 3.0, 3.0];
        let run = kmeans(Points::new(&data, 2), 4, 1, 100).unwrap();
        assert_eq!(run.wcss, 0.0);
        let mut a = run.assignment.clone();
        a.sort();
        assert_eq!(a, vec![0, 1, 2, 3]);
    }

    #[test]
    fn duplicated_point_k1() {
        let data = [2.5, -1.0, 2.5, -1.0, 2.5, -1.0];
        let run = kmeans(Points::new(&data, 2), 1, 9, 10).unwrap();
        assert_eq!(run.centroid(0), &[2.5, -1.0]);
    }

    #[test]
    fn infeasible_k() {
        let data = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(
            kmeans(Points::new(&data, 1), 2, 0, 10),
            Err(ClusterError::InfeasibleK { k: 2, distinct: 1 })
        );
        assert!(kmeans(Points::new(&data, 1), 5, 0, 10).is_err());
        assert!(kmeans(Points::new(&data, 1), 1, 0, 0).is_err());
    }

    #[test]
    fn seed_determinism() {
        let data: Vec<f64> = (0..400).map(|i| ((i * 7919) % 113) as f64 / 7.0).collect();
        let p = Points::new(&data, 2);
        assert_eq!(kmeans(p, 5, 42, 100).unwrap(), kmeans(p, 5, 42, 100).unwrap());
    }
}
