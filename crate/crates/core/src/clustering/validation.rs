//! One-way ANOVA per measure and Bonferroni-corrected Welch t-tests per cluster pair.

use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::ClusterError;
use crate::measures::{Measure, MeasureMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct AnovaRow {
    pub measure: Measure,
    pub f: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairTest {
    pub measure: Measure,
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    /// `min(1, p * comparisons)`.
    pub p_adjusted: f64,
    pub significant: bool,
    /// False when either cluster has fewer than two members.
    pub testable: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterValidation {
    pub alpha: f64,
    pub comparisons: usize,
    pub adjusted_threshold: f64,
    pub anova: Vec<AnovaRow>,
    pub pairs: Vec<PairTest>,
}

struct GroupStats {
    n: usize,
    mean: f64,
    // sum of squared deviations from the group mean
    ss: f64,
}

fn group_stats(values: &[f64], assignment: &[u32], k: usize) -> Vec<GroupStats> {
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (&v, &a) in values.iter().zip(assignment) {
        groups[a as usize].push(v);
    }
    groups
        .into_iter()
        .map(|mut g| {
            // sorted summation: equal multisets give bit-identical means
            g.sort_by(f64::total_cmp);
            let n = g.len();
            let mean = if n == 0 { f64::NAN } else { g.iter().sum::<f64>() / n as f64 };
            let ss = g.iter().map(|v| (v - mean) * (v - mean)).sum();
            GroupStats { n, mean, ss }
        })
        .collect()
}

fn anova(groups: &[GroupStats]) -> (f64, f64) {
    let present: Vec<&GroupStats> = groups.iter().filter(|g| g.n > 0).collect();
    let k = present.len();
    let n: usize = present.iter().map(|g| g.n).sum();
    if k < 2 || n <= k {
        return (f64::NAN, f64::NAN);
    }
    // between-group sum of squares via pairwise mean gaps, exactly zero for equal means
    let mut between = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let gap = present[i].mean - present[j].mean;
            between += present[i].n as f64 * present[j].n as f64 * gap * gap;
        }
    }
    between /= n as f64;
    let within: f64 = present.iter().map(|g| g.ss).sum();
    let (df1, df2) = ((k - 1) as f64, (n - k) as f64);
    if between == 0.0 {
        return (0.0, 1.0);
    }
    if within == 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let f = (between / df1) / (within / df2);
    let p = FisherSnedecor::new(df1, df2).map(|d| d.sf(f)).unwrap_or(f64::NAN);
    (f, p)
}

fn welch(a: &GroupStats, b: &GroupStats) -> Option<(f64, f64, f64)> {
    if a.n < 2 || b.n < 2 {
        return None;
    }
    let va = a.ss / (a.n - 1) as f64 / a.n as f64;
    let vb = b.ss / (b.n - 1) as f64 / b.n as f64;
    let gap = a.mean - b.mean;
    let se2 = va + vb;
    if se2 == 0.0 {
        return Some(if gap == 0.0 {
            (0.0, f64::NAN, 1.0)
        } else {
            (gap.signum() * f64::INFINITY, f64::NAN, 0.0)
        });
    }
    let t = gap / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.n - 1) as f64 + vb * vb / (b.n - 1) as f64);
    let p = StudentsT::new(0.0, 1.0, df)
        .map(|d| 2.0 * d.sf(t.abs()))
        .unwrap_or(f64::NAN)
        .min(1.0);
    Some((t, df, p))
}

/// Tests whether clusters differ on every measure of `mm`.
pub fn validate_clusters(
    mm: &MeasureMatrix,
    assignment: &[u32],
    k: usize,
    alpha: f64,
) -> Result<ClusterValidation, ClusterError> {
    if k < 2 {
        return Err(ClusterError::InvalidParameter("validation needs k >= 2".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ClusterError::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    assert_eq!(assignment.len(), mm.rows());
    let comparisons = k * (k - 1) / 2 * mm.column_count();
    let threshold = alpha / comparisons as f64;
    let mut anova_rows = Vec::new();
    let mut pairs = Vec::new();
    for (c, &measure) in mm.columns().iter().enumerate() {
        let groups = group_stats(&mm.column(c), assignment, k);
        let (f, p_value) = anova(&groups);
        anova_rows.push(AnovaRow { measure, f, p_value });
        for a in 0..k {
            for b in a + 1..k {
                let test = welch(&groups[a], &groups[b]);
                let (t, df, p) = test.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                let testable = test.is_some();
                pairs.push(PairTest {
                    measure,
                    cluster_a: a,
                    cluster_b: b,
                    t,
                    df,
                    p_value: p,
                    p_adjusted: if testable { (p * comparisons as f64).min(1.0) } else { f64::NAN },
                    significant: testable && p < threshold,
                    testable,
                });
            }
        }
    }
    Ok(ClusterValidation {
        alpha,
        comparisons,
        adjusted_threshold: threshold,
        anova: anova_rows,
        pairs,
    })
}
