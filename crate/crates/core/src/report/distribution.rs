use std::io::Write;

use crate::capitalist::{CapitalistClass, CapitalistLabel, Ratio};
use crate::io::fmt_sig;

/// How capitalists of one class are split by their friends/followers ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandScheme {
    /// `r <= 1`, `r > 1`
    Binary,
    /// `r <= 0.7`, `0.7 < r <= 1`, `r > 1`
    Ternary,
}

impl BandScheme {
    pub fn for_class(class: CapitalistClass) -> Self {
        match class {
            CapitalistClass::HighInDegree => BandScheme::Ternary,
            _ => BandScheme::Binary,
        }
    }

    pub fn band_names(self) -> &'static [&'static str] {
        match self {
            BandScheme::Binary => &["r<=1", "r>1"],
            BandScheme::Ternary => &["r<=0.7", "0.7<r<=1", "r>1"],
        }
    }

    /// Row index of a ratio; `None` for undefined ratios.
    pub fn band_of(self, ratio: Ratio) -> Option<usize> {
        let above_one = match ratio {
            Ratio::Finite(r) if r <= 1.0 => false,
            Ratio::Finite(_) | Ratio::Infinite => true,
            Ratio::Undefined => return None,
        };
        Some(match (self, ratio, above_one) {
            (_, _, true) => self.band_names().len() - 1,
            (BandScheme::Binary, _, false) => 0,
            (BandScheme::Ternary, Ratio::Finite(r), false) if r <= 0.7 => 0,
            (BandScheme::Ternary, _, false) => 1,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionRow {
    pub band: &'static str,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Fraction of this row's capitalists that sit in each cluster.
    pub share_of_class: Vec<f64>,
    /// Fraction of each cluster that belongs to this row.
    pub share_of_cluster: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistributionTable {
    pub class: CapitalistClass,
    pub scheme: BandScheme,
    pub cluster_sizes: Vec<u64>,
    pub class_total: u64,
    pub rows: Vec<DistributionRow>,
    /// Set when the class has no members; all rows are then zero.
    pub empty_class: bool,
}

pub fn capitalist_distribution(
    labels: &[CapitalistLabel],
    clusters: &[u32],
    k: usize,
    class: CapitalistClass,
    scheme: BandScheme,
) -> DistributionTable {
    assert_eq!(labels.len(), clusters.len());
    let bands = scheme.band_names();
    let mut counts = vec![vec![0u64; k]; bands.len()];
    let mut cluster_sizes = vec![0u64; k];
    for (l, &c) in labels.iter().zip(clusters) {
        cluster_sizes[c as usize] += 1;
        if l.class != class {
            continue;
        }
        if let Some(b) = scheme.band_of(l.ratio) {
            counts[b][c as usize] += 1;
        }
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let rows: Vec<DistributionRow> = bands
        .iter()
        .zip(counts)
        .map(|(&band, counts)| {
            let total = counts.iter().sum();
            DistributionRow {
                band,
                share_of_class: counts.iter().map(|&n| ratio(n, total)).collect(),
                share_of_cluster: counts.iter().zip(&cluster_sizes).map(|(&n, &s)| ratio(n, s)).collect(),
                total,
                counts,
            }
        })
        .collect();
    let class_total = rows.iter().map(|r| r.total).sum();
    DistributionTable {
        class,
        scheme,
        cluster_sizes,
        class_total,
        rows,
        empty_class: class_total == 0,
    }
}

impl DistributionTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "class,band,cluster,count,band_total,share_of_class,share_of_cluster")?;
        for row in &self.rows {
            for c in 0..self.cluster_sizes.len() {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    self.class.name(),
                    row.band,
                    c,
                    row.counts[c],
                    row.total,
                    fmt_sig(row.share_of_class[c]),
                    fmt_sig(row.share_of_cluster[c])
                )?;
            }
        }
        out.flush()
    }
}
