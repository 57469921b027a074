use crate::measures::MeasureMatrix;

/// Column means and population standard deviations used to standardize.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Normalization {
    /// Maps a point of the standardized space back to measure units.
    pub fn denormalize(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| if *s > 0.0 { x * s + m } else { *m })
            .collect()
    }
}

/// Standardizes every column to mean 0 and population std 1; constant columns become 0.
pub fn normalize_columns(mm: &MeasureMatrix) -> (MeasureMatrix, Normalization) {
    let d = mm.column_count();
    let n = mm.rows();
    let mut means = vec![0.0; d];
    let mut stds = vec![0.0; d];
    let mut constant = vec![true; d];
    if n > 0 {
        for r in 0..n {
            for (c, &v) in mm.row(r).iter().enumerate() {
                means[c] += v;
                constant[c] &= v == mm.get(0, c);
            }
        }
        for m in means.iter_mut() {
            *m /= n as f64;
        }
        for r in 0..n {
            for (c, &v) in mm.row(r).iter().enumerate() {
                stds[c] += (v - means[c]) * (v - means[c]);
            }
        }
        for (c, s) in stds.iter_mut().enumerate() {
            *s = if constant[c] { 0.0 } else { (*s / n as f64).sqrt() };
        }
    }
    let data = (0..n)
        .flat_map(|r| {
            let (means, stds) = (&means, &stds);
            mm.row(r)
                .iter()
                .enumerate()
                .map(move |(c, &v)| if stds[c] > 0.0 { (v - means[c]) / stds[c] } else { 0.0 })
        })
        .collect();
    (
        MeasureMatrix::from_rows(mm.columns().to_vec(), n, data),
        Normalization { means, stds },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Measure;

    fn single(values: &[f64]) -> MeasureMatrix {
        MeasureMatrix::from_columns(vec![Measure::Z], vec![values.to_vec()])
    }

    #[test]
    fn examples() {
        let (n, params) = normalize_columns(&single(&[2.0, 4.0, 6.0]));
        let col = n.column(0);
        assert!((col[0] + 1.224744871391589).abs() < 1e-12);
        assert_eq!(col[1], 0.0);
        assert!((col[2] - 1.224744871391589).abs() < 1e-12);
        assert_eq!(params.denormalize(&[col[2]]), vec![6.0]);

        let (n, _) = normalize_columns(&single(&[3.5, 3.5, 3.5]));
        assert_eq!(n.column(0), vec![0.0; 3]);
    }

    #[test]
    fn idempotent() {
        let (once, _) = normalize_columns(&single(&[1.0, 7.0, -3.0, 2.5, 0.25]));
        let (twice, _) = normalize_columns(&once);
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
