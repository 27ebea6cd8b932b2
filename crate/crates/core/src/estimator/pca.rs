use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Principal subspace of a feature matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaBasis {
    pub mean: Vec<f64>,
    /// `k × d`, orthonormal rows.
    pub components: DMatrix<f64>,
    /// Fraction of total variance carried by each kept component.
    pub explained_ratio: Vec<f64>,
}

impl PcaBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let centered = DVector::from_iterator(x.len(), x.iter().zip(&self.mean).map(|(a, m)| a - m));
        Ok((&self.components * centered).iter().copied().collect())
    }

    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let z = DVector::from_column_slice(scores);
        let back = self.components.transpose() * z;
        back.iter().zip(&self.mean).map(|(v, m)| v + m).collect()
    }
}

/// Fits PCA on the rows of `features` and keeps the fewest components whose
/// cumulative explained variance reaches `variance_target`, capped at `n - 1`.
pub fn fit_pca(features: &DMatrix<f64>, variance_target: f64) -> Result<PcaBasis> {
    let (n, d) = features.shape();
    if n < 2 {
        return Err(Error::InsufficientData {
            what: "rows for PCA",
            required: 2,
            actual: n,
        });
    }
    if !(variance_target > 0.0 && variance_target <= 1.0) {
        return Err(Error::invalid(format!("variance_target must be in (0, 1], got {variance_target}")));
    }
    let mean: Vec<f64> = (0..d).map(|j| features.column(j).mean()).collect();
    let mut centered = features.clone();
    for j in 0..d {
        centered.column_mut(j).add_scalar_mut(-mean[j]);
    }
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let variances: Vec<f64> = order.iter().map(|&i| svd.singular_values[i].powi(2)).collect();
    let total: f64 = variances.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Degenerate("feature rows have zero variance".into()));
    }

    let mut k = 0;
    let mut cumulative = 0.0;
    while k < variances.len() {
        cumulative += variances[k] / total;
        k += 1;
        if cumulative >= variance_target - 1e-12 {
            break;
        }
    }
    let k = k.min(n - 1).max(1);

    let mut components = DMatrix::zeros(k, d);
    for (row, &i) in order.iter().take(k).enumerate() {
        let mut v = v_t.row(i).clone_owned();
        // sign convention: largest-magnitude entry positive
        let pivot = v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
        if pivot < 0.0 {
            v.neg_mut();
        }
        components.set_row(row, &v);
    }
    let explained_ratio = variances.iter().take(k).map(|v| v / total).collect();
    Ok(PcaBasis {
        mean,
        components,
        explained_ratio,
    })
}
