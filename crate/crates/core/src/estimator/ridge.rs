use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `y ≈ x·weights + intercept`.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl RidgeFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Minimizes `‖Xw + b − y‖² + λ‖w‖²` with the intercept unpenalized.
///
/// Solved on centered data via the normal equations (Cholesky) for λ > 0; for
/// λ = 0 the centered design must have full column rank.
pub fn fit_ridge(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<RidgeFit> {
    let (n, k) = x.shape();
    if n == 0 {
        return Err(Error::InsufficientData {
            what: "training rows",
            required: 1,
            actual: 0,
        });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    let y_mean = y.iter().sum::<f64>() / n as f64;
    if k == 0 {
        return Ok(RidgeFit {
            weights: Vec::new(),
            intercept: y_mean,
        });
    }
    let x_mean: Vec<f64> = (0..k).map(|j| x.column(j).mean()).collect();
    let mut xc = x.clone();
    for j in 0..k {
        xc.column_mut(j).add_scalar_mut(-x_mean[j]);
    }
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let xty = xc.transpose() * &yc;

    let w = if lambda > 0.0 {
        let mut gram = xc.transpose() * &xc;
        for i in 0..k {
            gram[(i, i)] += lambda;
        }
        gram.cholesky()
            .ok_or_else(|| Error::IllPosed("normal matrix not positive definite".into()))?
            .solve(&xty)
    } else {
        let svd = xc.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-12 * smax.max(f64::MIN_POSITIVE)).count();
        if rank < k {
            return Err(Error::IllPosed(format!(
                "lambda = 0 with rank {rank} < {k} columns"
            )));
        }
        svd.solve(&yc, 0.0).map_err(|e| Error::IllPosed(e.to_string()))?
    };

    let weights: Vec<f64> = w.iter().copied().collect();
    let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
    Ok(RidgeFit { weights, intercept })
}
