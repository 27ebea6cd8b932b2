//! Per-location weight regression: PCA on spectral magnitudes, standardized
//! scores, ridge regression.

mod pca;
mod ridge;

pub use pca::{fit_pca, PcaBasis};
pub use ridge::{fit_ridge, RidgeFit};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dsp::FeatureVector;
use crate::error::{Error, Result};
use crate::seed;

/// Location id carried by a model trained on pooled locations.
pub const GLOBAL_LOCATION: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FeatureExpansion {
    #[default]
    Linear,
    /// Appends the square of every standardized score.
    Quadratic,
}

impl FeatureExpansion {
    fn expand(self, z: &[f64]) -> Vec<f64> {
        match self {
            FeatureExpansion::Linear => z.to_vec(),
            FeatureExpansion::Quadratic => z.iter().copied().chain(z.iter().map(|v| v * v)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorParams {
    pub lambda: f64,
    pub variance_target: f64,
    pub expansion: FeatureExpansion,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        EstimatorParams {
            lambda: 0.1,
            variance_target: 0.95,
            expansion: FeatureExpansion::Linear,
        }
    }
}

/// Which weight classes to learn from and how much of each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSelection {
    /// `None` means every class present in the data.
    pub classes_g: Option<Vec<f64>>,
    pub fraction: f64,
}

impl Default for TrainingSelection {
    fn default() -> Self {
        TrainingSelection {
            classes_g: Some(vec![50.0, 300.0, 500.0]),
            fraction: 0.10,
        }
    }
}

impl TrainingSelection {
    /// `max(1, round(fraction · available))`, never more than available.
    pub fn per_class(&self, available: usize) -> usize {
        let n = (self.fraction * available as f64).round() as usize;
        n.max(1).min(available)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocationModel {
    pub location_id: u32,
    /// Sensor ids whose features are concatenated, ascending.
    pub sensors: Vec<u32>,
    pub params: EstimatorParams,
    pub pca: PcaBasis,
    pub score_mean: Vec<f64>,
    pub score_scale: Vec<f64>,
    pub ridge: RidgeFit,
    pub trained_classes_g: Vec<f64>,
    pub training_rows: usize,
}

impl LocationModel {
    pub fn input_dim(&self) -> usize {
        self.pca.dim()
    }

    fn design_row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let scores = self.pca.project(x)?;
        let z: Vec<f64> = scores
            .iter()
            .zip(&self.score_mean)
            .zip(&self.score_scale)
            .map(|((s, m), sd)| (s - m) / sd)
            .collect();
        Ok(self.params.expansion.expand(&z))
    }

    /// Grams for an already-concatenated feature row.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        Ok(self.ridge.predict(&self.design_row(x)?))
    }
}

/// Fits the PCA→standardize→ridge chain on the given rows.
pub fn fit_model(
    location_id: u32,
    sensors: Vec<u32>,
    rows: &[&[f64]],
    labels_g: &[f64],
    params: &EstimatorParams,
) -> Result<LocationModel> {
    if rows.len() != labels_g.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            actual: labels_g.len(),
        });
    }
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    let mut classes: Vec<f64> = labels_g.to_vec();
    classes.sort_by(f64::total_cmp);
    classes.dedup_by_key(|w| seed::weight_key(*w));
    if classes.len() < 2 {
        return Err(Error::InsufficientData {
            what: "distinct weight classes",
            required: 2,
            actual: classes.len(),
        });
    }

    let x = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let pca = fit_pca(&x, params.variance_target)?;
    let k = pca.k();
    let scores: Vec<Vec<f64>> = rows.iter().map(|r| pca.project(r)).collect::<Result<_>>()?;
    let mut score_mean = vec![0.0; k];
    let mut score_scale = vec![0.0; k];
    for j in 0..k {
        let mean = scores.iter().map(|s| s[j]).sum::<f64>() / n as f64;
        let var = scores.iter().map(|s| (s[j] - mean).powi(2)).sum::<f64>() / n as f64;
        score_mean[j] = mean;
        score_scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
    }

    let design: Vec<Vec<f64>> = scores
        .iter()
        .map(|s| {
            let z: Vec<f64> = (0..k).map(|j| (s[j] - score_mean[j]) / score_scale[j]).collect();
            params.expansion.expand(&z)
        })
        .collect();
    let cols = design[0].len();
    let xd = DMatrix::from_fn(n, cols, |i, j| design[i][j]);
    let ridge = fit_ridge(&xd, labels_g, params.lambda)?;

    Ok(LocationModel {
        location_id,
        sensors,
        params: *params,
        pca,
        score_mean,
        score_scale,
        ridge,
        trained_classes_g: classes,
        training_rows: n,
    })
}

/// Seeded, stratified pick of training rows. Returns indices into `labels_g`.
pub fn select_training(labels_g: &[f64], selection: &TrainingSelection, master_seed: u64) -> Result<Vec<usize>> {
    if !(selection.fraction > 0.0 && selection.fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "training fraction must be in (0, 1], got {}",
            selection.fraction
        )));
    }
    let classes: Vec<f64> = match &selection.classes_g {
        Some(c) => c.clone(),
        None => {
            let mut all = labels_g.to_vec();
            all.sort_by(f64::total_cmp);
            all.dedup_by_key(|w| seed::weight_key(*w));
            all
        }
    };
    let mut picked = Vec::new();
    for &class in &classes {
        let key = seed::weight_key(class);
        let mut members: Vec<usize> = (0..labels_g.len()).filter(|&i| seed::weight_key(labels_g[i]) == key).collect();
        if members.is_empty() {
            return Err(Error::invalid(format!("weight class {class} g has no samples")));
        }
        let take = selection.per_class(members.len());
        let mut rng = seed::rng(seed::derive(master_seed, "train-select", &[key]));
        members.shuffle(&mut rng);
        members.truncate(take);
        members.sort_unstable();
        picked.extend(members);
    }
    Ok(picked)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub grams: f64,
    pub location_id: u32,
    pub sample: Option<String>,
}

/// Estimates the load behind a single-sensor feature vector.
pub fn predict_weight(model: &LocationModel, feature: &FeatureVector) -> Result<WeightEstimate> {
    if model.sensors.len() != 1 {
        return Err(Error::invalid(format!(
            "model expects {} concatenated sensors; use predict_raw",
            model.sensors.len()
        )));
    }
    Ok(WeightEstimate {
        grams: model.predict_raw(&feature.magnitudes)?,
        location_id: model.location_id,
        sample: None,
    })
}

/// Estimates the load behind an already-concatenated multi-sensor row.
pub fn predict_weight_row(model: &LocationModel, row: &[f64]) -> Result<WeightEstimate> {
    Ok(WeightEstimate {
        grams: model.predict_raw(row)?,
        location_id: model.location_id,
        sample: None,
    })
}

/// Signed change `after − before`; both estimates must come from the same location.
pub fn weight_change(before: &WeightEstimate, after: &WeightEstimate) -> Result<f64> {
    if before.location_id != after.location_id {
        return Err(Error::LocationMismatch {
            before: before.location_id,
            after: after.location_id,
        });
    }
    Ok(after.grams - before.grams)
}
