//! Model files: one or more location models in the key/value text format.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{EstimatorParams, FeatureExpansion, LocationModel, PcaBasis, RidgeFit};
use crate::io::kv::KvDoc;

const FORMAT: &str = "vibeweight-model";
const VERSION: f64 = 1.0;

fn as_u32(v: f64, what: &str) -> Result<u32> {
    if v >= 0.0 && v <= u32::MAX as f64 && v.fract() == 0.0 {
        Ok(v as u32)
    } else {
        Err(Error::Format {
            line: 0,
            message: format!("{what} must be a non-negative integer, got {v}"),
        })
    }
}

fn put_model(doc: &mut KvDoc, p: &str, m: &LocationModel) {
    doc.num(&format!("{p}.location_id"), m.location_id as f64);
    doc.vector(&format!("{p}.sensors"), &m.sensors.iter().map(|&s| s as f64).collect::<Vec<_>>());
    doc.text(
        &format!("{p}.expansion"),
        match m.params.expansion {
            FeatureExpansion::Linear => "linear",
            FeatureExpansion::Quadratic => "quadratic",
        },
    );
    doc.num(&format!("{p}.lambda"), m.params.lambda);
    doc.num(&format!("{p}.variance_target"), m.params.variance_target);
    doc.num(&format!("{p}.training_rows"), m.training_rows as f64);
    doc.vector(&format!("{p}.trained_classes_g"), &m.trained_classes_g);
    doc.vector(&format!("{p}.pca.mean"), &m.pca.mean);
    doc.matrix(&format!("{p}.pca.components"), &m.pca.components);
    doc.vector(&format!("{p}.pca.explained_ratio"), &m.pca.explained_ratio);
    doc.vector(&format!("{p}.score.mean"), &m.score_mean);
    doc.vector(&format!("{p}.score.scale"), &m.score_scale);
    doc.vector(&format!("{p}.ridge.weights"), &m.ridge.weights);
    doc.num(&format!("{p}.ridge.intercept"), m.ridge.intercept);
}

fn get_model(doc: &KvDoc, p: &str) -> Result<LocationModel> {
    let k = |s: &str| format!("{p}.{s}");
    let expansion = match doc.get_text(&k("expansion"))? {
        "linear" => FeatureExpansion::Linear,
        "quadratic" => FeatureExpansion::Quadratic,
        other => {
            return Err(Error::Format {
                line: 0,
                message: format!("unknown expansion '{other}'"),
            })
        }
    };
    let model = LocationModel {
        location_id: as_u32(doc.get_num(&k("location_id"))?, "location_id")?,
        sensors: doc
            .get_vector(&k("sensors"))?
            .iter()
            .map(|&s| as_u32(s, "sensor id"))
            .collect::<Result<_>>()?,
        params: EstimatorParams {
            lambda: doc.get_num(&k("lambda"))?,
            variance_target: doc.get_num(&k("variance_target"))?,
            expansion,
        },
        pca: PcaBasis {
            mean: doc.get_vector(&k("pca.mean"))?.to_vec(),
            components: doc.get_matrix(&k("pca.components"))?.clone(),
            explained_ratio: doc.get_vector(&k("pca.explained_ratio"))?.to_vec(),
        },
        score_mean: doc.get_vector(&k("score.mean"))?.to_vec(),
        score_scale: doc.get_vector(&k("score.scale"))?.to_vec(),
        ridge: RidgeFit {
            weights: doc.get_vector(&k("ridge.weights"))?.to_vec(),
            intercept: doc.get_num(&k("ridge.intercept"))?,
        },
        trained_classes_g: doc.get_vector(&k("trained_classes_g"))?.to_vec(),
        training_rows: as_u32(doc.get_num(&k("training_rows"))?, "training_rows")? as usize,
    };
    let kdim = model.pca.k();
    let expanded = match expansion {
        FeatureExpansion::Linear => kdim,
        FeatureExpansion::Quadratic => 2 * kdim,
    };
    let consistent = model.pca.components.ncols() == model.pca.mean.len()
        && model.score_mean.len() == kdim
        && model.score_scale.len() == kdim
        && model.ridge.weights.len() == expanded;
    if !consistent {
        return Err(Error::Format {
            line: 0,
            message: format!("model '{p}' has inconsistent dimensions"),
        });
    }
    Ok(model)
}

/// Models keyed by location id.
pub fn render_models(models: &BTreeMap<u32, LocationModel>) -> String {
    let mut doc = KvDoc::new();
    doc.text("format", FORMAT);
    doc.num("version", VERSION);
    doc.vector("locations", &models.keys().map(|&k| k as f64).collect::<Vec<_>>());
    for (loc, m) in models {
        put_model(&mut doc, &format!("model.{loc}"), m);
    }
    doc.render()
}

pub fn parse_models(text: &str) -> Result<BTreeMap<u32, LocationModel>> {
    let doc = KvDoc::parse(text)?;
    if doc.get_text("format")? != FORMAT || doc.get_num("version")? != VERSION {
        return Err(Error::Format {
            line: 1,
            message: format!("not a {FORMAT} v{VERSION} file"),
        });
    }
    let mut out = BTreeMap::new();
    for &loc in doc.get_vector("locations")? {
        let loc = as_u32(loc, "location")?;
        out.insert(loc, get_model(&doc, &format!("model.{loc}"))?);
    }
    Ok(out)
}

pub fn save_models(path: &Path, models: &BTreeMap<u32, LocationModel>) -> Result<()> {
    std::fs::write(path, render_models(models)).map_err(|e| Error::io(path, e))
}

pub fn load_models(path: &Path) -> Result<BTreeMap<u32, LocationModel>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_models(&text)
}
