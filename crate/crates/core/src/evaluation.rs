//! Weight-change error metrics and the synthetic study grid.
//!
//! Every study cell is run over a set of selection seeds. For each seed the
//! same per-location train/test split is shared by every variant in the cell,
//! training rows are removed from the evaluation pool, and the absolute error
//! of every cross-class pair within a location is pooled.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dsp::{featurize_record, FeatureExtractor, OnsetParams, WindowParams};
use crate::error::{Error, Result};
use crate::estimator::{fit_model, select_training, EstimatorParams, FeatureExpansion, LocationModel, TrainingSelection, GLOBAL_LOCATION};
use crate::seed;
use crate::simulator::{generate_dataset, LoadSite, ManifestEntry, SimulationSetup, VibrationRecord};

/// True changes at least this large count toward the large-change score.
pub const LARGE_CHANGE_G: f64 = 100.0;
/// A large change is "resolved" when its error is within this bound and its sign is right.
pub const LARGE_CHANGE_TOLERANCE_G: f64 = 50.0;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSample {
    pub id: String,
    pub location_id: u32,
    pub weight_g: f64,
    /// Magnitudes per shelf sensor, ascending sensor id.
    pub by_sensor: Vec<(u32, Vec<f64>)>,
}

impl FeatureSample {
    /// Concatenation of the requested sensors' features in ascending id order.
    pub fn row(&self, sensors: &[u32]) -> Result<Vec<f64>> {
        let mut ids = sensors.to_vec();
        ids.sort_unstable();
        let mut out = Vec::new();
        for id in ids {
            let (_, f) = self
                .by_sensor
                .iter()
                .find(|(s, _)| *s == id)
                .ok_or_else(|| Error::invalid(format!("sample {} has no sensor {id}", self.id)))?;
            out.extend_from_slice(f);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineParams {
    pub onset: OnsetParams,
    pub window: WindowParams,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureDataset {
    pub samples: Vec<FeatureSample>,
}

impl FeatureDataset {
    /// Adds the first impulse window of `record` as one sample.
    pub fn push_record(
        &mut self,
        entry: &ManifestEntry,
        record: &VibrationRecord,
        extractor: &FeatureExtractor,
        pipeline: &PipelineParams,
    ) -> Result<()> {
        let windows = featurize_record(record, extractor, &pipeline.onset, &pipeline.window)?;
        let first = windows
            .into_iter()
            .next()
            .ok_or_else(|| Error::Degenerate(format!("no complete impulse window in {}", entry.id)))?;
        let mut by_sensor: Vec<(u32, Vec<f64>)> = first.by_sensor.into_iter().map(|(id, f)| (id, f.magnitudes)).collect();
        by_sensor.sort_by_key(|(id, _)| *id);
        self.samples.push(FeatureSample {
            id: entry.id.clone(),
            location_id: entry.location_id,
            weight_g: entry.weight_g,
            by_sensor,
        });
        Ok(())
    }

    pub fn locations(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.samples.iter().map(|s| s.location_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn sensors(&self) -> Vec<u32> {
        self.samples
            .first()
            .map(|s| s.by_sensor.iter().map(|(id, _)| *id).collect())
            .unwrap_or_default()
    }

    pub fn at_location(&self, location_id: u32) -> Vec<usize> {
        (0..self.samples.len()).filter(|&i| self.samples[i].location_id == location_id).collect()
    }
}

/// Simulates a dataset and featurizes it in memory.
pub fn simulate_features(
    setup: &SimulationSetup,
    sites: &[LoadSite],
    weights_g: &[f64],
    samples_per_class: u32,
    master_seed: u64,
    pipeline: &PipelineParams,
) -> Result<FeatureDataset> {
    let extractor = FeatureExtractor::new(setup.acquisition.sampling_rate_hz);
    let mut ds = FeatureDataset::default();
    generate_dataset(setup, sites, weights_g, samples_per_class, master_seed, |entry, record| {
        ds.push_record(entry, &record, &extractor, pipeline)
    })?;
    Ok(ds)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Accumulator {
    n: usize,
    sum: f64,
    sum_sq: f64,
    large: usize,
    large_ok: usize,
}

impl Accumulator {
    fn add(&mut self, true_change: f64, predicted_change: f64) {
        let err = (predicted_change - true_change).abs();
        self.n += 1;
        self.sum += err;
        self.sum_sq += err * err;
        if true_change.abs() >= LARGE_CHANGE_G {
            self.large += 1;
            if predicted_change.signum() == true_change.signum() && err <= LARGE_CHANGE_TOLERANCE_G {
                self.large_ok += 1;
            }
        }
    }

    fn mae(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.sum / self.n as f64
    }

    fn std(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let m = self.mae();
        (self.sum_sq / self.n as f64 - m * m).max(0.0).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupError {
    /// Location id or absolute true change in grams, depending on the breakdown.
    pub key: f64,
    pub mae_g: f64,
    pub std_g: f64,
    pub n_pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChangeMetrics {
    pub mae_g: f64,
    /// Standard deviation of the absolute error.
    pub std_g: f64,
    pub n_pairs: usize,
    /// Share of changes with |true| ≥ 100 g resolved with the right sign within ±50 g.
    pub large_change_resolved: f64,
    pub large_change_pairs: usize,
    pub by_location: Vec<GroupError>,
    pub by_magnitude: Vec<GroupError>,
}

/// Pools pair errors across locations and seeds.
#[derive(Clone, Debug, Default)]
pub struct ChangeErrors {
    pooled: Accumulator,
    by_location: BTreeMap<u32, Accumulator>,
    by_magnitude: BTreeMap<u64, Accumulator>,
}

impl ChangeErrors {
    /// Adds every pair `i < j` with different true weights.
    ///
    /// Only one orientation per pair is kept: the reversed pair has the
    /// negated signed error and the same absolute error.
    pub fn add_location(&mut self, location_id: u32, truth_g: &[f64], predicted_g: &[f64]) {
        debug_assert_eq!(truth_g.len(), predicted_g.len());
        let loc = self.by_location.entry(location_id).or_default();
        for i in 0..truth_g.len() {
            for j in i + 1..truth_g.len() {
                let mut dt = truth_g[j] - truth_g[i];
                let mut dp = predicted_g[j] - predicted_g[i];
                if seed::weight_key(truth_g[i]) == seed::weight_key(truth_g[j]) {
                    continue;
                }
                if dt < 0.0 {
                    dt = -dt;
                    dp = -dp;
                }
                self.pooled.add(dt, dp);
                loc.add(dt, dp);
                self.by_magnitude.entry(seed::weight_key(dt)).or_default().add(dt, dp);
            }
        }
    }

    pub fn finish(&self) -> ChangeMetrics {
        let group = |key: f64, a: &Accumulator| GroupError {
            key,
            mae_g: a.mae(),
            std_g: a.std(),
            n_pairs: a.n,
        };
        ChangeMetrics {
            mae_g: self.pooled.mae(),
            std_g: self.pooled.std(),
            n_pairs: self.pooled.n,
            large_change_resolved: if self.pooled.large == 0 {
                1.0
            } else {
                self.pooled.large_ok as f64 / self.pooled.large as f64
            },
            large_change_pairs: self.pooled.large,
            by_location: self.by_location.iter().map(|(k, a)| group(*k as f64, a)).collect(),
            by_magnitude: self.by_magnitude.iter().map(|(k, a)| group(*k as f64 / 1000.0, a)).collect(),
        }
    }
}

/// Predicts every sample with its location's model and accumulates pair errors.
pub fn accumulate_change_errors(
    errors: &mut ChangeErrors,
    models: &BTreeMap<u32, LocationModel>,
    ds: &FeatureDataset,
    test: &[usize],
) -> Result<()> {
    let mut by_loc: BTreeMap<u32, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &i in test {
        let s = &ds.samples[i];
        let model = models.get(&s.location_id).ok_or(Error::MissingModel(s.location_id))?;
        let pred = model.predict_raw(&s.row(&model.sensors)?)?;
        let e = by_loc.entry(s.location_id).or_default();
        e.0.push(s.weight_g);
        e.1.push(pred);
    }
    for (loc, (truth, pred)) in by_loc {
        errors.add_location(loc, &truth, &pred);
    }
    Ok(())
}

pub fn evaluate_weight_change(
    models: &BTreeMap<u32, LocationModel>,
    ds: &FeatureDataset,
    test: &[usize],
) -> Result<ChangeMetrics> {
    let mut errors = ChangeErrors::default();
    accumulate_change_errors(&mut errors, models, ds, test)?;
    Ok(errors.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    PerLocationLinear,
    GlobalLinear,
    /// Degree-2 ridge on the PCA scores; stand-in nonlinear baseline.
    PerLocationQuadratic,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 3] = [
        ModelVariant::PerLocationLinear,
        ModelVariant::GlobalLinear,
        ModelVariant::PerLocationQuadratic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::PerLocationLinear => "per-location-linear",
            ModelVariant::GlobalLinear => "global-linear",
            ModelVariant::PerLocationQuadratic => "per-location-quadratic",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-location stratified split; every location draws from its own seed.
pub fn split_dataset(ds: &FeatureDataset, selection: &TrainingSelection, split_seed: u64) -> Result<Split> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for loc in ds.locations() {
        let idx = ds.at_location(loc);
        let labels: Vec<f64> = idx.iter().map(|&i| ds.samples[i].weight_g).collect();
        let picked = select_training(&labels, selection, seed::derive(split_seed, "split", &[loc as u64]))?;
        let mut is_train = vec![false; idx.len()];
        for p in picked {
            is_train[p] = true;
        }
        for (k, &i) in idx.iter().enumerate() {
            if is_train[k] {
                train.push(i);
            } else {
                test.push(i);
            }
        }
    }
    Ok(Split { train, test })
}

/// Fits one model per location (or one shared model) on the training rows.
pub fn train_models(
    ds: &FeatureDataset,
    train: &[usize],
    sensors: &[u32],
    variant: ModelVariant,
    params: &EstimatorParams,
) -> Result<BTreeMap<u32, LocationModel>> {
    let mut sensors = sensors.to_vec();
    sensors.sort_unstable();
    let params = EstimatorParams {
        expansion: match variant {
            ModelVariant::PerLocationQuadratic => FeatureExpansion::Quadratic,
            _ => FeatureExpansion::Linear,
        },
        ..*params
    };
    let fit = |loc: u32, rows: &[usize]| -> Result<LocationModel> {
        let data: Vec<Vec<f64>> = rows.iter().map(|&i| ds.samples[i].row(&sensors)).collect::<Result<_>>()?;
        let refs: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let labels: Vec<f64> = rows.iter().map(|&i| ds.samples[i].weight_g).collect();
        fit_model(loc, sensors.clone(), &refs, &labels, &params)
    };

    let mut models = BTreeMap::new();
    match variant {
        ModelVariant::GlobalLinear => {
            let shared = fit(GLOBAL_LOCATION, train)?;
            for loc in ds.locations() {
                models.insert(loc, shared.clone());
            }
        }
        _ => {
            for loc in ds.locations() {
                let rows: Vec<usize> = train.iter().copied().filter(|&i| ds.samples[i].location_id == loc).collect();
                models.insert(loc, fit(loc, &rows)?);
            }
        }
    }
    Ok(models)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenseLayoutConfig {
    /// Heaviest total load; the ladder steps down from it.
    pub full_load_g: f64,
    pub item_g: f64,
    pub items: u32,
    pub train_classes_g: Vec<f64>,
}

impl Default for DenseLayoutConfig {
    fn default() -> Self {
        DenseLayoutConfig {
            full_load_g: 3302.0,
            item_g: 61.0,
            items: 5,
            train_classes_g: vec![2997.0, 3180.0, 3302.0],
        }
    }
}

impl DenseLayoutConfig {
    pub fn ladder(&self) -> Vec<f64> {
        (0..=self.items).rev().map(|j| self.full_load_g - self.item_g * j as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub seeds: u32,
    /// Selection used by the ablation, the sensor study and the fraction sweep's class set.
    pub selection: TrainingSelection,
    /// Sensors used by every study except the sensor study.
    pub sensors: Vec<u32>,
    pub span_partners_g: Vec<f64>,
    pub span_base_g: f64,
    pub class_sets_g: Vec<Vec<f64>>,
    pub fractions: Vec<f64>,
    pub sensor_sets: Vec<Vec<u32>>,
    pub dense: DenseLayoutConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            seeds: 10,
            selection: TrainingSelection::default(),
            sensors: vec![1],
            span_partners_g: (2..=10).map(|k| k as f64 * 50.0).collect(),
            span_base_g: 50.0,
            class_sets_g: vec![vec![50.0, 500.0], vec![50.0, 300.0, 500.0], vec![50.0, 200.0, 350.0, 500.0]],
            fractions: vec![0.10, 0.25, 0.50, 1.0],
            sensor_sets: vec![vec![1], vec![2], vec![3], vec![1, 3], vec![1, 2, 3]],
            dense: DenseLayoutConfig::default(),
        }
    }
}

impl StudyConfig {
    pub fn validate(&self, available_sensors: &[u32]) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::invalid("study needs at least one seed"));
        }
        if self.span_partners_g.is_empty()
            || self.class_sets_g.is_empty()
            || self.fractions.is_empty()
            || self.sensor_sets.is_empty()
        {
            return Err(Error::invalid("study grids must be nonempty"));
        }
        for s in self.sensor_sets.iter().flatten().chain(&self.sensors) {
            if !available_sensors.contains(s) {
                return Err(Error::invalid(format!("sensor {s} not in dataset")));
            }
        }
        Ok(())
    }

    pub fn seed_values(&self, master_seed: u64) -> Vec<u64> {
        (0..self.seeds as u64).map(|i| seed::derive(master_seed, "study-seed", &[i])).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Ablation,
    DataEfficiency,
    Sensor,
    DenseLayout,
}

impl Study {
    pub const ALL: [Study; 4] = [Study::Ablation, Study::DataEfficiency, Study::Sensor, Study::DenseLayout];

    pub fn name(self) -> &'static str {
        match self {
            Study::Ablation => "ablation",
            Study::DataEfficiency => "data-efficiency",
            Study::Sensor => "sensor",
            Study::DenseLayout => "dense-layout",
        }
    }

    pub fn parse(s: &str) -> Result<Study> {
        Study::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown study '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub study: String,
    pub cell: String,
    pub variant: String,
    pub params: String,
    pub metrics: ChangeMetrics,
    pub seeds: u32,
}

fn grams_list(ws: &[f64]) -> String {
    ws.iter().map(|w| format!("{w}")).collect::<Vec<_>>().join("+")
}

fn sensor_list(ss: &[u32]) -> String {
    ss.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("+")
}

struct Cell<'a> {
    name: String,
    params: String,
    selection: TrainingSelection,
    sensors: Vec<u32>,
    variants: &'a [ModelVariant],
}

fn run_cell(
    study: Study,
    cell: &Cell,
    ds: &FeatureDataset,
    seeds: &[u64],
    estimator: &EstimatorParams,
) -> Result<Vec<StudyRow>> {
    let mut errors = vec![ChangeErrors::default(); cell.variants.len()];
    for &s in seeds {
        let split = split_dataset(ds, &cell.selection, s)?;
        for (v, &variant) in cell.variants.iter().enumerate() {
            let models = train_models(ds, &split.train, &cell.sensors, variant, estimator)?;
            accumulate_change_errors(&mut errors[v], &models, ds, &split.test)?;
        }
    }
    Ok(cell
        .variants
        .iter()
        .zip(errors)
        .map(|(variant, e)| StudyRow {
            study: study.name().to_string(),
            cell: cell.name.clone(),
            variant: variant.name().to_string(),
            params: cell.params.clone(),
            metrics: e.finish(),
            seeds: seeds.len() as u32,
        })
        .collect())
}

fn selection_params(sel: &TrainingSelection, sensors: &[u32]) -> String {
    let classes = sel.classes_g.as_deref().map_or_else(|| "all".to_string(), grams_list);
    format!("classes={classes};fraction={};sensors={}", sel.fraction, sensor_list(sensors))
}

const LINEAR: &[ModelVariant] = &[ModelVariant::PerLocationLinear];

/// Per-location linear vs. global linear vs. quadratic on identical splits.
pub fn run_ablation_study(ds: &FeatureDataset, cfg: &StudyConfig, estimator: &EstimatorParams, master_seed: u64) -> Result<Vec<StudyRow>> {
    cfg.validate(&ds.sensors())?;
    let cell = Cell {
        name: "variants".into(),
        params: selection_params(&cfg.selection, &cfg.sensors),
        selection: cfg.selection.clone(),
        sensors: cfg.sensors.clone(),
        variants: &ModelVariant::ALL,
    };
    run_cell(Study::Ablation, &cell, ds, &cfg.seed_values(master_seed), estimator)
}

/// Training-span, class-count and fraction sweeps.
pub fn run_data_efficiency_study(
    ds: &FeatureDataset,
    cfg: &StudyConfig,
    estimator: &EstimatorParams,
    master_seed: u64,
) -> Result<Vec<StudyRow>> {
    cfg.validate(&ds.sensors())?;
    let seeds = cfg.seed_values(master_seed);
    let fraction = cfg.selection.fraction;
    let mut cells = Vec::new();
    for &w in &cfg.span_partners_g {
        let sel = TrainingSelection {
            classes_g: Some(vec![cfg.span_base_g, w]),
            fraction,
        };
        cells.push(("span", sel));
    }
    for set in &cfg.class_sets_g {
        cells.push((
            "class-count",
            TrainingSelection {
                classes_g: Some(set.clone()),
                fraction,
            },
        ));
    }
    for &f in &cfg.fractions {
        cells.push((
            "fraction",
            TrainingSelection {
                classes_g: cfg.selection.classes_g.clone(),
                fraction: f,
            },
        ));
    }
    let mut rows = Vec::new();
    for (name, selection) in cells {
        let cell = Cell {
            name: name.into(),
            params: selection_params(&selection, &cfg.sensors),
            selection,
            sensors: cfg.sensors.clone(),
            variants: LINEAR,
        };
        rows.extend(run_cell(Study::DataEfficiency, &cell, ds, &seeds, estimator)?);
    }
    Ok(rows)
}

/// Single sensors and concatenated combinations.
pub fn run_sensor_study(ds: &FeatureDataset, cfg: &StudyConfig, estimator: &EstimatorParams, master_seed: u64) -> Result<Vec<StudyRow>> {
    let available = ds.sensors();
    if available.len() < 2 {
        return Err(Error::InsufficientData {
            what: "shelf sensors",
            required: 2,
            actual: available.len(),
        });
    }
    cfg.validate(&available)?;
    let seeds = cfg.seed_values(master_seed);
    let mut rows = Vec::new();
    for set in &cfg.sensor_sets {
        let cell = Cell {
            name: format!("sensors={}", sensor_list(set)),
            params: selection_params(&cfg.selection, set),
            selection: cfg.selection.clone(),
            sensors: set.clone(),
            variants: LINEAR,
        };
        rows.extend(run_cell(Study::Sensor, &cell, ds, &seeds, estimator)?);
    }
    Ok(rows)
}

/// Heavy base load with small per-item steps; needs its own simulated ladder.
pub fn run_dense_layout_study(
    ds: &FeatureDataset,
    cfg: &StudyConfig,
    estimator: &EstimatorParams,
    master_seed: u64,
) -> Result<Vec<StudyRow>> {
    cfg.validate(&ds.sensors())?;
    let selection = TrainingSelection {
        classes_g: Some(cfg.dense.train_classes_g.clone()),
        fraction: cfg.selection.fraction,
    };
    let cell = Cell {
        name: format!("ladder={}", grams_list(&cfg.dense.ladder())),
        params: selection_params(&selection, &cfg.sensors),
        selection,
        sensors: cfg.sensors.clone(),
        variants: LINEAR,
    };
    run_cell(Study::DenseLayout, &cell, ds, &cfg.seed_values(master_seed), estimator)
}

/// Renders rows as a tab-separated table with a header line.
pub fn write_table<W: std::io::Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(out);
    w.write_record(["study", "cell", "variant", "params", "mae_g", "std_g", "n_pairs", "seeds"])?;
    for r in rows {
        w.write_record([
            r.study.clone(),
            r.cell.clone(),
            r.variant.clone(),
            r.params.clone(),
            format!("{:.6}", r.metrics.mae_g),
            format!("{:.6}", r.metrics.std_g),
            r.metrics.n_pairs.to_string(),
            r.seeds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<table>", e))?;
    Ok(())
}
