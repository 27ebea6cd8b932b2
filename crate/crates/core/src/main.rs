use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vibeweight::estimator::{predict_weight_row, weight_change, LocationModel, WeightEstimate};
use vibeweight::evaluation::{
    evaluate_weight_change, run_ablation_study, run_data_efficiency_study, run_dense_layout_study, run_sensor_study,
    simulate_features, split_dataset, train_models, write_table, FeatureDataset, ModelVariant, Study, StudyRow,
};
use vibeweight::io::config::RunConfig;
use vibeweight::io::container::DatasetContainer;
use vibeweight::io::kv::KvDoc;
use vibeweight::io::model::{load_models, save_models};
use vibeweight::{seed, Error, Result};

#[derive(Parser)]
#[command(name = "vibeweight", version, about = "Shelf weight-change estimation from vibration spectra")]
struct Cli {
    /// TOML config path, or "default" for built-in values.
    #[arg(long, global = true, default_value = "default")]
    config: String,
    /// Overrides the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a dataset directory.
    Simulate {
        #[arg(long)]
        out: PathBuf,
    },
    /// Write per-sample feature vectors as a TSV table.
    Featurize {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit per-location models on the configured training selection.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated sensor ids; defaults to the study sensors.
        #[arg(long, value_delimiter = ',')]
        sensors: Option<Vec<u32>>,
    },
    /// Estimate the load of one sample.
    Predict {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        sample: String,
        /// Model to use; defaults to the sample's own location.
        #[arg(long)]
        location: Option<u32>,
    },
    /// Signed weight change between two samples, in grams.
    Change {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        before: String,
        #[arg(long)]
        after: String,
        #[arg(long)]
        location: Option<u32>,
    },
    /// Run studies and write result tables plus a summary.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// ablation, data-efficiency, sensor, dense-layout or all.
        #[arg(long, default_value = "all")]
        study: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    match cli.command {
        Command::Simulate { out } => {
            let c = DatasetContainer::create(&out, &cfg.setup, &cfg.dataset, cfg.seed)?;
            println!("wrote {} records to {}", c.manifest.entries.len(), out.display());
        }
        Command::Featurize { dataset, out } => featurize(&cfg, &dataset, &out)?,
        Command::Train { dataset, out, sensors } => {
            let sensors = sensors.unwrap_or_else(|| cfg.study.sensors.clone());
            train(&cfg, &dataset, &out, &sensors)?
        }
        Command::Predict {
            dataset,
            model,
            sample,
            location,
        } => {
            let c = DatasetContainer::open(&dataset)?;
            let models = load_models(&model)?;
            let est = estimate(&c, &cfg, &models, &sample, location)?;
            println!("{:.3}", est.grams);
        }
        Command::Change {
            dataset,
            model,
            before,
            after,
            location,
        } => {
            let c = DatasetContainer::open(&dataset)?;
            let models = load_models(&model)?;
            let b = estimate(&c, &cfg, &models, &before, location)?;
            let a = estimate(&c, &cfg, &models, &after, location)?;
            println!("{:.3}", weight_change(&b, &a)?);
        }
        Command::Evaluate { dataset, out, study } => evaluate(&cfg, &dataset, &out, &study)?,
    }
    Ok(())
}

fn featurize(cfg: &RunConfig, dataset: &Path, out: &Path) -> Result<()> {
    let ds = DatasetContainer::open(dataset)?.features(&cfg.pipeline)?;
    let file = std::fs::File::create(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(file);
    let mut header = vec!["id".to_string(), "location_id".into(), "weight_g".into(), "sensor_id".into()];
    header.extend((vibeweight::dsp::BAND_START_HZ..=vibeweight::dsp::BAND_END_HZ).map(|f| format!("hz_{f}")));
    w.write_record(&header)?;
    for s in &ds.samples {
        for (sensor, mags) in &s.by_sensor {
            let mut row = vec![s.id.clone(), s.location_id.to_string(), format!("{:?}", s.weight_g), sensor.to_string()];
            row.extend(mags.iter().map(|m| format!("{m:?}")));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    println!("wrote {} samples to {}", ds.samples.len(), out.display());
    Ok(())
}

fn train(cfg: &RunConfig, dataset: &Path, out: &Path, sensors: &[u32]) -> Result<()> {
    let ds = DatasetContainer::open(dataset)?.features(&cfg.pipeline)?;
    let split = split_dataset(&ds, &cfg.training, seed::derive(cfg.seed, "train", &[]))?;
    let models = train_models(&ds, &split.train, sensors, ModelVariant::PerLocationLinear, &cfg.estimator)?;
    save_models(out, &models)?;
    let m = evaluate_weight_change(&models, &ds, &split.test)?;
    println!(
        "trained {} location models on {} rows; held-out change MAE {:.3} g (std {:.3} g, {} pairs)",
        models.len(),
        split.train.len(),
        m.mae_g,
        m.std_g,
        m.n_pairs
    );
    Ok(())
}

fn estimate(
    c: &DatasetContainer,
    cfg: &RunConfig,
    models: &BTreeMap<u32, LocationModel>,
    id: &str,
    location: Option<u32>,
) -> Result<WeightEstimate> {
    let entry = c
        .manifest
        .entry(id)
        .ok_or_else(|| Error::InvalidParameter(format!("no sample '{id}' in dataset")))?;
    let loc = location.unwrap_or(entry.location_id);
    let model = models.get(&loc).ok_or(Error::MissingModel(loc))?;
    let mut one = FeatureDataset::default();
    let extractor = vibeweight::dsp::FeatureExtractor::new(c.manifest.sampling_rate_hz);
    one.push_record(entry, &c.read(entry)?, &extractor, &cfg.pipeline)?;
    let row = one.samples[0].row(&model.sensors)?;
    let mut est = predict_weight_row(model, &row)?;
    est.location_id = loc;
    est.sample = Some(id.to_string());
    Ok(est)
}

fn evaluate(cfg: &RunConfig, dataset: &Path, out: &Path, study: &str) -> Result<()> {
    let studies = if study == "all" {
        Study::ALL.to_vec()
    } else {
        vec![Study::parse(study)?]
    };
    let ds = DatasetContainer::open(dataset)?.features(&cfg.pipeline)?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let mut all_rows = Vec::new();
    for st in studies {
        let rows = match st {
            Study::Ablation => run_ablation_study(&ds, &cfg.study, &cfg.estimator, cfg.seed)?,
            Study::DataEfficiency => run_data_efficiency_study(&ds, &cfg.study, &cfg.estimator, cfg.seed)?,
            Study::Sensor => run_sensor_study(&ds, &cfg.study, &cfg.estimator, cfg.seed)?,
            Study::DenseLayout => {
                let dense = simulate_features(
                    &cfg.setup,
                    &cfg.dataset.sites,
                    &cfg.study.dense.ladder(),
                    cfg.dataset.samples_per_class,
                    seed::derive(cfg.seed, "dense-layout", &[]),
                    &cfg.pipeline,
                )?;
                run_dense_layout_study(&dense, &cfg.study, &cfg.estimator, cfg.seed)?
            }
        };
        let path = out.join(format!("{}.tsv", st.name()));
        let file = std::fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        write_table(&rows, file)?;
        for r in &rows {
            println!("{}\t{}\t{}\tmae={:.3} g\tstd={:.3} g", r.study, r.cell, r.variant, r.metrics.mae_g, r.metrics.std_g);
        }
        all_rows.extend(rows);
    }
    let path = out.join("summary.kv");
    std::fs::write(&path, summary(&all_rows, cfg.seed).render()).map_err(|e| Error::Io { path, source: e })?;
    Ok(())
}

fn summary(rows: &[StudyRow], master_seed: u64) -> KvDoc {
    let mut doc = KvDoc::new();
    doc.text("format", "vibeweight-study-summary");
    doc.text("seed", &master_seed.to_string());
    doc.num("rows", rows.len() as f64);
    for (i, r) in rows.iter().enumerate() {
        let p = format!("row.{i}");
        doc.text(&format!("{p}.study"), &r.study);
        doc.text(&format!("{p}.cell"), &r.cell);
        doc.text(&format!("{p}.variant"), &r.variant);
        doc.text(&format!("{p}.params"), &r.params);
        doc.num(&format!("{p}.mae_g"), r.metrics.mae_g);
        doc.num(&format!("{p}.std_g"), r.metrics.std_g);
        doc.num(&format!("{p}.n_pairs"), r.metrics.n_pairs as f64);
        doc.num(&format!("{p}.large_change_resolved"), r.metrics.large_change_resolved);
        doc.num(&format!("{p}.seeds"), r.seeds as f64);
        let per_loc: Vec<f64> = r.metrics.by_location.iter().map(|g| g.mae_g).collect();
        doc.vector(&format!("{p}.location_mae_g"), &per_loc);
    }
    doc
}
