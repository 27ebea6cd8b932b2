//! Dataset directory: `manifest.json` plus one WVB1 file per record.

use std::path::{Path, PathBuf};

use crate::dsp::FeatureExtractor;
use crate::error::{Error, Result};
use crate::evaluation::{FeatureDataset, PipelineParams};
use crate::io::wvb;
use crate::simulator::{generate_dataset, ChannelRole, DatasetManifest, DatasetSpec, ManifestEntry, SimulationSetup, VibrationRecord};

pub const MANIFEST: &str = "manifest.json";

pub struct DatasetContainer {
    pub dir: PathBuf,
    pub manifest: DatasetManifest,
}

impl DatasetContainer {
    /// Simulates the dataset straight into `dir`, which must be empty or absent.
    pub fn create(dir: &Path, setup: &SimulationSetup, spec: &DatasetSpec, seed: u64) -> Result<Self> {
        if dir.exists() {
            let mut it = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
            if it.next().is_some() {
                return Err(Error::invalid(format!("{} is not empty", dir.display())));
            }
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = generate_dataset(setup, &spec.sites, &spec.weights_g, spec.samples_per_class, seed, |entry, record| {
            wvb::write_record(&dir.join(&entry.file), &record)
        })?;
        let path = dir.join(MANIFEST);
        let json = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(DatasetContainer {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn open(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: DatasetManifest = serde_json::from_str(&text)?;
        let refs = manifest.channel_roles.iter().filter(|r| matches!(r, ChannelRole::Reference)).count();
        if refs != 1 {
            return Err(Error::HeaderMismatch(format!("manifest declares {refs} reference channels")));
        }
        Ok(DatasetContainer {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    fn expected_samples(&self) -> usize {
        self.manifest.setup.train.sample_count(self.manifest.sampling_rate_hz)
    }

    pub fn read(&self, entry: &ManifestEntry) -> Result<VibrationRecord> {
        let path = self.dir.join(&entry.file);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let header = wvb::decode_header(&bytes)?;
        if header.sampling_rate_hz != self.manifest.sampling_rate_hz {
            return Err(Error::HeaderMismatch(format!(
                "{}: {} Hz in file, {} Hz in manifest",
                entry.file, header.sampling_rate_hz, self.manifest.sampling_rate_hz
            )));
        }
        if header.samples as usize != self.expected_samples() {
            return Err(Error::HeaderMismatch(format!(
                "{}: {} samples in file, {} expected",
                entry.file,
                header.samples,
                self.expected_samples()
            )));
        }
        wvb::decode(&bytes, self.manifest.channel_roles.clone())
    }

    pub fn read_id(&self, id: &str) -> Result<VibrationRecord> {
        let entry = self
            .manifest
            .entry(id)
            .ok_or_else(|| Error::invalid(format!("no sample '{id}' in dataset")))?;
        self.read(entry)
    }

    /// Features of every record in manifest order.
    pub fn features(&self, pipeline: &PipelineParams) -> Result<FeatureDataset> {
        let extractor = FeatureExtractor::new(self.manifest.sampling_rate_hz);
        let mut ds = FeatureDataset::default();
        for entry in &self.manifest.entries {
            ds.push_record(entry, &self.read(entry)?, &extractor, pipeline)?;
        }
        Ok(ds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::LoadSite;

    fn small() -> (SimulationSetup, DatasetSpec) {
        let setup = SimulationSetup::default();
        let spec = DatasetSpec {
            sites: vec![LoadSite { id: 1, x: 0.3, y: 0.3 }],
            weights_g: vec![100.0, 200.0],
            samples_per_class: 2,
        };
        (setup, spec)
    }

    #[test]
    fn create_open_read() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("ds");
        let (setup, spec) = small();
        let made = DatasetContainer::create(&dir, &setup, &spec, 3).unwrap();
        assert_eq!(made.manifest.entries.len(), 4);
        let c = DatasetContainer::open(&dir).unwrap();
        assert_eq!(c.manifest, made.manifest);
        let rec = c.read_id("L1-W200-S001").unwrap();
        let again = crate::simulator::synthesize_record(
            &setup,
            &crate::plate::PointLoad::new(&setup.plate, 0.2, 0.3, 0.3).unwrap(),
            c.manifest.entry("L1-W200-S001").unwrap().seed,
        )
        .unwrap();
        assert_eq!(rec, again);
        assert_eq!(c.features(&PipelineParams::default()).unwrap().samples.len(), 4);
        assert!(DatasetContainer::create(&dir, &setup, &spec, 3).is_err());
    }

    #[test]
    fn mismatched_file_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let (setup, spec) = small();
        let c = DatasetContainer::create(tmp.path(), &setup, &spec, 3).unwrap();
        let entry = c.manifest.entries[0].clone();
        let rec = c.read(&entry).unwrap();
        let short = VibrationRecord::new(rec.sampling_rate_hz, rec.roles.clone(), rec.channels.iter().map(|ch| ch[..100].to_vec()).collect()).unwrap();
        wvb::write_record(&tmp.path().join(&entry.file), &short).unwrap();
        assert!(matches!(c.read(&entry), Err(Error::HeaderMismatch(_))));
        std::fs::remove_file(tmp.path().join(&entry.file)).unwrap();
        assert!(matches!(c.read(&entry), Err(Error::Io { .. })));
    }
}
