//! Synthetic multi-channel vibration records.
//!
//! Shelf channels are synthesized in the frequency domain on the record's own
//! FFT grid: the reference excitation is transformed, multiplied bin by bin by
//! the plate transfer function from the excitation point to each sensor, and
//! transformed back. Content outside the sensing band is zeroed, and optional
//! Gaussian noise (white inside the band) is added at a requested SNR.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plate::{
    ExcitationSpec, ModalSuperposition, PlateModel, PointLoad, SensorPosition, Truncation,
};
use crate::seed;

/// Periodic band-limited impulse applied at the excitation point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpulseTrainSpec {
    pub central_frequency_hz: f64,
    pub period_s: f64,
    /// Peak force, N.
    pub amplitude: f64,
    pub count: u32,
    /// Half support of the tapered sinc, s.
    pub sinc_half_width_s: f64,
    /// Start of the first burst, s.
    pub lead_s: f64,
}

impl Default for ImpulseTrainSpec {
    fn default() -> Self {
        Self {
            central_frequency_hz: 10.0,
            period_s: 2.0,
            amplitude: 1.0,
            count: 1,
            sinc_half_width_s: 0.0025,
            lead_s: 0.2,
        }
    }
}

impl ImpulseTrainSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.central_frequency_hz > 0.0) {
            return Err(Error::invalid("central_frequency_hz must be > 0"));
        }
        if !(self.period_s >= 1.2) {
            return Err(Error::invalid(format!(
                "period_s must be >= 1.2 s to hold a sample window, got {}",
                self.period_s
            )));
        }
        if self.count == 0 {
            return Err(Error::invalid("impulse count must be >= 1"));
        }
        if !(self.sinc_half_width_s > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::invalid("sinc_half_width_s must be > 0 and amplitude finite"));
        }
        if !(self.lead_s >= 0.0 && self.lead_s + 2.0 * self.sinc_half_width_s < self.period_s) {
            return Err(Error::invalid("lead_s must place each burst inside its period"));
        }
        Ok(())
    }

    pub fn duration_s(&self) -> f64 {
        self.count as f64 * self.period_s
    }

    /// Times at which each burst starts.
    pub fn burst_times(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.lead_s + k as f64 * self.period_s)
            .collect()
    }

    /// Force at time `t`: `A·sinc(2 f_c τ)` Hann-tapered over `|τ| ≤ half_width`,
    /// τ measured from the burst centre.
    pub fn force_at(&self, t: f64) -> f64 {
        let hw = self.sinc_half_width_s;
        let mut total = 0.0;
        for start in self.burst_times() {
            let tau = t - (start + hw);
            if tau.abs() <= hw {
                let x = 2.0 * self.central_frequency_hz * tau;
                let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
                let taper = 0.5 * (1.0 + (PI * tau / hw).cos());
                total += self.amplitude * sinc * taper;
            }
        }
        total
    }

    pub fn sample_count(&self, sampling_rate_hz: u32) -> usize {
        (self.duration_s() * sampling_rate_hz as f64).round() as usize
    }

    pub fn sample(&self, sampling_rate_hz: u32) -> Vec<f64> {
        let n = self.sample_count(sampling_rate_hz);
        let fs = sampling_rate_hz as f64;
        (0..n).map(|i| self.force_at(i as f64 / fs)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "lowercase")]
pub enum ChannelRole {
    Reference,
    Shelf { sensor_id: u32 },
}

/// Time-domain multi-channel signal.
#[derive(Clone, Debug, PartialEq)]
pub struct VibrationRecord {
    pub sampling_rate_hz: u32,
    pub roles: Vec<ChannelRole>,
    pub channels: Vec<Vec<f32>>,
}

impl VibrationRecord {
    pub fn new(sampling_rate_hz: u32, roles: Vec<ChannelRole>, channels: Vec<Vec<f32>>) -> Result<Self> {
        let rec = Self {
            sampling_rate_hz,
            roles,
            channels,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sampling_rate_hz <= 480 {
            return Err(Error::invalid(format!(
                "sampling rate {} Hz does not resolve 240 Hz",
                self.sampling_rate_hz
            )));
        }
        if self.roles.len() != self.channels.len() {
            return Err(Error::HeaderMismatch(format!(
                "{} roles for {} channels",
                self.roles.len(),
                self.channels.len()
            )));
        }
        let refs = self
            .roles
            .iter()
            .filter(|r| matches!(r, ChannelRole::Reference))
            .count();
        if refs != 1 {
            return Err(Error::invalid(format!("need exactly one reference channel, got {refs}")));
        }
        if let Some(first) = self.channels.first() {
            if self.channels.iter().any(|c| c.len() != first.len()) {
                return Err(Error::invalid("channels differ in length"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sampling_rate_hz as f64
    }

    pub fn reference_index(&self) -> usize {
        self.roles
            .iter()
            .position(|r| matches!(r, ChannelRole::Reference))
            .expect("validated record has a reference channel")
    }

    pub fn reference(&self) -> &[f32] {
        &self.channels[self.reference_index()]
    }

    /// `(sensor_id, channel index)` for every shelf channel.
    pub fn shelf_channels(&self) -> Vec<(u32, usize)> {
        self.roles
            .iter()
            .enumerate()
            .filter_map(|(i, r)| match r {
                ChannelRole::Shelf { sensor_id } => Some((*sensor_id, i)),
                ChannelRole::Reference => None,
            })
            .collect()
    }
}

/// Digitization and noise settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionSpec {
    pub sampling_rate_hz: u32,
    /// `None` for noise-free synthesis.
    pub noise_snr_db: Option<f64>,
    /// Shelf channels carry only content inside `[low, high]` Hz.
    pub sensor_band_hz: [f64; 2],
}

impl Default for AcquisitionSpec {
    fn default() -> Self {
        Self {
            sampling_rate_hz: 51_200,
            noise_snr_db: Some(30.0),
            sensor_band_hz: [10.0, 400.0],
        }
    }
}

/// Everything needed to synthesize a record apart from the load and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSetup {
    pub plate: PlateModel,
    /// Point where the excitation enters the shelf.
    pub source: SensorPosition,
    /// Shelf sensors; sensor ids are 1-based positions in this list.
    pub sensors: Vec<SensorPosition>,
    pub train: ImpulseTrainSpec,
    pub acquisition: AcquisitionSpec,
    pub truncation: Truncation,
}

impl Default for SimulationSetup {
    fn default() -> Self {
        let plate = PlateModel::default();
        let (a, b) = (plate.length_a, plate.width_b);
        Self {
            plate,
            source: SensorPosition { x: 0.80, y: 0.40 },
            sensors: vec![
                SensorPosition { x: a - 0.05, y: b / 2.0 },
                SensorPosition { x: a / 2.0, y: 0.05 },
                SensorPosition { x: 0.05, y: b / 2.0 },
            ],
            train: ImpulseTrainSpec::default(),
            acquisition: AcquisitionSpec::default(),
            truncation: Truncation::default(),
        }
    }
}

impl SimulationSetup {
    pub fn validate(&self) -> Result<()> {
        self.plate.validate()?;
        self.train.validate()?;
        self.plate.check_inside(self.source.x, self.source.y)?;
        if self.sensors.is_empty() {
            return Err(Error::invalid("at least one shelf sensor required"));
        }
        for s in &self.sensors {
            self.plate.check_inside(s.x, s.y)?;
        }
        let acq = &self.acquisition;
        let nyquist = acq.sampling_rate_hz as f64 / 2.0;
        let [lo, hi] = acq.sensor_band_hz;
        if !(lo > 0.0 && lo < hi && hi < nyquist) {
            return Err(Error::invalid(format!(
                "sensor band [{lo}, {hi}] Hz must satisfy 0 < low < high < {nyquist}"
            )));
        }
        if acq.sampling_rate_hz <= 480 {
            return Err(Error::invalid("sampling rate must exceed 480 Hz"));
        }
        if let Some(snr) = acq.noise_snr_db {
            if !snr.is_finite() {
                return Err(Error::invalid("noise_snr_db must be finite"));
            }
        }
        Truncation::new(self.truncation.max_m, self.truncation.max_n)?;
        Ok(())
    }

    pub fn channel_roles(&self) -> Vec<ChannelRole> {
        std::iter::once(ChannelRole::Reference)
            .chain((1..=self.sensors.len() as u32).map(|sensor_id| ChannelRole::Shelf { sensor_id }))
            .collect()
    }

    pub fn excitation_point(&self) -> ExcitationSpec {
        ExcitationSpec::unit_impulse_at(self.source.x, self.source.y)
    }
}

/// Clean shelf spectra for one load, ready to render noisy records.
pub struct RecordSynthesizer {
    sampling_rate_hz: u32,
    roles: Vec<ChannelRole>,
    reference: Vec<f32>,
    /// Full-length (Hermitian) spectrum of each shelf channel.
    spectra: Vec<Vec<Complex64>>,
    /// Mean square of each clean shelf channel.
    clean_power: Vec<f64>,
    band_bins: std::ops::RangeInclusive<usize>,
    noise_snr_db: Option<f64>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RecordSynthesizer {
    pub fn new(setup: &SimulationSetup, load: &PointLoad) -> Result<Self> {
        setup.validate()?;
        setup.plate.check_inside(load.x, load.y)?;
        let fs = setup.acquisition.sampling_rate_hz;
        let reference: Vec<f32> = setup.train.sample(fs).iter().map(|&v| v as f32).collect();
        let n = reference.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let mut ref_spec: Vec<Complex64> =
            reference.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
        forward.process(&mut ref_spec);

        let df = fs as f64 / n as f64;
        let [lo, hi] = setup.acquisition.sensor_band_hz;
        let k_lo = (lo / df).ceil() as usize;
        let k_hi = ((hi / df).floor() as usize).min((n - 1) / 2);
        let band_bins = k_lo.max(1)..=k_hi;

        let excitation = setup.excitation_point();
        let mut spectra = Vec::with_capacity(setup.sensors.len());
        let mut clean_power = Vec::with_capacity(setup.sensors.len());
        for sensor in &setup.sensors {
            let modal = ModalSuperposition::new(&setup.plate, load, &excitation, sensor, setup.truncation);
            let mut spec = vec![Complex64::new(0.0, 0.0); n];
            let mut energy = 0.0;
            for k in band_bins.clone() {
                let omega = 2.0 * PI * k as f64 * df;
                let h = modal.eval(omega, Complex64::new(1.0, 0.0))?;
                let y = h * ref_spec[k];
                spec[k] = y;
                spec[n - k] = y.conj();
                energy += 2.0 * y.norm_sqr();
            }
            spectra.push(spec);
            clean_power.push(energy / (n as f64 * n as f64));
        }

        Ok(Self {
            sampling_rate_hz: fs,
            roles: setup.channel_roles(),
            reference,
            spectra,
            clean_power,
            band_bins,
            noise_snr_db: setup.acquisition.noise_snr_db,
            inverse,
        })
    }

    pub fn clean_power(&self) -> &[f64] {
        &self.clean_power
    }

    /// Record with noise drawn from `seed` (noise-free if no SNR is set).
    pub fn render(&self, seed: u64) -> VibrationRecord {
        self.render_with(self.noise_snr_db, seed)
    }

    pub fn render_clean(&self) -> VibrationRecord {
        self.render_with(None, 0)
    }

    fn render_with(&self, snr_db: Option<f64>, seed: u64) -> VibrationRecord {
        let n = self.reference.len();
        let bins = self.band_bins.end() + 1 - self.band_bins.start();
        let mut channels = Vec::with_capacity(self.spectra.len() + 1);
        channels.push(self.reference.clone());
        for (ch, spec) in self.spectra.iter().enumerate() {
            let mut buf = spec.clone();
            if let Some(snr) = snr_db {
                let sigma = (self.clean_power[ch] / 10f64.powf(snr / 10.0)).sqrt();
                let scale = n as f64 * sigma / (2.0 * (bins as f64).sqrt());
                let mut rng = seed::rng(seed::derive(seed, "noise", &[ch as u64]));
                for k in self.band_bins.clone() {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    let z = Complex64::new(re, im) * scale;
                    buf[k] += z;
                    buf[n - k] += z.conj();
                }
            }
            self.inverse.process(&mut buf);
            let inv_n = 1.0 / n as f64;
            channels.push(buf.iter().map(|c| (c.re * inv_n) as f32).collect());
        }
        VibrationRecord {
            sampling_rate_hz: self.sampling_rate_hz,
            roles: self.roles.clone(),
            channels,
        }
    }
}

/// One record: the reference excitation plus every shelf sensor's response
/// to `load`.
pub fn synthesize_record(setup: &SimulationSetup, load: &PointLoad, seed: u64) -> Result<VibrationRecord> {
    Ok(RecordSynthesizer::new(setup, load)?.render(seed))
}

/// Position at which items are placed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSite {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub location_id: u32,
    pub weight_g: f64,
    pub sample_index: u32,
    pub file: String,
    pub seed: u64,
}

/// Description of a generated dataset. Serialized as `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub setup: SimulationSetup,
    pub channel_roles: Vec<ChannelRole>,
    pub sampling_rate_hz: u32,
    pub sites: Vec<LoadSite>,
    pub weights_g: Vec<f64>,
    pub samples_per_class: u32,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn site(&self, id: u32) -> Option<&LoadSite> {
        self.sites.iter().find(|s| s.id == id)
    }

    pub fn entry(&self, id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

/// Load grid of a dataset: where items sit, which weights, how many repeats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub sites: Vec<LoadSite>,
    pub weights_g: Vec<f64>,
    pub samples_per_class: u32,
}

impl Default for DatasetSpec {
    /// Four sites 0.1524 m apart along the shelf, 50–500 g in 50 g steps, 28 repeats.
    fn default() -> Self {
        DatasetSpec {
            sites: (0..4)
                .map(|k| LoadSite {
                    id: k + 1,
                    x: 0.2286 + 0.1524 * k as f64,
                    y: 0.30,
                })
                .collect(),
            weights_g: (1..=10).map(|k| 50.0 * k as f64).collect(),
            samples_per_class: 28,
        }
    }
}

pub fn sample_id(location_id: u32, weight_g: f64, sample_index: u32) -> String {
    format!("L{location_id}-W{weight_g}-S{sample_index:03}")
}

/// Generates `|sites| × |weights| × samples_per_class` records, handing each to
/// `sink` in manifest order. Per-sample seeds are derived from `seed`.
pub fn generate_dataset<F>(
    setup: &SimulationSetup,
    sites: &[LoadSite],
    weights_g: &[f64],
    samples_per_class: u32,
    seed: u64,
    mut sink: F,
) -> Result<DatasetManifest>
where
    F: FnMut(&ManifestEntry, VibrationRecord) -> Result<()>,
{
    setup.validate()?;
    if sites.is_empty() || weights_g.is_empty() || samples_per_class == 0 {
        return Err(Error::invalid("dataset needs locations, weights and samples_per_class >= 1"));
    }
    for site in sites {
        setup.plate.check_inside(site.x, site.y)?;
    }
    if weights_g.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("weights must be finite and >= 0"));
    }

    let mut entries = Vec::with_capacity(sites.len() * weights_g.len() * samples_per_class as usize);
    for site in sites {
        for &weight_g in weights_g {
            let load = PointLoad::new(&setup.plate, weight_g / 1000.0, site.x, site.y)?;
            let synth = RecordSynthesizer::new(setup, &load)?;
            for sample_index in 0..samples_per_class {
                let sample_seed = seed::derive(
                    seed,
                    "sample",
                    &[site.id as u64, seed::weight_key(weight_g), sample_index as u64],
                );
                let id = sample_id(site.id, weight_g, sample_index);
                let entry = ManifestEntry {
                    file: format!("{id}.wvb"),
                    id,
                    location_id: site.id,
                    weight_g,
                    sample_index,
                    seed: sample_seed,
                };
                sink(&entry, synth.render(sample_seed))?;
                entries.push(entry);
            }
        }
    }

    Ok(DatasetManifest {
        setup: setup.clone(),
        channel_roles: setup.channel_roles(),
        sampling_rate_hz: setup.acquisition.sampling_rate_hz,
        sites: sites.to_vec(),
        weights_g: weights_g.to_vec(),
        samples_per_class,
        seed,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plate::{damped_peak_frequency, ModalIndex};

    fn quiet(setup: &mut SimulationSetup) {
        setup.acquisition.noise_snr_db = None;
    }

    fn spectrum(x: &[f32]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        buf
    }

    #[test]
    fn same_seed_same_bits() {
        let setup = SimulationSetup::default();
        let load = PointLoad::new(&setup.plate, 0.2, 0.3, 0.3).unwrap();
        let a = synthesize_record(&setup, &load, 11).unwrap();
        let b = synthesize_record(&setup, &load, 11).unwrap();
        assert_eq!(a, b);
        let c = synthesize_record(&setup, &load, 12).unwrap();
        assert_ne!(a.channels[1], c.channels[1]);
        assert_eq!(a.channels[0], c.channels[0]);
    }

    #[test]
    fn load_changes_shelf_not_reference() {
        let mut setup = SimulationSetup::default();
        quiet(&mut setup);
        let l1 = PointLoad::new(&setup.plate, 0.1, 0.3, 0.3).unwrap();
        let l2 = l1.with_mass(0.2);
        let a = synthesize_record(&setup, &l1, 0).unwrap();
        let b = synthesize_record(&setup, &l2, 0).unwrap();
        assert_eq!(a.reference(), b.reference());
        let (sa, sb) = (spectrum(&a.channels[1]), spectrum(&b.channels[1]));
        let df = 1.0 / a.duration_s();
        let differs = (50..=240)
            .map(|f| (f as f64 / df) as usize)
            .filter(|&k| (sa[k] - sb[k]).norm() > 1e-3 * sa[k].norm())
            .count();
        assert!(differs > 100, "{differs}");
    }

    #[test]
    fn single_mode_peak_at_damped_frequency() {
        let mut setup = SimulationSetup::default();
        quiet(&mut setup);
        setup.truncation = Truncation::new(1, 1).unwrap();
        let load = PointLoad::new(&setup.plate, 0.0, 0.3, 0.3).unwrap();
        let rec = synthesize_record(&setup, &load, 0).unwrap();
        let spec = spectrum(&rec.channels[1]);
        let df = 1.0 / rec.duration_s();
        let (k_lo, k_hi) = ((10.0 / df) as usize, (400.0 / df) as usize);
        let peak = (k_lo..=k_hi)
            .max_by(|&i, &j| spec[i].norm().partial_cmp(&spec[j].norm()).unwrap())
            .unwrap();
        let expected = damped_peak_frequency(&setup.plate, ModalIndex::new(1, 1).unwrap()) / (2.0 * PI);
        assert!((peak as f64 * df - expected).abs() <= df, "{} vs {expected}", peak as f64 * df);
    }

    #[test]
    fn measured_snr_matches_request() {
        let setup = SimulationSetup::default();
        let load = PointLoad::new(&setup.plate, 0.25, 0.38, 0.3).unwrap();
        let synth = RecordSynthesizer::new(&setup, &load).unwrap();
        let clean = synth.render_clean();
        let mut acc = 0.0;
        let seeds = 20;
        for s in 0..seeds {
            let noisy = synth.render(s);
            let (p_sig, p_noise) = clean.channels[1]
                .iter()
                .zip(&noisy.channels[1])
                .fold((0.0, 0.0), |(ps, pn), (&c, &y)| {
                    let d = (y - c) as f64;
                    (ps + (c as f64).powi(2), pn + d * d)
                });
            acc += 10.0 * (p_sig / p_noise).log10();
        }
        let measured = acc / seeds as f64;
        assert!((measured - 30.0).abs() <= 1.0, "{measured}");
    }

    #[test]
    fn dataset_shape_and_seeds() {
        let mut setup = SimulationSetup::default();
        setup.sensors.truncate(1);
        let sites = [LoadSite { id: 0, x: 0.3, y: 0.3 }];
        let mut count = 0;
        let m = generate_dataset(&setup, &sites, &[100.0], 1, 5, |_, _| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 1);
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.channel_roles.len(), 2);

        let bad = [LoadSite { id: 0, x: 2.0, y: 0.3 }];
        assert!(matches!(
            generate_dataset(&setup, &bad, &[100.0], 1, 5, |_, _| Ok(())),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn undamped_on_grid_resonance_is_error() {
        let mut setup = SimulationSetup::default();
        quiet(&mut setup);
        setup.plate.damping_ratio = 0.0;
        setup.truncation = Truncation::new(1, 1).unwrap();
        // scale rigidity so the (1,1) pole sits exactly on the 50 Hz bin
        let idx = ModalIndex::new(1, 1).unwrap();
        let k2 = setup.plate.wavenumber_sq(idx);
        let rho = setup.plate.areal_density;
        // resonance = (D/rho) k^2 => D = 2*pi*50*rho / k^2
        setup.plate.flexural_rigidity = 2.0 * PI * 50.0 * rho / k2;
        let load = PointLoad::new(&setup.plate, 0.0, 0.3, 0.3).unwrap();
        assert!(matches!(
            synthesize_record(&setup, &load, 0),
            Err(Error::Resonance { .. })
        ));
    }

    #[test]
    fn burst_starts_where_force_becomes_nonzero() {
        let t = ImpulseTrainSpec {
            count: 3,
            ..Default::default()
        };
        let x = t.sample(51_200);
        assert_eq!(x.len(), 3 * 102_400);
        for start in t.burst_times() {
            let i = (start * 51_200.0).round() as usize;
            assert_eq!(x[i], 0.0);
            assert!(x[i + 1] > 0.0);
            assert_eq!(x[i - 1], 0.0);
        }
    }
}
