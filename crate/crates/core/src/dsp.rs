//! Onset detection, windowing and spectral features.
//!
//! Each impulse found on the reference channel yields one window per channel
//! that starts `pre_trigger_s` before the onset and lasts `window_s`. A 1.0 s
//! window gives DFT bins exactly 1 Hz apart, so the feature vector is the DFT
//! magnitude at the integer frequencies of the feature band (rectangular
//! window, no padding).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::{ChannelRole, VibrationRecord};

pub const BAND_START_HZ: usize = 50;
pub const BAND_END_HZ: usize = 240;
pub const FEATURE_LEN: usize = BAND_END_HZ - BAND_START_HZ + 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnsetParams {
    pub threshold_factor: f64,
    pub refractory_s: f64,
    /// Length of the trailing RMS window.
    pub envelope_s: f64,
    /// Threshold floor as a fraction of the envelope maximum.
    pub min_relative_level: f64,
}

impl Default for OnsetParams {
    fn default() -> Self {
        Self {
            threshold_factor: 5.0,
            refractory_s: 1.5,
            envelope_s: 0.01,
            min_relative_level: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowParams {
    pub window_s: f64,
    pub pre_trigger_s: f64,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self {
            window_s: 1.0,
            pre_trigger_s: 0.1,
        }
    }
}

/// Trailing RMS envelope: `env[i] = rms(x[i+1-w ..= i])`, shorter at the start.
pub fn rms_envelope(x: &[f32], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0f64;
    for i in 0..x.len() {
        acc += (x[i] as f64).powi(2);
        if i >= window {
            acc -= (x[i - window] as f64).powi(2);
        }
        // running subtraction leaves rounding residue; clamp it away
        if acc < 0.0 {
            acc = 0.0;
        }
        let len = (i + 1).min(window);
        out.push((acc / len as f64).sqrt());
    }
    out
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    *m
}

/// Onset times (s) of impulses on the reference channel.
///
/// An onset is the first sample whose envelope exceeds
/// `max(threshold_factor × median(envelope), min_relative_level × max(envelope))`
/// at least `refractory_s` after the previous onset.
pub fn detect_onsets(reference: &[f32], sampling_rate_hz: f64, params: &OnsetParams) -> Vec<f64> {
    if reference.is_empty() {
        return Vec::new();
    }
    let w = (params.envelope_s * sampling_rate_hz).round() as usize;
    let env = rms_envelope(reference, w);
    let peak = env.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Vec::new();
    }
    let threshold = (params.threshold_factor * median(&env)).max(params.min_relative_level * peak);
    let refractory = (params.refractory_s * sampling_rate_hz).round() as usize;

    let mut onsets = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &e) in env.iter().enumerate() {
        if e > threshold && last.is_none_or(|l| i >= l + refractory) {
            onsets.push(i as f64 / sampling_rate_hz);
            last = Some(i);
        }
    }
    onsets
}

/// Fixed-length slice of every channel around one onset.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleWindow {
    pub onset_time_s: f64,
    pub start_sample: usize,
    pub sampling_rate_hz: u32,
    pub roles: Vec<ChannelRole>,
    pub channels: Vec<Vec<f32>>,
}

impl SampleWindow {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel_of_sensor(&self, sensor_id: u32) -> Option<usize> {
        self.roles
            .iter()
            .position(|r| *r == ChannelRole::Shelf { sensor_id })
    }
}

/// Cuts one window per onset; windows that would leave the record are dropped.
pub fn segment(record: &VibrationRecord, onsets: &[f64], params: &WindowParams) -> Vec<SampleWindow> {
    let fs = record.sampling_rate_hz as f64;
    let len = (params.window_s * fs).round() as usize;
    let pre = (params.pre_trigger_s * fs).round() as i64;
    let total = record.len();
    onsets
        .iter()
        .filter_map(|&onset| {
            let start = (onset * fs).round() as i64 - pre;
            if start < 0 || start as usize + len > total {
                return None;
            }
            let start = start as usize;
            Some(SampleWindow {
                onset_time_s: onset,
                start_sample: start,
                sampling_rate_hz: record.sampling_rate_hz,
                roles: record.roles.clone(),
                channels: record
                    .channels
                    .iter()
                    .map(|c| c[start..start + len].to_vec())
                    .collect(),
            })
        })
        .collect()
}

/// Spectral magnitudes of one window channel over the feature band.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub magnitudes: Vec<f64>,
    pub channel: usize,
    pub onset_time_s: f64,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }
}

/// Reusable FFT plan for one window length.
pub struct FeatureExtractor {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl FeatureExtractor {
    /// Extractor for 1.0 s windows at `sampling_rate_hz`.
    pub fn new(sampling_rate_hz: u32) -> Self {
        let len = sampling_rate_hz as usize;
        Self {
            fft: FftPlanner::new().plan_fft_forward(len),
            len,
        }
    }

    /// Complex DFT of `samples` at bins `BAND_START_HZ..=BAND_END_HZ`.
    pub fn band_spectrum(&self, samples: &[f32]) -> Result<Vec<Complex64>> {
        if samples.len() != self.len {
            return Err(Error::WindowLength {
                expected: self.len,
                actual: samples.len(),
            });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
        self.fft.process(&mut buf);
        Ok(buf[BAND_START_HZ..=BAND_END_HZ].to_vec())
    }

    pub fn extract(&self, window: &SampleWindow, channel: usize) -> Result<FeatureVector> {
        if window.sampling_rate_hz as usize != self.len {
            return Err(Error::WindowLength {
                expected: self.len,
                actual: window.sampling_rate_hz as usize,
            });
        }
        let samples = window
            .channels
            .get(channel)
            .ok_or_else(|| Error::invalid(format!("window has no channel {channel}")))?;
        let magnitudes = self.band_spectrum(samples)?.iter().map(|c| c.norm()).collect();
        Ok(FeatureVector {
            magnitudes,
            channel,
            onset_time_s: window.onset_time_s,
        })
    }
}

/// Feature vector of `channel` in a window of exactly 1.0 s.
pub fn extract_features(window: &SampleWindow, channel: usize) -> Result<FeatureVector> {
    let expected = window.sampling_rate_hz as usize;
    if window.len() != expected {
        return Err(Error::WindowLength {
            expected,
            actual: window.len(),
        });
    }
    FeatureExtractor::new(window.sampling_rate_hz).extract(window, channel)
}

/// Shelf-channel features of one impulse window, keyed by sensor id.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowFeatures {
    pub onset_time_s: f64,
    pub by_sensor: Vec<(u32, FeatureVector)>,
}

/// Full record → features pipeline: onsets on the reference, segmentation,
/// and features for every shelf channel of every window.
pub fn featurize_record(
    record: &VibrationRecord,
    extractor: &FeatureExtractor,
    onset: &OnsetParams,
    window: &WindowParams,
) -> Result<Vec<WindowFeatures>> {
    let fs = record.sampling_rate_hz as f64;
    let onsets = detect_onsets(record.reference(), fs, onset);
    let windows = segment(record, &onsets, window);
    let shelf = record.shelf_channels();
    windows
        .iter()
        .map(|w| {
            let by_sensor = shelf
                .iter()
                .map(|&(id, ch)| Ok((id, extractor.extract(w, ch)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(WindowFeatures {
                onset_time_s: w.onset_time_s,
                by_sensor,
            })
        })
        .collect()
}
