//! Audio to features, and audio to a detection: per-frame classification,
//! Doppler tracking, climax detection and the eight-frame vote.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio_io::{apply_window, frame_signal, load_wav, Frame, FramingConfig, SampleBuffer, Window};
use crate::class::SoundClass;
use crate::classifiers::ClassifierModel;
use crate::decision::{detect_climax, finalize_detection, track_frames, Band, DetectionResult, FrameTrack, VOTE_FRAMES};
use crate::error::{Error, Result};
use crate::features::{assemble_feature_vector, feature_names, fft_magnitude, FeatureTable, LpcConfig, MfccConfig, Spectrum};
use crate::synth::{read_manifest, MANIFEST_FILE};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub framing: FramingConfig,
    pub mfcc: MfccConfig,
    pub lpc: LpcConfig,
    pub band: Band,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("pipeline config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn feature_names(&self) -> Vec<String> {
        feature_names(self.mfcc.n_coeffs, self.lpc.order)
    }

    fn unwindowed(&self) -> FramingConfig {
        FramingConfig { window: Window::Rectangular, ..self.framing }
    }
}

/// Feature vector of every frame; `None` where the frame carries no signal.
pub fn frame_features(buffer: &SampleBuffer, config: &PipelineConfig) -> Result<Vec<Option<Vec<f64>>>> {
    let frames = frame_signal(buffer, &config.unwindowed())?;
    frames
        .iter()
        .map(|f| match assemble_feature_vector(f, &config.mfcc, &config.lpc) {
            Ok(v) => Ok(Some(v.to_vec())),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Feature rows of one clip; silent frames are dropped.
pub fn clip_rows(buffer: &SampleBuffer, config: &PipelineConfig) -> Result<Vec<Vec<f64>>> {
    Ok(frame_features(buffer, config)?.into_iter().flatten().collect())
}

/// Extracts one row per frame from every clip listed in `dir`'s manifest, in manifest order.
pub fn extract_corpus(dir: impl AsRef<Path>, config: &PipelineConfig) -> Result<FeatureTable> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let manifest = dir.join(MANIFEST_FILE);
    if !manifest.exists() {
        return Err(Error::InsufficientData(format!("no {MANIFEST_FILE} in {}", dir.display())));
    }
    let rows = read_manifest(&manifest)?;
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!("{} lists no clips", manifest.display())));
    }
    let per_clip = rows
        .par_iter()
        .map(|row| {
            let buffer = load_wav(dir.join(&row.file))?;
            clip_rows(&buffer, config).map(|r| (row.class, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = FeatureTable { names: config.feature_names(), ..Default::default() };
    for (class, rows) in per_clip {
        table.labels.extend(std::iter::repeat_n(Some(class), rows.len()));
        table.rows.extend(rows);
    }
    Ok(table)
}

/// Hann-windowed magnitude spectrum of each frame, for frequency tracking.
pub fn tracking_spectra(frames: &[Frame]) -> Result<Vec<Spectrum>> {
    frames.iter().map(|f| fft_magnitude(&apply_window(f.clone(), Window::Hann))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub track: FrameTrack,
    pub result: DetectionResult,
}

/// Full three-phase analysis of one clip. Silent frames are labeled NV.
pub fn analyze(buffer: &SampleBuffer, model: &ClassifierModel, config: &PipelineConfig) -> Result<Analysis> {
    let frames = frame_signal(buffer, &config.unwindowed())?;
    if frames.len() < VOTE_FRAMES {
        return Err(Error::InsufficientData(format!("clip has {} frames, detection needs at least {VOTE_FRAMES}", frames.len())));
    }
    let labels = frame_features(buffer, config)?
        .iter()
        .map(|v| match v {
            Some(v) => model.predict(v),
            None => Ok(SoundClass::NV),
        })
        .collect::<Result<Vec<_>>>()?;
    let spectra = tracking_spectra(&frames)?;
    let track = track_frames(&frames, &spectra, &labels, config.band)?;
    let climax = detect_climax(&track)?;
    let result = finalize_detection(&track, climax)?;
    Ok(Analysis { track, result })
}

pub fn detect(buffer: &SampleBuffer, model: &ClassifierModel, config: &PipelineConfig) -> Result<DetectionResult> {
    analyze(buffer, model, config).map(|a| a.result)
}
