//! Mono audio buffers, WAV I/O, and fixed-length framing.
//!
//! Frames never overlap: the hop equals the frame length and a trailing
//! partial frame is dropped.

use std::f64::consts::PI;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw mono audio.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl SampleBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("sample buffer"));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// One fixed-length slice of a [`SampleBuffer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    pub index: usize,
    /// Seconds from the start of the buffer.
    pub start_time: f64,
    pub sample_rate: u32,
}

impl Frame {
    /// A standalone frame (index 0), mostly useful in tests and examples.
    pub fn from_samples(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self { samples, index: 0, start_time: 0.0, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            (self.energy() / self.samples.len() as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    /// Window coefficients of length `n`. Hann is the symmetric form with zero endpoints.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann if n <= 1 => vec![1.0; n],
            Window::Hann => {
                let denom = (n - 1) as f64;
                (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / denom).cos()).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FramingConfig {
    /// Frame length in seconds.
    pub frame_length: f64,
    pub window: Window,
}

impl Default for FramingConfig {
    fn default() -> Self {
        Self { frame_length: 0.1, window: Window::Rectangular }
    }
}

impl FramingConfig {
    pub fn frame_samples(&self, sample_rate: u32) -> usize {
        (self.frame_length * sample_rate as f64).round() as usize
    }
}

/// Slices `buffer` into `floor(duration / frame_length)` non-overlapping frames,
/// each multiplied by `config.window`.
pub fn frame_signal(buffer: &SampleBuffer, config: &FramingConfig) -> Result<Vec<Frame>> {
    if !(config.frame_length > 0.0) {
        return Err(Error::InvalidConfig("frame length must be positive".into()));
    }
    let frame_len = config.frame_samples(buffer.sample_rate());
    if frame_len == 0 || buffer.len() < frame_len {
        return Err(Error::BufferTooShort { samples: buffer.len(), frame_len });
    }
    let frames = buffer
        .samples()
        .chunks_exact(frame_len)
        .enumerate()
        .map(|(index, chunk)| {
            let frame =
                Frame { samples: chunk.to_vec(), index, start_time: index as f64 * config.frame_length, sample_rate: buffer.sample_rate() };
            apply_window(frame, config.window)
        })
        .collect();
    Ok(frames)
}

pub fn apply_window(mut frame: Frame, window: Window) -> Frame {
    if window != Window::Rectangular {
        let coeffs = window.coefficients(frame.len());
        for (x, w) in frame.samples.iter_mut().zip(coeffs) {
            *x *= w;
        }
    }
    frame
}

/// Reads a PCM16 or float32 WAV file, averaging stereo to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<SampleBuffer> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let reader = hound::WavReader::open(path).map_err(|e| map_hound(e, path))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(Error::UnsupportedCodec(format!("{channels} channels")));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(e, path))?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(e, path))?,
        (format, bits) => return Err(Error::UnsupportedCodec(format!("{format:?} with {bits} bits per sample"))),
    };
    let mono = interleaved.chunks_exact(channels).map(|c| c.iter().sum::<f64>() / channels as f64).collect();
    SampleBuffer::new(mono, spec.sample_rate)
}

/// Writes a 16-bit PCM mono WAV. Samples are clamped to [-1, 1].
pub fn write_wav(path: impl AsRef<Path>, buffer: &SampleBuffer) -> Result<()> {
    let spec =
        hound::WavSpec { channels: 1, sample_rate: buffer.sample_rate(), bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec).map_err(|e| map_hound(e, path.as_ref()))?;
    for &s in buffer.samples() {
        writer.write_sample(to_pcm16(s)).map_err(|e| map_hound(e, path.as_ref()))?;
    }
    writer.finalize().map_err(|e| map_hound(e, path.as_ref()))?;
    Ok(())
}

/// The sample value a PCM16 round trip produces.
pub fn quantize_pcm16(x: f64) -> f64 {
    to_pcm16(x) as f64 / 32768.0
}

fn to_pcm16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

fn map_hound(err: hound::Error, path: &Path) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        hound::Error::IoError(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
            Error::NotWav(format!("{}: truncated file", path.display()))
        }
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::NotWav(format!("{}: {msg}", path.display())),
        hound::Error::Unsupported => Error::UnsupportedCodec(path.display().to_string()),
        other => Error::UnsupportedCodec(format!("{}: {other}", path.display())),
    }
}
